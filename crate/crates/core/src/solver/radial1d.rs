//! Conservative scheme for radial graphs over a ball exterior.
//!
//! Unknowns are the values at the interior radii `r_1 .. r_{N-1}`; `r_0` is the
//! obstacle and `r_N` the outer sphere. Face fluxes are
//! `F = r_f^(n-1) q / sqrt(1 + q^2)` with `q` the difference quotient across the
//! face and `r_f` the face midpoint.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub(crate) n: usize,
    /// All radii including both boundary radii.
    pub(crate) r: Vec<f64>,
}

impl RadialGrid {
    pub(crate) fn new(n: usize, r: Vec<f64>) -> Result<Self> {
        if r.len() < 4 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("radial grid needs at least 4 increasing radii".into()));
        }
        Ok(Self { n, r })
    }

    /// Radii from `r0` to `r_out`: spacing `h` up to `core`, then geometric growth up to `h_max`.
    pub(crate) fn graded(n: usize, r0: f64, r_out: f64, h: f64, core: f64, growth: f64, h_max: f64) -> Result<Self> {
        let mut r = vec![r0];
        let mut x = r0;
        let mut step = h;
        let mut k = 0usize;
        loop {
            if x >= core {
                step = (step * growth).min(h_max.max(h));
            }
            k += 1;
            let next = if x < core && step == h { r0 + k as f64 * h } else { x + step };
            if next >= r_out - 0.5 * step {
                break;
            }
            r.push(next);
            x = next;
        }
        r.push(r_out);
        Self::new(n, r)
    }

    /// Number of unknowns.
    pub(crate) fn len(&self) -> usize {
        self.r.len() - 2
    }

    fn weight(&self, r: f64) -> f64 {
        r.powi(self.n as i32 - 1)
    }

    /// Full nodal vector including boundary values.
    fn full(&self, u: &[f64], t: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.r.len());
        v.push(0.0);
        v.extend_from_slice(u);
        v.push(t);
        v
    }

    /// Face fluxes `F_{j+1/2}` for `j = 0 .. N-1` and their derivatives
    /// with respect to the right-hand value.
    pub(crate) fn fluxes(&self, u: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let v = self.full(u, t);
        let mut f = Vec::with_capacity(self.r.len() - 1);
        let mut df = Vec::with_capacity(self.r.len() - 1);
        for j in 0..self.r.len() - 1 {
            let dr = self.r[j + 1] - self.r[j];
            let q = (v[j + 1] - v[j]) / dr;
            let w = self.weight(0.5 * (self.r[j] + self.r[j + 1]));
            let a = 1.0 / (1.0 + q * q).sqrt();
            f.push(w * q * a);
            df.push(w * a * a * a / dr);
        }
        (f, df)
    }

    /// Control-volume measures `r_i^(n-1) (r_{i+1} - r_{i-1}) / 2`.
    pub(crate) fn volumes(&self) -> Vec<f64> {
        (1..self.r.len() - 1).map(|i| self.weight(self.r[i]) * 0.5 * (self.r[i + 1] - self.r[i - 1])).collect()
    }

    /// `G_i = F_{i-1/2} - F_{i+1/2}`.
    pub(crate) fn residual(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let (f, _) = self.fluxes(u, t);
        for i in 0..self.len() {
            out[i] = f[i] - f[i + 1];
        }
    }

    /// Tridiagonal Jacobian `(lower, diag, upper)` of [`Self::residual`].
    pub(crate) fn jacobian(&self, u: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (_, k) = self.fluxes(u, t);
        let m = self.len();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m {
            diag[i] = k[i] + k[i + 1];
            if i > 0 {
                lower[i] = -k[i];
            }
            if i + 1 < m {
                upper[i] = -k[i + 1];
            }
        }
        (lower, diag, upper)
    }

    /// Discrete harmonic function: 0 on the obstacle, 1 on the outer sphere.
    pub(crate) fn harmonic(&self) -> Result<Vec<f64>> {
        let m = self.len();
        let k: Vec<f64> =
            (0..self.r.len() - 1).map(|j| self.weight(0.5 * (self.r[j] + self.r[j + 1])) / (self.r[j + 1] - self.r[j])).collect();
        let lower: Vec<f64> = (0..m).map(|i| if i > 0 { -k[i] } else { 0.0 }).collect();
        let diag: Vec<f64> = (0..m).map(|i| k[i] + k[i + 1]).collect();
        let upper: Vec<f64> = (0..m).map(|i| if i + 1 < m { -k[i + 1] } else { 0.0 }).collect();
        let mut rhs = vec![0.0; m];
        rhs[m - 1] = k[m];
        thomas(&lower, &diag, &upper, &mut rhs)?;
        Ok(rhs)
    }

    /// Normal flux density at the obstacle, `F_{1/2} / r_0^(n-1)`, extrapolated
    /// quadratically from the first three face fluxes.
    pub(crate) fn inner_flux(&self, u: &[f64], t: f64) -> f64 {
        let (f, _) = self.fluxes(u, t);
        let x: Vec<f64> = (0..3).map(|j| 0.5 * (self.r[j] + self.r[j + 1]) - self.r[0]).collect();
        let (x0, x1, x2) = (x[0], x[1], x[2]);
        let at_wall = f[0] * x1 * x2 / ((x0 - x1) * (x0 - x2))
            + f[1] * x0 * x2 / ((x1 - x0) * (x1 - x2))
            + f[2] * x0 * x1 / ((x2 - x0) * (x2 - x1));
        at_wall / self.weight(self.r[0])
    }

    /// One-sided quadratic derivative at the obstacle.
    #[allow(dead_code)]
    pub(crate) fn inner_slope(&self, u: &[f64], t: f64) -> f64 {
        let v = self.full(u, t);
        let d1 = self.r[1] - self.r[0];
        let d2 = self.r[2] - self.r[0];
        -(d1 + d2) / (d1 * d2) * v[0] + d2 / (d1 * (d2 - d1)) * v[1] - d1 / (d2 * (d2 - d1)) * v[2]
    }

    /// One-sided quadratic derivative at the outer sphere.
    pub(crate) fn outer_slope(&self, u: &[f64], t: f64) -> f64 {
        let v = self.full(u, t);
        let last = self.r.len() - 1;
        let d1 = self.r[last] - self.r[last - 1];
        let d2 = self.r[last] - self.r[last - 2];
        (d1 + d2) / (d1 * d2) * v[last] - d2 / (d1 * (d2 - d1)) * v[last - 1] + d1 / (d2 * (d2 - d1)) * v[last - 2]
    }

    /// Centred three-point derivatives at the interior radii.
    pub(crate) fn centered_slopes(&self, u: &[f64], t: f64) -> Vec<f64> {
        let v = self.full(u, t);
        (1..self.r.len() - 1)
            .map(|i| {
                let hm = self.r[i] - self.r[i - 1];
                let hp = self.r[i + 1] - self.r[i];
                -hp / (hm * (hm + hp)) * v[i - 1] + (hp - hm) / (hm * hp) * v[i] + hm / (hp * (hm + hp)) * v[i + 1]
            })
            .collect()
    }
}

/// In-place tridiagonal solve; `rhs` is overwritten by the solution.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::LinearSolve("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= beta;
    for i in 1..m {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::LinearSolve("zero pivot in tridiagonal solve".into()));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= c[i + 1] * rhs[i + 1];
    }
    Ok(())
}
