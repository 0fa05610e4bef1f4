//! Radial half-catenoids (the fundamental solutions) and the constant sigma_n.
//!
//! With `m = n - 1` the profile vanishing on the sphere of radius `lambda` is
//! `v(r) = lambda * I(1, r / lambda)` where `I(a, b) = ∫_a^b dt / sqrt(t^(2m) - 1)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Neglected tail of the truncated profile integral, in units of the neck.
const TAIL_BOUND: f64 = 1e-13;

/// Split point between the endpoint and the logarithmic substitutions.
const SPLIT: f64 = 2.0;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::Dimension { n })
    } else {
        Ok(())
    }
}

/// Asymptotic tail `∫_T^∞ dt / sqrt(t^(2m) - 1)` for large `T`.
fn tail_series(t: f64, m: f64) -> f64 {
    let p = t.powf(-2.0 * m);
    t.powf(1.0 - m) * (1.0 / (m - 1.0) + p * (0.5 / (3.0 * m - 1.0) + p * 0.375 / (5.0 * m - 1.0)))
}

/// Truncation point where the leading tail term falls below [`TAIL_BOUND`].
fn truncation_point(m: f64) -> f64 {
    (TAIL_BOUND * (m - 1.0)).powf(-1.0 / (m - 1.0)).max(4.0)
}

/// `∫_lo^hi dt / sqrt(t^(2m) - 1)` for `1 <= lo <= hi <= ∞`.
pub fn profile_integral(lo: f64, hi: f64, n: usize) -> Result<f64> {
    check_dimension(n)?;
    if !(lo >= 1.0) || hi < lo || hi.is_nan() {
        return Err(Error::InvalidArgument(format!("profile integral needs 1 <= lo <= hi, got [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let m = (n - 1) as f64;
    let opts = QuadratureOptions::default();
    let (hi_finite, tail) = if hi.is_infinite() {
        let t = truncation_point(m).max(lo);
        (t, tail_series(t, m))
    } else {
        (hi, 0.0)
    };

    let mut total = tail;
    if lo < SPLIT {
        // t = 1 + u^2 removes the inverse square root at t = 1.
        let top = hi_finite.min(SPLIT);
        let u0 = (lo - 1.0).sqrt();
        let u1 = (top - 1.0).sqrt();
        let near_one = 2.0 / (2.0 * m).sqrt();
        let f = |u: f64| {
            let u2 = u * u;
            if u2 < 1e-300 {
                return near_one;
            }
            2.0 * u / (2.0 * m * u2.ln_1p()).exp_m1().sqrt()
        };
        total += integrate(f, u0, u1, opts)?.value;
    }
    if hi_finite > SPLIT {
        // t = e^y tames the slow algebraic decay.
        let y0 = lo.max(SPLIT).ln();
        let y1 = hi_finite.ln();
        let f = |y: f64| ((1.0 - m) * y).exp() / (-(-2.0 * m * y).exp_m1()).sqrt();
        total += integrate(f, y0, y1, opts)?.value;
    }
    Ok(total)
}

/// Which route produced a value of sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    Quadrature,
    BetaClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaValue {
    pub n: usize,
    pub value: f64,
    pub method: SigmaMethod,
}

/// Both evaluations of sigma_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma {
    pub n: usize,
    pub quadrature: f64,
    pub closed_form: f64,
}

impl Sigma {
    pub fn value(&self) -> f64 {
        self.closed_form
    }

    pub fn discrepancy(&self) -> f64 {
        (self.quadrature - self.closed_form).abs()
    }

    pub fn values(&self) -> [SigmaValue; 2] {
        [
            SigmaValue { n: self.n, value: self.quadrature, method: SigmaMethod::Quadrature },
            SigmaValue { n: self.n, value: self.closed_form, method: SigmaMethod::BetaClosedForm },
        ]
    }
}

/// Height at infinity of the unit-neck catenoid by direct quadrature.
pub fn sigma_quadrature(n: usize) -> Result<f64> {
    profile_integral(1.0, f64::INFINITY, n)
}

/// `B((m-1)/(2m), 1/2) / (2m)` from the substitution `u = t^(-2m)`.
pub fn sigma_closed_form(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let m = (n - 1) as f64;
    let a = (m - 1.0) / (2.0 * m);
    let b = 0.5;
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    Ok(ln_beta.exp() / (2.0 * m))
}

/// sigma_n by both routes; disagreement beyond 1e-10 is an error.
pub fn sigma(n: usize) -> Result<Sigma> {
    let quadrature = sigma_quadrature(n)?;
    let closed_form = sigma_closed_form(n)?;
    let s = Sigma { n, quadrature, closed_form };
    if s.discrepancy() > 1e-10 {
        return Err(Error::SigmaMismatch { n, quadrature, closed_form });
    }
    Ok(s)
}

/// A vertically shifted half-catenoid with neck `lambda` centred at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatenoidParams {
    pub lambda: f64,
    pub center: Vec<f64>,
    pub n: usize,
    pub shift: f64,
}

impl CatenoidParams {
    pub fn new(lambda: f64, center: Vec<f64>, n: usize, shift: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("neck radius must be positive, got {lambda}")));
        }
        if center.len() != n || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("center must be a finite point of R^{n}")));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidArgument("shift must be finite".into()));
        }
        Ok(Self { lambda, center, n, shift })
    }

    /// Catenoid centred at the origin with no shift.
    pub fn centered(lambda: f64, n: usize) -> Result<Self> {
        Self::new(lambda, vec![0.0; n.max(1)], n, 0.0)
    }

    pub fn height(&self, r: f64) -> Result<f64> {
        catenoid_height(self, r)
    }

    pub fn slope(&self, r: f64) -> Result<f64> {
        catenoid_slope(self, r)
    }

    /// Height at the point `x` of R^n.
    pub fn height_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!("point must lie in R^{}", self.n)));
        }
        let r = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.height(r)
    }

    /// Limit at infinity, `shift + sigma_n * lambda`.
    pub fn limit(&self) -> Result<f64> {
        Ok(self.shift + sigma_closed_form(self.n)? * self.lambda)
    }
}

/// `v(r) = lambda * ∫_1^{r/lambda} dt / sqrt(t^(2m) - 1) + shift`.
pub fn catenoid_height(cat: &CatenoidParams, r: f64) -> Result<f64> {
    if !(r >= cat.lambda) {
        return Err(Error::InsideNeck { r, lambda: cat.lambda });
    }
    Ok(cat.lambda * profile_integral(1.0, r / cat.lambda, cat.n)? + cat.shift)
}

/// `|v'(r)| = ((r/lambda)^(2m) - 1)^(-1/2)`, infinite on the neck and so rejected there.
pub fn catenoid_slope(cat: &CatenoidParams, r: f64) -> Result<f64> {
    if !(r > cat.lambda) {
        return Err(Error::InsideNeck { r, lambda: cat.lambda });
    }
    Ok(profile_slope(cat.lambda, r, cat.n))
}

pub(crate) fn profile_slope(lambda: f64, r: f64, n: usize) -> f64 {
    let m = (n - 1) as f64;
    1.0 / (2.0 * m * (r / lambda).ln()).exp_m1().sqrt()
}

/// Neck of the catenoid whose slope on the sphere of radius `r` is `s`.
pub fn neck_for_slope(r: f64, s: f64, n: usize) -> Result<f64> {
    check_dimension(n)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("slope must be positive, got {s}")));
    }
    let m = (n - 1) as f64;
    Ok(r * (-(1.0 / (s * s)).ln_1p() / (2.0 * m)).exp())
}

/// `v(∞) - v(r)`: height gained beyond the sphere of radius `r`.
pub fn limit_height(lambda: f64, r: f64, n: usize) -> Result<f64> {
    check_dimension(n)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("neck radius must be positive, got {lambda}")));
    }
    if !(r >= lambda) {
        return Err(Error::InsideNeck { r, lambda });
    }
    if r.is_infinite() {
        return Ok(0.0);
    }
    Ok(lambda * profile_integral(r / lambda, f64::INFINITY, n)?)
}

/// Tabulated profile `v_lambda` on `[lambda, r_max]` for bulk evaluation.
///
/// Nodes are uniform in `u = sqrt(r / lambda - 1)`, where the profile is
/// smooth, and cubic Hermite interpolation uses the exact derivative.
#[derive(Debug, Clone)]
pub struct CatenoidTable {
    lambda: f64,
    n: usize,
    du: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl CatenoidTable {
    pub fn new(lambda: f64, n: usize, r_max: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(lambda > 0.0) || !(r_max > lambda) || !r_max.is_finite() {
            return Err(Error::InvalidArgument(format!("catenoid table needs 0 < lambda < r_max, got {lambda}, {r_max}")));
        }
        let m = (n - 1) as f64;
        let g = move |u: f64| {
            let u2 = u * u;
            if u2 < 1e-300 {
                2.0 / (2.0 * m).sqrt()
            } else {
                2.0 * u / (2.0 * m * u2.ln_1p()).exp_m1().sqrt()
            }
        };
        let u_max = (r_max / lambda - 1.0).sqrt();
        let cells = ((u_max / 2e-3).ceil() as usize).max(16);
        let du = u_max / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut derivs = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        derivs.push(lambda * g(0.0));
        for k in 0..cells {
            let (piece, _) = crate::quadrature::kronrod15(&g, k as f64 * du, (k + 1) as f64 * du);
            acc += piece;
            values.push(lambda * acc);
            derivs.push(lambda * g((k + 1) as f64 * du));
        }
        Ok(Self { lambda, n, du, values, derivs })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `v_lambda(r)`; `None` inside the neck. Radii past the table use quadrature.
    pub fn height(&self, r: f64) -> Option<f64> {
        if !(r >= self.lambda) {
            return None;
        }
        let u = (r / self.lambda - 1.0).sqrt();
        let x = u / self.du;
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return profile_integral(1.0, r / self.lambda, self.n).ok().map(|v| self.lambda * v);
        }
        let t = x - k as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            h00 * self.values[k]
                + h10 * self.du * self.derivs[k]
                + h01 * self.values[k + 1]
                + h11 * self.du * self.derivs[k + 1],
        )
    }
}
