//! Restarted, right-preconditioned GMRES with modified Gram–Schmidt.

use crate::error::{Error, Result};

pub(crate) struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 40, max_iterations: 400, rel_tol: 1e-12 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` given `apply(x, y)` computing `y = A x` and `precond(v)`
/// overwriting `v` with `M^{-1} v`. Returns the solution and iteration count.
pub(crate) fn gmres<A, P>(apply: A, mut precond: P, b: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, usize)>
where
    A: Fn(&[f64], &mut [f64]),
    P: FnMut(&mut [f64]) -> Result<()>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let target = opts.rel_tol * b_norm;
    let m = opts.restart.max(1);
    let mut total = 0;
    let mut r = b.to_vec();
    let mut w = vec![0.0; n];
    loop {
        let beta = norm(&r);
        if beta <= target {
            return Ok((x, total));
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut precond_basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        let mut converged = false;
        for j in 0..m {
            let mut z = basis[j].clone();
            precond(&mut z)?;
            apply(&z, &mut w);
            precond_basis.push(z);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                hess[i][j] = hij;
                w.iter_mut().zip(&basis[i]).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let h_next = norm(&w);
            hess[j + 1][j] = h_next;
            for i in 0..j {
                let tmp = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = tmp;
            }
            let denom = hess[j][j].hypot(hess[j + 1][j]);
            if denom == 0.0 {
                return Err(Error::LinearSolve("GMRES breakdown: singular Hessenberg column".into()));
            }
            cs[j] = hess[j][j] / denom;
            sn[j] = hess[j + 1][j] / denom;
            hess[j][j] = denom;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            total += 1;
            k_used = j + 1;
            if g[j + 1].abs() <= target || h_next == 0.0 {
                converged = true;
                break;
            }
            if total >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for l in i + 1..k_used {
                acc -= hess[i][l] * y[l];
            }
            y[i] = acc / hess[i][i];
        }
        for (yi, zi) in y.iter().zip(&precond_basis) {
            x.iter_mut().zip(zi).for_each(|(xk, zk)| *xk += yi * zk);
        }
        apply(&x, &mut w);
        r.iter_mut().zip(b).zip(&w).for_each(|((rk, bk), wk)| *rk = bk - wk);
        if converged && norm(&r) <= 10.0 * target {
            return Ok((x, total));
        }
        if total >= opts.max_iterations {
            let rel = norm(&r) / b_norm;
            if rel < 1e-6 {
                return Ok((x, total));
            }
            return Err(Error::LinearSolve(format!("GMRES stalled at relative residual {rel:e}")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_tridiagonal() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 4.0 * x[i];
                if i > 0 {
                    v -= 1.5 * x[i - 1];
                }
                if i + 1 < n {
                    v -= 0.5 * x[i + 1];
                }
                y[i] = v;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, _) = gmres(apply, |_: &mut [f64]| Ok(()), &b, &GmresOptions::default()).unwrap();
        let mut y = vec![0.0; n];
        apply(&x, &mut y);
        let err: f64 = y.iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
