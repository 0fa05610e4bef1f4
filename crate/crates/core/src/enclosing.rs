//! Smallest enclosing ball of a point set (move-to-front Welzl).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<const D: usize> {
    pub center: [f64; D],
    pub radius: f64,
}

impl<const D: usize> Ball<D> {
    fn empty() -> Self {
        Self { center: [0.0; D], radius: -1.0 }
    }

    pub fn contains(&self, p: &[f64; D], tol: f64) -> bool {
        self.radius >= 0.0 && dist(&self.center, p) <= self.radius + tol
    }
}

fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Ball whose boundary passes through every support point, centred in their affine hull.
fn circumball<const D: usize>(support: &[[f64; D]]) -> Ball<D> {
    let Some(p0) = support.first() else {
        return Ball::empty();
    };
    let k = support.len() - 1;
    if k == 0 {
        return Ball { center: *p0, radius: 0.0 };
    }
    let v: Vec<[f64; D]> = support[1..]
        .iter()
        .map(|p| {
            let mut d = [0.0; D];
            for i in 0..D {
                d[i] = p[i] - p0[i];
            }
            d
        })
        .collect();
    let dot = |a: &[f64; D], b: &[f64; D]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Gram system 2 V V^T lambda = |v|^2, solved with partial pivoting.
    let mut m = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = 2.0 * dot(&v[i], &v[j]);
        }
        m[i][k] = dot(&v[i], &v[i]);
    }
    let scale = m.iter().map(|r| r[..k].iter().fold(0.0f64, |a, x| a.max(x.abs()))).fold(0.0, f64::max);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[piv][col].abs() <= 1e-14 * scale {
            return diametral_fallback(support);
        }
        m.swap(col, piv);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..=k {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    let mut lam = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = m[i][k];
        for j in i + 1..k {
            acc -= m[i][j] * lam[j];
        }
        lam[i] = acc / m[i][i];
    }
    let mut center = *p0;
    for (l, vi) in lam.iter().zip(&v) {
        for d in 0..D {
            center[d] += l * vi[d];
        }
    }
    let radius = support.iter().map(|p| dist(&center, p)).fold(0.0, f64::max);
    Ball { center, radius }
}

fn diametral_fallback<const D: usize>(support: &[[f64; D]]) -> Ball<D> {
    let mut best = (0, 0, -1.0);
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let d = dist(&support[i], &support[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b) = (support[best.0], support[best.1]);
    let mut center = [0.0; D];
    for d in 0..D {
        center[d] = 0.5 * (a[d] + b[d]);
    }
    Ball { center, radius: 0.5 * best.2 }
}

fn move_to_front<const D: usize>(pts: &mut [[f64; D]], end: usize, support: &mut Vec<[f64; D]>, tol: f64) -> Ball<D> {
    let mut ball = circumball(support);
    if support.len() == D + 1 {
        return ball;
    }
    for i in 0..end {
        if !ball.contains(&pts[i], tol) {
            support.push(pts[i]);
            ball = move_to_front(pts, i, support, tol);
            support.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Exact smallest enclosing ball; `None` for an empty input.
pub fn minimal_enclosing_ball<const D: usize>(points: &[[f64; D]]) -> Option<Ball<D>> {
    if points.is_empty() {
        return None;
    }
    let extent = points.iter().flat_map(|p| p.iter()).fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-13 * extent.max(1.0);
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut support = Vec::with_capacity(D + 1);
    Some(move_to_front(&mut pts, points.len(), &mut support, tol))
}
