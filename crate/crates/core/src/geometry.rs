//! Axisymmetric obstacles, their exteriors, and the radii rho and varrho.
//!
//! Every supported obstacle is rotationally symmetric about an axis, so most
//! work happens in the meridian half-plane with coordinates `(zeta, y)`:
//! `zeta` along the axis from the domain center and `y` the distance to it.
//! Section routines accept `y` of either sign and treat the plane as the full
//! cross-section.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::catenoid::check_dimension;
use crate::enclosing::minimal_enclosing_ball;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `params = [radius]`.
    Ball,
    /// `params = [a, b]` or `[a, b, ..., b]`: semi-axis `a` along the axis, `a >= b`.
    ProlateSpheroid,
    /// `params = [r1, r2, d]`: balls centred at `center` and `center + d * axis`.
    TwoBallUnion,
}

/// Meridian cross-section of the obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Section {
    Disk { r: f64 },
    Ellipse { a: f64, b: f64 },
    TwoDisks { r1: f64, r2: f64, d: f64 },
}

/// Complement of a compact axisymmetric obstacle in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub struct ExteriorDomain {
    kind: DomainKind,
    params: Vec<f64>,
    n: usize,
    center: Vec<f64>,
    axis: Vec<f64>,
    section: Section,
}

/// Serialized form of a domain; `center` and `axis` default to the origin and `e_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec<f64>>,
}

impl TryFrom<DomainSpec> for ExteriorDomain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        ExteriorDomain::new(spec.kind, spec.n, spec.params, spec.center, spec.axis)
    }
}

impl From<ExteriorDomain> for DomainSpec {
    fn from(d: ExteriorDomain) -> Self {
        let origin = d.center.iter().all(|&c| c == 0.0);
        let e1 = d.axis[0] == 1.0 && d.axis[1..].iter().all(|&c| c == 0.0);
        DomainSpec {
            kind: d.kind,
            n: d.n,
            params: d.params,
            center: (!origin).then_some(d.center),
            axis: (!e1).then_some(d.axis),
        }
    }
}

fn positive(params: &[f64]) -> bool {
    params.iter().all(|p| p.is_finite() && *p > 0.0)
}

impl ExteriorDomain {
    pub fn new(
        kind: DomainKind,
        n: usize,
        params: Vec<f64>,
        center: Option<Vec<f64>>,
        axis: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_dimension(n)?;
        let section = match kind {
            DomainKind::Ball => {
                if params.len() != 1 || !positive(&params) {
                    return Err(Error::InvalidDomain("a ball needs one positive radius".into()));
                }
                Section::Disk { r: params[0] }
            }
            DomainKind::ProlateSpheroid => {
                let ok_len = params.len() == 2 || params.len() == n;
                if !ok_len || !positive(&params) || params[2..].iter().any(|&b| b != params[1]) {
                    return Err(Error::InvalidDomain(
                        "a prolate spheroid needs [a, b] or [a, b, ..., b] with positive semi-axes".into(),
                    ));
                }
                if params[0] < params[1] {
                    return Err(Error::InvalidDomain("a prolate spheroid needs a >= b".into()));
                }
                Section::Ellipse { a: params[0], b: params[1] }
            }
            DomainKind::TwoBallUnion => {
                let ok = params.len() == 3 && positive(&params[..2]) && params[2].is_finite() && params[2] >= 0.0;
                if !ok {
                    return Err(Error::InvalidDomain("a two-ball union needs [r1, r2, d] with r1, r2 > 0, d >= 0".into()));
                }
                Section::TwoDisks { r1: params[0], r2: params[1], d: params[2] }
            }
        };
        let center = center.unwrap_or_else(|| vec![0.0; n]);
        if center.len() != n || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain(format!("center must be a finite point of R^{n}")));
        }
        let mut axis = axis.unwrap_or_else(|| {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        });
        let len = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if axis.len() != n || !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidDomain("axis must be a nonzero vector of R^n".into()));
        }
        if (len - 1.0).abs() > 1e-15 {
            axis.iter_mut().for_each(|a| *a /= len);
        }
        Ok(Self { kind, params, n, center, axis, section })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(DomainKind::Ball, n, vec![radius], None, None)
    }

    pub fn prolate_spheroid(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(DomainKind::ProlateSpheroid, n, vec![a, b], None, None)
    }

    pub fn two_ball_union(n: usize, r1: f64, r2: f64, d: f64) -> Result<Self> {
        Self::new(DomainKind::TwoBallUnion, n, vec![r1, r2, d], None, None)
    }

    /// The same obstacle moved rigidly to a new center and axis.
    pub fn with_frame(&self, center: Vec<f64>, axis: Vec<f64>) -> Result<Self> {
        Self::new(self.kind, self.n, self.params.clone(), Some(center), Some(axis))
    }

    /// The obstacle dilated by `k` about the origin of R^n.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {k}")));
        }
        let params = match self.kind {
            DomainKind::TwoBallUnion => vec![k * self.params[0], k * self.params[1], k * self.params[2]],
            _ => self.params.iter().map(|p| k * p).collect(),
        };
        let center = self.center.iter().map(|c| k * c).collect();
        Self::new(self.kind, self.n, params, Some(center), Some(self.axis.clone()))
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn section(&self) -> Section {
        self.section
    }

    pub fn spec(&self) -> DomainSpec {
        self.clone().into()
    }

    /// Axial coordinate of a reflection plane of the obstacle, if any.
    pub fn mirror_plane(&self) -> Option<f64> {
        match self.section {
            Section::Disk { .. } | Section::Ellipse { .. } => Some(0.0),
            Section::TwoDisks { r1, r2, d } => (r1 == r2).then_some(0.5 * d),
        }
    }

    /// Meridian coordinates `(zeta, y >= 0)` of a point of R^n.
    pub fn meridian(&self, x: &[f64]) -> [f64; 2] {
        let zeta: f64 = x.iter().zip(&self.center).zip(&self.axis).map(|((xi, ci), ai)| (xi - ci) * ai).sum();
        let y2: f64 = x
            .iter()
            .zip(&self.center)
            .zip(&self.axis)
            .map(|((xi, ci), ai)| {
                let d = xi - ci - zeta * ai;
                d * d
            })
            .sum();
        [zeta, y2.sqrt()]
    }

    /// Negative inside the obstacle, zero on its boundary, positive in the exterior domain.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "point dimension does not match domain");
        self.section_signed_distance(self.meridian(x))
    }

    pub fn section_signed_distance(&self, p: [f64; 2]) -> f64 {
        let [z, y] = p;
        match self.section {
            Section::Disk { r } => z.hypot(y) - r,
            Section::Ellipse { a, b } => ellipse_signed_distance(a, b, z.abs(), y.abs()),
            Section::TwoDisks { r1, r2, d } => two_disk_signed_distance(r1, r2, d, z, y.abs()),
        }
    }

    /// Unit normal at a boundary point of the section, pointing out of the obstacle.
    pub fn section_normal(&self, p: [f64; 2]) -> [f64; 2] {
        let [z, y] = p;
        let (gz, gy) = match self.section {
            Section::Disk { .. } => (z, y),
            Section::Ellipse { a, b } => (z / (a * a), y / (b * b)),
            Section::TwoDisks { r1, r2, d } => {
                let d1 = z.hypot(y) - r1;
                let d2 = (z - d).hypot(y) - r2;
                if d1.abs() <= d2.abs() {
                    (z, y)
                } else {
                    (z - d, y)
                }
            }
        };
        let len = gz.hypot(gy);
        if len == 0.0 {
            [1.0, 0.0]
        } else {
            [gz / len, gy / len]
        }
    }

    /// Smallest `theta` in `[0, 1]` at which the segment `p -> q` meets the closed obstacle.
    pub fn section_first_entry(&self, p: [f64; 2], q: [f64; 2]) -> Option<f64> {
        let dz = q[0] - p[0];
        let dy = q[1] - p[1];
        match self.section {
            Section::Disk { r } => quadric_entry(p[0], p[1], dz, dy, 1.0, 1.0, r * r),
            Section::Ellipse { a, b } => quadric_entry(p[0], p[1], dz, dy, 1.0 / (a * a), 1.0 / (b * b), 1.0),
            Section::TwoDisks { r1, r2, d } => {
                let e1 = quadric_entry(p[0], p[1], dz, dy, 1.0, 1.0, r1 * r1);
                let e2 = quadric_entry(p[0] - d, p[1], dz, dy, 1.0, 1.0, r2 * r2);
                match (e1, e2) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    /// Closed boundary curve of the full cross-section with outward normals.
    ///
    /// Disk and ellipse samples are equally spaced in angle and always contain
    /// the axis vertices when `count` is even; for the union the crease points
    /// are excluded and roughly `count` points remain.
    pub fn section_boundary(&self, count: usize) -> Vec<([f64; 2], [f64; 2])> {
        let count = count.max(4);
        let circle = |cz: f64, r: f64, k: usize| -> Vec<[f64; 2]> {
            (0..k)
                .map(|i| {
                    let phi = std::f64::consts::TAU * i as f64 / k as f64;
                    [cz + r * phi.cos(), r * phi.sin()]
                })
                .collect()
        };
        let pts: Vec<[f64; 2]> = match self.section {
            Section::Disk { r } => circle(0.0, r, count),
            Section::Ellipse { a, b } => (0..count)
                .map(|i| {
                    let phi = std::f64::consts::TAU * i as f64 / count as f64;
                    [a * phi.cos(), b * phi.sin()]
                })
                .collect(),
            Section::TwoDisks { r1, r2, d } => {
                let k1 = ((count as f64) * r1 / (r1 + r2)).round().max(4.0) as usize;
                let k2 = count.saturating_sub(k1).max(4);
                let mut out: Vec<[f64; 2]> = circle(0.0, r1, k1)
                    .into_iter()
                    .filter(|p| (p[0] - d).hypot(p[1]) > r2 * (1.0 + 1e-12))
                    .collect();
                out.extend(circle(d, r2, k2).into_iter().filter(|p| p[0].hypot(p[1]) > r1 * (1.0 + 1e-12)));
                out
            }
        };
        pts.into_iter().map(|p| (p, self.section_normal(p))).collect()
    }

    /// Deterministic quasi-uniform points on the boundary in R^n.
    pub fn boundary_sample(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::InvalidArgument("boundary sample needs count >= 1".into()));
        }
        let meridian: Vec<[f64; 2]> = match self.section {
            Section::Disk { r } => polar_meridian(count).map(|(c, s)| [r * c, r * s]).collect(),
            Section::Ellipse { a, b } => polar_meridian(count).map(|(c, s)| [a * c, b * s]).collect(),
            Section::TwoDisks { r1, r2, d } => {
                let exponent = (self.n - 1) as i32;
                let w1 = r1.powi(exponent) / (r1.powi(exponent) + r2.powi(exponent));
                let mut candidates = count;
                loop {
                    let k1 = ((candidates as f64 * w1).round() as usize).max(1);
                    let k2 = candidates.saturating_sub(k1).max(1);
                    let mut accepted: Vec<[f64; 2]> = polar_meridian(k1)
                        .map(|(c, s)| [r1 * c, r1 * s])
                        .filter(|p| (p[0] - d).hypot(p[1]) > r2 * (1.0 + 1e-12))
                        .collect();
                    accepted.extend(
                        polar_meridian(k2)
                            .map(|(c, s)| [d + r2 * c, r2 * s])
                            .filter(|p| p[0].hypot(p[1]) > r1 * (1.0 + 1e-12)),
                    );
                    if accepted.len() >= count {
                        let len = accepted.len();
                        break (0..count).map(|i| accepted[i * len / count]).collect();
                    }
                    candidates = candidates * 2 + 8;
                }
            }
        };
        let basis = self.perpendicular_basis();
        let dirs = sphere_directions(self.n - 1, count);
        Ok(meridian
            .iter()
            .zip(dirs)
            .map(|(&[z, y], omega)| {
                let mut x = self.center.clone();
                for i in 0..self.n {
                    x[i] += z * self.axis[i];
                    for (j, e) in basis.iter().enumerate() {
                        x[i] += y * omega[j] * e[i];
                    }
                }
                x
            })
            .collect())
    }

    /// Orthonormal basis of the hyperplane perpendicular to the axis.
    fn perpendicular_basis(&self) -> Vec<Vec<f64>> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.n - 1);
        let mut span = vec![self.axis.clone()];
        for k in 0..self.n {
            if basis.len() == self.n - 1 {
                break;
            }
            let mut v = vec![0.0; self.n];
            v[k] = 1.0;
            for u in &span {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if len > 1e-8 {
                v.iter_mut().for_each(|a| *a /= len);
                span.push(v.clone());
                basis.push(v);
            }
        }
        basis
    }
}

/// `(cos theta, sin theta)` with `cos theta` equally spaced from 1 to -1.
fn polar_meridian(count: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..count).map(move |k| {
        if count == 1 {
            return (1.0, 0.0);
        }
        let c = 1.0 - 2.0 * k as f64 / (count - 1) as f64;
        (c, (1.0 - c * c).max(0.0).sqrt())
    })
}

/// Low-discrepancy unit vectors in R^p.
fn sphere_directions(p: usize, count: usize) -> Vec<Vec<f64>> {
    if p == 2 {
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        return (0..count)
            .map(|k| {
                let phi = std::f64::consts::TAU * (k as f64 * golden).fract();
                vec![phi.cos(), phi.sin()]
            })
            .collect();
    }
    // Generalised golden ratio: the positive root of x^(p+1) = x + 1.
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (p as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=p).map(|j| g.powi(-(j as i32)).fract()).collect();
    let normal = Normal::standard();
    (0..count)
        .map(|k| {
            let mut v: Vec<f64> = alpha
                .iter()
                .map(|a| normal.inverse_cdf((0.5 + k as f64 * a).fract().clamp(1e-12, 1.0 - 1e-12)))
                .collect();
            let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if len < 1e-12 {
                v = vec![0.0; p];
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|a| *a /= len);
            }
            v
        })
        .collect()
}

/// Entry parameter of `p + theta * d` into `kz z^2 + ky y^2 <= rhs`.
fn quadric_entry(z: f64, y: f64, dz: f64, dy: f64, kz: f64, ky: f64, rhs: f64) -> Option<f64> {
    let a = kz * dz * dz + ky * dy * dy;
    let b = 2.0 * (kz * z * dz + ky * y * dy);
    let c = kz * z * z + ky * y * y - rhs;
    if c <= 0.0 {
        return Some(0.0);
    }
    if a == 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    // Stable smaller root.
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
    let root = r1.min(r2);
    (0.0..=1.0).contains(&root).then_some(root)
}

/// Signed distance to the ellipse `(z/a)^2 + (y/b)^2 = 1`, `a >= b`, in the first quadrant.
fn ellipse_signed_distance(a: f64, b: f64, y0: f64, y1: f64) -> f64 {
    let inside = (y0 / a).powi(2) + (y1 / b).powi(2) < 1.0;
    let (x0, x1) = if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / a;
            let z1 = y1 / b;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (a / b) * (a / b);
                let sbar = ellipse_root(r0, z0, z1, g);
                (r0 * y0 / (sbar + r0), y1 / (sbar + 1.0))
            } else {
                (y0, y1)
            }
        } else {
            (0.0, b)
        }
    } else {
        let numer = a * y0;
        let denom = a * a - b * b;
        if numer < denom {
            let xde = numer / denom;
            (a * xde, b * (1.0 - xde * xde).max(0.0).sqrt())
        } else {
            (a, 0.0)
        }
    };
    let dist = (x0 - y0).hypot(x1 - y1);
    if inside {
        -dist
    } else {
        dist
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn two_disk_signed_distance(r1: f64, r2: f64, d: f64, z: f64, y: f64) -> f64 {
    let d1 = z.hypot(y) - r1;
    let d2 = (z - d).hypot(y) - r2;
    if d1 > 0.0 && d2 > 0.0 {
        return d1.min(d2);
    }
    // Inside the union: nearest exposed boundary point.
    let crease = crease_point(r1, r2, d);
    let crease_dist = crease.map(|[cz, cy]| (z - cz).hypot(y - cy));
    let exposed = |cz: f64, r: f64, oz: f64, orr: f64, dist: f64| -> f64 {
        let len = (z - cz).hypot(y);
        let (pz, py) = if len > 0.0 { (cz + r * (z - cz) / len, r * y / len) } else { (cz, r) };
        if (pz - oz).hypot(py) >= orr {
            dist.abs()
        } else {
            crease_dist.unwrap_or(f64::INFINITY)
        }
    };
    let e1 = if r1 + d <= r2 { f64::INFINITY } else { exposed(0.0, r1, d, r2, d1) };
    let e2 = if r2 + d <= r1 { f64::INFINITY } else { exposed(d, r2, 0.0, r1, d2) };
    -e1.min(e2)
}

/// Upper crease point of two overlapping disks, if their circles cross.
fn crease_point(r1: f64, r2: f64, d: f64) -> Option<[f64; 2]> {
    if d <= 0.0 || d >= r1 + r2 || d <= (r1 - r2).abs() {
        return None;
    }
    let z = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    Some([z, (r1 * r1 - z * z).max(0.0).sqrt()])
}

/// Interior sphere radius and circumradius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryRadii {
    pub rho: f64,
    pub varrho: f64,
}

/// Smallest ball enclosing the boundary; its center lies on the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosingBall {
    pub center: Vec<f64>,
    /// Axial coordinate of the center relative to the domain center.
    pub axial_offset: f64,
    pub radius: f64,
}

const RHO_SAMPLES: usize = 10_000;
const MAX_DOUBLINGS: usize = 4;

/// Largest tangent-ball radius at one sample point: shrink the ball along
/// the inward normal until no other sample lies strictly inside it.
fn tangent_radius(points: &[([f64; 2], [f64; 2])], i: usize) -> f64 {
    let (p, nrm) = points[i];
    let inward = [-nrm[0], -nrm[1]];
    let mut best = f64::INFINITY;
    for (j, (q, _)) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        let dz = q[0] - p[0];
        let dy = q[1] - p[1];
        let along = dz * inward[0] + dy * inward[1];
        if along > 0.0 {
            best = best.min((dz * dz + dy * dy) / (2.0 * along));
        }
    }
    best
}

fn sampled_interior_radius(domain: &ExteriorDomain, count: usize) -> f64 {
    let pts = domain.section_boundary(count);
    // The cross-section is symmetric in y, so the upper half suffices.
    (0..pts.len())
        .into_par_iter()
        .filter(|&i| pts[i].0[1] >= 0.0)
        .map(|i| tangent_radius(&pts, i))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Largest radius of balls inside the obstacle touching every boundary point.
pub fn interior_sphere_radius(domain: &ExteriorDomain) -> Result<f64> {
    let mut count = RHO_SAMPLES;
    let mut rho = sampled_interior_radius(domain, count);
    for _ in 0..MAX_DOUBLINGS {
        count *= 2;
        let next = sampled_interior_radius(domain, count);
        let change = (next - rho).abs();
        rho = rho.min(next);
        if change <= 1e-6 * rho {
            break;
        }
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidDomain("obstacle admits no interior tangent ball".into()));
    }
    Ok(rho)
}

/// Smallest ball containing the boundary.
pub fn enclosing_ball(domain: &ExteriorDomain) -> Result<EnclosingBall> {
    let mut count = 1024;
    let mut prev: Option<f64> = None;
    let mut ball = None;
    for _ in 0..12 {
        let pts: Vec<[f64; 2]> = domain.section_boundary(count).into_iter().map(|(p, _)| p).collect();
        let b = minimal_enclosing_ball(&pts).ok_or_else(|| Error::InvalidDomain("empty boundary".into()))?;
        let done = prev.is_some_and(|r| (b.radius - r).abs() < 1e-8);
        prev = Some(b.radius);
        ball = Some(b);
        if done {
            break;
        }
        count *= 2;
    }
    let b = ball.expect("at least one pass");
    let offset = b.center[0];
    let center = domain.center.iter().zip(&domain.axis).map(|(c, a)| c + offset * a).collect();
    Ok(EnclosingBall { center, axial_offset: offset, radius: b.radius })
}

pub fn circumradius(domain: &ExteriorDomain) -> Result<f64> {
    Ok(enclosing_ball(domain)?.radius)
}

pub fn geometry_radii(domain: &ExteriorDomain) -> Result<GeometryRadii> {
    let rho = interior_sphere_radius(domain)?;
    let varrho = circumradius(domain)?;
    Ok(GeometryRadii { rho: rho.min(varrho), varrho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_distances() {
        let d = ExteriorDomain::ball(3, 1.0).unwrap();
        assert_eq!(d.signed_distance(&[0.0, 0.0, 0.0]), -1.0);
        assert_eq!(d.signed_distance(&[2.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn spheroid_axis_distance() {
        let d = ExteriorDomain::prolate_spheroid(3, 2.0, 1.0).unwrap();
        assert!((d.signed_distance(&[3.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((d.signed_distance(&[0.0, 0.0, 0.0]) + 1.0).abs() < 1e-15);
        assert!((d.signed_distance(&[0.0, 3.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(ExteriorDomain::ball(2, 1.0).is_err());
        assert!(ExteriorDomain::ball(3, 0.0).is_err());
        assert!(ExteriorDomain::prolate_spheroid(3, 1.0, 2.0).is_err());
        assert!(ExteriorDomain::new(DomainKind::Ball, 3, vec![1.0], None, Some(vec![0.0; 3])).is_err());
    }

    #[test]
    fn segment_entry_on_disk() {
        let d = ExteriorDomain::ball(3, 1.0).unwrap();
        let t = d.section_first_entry([3.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
        assert!(d.section_first_entry([3.0, 2.0], [0.0, 2.0]).is_none());
    }

    #[test]
    fn union_crease_distance() {
        let d = ExteriorDomain::two_ball_union(3, 1.0, 1.0, 1.0).unwrap();
        // The midpoint of the two centres is nearest to the crease circle.
        let crease_y = (1.0f64 - 0.25).sqrt();
        assert!((d.section_signed_distance([0.5, 0.0]) + crease_y).abs() < 1e-15);
        assert!((d.section_signed_distance([-2.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
