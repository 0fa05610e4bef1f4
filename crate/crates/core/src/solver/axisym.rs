//! Finite-volume minimal surface operator on the meridian half-plane.
//!
//! Nodes sit on a tensor grid in `(rho, z)`, where `rho` is the distance to
//! the symmetry axis and `z` the axial coordinate measured from the center
//! of the outer sphere. Fluxes carry the weight `rho^(n-2)`; cells on the
//! axis integrate that weight exactly, which yields the symmetric axis
//! stencil. Dirichlet data enter through ghost values extrapolated through
//! the exact boundary crossing on each grid link: quadratically when the
//! opposite neighbour is a node, linearly otherwise. The frozen-coefficient
//! preconditioner keeps the linear, symmetric form.

use std::sync::OnceLock;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};
use rayon::prelude::*;

use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::geometry::ExteriorDomain;

/// Smallest admissible cut fraction on a link.
pub(crate) const THETA_MIN: f64 = 1e-3;

const E: usize = 0;
const W: usize = 1;
const N: usize = 2;
const S: usize = 3;
const OPPOSITE: [usize; 4] = [W, E, S, N];
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Link {
    Node(u32),
    Ghost(u32),
    /// West neighbour of an axis node: mirror image across the axis.
    Axis,
    /// South neighbour on the reflection plane.
    Reflect,
}

/// Crossing of a grid link with the obstacle or the outer sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cut {
    pub node: u32,
    pub dir: u8,
    pub theta: f64,
    pub outer: bool,
    /// Crossing point `(rho, z)`.
    pub point: [f64; 2],
    /// Lattice point beyond the crossing that carries the ghost value.
    pub ghost: [f64; 2],
    /// Extrapolation weights of (boundary value, own node, opposite node).
    pub(crate) weights: [f64; 3],
}

#[derive(Clone, Debug)]
pub(crate) struct AxisNode {
    pub i: u32,
    pub k: u32,
    pub links: [Link; 4],
    pub kappa: [f64; 4],
    pub dist: [f64; 4],
    pub dcoef: [f64; 4],
    pub volume: f64,
}

/// Tensor grid description shared by the axisymmetric discretization.
#[derive(Debug)]
pub struct AxisGrid {
    pub(crate) rho: Vec<f64>,
    pub(crate) z: Vec<f64>,
    pub(crate) mirror: bool,
    /// Axial position of `z = 0` in the domain's meridian coordinates.
    pub(crate) origin: f64,
    pub(crate) nodes: Vec<AxisNode>,
    pub(crate) cuts: Vec<Cut>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    symbolic: OnceLock<std::result::Result<SymbolicLlt<usize>, String>>,
}

/// Coordinates `0 = x_0 < x_1 < ...`: spacing `h` up to `core`, then growing
/// geometrically by `growth` up to `h_max`, ending past `extent`.
pub(crate) fn stretched_coordinates(h: f64, core: f64, growth: f64, h_max: f64, extent: f64) -> Vec<f64> {
    let mut xs = vec![0.0];
    let mut x = 0.0;
    let mut step = h;
    let mut k = 0usize;
    while x <= extent {
        if x >= core {
            step = (step * growth).min(h_max.max(h));
        }
        k += 1;
        // Uniform stretches are laid out by multiplication to avoid drift.
        x = if x < core && step == h { k as f64 * h } else { x + step };
        xs.push(x);
    }
    xs
}

#[derive(Clone, Copy)]
struct Face {
    kappa: f64,
    delta: f64,
    qn: f64,
    qt: f64,
    a: f64,
}

impl AxisGrid {
    pub(crate) fn build(
        domain: &ExteriorDomain,
        r_out: f64,
        rho: Vec<f64>,
        z: Vec<f64>,
        mirror: bool,
        origin: f64,
    ) -> Result<Self> {
        let n = domain.dimension();
        let nr = rho.len();
        let nz = z.len();
        let lattice_index = |i: usize, k: usize| k * nr + i;
        let r2 = r_out * r_out;
        let active = |i: usize, k: usize| {
            let (p, q) = (rho[i], z[k]);
            p * p + q * q < r2 && domain.section_signed_distance([q + origin, p]) > 0.0
        };
        let mut lattice = vec![NONE; nr * nz];
        let mut coords = Vec::new();
        for k in 0..nz {
            for i in 0..nr {
                if active(i, k) {
                    lattice[lattice_index(i, k)] = coords.len() as u32;
                    coords.push((i, k));
                }
            }
        }
        if coords.is_empty() {
            return Err(Error::InvalidArgument("grid has no interior nodes".into()));
        }
        let half = |xs: &[f64], i: usize| 0.5 * (xs[i] + xs[i + 1]);
        let m = (n - 1) as f64;
        let ring: Vec<f64> = (0..nr - 1)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { half(&rho, i - 1) };
                (half(&rho, i).powf(m) - lo.powf(m)) / m
            })
            .collect();
        let face_rho: Vec<f64> = (0..nr - 1).map(|i| half(&rho, i).powi(n as i32 - 2) / (rho[i + 1] - rho[i])).collect();
        let inv_dz: Vec<f64> = (0..nz - 1).map(|k| 1.0 / (z[k + 1] - z[k])).collect();

        let mut nodes = Vec::with_capacity(coords.len());
        let mut cuts = Vec::new();
        for (idx, &(i, k)) in coords.iter().enumerate() {
            let p = [rho[i], z[k]];
            let on_mirror = mirror && k == 0;
            let dz_cell = {
                let lo = if on_mirror { 0.0 } else { half(&z, k - 1) };
                half(&z, k) - lo
            };
            let neighbours: [Option<(usize, usize)>; 4] = [
                Some((i + 1, k)),
                (i > 0).then(|| (i - 1, k)),
                Some((i, k + 1)),
                (!on_mirror).then(|| (i, k - 1)),
            ];
            let mut links = [Link::Axis; 4];
            for d in 0..4 {
                links[d] = match neighbours[d] {
                    None if d == W => Link::Axis,
                    None => Link::Reflect,
                    Some((ii, kk)) => {
                        let j = lattice[lattice_index(ii, kk)];
                        if j != NONE {
                            Link::Node(j)
                        } else {
                            let q = [rho[ii], z[kk]];
                            let (theta, outer) = if q[0] * q[0] + q[1] * q[1] >= r2 {
                                (sphere_exit(p, q, r_out), true)
                            } else {
                                let t = domain
                                    .section_first_entry([p[1] + origin, p[0]], [q[1] + origin, q[0]])
                                    .unwrap_or(1.0);
                                (t, false)
                            };
                            let theta = theta.clamp(THETA_MIN, 1.0);
                            let point = [p[0] + theta * (q[0] - p[0]), p[1] + theta * (q[1] - p[1])];
                            cuts.push(Cut { node: idx as u32, dir: d as u8, theta, outer, point, ghost: q, weights: [1.0 / theta, 1.0 - 1.0 / theta, 0.0] });
                            Link::Ghost((cuts.len() - 1) as u32)
                        }
                    }
                };
            }
            let dist = [
                rho[i + 1] - rho[i],
                if i > 0 { rho[i] - rho[i - 1] } else { rho[1] },
                z[k + 1] - z[k],
                if on_mirror { z[1] } else { z[k] - z[k - 1] },
            ];
            for d in 0..4 {
                if let (Link::Ghost(c), Link::Node(_)) = (links[d], links[OPPOSITE[d]]) {
                    let cut = &mut cuts[c as usize];
                    cut.weights = quadratic_weights(cut.theta * dist[d], dist[d], dist[OPPOSITE[d]]);
                }
            }
            let kappa = [
                face_rho[i] * dz_cell,
                if i > 0 { face_rho[i - 1] * dz_cell } else { 0.0 },
                ring[i] * inv_dz[k],
                if on_mirror { 0.0 } else { ring[i] * inv_dz[k - 1] },
            ];
            let coef = |dp: f64, dm: f64| (dm / (dp * (dp + dm)), dp / (dm * (dp + dm)));
            let (ce, cw) = coef(dist[E], dist[W]);
            let (cn, cs) = coef(dist[N], dist[S]);
            nodes.push(AxisNode {
                i: i as u32,
                k: k as u32,
                links,
                kappa,
                dist,
                dcoef: [ce, cw, cn, cs],
                volume: ring[i] * dz_cell,
            });
        }

        // Upper-triangular CSC pattern of the symmetric Picard matrix:
        // column P holds its south and west neighbours and the diagonal.
        let mut col_ptr = Vec::with_capacity(nodes.len() + 1);
        let mut row_idx = Vec::with_capacity(3 * nodes.len());
        col_ptr.push(0);
        for (p, node) in nodes.iter().enumerate() {
            for d in [S, W] {
                if let Link::Node(j) = node.links[d] {
                    if node.kappa[d] > 0.0 {
                        debug_assert!((j as usize) < p);
                        row_idx.push(j as usize);
                    }
                }
            }
            row_idx.push(p);
            col_ptr.push(row_idx.len());
        }

        Ok(Self { rho, z, mirror, origin, nodes, cuts, col_ptr, row_idx, symbolic: OnceLock::new() })
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn position(&self, p: usize) -> [f64; 2] {
        let node = &self.nodes[p];
        [self.rho[node.i as usize], self.z[node.k as usize]]
    }

    /// Boundary values at every cut: `inner` on the obstacle, `outer` on the sphere.
    pub(crate) fn ghost_data(&self, inner: f64, outer: f64) -> Vec<f64> {
        self.cuts.iter().map(|c| if c.outer { outer } else { inner }).collect()
    }

    #[inline]
    fn value(&self, p: usize, d: usize, u: &[f64], gv: &[f64]) -> f64 {
        match self.nodes[p].links[d] {
            Link::Node(j) => u[j as usize],
            Link::Ghost(c) => {
                let [wb, wp, wo] = self.cuts[c as usize].weights;
                let mut v = wb * gv[c as usize] + wp * u[p];
                if let Link::Node(j) = self.nodes[p].links[OPPOSITE[d]] {
                    v += wo * u[j as usize];
                }
                v
            }
            Link::Axis => self.value(p, E, u, gv),
            Link::Reflect => self.value(p, N, u, gv),
        }
    }

    /// Centred derivatives `(d/drho, d/dz)` at every node.
    pub(crate) fn derivatives(&self, u: &[f64], gv: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let pairs: Vec<(f64, f64)> = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let node = &self.nodes[p];
                let up = u[p];
                let dr = if node.links[W] == Link::Axis {
                    0.0
                } else {
                    node.dcoef[E] * (self.value(p, E, u, gv) - up) + node.dcoef[W] * (up - self.value(p, W, u, gv))
                };
                let dz = if node.links[S] == Link::Reflect {
                    0.0
                } else {
                    node.dcoef[N] * (self.value(p, N, u, gv) - up) + node.dcoef[S] * (up - self.value(p, S, u, gv))
                };
                (dr, dz)
            })
            .collect();
        pairs.into_iter().unzip()
    }

    /// Face data regardless of the face weight (axis faces excepted).
    fn face_unweighted(&self, p: usize, d: usize, u: &[f64], gv: &[f64], dr: &[f64], dz: &[f64]) -> Option<Face> {
        let node = &self.nodes[p];
        let tangential = if d == E || d == W { dz } else { dr };
        let qt = match node.links[d] {
            Link::Node(j) => 0.5 * (tangential[p] + tangential[j as usize]),
            Link::Ghost(_) => match self.ghost_face_extrapolation(p, d) {
                Some((o, w)) => tangential[p] + w * (tangential[p] - tangential[o]),
                None => tangential[p],
            },
            Link::Axis | Link::Reflect => return None,
        };
        let delta = self.value(p, d, u, gv) - u[p];
        let qn = delta / node.dist[d];
        let a = 1.0 / (1.0 + qn * qn + qt * qt).sqrt();
        Some(Face { kappa: node.kappa[d], delta, qn, qt, a })
    }

    #[inline]
    fn face(&self, p: usize, d: usize, u: &[f64], gv: &[f64], dr: &[f64], dz: &[f64]) -> Option<Face> {
        let node = &self.nodes[p];
        let kappa = node.kappa[d];
        if kappa == 0.0 {
            return None;
        }
        let tangential = if d == E || d == W { dz } else { dr };
        let qt = match node.links[d] {
            Link::Node(j) => 0.5 * (tangential[p] + tangential[j as usize]),
            Link::Ghost(_) => match self.ghost_face_extrapolation(p, d) {
                Some((o, w)) => tangential[p] + w * (tangential[p] - tangential[o]),
                None => tangential[p],
            },
            Link::Axis | Link::Reflect => return None,
        };
        let delta = self.value(p, d, u, gv) - u[p];
        let qn = delta / node.dist[d];
        let a = 1.0 / (1.0 + qn * qn + qt * qt).sqrt();
        Some(Face { kappa, delta, qn, qt, a })
    }

    /// Opposite node and weight extrapolating a nodal quantity from `p` to the
    /// midpoint of its ghost face in direction `d`.
    #[inline]
    fn ghost_face_extrapolation(&self, p: usize, d: usize) -> Option<(usize, f64)> {
        let node = &self.nodes[p];
        let od = OPPOSITE[d];
        match node.links[od] {
            Link::Node(o) => Some((o as usize, 0.5 * node.dist[d] / node.dist[od])),
            _ => None,
        }
    }

    /// Volume-integrated residual `G = -∮ a ∇u · n`; `G / V` approximates `-M(u)`.
    pub(crate) fn residual(&self, u: &[f64], gv: &[f64], out: &mut [f64]) {
        let (dr, dz) = self.derivatives(u, gv);
        out.par_iter_mut().enumerate().for_each(|(p, g)| {
            let mut b = 0.0;
            for d in 0..4 {
                if let Some(f) = self.face(p, d, u, gv, &dr, &dz) {
                    b += f.kappa * f.a * f.delta;
                }
            }
            *g = -b;
        });
    }

    pub(crate) fn volumes(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.volume).collect()
    }

    fn push_value(&self, p: usize, d: usize, mult: f64, out: &mut Vec<(u32, f64)>) {
        match self.nodes[p].links[d] {
            Link::Node(j) => out.push((j, mult)),
            Link::Ghost(c) => {
                let [_, wp, wo] = self.cuts[c as usize].weights;
                out.push((p as u32, mult * wp));
                if let Link::Node(j) = self.nodes[p].links[OPPOSITE[d]] {
                    out.push((j, mult * wo));
                }
            }
            Link::Axis => self.push_value(p, E, mult, out),
            Link::Reflect => self.push_value(p, N, mult, out),
        }
    }

    /// Linearization of the centred derivative along `axis` (0: rho, 1: z).
    fn push_derivative(&self, p: usize, axis: usize, mult: f64, out: &mut Vec<(u32, f64)>) {
        let node = &self.nodes[p];
        let (dp, dm) = if axis == 0 { (E, W) } else { (N, S) };
        if (axis == 0 && node.links[W] == Link::Axis) || (axis == 1 && node.links[S] == Link::Reflect) {
            return;
        }
        let (cp, cm) = (node.dcoef[dp], node.dcoef[dm]);
        self.push_value(p, dp, mult * cp, out);
        out.push((p as u32, mult * (cm - cp)));
        self.push_value(p, dm, -mult * cm, out);
    }

    /// Exact Jacobian of [`Self::residual`].
    pub(crate) fn jacobian(&self, u: &[f64], gv: &[f64]) -> Csr {
        let (dr, dz) = self.derivatives(u, gv);
        let rows: Vec<Vec<(u32, f64)>> = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let mut entries = Vec::with_capacity(32);
                for d in 0..4 {
                    let Some(f) = self.face(p, d, u, gv, &dr, &dz) else { continue };
                    let a3 = f.a * f.a * f.a;
                    let ca = f.kappa * (f.a - a3 * f.qn * f.qn);
                    let cb = -f.kappa * a3 * f.delta * f.qt;
                    let tangential = if d == E || d == W { 1 } else { 0 };
                    match self.nodes[p].links[d] {
                        Link::Node(j) => {
                            entries.push((j, -ca));
                            entries.push((p as u32, ca));
                            self.push_derivative(p, tangential, -0.5 * cb, &mut entries);
                            self.push_derivative(j as usize, tangential, -0.5 * cb, &mut entries);
                        }
                        Link::Ghost(_) => {
                            entries.push((p as u32, ca));
                            self.push_value(p, d, -ca, &mut entries);
                            match self.ghost_face_extrapolation(p, d) {
                                Some((o, w)) => {
                                    self.push_derivative(p, tangential, -cb * (1.0 + w), &mut entries);
                                    self.push_derivative(o, tangential, cb * w, &mut entries);
                                }
                                None => self.push_derivative(p, tangential, -cb, &mut entries),
                            }
                        }
                        Link::Axis | Link::Reflect => {}
                    }
                }
                entries
            })
            .collect();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut csr = Csr::with_capacity(self.len(), nnz);
        for mut r in rows {
            csr.push_row(&mut r);
        }
        csr
    }

    /// Values of the frozen-coefficient matrix in the upper CSC pattern.
    fn picard_values(&self, u: &[f64], gv: &[f64], unit: bool) -> Vec<f64> {
        let (dr, dz) = if unit { (vec![0.0; self.len()], vec![0.0; self.len()]) } else { self.derivatives(u, gv) };
        let per_column: Vec<[f64; 3]> = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let node = &self.nodes[p];
                let mut diag = 0.0;
                let mut off = [0.0; 2];
                for d in 0..4 {
                    let coeff = if unit {
                        if node.kappa[d] == 0.0 || matches!(node.links[d], Link::Axis | Link::Reflect) {
                            continue;
                        }
                        node.kappa[d]
                    } else {
                        match self.face(p, d, u, gv, &dr, &dz) {
                            Some(f) => f.kappa * f.a,
                            None => continue,
                        }
                    };
                    match node.links[d] {
                        Link::Node(_) => {
                            diag += coeff;
                            if d == S {
                                off[0] = -coeff;
                            } else if d == W {
                                off[1] = -coeff;
                            }
                        }
                        Link::Ghost(c) => diag += coeff / self.cuts[c as usize].theta,
                        Link::Axis | Link::Reflect => {}
                    }
                }
                [off[0], off[1], diag]
            })
            .collect();
        let mut vals = Vec::with_capacity(self.row_idx.len());
        for (p, node) in self.nodes.iter().enumerate() {
            let [os, ow, diag] = per_column[p];
            if matches!(node.links[S], Link::Node(_)) && node.kappa[S] > 0.0 {
                vals.push(os);
            }
            if matches!(node.links[W], Link::Node(_)) && node.kappa[W] > 0.0 {
                vals.push(ow);
            }
            vals.push(diag);
        }
        vals
    }

    fn symbolic(&self) -> Result<SymbolicLlt<usize>> {
        self.symbolic
            .get_or_init(|| {
                let n = self.len();
                let sym = SymbolicSparseColMatRef::new_checked(n, n, &self.col_ptr, None, &self.row_idx);
                SymbolicLlt::try_new(sym, Side::Upper).map_err(|e| format!("{e:?}"))
            })
            .clone()
            .map_err(Error::LinearSolve)
    }

    /// Cholesky factor of the frozen-coefficient matrix at `u`, or of the
    /// unit-coefficient (harmonic) matrix when `unit` is set.
    pub(crate) fn picard_factor(&self, u: &[f64], gv: &[f64], unit: bool) -> Result<PicardFactor> {
        let vals = self.picard_values(u, gv, unit);
        let n = self.len();
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &self.col_ptr, None, &self.row_idx);
        let mat = SparseColMatRef::new(sym, &vals);
        let llt = Llt::try_new_with_symbolic(self.symbolic()?, mat, Side::Upper)
            .map_err(|e| Error::LinearSolve(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(PicardFactor { llt })
    }

    /// Discrete harmonic function: 0 on the obstacle, 1 on the outer sphere.
    pub(crate) fn harmonic(&self) -> Result<Vec<f64>> {
        let factor = self.picard_factor(&[], &[], true)?;
        let mut rhs = vec![0.0; self.len()];
        for c in &self.cuts {
            if c.outer {
                let node = &self.nodes[c.node as usize];
                rhs[c.node as usize] += node.kappa[c.dir as usize] / c.theta;
            }
        }
        factor.solve_in_place(&mut rhs);
        Ok(rhs)
    }

    /// Largest `|∇u|` on the outer sphere, from a one-sided quadratic along
    /// each crossing link divided by the normal's projection.
    pub(crate) fn outer_gradient_max(&self, u: &[f64], gv: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for (ci, c) in self.cuts.iter().enumerate() {
            if !c.outer {
                continue;
            }
            let r = c.point[0].hypot(c.point[1]);
            let normal = [-c.point[0] / r, -c.point[1] / r];
            let Some(cos) = self.link_cosine(c, normal) else { continue };
            let p = c.node as usize;
            let d = c.dir as usize;
            let node = &self.nodes[p];
            let b = gv[ci];
            let s1 = c.theta * node.dist[d];
            let v1 = u[p] - b;
            let od = OPPOSITE[d];
            let deriv = match node.links[od] {
                Link::Node(j) => {
                    let s2 = s1 + node.dist[od];
                    let v2 = u[j as usize] - b;
                    (v1 * s2 * s2 - v2 * s1 * s1) / (s1 * s2 * (s2 - s1))
                }
                _ => v1 / s1,
            };
            best = best.max(deriv.abs() / cos);
        }
        best
    }

    /// Whether any stencil link of node `p` crosses a boundary.
    pub(crate) fn touches_boundary(&self, p: usize) -> bool {
        self.nodes[p].links.iter().any(|l| matches!(l, Link::Ghost(_)))
    }

    /// `|n · e|` for the link of `c`, or `None` when the link runs closer
    /// to tangential than 45 degrees.
    fn link_cosine(&self, c: &Cut, normal: [f64; 2]) -> Option<f64> {
        let e = match c.dir as usize {
            E | W => [1.0, 0.0],
            _ => [0.0, 1.0],
        };
        let cos = (normal[0] * e[0] + normal[1] * e[1]).abs();
        (cos >= std::f64::consts::FRAC_1_SQRT_2 - 1e-12).then_some(cos)
    }

    /// Normal flux density `∂_n u / sqrt(1 + |∇u|^2)` at each obstacle crossing,
    /// extrapolated quadratically along the link from the discrete face fluxes
    /// (the ghost face and up to two interior faces).
    pub(crate) fn boundary_flux(&self, u: &[f64], gv: &[f64], domain: &ExteriorDomain) -> Vec<(usize, f64)> {
        let (dr, dz) = self.derivatives(u, gv);
        let mut out = Vec::new();
        for (ci, c) in self.cuts.iter().enumerate().filter(|(_, c)| !c.outer) {
            let nrm = domain.section_normal([c.point[1] + self.origin, c.point[0]]);
            let Some(cos) = self.link_cosine(c, [nrm[1], nrm[0]]) else { continue };
            let p = c.node as usize;
            let d = c.dir as usize;
            let od = OPPOSITE[d];
            let node = &self.nodes[p];
            let xp = c.theta * node.dist[d];
            // (position measured inward from the crossing, inward flux)
            let mut samples: Vec<(f64, f64)> = Vec::with_capacity(3);
            let flux = |q: usize, dir: usize| -> Option<f64> {
                let f = self.face_unweighted(q, dir, u, gv, &dr, &dz)?;
                Some(f.a * f.qn)
            };
            if let Some(f) = flux(p, d) {
                samples.push((xp - 0.5 * node.dist[d], -f));
            }
            if let Link::Node(o) = node.links[od] {
                if let Some(f) = flux(p, od) {
                    samples.push((xp + 0.5 * node.dist[od], f));
                }
                let o = o as usize;
                let onode = &self.nodes[o];
                if let (Link::Node(_), Some(f)) = (onode.links[od], flux(o, od)) {
                    samples.push((xp + node.dist[od] + 0.5 * onode.dist[od], f));
                }
            }
            let phi = match samples.len() {
                0 => continue,
                1 => samples[0].1,
                2 => {
                    let ((x0, f0), (x1, f1)) = (samples[0], samples[1]);
                    f0 - x0 * (f1 - f0) / (x1 - x0)
                }
                _ => {
                    let ((x0, f0), (x1, f1), (x2, f2)) = (samples[0], samples[1], samples[2]);
                    f0 * x1 * x2 / ((x0 - x1) * (x0 - x2))
                        + f1 * x0 * x2 / ((x1 - x0) * (x1 - x2))
                        + f2 * x0 * x1 / ((x2 - x0) * (x2 - x1))
                }
            };
            out.push((ci, phi / cos));
        }
        out
    }

}

/// Lagrange weights extrapolating to the ghost at distance `h` from the
/// boundary at `xb`, the node at 0 and the opposite node at `-ho`.
fn quadratic_weights(xb: f64, h: f64, ho: f64) -> [f64; 3] {
    let wb = h * (h + ho) / (xb * (xb + ho));
    let wp = -(h - xb) * (h + ho) / (xb * ho);
    let wo = (h - xb) * h / ((ho + xb) * ho);
    [wb, wp, wo]
}

/// Outgoing parameter of the segment `p -> q` through the sphere `|x| = r`.
fn sphere_exit(p: [f64; 2], q: [f64; 2], r: f64) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    let b = 2.0 * (p[0] * d[0] + p[1] * d[1]);
    let c = p[0] * p[0] + p[1] * p[1] - r * r;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // c < 0, so the roots have opposite signs and the positive one is wanted.
    let root = if b <= 0.0 { (-b + disc.sqrt()) / (2.0 * a) } else { c / (-0.5 * (b + disc.sqrt())) };
    root.clamp(0.0, 1.0)
}

/// Reusable frozen-coefficient Cholesky factor.
pub(crate) struct PicardFactor {
    llt: Llt<usize, f64>,
}

impl PicardFactor {
    pub(crate) fn solve_in_place(&self, v: &mut [f64]) {
        let n = v.len();
        self.llt.solve_in_place(MatMut::from_column_major_slice_mut(v, n, 1));
    }
}
