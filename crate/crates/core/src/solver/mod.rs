//! Discrete Dirichlet problems for the minimal surface equation on truncated
//! exterior domains: zero on the obstacle and `t` on an outer sphere.

mod axisym;
mod gmres;
mod radial1d;
mod sparse;

use std::io::Write;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enclosing_ball, DomainKind, ExteriorDomain};
use axisym::AxisGrid;
pub use axisym::Cut;
use gmres::{gmres, GmresOptions};
use radial1d::{thomas, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Radius only; requires a ball obstacle.
    Radial1d,
    /// Meridian half-plane of an axisymmetric obstacle.
    Axisymmetric2d,
}

/// Node spacing: `h` inside the core region, then geometric growth by
/// `growth` per cell up to `h_max`. `growth = 1` gives a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub mode: GridMode,
    pub h: f64,
    #[serde(default = "unit_growth")]
    pub growth: f64,
    /// Largest spacing; defaults to half the circumradius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    /// Extent of the uniform core as a multiple of the circumradius.
    /// Defaults to 1.25 in 2D and to 1 (grading starts at the obstacle) in 1D.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<f64>,
}

fn unit_growth() -> f64 {
    1.0
}

impl GridSpec {
    pub fn uniform(mode: GridMode, h: f64) -> Self {
        Self { mode, h, growth: 1.0, h_max: None, core: None }
    }

    pub fn graded(mode: GridMode, h: f64, growth: f64, h_max: f64) -> Self {
        Self { mode, h, growth, h_max: Some(h_max), core: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {}", self.h)));
        }
        if !(self.growth >= 1.0) || !self.growth.is_finite() {
            return Err(Error::InvalidArgument(format!("growth factor must be >= 1, got {}", self.growth)));
        }
        if let Some(hm) = self.h_max {
            if !(hm >= self.h) {
                return Err(Error::InvalidArgument("h_max must be at least h".into()));
            }
        }
        if let Some(c) = self.core {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument("core extent must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
enum GridKind {
    Radial(RadialGrid),
    Axisymmetric(AxisGrid),
}

/// A node's location: `rho` from the axis and `z` along it, both measured from
/// the center of the outer sphere. Radial grids report `(r, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePoint {
    pub rho: f64,
    pub z: f64,
}

impl NodePoint {
    pub fn radius(&self) -> f64 {
        self.rho.hypot(self.z)
    }
}

/// Truncated domain `B_{R_out} ∩ Ω` with its discretization.
#[derive(Debug)]
pub struct Grid {
    domain: ExteriorDomain,
    spec: GridSpec,
    r_out: f64,
    circumradius: f64,
    /// Axial coordinate of the outer sphere's center in meridian coordinates.
    origin: f64,
    kind: GridKind,
    harmonic: OnceLock<std::result::Result<Vec<f64>, String>>,
}

impl Grid {
    /// Builds the grid on `B_{r_out} ∩ Ω`; the outer sphere is centred at
    /// the center of the smallest ball enclosing the obstacle.
    pub fn new(domain: &ExteriorDomain, r_out: f64, spec: &GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let ball = enclosing_ball(domain)?;
        let varrho = ball.radius;
        if !(r_out > varrho) || !r_out.is_finite() {
            return Err(Error::InvalidArgument(format!("outer radius {r_out} must exceed the circumradius {varrho}")));
        }
        let h_max = spec.h_max.unwrap_or(0.5 * varrho).max(spec.h);
        let (kind, origin) = match spec.mode {
            GridMode::Radial1d => {
                if domain.kind() != DomainKind::Ball {
                    return Err(Error::InvalidArgument("radial grids need a ball obstacle".into()));
                }
                let r0 = domain.params()[0];
                let core = if spec.growth == 1.0 { r_out } else { spec.core.unwrap_or(1.0) * r0 };
                let g = RadialGrid::graded(domain.dimension(), r0, r_out, spec.h, core, spec.growth, h_max)?;
                (GridKind::Radial(g), 0.0)
            }
            GridMode::Axisymmetric2d => {
                let (mirror, origin) = match domain.mirror_plane() {
                    Some(m) if (m - ball.axial_offset).abs() <= 1e-9 * varrho => (true, m),
                    _ => (false, ball.axial_offset),
                };
                let core = if spec.growth == 1.0 { r_out } else { spec.core.unwrap_or(1.25) * varrho };
                let pos = axisym::stretched_coordinates(spec.h, core, spec.growth, h_max, r_out);
                let z = if mirror {
                    pos.clone()
                } else {
                    let mut z: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
                    z.extend_from_slice(&pos[1..]);
                    z
                };
                (GridKind::Axisymmetric(AxisGrid::build(domain, r_out, pos, z, mirror, origin)?), origin)
            }
        };
        Ok(Arc::new(Grid {
            domain: domain.clone(),
            spec: *spec,
            r_out,
            circumradius: varrho,
            origin,
            kind,
            harmonic: OnceLock::new(),
        }))
    }

    pub fn mode(&self) -> GridMode {
        self.spec.mode
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn domain(&self) -> &ExteriorDomain {
        &self.domain
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Core spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.spec.h
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        match &self.kind {
            GridKind::Radial(g) => g.len(),
            GridKind::Axisymmetric(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether the grid only covers the half space `z >= 0` by reflection.
    pub fn is_mirrored(&self) -> bool {
        matches!(&self.kind, GridKind::Axisymmetric(g) if g.mirror)
    }

    pub fn node_points(&self) -> Vec<NodePoint> {
        match &self.kind {
            GridKind::Radial(g) => g.r[1..g.r.len() - 1].iter().map(|&r| NodePoint { rho: r, z: 0.0 }).collect(),
            GridKind::Axisymmetric(g) => (0..g.len())
                .map(|p| {
                    let [rho, z] = g.position(p);
                    NodePoint { rho, z }
                })
                .collect(),
        }
    }

    /// Meridian coordinates `(zeta, y)` of a node relative to the domain center.
    pub fn meridian(&self, p: &NodePoint) -> [f64; 2] {
        match self.spec.mode {
            GridMode::Radial1d => [p.rho, 0.0],
            GridMode::Axisymmetric2d => [p.z + self.origin, p.rho],
        }
    }

    /// Center of the outer sphere in meridian coordinates.
    pub fn outer_center(&self) -> [f64; 2] {
        [self.origin, 0.0]
    }

    /// Crossings of grid links with the obstacle and the outer sphere (2D only).
    pub fn cuts(&self) -> &[Cut] {
        match &self.kind {
            GridKind::Radial(_) => &[],
            GridKind::Axisymmetric(g) => &g.cuts,
        }
    }

    /// Meridian coordinates of the ghost points beyond the obstacle.
    pub fn inner_ghost_points(&self) -> Vec<[f64; 2]> {
        match &self.kind {
            GridKind::Radial(g) => vec![[g.r[0], 0.0]],
            GridKind::Axisymmetric(g) => {
                g.cuts.iter().filter(|c| !c.outer).map(|c| [c.ghost[1] + g.origin, c.ghost[0]]).collect()
            }
        }
    }

    /// Whether two grids discretize the same truncated domain identically.
    pub fn same_layout(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other)
            || (self.spec == other.spec
                && self.r_out == other.r_out
                && self.domain == other.domain
                && self.len() == other.len())
    }

    /// Control-volume measures; residual divided by these approximates `M(u)`.
    pub fn volumes(&self) -> Vec<f64> {
        match &self.kind {
            GridKind::Radial(g) => g.volumes(),
            GridKind::Axisymmetric(g) => g.volumes(),
        }
    }

    fn harmonic(&self) -> Result<&[f64]> {
        self.harmonic
            .get_or_init(|| {
                match &self.kind {
                    GridKind::Radial(g) => g.harmonic(),
                    GridKind::Axisymmetric(g) => g.harmonic(),
                }
                .map_err(|e| e.to_string())
            })
            .as_deref()
            .map_err(|e| Error::LinearSolve(e.clone()))
    }

    fn residual_into(&self, u: &[f64], t: f64, out: &mut [f64]) {
        match &self.kind {
            GridKind::Radial(g) => g.residual(u, t, out),
            GridKind::Axisymmetric(g) => g.residual(u, &g.ghost_data(0.0, t), out),
        }
    }
}

/// Newton iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonOptions {
    pub residual_tol: f64,
    pub update_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub linear_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-10, update_tol: 1e-12, max_iterations: 50, max_halvings: 20, linear_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_max: f64,
    pub linear_iterations: usize,
    pub halvings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldState {
    /// Raw iterate; gradient measures refuse it.
    Unsolved,
    /// Values supplied from outside, e.g. sampled from an exact solution.
    Prescribed,
    Solved(SolveStats),
}

/// Nodal values on a grid with obstacle value 0 and outer value `t`.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    outer_value: f64,
    state: FieldState,
}

impl DiscreteField {
    fn with_state(grid: &Arc<Grid>, values: Vec<f64>, outer_value: f64, state: FieldState) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !outer_value.is_finite() {
            return Err(Error::InvalidArgument("outer value must be finite".into()));
        }
        Ok(Self { grid: Arc::clone(grid), values, outer_value, state })
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>, outer_value: f64) -> Result<Self> {
        Self::with_state(grid, values, outer_value, FieldState::Prescribed)
    }

    pub fn unsolved(grid: &Arc<Grid>, values: Vec<f64>, outer_value: f64) -> Result<Self> {
        Self::with_state(grid, values, outer_value, FieldState::Unsolved)
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Arc<Grid>, outer_value: f64, f: impl Fn(&NodePoint) -> f64) -> Result<Self> {
        let values = grid.node_points().iter().map(f).collect();
        Self::from_values(grid, values, outer_value)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![0.0; grid.len()], outer_value: 0.0, state: FieldState::Prescribed }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn outer_value(&self) -> f64 {
        self.outer_value
    }

    pub fn state(&self) -> FieldState {
        self.state
    }

    pub fn stats(&self) -> Option<SolveStats> {
        match self.state {
            FieldState::Solved(s) => Some(s),
            _ => None,
        }
    }

    /// The reflected field `-u` with outer value `-t`.
    pub fn negated(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| -v).collect(),
            outer_value: -self.outer_value,
            state: self.state,
        }
    }

    fn require_evaluable(&self) -> Result<()> {
        if matches!(self.state, FieldState::Unsolved) {
            return Err(Error::Unsolved);
        }
        Ok(())
    }

    /// `|∇u|` at every node from centred differences.
    pub fn gradient_norms(&self) -> Vec<f64> {
        match &self.grid.kind {
            GridKind::Radial(g) => g.centered_slopes(&self.values, self.outer_value).iter().map(|s| s.abs()).collect(),
            GridKind::Axisymmetric(g) => {
                let (dr, dz) = g.derivatives(&self.values, &g.ghost_data(0.0, self.outer_value));
                dr.iter().zip(&dz).map(|(a, b)| a.hypot(*b)).collect()
            }
        }
    }

    /// CSV export. Radial grids: `r,u,grad`; axisymmetric grids: `rho,z,u,grad`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let grads = self.gradient_norms();
        let pts = self.grid.node_points();
        match self.grid.mode() {
            GridMode::Radial1d => {
                writeln!(w, "r,u,grad")?;
                for ((p, u), g) in pts.iter().zip(&self.values).zip(&grads) {
                    writeln!(w, "{:e},{:e},{:e}", p.rho, u, g)?;
                }
            }
            GridMode::Axisymmetric2d => {
                writeln!(w, "rho,z,u,grad")?;
                for ((p, u), g) in pts.iter().zip(&self.values).zip(&grads) {
                    writeln!(w, "{:e},{:e},{:e},{:e}", p.rho, p.z, u, g)?;
                }
            }
        }
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::NonFinite { node }),
        None => Ok(()),
    }
}

/// Nodal residual divided by the control volumes: a second-order
/// approximation of `M(u) = div(∇u / sqrt(1 + |∇u|^2))`.
pub fn assemble_residual(field: &DiscreteField) -> Result<Vec<f64>> {
    check_finite(&field.values)?;
    let grid = &field.grid;
    let mut g = vec![0.0; grid.len()];
    grid.residual_into(&field.values, field.outer_value, &mut g);
    Ok(g.iter().zip(grid.volumes()).map(|(gi, v)| -gi / v).collect())
}

/// Residual with arbitrary boundary values at each cut (axisymmetric grids).
#[doc(hidden)]
pub fn assemble_residual_with(field: &DiscreteField, boundary: impl Fn(&Cut) -> f64) -> Result<Vec<f64>> {
    check_finite(&field.values)?;
    let grid = &field.grid;
    let GridKind::Axisymmetric(g) = &grid.kind else {
        return assemble_residual(field);
    };
    let gv: Vec<f64> = g.cuts.iter().map(boundary).collect();
    let mut out = vec![0.0; g.len()];
    g.residual(&field.values, &gv, &mut out);
    Ok(out.iter().zip(g.volumes()).map(|(gi, v)| -gi / v).collect())
}

/// Dense Jacobian of the volume-integrated residual (for tests on small grids).
#[doc(hidden)]
pub fn jacobian_dense(field: &DiscreteField) -> Vec<Vec<f64>> {
    match &field.grid.kind {
        GridKind::Radial(g) => {
            let (l, d, u) = g.jacobian(&field.values, field.outer_value);
            let m = d.len();
            let mut out = vec![vec![0.0; m]; m];
            for i in 0..m {
                out[i][i] = d[i];
                if i > 0 {
                    out[i][i - 1] = l[i];
                }
                if i + 1 < m {
                    out[i][i + 1] = u[i];
                }
            }
            out
        }
        GridKind::Axisymmetric(g) => g.jacobian(&field.values, &g.ghost_data(0.0, field.outer_value)).to_dense(),
    }
}

/// Volume-integrated residual `G` (for tests).
#[doc(hidden)]
pub fn integrated_residual(grid: &Grid, values: &[f64], t: f64) -> Vec<f64> {
    let mut g = vec![0.0; grid.len()];
    grid.residual_into(values, t, &mut g);
    g
}

fn weighted_norm(g: &[f64], vol: &[f64]) -> f64 {
    g.iter().zip(vol).map(|(gi, v)| gi * gi / v).sum::<f64>().sqrt()
}

fn max_scaled(g: &[f64], vol: &[f64]) -> f64 {
    g.iter().zip(vol).map(|(gi, v)| (gi / v).abs()).fold(0.0, f64::max)
}

/// Damped Newton iteration for outer value `t`.
///
/// Without an initial field the iteration starts from `t·H`, `H` the discrete
/// harmonic function with the same boundary values as `u/t`. An initial field
/// at outer value `t0` is shifted by `(t - t0)·H` to match the new data.
pub fn newton_solve(grid: &Arc<Grid>, t: f64, initial: Option<&DiscreteField>, opts: &NewtonOptions) -> Result<DiscreteField> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument("outer value must be finite".into()));
    }
    let harmonic = grid.harmonic()?;
    let mut u: Vec<f64> = match initial {
        Some(f) => {
            if !f.grid.same_layout(grid) {
                return Err(Error::GridMismatch);
            }
            let shift = t - f.outer_value;
            f.values.iter().zip(harmonic).map(|(v, h)| v + shift * h).collect()
        }
        None => harmonic.iter().map(|h| t * h).collect(),
    };
    check_finite(&u)?;
    let vol = grid.volumes();
    let m = grid.len();
    let mut g = vec![0.0; m];
    grid.residual_into(&u, t, &mut g);
    let mut norm = weighted_norm(&g, &vol);
    let mut stats = SolveStats { iterations: 0, residual_max: max_scaled(&g, &vol), linear_iterations: 0, halvings: 0 };
    let mut trial = vec![0.0; m];
    let mut g_trial = vec![0.0; m];
    loop {
        if stats.residual_max < opts.residual_tol {
            break;
        }
        if stats.iterations >= opts.max_iterations {
            return Err(Error::NewtonNotConverged { iterations: stats.iterations, residual: stats.residual_max });
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let (delta, lin) = linear_step(grid, &u, t, rhs, opts)?;
        stats.linear_iterations += lin;
        stats.iterations += 1;
        let u_scale = u.iter().fold(t.abs(), |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        let step_max = delta.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let small_update = step_max <= opts.update_tol * u_scale;
        let mut lambda = 1.0;
        let mut accepted = false;
        for halving in 0..=opts.max_halvings {
            for i in 0..m {
                trial[i] = u[i] + lambda * delta[i];
            }
            grid.residual_into(&trial, t, &mut g_trial);
            let trial_norm = weighted_norm(&g_trial, &vol);
            if trial_norm.is_finite() && (trial_norm < norm || small_update) {
                stats.halvings += halving;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonNotConverged { iterations: stats.iterations, residual: stats.residual_max });
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        norm = weighted_norm(&g, &vol);
        stats.residual_max = max_scaled(&g, &vol);
        if small_update || lambda * step_max <= opts.update_tol * u_scale {
            break;
        }
    }
    check_finite(&u)?;
    DiscreteField::with_state(grid, u, t, FieldState::Solved(stats))
}

fn linear_step(grid: &Grid, u: &[f64], t: f64, rhs: Vec<f64>, opts: &NewtonOptions) -> Result<(Vec<f64>, usize)> {
    match &grid.kind {
        GridKind::Radial(g) => {
            let (l, d, up) = g.jacobian(u, t);
            let mut x = rhs;
            thomas(&l, &d, &up, &mut x)?;
            Ok((x, 0))
        }
        GridKind::Axisymmetric(g) => {
            let gv = g.ghost_data(0.0, t);
            let jac = g.jacobian(u, &gv);
            let factor = g.picard_factor(u, &gv, false)?;
            let gopts = GmresOptions { rel_tol: opts.linear_tol, ..GmresOptions::default() };
            gmres(
                |x, y| jac.matvec(x, y),
                |v| {
                    factor.solve_in_place(v);
                    Ok(())
                },
                &rhs,
                &gopts,
            )
        }
    }
}

/// Largest normal flux density `|∂_n u| / sqrt(1 + |∇u|^2)` on the obstacle.
///
/// Extrapolated one-sidedly (second order) from the discrete face fluxes next
/// to the boundary. For a solved field this is the sine of the contact angle.
/// Differencing nodal values instead divides by the cut distance and degrades
/// badly once the slope is steep.
pub fn boundary_flux_max(field: &DiscreteField) -> Result<f64> {
    field.require_evaluable()?;
    Ok(match &field.grid.kind {
        GridKind::Radial(g) => g.inner_flux(&field.values, field.outer_value).abs(),
        GridKind::Axisymmetric(g) => g
            .boundary_flux(&field.values, &g.ghost_data(0.0, field.outer_value), &field.grid.domain)
            .into_iter()
            .fold(0.0f64, |m, (_, f)| m.max(f.abs())),
    })
}

/// Largest `|∇u|` on the obstacle, recovered from [`boundary_flux_max`].
/// Infinite when the discrete flux density reaches 1.
pub fn boundary_gradient_max(field: &DiscreteField) -> Result<f64> {
    Ok(slope_from_flux(boundary_flux_max(field)?))
}

/// Slope `tan(asin(phi))` of a graph whose normal flux density is `phi`.
pub fn slope_from_flux(phi: f64) -> f64 {
    let phi = phi.abs().min(1.0);
    let cos = ((1.0 - phi) * (1.0 + phi)).sqrt();
    if cos == 0.0 {
        f64::INFINITY
    } else {
        phi / cos
    }
}

/// Largest `|∇u|` over the interior nodes, from centred differences.
///
/// On axisymmetric grids a node next to a boundary crossing counts as a
/// boundary node: its stencil reaches an extrapolated ghost value, not a
/// lattice value.
pub fn interior_gradient_max(field: &DiscreteField) -> Result<f64> {
    field.require_evaluable()?;
    let norms = field.gradient_norms();
    Ok(match &field.grid.kind {
        GridKind::Radial(_) => norms.into_iter().fold(0.0, f64::max),
        GridKind::Axisymmetric(g) => {
            norms.into_iter().enumerate().filter(|(p, _)| !g.touches_boundary(*p)).fold(0.0, |m, (_, v)| m.max(v))
        }
    })
}

/// Largest `|∇u|` on the outer sphere, from one-sided second-order differences.
pub fn outer_gradient_max(field: &DiscreteField) -> Result<f64> {
    field.require_evaluable()?;
    Ok(match &field.grid.kind {
        GridKind::Radial(g) => g.outer_slope(&field.values, field.outer_value).abs(),
        GridKind::Axisymmetric(g) => {
            g.outer_gradient_max(&field.values, &g.ghost_data(0.0, field.outer_value))
        }
    })
}
