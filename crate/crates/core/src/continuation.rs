//! Leaf families `u_s`: maximal outer values on truncated domains, the
//! extrapolation of their limits, height targeting and Perron barriers.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catenoid::{sigma_closed_form, CatenoidTable};
use crate::error::{Error, Result};
use crate::geometry::{interior_sphere_radius, DomainSpec, ExteriorDomain, GeometryRadii};
use crate::radial::radial_tk;
use crate::solver::{
    boundary_flux_max, interior_gradient_max, slope_from_flux, newton_solve, outer_gradient_max, DiscreteField, Grid, GridMode,
    GridSpec, NewtonOptions, SolveStats,
};
use crate::SCHEMA_VERSION;

/// Knobs shared by every leaf computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationOptions {
    pub grid: GridSpec,
    /// Truncation radii as multiples of the circumradius.
    pub radii: Vec<f64>,
    pub newton: NewtonOptions,
    /// Width of the final bracket on the outer value.
    pub t_tol: f64,
    /// Newton solves allowed per outer-value search.
    pub max_evaluations: usize,
    /// Start each search from the previous leaf; makes the sweep sequential.
    pub warm_start: bool,
    pub fit_threshold: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec { mode: GridMode::Axisymmetric2d, h: 1.0 / 32.0, growth: 1.05, h_max: None, core: None },
            radii: vec![4.0, 8.0, 16.0],
            newton: NewtonOptions::default(),
            t_tol: 1e-8,
            max_evaluations: 80,
            warm_start: true,
            fit_threshold: 1e-3,
        }
    }
}

impl ContinuationOptions {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.radii.len() < 2 {
            return Err(Error::InvalidArgument("at least two truncation radii are needed".into()));
        }
        if self.radii[0] <= 1.0 || self.radii.windows(2).any(|w| !(w[1] > w[0])) || self.radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument("truncation radii must be finite, increasing and exceed 1".into()));
        }
        if !(self.t_tol > 0.0) || self.max_evaluations < 2 || !(self.fit_threshold > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Result of the outer-value search on one truncated domain.
#[derive(Debug, Clone)]
pub struct OuterValue {
    pub t: f64,
    /// Boundary gradient maximum of the accepted field.
    pub slope: f64,
    /// Boundary flux density maximum, the quantity the search matches to `sin(atan s)`.
    pub flux: f64,
    pub evaluations: usize,
    pub field: DiscreteField,
}

impl OuterValue {
    fn zero(grid: &Arc<Grid>) -> Self {
        Self { t: 0.0, slope: 0.0, flux: 0.0, evaluations: 0, field: DiscreteField::zeros(grid) }
    }

    fn negated(&self) -> Self {
        Self { t: -self.t, slope: self.slope, flux: self.flux, evaluations: self.evaluations, field: self.field.negated() }
    }
}

/// The outer value `t` on `B_{r_out} ∩ Ω` whose solution has boundary slope `s`.
pub fn maximal_outer_value(domain: &ExteriorDomain, r_out: f64, s: f64, opts: &ContinuationOptions) -> Result<OuterValue> {
    let grid = Grid::new(domain, r_out, &opts.grid)?;
    maximal_outer_value_on(&grid, s, None, opts)
}

/// As [`maximal_outer_value`] on a prebuilt grid. A `start` from a smaller
/// slope on the same grid seeds the bracket and the Newton iterations.
pub fn maximal_outer_value_on(
    grid: &Arc<Grid>,
    s: f64,
    start: Option<&OuterValue>,
    opts: &ContinuationOptions,
) -> Result<OuterValue> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("slope must be finite, got {s}")));
    }
    if s == 0.0 {
        return Ok(OuterValue::zero(grid));
    }
    if s < 0.0 {
        let mirrored = start.map(OuterValue::negated);
        return Ok(maximal_outer_value_on(grid, -s, mirrored.as_ref(), opts)?.negated());
    }
    OuterSearch::new(grid, s, opts)?.run(start)
}

struct Probe {
    t: f64,
    f: f64,
    field: Option<DiscreteField>,
    flux: f64,
}

struct OuterSearch<'a> {
    grid: &'a Arc<Grid>,
    s: f64,
    target: f64,
    upper: f64,
    opts: &'a ContinuationOptions,
    /// Every evaluated `(t, flux)`, sorted by `t`.
    history: Vec<(f64, f64)>,
    evaluations: usize,
}

impl<'a> OuterSearch<'a> {
    fn new(grid: &'a Arc<Grid>, s: f64, opts: &'a ContinuationOptions) -> Result<Self> {
        let n = grid.domain().dimension();
        let upper = sigma_closed_form(n)? * grid.circumradius() + 1.0;
        Ok(Self { grid, s, target: s / s.hypot(1.0), upper, opts, history: vec![(0.0, 0.0)], evaluations: 0 })
    }

    /// Ball model of the outer value: the enclosing ball's exact value.
    fn model(&self, s: f64) -> f64 {
        let n = self.grid.domain().dimension();
        radial_tk(self.grid.circumradius(), self.grid.r_out(), s, n).unwrap_or(0.5 * self.upper)
    }

    fn record(&mut self, t: f64, flux: f64) -> Result<()> {
        let pos = self.history.partition_point(|e| e.0 < t);
        let tol = 1e-9;
        if pos > 0 {
            let (tl, fl) = self.history[pos - 1];
            if fl > flux + tol {
                return Err(Error::NonMonotone { t_lo: tl, t_hi: t });
            }
        }
        if pos < self.history.len() {
            let (th, fh) = self.history[pos];
            if flux > fh + tol {
                return Err(Error::NonMonotone { t_lo: t, t_hi: th });
            }
        }
        self.history.insert(pos, (t, flux));
        Ok(())
    }

    fn evaluate(&mut self, t: f64, seed: Option<&DiscreteField>) -> Result<Probe> {
        if self.evaluations >= self.opts.max_evaluations {
            return Err(Error::Bracket { s: self.s, upper: self.upper });
        }
        self.evaluations += 1;
        let field = newton_solve(self.grid, t, seed, &self.opts.newton)?;
        let flux = boundary_flux_max(&field)?;
        self.record(t, flux)?;
        Ok(Probe { t, f: flux - self.target, field: Some(field), flux })
    }

    fn run(mut self, start: Option<&OuterValue>) -> Result<OuterValue> {
        let usable = start.filter(|h| h.flux < self.target && h.t > 0.0 && h.field.grid().same_layout(self.grid));
        let mut lo = match usable {
            Some(h) => {
                self.record(h.t, h.flux)?;
                Probe { t: h.t, f: h.flux - self.target, field: Some(h.field.clone()), flux: h.flux }
            }
            None => Probe { t: 0.0, f: -self.target, field: None, flux: 0.0 },
        };
        let guess = match usable {
            Some(h) => {
                let base = self.model(h.slope);
                if base > 0.0 {
                    h.t * self.model(self.s) / base
                } else {
                    self.model(self.s)
                }
            }
            None => self.model(self.s),
        };
        let mut probe_t = guess.clamp(lo.t + 1e-6 * self.upper, self.upper);

        // Expand upward until the slope overshoots.
        let mut prev_lo: Option<(f64, f64)> = None;
        let mut hi = loop {
            let p = self.evaluate(probe_t, lo.field.as_ref())?;
            if p.f >= 0.0 {
                break p;
            }
            if probe_t >= self.upper {
                return Err(Error::Bracket { s: self.s, upper: self.upper });
            }
            let last = (lo.t, lo.f);
            lo = p;
            let (pt, pf) = prev_lo.unwrap_or(last);
            prev_lo = Some((lo.t, lo.f));
            let secant = if lo.f > pf && lo.t > pt { -lo.f * (lo.t - pt) / (lo.f - pf) } else { lo.t };
            let step = (1.2 * secant).clamp(0.05 * lo.t.max(1e-3), 2.0 * lo.t + 0.1);
            probe_t = (lo.t + step).min(self.upper);
        };
        if hi.f == 0.0 {
            return Ok(self.finish(hi));
        }

        // Illinois iteration on the bracket [lo, hi].
        let (mut flo, mut fhi) = (lo.f, hi.f);
        let mut side = 0i8;
        while hi.t - lo.t > self.opts.t_tol {
            let mut t = (flo * hi.t - fhi * lo.t) / (flo - fhi);
            if !(t > lo.t && t < hi.t) {
                t = 0.5 * (lo.t + hi.t);
            }
            let seed = if t - lo.t <= hi.t - t { lo.field.as_ref() } else { hi.field.as_ref() };
            let p = self.evaluate(t, seed)?;
            if p.f == 0.0 {
                return Ok(self.finish(p));
            }
            if p.f < 0.0 {
                flo = p.f;
                lo = p;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            } else {
                fhi = p.f;
                hi = p;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            }
        }
        let best = if lo.field.is_some() && lo.f.abs() <= hi.f.abs() { lo } else { hi };
        Ok(self.finish(best))
    }

    fn finish(&self, p: Probe) -> OuterValue {
        OuterValue {
            t: p.t,
            slope: slope_from_flux(p.flux),
            flux: p.flux,
            evaluations: self.evaluations,
            field: p.field.expect("accepted probes carry a solved field"),
        }
    }
}

/// `u(R) ≈ c + a R^(2-n)` fitted over the truncation radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub a: f64,
    /// Free exponent `p` in `c + a R^p`, when three or more radii are available
    /// and the heights are not constant.
    pub exponent: Option<f64>,
    /// Root-mean-square misfit of the two-parameter model.
    pub residual: f64,
}

/// Least-squares fit of `t_i ≈ c + a R_i^(2-n)` to `(R_i, t_i)` samples.
pub fn asymptotic_constant(samples: &[(f64, f64)], n: usize, threshold: f64) -> Result<DecayFit> {
    crate::catenoid::check_dimension(n)?;
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("decay fit needs at least two radii".into()));
    }
    if samples.iter().any(|(r, t)| !(*r > 0.0) || !r.is_finite() || !t.is_finite()) {
        return Err(Error::InvalidArgument("decay fit needs positive radii and finite heights".into()));
    }
    let p = 2.0 - n as f64;
    let flat = samples.iter().all(|(_, t)| *t == samples[0].1);
    if flat {
        return Ok(DecayFit { c: samples[0].1, a: 0.0, exponent: None, residual: 0.0 });
    }
    let (c, a, residual) = linear_fit(samples, p);
    let exponent = (samples.len() >= 3).then(|| free_exponent(samples)).flatten();
    if residual > threshold {
        return Err(Error::FitResidual { residual, threshold });
    }
    Ok(DecayFit { c, a, exponent, residual })
}

/// `(c, a, rms)` of the least-squares line `t = c + a R^p`.
fn linear_fit(samples: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(r, _)| r.powf(p)).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = samples.iter().map(|(_, t)| t).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(samples).map(|(x, (_, t))| (x - mx) * (t - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c = my - a * mx;
    let rms = (xs.iter().zip(samples).map(|(x, (_, t))| (c + a * x - t).powi(2)).sum::<f64>() / k).sqrt();
    (c, a, rms)
}

/// Exponent minimizing the misfit of `c + a R^p`: a scan over `[-8, -0.05]`
/// followed by golden-section refinement.
fn free_exponent(samples: &[(f64, f64)]) -> Option<f64> {
    let misfit = |p: f64| linear_fit(samples, p).2;
    let (lo, hi, steps) = (-8.0, -0.05, 796);
    let dp = (hi - lo) / steps as f64;
    let mut best = (lo, misfit(lo));
    for i in 1..=steps {
        let p = lo + i as f64 * dp;
        let m = misfit(p);
        if m < best.1 {
            best = (p, m);
        }
    }
    let (mut a, mut b) = ((best.0 - dp).max(lo), (best.0 + dp).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (misfit(x1), misfit(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = misfit(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = misfit(x2);
        }
    }
    let p = 0.5 * (a + b);
    (p > lo + dp && p < hi - dp).then_some(p)
}

/// Least-squares slope of `ln g` against `ln R`; `None` unless every `g > 0`.
pub fn log_log_slope(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 || samples.iter().any(|(r, g)| !(*r > 0.0) || !(*g > 0.0)) {
        return None;
    }
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, g)| g.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Per-radius outcome of a leaf computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRecord {
    pub r_out: f64,
    pub t: f64,
    pub slope: f64,
    pub flux: f64,
    pub interior_gradient: f64,
    pub outer_gradient: f64,
    pub evaluations: usize,
    pub newton: Option<SolveStats>,
}

#[derive(Debug, Clone)]
pub struct Leaf {
    pub s: f64,
    pub records: Vec<RadiusRecord>,
    pub fit: DecayFit,
    /// Decay exponent of the outer gradient maximum over the radii.
    pub gradient_exponent: Option<f64>,
    /// Solution on the largest truncated domain.
    pub field: DiscreteField,
}

impl Leaf {
    /// Gauss-map angle at the boundary in degrees.
    pub fn gamma(&self) -> f64 {
        self.s.atan().to_degrees()
    }

    pub fn c(&self) -> f64 {
        self.fit.c
    }
}

/// Leaves `u_s` over an increasing slope grid, all sharing one grid per radius.
#[derive(Debug, Clone)]
pub struct FoliationFamily {
    domain: ExteriorDomain,
    options: ContinuationOptions,
    radii: GeometryRadii,
    grids: Vec<Arc<Grid>>,
    leaves: Vec<Leaf>,
}

impl FoliationFamily {
    pub fn domain(&self) -> &ExteriorDomain {
        &self.domain
    }

    pub fn options(&self) -> &ContinuationOptions {
        &self.options
    }

    pub fn radii(&self) -> GeometryRadii {
        self.radii
    }

    /// Truncation radii in increasing order.
    pub fn r_outs(&self) -> Vec<f64> {
        self.grids.iter().map(|g| g.r_out()).collect()
    }

    pub fn grids(&self) -> &[Arc<Grid>] {
        &self.grids
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.leaves.iter().map(|l| l.s).collect()
    }

    pub fn c_values(&self) -> Vec<f64> {
        self.leaves.iter().map(Leaf::c).collect()
    }

    /// Leaf with the largest slope.
    pub fn top_leaf(&self) -> Option<&Leaf> {
        self.leaves.last()
    }

    pub fn summary(&self) -> FamilySummary {
        let sigma = sigma_closed_form(self.domain.dimension()).unwrap_or(f64::NAN);
        FamilySummary {
            schema_version: SCHEMA_VERSION,
            domain: self.domain.spec(),
            options: self.options.clone(),
            radii: self.radii,
            sigma,
            r_out: self.r_outs(),
            leaves: self
                .leaves
                .iter()
                .map(|l| LeafSummary {
                    s: l.s,
                    gamma: l.gamma(),
                    c: l.fit.c,
                    a: l.fit.a,
                    exponent: l.fit.exponent,
                    gradient_exponent: l.gradient_exponent,
                    fit_residual: l.fit.residual,
                    t: l.records.iter().map(|r| r.t).collect(),
                    records: l.records.clone(),
                })
                .collect(),
        }
    }
}

/// Serializable family description without nodal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySummary {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub options: ContinuationOptions,
    pub radii: GeometryRadii,
    pub sigma: f64,
    pub r_out: Vec<f64>,
    pub leaves: Vec<LeafSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafSummary {
    pub s: f64,
    /// `atan(s)` in degrees.
    pub gamma: f64,
    pub c: f64,
    pub a: f64,
    pub exponent: Option<f64>,
    pub gradient_exponent: Option<f64>,
    pub fit_residual: f64,
    /// Outer value at each truncation radius.
    pub t: Vec<f64>,
    pub records: Vec<RadiusRecord>,
}

fn check_slope_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::InvalidArgument("slope grid is empty".into()));
    }
    if s_grid.iter().any(|s| !s.is_finite()) || s_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("slope grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Builds one grid per truncation radius.
pub fn family_grids(domain: &ExteriorDomain, opts: &ContinuationOptions) -> Result<Vec<Arc<Grid>>> {
    opts.validate()?;
    let varrho = crate::geometry::circumradius(domain)?;
    opts.radii.iter().map(|f| Grid::new(domain, f * varrho, &opts.grid)).collect()
}

/// Outer-value searches for positive slopes `abs_s` (increasing) on every grid.
/// Returns `[radius][slope]`.
fn slope_chains(grids: &[Arc<Grid>], abs_s: &[f64], opts: &ContinuationOptions) -> Result<Vec<Vec<OuterValue>>> {
    let annotate = |s: f64| move |e: Error| Error::Leaf { s, source: Box::new(e) };
    if opts.warm_start {
        grids
            .par_iter()
            .map(|g| {
                let mut out: Vec<OuterValue> = Vec::with_capacity(abs_s.len());
                for &s in abs_s {
                    let v = maximal_outer_value_on(g, s, out.last(), opts).map_err(annotate(s))?;
                    out.push(v);
                }
                Ok(out)
            })
            .collect()
    } else {
        grids
            .par_iter()
            .map(|g| abs_s.par_iter().map(|&s| maximal_outer_value_on(g, s, None, opts).map_err(annotate(s))).collect())
            .collect()
    }
}

fn build_leaf(s: f64, values: &[&OuterValue], n: usize, threshold: f64) -> Result<Leaf> {
    let annotate = |e: Error| Error::Leaf { s, source: Box::new(e) };
    let mut records = Vec::with_capacity(values.len());
    for v in values {
        records.push(RadiusRecord {
            r_out: v.field.grid().r_out(),
            t: v.t,
            slope: v.slope,
            flux: v.flux,
            interior_gradient: interior_gradient_max(&v.field).map_err(annotate)?,
            outer_gradient: outer_gradient_max(&v.field).map_err(annotate)?,
            evaluations: v.evaluations,
            newton: v.field.stats(),
        });
    }
    let fit = asymptotic_constant(&records.iter().map(|r| (r.r_out, r.t)).collect::<Vec<_>>(), n, threshold)
        .map_err(annotate)?;
    let gradient_exponent = log_log_slope(&records.iter().map(|r| (r.r_out, r.outer_gradient)).collect::<Vec<_>>());
    let field = values.last().expect("at least two radii").field.clone();
    Ok(Leaf { s, records, fit, gradient_exponent, field })
}

/// Solves every leaf of `s_grid` (strictly increasing) on the radii schedule.
///
/// Positive and negative slopes run as separate sweeps in order of
/// increasing `|s|`; a negative leaf is the negation of the sweep for `|s|`,
/// so reflecting the slope grid reflects the family exactly.
pub fn solve_family(domain: &ExteriorDomain, s_grid: &[f64], opts: &ContinuationOptions) -> Result<FoliationFamily> {
    check_slope_grid(s_grid)?;
    let grids = family_grids(domain, opts)?;
    solve_family_on(domain, &grids, s_grid, opts)
}

/// As [`solve_family`] on prebuilt grids from [`family_grids`].
pub fn solve_family_on(
    domain: &ExteriorDomain,
    grids: &[Arc<Grid>],
    s_grid: &[f64],
    opts: &ContinuationOptions,
) -> Result<FoliationFamily> {
    check_slope_grid(s_grid)?;
    opts.validate()?;
    if grids.len() < 2 || grids.iter().any(|g| g.domain() != domain) {
        return Err(Error::GridMismatch);
    }
    let n = domain.dimension();
    let varrho = grids[0].circumradius();
    let rho = interior_sphere_radius(domain)?.min(varrho);
    let positive: Vec<f64> = s_grid.iter().copied().filter(|s| *s > 0.0).collect();
    let negative: Vec<f64> = s_grid.iter().rev().filter(|s| **s < 0.0).map(|s| -s).collect();
    let pos = slope_chains(grids, &positive, opts)?;
    let neg = slope_chains(grids, &negative, opts)?;

    let zeros: Vec<OuterValue> = grids.iter().map(OuterValue::zero).collect();
    let mut leaves = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let leaf = if s == 0.0 {
            build_leaf(s, &zeros.iter().collect::<Vec<_>>(), n, opts.fit_threshold)?
        } else if s > 0.0 {
            let j = positive.iter().position(|x| *x == s).expect("positive slope present");
            build_leaf(s, &pos.iter().map(|chain| &chain[j]).collect::<Vec<_>>(), n, opts.fit_threshold)?
        } else {
            let j = negative.iter().position(|x| *x == -s).expect("negative slope present");
            let mirrored: Vec<OuterValue> = neg.iter().map(|chain| chain[j].negated()).collect();
            build_leaf(s, &mirrored.iter().collect::<Vec<_>>(), n, opts.fit_threshold)?
        };
        leaves.push(leaf);
    }

    for w in leaves.windows(2) {
        if !(w[1].c() > w[0].c()) {
            return Err(Error::FamilyNotIncreasing { s_lo: w[0].s, s_hi: w[1].s, c_lo: w[0].c(), c_hi: w[1].c() });
        }
    }
    Ok(FoliationFamily {
        domain: domain.clone(),
        options: opts.clone(),
        radii: GeometryRadii { rho, varrho },
        grids: grids.to_vec(),
        leaves,
    })
}

/// Computes a single leaf on the family's grids, warm-started from the
/// family leaf with the nearest smaller slope.
pub fn solve_leaf(family: &FoliationFamily, s: f64) -> Result<Leaf> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("leaf slope must be positive, got {s}")));
    }
    let opts = &family.options;
    let n = family.domain.dimension();
    let below = family.leaves.iter().filter(|l| l.s > 0.0 && l.s < s).last();
    let values: Vec<OuterValue> = family
        .grids
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            // Only the largest-radius field is kept per leaf; smaller radii
            // restart from the harmonic guess with the recorded outer value as bracket.
            let start = below.and_then(|l| {
                (i + 1 == family.grids.len()).then(|| OuterValue {
                    t: l.records[i].t,
                    slope: l.records[i].slope,
                    flux: l.records[i].flux,
                    evaluations: 0,
                    field: l.field.clone(),
                })
            });
            maximal_outer_value_on(g, s, start.as_ref(), opts)
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::Leaf { s, source: Box::new(e) })?;
    build_leaf(s, &values.iter().collect::<Vec<_>>(), n, opts.fit_threshold)
}

/// Outcome of [`height_to_slope`].
#[derive(Debug, Clone)]
pub struct HeightTarget {
    pub target: f64,
    pub s: f64,
    /// Limit of the leaf actually computed at `s`.
    pub c: f64,
    pub leaf_solves: usize,
    pub leaf: Option<Leaf>,
}

/// Tolerance on `|c(s) - target|` accepted by [`height_to_slope`].
pub const HEIGHT_TOL: f64 = 2e-5;

/// Slope `s_c` of the leaf whose limit is `c`, for `0 <= c < sigma_n rho`.
///
/// A monotone cubic through the family's `(c, s)` pairs gives the first
/// guess; regula falsi on direct leaf solves refines it.
pub fn height_to_slope(family: &FoliationFamily, c: f64) -> Result<HeightTarget> {
    let n = family.domain.dimension();
    let upper = sigma_closed_form(n)? * family.radii.rho;
    if !(c >= 0.0) || !(c < upper) {
        return Err(Error::HeightOutOfRange { c, upper });
    }
    if c == 0.0 {
        return Ok(HeightTarget { target: c, s: 0.0, c: 0.0, leaf_solves: 0, leaf: None });
    }
    let mut nodes: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    nodes.extend(family.leaves.iter().filter(|l| l.s > 0.0).map(|l| (l.c(), l.s)));
    // Bracket in s from the family: (s, c(s) - target).
    let mut lo = (0.0, -c, None::<Leaf>);
    let mut hi: Option<(f64, f64, Option<Leaf>)> = None;
    for l in family.leaves.iter().filter(|l| l.s > 0.0) {
        let g = l.c() - c;
        if g.abs() < HEIGHT_TOL {
            return Ok(HeightTarget { target: c, s: l.s, c: l.c(), leaf_solves: 0, leaf: Some(l.clone()) });
        }
        if g < 0.0 {
            lo = (l.s, g, None);
        } else if hi.is_none() {
            hi = Some((l.s, g, None));
        }
    }
    let solves = std::cell::Cell::new(0usize);
    let eval = |s: f64| -> Result<(f64, f64, Option<Leaf>)> {
        solves.set(solves.get() + 1);
        let leaf = solve_leaf(family, s)?;
        Ok((s, leaf.c() - c, Some(leaf)))
    };
    let mut guess = if nodes.len() >= 2 && c <= nodes.last().expect("nonempty").0 {
        pchip(&nodes, c)
    } else {
        let top = nodes.last().expect("nonempty").1.max(1.0);
        2.0 * top
    };
    let mut hi = match hi {
        Some(h) => h,
        None => loop {
            let p = eval(guess)?;
            if p.1.abs() < HEIGHT_TOL {
                return Ok(HeightTarget { target: c, s: p.0, c: p.1 + c, leaf_solves: solves.get(), leaf: p.2 });
            }
            if p.1 > 0.0 {
                break p;
            }
            lo = p;
            guess *= 2.0;
            if guess > 1e8 {
                return Err(Error::HeightOutOfRange { c, upper });
            }
        },
    };
    if nodes.len() >= 2 && c <= nodes.last().expect("nonempty").0 {
        let g = pchip(&nodes, c);
        if g > lo.0 && g < hi.0 {
            guess = g;
        } else {
            guess = 0.5 * (lo.0 + hi.0);
        }
    } else {
        guess = 0.5 * (lo.0 + hi.0);
    }
    let mut side = 0i8;
    let (mut glo, mut ghi) = (lo.1, hi.1);
    for _ in 0..60 {
        let p = eval(guess)?;
        if p.1.abs() < HEIGHT_TOL {
            return Ok(HeightTarget { target: c, s: p.0, c: p.1 + c, leaf_solves: solves.get(), leaf: p.2 });
        }
        if p.1 < 0.0 {
            glo = p.1;
            lo = p;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            ghi = p.1;
            hi = p;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
        guess = (glo * hi.0 - ghi * lo.0) / (glo - ghi);
        if !(guess > lo.0 && guess < hi.0) {
            guess = 0.5 * (lo.0 + hi.0);
        }
    }
    Err(Error::HeightOutOfRange { c, upper })
}

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolation at `x` through
/// points with strictly increasing abscissae.
pub fn pchip(points: &[(f64, f64)], x: f64) -> f64 {
    let k = points.len();
    assert!(k >= 2, "pchip needs two points");
    let h: Vec<f64> = points.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let delta: Vec<f64> = points.windows(2).zip(&h).map(|(w, hi)| (w[1].1 - w[0].1) / hi).collect();
    let mut d = vec![0.0; k];
    if k == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        for i in 1..k - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let v = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if v * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && v.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                v
            }
        };
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[k - 1] = end(h[k - 2], h[k - 3], delta[k - 2], delta[k - 3]);
    }
    let i = points.partition_point(|p| p.0 <= x).clamp(1, k - 1) - 1;
    let t = (x - points[i].0) / h[i];
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * points[i].1
        + (t3 - 2.0 * t2 + t) * h[i] * d[i]
        + (-2.0 * t3 + 3.0 * t2) * points[i + 1].1
        + (t3 - t2) * h[i] * d[i + 1]
}

/// Perron subsolution `f`: zero on `B_a`, `max{0, v_a(|x|) - (v_a(∞) - c)}` outside,
/// with `|x|` measured from the center of the smallest enclosing ball.
#[derive(Debug, Clone)]
pub struct PerronBarrier {
    c: f64,
    a: f64,
    drop: f64,
    center: Vec<f64>,
    axial_offset: f64,
    table: CatenoidTable,
}

impl PerronBarrier {
    /// Requires `B_a` to contain the obstacle and `sigma_n a > c`.
    pub fn new(domain: &ExteriorDomain, c: f64, a: f64) -> Result<Self> {
        let ball = crate::geometry::enclosing_ball(domain)?;
        let n = domain.dimension();
        let sigma = sigma_closed_form(n)?;
        if !c.is_finite() || !(a >= ball.radius * (1.0 - 1e-12)) || !(sigma * a > c) || !a.is_finite() {
            return Err(Error::BarrierRadius { a, c });
        }
        Ok(Self {
            c,
            a,
            drop: sigma * a - c,
            center: ball.center,
            axial_offset: ball.axial_offset,
            table: CatenoidTable::new(a, n, 64.0 * a)?,
        })
    }

    pub fn radius(&self) -> f64 {
        self.a
    }

    pub fn limit(&self) -> f64 {
        self.c
    }

    /// Value at distance `r` from the enclosing-ball center.
    pub fn at_radius(&self, r: f64) -> f64 {
        if r <= self.a {
            return 0.0;
        }
        match self.table.height(r) {
            Some(v) => (v - self.drop).max(0.0),
            None => 0.0,
        }
    }

    /// Value at a point of `R^n`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x.len() != self.center.len() {
            return f64::NAN;
        }
        let r = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.at_radius(r)
    }

    /// Value at meridian coordinates `(zeta, y)` of the domain frame.
    pub fn at_meridian(&self, m: [f64; 2]) -> f64 {
        self.at_radius((m[0] - self.axial_offset).hypot(m[1]))
    }
}

/// Functional-form constructor matching the operation name.
pub fn barrier_subsolution(domain: &ExteriorDomain, c: f64, a: f64) -> Result<PerronBarrier> {
    PerronBarrier::new(domain, c, a)
}

/// Smallest admissible Perron radius for a truncated leaf: at least the
/// circumradius, `sigma_n a > c`, and `f <= t` on the outer sphere.
pub fn perron_radius(domain: &ExteriorDomain, c: f64, r_out: f64, t: f64) -> Result<f64> {
    let n = domain.dimension();
    let sigma = sigma_closed_form(n)?;
    let varrho = crate::geometry::circumradius(domain)?;
    let mut a = varrho.max(c / sigma * (1.0 + 1e-9));
    let f_out = |a: f64| -> Result<f64> {
        if r_out <= a {
            return Ok(0.0);
        }
        Ok(c - crate::catenoid::limit_height(a, r_out, n)?)
    };
    if f_out(a)? <= t {
        return Ok(a);
    }
    // a * I(R/a, ∞) increases with a, so f(R) decreases; bisect up to R.
    let (mut lo, mut hi) = (a, r_out);
    if f_out(hi)? > t {
        return Err(Error::BarrierRadius { a: hi, c });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_out(mid)? <= t {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    a = hi;
    Ok(a)
}

/// Upper barrier from catenoids `v_rho` around the centers of the interior
/// tangent balls, each raised just enough to dominate the outer value `t`:
/// `U(x) = min_q v_rho(|x - q|) + max(0, t - v_rho(R - |q - o|))`, `o` the
/// center of the outer sphere of radius `R`.
#[derive(Debug, Clone)]
pub struct TangentCatenoidBarrier {
    /// Meridian centers `(zeta, y)` and their vertical shifts.
    centers: Vec<([f64; 2], f64)>,
    table: CatenoidTable,
}

impl TangentCatenoidBarrier {
    pub fn new(domain: &ExteriorDomain, rho: f64, outer_center: [f64; 2], r_out: f64, t: f64) -> Result<Self> {
        let n = domain.dimension();
        if !(rho > 0.0) || !(r_out > 0.0) {
            return Err(Error::InvalidArgument("barrier radii must be positive".into()));
        }
        let mut qs: Vec<[f64; 2]> = domain
            .section_boundary(2048)
            .into_iter()
            .filter(|(p, _)| p[1] >= 0.0)
            .map(|(p, nrm)| [p[0] - rho * nrm[0], (p[1] - rho * nrm[1]).max(0.0)])
            .collect();
        qs.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
        qs.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        let far = qs.iter().map(|q| (q[0] - outer_center[0]).hypot(q[1])).fold(0.0, f64::max);
        let table = CatenoidTable::new(rho, n, r_out + far + rho)?;
        let mut centers = Vec::with_capacity(qs.len());
        for q in qs {
            let nearest = r_out - (q[0] - outer_center[0]).hypot(q[1] - outer_center[1]);
            let v = table.height(nearest).ok_or(Error::BarrierRadius { a: rho, c: t })?;
            centers.push((q, (t - v).max(0.0)));
        }
        Ok(Self { centers, table })
    }

    /// Value at meridian coordinates `(zeta, y)`.
    pub fn at_meridian(&self, m: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for (q, shift) in &self.centers {
            let r = (m[0] - q[0]).hypot(m[1] - q[1]);
            if let Some(v) = self.table.height(r) {
                best = best.min(v + shift);
            }
        }
        best
    }
}
