//! Executable checks over a computed family: node-wise ordering, the
//! `sigma_n rho <= c <= sigma_n varrho` bounds, gradient maximum principles,
//! decay at infinity, odd symmetry and the barrier sandwich.
//!
//! Discretization tolerances come from a [`Calibration`]: the same continuation
//! run on the balls of radius `rho` and `varrho`, where every quantity is known exactly.

use serde::{Deserialize, Serialize};

use crate::catenoid::{limit_height, neck_for_slope, sigma_closed_form};
use crate::continuation::{
    perron_radius, solve_family, solve_family_on, ContinuationOptions, FamilySummary, FoliationFamily, Leaf,
    PerronBarrier, TangentCatenoidBarrier,
};
use crate::error::{Error, Result};
use crate::geometry::{ExteriorDomain, GeometryRadii};
use crate::solver::{boundary_gradient_max, interior_gradient_max, DiscreteField};
use crate::SCHEMA_VERSION;

/// Tolerance for the odd-symmetry comparison.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Outer gradient bound on the largest truncation sphere.
pub const OUTER_GRADIENT_MAX: f64 = 0.05;
/// Relative half-width of the decay exponent window around `2 - n`.
pub const EXPONENT_WINDOW: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One named check. `margin` is positive exactly when the check passes
/// (zero for a non-strict pass at the threshold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(with = "finite")]
    pub measured: f64,
    #[serde(with = "finite")]
    pub threshold: f64,
    #[serde(with = "finite")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes iff `measured <= threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let margin = threshold - measured;
        Self::build(name, measured, threshold, margin, margin >= 0.0)
    }

    /// Passes iff `measured < threshold`.
    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let margin = threshold - measured;
        Self::build(name, measured, threshold, margin, margin > 0.0)
    }

    /// Passes iff `measured >= threshold`.
    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let margin = measured - threshold;
        Self::build(name, measured, threshold, margin, margin >= 0.0)
    }

    /// Passes iff `measured > threshold`.
    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let margin = measured - threshold;
        Self::build(name, measured, threshold, margin, margin > 0.0)
    }

    fn build(name: impl Into<String>, measured: f64, threshold: f64, margin: f64, ok: bool) -> Self {
        // NaN comparisons are false, so a NaN measurement fails.
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, measured, threshold, margin, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Non-finite floats are written as the strings `"inf"`, `"-inf"` and `"nan"`.
mod finite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(Check::passed) { Status::Pass } else { Status::Fail };
        Self { schema_version: SCHEMA_VERSION, status, calibration: None, checks }
    }

    pub fn with_calibration(mut self, cal: Calibration) -> Self {
        self.calibration = Some(cal);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Discretization tolerances measured on ball benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Grid spacing the tolerances belong to.
    pub h: f64,
    /// Slope of the benchmark leaves.
    pub s_max: f64,
    /// `|c_max - sigma_n rho|` on the ball of radius `rho`.
    pub eps_lower: f64,
    /// `|c_max - sigma_n varrho|` on the ball of radius `varrho`.
    pub eps_upper: f64,
    /// Largest excess of the interior over the boundary gradient on the
    /// benchmarks, relative to `max(1, s)`, and at least `h`.
    pub gradient_rel: f64,
}

impl Calibration {
    /// The reported discretization tolerance `eps_h`.
    pub fn eps_h(&self) -> f64 {
        self.eps_lower.max(self.eps_upper)
    }

    /// Allowed `interior - boundary` gradient excess for slope `s`.
    pub fn gradient_tol(&self, s: f64) -> f64 {
        self.gradient_rel * s.abs().max(1.0)
    }

    /// Allowed `|boundary gradient - s|`.
    pub fn slope_tol(&self, s: f64) -> f64 {
        self.h * s.abs().max(1.0)
    }

    /// Allowed barrier violation, `h^2`.
    pub fn barrier_tol(&self) -> f64 {
        self.h * self.h
    }
}

/// Solves the top leaf `s_max` on the balls of radius `rho` and `varrho`
/// with the family's own options and measures the error in `c`.
pub fn calibrate(n: usize, radii: GeometryRadii, s_max: f64, opts: &ContinuationOptions) -> Result<Calibration> {
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::InvalidArgument(format!("calibration slope must be positive, got {s_max}")));
    }
    let sigma = sigma_closed_form(n)?;
    let mut cache: Vec<(f64, f64, f64)> = Vec::with_capacity(2);
    let mut bench = |r: f64| -> Result<(f64, f64)> {
        if let Some(&(_, e, g)) = cache.iter().find(|(rr, _, _)| (rr - r).abs() <= 1e-9 * r) {
            return Ok((e, g));
        }
        let ball = ExteriorDomain::ball(n, r)?;
        let family = solve_family(&ball, &[s_max], opts)?;
        let leaf = family.top_leaf().expect("one leaf");
        let err = (leaf.c() - sigma * r).abs();
        let excess = leaf
            .records
            .iter()
            .map(|rec| (rec.interior_gradient - rec.slope) / rec.slope.max(1.0))
            .fold(0.0f64, f64::max);
        cache.push((r, err, excess));
        Ok((err, excess))
    };
    let (eps_lower, g_lo) = bench(radii.rho)?;
    let (eps_upper, g_hi) = bench(radii.varrho)?;
    let h = opts.grid.h;
    Ok(Calibration { h, s_max, eps_lower, eps_upper, gradient_rel: g_lo.max(g_hi).max(h) })
}

/// Node-wise ordering of consecutive fields.
pub fn foliation_gap(fields: &[&DiscreteField]) -> Result<Check> {
    if fields.len() < 2 {
        return Ok(Check::at_least("foliation", 0.0, 0.0).with_note("insufficient leaves"));
    }
    let mut gap = f64::INFINITY;
    for w in fields.windows(2) {
        if !w[0].grid().same_layout(w[1].grid()) {
            return Err(Error::GridMismatch);
        }
        let g = w[0].values().iter().zip(w[1].values()).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
        gap = gap.min(g).min(w[1].outer_value() - w[0].outer_value());
    }
    Ok(Check::above("foliation", gap, 0.0))
}

/// Strict node-wise increase of consecutive leaves (on the largest truncation).
pub fn check_foliation(family: &FoliationFamily) -> Result<Check> {
    foliation_gap(&family.leaves().iter().map(|l| &l.field).collect::<Vec<_>>())
}

/// Result of [`check_bounds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub c_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub eps_lower: f64,
    pub eps_upper: f64,
    /// `c_max` within `2 eps_lower` of `sigma_n rho`.
    pub near_lower: bool,
    /// `c_max` within `2 eps_upper` of `sigma_n varrho`.
    pub near_upper: bool,
}

impl BoundsCheck {
    pub fn checks(&self) -> Vec<Check> {
        let note = |near: bool| near.then_some("near equality: the obstacle is indistinguishable from a ball");
        let mut lo = Check::at_least("bounds.lower", self.c_max, self.lower - self.eps_lower);
        let mut hi = Check::at_most("bounds.upper", self.c_max, self.upper + self.eps_upper);
        if let Some(n) = note(self.near_lower) {
            lo = lo.with_note(n);
        }
        if let Some(n) = note(self.near_upper) {
            hi = hi.with_note(n);
        }
        vec![lo, hi]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(Check::passed)
    }

    pub fn near_equality(&self) -> bool {
        self.near_lower || self.near_upper
    }
}

/// `sigma_n rho - eps <= c_max <= sigma_n varrho + eps` with near-equality detection.
pub fn bounds_for(c_max: f64, n: usize, radii: GeometryRadii, cal: &Calibration) -> Result<BoundsCheck> {
    let sigma = sigma_closed_form(n)?;
    let (lower, upper) = (sigma * radii.rho, sigma * radii.varrho);
    Ok(BoundsCheck {
        c_max,
        lower,
        upper,
        eps_lower: cal.eps_lower,
        eps_upper: cal.eps_upper,
        near_lower: (c_max - lower).abs() <= 2.0 * cal.eps_lower,
        near_upper: (upper - c_max).abs() <= 2.0 * cal.eps_upper,
    })
}

/// Bounds on the limit of the largest-slope leaf.
pub fn check_bounds(family: &FoliationFamily, radii: GeometryRadii, cal: &Calibration) -> Result<BoundsCheck> {
    let top = family.top_leaf().ok_or_else(|| Error::InvalidArgument("family has no leaves".into()))?;
    bounds_for(top.c(), family.domain().dimension(), radii, cal)
}

fn gradient_pair(excess: f64, slope_err: f64, s: f64, cal: &Calibration) -> Vec<Check> {
    vec![
        Check::at_most("gradient.interior", excess, cal.gradient_tol(s)),
        Check::below("gradient.boundary", slope_err, cal.slope_tol(s)),
    ]
}

/// Gradient maximum principle on one field with boundary slope `s`.
pub fn gradient_checks(field: &DiscreteField, s: f64, cal: &Calibration) -> Result<Vec<Check>> {
    let boundary = boundary_gradient_max(field)?;
    let interior = interior_gradient_max(field)?;
    Ok(gradient_pair(interior - boundary, (boundary - s.abs()).abs(), s, cal))
}

/// Interior gradient max below the boundary gradient max, which equals `|s|`,
/// on every truncation of the leaf.
pub fn check_gradient_principles(leaf: &Leaf, cal: &Calibration) -> Result<Vec<Check>> {
    let boundary = boundary_gradient_max(&leaf.field)?;
    let mut excess = interior_gradient_max(&leaf.field)? - boundary;
    let mut slope_err = (boundary - leaf.s.abs()).abs();
    for rec in &leaf.records {
        excess = excess.max(rec.interior_gradient - rec.slope);
        slope_err = slope_err.max((rec.slope - leaf.s.abs()).abs());
    }
    Ok(gradient_pair(excess, slope_err, leaf.s, cal))
}

/// Decay window for the fitted exponent of `u(R) = c + a R^p` and the
/// outer gradient bound.
pub fn decay_checks(exponent: Option<f64>, a: f64, outer_gradient: f64, n: usize) -> Vec<Check> {
    let p = 2.0 - n as f64;
    let half = EXPONENT_WINDOW * p.abs();
    let exp_check = match exponent {
        Some(e) => Check::at_most("decay.exponent", (e - p).abs(), half),
        None if a == 0.0 => Check::at_most("decay.exponent", 0.0, half).with_note("constant heights, a = 0"),
        None => Check::at_most("decay.exponent", f64::INFINITY, half).with_note("exponent not identifiable"),
    };
    vec![exp_check, Check::below("decay.outer_gradient", outer_gradient, OUTER_GRADIENT_MAX)]
}

/// Height decay exponent in `(2 - n)(1 +- 0.1)` and outer gradient on the
/// largest truncation sphere below `0.05`.
pub fn check_decay(leaf: &Leaf, n: usize) -> Vec<Check> {
    let outer = leaf.records.last().map_or(0.0, |r| r.outer_gradient);
    decay_checks(leaf.fit.exponent, leaf.fit.a, outer, n)
}

/// Largest deviation between two families' leaves, the second taken negated.
/// Leaves are matched by `s_b = -s_a`; layouts must agree.
pub fn negation_gap(a: &FoliationFamily, b: &FoliationFamily) -> Check {
    let mut gap = 0.0f64;
    let mut note = None;
    if a.leaves().len() != b.leaves().len() {
        gap = f64::INFINITY;
        note = Some("leaf counts differ");
    }
    for la in a.leaves() {
        let Some(lb) = b.leaves().iter().find(|l| l.s == -la.s) else {
            gap = f64::INFINITY;
            note = Some("missing mirrored leaf");
            continue;
        };
        if !la.field.grid().same_layout(lb.field.grid()) {
            gap = f64::INFINITY;
            note = Some("grids differ");
            continue;
        }
        for (x, y) in la.field.values().iter().zip(lb.field.values()) {
            gap = gap.max((x + y).abs());
        }
        gap = gap.max((la.field.outer_value() + lb.field.outer_value()).abs());
        for (ra, rb) in la.records.iter().zip(&lb.records) {
            gap = gap.max((ra.t + rb.t).abs());
        }
        gap = gap.max((la.c() + lb.c()).abs());
    }
    let check = Check::at_most("symmetry", gap, SYMMETRY_TOL);
    match note {
        Some(n) => check.with_note(n),
        None => check,
    }
}

/// Re-solves the family at `-s` on the same grids and compares with the
/// negated leaves.
pub fn check_symmetry(family: &FoliationFamily) -> Result<Check> {
    let reflected: Vec<f64> = family.s_values().iter().rev().map(|s| -s).collect();
    let mirror = solve_family_on(family.domain(), family.grids(), &reflected, family.options())?;
    Ok(negation_gap(family, &mirror))
}

/// Largest violation of `f <= u <= U` at the nodes, for barriers built from
/// the leaf's limit `c` and outer value `t` (both taken for `|s|`).
pub fn barrier_violation(field: &DiscreteField, domain: &ExteriorDomain, rho: f64, c: f64) -> Result<f64> {
    let grid = field.grid();
    let sign = if c < 0.0 || field.outer_value() < 0.0 { -1.0 } else { 1.0 };
    let (c, t) = (sign * c, sign * field.outer_value());
    let a = perron_radius(domain, c.max(0.0), grid.r_out(), t)?;
    let lower = PerronBarrier::new(domain, c.max(0.0), a)?;
    let upper = TangentCatenoidBarrier::new(domain, rho, grid.outer_center(), grid.r_out(), t)?;
    let mut worst = 0.0f64;
    for (p, u) in grid.node_points().iter().zip(field.values()) {
        let m = grid.meridian(p);
        let u = sign * u;
        worst = worst.max(lower.at_meridian(m) - u).max(u - upper.at_meridian(m));
    }
    Ok(worst)
}

/// Perron subsolution below and tangent-catenoid barrier above, node-wise
/// within `h^2`.
pub fn check_barriers(leaf: &Leaf, domain: &ExteriorDomain, radii: GeometryRadii, cal: &Calibration) -> Result<Check> {
    let v = barrier_violation(&leaf.field, domain, radii.rho, leaf.c())?;
    Ok(Check::at_most("barriers", v, cal.barrier_tol()))
}

/// Every check on a computed family. Per-leaf checks report the worst leaf.
pub fn verify_family(family: &FoliationFamily, radii: GeometryRadii, cal: &Calibration) -> Result<VerificationReport> {
    let n = family.domain().dimension();
    let mut checks = vec![check_foliation(family)?];
    checks.extend(check_bounds(family, radii, cal)?.checks());
    let mut per_leaf: Vec<Check> = Vec::new();
    for leaf in family.leaves() {
        let mut leaf_checks = check_gradient_principles(leaf, cal)?;
        leaf_checks.extend(check_decay(leaf, n));
        leaf_checks.push(check_barriers(leaf, family.domain(), radii, cal)?);
        for c in leaf_checks {
            let c = c.clone().with_note(format!("worst leaf s = {}", leaf.s));
            match per_leaf.iter_mut().find(|e| e.name == c.name) {
                Some(e) if e.margin.is_nan() || (c.margin < e.margin) => *e = c,
                Some(_) => {}
                None => per_leaf.push(c),
            }
        }
    }
    checks.extend(per_leaf);
    checks.push(check_symmetry(family)?);
    Ok(VerificationReport::new(checks).with_calibration(*cal))
}

/// Checks available from a family summary alone: ordering of limits and
/// outer values, bounds, gradient records, decay and mirrored leaves.
pub fn verify_summary(summary: &FamilySummary, cal: &Calibration) -> Result<VerificationReport> {
    let n = summary.domain.n;
    let leaves = &summary.leaves;
    let mut checks = Vec::new();
    if leaves.is_empty() {
        return Err(Error::InvalidArgument("family summary has no leaves".into()));
    }
    if leaves.iter().any(|l| l.t.len() != summary.r_out.len() || l.records.len() != summary.r_out.len()) {
        return Err(Error::InvalidArgument("leaf records do not match the truncation radii".into()));
    }
    let slope_gap = leaves.windows(2).map(|w| w[1].s - w[0].s).fold(f64::INFINITY, f64::min);
    checks.push(Check::above("summary.slopes_increasing", slope_gap, 0.0));
    if leaves.len() < 2 {
        checks.push(Check::at_least("summary.foliation", 0.0, 0.0).with_note("insufficient leaves"));
    } else {
        let mut gap = leaves.windows(2).map(|w| w[1].c - w[0].c).fold(f64::INFINITY, f64::min);
        for k in 0..summary.r_out.len() {
            gap = leaves.windows(2).map(|w| w[1].t[k] - w[0].t[k]).fold(gap, f64::min);
        }
        checks.push(Check::above("summary.foliation", gap, 0.0));
    }
    let top = leaves.last().expect("nonempty");
    checks.extend(bounds_for(top.c, n, summary.radii, cal)?.checks());

    let mut interior = Check::at_most("summary.gradient.interior", f64::NEG_INFINITY, 0.0);
    let mut boundary = Check::below("summary.gradient.boundary", 0.0, cal.slope_tol(0.0));
    let mut exponent = Check::at_most("summary.decay.exponent", 0.0, EXPONENT_WINDOW);
    let mut outer = Check::below("summary.decay.outer_gradient", 0.0, OUTER_GRADIENT_MAX);
    for l in leaves {
        for r in &l.records {
            let c = Check::at_most("summary.gradient.interior", r.interior_gradient - r.slope, cal.gradient_tol(l.s));
            if c.margin < interior.margin || c.margin.is_nan() {
                interior = c;
            }
            let c = Check::below("summary.gradient.boundary", (r.slope - l.s.abs()).abs(), cal.slope_tol(l.s));
            if c.margin < boundary.margin || c.margin.is_nan() {
                boundary = c;
            }
        }
        let outer_grad = l.records.last().map_or(0.0, |r| r.outer_gradient);
        let [e, o] = <[Check; 2]>::try_from(decay_checks(l.exponent, l.a, outer_grad, n)).expect("two checks");
        if e.margin < exponent.margin || e.margin.is_nan() {
            exponent = Check { name: "summary.decay.exponent".into(), ..e };
        }
        if o.margin < outer.margin || o.margin.is_nan() {
            outer = Check { name: "summary.decay.outer_gradient".into(), ..o };
        }
    }
    if interior.measured == f64::NEG_INFINITY {
        interior = Check::at_most("summary.gradient.interior", 0.0, 0.0);
    }
    checks.extend([interior, boundary, exponent, outer]);

    let mut sym = 0.0f64;
    let mut pairs = 0usize;
    for l in leaves.iter().filter(|l| l.s < 0.0) {
        if let Some(m) = leaves.iter().find(|m| m.s == -l.s) {
            pairs += 1;
            sym = sym.max((l.c + m.c).abs());
            for (a, b) in l.t.iter().zip(&m.t) {
                sym = sym.max((a + b).abs());
            }
        } else {
            sym = f64::INFINITY;
        }
    }
    let sym_check = Check::at_most("summary.symmetry", sym, SYMMETRY_TOL);
    checks.push(if pairs == 0 && sym == 0.0 { sym_check.with_note("no mirrored leaves") } else { sym_check });
    Ok(VerificationReport::new(checks).with_calibration(*cal))
}

/// Exact limit `c_s` of the leaf with slope `s` over the ball of radius `r`.
pub fn ball_limit(n: usize, r: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let lambda = neck_for_slope(r, s.abs(), n)?;
    Ok(s.signum() * limit_height(lambda, r, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_follow_comparison() {
        assert!(Check::at_most("x", 1.0, 1.0).passed());
        assert!(!Check::below("x", 1.0, 1.0).passed());
        assert!(!Check::above("x", 0.0, 0.0).passed());
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed());
        assert_eq!(Check::at_least("x", 3.0, 1.0).margin, 2.0);
    }

    #[test]
    fn report_status_is_conjunction() {
        let r = VerificationReport::new(vec![Check::at_most("a", 0.0, 1.0), Check::at_most("b", 2.0, 1.0)]);
        assert!(!r.passed());
        assert!(VerificationReport::new(vec![Check::at_most("a", 0.0, 1.0)]).passed());
    }

    #[test]
    fn non_finite_values_round_trip() {
        let c = Check::at_most("x", f64::INFINITY, 1.0);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"inf\""));
        let back: Check = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
