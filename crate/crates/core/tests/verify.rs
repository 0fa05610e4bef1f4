use std::sync::OnceLock;

use exterior_foliation::catenoid::sigma_closed_form;
use exterior_foliation::continuation::{asymptotic_constant, solve_family, ContinuationOptions, FoliationFamily};
use exterior_foliation::geometry::{geometry_radii, ExteriorDomain, GeometryRadii};
use exterior_foliation::solver::{DiscreteField, GridMode, GridSpec};
use exterior_foliation::verify::{
    barrier_violation, bounds_for, calibrate, check_barriers, check_bounds, check_decay, check_foliation,
    check_gradient_principles, check_symmetry, decay_checks, foliation_gap, gradient_checks, negation_gap,
    verify_family, verify_summary, Calibration, Status, VerificationReport,
};
use exterior_foliation::Error;

fn ball() -> ExteriorDomain {
    ExteriorDomain::ball(3, 1.0).unwrap()
}

fn opts(h: f64) -> ContinuationOptions {
    ContinuationOptions { grid: GridSpec::graded(GridMode::Radial1d, h, 1.05, 0.05), ..Default::default() }
}

fn slopes() -> Vec<f64> {
    [10.0, 30.0, 50.0, 70.0, 80.0, 89.0].iter().map(|g: &f64| g.to_radians().tan()).collect()
}

fn radii() -> GeometryRadii {
    geometry_radii(&ball()).unwrap()
}

/// Ball family and its calibration at the same resolution, shared by the tests.
fn fixture() -> &'static (FoliationFamily, Calibration) {
    static CELL: OnceLock<(FoliationFamily, Calibration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let o = opts(1e-3);
        let s = slopes();
        let fam = solve_family(&ball(), &s, &o).unwrap();
        let cal = calibrate(3, radii(), *s.last().unwrap(), &o).unwrap();
        (fam, cal)
    })
}

#[test]
fn ball_family_passes_every_check() {
    let (fam, cal) = fixture();
    let report = verify_family(fam, radii(), cal).unwrap();
    for c in &report.checks {
        assert!(c.passed(), "{c:?}");
    }
    assert_eq!(report.status, Status::Pass);
    assert!(report.check("foliation").unwrap().measured > 0.0);
}

#[test]
fn ball_bounds_are_near_equalities() {
    let (fam, cal) = fixture();
    let b = check_bounds(fam, radii(), cal).unwrap();
    assert!(b.passed());
    assert!(b.near_lower && b.near_upper);
    let sigma = sigma_closed_form(3).unwrap();
    assert!((b.c_max - sigma).abs() / sigma < 0.02);
}

#[test]
fn bounds_fail_above_sigma_varrho() {
    let (_, cal) = fixture();
    let r = GeometryRadii { rho: 0.5, varrho: 2.0 };
    let sigma = sigma_closed_form(3).unwrap();
    let b = bounds_for(sigma * 2.0 + 1.0, 3, r, cal).unwrap();
    assert!(!b.passed());
    assert!(!b.checks()[1].passed());
    let inside = bounds_for(sigma * 1.2, 3, r, cal).unwrap();
    assert!(inside.passed() && !inside.near_equality());
}

#[test]
fn duplicated_leaf_has_zero_gap() {
    let (fam, _) = fixture();
    let f = &fam.leaves()[2].field;
    let check = foliation_gap(&[f, f]).unwrap();
    assert_eq!(check.measured, 0.0);
    assert!(!check.passed());
    assert!(check_foliation(fam).unwrap().passed());
}

#[test]
fn single_leaf_is_vacuous() {
    let (fam, _) = fixture();
    let check = foliation_gap(&[&fam.leaves()[0].field]).unwrap();
    assert!(check.passed());
    assert_eq!(check.note.as_deref(), Some("insufficient leaves"));
}

#[test]
fn foliation_needs_one_layout() {
    let (fam, _) = fixture();
    let other = solve_family(&ball(), &[0.5], &opts(2e-3)).unwrap();
    let res = foliation_gap(&[&fam.leaves()[0].field, &other.leaves()[0].field]);
    assert!(matches!(res, Err(Error::GridMismatch)));
}

#[test]
fn gradient_checks_catch_a_bump() {
    let (fam, cal) = fixture();
    let leaf = &fam.leaves()[2];
    assert!(check_gradient_principles(leaf, cal).unwrap().iter().all(|c| c.passed()));

    let grid = leaf.field.grid();
    let pts = grid.node_points();
    let bumped: Vec<f64> = pts
        .iter()
        .zip(leaf.field.values())
        .map(|(p, v)| v + 0.5 * (-((p.rho - 3.0) / 0.05).powi(2)).exp())
        .collect();
    let bad = DiscreteField::from_values(grid, bumped, leaf.field.outer_value()).unwrap();
    let checks = gradient_checks(&bad, leaf.s, cal).unwrap();
    assert!(!checks[0].passed(), "{:?}", checks[0]);
}

#[test]
fn zero_leaf_passes_gradient_and_barrier_checks() {
    let fam = solve_family(&ball(), &[0.0], &opts(1e-2)).unwrap();
    let (_, cal) = fixture();
    let leaf = &fam.leaves()[0];
    assert!(check_gradient_principles(leaf, cal).unwrap().iter().all(|c| c.passed()));
    assert_eq!(barrier_violation(&leaf.field, &ball(), 1.0, 0.0).unwrap(), 0.0);
    assert!(check_decay(leaf, 3).iter().all(|c| c.passed()));
}

#[test]
fn decay_window() {
    let (fam, _) = fixture();
    for leaf in fam.leaves() {
        assert!(check_decay(leaf, 3).iter().all(|c| c.passed()), "s = {}", leaf.s);
    }
    // u = c + a r^-2 decays too fast for n = 3
    let samples: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&r| (r, 1.0 - 3.0 / (r * r))).collect();
    let fit = asymptotic_constant(&samples, 3, 1.0).unwrap();
    let checks = decay_checks(fit.exponent, fit.a, 0.01, 3);
    assert!(!checks[0].passed(), "{:?}", checks[0]);
    let flat = asymptotic_constant(&[(4.0, 0.2), (8.0, 0.2), (16.0, 0.2)], 3, 1e-3).unwrap();
    let checks = decay_checks(flat.exponent, flat.a, 0.0, 3);
    assert!(checks.iter().all(|c| c.passed()));
    assert!(!decay_checks(Some(-1.0), 1.0, 0.2, 3)[1].passed());
}

#[test]
fn symmetry_check() {
    let (fam, _) = fixture();
    let c = check_symmetry(fam).unwrap();
    assert!(c.passed() && c.measured <= 1e-12, "{c:?}");

    let zero = solve_family(&ball(), &[0.0], &opts(1e-2)).unwrap();
    assert_eq!(check_symmetry(&zero).unwrap().measured, 0.0);

    // negation recomputed on a perturbed grid
    let s = fam.s_values();
    let reflected: Vec<f64> = s.iter().rev().map(|v| -v).collect();
    let other = solve_family(&ball(), &reflected, &opts(1.1e-3)).unwrap();
    let c = negation_gap(fam, &other);
    assert!(!c.passed());
}

#[test]
fn barrier_check_catches_a_shift() {
    let (fam, cal) = fixture();
    let leaf = &fam.leaves()[3];
    assert!(check_barriers(leaf, &ball(), radii(), cal).unwrap().passed());
    let lifted: Vec<f64> = leaf.field.values().iter().map(|v| v + 1.0).collect();
    let bad = DiscreteField::from_values(leaf.field.grid(), lifted, leaf.field.outer_value()).unwrap();
    let v = barrier_violation(&bad, &ball(), 1.0, leaf.c()).unwrap();
    assert!(v > cal.barrier_tol(), "{v}");
}

#[test]
fn reports_are_deterministic() {
    let (fam, cal) = fixture();
    let a = serde_json::to_string(&verify_family(fam, radii(), cal).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_family(fam, radii(), cal).unwrap()).unwrap();
    assert_eq!(a, b);
    let back: VerificationReport = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), a);
}

#[test]
fn summary_verification_agrees() {
    let (fam, cal) = fixture();
    let summary = fam.summary();
    let json = serde_json::to_string(&summary).unwrap();
    let back = serde_json::from_str(&json).unwrap();
    let report = verify_summary(&back, cal).unwrap();
    assert!(report.passed(), "{:?}", report.checks.iter().filter(|c| !c.passed()).collect::<Vec<_>>());

    let mut broken = summary.clone();
    broken.leaves[3].c = broken.leaves[2].c;
    assert!(!verify_summary(&broken, cal).unwrap().passed());
}

#[test]
fn tolerances_stable_under_refinement() {
    // halving h must not turn a passing ball check into a failing one
    let s = [1.0f64, 80f64.to_radians().tan()];
    for h in [2e-3, 1e-3] {
        let o = opts(h);
        let fam = solve_family(&ball(), &s, &o).unwrap();
        let cal = calibrate(3, radii(), s[1], &o).unwrap();
        let report = verify_family(&fam, radii(), &cal).unwrap();
        assert!(report.passed(), "h = {h}: {:?}", report.checks.iter().filter(|c| !c.passed()).collect::<Vec<_>>());
    }
}
