use exterior_foliation::catenoid::sigma_closed_form;
use exterior_foliation::continuation::{
    asymptotic_constant, barrier_subsolution, height_to_slope, maximal_outer_value, solve_family, ContinuationOptions,
    HEIGHT_TOL,
};
use exterior_foliation::geometry::ExteriorDomain;
use exterior_foliation::radial::{radial_solution, radial_tk};
use exterior_foliation::solver::{GridMode, GridSpec};
use exterior_foliation::verify::barrier_violation;
use exterior_foliation::Error;

fn ball() -> ExteriorDomain {
    ExteriorDomain::ball(3, 1.0).unwrap()
}

fn radial_opts(h: f64) -> ContinuationOptions {
    ContinuationOptions { grid: GridSpec::graded(GridMode::Radial1d, h, 1.05, 0.05), ..Default::default() }
}

fn tan_deg(g: f64) -> f64 {
    g.to_radians().tan()
}

fn tens() -> Vec<f64> {
    (1..=8).map(|k| tan_deg(10.0 * k as f64)).collect()
}

#[test]
fn outer_value_vanishes_with_slope() {
    let opts = radial_opts(1e-3);
    assert_eq!(maximal_outer_value(&ball(), 8.0, 0.0, &opts).unwrap().t, 0.0);
    let tiny = maximal_outer_value(&ball(), 8.0, 1e-4, &opts).unwrap().t;
    assert!(tiny > 0.0 && tiny < 1e-3, "{tiny}");
}

#[test]
fn outer_value_matches_radial_oracle() {
    let exact = radial_tk(1.0, 8.0, 1.0, 3).unwrap();
    let one = maximal_outer_value(&ball(), 8.0, 1.0, &radial_opts(1e-3)).unwrap();
    assert!((one.t - exact).abs() < 1e-3, "{} vs {exact}", one.t);
    let mut opts = ContinuationOptions::default();
    opts.grid.h = 1.0 / 16.0;
    let two = maximal_outer_value(&ball(), 8.0, 1.0, &opts).unwrap();
    assert!((two.t - exact).abs() < 1e-2, "{} vs {exact}", two.t);
    assert!((one.slope - 1.0).abs() < 1e-6);
}

#[test]
fn outer_value_is_odd_in_slope() {
    let opts = radial_opts(1e-3);
    let up = maximal_outer_value(&ball(), 4.0, 0.7, &opts).unwrap();
    let down = maximal_outer_value(&ball(), 4.0, -0.7, &opts).unwrap();
    assert_eq!(up.t, -down.t);
    assert!(up.field.values().iter().zip(down.field.values()).all(|(a, b)| *a == -*b));
}

#[test]
fn outer_value_increases_with_truncation_radius() {
    let opts = radial_opts(1e-3);
    let t: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|&r| maximal_outer_value(&ball(), r, 1.0, &opts).unwrap().t).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]), "{t:?}");
}

#[test]
fn decay_fit_examples() {
    let flat = asymptotic_constant(&[(4.0, 0.3), (8.0, 0.3), (16.0, 0.3)], 3, 1e-3).unwrap();
    assert_eq!((flat.c, flat.a, flat.exponent), (0.3, 0.0, None));

    let (c, a) = (1.2, -0.7);
    let exact: Vec<(f64, f64)> = [4.0, 8.0].iter().map(|&r| (r, c + a / r)).collect();
    let fit = asymptotic_constant(&exact, 3, 1e-3).unwrap();
    assert!((fit.c - c).abs() < 1e-14 && (fit.a - a).abs() < 1e-13);

    assert!(asymptotic_constant(&[(4.0, 0.3)], 3, 1e-3).is_err());
    let noisy = [(4.0, 0.0), (8.0, 1.0), (16.0, 0.0)];
    assert!(matches!(asymptotic_constant(&noisy, 3, 1e-3), Err(Error::FitResidual { .. })));
}

#[test]
fn zero_family_is_trivial() {
    let fam = solve_family(&ball(), &[0.0], &radial_opts(1e-2)).unwrap();
    assert_eq!(fam.leaves().len(), 1);
    assert_eq!(fam.c_values(), vec![0.0]);
    assert!(fam.leaves()[0].field.values().iter().all(|v| *v == 0.0));
}

#[test]
fn ball_family_matches_exact_limits() {
    let s = tens();
    let fam = solve_family(&ball(), &s, &radial_opts(1e-3)).unwrap();
    let c = fam.c_values();
    assert!(c.windows(2).all(|w| w[1] > w[0]));
    for (si, ci) in s.iter().zip(&c) {
        let exact = radial_solution(1.0, *si, 3).unwrap().c;
        assert!((ci - exact).abs() < 1e-2, "s = {si}: {ci} vs {exact}");
    }
    let sigma = sigma_closed_form(3).unwrap();
    assert!(c.iter().all(|v| v.abs() <= sigma * fam.radii().varrho));
    for leaf in fam.leaves() {
        let e = leaf.fit.exponent.expect("three radii");
        assert!((e + 1.0).abs() < 0.1, "s = {}: exponent {e}", leaf.s);
        let g = leaf.gradient_exponent.expect("positive gradients");
        assert!((g + 2.0).abs() < 0.3, "s = {}: gradient exponent {g}", leaf.s);
    }
}

#[test]
fn reflected_slope_grid_negates_family() {
    let s = vec![0.3, 1.0, 2.0];
    let neg: Vec<f64> = s.iter().rev().map(|v| -v).collect();
    let opts = radial_opts(1e-3);
    let up = solve_family(&ball(), &s, &opts).unwrap();
    let down = solve_family(&ball(), &neg, &opts).unwrap();
    for (a, b) in up.leaves().iter().zip(down.leaves().iter().rev()) {
        assert_eq!(a.c(), -b.c());
        assert!(a.field.values().iter().zip(b.field.values()).all(|(x, y)| *x == -*y));
    }
}

#[test]
fn family_rejects_bad_slope_grids() {
    let opts = radial_opts(1e-2);
    assert!(solve_family(&ball(), &[], &opts).is_err());
    assert!(solve_family(&ball(), &[1.0, 0.5], &opts).is_err());
    assert!(solve_family(&ball(), &[1.0, f64::NAN], &opts).is_err());
}

#[test]
fn height_to_slope_round_trip_on_ball() {
    let fam = solve_family(&ball(), &tens(), &radial_opts(1e-3)).unwrap();
    let zero = height_to_slope(&fam, 0.0).unwrap();
    assert_eq!((zero.s, zero.c), (0.0, 0.0));
    let sigma = sigma_closed_form(3).unwrap();
    for f in [0.25, 0.5, 0.75, 0.9] {
        let target = f * sigma;
        let hit = height_to_slope(&fam, target).unwrap();
        assert!((hit.c - target).abs() < HEIGHT_TOL.max(1e-4), "{f}: {}", hit.c);
        // the radial oracle agrees on the slope up to the discretization error
        let exact = radial_solution(1.0, hit.s, 3).unwrap().c;
        assert!((exact - target).abs() < 5e-3, "{f}: exact c(s_c) = {exact}");
    }
    assert!(matches!(height_to_slope(&fam, sigma), Err(Error::HeightOutOfRange { .. })));
    assert!(height_to_slope(&fam, -0.1).is_err());
}

#[test]
fn perron_barrier_limits() {
    let d = ExteriorDomain::prolate_spheroid(3, 2.0, 1.0).unwrap();
    let f = barrier_subsolution(&d, 0.8, 2.0).unwrap();
    assert_eq!(f.eval(&[0.5, 0.5, 0.0]), 0.0);
    assert_eq!(f.eval(&[0.0, 1.99, 0.0]), 0.0);
    assert!((f.at_radius(1e4 * 60.0).min(f.limit()) - 0.8).abs() < 1e-3);
    // monotone in the radius
    let v: Vec<f64> = (0..40).map(|i| f.at_radius(2.0 + 0.5 * i as f64)).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0]));
    // sigma a must exceed c and B_a must contain the obstacle
    assert!(barrier_subsolution(&d, 3.0, 2.0).is_err());
    assert!(barrier_subsolution(&d, 0.1, 1.0).is_err());
}

#[test]
fn ball_leaf_lies_between_barriers() {
    let fam = solve_family(&ball(), &[0.5, 1.0, 3.0], &radial_opts(1e-3)).unwrap();
    for leaf in fam.leaves() {
        let v = barrier_violation(&leaf.field, &ball(), 1.0, leaf.c()).unwrap();
        assert!(v <= 1e-6, "s = {}: {v}", leaf.s);
    }
}
