//! Closed-form and quadrature values checked against frozen high-precision
//! references (computed independently at 30 digits).

use exterior_foliation::catenoid::{
    catenoid_height, catenoid_slope, limit_height, neck_for_slope, profile_integral, sigma, sigma_closed_form,
    sigma_quadrature, CatenoidParams,
};
use exterior_foliation::geometry::{circumradius, geometry_radii, interior_sphere_radius, ExteriorDomain};
use exterior_foliation::quadrature::{integrate, QuadratureOptions};
use exterior_foliation::radial::{radial_solution, radial_tk, radial_value};
use exterior_foliation::Error;

const SIGMA_3: f64 = 1.31102877714605990523;
const SIGMA_4: f64 = 0.701091052662727130588;
const SIGMA_5: f64 = 0.481975824075188664564;
const SIGMA_10: f64 = 0.189551103866407259118;

const I_1_2_N3: f64 = 0.807819333968729011;
const I_1_3_N4: f64 = 0.645525965515566525;
const NECK_R1_S1_N3: f64 = 0.840896415253714543;
const TK_1_8_S1_N3: f64 = 0.664701147516846997;

/// Exact limits on the unit ball, n = 3, indexed by the boundary angle in degrees.
const BALL_C: [(f64, f64); 4] = [
    (10.0, 0.174178486495726749),
    (45.0, 0.753090574179369890),
    (80.0, 1.214209872621170907),
    (89.0, 1.302202732129485406),
];

fn tan_deg(g: f64) -> f64 {
    g.to_radians().tan()
}

#[test]
fn sigma_matches_reference() {
    for (n, expected) in [(3, SIGMA_3), (4, SIGMA_4), (5, SIGMA_5), (10, SIGMA_10)] {
        let s = sigma(n).unwrap();
        assert!((s.closed_form - expected).abs() < 1e-13, "n = {n}: {}", s.closed_form);
        assert!((s.quadrature - expected).abs() < 1e-10, "n = {n}: {}", s.quadrature);
        assert!(s.discrepancy() < 1e-10);
    }
}

#[test]
fn sigma_beta_form_for_n3() {
    // Gamma(1/4)^2 / (4 sqrt(2 pi))
    let gamma_quarter = 3.625_609_908_221_908_f64;
    let beta = gamma_quarter * gamma_quarter / (4.0 * (2.0 * std::f64::consts::PI).sqrt());
    assert!((sigma_closed_form(3).unwrap() - beta).abs() < 1e-13);
}

#[test]
fn sigma_decreases_with_dimension() {
    let values: Vec<f64> = (3..12).map(|n| sigma_quadrature(n).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn dimension_two_is_rejected() {
    assert!(matches!(sigma(2), Err(Error::Dimension { n: 2 })));
    assert!(sigma_closed_form(1).is_err());
    assert!(msg_mentions(sigma(2).unwrap_err(), "diverges for n = 2"));
}

fn msg_mentions(e: Error, needle: &str) -> bool {
    e.to_string().contains(needle)
}

#[test]
fn profile_integral_matches_reference() {
    assert!((profile_integral(1.0, 2.0, 3).unwrap() - I_1_2_N3).abs() < 1e-12);
    assert!((profile_integral(1.0, 3.0, 4).unwrap() - I_1_3_N4).abs() < 1e-12);
    assert_eq!(profile_integral(1.5, 1.5, 3).unwrap(), 0.0);
}

#[test]
fn catenoid_height_endpoints() {
    let cat = CatenoidParams::new(0.7, vec![0.0; 3], 3, 0.25).unwrap();
    assert_eq!(cat.height(0.7).unwrap(), 0.25);
    let far = cat.height(1e9).unwrap();
    assert!((far - cat.limit().unwrap()).abs() < 1e-8);
    assert!((cat.limit().unwrap() - (0.25 + SIGMA_3 * 0.7)).abs() < 1e-13);
    let unit = CatenoidParams::centered(1.0, 3).unwrap();
    assert!((catenoid_height(&unit, 2.0).unwrap() - I_1_2_N3).abs() < 1e-10);
    assert!(matches!(unit.height(0.5), Err(Error::InsideNeck { .. })));
}

#[test]
fn catenoid_height_at_uses_center() {
    let cat = CatenoidParams::new(1.0, vec![1.0, 0.0, 0.0], 3, 0.0).unwrap();
    assert!((cat.height_at(&[3.0, 0.0, 0.0]).unwrap() - I_1_2_N3).abs() < 1e-10);
    assert!(cat.height_at(&[3.0, 0.0]).is_err());
}

#[test]
fn catenoid_slope_special_values() {
    for n in 3..7 {
        let cat = CatenoidParams::centered(1.0, n).unwrap();
        let r = 2f64.powf(1.0 / (2.0 * (n - 1) as f64));
        assert!((catenoid_slope(&cat, r).unwrap() - 1.0).abs() < 1e-13, "n = {n}");
        assert!(cat.slope(1e8).unwrap() < 1e-15);
    }
}

#[test]
fn catenoid_slope_matches_central_difference() {
    let cat = CatenoidParams::centered(1.0, 3).unwrap();
    let exact = cat.slope(2.0).unwrap();
    let err = |h: f64| ((cat.height(2.0 + h).unwrap() - cat.height(2.0 - h).unwrap()) / (2.0 * h) - exact).abs();
    let (e1, e2) = (err(1e-2), err(5e-3));
    assert!(e1 < 1e-4);
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn neck_for_slope_reference_values() {
    assert!((neck_for_slope(1.0, 1.0, 3).unwrap() - NECK_R1_S1_N3).abs() < 1e-15);
    assert!((neck_for_slope(1.0, 1e9, 3).unwrap() - 1.0).abs() < 1e-15);
    let s = 1e-6;
    let lam = neck_for_slope(1.0, s, 3).unwrap();
    assert!((lam / s.sqrt() - 1.0).abs() < 0.01);
    // round trip through the slope
    for (r, s, n) in [(1.0, 1.0, 3), (2.5, 0.3, 4), (0.5, 7.0, 5)] {
        let cat = CatenoidParams::centered(neck_for_slope(r, s, n).unwrap(), n).unwrap();
        assert!((cat.slope(r).unwrap() / s - 1.0).abs() < 1e-12);
    }
    assert!(neck_for_slope(1.0, 0.0, 3).is_err());
}

#[test]
fn limit_height_reference_values() {
    assert!((limit_height(1.0, 1.0, 3).unwrap() - SIGMA_3).abs() < 1e-10);
    assert_eq!(limit_height(1.0, f64::INFINITY, 3).unwrap(), 0.0);
    assert!(limit_height(1.0, 1e12, 3).unwrap() < 1e-11);
    let c = limit_height(NECK_R1_S1_N3, 1.0, 3).unwrap();
    assert!((c - BALL_C[1].1).abs() < 1e-10);
}

#[test]
fn ball_limits_match_reference() {
    for (deg, expected) in BALL_C {
        let p = radial_solution(1.0, tan_deg(deg), 3).unwrap();
        assert!((p.c - expected).abs() < 1e-10, "{deg} deg: {}", p.c);
    }
}

#[test]
fn radial_tk_reference_value() {
    assert!((radial_tk(1.0, 8.0, 1.0, 3).unwrap() - TK_1_8_S1_N3).abs() < 1e-10);
    assert_eq!(radial_tk(1.0, 8.0, 0.0, 3).unwrap(), 0.0);
    let c = radial_solution(1.0, 1.0, 3).unwrap().c;
    assert!((radial_tk(1.0, 1e10, 1.0, 3).unwrap() - c).abs() < 1e-9);
}

#[test]
fn radial_tk_increases_in_radius_and_slope() {
    let ks = [1.5, 2.0, 4.0, 8.0, 16.0];
    let ss = [0.1, 0.5, 1.0, 3.0, 50.0];
    for s in ss {
        let t: Vec<f64> = ks.iter().map(|&k| radial_tk(1.0, k, s, 3).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
    for k in ks {
        let t: Vec<f64> = ss.iter().map(|&s| radial_tk(1.0, k, s, 3).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn radial_profile_flux_is_constant() {
    for (s, n) in [(1.0, 3), (5.0, 3), (0.2, 4)] {
        let p = radial_solution(1.0, s, n).unwrap();
        let f = p.fluxes();
        let f0 = f[0];
        assert!(f.iter().all(|v| (v - f0).abs() < 1e-8 * f0.abs().max(1.0)), "s = {s}, n = {n}");
    }
}

#[test]
fn radial_profile_shape() {
    let p = radial_solution(1.0, 2.0, 3).unwrap();
    assert_eq!(p.samples[0].u, 0.0);
    assert_eq!(p.samples[0].slope, 2.0);
    assert!(p.samples.windows(2).all(|w| w[1].u > w[0].u && w[1].slope < w[0].slope));
    assert!(p.samples.last().unwrap().u < p.c);
    let neg = radial_solution(1.0, -2.0, 3).unwrap();
    assert_eq!(neg.c, -p.c);
    for (a, b) in p.samples.iter().zip(&neg.samples) {
        assert_eq!(a.u, -b.u);
        assert_eq!(a.r, b.r);
    }
    assert_eq!(radial_value(1.0, -2.0, 3, 3.0).unwrap(), -radial_value(1.0, 2.0, 3, 3.0).unwrap());
}

#[test]
fn quadrature_handles_sqrt_singularity() {
    let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadratureOptions::default()).unwrap();
    assert!((r.value - 2.0).abs() < 1e-10);
}

#[test]
fn geometry_radii_reference_values() {
    let ball = ExteriorDomain::ball(3, 1.5).unwrap();
    let r = geometry_radii(&ball).unwrap();
    // neighbouring samples lose ~1e-8 to cancellation in the tangent-ball formula
    assert!((r.rho - 1.5).abs() < 1e-7 && (r.varrho - 1.5).abs() < 1e-9);

    let spheroid = ExteriorDomain::prolate_spheroid(3, 2.0, 1.0).unwrap();
    assert!((interior_sphere_radius(&spheroid).unwrap() - 0.5).abs() < 1e-6);
    assert!((circumradius(&spheroid).unwrap() - 2.0).abs() < 1e-9);

    let union = ExteriorDomain::two_ball_union(3, 1.0, 1.0, 1.0).unwrap();
    assert!((circumradius(&union).unwrap() - 1.5).abs() < 1e-9);
    // every boundary point lies on one of the unit spheres
    assert!((interior_sphere_radius(&union).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn boundary_samples_lie_on_boundary() {
    let ball = ExteriorDomain::ball(3, 1.0).unwrap();
    let pts = ball.boundary_sample(100).unwrap();
    assert_eq!(pts.len(), 100);
    assert!(pts.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12));

    let spheroid = ExteriorDomain::prolate_spheroid(3, 2.0, 1.0).unwrap();
    let pts = spheroid.boundary_sample(4).unwrap();
    for tip in [2.0, -2.0] {
        assert!(pts.iter().any(|p| (p[0] - tip).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12));
    }

    let union = ExteriorDomain::two_ball_union(3, 1.0, 1.0, 1.0).unwrap();
    for p in union.boundary_sample(500).unwrap() {
        assert!(union.signed_distance(&p).abs() < 1e-9);
        let d0 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d1 = ((p[0] - 1.0).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
        // never strictly inside the other ball
        assert!(d0 >= 1.0 - 1e-9 && d1 >= 1.0 - 1e-9);
    }
}
