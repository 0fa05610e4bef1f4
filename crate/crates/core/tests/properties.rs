use std::sync::Arc;

use exterior_foliation::catenoid::{limit_height, neck_for_slope, sigma_closed_form, CatenoidParams};
use exterior_foliation::continuation::pchip;
use exterior_foliation::geometry::{geometry_radii, ExteriorDomain};
use exterior_foliation::radial::{radial_solution, radial_tk};
use exterior_foliation::solver::{integrated_residual, newton_solve, DiscreteField, Grid, GridMode, GridSpec, NewtonOptions};
use proptest::prelude::*;

fn domain_strategy() -> impl Strategy<Value = ExteriorDomain> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|r| ExteriorDomain::ball(3, r).unwrap()),
        (1.0f64..3.0, 0.3f64..1.0).prop_map(|(a, f)| ExteriorDomain::prolate_spheroid(3, a, a * f).unwrap()),
        (0.5f64..1.5, 0.5f64..1.5, 0.2f64..1.0)
            .prop_map(|(r1, r2, f)| ExteriorDomain::two_ball_union(3, r1, r2, f * (r1 + r2)).unwrap()),
    ]
}

fn point_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 3)
}

fn radial_grid(h: f64) -> Arc<Grid> {
    let ball = ExteriorDomain::ball(3, 1.0).unwrap();
    Grid::new(&ball, 8.0, &GridSpec::uniform(GridMode::Radial1d, h)).unwrap()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_one_lipschitz(d in domain_strategy(), x in point_strategy(), y in point_strategy()) {
        let gap = (d.signed_distance(&x) - d.signed_distance(&y)).abs();
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(gap <= dist + 1e-9, "gap {gap} > {dist}");
    }

    #[test]
    fn distance_grows_at_infinity(d in domain_strategy(), dir in point_strategy()) {
        prop_assume!(dir.iter().any(|v| v.abs() > 1e-3));
        let u = unit(&dir);
        let far: Vec<f64> = u.iter().map(|v| 1e3 * v).collect();
        prop_assert!(d.signed_distance(&far) > 990.0);
        prop_assert!(d.signed_distance(d.center()) < 0.0);
    }

    #[test]
    fn catenoid_homothety(lambda in 0.1f64..3.0, ratio in 1.0f64..20.0, k in 0.2f64..5.0, n in 3usize..7) {
        let r = lambda * ratio;
        let a = CatenoidParams::centered(lambda, n).unwrap().height(r).unwrap();
        let b = CatenoidParams::centered(lambda / k, n).unwrap().height(r / k).unwrap();
        prop_assert!((a - k * b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn catenoid_monotone_in_radius(lambda in 0.1f64..3.0, n in 3usize..7) {
        let cat = CatenoidParams::centered(lambda, n).unwrap();
        let rs: Vec<f64> = (1..40).map(|i| lambda * (1.0 + 0.25 * i as f64)).collect();
        let h: Vec<f64> = rs.iter().map(|&r| cat.height(r).unwrap()).collect();
        let s: Vec<f64> = rs.iter().map(|&r| cat.slope(r).unwrap()).collect();
        prop_assert!(h.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(s.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn limits_increase_and_stay_below_sigma_r(r in 0.2f64..4.0, n in 3usize..6) {
        let sigma = sigma_closed_form(n).unwrap();
        let c: Vec<f64> = [0.05, 0.2, 1.0, 3.0, 20.0, 300.0]
            .iter()
            .map(|&s| limit_height(neck_for_slope(r, s, n).unwrap(), r, n).unwrap())
            .collect();
        prop_assert!(c.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(c.iter().all(|&v| v < sigma * r));
    }

    #[test]
    fn radial_leaf_is_odd(r in 0.2f64..4.0, s in 0.01f64..50.0) {
        let p = radial_solution(r, s, 3).unwrap();
        let q = radial_solution(r, -s, 3).unwrap();
        prop_assert_eq!(q.c, -p.c);
        for (a, b) in p.samples.iter().zip(&q.samples) {
            prop_assert_eq!(a.u, -b.u);
        }
    }

    #[test]
    fn radial_tk_monotone(k1 in 1.1f64..10.0, dk in 0.1f64..10.0, s1 in 0.05f64..10.0, ds in 0.05f64..10.0) {
        prop_assert!(radial_tk(1.0, k1 + dk, s1, 3).unwrap() > radial_tk(1.0, k1, s1, 3).unwrap());
        prop_assert!(radial_tk(1.0, k1, s1 + ds, 3).unwrap() > radial_tk(1.0, k1, s1, 3).unwrap());
    }

    #[test]
    fn pchip_preserves_monotone_data(steps in prop::collection::vec((0.01f64..2.0, 0.0f64..2.0), 2..10), x in 0.0f64..1.0) {
        let mut pts = vec![(0.0, 0.0)];
        for (dx, dy) in steps {
            let (px, py) = *pts.last().unwrap();
            pts.push((px + dx, py + dy));
        }
        let xmax = pts.last().unwrap().0;
        let a = pchip(&pts, x * xmax);
        let b = pchip(&pts, (x * xmax + 1e-3).min(xmax));
        prop_assert!(b >= a - 1e-12);
        prop_assert!(a >= -1e-12 && a <= pts.last().unwrap().1 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn radii_invariant_under_rigid_motion(
        a in 1.0f64..3.0,
        f in 0.3f64..1.0,
        axis in point_strategy(),
        center in point_strategy(),
    ) {
        prop_assume!(axis.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let d = ExteriorDomain::prolate_spheroid(3, a, a * f).unwrap();
        let moved = d.with_frame(center, axis).unwrap();
        let (r0, r1) = (geometry_radii(&d).unwrap(), geometry_radii(&moved).unwrap());
        prop_assert!((r0.rho - r1.rho).abs() < 1e-9);
        prop_assert!((r0.varrho - r1.varrho).abs() < 1e-9);
        prop_assert!(r0.rho <= r0.varrho);
    }

    #[test]
    fn radii_scale_with_domain(d in domain_strategy()) {
        let r = geometry_radii(&d).unwrap();
        let r2 = geometry_radii(&d.scaled(2.0).unwrap()).unwrap();
        prop_assert!((r2.rho - 2.0 * r.rho).abs() < 1e-9 * r.rho.max(1.0) + 1e-7 * r.rho);
        prop_assert!((r2.varrho - 2.0 * r.varrho).abs() < 1e-9 * r.varrho.max(1.0));
    }

    #[test]
    fn newton_solve_is_odd(t in 0.05f64..1.2) {
        let grid = radial_grid(1.0 / 32.0);
        let opts = NewtonOptions::default();
        let up = newton_solve(&grid, t, None, &opts).unwrap();
        let down = newton_solve(&grid, -t, None, &opts).unwrap();
        for (a, b) in up.values().iter().zip(down.values()) {
            prop_assert!((a + b).abs() <= 1e-12);
        }
    }

    #[test]
    fn discrete_comparison(t1 in 0.0f64..1.2, dt in 0.01f64..0.3) {
        let grid = radial_grid(1.0 / 32.0);
        let opts = NewtonOptions::default();
        let lo = newton_solve(&grid, t1, None, &opts).unwrap();
        let hi = newton_solve(&grid, t1 + dt, None, &opts).unwrap();
        prop_assert!(lo.values().iter().zip(hi.values()).all(|(a, b)| a < b));
    }

    #[test]
    fn radial_face_flux_is_conserved(t in 0.05f64..1.2) {
        let grid = radial_grid(1.0 / 32.0);
        let u = newton_solve(&grid, t, None, &NewtonOptions::default()).unwrap();
        let mut r = vec![1.0];
        r.extend(grid.node_points().iter().map(|p| p.rho));
        r.push(8.0);
        let mut v = vec![0.0];
        v.extend_from_slice(u.values());
        v.push(t);
        let flux: Vec<f64> = (0..r.len() - 1)
            .map(|j| {
                let q = (v[j + 1] - v[j]) / (r[j + 1] - r[j]);
                let rf = 0.5 * (r[j] + r[j + 1]);
                rf * rf * q / (1.0 + q * q).sqrt()
            })
            .collect();
        let f0 = flux[0];
        prop_assert!(flux.iter().all(|f| (f - f0).abs() < 1e-9), "spread {:?}", flux.iter().map(|f| f - f0).fold(0.0, |a: f64, b| a.max(b.abs())));
        let g = integrated_residual(&grid, u.values(), t);
        prop_assert!(g.iter().all(|x| x.abs() < 1e-9));
    }
}

#[test]
fn constants_solve_exactly() {
    // A constant field is a solution only with matching boundary data; the
    // interior stencil of a constant sees zero flux everywhere.
    let grid = radial_grid(1.0 / 16.0);
    let zero = DiscreteField::zeros(&grid);
    assert!(integrated_residual(&grid, zero.values(), 0.0).iter().all(|g| *g == 0.0));
}
