use std::f64::consts::PI;

use gapfield::asym::fit_exponent;
use gapfield::geom::{self, DiskPair, GeomError};
use gapfield::quad::build_rule;
use gapfield::{Complex, Point2};
use proptest::prelude::*;

fn pair(r1: f64, a1: f64, r2: f64, a2: f64, eps: f64) -> DiskPair {
    geom::make_config(r1, a1, r2, a2, eps, 0.0, 1.0).unwrap()
}

fn on_circle(cfg: &DiskPair, j: usize, phi: f64) -> Point2 {
    let d = cfg.disk(j).unwrap();
    d.center + Point2::polar(phi) * d.radius
}

fn r1r2_defect(cfg: &DiskPair, x: Point2, first: usize) -> f64 {
    let second = 3 - first;
    (geom::reflect(cfg, first, geom::reflect(cfg, second, x).unwrap()).unwrap() - x).norm()
}

#[test]
fn centers_and_radii() {
    let c = pair(1.0, 0.0, 1.0, 0.0, 0.1);
    assert!((c.z1 - Point2::new(-1.05, 0.0)).norm() < 1e-15);
    assert!((c.z2 - Point2::new(1.05, 0.0)).norm() < 1e-15);
    let c = pair(1.0, 0.5, 1.0, 0.0, 0.01);
    assert!((c.r1 - 0.1).abs() < 1e-15 && c.r2 == 1.0);
    let c = pair(2.0, -0.5, 1.0, 0.0, 0.01);
    assert!((c.r1 - 20.0).abs() < 1e-12);
}

#[test]
fn invalid_inputs_are_rejected() {
    for args in [
        (0.0, 0.0, 1.0, 0.0, 0.1, 0.0),
        (1.0, 0.0, -1.0, 0.0, 0.1, 0.0),
        (1.0, 0.0, 1.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 1.0, 0.0, 0.1, -1.0),
        (1.0, f64::NAN, 1.0, 0.0, 0.1, 0.0),
    ] {
        let r = geom::make_config(args.0, args.1, args.2, args.3, args.4, args.5, 1.0);
        assert!(matches!(r, Err(GeomError::Invalid { .. })), "{args:?}");
    }
    match geom::make_config(1.0, 0.0, 1.0, 0.0, -0.1, 0.0, 1.0) {
        Err(GeomError::Invalid { field, .. }) => assert_eq!(field, "epsilon"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reflection_examples() {
    let c = pair(1.0, 0.0, 2.0, 0.0, 0.1);
    for j in 1..=2 {
        for k in 0..16 {
            let x = on_circle(&c, j, k as f64 * 0.4);
            assert!((geom::reflect(&c, j, x).unwrap() - x).norm() <= 1e-14 * (1.0 + x.norm()));
        }
    }
    let unit = pair(1.0, 0.0, 1.0, 0.0, 0.1);
    let z1 = unit.z1;
    let x = z1 + Point2::new(2.0, 0.0);
    assert!((geom::reflect(&unit, 1, x).unwrap() - (z1 + Point2::new(0.5, 0.0))).norm() < 1e-15);
    assert!(matches!(geom::reflect(&unit, 1, z1), Err(GeomError::Singular(_))));
    assert!(geom::reflect(&unit, 3, x).is_err());
}

#[test]
fn symmetric_fixed_points_are_opposite() {
    for eps in [1e-1, 1e-3, 1e-6] {
        let fp = geom::fixed_points_closed(&pair(1.3, 0.0, 1.3, 0.0, eps));
        assert_eq!(fp.p1.x1, -fp.p2.x1);
        assert_eq!(fp.p1.x2, 0.0);
        let it = geom::fixed_points_iterated(&pair(1.3, 0.0, 1.3, 0.0, eps), 1e-15).unwrap();
        assert!((it.p1 + it.p2).norm() < 1e-14);
    }
}

#[test]
fn fixed_point_leading_order() {
    let fp = geom::fixed_points_closed(&pair(1.0, 0.0, 1.0, 0.0, 1e-4));
    assert!((fp.p2.x1 - 0.01).abs() < 1e-4, "{}", fp.p2.x1);
}

#[test]
fn iterated_fixed_points_match_closed_form() {
    let mut count = 0;
    for r1 in [0.5, 1.0, 2.0] {
        for r2 in [0.5, 1.0, 2.0] {
            for eps in [1e-1, 1e-3] {
                let c = pair(r1, 0.0, r2, 0.0, eps);
                let a = geom::fixed_points_closed(&c);
                let b = geom::fixed_points_iterated(&c, 1e-15).unwrap();
                assert!((a.p1 - b.p1).norm() <= 1e-12 && (a.p2 - b.p2).norm() <= 1e-12, "{r1} {r2} {eps}");
                assert!(r1r2_defect(&c, a.p1, 1) <= 1e-12 && r1r2_defect(&c, a.p2, 2) <= 1e-12);
                count += 1;
            }
        }
    }
    assert_eq!(count, 18);
}

#[test]
fn tiny_disk_still_converges() {
    let c = pair(1.0, 1.5, 1.0, 0.0, 1e-2);
    let fp = geom::fixed_points_iterated(&c, 1e-15).unwrap();
    assert!(fp.p1.x1 > c.z1.x1 && fp.p1.x1 < -0.5 * c.epsilon && fp.p1.x2 == 0.0);
    assert!(fp.p2.x1 < c.z2.x1 && fp.p2.x1 > 0.5 * c.epsilon && fp.p2.x2 == 0.0);
    assert!((fp.p1 - geom::fixed_points_closed(&c).p1).norm() < 1e-12);
}

#[test]
fn tau_examples() {
    assert_eq!(geom::tau(1.0, 1.0, 0.0), 2.0);
    let c0 = (2.0f64 * 2.0 * 1.0 * 3.0).sqrt();
    let tau = geom::tau_value(&pair(2.0, 0.0, 1.0, 0.0, 1e-10));
    assert!((tau - c0).abs() < 1e-4);

    let c = pair(2.0, 0.0, 1.0, 0.0, 0.1);
    let direct = (2.0f64 * 2.0 * 3.0 + 11.0 * 0.1 + 3.0 * 0.01 + 0.25e-3).sqrt();
    assert!((geom::tau_value(&c) - direct).abs() < 1e-14);
    let fp = geom::fixed_points_closed(&c);
    let dist = 2.0 * 0.1f64.sqrt() * direct / 3.1;
    assert!(((fp.p2 - fp.p1).norm() - dist).abs() < 1e-14);
}

#[test]
fn singular_constants_examples() {
    let c = pair(0.8, 0.0, 0.8, 0.0, 1e-3);
    let k = geom::singular_constants(&c);
    assert!((k.c1 + k.c2).abs() < 1e-15);

    let c = pair(1.0, 0.0, 2.0, 0.0, 0.05);
    let k = geom::singular_constants(&c);
    for j in 1..=2 {
        let want = if j == 1 { k.c1 } else { k.c2 };
        for i in 0..64 {
            let x = on_circle(&c, j, 2.0 * PI * i as f64 / 64.0);
            let (q, _) = geom::q0_eval(&c, x).unwrap();
            assert!((q - want).abs() <= 1e-10, "j={j} i={i}");
        }
    }
}

#[test]
fn constant_gap_scales_like_root_epsilon() {
    // C_1 − C_2 = −(1/π)(r_-/C_0)√ε (1 + o(1))
    let c = pair(1.0, 0.0, 1.0, 0.0, 1e-4);
    let s = geom::scale_params(&c);
    let diff = geom::singular_constants(&c).difference();
    let model = (s.r_minus / s.c0) * c.epsilon.sqrt() / PI;
    assert!(diff < 0.0);
    assert!((diff.abs() / model - 1.0).abs() < 0.02, "{}", diff.abs() / model);
}

#[test]
fn scale_parameter_examples() {
    let s = geom::scale_params(&pair(1.0, 0.0, 2.0, 0.0, 1e-3));
    assert_eq!(s.r_minus, 3.0);
    assert!((s.c0 - (2.0f64 * 2.0 * 3.0).sqrt()).abs() < 1e-14);
    assert_eq!(s.tau_exponent, 0.0);

    let s = geom::scale_params(&pair(1.0, 0.5, 1.0, 0.0, 1e-3));
    assert_eq!((s.alpha_minus, s.alpha_plus, s.r_minus), (0.0, 0.5, 1.0));
    assert!((s.tau_exponent - 0.25).abs() < 1e-15);

    let s = geom::scale_params(&pair(1.0, -0.5, 1.0, -0.5, 1e-3));
    assert_eq!(s.alpha_plus, -0.5);
    assert!((s.tau_exponent + 0.75).abs() < 1e-15);
    let eps = [1e-3, 1e-4, 1e-5];
    let taus: Vec<f64> = eps.iter().map(|&e| geom::tau_value(&pair(1.0, -0.5, 1.0, -0.5, e))).collect();
    let fit = fit_exponent(&eps, &taus).unwrap();
    assert!((fit.slope + 0.75).abs() < 0.01 * 0.75, "{}", fit.slope);
}

#[test]
fn leading_coefficient_is_the_limit_of_the_ratio() {
    for (a1, a2) in [(0.0, 0.0), (0.5, 0.0), (-0.5, -0.5), (1.0, 1.0)] {
        let s = geom::scale_params(&pair(1.0, a1, 1.5, a2, 1e-9));
        assert!((s.c0_at_epsilon / s.c0 - 1.0).abs() < 1e-3, "{a1} {a2}: {} vs {}", s.c0_at_epsilon, s.c0);
    }
}

#[test]
fn q0_examples() {
    let c = pair(1.0, 0.0, 1.0, 0.0, 1e-2);
    let (q, _) = geom::q0_eval(&c, Point2::new(0.0, 0.7)).unwrap();
    assert_eq!(q, 0.0);
    let fp = geom::fixed_points_closed(&c);
    assert!(matches!(geom::q0_eval(&c, fp.p1), Err(GeomError::Singular(_))));
    let (q, _) = geom::q0_eval(&c, Point2::new(1e6, 0.0)).unwrap();
    assert!(q.abs() <= 1e-5 * (fp.p1 - fp.p2).norm());
}

#[test]
fn q0_flux_through_each_circle() {
    // ∮_{∂B_j} ∂_ν q_0 = (−1)^{j+1}: the pole p_1 inside B_1 carries charge +1
    for (r1, r2, eps) in [(1.0, 1.0, 1e-1), (1.0, 2.0, 1e-3), (0.5, 1.0, 1e-4)] {
        let c = pair(r1, 0.0, r2, 0.0, eps);
        let rule = build_rule(&c, 256, 3.0).unwrap();
        for (j, circle) in rule.circles.iter().enumerate() {
            let flux: f64 = (0..circle.n)
                .map(|k| circle.weights[k] * geom::q0_eval(&c, circle.nodes[k]).unwrap().1.dot(circle.normals[k]))
                .sum();
            let want = if j == 0 { 1.0 } else { -1.0 };
            assert!((flux - want).abs() <= 1e-8, "circle {j}: {flux}");
        }
    }
}

#[test]
fn q_omega_examples() {
    let c = geom::make_config(2.0, 0.0, 1.0, 0.0, 0.1, 1e-6, 1.0).unwrap();
    let x = Point2::new(0.3, 0.9);
    let (qw, gw) = geom::q_omega_eval(&c, x).unwrap();
    let (q0, g0) = geom::q0_eval(&c, x).unwrap();
    assert!((qw - q0).norm() < 1e-8);
    assert!((gw.0 - g0.x1).norm() < 1e-8 && (gw.1 - g0.x2).norm() < 1e-8);

    let fp = geom::fixed_points_closed(&c);
    let c = c.with_omega(0.7, 1.0).unwrap();
    let (qw, gw) = geom::q_omega_eval(&c, x).unwrap();
    let split = Complex::from(q0) + gapfield::specfun::a_remainder(x - fp.p1, 0.7).unwrap()
        - gapfield::specfun::a_remainder(x - fp.p2, 0.7).unwrap();
    assert!((qw - split).norm() <= 1e-12);
    let direct = gapfield::specfun::fundamental_solution(x - fp.p1, 0.7).unwrap()
        - gapfield::specfun::fundamental_solution(x - fp.p2, 0.7).unwrap();
    assert!((qw - direct).norm() <= 1e-12);
    let _ = gw;
}

#[test]
fn q_omega_solves_helmholtz() {
    let omega = 0.5;
    let c = geom::make_config(2.0, 0.0, 1.0, 0.0, 0.1, omega, 1.0).unwrap();
    let (x, h) = (Point2::new(0.0, 0.5), 1e-3);
    let q = |p: Point2| geom::q_omega_eval(&c, p).unwrap().0;
    let lap = (q(x + Point2::new(h, 0.0)) + q(x - Point2::new(h, 0.0)) + q(x + Point2::new(0.0, h))
        + q(x - Point2::new(0.0, h))
        - q(x) * 4.0)
        / (h * h);
    let res = lap + q(x) * (omega * omega);
    assert!(res.norm() <= 1e-4 * q(x).norm(), "{} vs {}", res.norm(), q(x).norm());
}

#[test]
fn q_omega_gradient_correction() {
    // ∇(A_ω(x−p_1) − A_ω(x−p_2)) ≈ (ω² ln ω / 4π)(p_1 − p_2)
    let omega: f64 = 1e-3;
    let c = geom::make_config(1.0, 0.0, 1.0, 0.0, 0.1, omega, 1.0).unwrap();
    let fp = geom::fixed_points_closed(&c);
    let x = Point2::new(0.0, 0.4);
    let (_, gw) = geom::q_omega_eval(&c, x).unwrap();
    let (_, g0) = geom::q0_eval(&c, x).unwrap();
    let model = (fp.p1 - fp.p2) * (omega * omega * omega.ln() / (4.0 * PI));
    let ratio = (gw.0.re - g0.x1) / model.x1;
    assert!((ratio - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn gradient_bracket_contains_the_sampled_sup() {
    for (r1, r2, eps) in [(1.0, 1.0, 1e-2), (1.0, 2.0, 1e-3), (2.0, 0.5, 1e-4)] {
        let c = pair(r1, 0.0, r2, 0.0, eps);
        let (l, u) = geom::grad_q0_sup_bounds(&c);
        let sup = 2.0 * PI * gapfield::asym::grad_q0_probe_sup(&c, 64).unwrap();
        assert!(sup >= l && sup <= u, "{r1} {r2} {eps}: {sup} not in [{l}, {u}]");
    }
}

fn bracket_slope(a1: f64, a2: f64) -> f64 {
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let ls: Vec<f64> = eps.iter().map(|&e| geom::grad_q0_sup_bounds(&pair(1.0, a1, 1.0, a2, e)).0).collect();
    fit_exponent(&eps, &ls).unwrap().slope
}

#[test]
fn bracket_blowup_rates() {
    assert!((bracket_slope(0.0, 0.0) + 0.5).abs() <= 0.02);
    assert!((bracket_slope(0.0, 1.0) + 1.0).abs() <= 0.05);
    assert!((bracket_slope(1.0, 1.0) + 1.0).abs() <= 0.05);
}

#[test]
fn q0_boundary_constancy() {
    let c = pair(1.0, 0.0, 0.5, 0.0, 1e-3);
    let k = geom::singular_constants(&c);
    let scale = k.c1.abs() + k.c2.abs();
    for j in 1..=2 {
        let want = if j == 1 { k.c1 } else { k.c2 };
        let worst = (0..256)
            .map(|i| (geom::q0_eval(&c, on_circle(&c, j, 2.0 * PI * i as f64 / 256.0)).unwrap().0 - want).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10 * scale, "{worst}");
    }
}

#[test]
fn swap_symmetry() {
    let c = pair(1.0, 0.3, 2.0, 0.0, 1e-3);
    let s = c.swapped();
    let (fp, fs) = (geom::fixed_points_closed(&c), geom::fixed_points_closed(&s));
    assert!((fp.p1 + fs.p2).norm() < 1e-15 && (fp.p2 + fs.p1).norm() < 1e-15);
    let (k, ks) = (geom::singular_constants(&c), geom::singular_constants(&s));
    assert!((k.c1 + ks.c2).abs() < 1e-15 && (k.c2 + ks.c1).abs() < 1e-15);
    let (a, b) = (geom::scale_params(&c), geom::scale_params(&s));
    assert_eq!((a.tau, a.r_minus, a.alpha_minus, a.alpha_plus), (b.tau, b.r_minus, b.alpha_minus, b.alpha_plus));
}

fn any_pair() -> impl Strategy<Value = DiskPair> {
    (0.2f64..3.0, -0.5f64..1.0, 0.2f64..3.0, -0.5f64..1.0, -5.0f64..-1.0)
        .prop_map(|(r1, a1, r2, a2, le)| pair(r1, a1, r2, a2, 10f64.powf(le)))
}

proptest! {
    #[test]
    fn reflection_is_an_involution(c in any_pair(), j in 1usize..=2, rho in 0.1f64..10.0, phi in 0.0f64..(2.0 * PI)) {
        let d = c.disk(j).unwrap();
        let x = d.center + Point2::polar(phi) * (rho * d.radius);
        let back = geom::reflect(&c, j, geom::reflect(&c, j, x).unwrap()).unwrap();
        prop_assert!((back - x).norm() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn fixed_point_property(c in any_pair()) {
        let fp = geom::fixed_points_closed(&c);
        prop_assert!(r1r2_defect(&c, fp.p1, 1) <= 1e-12);
        prop_assert!(r1r2_defect(&c, fp.p2, 2) <= 1e-12);
    }

    #[test]
    fn tau_identity(c in any_pair()) {
        let fp = geom::fixed_points_closed(&c);
        let t = geom::tau_value(&c);
        let lhs = (c.r1 + c.r2 + c.epsilon).powi(2) * (fp.p1 - fp.p2).norm_sq() / (4.0 * c.epsilon);
        prop_assert!((lhs - t * t).abs() <= 1e-12 * t * t);
    }

    #[test]
    fn q0_is_harmonic(c in any_pair(), phi in 0.0f64..(2.0 * PI), d in 0.05f64..3.0) {
        let j = if phi < PI { 1 } else { 2 };
        let disk = c.disk(j).unwrap();
        let x = disk.center + Point2::polar(phi) * (disk.radius + d * disk.radius.min(1.0));
        prop_assume!(c.is_exterior(x) && c.disks().iter().all(|b| b.signed_distance(x) > 0.02 * b.radius.min(1.0)));
        let h = 1e-3 * c.disks().iter().map(|b| b.signed_distance(x)).fold(f64::INFINITY, f64::min);
        let q = |p: Point2| geom::q0_eval(&c, p).unwrap().0;
        let lap = (q(x + Point2::new(h, 0.0)) + q(x - Point2::new(h, 0.0)) + q(x + Point2::new(0.0, h))
            + q(x - Point2::new(0.0, h)) - 4.0 * q(x)) / (h * h);
        let g = geom::q0_eval(&c, x).unwrap().1.norm();
        prop_assert!(lap.abs() <= 1e-6 * (g / h).max(1.0), "lap {}", lap);
    }
}
