use std::f64::consts::PI;

use gapfield::asym::{self, AsymError, Regime};
use gapfield::geom::{self, DiskPair};
use gapfield::quad;
use gapfield::solver::{self, IncidentField};
use gapfield::{Complex, Point2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const X1: Point2 = Point2::new(1.0, 0.0);

fn cfg_alpha(r1: f64, a1: f64, r2: f64, a2: f64, eps: f64, omega: f64) -> DiskPair {
    geom::make_config(r1, a1, r2, a2, eps, omega, omega).unwrap()
}

#[test]
fn exponent_examples() {
    let exp = |a1, a2| asym::predicted_exponent(&geom::scale_params(&cfg_alpha(1.0, a1, 1.0, a2, 1e-3, 0.1)));
    assert_eq!(exp(0.0, 0.0), -0.5);
    assert_eq!(exp(1.2, 0.0), 0.0);
    assert_eq!(exp(-0.5, -0.5), -0.75);
    assert_eq!(exp(0.4, 0.2), 0.2 - 0.5);
}

#[test]
fn predicted_sup_for_unit_disks() {
    let eps = 1e-4;
    let rep = asym::predicted_sup(&cfg_alpha(1.0, 0.0, 1.0, 0.0, eps, 0.01), &IncidentField::normalized_gradient_pair(X1), 0.01);
    assert!((rep.prefactor_predicted - 1.0).abs() <= 1e-3, "{}", rep.prefactor_predicted);
    assert!((rep.static_term - Complex::from(1.0)).norm() <= 1e-12);
    assert!((rep.predicted_sup * eps.sqrt() - 1.0).abs() <= 1e-2, "{}", rep.predicted_sup);
    assert_eq!(rep.regime, Regime::StaticBlowup);
}

#[test]
fn even_incidence_drives_only_the_frequency_term() {
    let omega = 0.3;
    let cfg = cfg_alpha(1.0, 0.0, 2.0, 0.0, 1e-3, omega);
    let rep = asym::predicted_sup(&cfg, &IncidentField::cosine(X1), omega);
    assert!(rep.static_term.norm() <= 1e-14);
    assert!(rep.frequency_term.norm() > 1e-3);
    // oracle: ∂_1 cos(ω x_1) = −ω sin(ω x_1), integrated over each disk in closed form
    // ∫_{|y|<r} sin(ω(c + y_1)) dy = sin(ω c) · 2π r J_1(ω r)/ω
    let disk = |c: f64, r: f64| -omega * (omega * c).sin() * 2.0 * PI * r * gapfield::specfun::bessel_j1y1(omega * r).unwrap().0 / omega;
    let area = disk(cfg.z1.x1, cfg.r1) + disk(cfg.z2.x1, cfg.r2);
    let want = area * omega * omega * omega.ln().abs() / PI;
    assert!((rep.frequency_term.re - want).abs() <= 1e-9 * want.abs() && rep.frequency_term.im.abs() <= 1e-12, "{} {want}", rep.frequency_term);
}

#[test]
fn constant_incidence_is_bounded() {
    let rep = asym::predicted_sup(&cfg_alpha(1.0, 0.0, 1.0, 0.0, 1e-3, 0.1), &IncidentField::constant(Complex::from(1.0)), 0.1);
    assert_eq!(rep.static_term, Complex::from(0.0));
    assert_eq!(rep.frequency_term, Complex::from(0.0));
    assert_eq!(rep.predicted_sup, 0.0);
    assert_eq!(rep.regime, Regime::Bounded);
}

#[test]
fn regime_examples() {
    let eps: f64 = 1e-4;
    let omega = eps.powf(0.2);
    let cfg = cfg_alpha(1.0, 0.2, 2.0, 0.0, eps, omega);
    assert_eq!(geom::scale_params(&cfg).alpha_plus, 0.2);
    assert_eq!(asym::regime_classify(&cfg, &IncidentField::cosine(X1)), Regime::FrequencyBlowup);

    let grad = IncidentField::normalized_gradient_pair(X1);
    assert_eq!(asym::regime_classify(&cfg_alpha(1.0, 0.0, 1.0, 0.0, eps, 0.1), &grad), Regime::StaticBlowup);
    assert_eq!(asym::regime_classify(&cfg_alpha(1.0, 1.5, 1.0, 0.0, eps, 0.1), &grad), Regime::Bounded);
    assert_eq!(asym::regime_classify(&cfg_alpha(1.0, 0.0, 1.0, 0.0, eps, 1.5), &grad), Regime::Indeterminate);
}

#[test]
fn regime_is_bounded_from_alpha_one_on() {
    for inc in [IncidentField::cosine(X1), IncidentField::normalized_gradient_pair(X1)] {
        let mut seen_bounded = false;
        for k in 0..13 {
            let a = -0.5 + 0.15 * k as f64;
            let cfg = cfg_alpha(1.0, a, 2.0, 0.0, 1e-4, 1e-4f64.powf(0.2));
            let r = asym::regime_classify(&cfg, &inc);
            if seen_bounded {
                assert_eq!(r, Regime::Bounded, "alpha={a}");
            }
            seen_bounded |= r == Regime::Bounded;
            if geom::scale_params(&cfg).alpha_plus >= 1.0 {
                assert_eq!(r, Regime::Bounded);
            }
        }
    }
}

#[test]
fn prefactor_scales_like_the_square_root_of_the_radii() {
    let base = geom::scale_params(&cfg_alpha(1.0, 0.0, 2.0, 0.0, 1e-6, 0.1));
    let scaled = geom::scale_params(&cfg_alpha(3.0, 0.0, 6.0, 0.0, 1e-6, 0.1));
    assert_eq!(asym::predicted_exponent(&base), asym::predicted_exponent(&scaled));
    let ratio = (scaled.c0 / scaled.r_minus) / (base.c0 / base.r_minus);
    assert!((ratio - 3f64.sqrt()).abs() <= 1e-9, "{ratio}");
    let (r1, r2): (f64, f64) = (1.0, 2.0);
    assert!((base.c0 / base.r_minus - (2.0 * r1 * r2 / (r1 + r2)).sqrt()).abs() <= 1e-12);
}

#[test]
fn probe_of_the_singular_function_lies_in_the_bracket() {
    for (r1, r2, eps) in [(1.0, 1.0, 1e-3), (1.0, 2.0, 1e-2), (0.5, 1.5, 1e-4)] {
        let cfg = cfg_alpha(r1, 0.0, r2, 0.0, eps, 0.1);
        let (lo, hi) = geom::grad_q0_sup_bounds(&cfg);
        let sup = 2.0 * PI * asym::grad_q0_probe_sup(&cfg, 64).unwrap();
        assert!(sup >= lo && sup <= hi, "{r1} {r2} {eps}: {lo} {sup} {hi}");
    }
}

#[test]
fn probe_max_sits_on_the_gap_segment() {
    let eps = 1e-3;
    let cfg = cfg_alpha(1.0, 0.0, 1.0, 0.0, eps, 1e-3);
    let rule = quad::build_rule(&cfg, 256, 3.0).unwrap();
    let sol = solver::solve_constant_boundary(&cfg, &IncidentField::normalized_gradient_pair(X1), &rule).unwrap();
    let probes = asym::probe_points(&cfg, 64).unwrap();
    let all: Vec<Point2> = probes.all().collect();
    let best = asym::probe_max(&all, |x| sol.sample(x).map(|s| s.grad));
    assert!(best.location.x2.abs() <= 1e-3 && best.location.x1.abs() < 0.5 * eps, "{:?}", best.location);
}

#[test]
fn probe_density_is_converged() {
    let cfg = cfg_alpha(1.0, 0.0, 1.0, 0.0, 1e-3, 0.1);
    let (a, b) = (asym::grad_q0_probe_sup(&cfg, 64).unwrap(), asym::grad_q0_probe_sup(&cfg, 128).unwrap());
    assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
}

#[test]
fn probe_set_layout() {
    let cfg = cfg_alpha(1.0, 0.0, 2.0, 0.0, 1e-2, 0.1);
    let p = asym::probe_points(&cfg, 32).unwrap();
    assert_eq!(p.gap.len(), 32);
    assert!(p.gap.iter().all(|x| x.x2 == 0.0 && x.x1.abs() < 0.5e-2));
    assert!(p.offset.iter().all(|x| cfg.is_exterior(*x)));
    assert!(p.far.iter().all(|x| (x.norm() - (8.0 + 1e-2)).abs() < 1e-12));
    assert_eq!(asym::probe_points(&cfg, 15), Err(AsymError::ProbeDensity(15)));
}

#[test]
fn fit_examples() {
    let eps: Vec<f64> = (0..5).map(|k| 10f64.powf(-1.0 - 0.75 * k as f64)).collect();
    let exact: Vec<f64> = eps.iter().map(|e| 3.0 * e.powf(-0.5)).collect();
    let fit = asym::fit_exponent(&eps, &exact).unwrap();
    assert!((fit.slope + 0.5).abs() <= 1e-12 && fit.residual <= 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() <= 1e-12);

    let flat = asym::fit_exponent(&eps, &[2.0; 5]).unwrap();
    assert!(flat.slope.abs() <= 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let noisy: Vec<f64> = exact.iter().map(|v| v * (1.0 + rng.random_range(-0.05..0.05))).collect();
        let s = asym::fit_exponent(&eps, &noisy).unwrap().slope;
        assert!((s + 0.5).abs() <= 0.05, "{s}");
    }

    assert_eq!(asym::fit_exponent(&eps[..2], &exact[..2]), Err(AsymError::TooFewPoints(2)));
    assert!(matches!(asym::fit_exponent(&eps, &[1.0, 2.0, -1.0, 1.0, 1.0]), Err(AsymError::NonPositive { .. })));
    assert!(asym::fit_exponent(&eps, &[1.0, 2.0, f64::NAN, 1.0, 1.0]).is_err());
}

proptest! {
    #[test]
    fn fit_recovers_power_laws(slope in -2.0f64..1.0, c in 0.01f64..100.0) {
        let eps: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let ys: Vec<f64> = eps.iter().map(|e| c * e.powf(slope)).collect();
        let fit = asym::fit_exponent(&eps, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-9);
    }
}

#[test]
fn lambda_difference_examples() {
    let sym = cfg_alpha(1.0, 0.0, 1.0, 0.0, 1e-2, 0.1);
    assert!(asym::lambda_diff_asym(&sym, &IncidentField::plane_wave(Point2::new(0.0, 1.0)), 0.1).norm() <= 1e-14);

    let eps = 1e-4;
    let cfg = cfg_alpha(1.0, 0.0, 2.0, 0.0, eps, 0.05);
    let inc = IncidentField::plane_wave(Point2::new(0.6, 0.8));
    let fp = geom::fixed_points_closed(&cfg);
    let d1 = solver::incident_eval(&inc, 0.05, Point2::ORIGIN).1 .0;
    let lead = asym::lambda_diff_asym(&cfg, &inc, 0.05);
    let want = d1.norm() * (fp.p1 - fp.p2).norm();
    assert!((lead.norm() / want - 1.0).abs() <= 0.1, "{} {want}", lead.norm());
}
