//! Closed-form blowup predictions, regime classification, probing of the
//! gradient supremum and power-law fits over gap sweeps.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{self, DiskPair, ScaleParams};
use crate::quad;
use crate::solver::{self, IncidentField, SolverError};
use crate::specfun::{Complex, Point2};

/// Below this magnitude a driving term counts as zero.
const ZERO_TERM: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymError {
    #[error("fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("fit input must be positive and finite: ({epsilon:e}, {value:e})")]
    NonPositive { epsilon: f64, value: f64 },
    #[error("probe density must be at least 16, got {0}")]
    ProbeDensity(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    StaticBlowup,
    FrequencyBlowup,
    Bounded,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub exponent_predicted: f64,
    /// `C_0 / r_-`.
    pub prefactor_predicted: f64,
    /// `∂_{x_1} u^i(0)`.
    pub static_term: Complex,
    /// `(1/π) ω² |ln ω| ∫_{B_1 ∪ B_2} ∂_{x_1} u^i`.
    pub frequency_term: Complex,
    /// `(C_0/r_-) ε^{exponent} |static_term + frequency_term|`.
    pub predicted_sup: f64,
    pub regime: Regime,
    pub scale: ScaleParams,
}

/// `min(α_+, 1)/2 − 1/2`.
pub fn predicted_exponent(scale: &ScaleParams) -> f64 {
    scale.alpha_plus.min(1.0) / 2.0 - 0.5
}

fn dx1_incident(inc: &IncidentField, omega: f64, x: Point2) -> Complex {
    solver::incident_eval(inc, omega, x).1 .0
}

fn driving_terms(cfg: &DiskPair, inc: &IncidentField, omega: f64) -> (Complex, Complex) {
    let static_term = dx1_incident(inc, omega, Point2::ORIGIN);
    let area = solver::disk_area_integral(cfg, |x| dx1_incident(inc, omega, x));
    let frequency_term = area * (omega * omega * omega.ln().abs() / std::f64::consts::PI);
    (static_term, frequency_term)
}

pub fn predicted_sup(cfg: &DiskPair, inc: &IncidentField, omega: f64) -> AsymptoticReport {
    let scale = geom::scale_params(cfg);
    let exponent = predicted_exponent(&scale);
    let prefactor = scale.c0 / scale.r_minus;
    let (static_term, frequency_term) = driving_terms(cfg, inc, omega);
    let predicted = prefactor * cfg.epsilon.powf(exponent) * (static_term + frequency_term).norm();
    let regime = classify(cfg, &scale, static_term, frequency_term, omega);
    AsymptoticReport {
        exponent_predicted: exponent,
        prefactor_predicted: prefactor,
        static_term,
        frequency_term,
        predicted_sup: predicted,
        regime,
        scale,
    }
}

/// Regime at the frequency of `cfg`.
pub fn regime_classify(cfg: &DiskPair, inc: &IncidentField) -> Regime {
    let scale = geom::scale_params(cfg);
    let (s, f) = driving_terms(cfg, inc, cfg.omega);
    classify(cfg, &scale, s, f, cfg.omega)
}

fn classify(cfg: &DiskPair, scale: &ScaleParams, static_term: Complex, frequency_term: Complex, omega: f64) -> Regime {
    let eps = cfg.epsilon;
    if !(omega > 0.0 && omega < 1.0 && eps > 0.0 && eps < 1.0) {
        return Regime::Indeterminate;
    }
    let alpha = scale.alpha_plus;
    if predicted_exponent(scale) >= 0.0 {
        return Regime::Bounded;
    }
    if static_term.norm() > ZERO_TERM {
        return Regime::StaticBlowup;
    }
    if frequency_term.norm() <= ZERO_TERM {
        return Regime::Bounded;
    }
    let l = omega.ln() / eps.ln();
    let l_log = (omega * omega * omega.ln().abs()).ln() / eps.ln();
    let inside = |lo: f64, hi: f64| lo < hi && lo < alpha && alpha < hi;
    if inside(-l, 1.0 - 2.0 * l) || inside(-l, 1.0 - 2.0 * l_log) {
        Regime::FrequencyBlowup
    } else {
        Regime::Bounded
    }
}

/// `u^i(p_1) − u^i(p_2) + (1/π) ω² ln ω ∫_{B_1 ∪ B_2} ∇u^i · (p_1 − p_2)`.
pub fn lambda_diff_asym(cfg: &DiskPair, inc: &IncidentField, omega: f64) -> Complex {
    let fp = geom::fixed_points_closed(cfg);
    let d = fp.p1 - fp.p2;
    let u1 = solver::incident_eval(inc, omega, fp.p1).0;
    let u2 = solver::incident_eval(inc, omega, fp.p2).0;
    let area = solver::disk_area_integral(cfg, |x| {
        let g = solver::incident_eval(inc, omega, x).1;
        g.0 * d.x1 + g.1 * d.x2
    });
    u1 - u2 + area * (omega * omega * omega.ln() / std::f64::consts::PI)
}

/// Probe points: the gap segment, curves just outside each boundary, and a far ring.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSet {
    pub gap: Vec<Point2>,
    pub offset: Vec<Point2>,
    pub far: Vec<Point2>,
}

impl ProbeSet {
    pub fn all(&self) -> impl Iterator<Item = Point2> + '_ {
        self.gap.iter().chain(&self.offset).chain(&self.far).copied()
    }
}

pub fn probe_points(cfg: &DiskPair, density: usize) -> Result<ProbeSet, AsymError> {
    if density < 16 {
        return Err(AsymError::ProbeDensity(density));
    }
    let e = cfg.epsilon;
    let inset = 1e-3 * e;
    let gap = (0..density)
        .map(|k| {
            let s = k as f64 / (density - 1) as f64;
            Point2::new(-0.5 * e + inset + s * (e - 2.0 * inset), 0.0)
        })
        .collect();
    let rule = quad::build_rule(cfg, 4 * density, 3.0).map_err(SolverError::from)?;
    let mut offset = Vec::new();
    for circle in &rule.circles {
        let delta = 1e-3 * circle.radius.min(1.0);
        for (y, nu) in circle.nodes.iter().zip(&circle.normals) {
            let x = *y + *nu * delta;
            if cfg.is_exterior(x) {
                offset.push(x);
            }
        }
    }
    let radius = 4.0 * cfg.r1.max(cfg.r2) + e;
    let far = (0..density)
        .map(|k| Point2::polar(2.0 * std::f64::consts::PI * k as f64 / density as f64) * radius)
        .collect();
    Ok(ProbeSet { gap, offset, far })
}

fn grad_inf(g: (Complex, Complex)) -> f64 {
    g.0.norm().max(g.1.norm())
}

/// Largest `|∇u|_{ℓ∞}` over a set of points and where it occurs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeMax {
    pub value: f64,
    pub location: Point2,
}

pub fn probe_max<F>(points: &[Point2], grad: F) -> ProbeMax
where
    F: Fn(Point2) -> Option<(Complex, Complex)> + Sync,
{
    let values: Vec<(f64, Point2)> =
        points.par_iter().map(|&x| (grad(x).map(grad_inf).unwrap_or(0.0), x)).collect();
    let mut best = ProbeMax { value: 0.0, location: Point2::ORIGIN };
    for (v, x) in values {
        if v > best.value || v.is_nan() {
            best = ProbeMax { value: v, location: x };
        }
    }
    best
}

/// Max of `|∇u|_{ℓ∞}` over the probe set of `cfg` at the given density.
pub fn sup_grad_probe<F>(grad: F, cfg: &DiskPair, density: usize) -> Result<f64, AsymError>
where
    F: Fn(Point2) -> Option<(Complex, Complex)> + Sync,
{
    let probes = probe_points(cfg, density)?;
    let all: Vec<Point2> = probes.all().collect();
    Ok(probe_max(&all, grad).value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln` space.
    pub residual: f64,
}

/// Least squares of `ln y` against `ln ε`.
pub fn fit_exponent(epsilons: &[f64], values: &[f64]) -> Result<PowerFit, AsymError> {
    let n = epsilons.len().min(values.len());
    if n < 3 {
        return Err(AsymError::TooFewPoints(n));
    }
    for (&e, &v) in epsilons.iter().zip(values) {
        if !(e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite()) {
            return Err(AsymError::NonPositive { epsilon: e, value: v });
        }
    }
    let xs: Vec<f64> = epsilons[..n].iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values[..n].iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerFit { slope, intercept, residual: (ss / n as f64).sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepOptions {
    pub n_per_circle: usize,
    pub grading_exponent: f64,
    pub probe_density: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { n_per_circle: 256, grading_exponent: 3.0, probe_density: 64 }
    }
}

/// Measurements at one gap width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub sup_grad: f64,
    pub sup_location: Point2,
    /// Probe max over the far ring.
    pub plateau: f64,
    /// Probe max of `|∇b|`.
    pub sup_grad_regular: f64,
    /// Probe max of `|∇u^i|`.
    pub sup_grad_incident: f64,
    pub lambda_difference: Complex,
    pub condition_estimate: f64,
    pub resolution_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub sup_grads: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_log_prefactor: f64,
    pub residual: f64,
    pub predicted_slope: f64,
    /// Whether the far-ring plateau was subtracted before fitting.
    pub plateau_subtracted: bool,
    /// `exp(fitted_log_prefactor) / |static_term + frequency_term|`.
    pub measured_prefactor: f64,
    pub predicted_prefactor: f64,
    pub points: Vec<SweepPoint>,
}

/// Solves the constant-boundary problem at one gap width and probes it.
pub fn sweep_point(cfg: &DiskPair, inc: &IncidentField, opts: &SweepOptions) -> Result<SweepPoint, AsymError> {
    let rule = quad::build_rule(cfg, opts.n_per_circle, opts.grading_exponent).map_err(SolverError::from)?;
    let sol = solver::solve_constant_boundary(cfg, inc, &rule)?;
    let probes = probe_points(cfg, opts.probe_density)?;
    let all: Vec<Point2> = probes.all().collect();
    let total = probe_max(&all, |x| sol.sample(x).map(|s| s.grad));
    let plateau = probe_max(&probes.far, |x| sol.sample(x).map(|s| s.grad));
    let regular = probe_max(&all, |x| cfg.is_exterior(x).then(|| sol.regular_sample(x).1));
    let incident = probe_max(&all, |x| Some(solver::incident_eval(inc, cfg.omega, x).1));
    let (l1, l2) = sol.lambdas.unwrap_or_default();
    Ok(SweepPoint {
        epsilon: cfg.epsilon,
        sup_grad: total.value,
        sup_location: total.location,
        plateau: plateau.value,
        sup_grad_regular: regular.value,
        sup_grad_incident: incident.value,
        lambda_difference: l1 - l2,
        condition_estimate: sol.condition_estimate,
        resolution_warning: rule.resolution_warning,
    })
}

/// Runs `sweep_point` for every gap width (in parallel) and fits the exponent.
pub fn run_sweep(
    base: &DiskPair,
    inc: &IncidentField,
    epsilons: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult, AsymError> {
    if epsilons.len() < 3 {
        return Err(AsymError::TooFewPoints(epsilons.len()));
    }
    let cfgs: Vec<DiskPair> =
        epsilons.iter().map(|&e| base.with_epsilon(e)).collect::<Result<_, _>>().map_err(SolverError::from)?;
    let points: Vec<SweepPoint> =
        cfgs.par_iter().map(|c| sweep_point(c, inc, opts)).collect::<Result<_, _>>()?;
    let sups: Vec<f64> = points.iter().map(|p| p.sup_grad).collect();
    let subtracted: Vec<f64> = points.iter().map(|p| p.sup_grad - p.plateau).collect();
    let plateau_subtracted = subtracted.iter().all(|v| *v > 0.0);
    let fit_values = if plateau_subtracted { &subtracted } else { &sups };
    let fit = fit_exponent(epsilons, fit_values)?;
    let report = predicted_sup(&cfgs[0], inc, base.omega);
    let drive = (report.static_term + report.frequency_term).norm();
    let measured_prefactor = if drive > 0.0 { fit.intercept.exp() / drive } else { f64::NAN };
    Ok(SweepResult {
        epsilons: epsilons.to_vec(),
        sup_grads: sups,
        fitted_slope: fit.slope,
        fitted_log_prefactor: fit.intercept,
        residual: fit.residual,
        predicted_slope: report.exponent_predicted,
        plateau_subtracted,
        measured_prefactor,
        predicted_prefactor: report.prefactor_predicted,
        points,
    })
}

/// Probe max of `|∇q_0|_{ℓ∞}`.
pub fn grad_q0_probe_sup(cfg: &DiskPair, density: usize) -> Result<f64, AsymError> {
    let fp = geom::fixed_points_closed(cfg);
    sup_grad_probe(
        |x| geom::q0_with(&fp, x).ok().map(|(_, g)| (Complex::from(g.x1), Complex::from(g.x2))),
        cfg,
        density,
    )
}
