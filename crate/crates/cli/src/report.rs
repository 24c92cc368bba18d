//! Serializable report types written by the commands.

use gapfield::asym::{AsymptoticReport, SweepPoint};
use gapfield::Complex;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub calderon_residual: Option<f64>,
    pub condition_estimate: Option<f64>,
    /// `ω ε^{α_-}`.
    pub quasistatic_parameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub epsilon: Vec<f64>,
    pub sup_grad: Vec<f64>,
    pub slope: f64,
    pub predicted_slope: f64,
    pub fit_residual: f64,
    pub fitted_log_prefactor: f64,
    pub plateau_subtracted: bool,
    pub measured_prefactor: f64,
    pub predicted_prefactor: f64,
    /// `max sup_grad / min sup_grad`.
    pub variation: f64,
    pub passed: bool,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub model: String,
    pub n_per_circle: usize,
    pub lambda1: Option<Complex>,
    pub lambda2: Option<Complex>,
    pub singular_amplitude: Option<Complex>,
    pub c_tilde: Option<Complex>,
    pub boundary_constancy_residual: Option<f64>,
    pub flux: Vec<Complex>,
    pub grid_points: usize,
    pub masked_points: usize,
    pub near_boundary_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportBundle {
    pub library_version: String,
    pub config_hash: String,
    pub command: String,
    pub asymptotic: AsymptoticReport,
    pub sweep: Option<SweepReport>,
    pub diagnostics: Diagnostics,
    pub solution: Option<SolutionSummary>,
}

/// One pass/fail line of `verify` or `oracle`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: f64,
    pub passed: bool,
}

impl CheckRow {
    pub fn at_most(name: &str, value: f64, upper: f64) -> Self {
        CheckRow { name: name.into(), value, lower: None, upper, passed: value <= upper }
    }

    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        CheckRow { name: name.into(), value, lower: Some(lower), upper, passed: value >= lower && value <= upper }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub library_version: String,
    pub config_hash: String,
    pub command: String,
    pub n_per_circle: usize,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

impl CheckReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:<28} {:>12} {:>20}  result\n", "check", "value", "accepted");
        for r in &self.rows {
            let verdict = if r.passed { "pass" } else { "FAIL" };
            let range = match r.lower {
                Some(lo) => format!("[{lo:.2e}, {:.2e}]", r.upper),
                None => format!("<= {:.1e}", r.upper),
            };
            out.push_str(&format!("{:<28} {:>12.3e} {:>20}  {verdict}\n", r.name, r.value, range));
        }
        out
    }
}
