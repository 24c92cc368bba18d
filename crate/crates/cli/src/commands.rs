//! The five commands.

use std::fs;
use std::path::{Path, PathBuf};

use gapfield::asym::{self, SweepOptions};
use gapfield::geom::{self, DiskPair};
use gapfield::solver::{self, BoundarySolution, IncidentField};
use gapfield::{layerpot, quad, Point2};
use serde::Serialize;

use crate::config::{Format, Model, RunConfig};
use crate::report::{CheckReport, CheckRow, Diagnostics, ReportBundle, SolutionSummary, SweepReport};
use crate::CliError;

/// Slope tolerance of a sweep.
pub const SLOPE_TOLERANCE: f64 = 0.07;
/// Largest sup ratio accepted when no blowup is predicted.
pub const BOUNDED_VARIATION: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Verify,
    Solve,
    Sweep,
    Report,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Report => "report",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub quiet: bool,
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// 0, or 4 when an acceptance check failed.
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", opts.out_dir.display())))?;
    let outcome = match command {
        Command::Verify => verify(cfg, opts)?,
        Command::Solve => solve(cfg, opts)?,
        Command::Sweep => sweep(cfg, opts)?,
        Command::Report => report(cfg, opts)?,
        Command::Oracle => oracle(cfg, opts)?,
    };
    if !opts.quiet {
        print!("{}", outcome.summary);
    }
    Ok(outcome)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn build_rule(cfg: &RunConfig, pair: &DiskPair) -> Result<quad::QuadratureRule, CliError> {
    quad::build_rule(pair, cfg.discretization.n_per_circle, cfg.discretization.grading_exponent)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn check_report(cfg: &RunConfig, command: Command, rows: Vec<CheckRow>) -> CheckReport {
    CheckReport {
        library_version: gapfield::VERSION.into(),
        config_hash: cfg.hash(),
        command: command.name().into(),
        n_per_circle: cfg.discretization.n_per_circle,
        passed: rows.iter().all(|r| r.passed),
        rows,
    }
}

fn finish_checks(cfg: &RunConfig, opts: &RunOptions, command: Command, rows: Vec<CheckRow>) -> Result<Outcome, CliError> {
    let report = check_report(cfg, command, rows);
    let file = write_json(&opts.out_dir, &format!("{}.json", command.name()), &report)?;
    Ok(Outcome { exit_code: if report.passed { 0 } else { 4 }, files: vec![file], summary: report.table() })
}

/// Identity suites on the configured geometry.
pub fn verify_rows(cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let pair = cfg.disk_pair()?;
    let rule = build_rule(cfg, &pair)?;
    let mut rows = Vec::new();
    rows.push(CheckRow::at_most(
        "calderon_residual",
        layerpot::calderon_residual_seeded(&pair, &rule, cfg.verify.seed),
        1e-8,
    ));
    rows.push(CheckRow::at_most("jump_relation_static", layerpot::jump_residual(&rule, 0.0, 1e-5, 8), 1e-4));
    rows.push(CheckRow::at_most("jump_relation_omega", layerpot::jump_residual(&rule, pair.omega, 1e-5, 8), 1e-4));
    rows.push(CheckRow::at_most("reciprocity_static", layerpot::reciprocity_defect(&rule), 1e-12));
    rows.push(CheckRow::at_most(
        "splitting_identity",
        layerpot::splitting_residual(&rule, pair.omega, 20, cfg.verify.seed),
        1e-10,
    ));
    rows.push(CheckRow::at_most("fixed_points", fixed_point_gap(&pair)?, 1e-12));
    let sing = solver::singular_function_check(&pair, &rule).map_err(numerical)?;
    rows.push(CheckRow::at_most("singular_constancy", sing.constancy, 1e-10));
    rows.push(CheckRow::at_most("singular_flux_1", (sing.flux[0] - 1.0).abs(), 1e-8));
    rows.push(CheckRow::at_most("singular_flux_2", (sing.flux[1] + 1.0).abs(), 1e-8));
    let (l, _) = geom::grad_q0_sup_bounds(&pair);
    let sup = asym::grad_q0_probe_sup(&pair, cfg.sweep.probe_density).map_err(numerical)?;
    rows.push(CheckRow::within("grad_q0_bracket_ratio", 2.0 * std::f64::consts::PI * sup / l, 1.0, 2.0));
    Ok(rows)
}

/// Largest distance between the closed-form and iterated fixed points.
pub fn fixed_point_gap(pair: &DiskPair) -> Result<f64, CliError> {
    let closed = geom::fixed_points_closed(pair);
    let iterated = geom::fixed_points_iterated(pair, 1e-15).map_err(numerical)?;
    Ok((closed.p1 - iterated.p1).norm().max((closed.p2 - iterated.p2).norm()))
}

fn verify(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    finish_checks(cfg, opts, Command::Verify, verify_rows(cfg)?)
}

/// Fixed points and the single-disk series comparison.
pub fn oracle_rows(cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let pair = cfg.disk_pair()?;
    let mut rows = vec![CheckRow::at_most("fixed_points", fixed_point_gap(&pair)?, 1e-12)];
    let inc = IncidentField::plane_wave(cfg.incident().direction);
    let n = cfg.discretization.n_per_circle;
    let sol = solver::solve_transmission_single(pair.r1, pair.permittivity_inclusion, pair.omega, &inc, n)
        .map_err(numerical)?;
    rows.push(CheckRow::at_most("mie_boundary_trace", mie_trace_error(&sol, &inc)?, 1e-8));
    Ok(rows)
}

/// Relative L² error of the exterior boundary trace against the series solution.
pub fn mie_trace_error(sol: &BoundarySolution, inc: &IncidentField) -> Result<f64, CliError> {
    let circle = &sol.rule.circles[0];
    let series = solver::mie_single_disk(circle.radius, sol.permittivity_inclusion, sol.omega, inc, &circle.nodes)
        .map_err(numerical)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, s) in series.iter().enumerate() {
        let v = sol.boundary_value(0, circle.params[k]);
        num += (v - s.value).norm_sqr() * circle.weights[k];
        den += s.value.norm_sqr() * circle.weights[k];
    }
    Ok((num / den).sqrt())
}

fn oracle(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    finish_checks(cfg, opts, Command::Oracle, oracle_rows(cfg)?)
}

fn bundle(cfg: &RunConfig, command: Command, pair: &DiskPair, diagnostics: Diagnostics) -> ReportBundle {
    ReportBundle {
        library_version: gapfield::VERSION.into(),
        config_hash: cfg.hash(),
        command: command.name().into(),
        asymptotic: asym::predicted_sup(pair, &cfg.incident(), pair.omega),
        sweep: None,
        diagnostics,
        solution: None,
    }
}

fn report(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let pair = cfg.disk_pair()?;
    let diagnostics =
        Diagnostics { calderon_residual: None, condition_estimate: None, quasistatic_parameter: pair.quasistatic_parameter() };
    let b = bundle(cfg, Command::Report, &pair, diagnostics);
    let file = write_json(&opts.out_dir, "report.json", &b)?;
    let a = &b.asymptotic;
    let summary = format!(
        "exponent {:.6}\nprefactor {:.6}\npredicted sup {:.6e}\nregime {:?}\n",
        a.exponent_predicted, a.prefactor_predicted, a.predicted_sup, a.regime
    );
    Ok(Outcome { exit_code: 0, files: vec![file], summary })
}

/// Grid of field-map points, row-major with `x_1` fastest.
pub fn grid_points(cfg: &RunConfig, pair: &DiskPair) -> Vec<Point2> {
    let (x1, x2, n1, n2) = match &cfg.output.grid {
        Some(g) => (g.x1, g.x2, g.n1, g.n2),
        None => {
            let r = pair.r1.max(pair.r2);
            ([pair.z1.x1 - 1.5 * pair.r1, pair.z2.x1 + 1.5 * pair.r2], [-1.5 * r, 1.5 * r], 41, 41)
        }
    };
    let axis = |[lo, hi]: [f64; 2], n: usize, k: usize| {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    (0..n2).flat_map(|j| (0..n1).map(move |i| Point2::new(axis(x1, n1, i), axis(x2, n2, j)))).collect()
}

fn solve(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let pair = cfg.disk_pair()?;
    let rule = build_rule(cfg, &pair)?;
    let inc = cfg.incident();
    let sol = match cfg.physics.model {
        Model::ConstantBoundary => solver::solve_constant_boundary(&pair, &inc, &rule),
        Model::Transmission => solver::solve_transmission(&pair, &inc, &rule),
    }
    .map_err(numerical)?;
    let points = grid_points(cfg, &pair);
    let exterior: Vec<Point2> = points.iter().copied().filter(|x| pair.is_exterior(*x)).collect();
    let samples = solver::eval_field(&sol, &exterior);
    let mut files = Vec::new();
    let mut near = 0;
    if cfg.output.formats.contains(&Format::Csv) {
        let path = opts.out_dir.join("field.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(["x1", "x2", "re_u", "im_u", "re_dux1", "im_dux1", "re_dux2", "im_dux2"])
            .map_err(|e| CliError::Io(e.to_string()))?;
        let mut it = samples.iter();
        for x in &points {
            let mut rec = vec![x.x1.to_string(), x.x2.to_string()];
            if pair.is_exterior(*x) {
                if let Some(Some(s)) = it.next() {
                    near += usize::from(s.near_boundary);
                    for v in [s.value, s.grad.0, s.grad.1] {
                        rec.push(v.re.to_string());
                        rec.push(v.im.to_string());
                    }
                }
            }
            rec.resize(8, String::new());
            w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        files.push(path);
    } else {
        near = samples.iter().flatten().filter(|s| s.near_boundary).count();
    }
    let decomposition = if sol.lambdas.is_some() { Some(solver::decompose(&sol).map_err(numerical)?) } else { None };
    let diagnostics = Diagnostics {
        calderon_residual: Some(layerpot::calderon_residual_seeded(&pair, &rule, cfg.verify.seed)),
        condition_estimate: Some(sol.condition_estimate),
        quasistatic_parameter: pair.quasistatic_parameter(),
    };
    let mut b = bundle(cfg, Command::Solve, &pair, diagnostics);
    b.solution = Some(SolutionSummary {
        model: match cfg.physics.model {
            Model::ConstantBoundary => "constant_boundary".into(),
            Model::Transmission => "transmission".into(),
        },
        n_per_circle: cfg.discretization.n_per_circle,
        lambda1: sol.lambdas.map(|l| l.0),
        lambda2: sol.lambdas.map(|l| l.1),
        singular_amplitude: sol.singular_amplitude,
        c_tilde: decomposition.map(|d| d.c_tilde),
        boundary_constancy_residual: sol.boundary_constancy_residual(),
        flux: sol.flux.clone(),
        grid_points: points.len(),
        masked_points: points.len() - exterior.len(),
        near_boundary_points: near,
    });
    if cfg.output.formats.contains(&Format::Json) {
        files.push(write_json(&opts.out_dir, "report.json", &b)?);
    }
    let summary = format!(
        "solved {} unknowns (condition {:.3e}); {} grid points, {} masked\n",
        rule.total_nodes(),
        sol.condition_estimate,
        points.len(),
        points.len() - exterior.len()
    );
    Ok(Outcome { exit_code: 0, files, summary })
}

fn sweep(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let pair = cfg.disk_pair()?;
    if cfg.sweep.epsilon_list.len() < 3 {
        return Err(CliError::Config("sweep.epsilon_list: needs at least 3 values".into()));
    }
    let sweep_opts = SweepOptions {
        n_per_circle: cfg.discretization.n_per_circle,
        grading_exponent: cfg.discretization.grading_exponent,
        probe_density: cfg.sweep.probe_density,
    };
    let result = asym::run_sweep(&pair, &cfg.incident(), &cfg.sweep.epsilon_list, &sweep_opts).map_err(numerical)?;
    let max = result.sup_grads.iter().copied().fold(f64::MIN, f64::max);
    let min = result.sup_grads.iter().copied().fold(f64::MAX, f64::min);
    let variation = max / min;
    let passed = if result.predicted_slope == 0.0 {
        variation <= BOUNDED_VARIATION
    } else {
        (result.fitted_slope - result.predicted_slope).abs() <= SLOPE_TOLERANCE
    };
    let worst_condition = result.points.iter().map(|p| p.condition_estimate).fold(0.0, f64::max);
    let diagnostics = Diagnostics {
        calderon_residual: None,
        condition_estimate: Some(worst_condition),
        quasistatic_parameter: pair.quasistatic_parameter(),
    };
    let mut b = bundle(cfg, Command::Sweep, &pair, diagnostics);
    b.sweep = Some(SweepReport {
        epsilon: result.epsilons.clone(),
        sup_grad: result.sup_grads.clone(),
        slope: result.fitted_slope,
        predicted_slope: result.predicted_slope,
        fit_residual: result.residual,
        fitted_log_prefactor: result.fitted_log_prefactor,
        plateau_subtracted: result.plateau_subtracted,
        measured_prefactor: result.measured_prefactor,
        predicted_prefactor: result.predicted_prefactor,
        variation,
        passed,
        points: result.points.clone(),
    });
    let file = write_json(&opts.out_dir, "sweep.json", &b)?;
    let summary = format!(
        "slope {:.4} (predicted {:.4}), variation {:.3}: {}\n",
        result.fitted_slope,
        result.predicted_slope,
        variation,
        if passed { "pass" } else { "FAIL" }
    );
    Ok(Outcome { exit_code: if passed { 0 } else { 4 }, files: vec![file], summary })
}
