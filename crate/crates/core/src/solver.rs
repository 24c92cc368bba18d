//! Boundary-integral solves: the transmission problem, the problem with
//! unknown constant boundary values `λ_j` and zero flux, and the exterior
//! Laplace problem for `b_0`. Also the series solution for a single disk.
//!
//! The constant-boundary solve looks for
//! `u = u^i + a q_ω + S^ω[ψ]`, so the part of the field that concentrates in
//! the gap is carried by the closed form `q_ω` and the density `ψ` stays
//! smooth in the graded parameter. The extra unknown `a` is fixed by
//! `a (C_1 − C_2) = λ_1 − λ_2`, which makes `b = u^i + S^ω[ψ]` exactly the
//! regular part `u − a q_ω`.

mod mie;

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mie::{mie_coefficients, mie_single_disk, MieCoefficients};

use crate::geom::{self, DiskPair, FixedPoints, GeomError};
use crate::layerpot::{self, BoundaryDensity, Kernel, KernelKind};
use crate::linalg;
use crate::quad::{self, QuadError, QuadratureRule};
use crate::specfun::{Complex, Point2};

/// Solves whose condition estimate exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e14;

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
const I: Complex = Complex { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("linear system is ill-conditioned: condition estimate {condition:.3e} (n = {size})")]
    IllConditioned { condition: f64, size: usize },
    #[error("degenerate singular constants: |C1 - C2| = {0:e}")]
    DegenerateConstants(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncidentKind {
    /// `e^{iω x·d}`
    PlaneWave,
    /// `sin(ω x·d)/ω`, which tends to `x·d` as `ω → 0`.
    NormalizedGradientPair,
    /// `c_0 + c_1 e^{iω x·d} + c_2 e^{−iω x·d}`. The constant term solves
    /// the Helmholtz equation only at `ω = 0`.
    CustomCombination,
}

/// Incident field, an entire solution of the Helmholtz equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidentField {
    pub kind: IncidentKind,
    /// Unit propagation direction `d`.
    pub direction: Point2,
    /// Coefficients `[c_0, c_1, c_2]` of a custom combination; missing entries are zero.
    pub coefficients: Vec<Complex>,
}

impl IncidentField {
    pub fn plane_wave(direction: Point2) -> Self {
        IncidentField { kind: IncidentKind::PlaneWave, direction, coefficients: Vec::new() }
    }

    pub fn normalized_gradient_pair(direction: Point2) -> Self {
        IncidentField { kind: IncidentKind::NormalizedGradientPair, direction, coefficients: Vec::new() }
    }

    pub fn custom(direction: Point2, coefficients: Vec<Complex>) -> Self {
        IncidentField { kind: IncidentKind::CustomCombination, direction, coefficients }
    }

    /// The constant field `c`.
    pub fn constant(c: Complex) -> Self {
        IncidentField::custom(Point2::new(1.0, 0.0), vec![c])
    }

    /// `cos(ω x·d)`.
    pub fn cosine(direction: Point2) -> Self {
        IncidentField::custom(direction, vec![ZERO, Complex::from(0.5), Complex::from(0.5)])
    }

    fn coefficient(&self, k: usize) -> Complex {
        self.coefficients.get(k).copied().unwrap_or(ZERO)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.direction.norm();
        if !((n - 1.0).abs() < 1e-12) {
            return Err(SolverError::Invalid(format!("incident direction must be a unit vector, |d| = {n}")));
        }
        if self.coefficients.len() > 3 {
            return Err(SolverError::Invalid("at most three custom coefficients are allowed".into()));
        }
        if self.coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SolverError::Invalid("incident coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Coefficient of `ω^j` in the expansion `u^i = Σ_j ω^j u^i_j` at `x`.
    pub fn expansion_term(&self, j: usize, x: Point2) -> Complex {
        let s = x.dot(self.direction);
        let fact: f64 = (1..=j).map(|k| k as f64).product();
        let power = |z: Complex| z.powu(j as u32) / fact;
        match self.kind {
            IncidentKind::PlaneWave => power(I * s),
            IncidentKind::NormalizedGradientPair => {
                if j % 2 == 1 {
                    ZERO
                } else {
                    let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    Complex::from(sign * s.powi(j as i32 + 1) / (fact * (j as f64 + 1.0)))
                }
            }
            IncidentKind::CustomCombination => {
                let c0 = if j == 0 { self.coefficient(0) } else { ZERO };
                c0 + self.coefficient(1) * power(I * s) + self.coefficient(2) * power(-I * s)
            }
        }
    }

    /// Value and gradient of the static term `u^i_0`.
    pub fn static_eval(&self, x: Point2) -> (Complex, (Complex, Complex)) {
        let d = self.direction;
        match self.kind {
            IncidentKind::PlaneWave => (Complex::from(1.0), (ZERO, ZERO)),
            IncidentKind::NormalizedGradientPair => (Complex::from(x.dot(d)), (d.x1.into(), d.x2.into())),
            IncidentKind::CustomCombination => {
                (self.coefficient(0) + self.coefficient(1) + self.coefficient(2), (ZERO, ZERO))
            }
        }
    }
}

/// Value and gradient of the incident field at frequency `omega`.
pub fn incident_eval(inc: &IncidentField, omega: f64, x: Point2) -> (Complex, (Complex, Complex)) {
    let d = inc.direction;
    let s = x.dot(d);
    match inc.kind {
        IncidentKind::PlaneWave => {
            let e = (I * (omega * s)).exp();
            let g = I * omega * e;
            (e, (g * d.x1, g * d.x2))
        }
        IncidentKind::NormalizedGradientPair => {
            if omega == 0.0 {
                return (Complex::from(s), (d.x1.into(), d.x2.into()));
            }
            let (sn, cs) = (omega * s).sin_cos();
            (Complex::from(sn / omega), (Complex::from(cs * d.x1), Complex::from(cs * d.x2)))
        }
        IncidentKind::CustomCombination => {
            let ep = (I * (omega * s)).exp();
            let em = ep.inv();
            let (c0, c1, c2) = (inc.coefficient(0), inc.coefficient(1), inc.coefficient(2));
            let value = c0 + c1 * ep + c2 * em;
            let g = I * omega * (c1 * ep - c2 * em);
            (value, (g * d.x1, g * d.x2))
        }
    }
}

fn normal_derivative(grad: (Complex, Complex), nu: Point2) -> Complex {
    grad.0 * nu.x1 + grad.1 * nu.x2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Transmission,
    ConstantBoundary,
    LaplaceB0,
}

/// Where a sample point lies relative to the inclusions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Exterior,
    /// Inside disk `j` (1-based).
    Interior(usize),
}

/// Field value and gradient at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: Point2,
    pub value: Complex,
    pub grad: (Complex, Complex),
    pub region: Region,
    /// Closer than five node spacings to a boundary.
    pub near_boundary: bool,
}

/// Solution of one of the boundary-integral systems.
#[derive(Clone, Debug)]
pub struct BoundarySolution {
    pub kind: SolutionKind,
    /// Geometry and physics; `None` for the single-disk path.
    pub cfg: Option<DiskPair>,
    pub omega: f64,
    pub permittivity_inclusion: f64,
    pub rule: QuadratureRule,
    pub incident: IncidentField,
    /// `ψ` (constant boundary), `φ_1*` (transmission) or `φ` (`b_0`).
    pub density: BoundaryDensity,
    /// `φ_2*` of the transmission problem.
    pub interior_density: Option<BoundaryDensity>,
    /// `(λ_1, λ_2)` of the constant-boundary problem.
    pub lambdas: Option<(Complex, Complex)>,
    /// Coefficient `a` of `q_ω` in the constant-boundary representation.
    pub singular_amplitude: Option<Complex>,
    /// Constant added to the single layer in the `b_0` representation.
    pub far_constant: Option<Complex>,
    pub fixed_points: Option<FixedPoints>,
    pub condition_estimate: f64,
    /// `∮_{∂B_j} ∂_ν u|_+` after the solve (constant-boundary kind).
    pub flux: Vec<Complex>,
}

fn check_condition(condition: f64, size: usize) -> Result<(), SolverError> {
    if condition.is_finite() && condition <= CONDITION_LIMIT {
        Ok(())
    } else {
        Err(SolverError::IllConditioned { condition, size })
    }
}

fn embed(dst: &mut Mat<Complex>, src: &Mat<Complex>, r0: usize, c0: usize, scale: Complex) {
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(r0 + i, c0 + j)] = src[(i, j)] * scale;
        }
    }
}

fn boundary_nodes(rule: &QuadratureRule) -> Vec<(usize, Point2, Point2, f64)> {
    rule.circles
        .iter()
        .enumerate()
        .flat_map(|(c, circle)| (0..circle.n).map(move |k| (c, circle.nodes[k], circle.normals[k], circle.weights[k])))
        .collect()
}

/// Transmission problem with the two-density representation
/// `u = u^i + S^ω[φ_1]` outside and `u = S^{k_c}[φ_2]` inside, `k_c = ω √ε_1`.
pub fn solve_transmission(
    cfg: &DiskPair,
    inc: &IncidentField,
    rule: &QuadratureRule,
) -> Result<BoundarySolution, SolverError> {
    let mut sol = transmission_on_rule(rule, cfg.omega, cfg.permittivity_inclusion, inc)?;
    sol.cfg = Some(*cfg);
    Ok(sol)
}

/// Transmission problem for one disk of radius `r` centered at the origin.
pub fn solve_transmission_single(
    r: f64,
    permittivity_inclusion: f64,
    omega: f64,
    inc: &IncidentField,
    n: usize,
) -> Result<BoundarySolution, SolverError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SolverError::Invalid(format!("radius must be positive, got {r}")));
    }
    let rule = quad::build_single_rule(Point2::ORIGIN, r, n)?;
    transmission_on_rule(&rule, omega, permittivity_inclusion, inc)
}

fn transmission_on_rule(
    rule: &QuadratureRule,
    omega: f64,
    eps1: f64,
    inc: &IncidentField,
) -> Result<BoundarySolution, SolverError> {
    inc.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(SolverError::Invalid(format!("transmission solve needs omega > 0, got {omega}")));
    }
    if !(eps1 > 0.0 && eps1.is_finite()) {
        return Err(SolverError::Invalid(format!("permittivity must be positive, got {eps1}")));
    }
    let kc = omega * eps1.sqrt();
    let n = rule.total_nodes();
    let s_out = layerpot::assemble_full(rule, KernelKind::SingleLayer, omega).matrix;
    let k_out = layerpot::assemble_full(rule, KernelKind::AdjointDoubleLayer, omega).matrix;
    let s_in = layerpot::assemble_full(rule, KernelKind::SingleLayer, kc).matrix;
    let k_in = layerpot::assemble_full(rule, KernelKind::AdjointDoubleLayer, kc).matrix;
    let mut m = Mat::<Complex>::zeros(2 * n, 2 * n);
    embed(&mut m, &s_out, 0, 0, Complex::from(-1.0));
    embed(&mut m, &s_in, 0, n, Complex::from(1.0));
    embed(&mut m, &k_out, n, 0, Complex::from(-1.0));
    embed(&mut m, &k_in, n, n, Complex::from(1.0 / eps1));
    for i in 0..n {
        m[(n + i, i)] -= 0.5;
        m[(n + i, n + i)] -= 0.5 / eps1;
    }
    let mut rhs = vec![ZERO; 2 * n];
    for (i, (_, x, nu, _)) in boundary_nodes(rule).into_iter().enumerate() {
        let (v, g) = incident_eval(inc, omega, x);
        rhs[i] = v;
        rhs[n + i] = normal_derivative(g, nu);
    }
    let solved = linalg::solve_dense(&m, &rhs);
    check_condition(solved.condition, 2 * n)?;
    Ok(BoundarySolution {
        kind: SolutionKind::Transmission,
        cfg: None,
        omega,
        permittivity_inclusion: eps1,
        rule: rule.clone(),
        incident: inc.clone(),
        density: BoundaryDensity::new(solved.x[..n].to_vec()),
        interior_density: Some(BoundaryDensity::new(solved.x[n..].to_vec())),
        lambdas: None,
        singular_amplitude: None,
        far_constant: None,
        fixed_points: None,
        condition_estimate: solved.condition,
        flux: Vec::new(),
    })
}

/// Problem with `u = λ_j` on `∂B_j` and `∮_{∂B_j} ∂_ν u|_+ = 0`.
pub fn solve_constant_boundary(
    cfg: &DiskPair,
    inc: &IncidentField,
    rule: &QuadratureRule,
) -> Result<BoundarySolution, SolverError> {
    inc.validate()?;
    if rule.circles.len() != 2 {
        return Err(SolverError::Invalid("the constant-boundary problem needs two circles".into()));
    }
    let omega = cfg.omega;
    let fp = geom::fixed_points_closed(cfg);
    let sc = geom::singular_constants(cfg);
    let cdiff = sc.difference();
    if !(cdiff.abs() > 1e-300) {
        return Err(SolverError::DegenerateConstants(cdiff.abs()));
    }
    let n = rule.total_nodes();
    let s = layerpot::assemble_full(rule, KernelKind::SingleLayer, omega).matrix;
    let kstar = layerpot::assemble_full(rule, KernelKind::AdjointDoubleLayer, omega).matrix;
    let size = n + 3;
    let (il1, il2, ia) = (n, n + 1, n + 2);
    let mut m = Mat::<Complex>::zeros(size, size);
    let mut rhs = vec![ZERO; size];
    embed(&mut m, &s, 0, 0, Complex::from(1.0));
    let nodes = boundary_nodes(rule);
    // ∮ ∂_ν q_0 is +1 on ∂B_1 and −1 on ∂B_2 (outward normals); the A_ω part is integrated.
    let mut q_flux = [Complex::from(1.0), Complex::from(-1.0)];
    for (i, &(c, x, nu, w)) in nodes.iter().enumerate() {
        let (qv, qg) = geom::q_omega_with(&fp, omega, x)?;
        m[(i, ia)] = qv;
        m[(i, if c == 0 { il1 } else { il2 })] = Complex::from(-1.0);
        let (v, g) = incident_eval(inc, omega, x);
        rhs[i] = -v;
        let (_, g0) = geom::q0_with(&fp, x)?;
        let dq_a = normal_derivative(qg, nu) - g0.dot(nu);
        q_flux[c] += dq_a * w;
        let row = n + c;
        for j in 0..n {
            let delta = if i == j { 0.5 } else { 0.0 };
            m[(row, j)] += (kstar[(i, j)] + delta) * w;
        }
        rhs[row] -= normal_derivative(g, nu) * w;
    }
    m[(n, ia)] = q_flux[0];
    m[(n + 1, ia)] = q_flux[1];
    m[(n + 2, il1)] = Complex::from(-1.0);
    m[(n + 2, il2)] = Complex::from(1.0);
    m[(n + 2, ia)] = Complex::from(cdiff);
    let solved = linalg::solve_dense(&m, &rhs);
    check_condition(solved.condition, size)?;
    let x = solved.x;
    let psi = x[..n].to_vec();
    let a = x[ia];
    // flux residuals from the jump relation
    let mut flux = vec![ZERO; 2];
    for (c, f) in flux.iter_mut().enumerate() {
        let mut acc = q_flux[c] * a;
        for (i, &(ci, x, nu, w)) in nodes.iter().enumerate() {
            if ci != c {
                continue;
            }
            let mut kpsi = psi[i] * 0.5;
            for j in 0..n {
                kpsi += kstar[(i, j)] * psi[j];
            }
            let (_, g) = incident_eval(inc, omega, x);
            acc += (kpsi + normal_derivative(g, nu)) * w;
        }
        *f = acc;
    }
    Ok(BoundarySolution {
        kind: SolutionKind::ConstantBoundary,
        cfg: Some(*cfg),
        omega,
        permittivity_inclusion: cfg.permittivity_inclusion,
        rule: rule.clone(),
        incident: inc.clone(),
        density: BoundaryDensity::new(psi),
        interior_density: None,
        lambdas: Some((x[il1], x[il2])),
        singular_amplitude: Some(a),
        far_constant: None,
        fixed_points: Some(fp),
        condition_estimate: solved.condition,
        flux,
    })
}

/// Exterior Laplace problem `b_0 = C̃ − u^i_0` on both boundaries, represented
/// as `S^0[φ] + c` with `∮ φ = 0`, so that `b_0 − c = O(|x|^{-1})`.
pub fn solve_b0(
    cfg: &DiskPair,
    inc: &IncidentField,
    rule: &QuadratureRule,
    c_tilde: Complex,
) -> Result<BoundarySolution, SolverError> {
    inc.validate()?;
    let n = rule.total_nodes();
    let s = layerpot::assemble_full(rule, KernelKind::SingleLayer, 0.0).matrix;
    let size = n + 1;
    let mut m = Mat::<Complex>::zeros(size, size);
    embed(&mut m, &s, 0, 0, Complex::from(1.0));
    let mut rhs = vec![ZERO; size];
    for (i, (_, x, _, w)) in boundary_nodes(rule).into_iter().enumerate() {
        m[(i, n)] = Complex::from(1.0);
        m[(n, i)] = Complex::from(w);
        rhs[i] = c_tilde - inc.static_eval(x).0;
    }
    let solved = linalg::solve_dense(&m, &rhs);
    check_condition(solved.condition, size)?;
    Ok(BoundarySolution {
        kind: SolutionKind::LaplaceB0,
        cfg: Some(*cfg),
        omega: 0.0,
        permittivity_inclusion: cfg.permittivity_inclusion,
        rule: rule.clone(),
        incident: inc.clone(),
        density: BoundaryDensity::new(solved.x[..n].to_vec()),
        interior_density: None,
        lambdas: None,
        singular_amplitude: None,
        far_constant: Some(solved.x[n]),
        fixed_points: rule_fixed_points(cfg),
        condition_estimate: solved.condition,
        flux: Vec::new(),
    })
}

fn rule_fixed_points(cfg: &DiskPair) -> Option<FixedPoints> {
    Some(geom::fixed_points_closed(cfg))
}

impl BoundarySolution {
    fn region(&self, x: Point2) -> (Region, bool) {
        let mut region = Region::Exterior;
        let mut near = false;
        for (c, circle) in self.rule.circles.iter().enumerate() {
            let (t, dist) = circle.foot(x);
            if dist < 0.0 {
                region = Region::Interior(c + 1);
            }
            if dist.abs() < 5.0 * circle.local_spacing(t) {
                near = true;
            }
        }
        (region, near)
    }

    /// Regular part `b = u^i + S^ω[ψ]` of a constant-boundary solution, or the
    /// exterior field of the other kinds without the singular term.
    fn regular_part(&self, x: Point2) -> (Complex, (Complex, Complex)) {
        match self.kind {
            SolutionKind::LaplaceB0 => {
                let (v, g) = layerpot::potential_and_gradient(&self.rule, 0.0, &self.density.values, x);
                (v + self.far_constant.unwrap_or(ZERO), g)
            }
            _ => {
                let (v, g) = layerpot::potential_and_gradient(&self.rule, self.omega, &self.density.values, x);
                let (vi, gi) = incident_eval(&self.incident, self.omega, x);
                (v + vi, (g.0 + gi.0, g.1 + gi.1))
            }
        }
    }

    fn singular_part(&self, x: Point2) -> (Complex, (Complex, Complex)) {
        match (self.singular_amplitude, self.fixed_points.as_ref()) {
            (Some(a), Some(fp)) => match geom::q_omega_with(fp, self.omega, x) {
                Ok((v, g)) => (a * v, (a * g.0, a * g.1)),
                Err(_) => (Complex::new(f64::NAN, f64::NAN), (Complex::new(f64::NAN, f64::NAN), ZERO)),
            },
            _ => (ZERO, (ZERO, ZERO)),
        }
    }

    /// Field and gradient at one point; `None` inside an inclusion unless the
    /// solution is of transmission kind.
    pub fn sample(&self, x: Point2) -> Option<FieldSample> {
        let (region, near_boundary) = self.region(x);
        let (value, grad) = match region {
            Region::Exterior => {
                let (vb, gb) = self.regular_part(x);
                let (vq, gq) = self.singular_part(x);
                (vb + vq, (gb.0 + gq.0, gb.1 + gq.1))
            }
            Region::Interior(_) => {
                let inner = self.interior_density.as_ref()?;
                let kc = self.omega * self.permittivity_inclusion.sqrt();
                layerpot::potential_and_gradient(&self.rule, kc, &inner.values, x)
            }
        };
        if near_boundary {
            log::debug!("sample at ({:.6e}, {:.6e}) is close to a boundary", x.x1, x.x2);
        }
        Some(FieldSample { point: x, value, grad, region, near_boundary })
    }

    /// Regular part `b` and its gradient at exterior points.
    pub fn regular_sample(&self, x: Point2) -> (Complex, (Complex, Complex)) {
        self.regular_part(x)
    }

    /// Exterior field at a point on circle `c` at parameter `t`, using the
    /// log-split rule for the circle itself.
    pub fn boundary_value(&self, c: usize, t: f64) -> Complex {
        let circle = &self.rule.circles[c];
        let (x, _, _) = circle.point_at(t);
        let kernel_omega = if self.kind == SolutionKind::LaplaceB0 { 0.0 } else { self.omega };
        let kernel = Kernel { kind: KernelKind::SingleLayer, omega: kernel_omega };
        let mut value = ZERO;
        for (k, other) in self.rule.circles.iter().enumerate() {
            let dens = self.density.on_circle(&self.rule, k);
            if k == c {
                let mut row = vec![ZERO; other.n];
                layerpot::on_circle_row(&kernel, other, t, &mut row);
                value += row.iter().zip(dens).map(|(r, d)| r * d).sum::<Complex>();
            } else {
                let mut row = vec![[ZERO; 1]; other.n];
                layerpot::off_circle_row(other, x, |y, ny| [kernel.eval(x, Point2::ORIGIN, y, ny)], &mut row);
                value += row.iter().zip(dens).map(|(r, d)| r[0] * d).sum::<Complex>();
            }
        }
        match self.kind {
            SolutionKind::LaplaceB0 => value + self.far_constant.unwrap_or(ZERO),
            _ => {
                let (vi, _) = incident_eval(&self.incident, self.omega, x);
                value + vi + self.singular_part(x).0
            }
        }
    }

    /// `max |u − λ_j|` over points halfway between nodes, scaled by `1 + |λ_j|`.
    pub fn boundary_constancy_residual(&self) -> Option<f64> {
        let (l1, l2) = self.lambdas?;
        let mut worst: f64 = 0.0;
        for (c, circle) in self.rule.circles.iter().enumerate() {
            let lambda = if c == 0 { l1 } else { l2 };
            for k in 0..circle.n {
                let t = circle.params[k] + 0.5 * circle.h();
                let r = (self.boundary_value(c, t) - lambda).norm() / (1.0 + lambda.norm());
                worst = worst.max(r);
            }
        }
        Some(worst)
    }
}

/// Field values and gradients at a list of points.
pub fn eval_field(sol: &BoundarySolution, points: &[Point2]) -> Vec<Option<FieldSample>> {
    use rayon::prelude::*;
    points.par_iter().map(|x| sol.sample(*x)).collect()
}

/// The splitting `u = a q_ω + b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub a: Complex,
    pub lambda1: Complex,
    pub lambda2: Complex,
    pub c1: f64,
    pub c2: f64,
    /// `C̃_1 = (λ_2 C_1 − λ_1 C_2)/(C_1 − C_2)`.
    pub c_tilde: Complex,
    /// `max |u − (a q_ω + b)|` over sample points.
    pub reconstruction_residual: f64,
}

pub fn decompose(sol: &BoundarySolution) -> Result<Decomposition, SolverError> {
    let (l1, l2) =
        sol.lambdas.ok_or_else(|| SolverError::Invalid("decomposition needs a constant-boundary solution".into()))?;
    let cfg = sol.cfg.ok_or_else(|| SolverError::Invalid("decomposition needs a two-disk configuration".into()))?;
    let sc = geom::singular_constants(&cfg);
    let cdiff = sc.difference();
    if !(cdiff.abs() > 1e-300) {
        return Err(SolverError::DegenerateConstants(cdiff.abs()));
    }
    let a = (l1 - l2) / cdiff;
    let c_tilde = (l2 * sc.c1 - l1 * sc.c2) / cdiff;
    let fp = sol.fixed_points.unwrap_or_else(|| geom::fixed_points_closed(&cfg));
    let scale = cfg.r1.max(cfg.r2);
    let probes = [Point2::new(0.0, scale), Point2::new(0.0, -2.0 * scale), Point2::new(3.0 * scale, 0.5 * scale)];
    let mut residual: f64 = 0.0;
    for x in probes {
        if let Some(s) = sol.sample(x) {
            let (b, _) = sol.regular_sample(x);
            let (q, _) = geom::q_omega_with(&fp, sol.omega, x)?;
            residual = residual.max((s.value - (a * q + b)).norm());
        }
    }
    Ok(Decomposition { a, lambda1: l1, lambda2: l2, c1: sc.c1, c2: sc.c2, c_tilde, reconstruction_residual: residual })
}

/// Residuals of the singular function on a rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularCheck {
    /// `max_j max_{∂B_j} |q_0 − C_j|`.
    pub constancy: f64,
    /// `∮_{∂B_j} ∂_ν q_0` with outward normals.
    pub flux: [f64; 2],
}

pub fn singular_function_check(cfg: &DiskPair, rule: &QuadratureRule) -> Result<SingularCheck, SolverError> {
    let fp = geom::fixed_points_closed(cfg);
    let sc = geom::singular_constants(cfg);
    let mut constancy: f64 = 0.0;
    let mut flux = [0.0; 2];
    for (c, circle) in rule.circles.iter().enumerate().take(2) {
        let target = if c == 0 { sc.c1 } else { sc.c2 };
        for k in 0..circle.n {
            let (v, g) = geom::q0_with(&fp, circle.nodes[k])?;
            constancy = constancy.max((v - target).abs());
            flux[c] += g.dot(circle.normals[k]) * circle.weights[k];
        }
    }
    Ok(SingularCheck { constancy, flux })
}

/// Area integral `∫_{B_1 ∪ B_2} f` by a Gauss–Legendre (radial) × trapezoid (angular) rule.
pub fn disk_area_integral(cfg: &DiskPair, f: impl Fn(Point2) -> Complex) -> Complex {
    let gl = quad::gauss_legendre(64);
    let m = 64;
    let mut total = ZERO;
    for d in cfg.disks() {
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let rho = 0.5 * d.radius * (x + 1.0);
            let wr = 0.5 * d.radius * w * rho;
            for k in 0..m {
                let phi = 2.0 * PI * k as f64 / m as f64;
                total += f(d.center + Point2::polar(phi) * rho) * (wr * 2.0 * PI / m as f64);
            }
        }
    }
    total
}
