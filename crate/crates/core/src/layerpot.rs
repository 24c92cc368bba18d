//! Dense Nyström discretizations of the single layer `S^ω`, the double layer
//! `D^ω`, the Neumann–Poincaré operator `(K^ω)*` and the remainder operator
//! `A^ω` on a set of circles.
//!
//! Self blocks split the kernel as `M_1(t,s) ln(4 sin²((t−s)/2)) + M_2(t,s)`
//! and integrate the first term with [`crate::quad::log_weight`]. Interactions
//! between a target and a circle it is close to (relative to the local node
//! spacing) are integrated on geometrically refined Gauss panels applied to
//! the trigonometric interpolant of the density; all other interactions use
//! the plain trapezoid weights.

use std::f64::consts::PI;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::geom::DiskPair;
use crate::quad::{self, CircleRule, QuadratureRule};
use crate::specfun::{self, Complex, Point2};

/// A target is integrated with refined panels when its distance to a circle
/// is below this multiple of the local node spacing.
pub const NEAR_FACTOR: f64 = 5.0;

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

/// Integral kernel of a boundary operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    /// `Γ_ω(x − y)`
    SingleLayer,
    /// `∂Γ_ω(x − y)/∂ν_y`
    DoubleLayer,
    /// `∂Γ_ω(x − y)/∂ν_x`
    AdjointDoubleLayer,
    /// `A_ω(x − y)`
    Remainder,
}

/// Density values at the nodes of a rule, circle by circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryDensity {
    pub values: Vec<Complex>,
}

impl BoundaryDensity {
    pub fn new(values: Vec<Complex>) -> Self {
        BoundaryDensity { values }
    }

    /// `∮_{∂B_c} φ ds`.
    pub fn charge(&self, rule: &QuadratureRule, c: usize) -> Complex {
        let off = rule.offset(c);
        rule.circles[c].weights.iter().enumerate().map(|(k, w)| self.values[off + k] * *w).sum()
    }

    pub fn total_charge(&self, rule: &QuadratureRule) -> Complex {
        (0..rule.circles.len()).map(|c| self.charge(rule, c)).sum()
    }

    /// Values on circle `c`.
    pub fn on_circle<'a>(&'a self, rule: &QuadratureRule, c: usize) -> &'a [Complex] {
        let off = rule.offset(c);
        &self.values[off..off + rule.circles[c].n]
    }
}

/// A discretized operator block or the full block matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub matrix: Mat<Complex>,
    pub kind: KernelKind,
    pub omega: f64,
    /// Source circle, or `None` for all circles.
    pub src_circle: Option<usize>,
    /// Target circle, or `None` for all circles.
    pub tgt_circle: Option<usize>,
}

impl DenseOperator {
    pub fn apply(&self, x: &[Complex]) -> Vec<Complex> {
        mat_vec(&self.matrix, x)
    }
}

pub(crate) fn mat_vec(m: &Mat<Complex>, x: &[Complex]) -> Vec<Complex> {
    assert_eq!(m.ncols(), x.len());
    (0..m.nrows())
        .map(|i| {
            let mut acc = ZERO;
            for (j, xj) in x.iter().enumerate() {
                acc += m[(i, j)] * xj;
            }
            acc
        })
        .collect()
}

/// Kernel of `kind` at frequency `omega` between a target and a source point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Kernel {
    pub kind: KernelKind,
    pub omega: f64,
}

impl Kernel {
    pub fn eval(&self, x: Point2, nx: Point2, y: Point2, ny: Point2) -> Complex {
        let d = x - y;
        let rho = d.norm();
        match self.kind {
            KernelKind::SingleLayer => specfun::gamma_radial(rho, self.omega),
            KernelKind::Remainder => {
                if self.omega == 0.0 {
                    ZERO
                } else {
                    specfun::a_remainder_radial(rho, self.omega)
                }
            }
            KernelKind::AdjointDoubleLayer => specfun::dgamma_radial(rho, self.omega) * (d.dot(nx) / rho),
            KernelKind::DoubleLayer => -specfun::dgamma_radial(rho, self.omega) * (d.dot(ny) / rho),
        }
    }

    /// Log coefficient `M_1` and smooth part `M_2` on one circle for
    /// parameter offset `dt` and point distance `rho`. `rho = 0` gives the
    /// diagonal limits, where `speed` is `|x'(t)|`.
    fn split_on_circle(&self, radius: f64, rho: f64, dt: f64, speed: f64) -> (Complex, Complex) {
        let w = self.omega;
        match self.kind {
            KernelKind::SingleLayer => {
                if rho == 0.0 {
                    let m2 = speed.ln() / (2.0 * PI);
                    let a = if w == 0.0 { ZERO } else { specfun::a_omega_unchecked(w) };
                    let m1 = Complex::from(1.0 / (4.0 * PI));
                    return (m1, a + m2);
                }
                let j0 = if w == 0.0 { 1.0 } else { specfun::j0_unchecked(w * rho) };
                let m1 = Complex::from(j0 / (4.0 * PI));
                let full = specfun::gamma_radial(rho, w);
                (m1, full - m1 * log4sin2(dt))
            }
            KernelKind::Remainder => {
                if w == 0.0 || rho == 0.0 {
                    return (ZERO, ZERO);
                }
                let j0 = specfun::j0_unchecked(w * rho);
                let m1 = Complex::from((j0 - 1.0) / (4.0 * PI));
                let full = specfun::a_remainder_radial(rho, w);
                (m1, full - m1 * log4sin2(dt))
            }
            KernelKind::AdjointDoubleLayer | KernelKind::DoubleLayer => {
                // On a circle both kernels equal Γ'(ρ) ρ / (2r).
                let lap = Complex::from(1.0 / (4.0 * PI * radius));
                if w == 0.0 || rho == 0.0 {
                    return (ZERO, lap);
                }
                let (j1, _) = specfun::j1y1_unchecked(w * rho);
                let m1 = Complex::from(-w * j1 * rho / (8.0 * PI * radius));
                let full = specfun::dgamma_radial(rho, w) * (rho / (2.0 * radius));
                (m1, full - m1 * log4sin2(dt))
            }
        }
    }
}

fn log4sin2(dt: f64) -> f64 {
    let s = (0.5 * dt).sin();
    (4.0 * s * s).ln()
}

/// Row of the self block of circle `c` at target node `i`.
fn self_row(kernel: &Kernel, circle: &CircleRule, corr: &quad::LogCorrection, i: usize, out: &mut [Complex]) {
    let h = circle.h();
    let xi = circle.nodes[i];
    for j in 0..circle.n {
        let rho = if i == j { 0.0 } else { (xi - circle.nodes[j]).norm() };
        let dt = circle.params[i] - circle.params[j];
        let (m1, m2) = kernel.split_on_circle(circle.radius, rho, dt, circle.speeds[i]);
        out[j] = (m1 * corr.weight(i, j) + m2 * h) * circle.speeds[j];
    }
}

/// Row of weights mapping the density on `src` to the integral of
/// `kern(y, ν_y)` against it, for a target `x` off the circle.
pub(crate) fn off_circle_row<const K: usize>(
    src: &CircleRule,
    x: Point2,
    kern: impl Fn(Point2, Point2) -> [Complex; K],
    out: &mut [[Complex; K]],
) {
    let (t_foot, dist) = src.foot(x);
    let spacing = src.local_spacing(t_foot);
    if dist.abs() >= NEAR_FACTOR * spacing {
        for j in 0..src.n {
            let k = kern(src.nodes[j], src.normals[j]);
            for c in 0..K {
                out[j][c] = k[c] * src.weights[j];
            }
        }
        return;
    }
    for o in out.iter_mut() {
        *o = [ZERO; K];
    }
    let dpar = dist.abs() / (spacing / src.h());
    let (ts, ws) = src.panels_toward(t_foot, dpar);
    let mut card = vec![0.0; src.n];
    for (t, w) in ts.iter().zip(&ws) {
        let (y, ny, speed) = src.point_at(*t);
        let k = kern(y, ny);
        let scale = w * speed;
        let kw: [Complex; K] = std::array::from_fn(|c| k[c] * scale);
        src.cardinal_into(*t, &mut card);
        for (o, l) in out.iter_mut().zip(&card) {
            for c in 0..K {
                o[c] += kw[c] * *l;
            }
        }
    }
}

/// Row of weights for a target lying on `src` at parameter `t`, using the
/// log-split rule at a non-node parameter.
pub(crate) fn on_circle_row(kernel: &Kernel, src: &CircleRule, t: f64, out: &mut [Complex]) {
    let (x, _, speed_x) = src.point_at(t);
    let h = src.h();
    for j in 0..src.n {
        let dt = t - src.params[j];
        let rho = (x - src.nodes[j]).norm();
        let (m1, m2) = if rho < 1e-14 * src.radius {
            kernel.split_on_circle(src.radius, 0.0, dt, speed_x)
        } else {
            kernel.split_on_circle(src.radius, rho, dt, speed_x)
        };
        out[j] = (m1 * quad::log_weight(src.n, dt) + m2 * h) * src.speeds[j];
    }
}

fn assemble_block(rule: &QuadratureRule, kernel: Kernel, src: usize, tgt: usize) -> Mat<Complex> {
    let s = &rule.circles[src];
    let t = &rule.circles[tgt];
    let rows: Vec<Vec<Complex>> = (0..t.n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![ZERO; s.n];
            if src == tgt {
                let corr = quad::log_correction(rule, src);
                self_row(&kernel, s, &corr, i, &mut row);
            } else {
                let x = t.nodes[i];
                let nx = t.normals[i];
                let mut tmp = vec![[ZERO; 1]; s.n];
                off_circle_row(s, x, |y, ny| [kernel.eval(x, nx, y, ny)], &mut tmp);
                for (r, v) in row.iter_mut().zip(tmp) {
                    *r = v[0];
                }
            }
            row
        })
        .collect();
    Mat::from_fn(t.n, s.n, |i, j| rows[i][j])
}

fn block_op(rule: &QuadratureRule, kind: KernelKind, omega: f64, src: usize, tgt: usize) -> DenseOperator {
    DenseOperator {
        matrix: assemble_block(rule, Kernel { kind, omega }, src, tgt),
        kind,
        omega,
        src_circle: Some(src),
        tgt_circle: Some(tgt),
    }
}

/// `S^ω` from circle `src` to the nodes of circle `tgt`.
pub fn assemble_slp(rule: &QuadratureRule, omega: f64, src: usize, tgt: usize) -> DenseOperator {
    block_op(rule, KernelKind::SingleLayer, omega, src, tgt)
}

/// `(K^ω)*` on a circle, or `∂_ν S^ω` from `src` evaluated on `tgt`.
pub fn assemble_kstar(rule: &QuadratureRule, omega: f64, src: usize, tgt: usize) -> DenseOperator {
    block_op(rule, KernelKind::AdjointDoubleLayer, omega, src, tgt)
}

/// `K^ω` on a circle, or `D^ω` from `src` evaluated on `tgt`.
pub fn assemble_dlp(rule: &QuadratureRule, omega: f64, src: usize, tgt: usize) -> DenseOperator {
    block_op(rule, KernelKind::DoubleLayer, omega, src, tgt)
}

/// `A^ω` block from `src` to `tgt`.
pub fn assemble_remainder(rule: &QuadratureRule, omega: f64, src: usize, tgt: usize) -> DenseOperator {
    block_op(rule, KernelKind::Remainder, omega, src, tgt)
}

/// Full block matrix over all circles of the rule.
pub fn assemble_full(rule: &QuadratureRule, kind: KernelKind, omega: f64) -> DenseOperator {
    let total = rule.total_nodes();
    let mut m = Mat::<Complex>::zeros(total, total);
    for tgt in 0..rule.circles.len() {
        for src in 0..rule.circles.len() {
            let b = assemble_block(rule, Kernel { kind, omega }, src, tgt);
            let (ro, co) = (rule.offset(tgt), rule.offset(src));
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    m[(ro + i, co + j)] = b[(i, j)];
                }
            }
        }
    }
    DenseOperator { matrix: m, kind, omega, src_circle: None, tgt_circle: None }
}

/// The block operators `𝕊`, `𝕂*`, `𝕂` and `𝔸^ω`.
#[derive(Clone, Debug)]
pub struct BlockOperators {
    pub s: DenseOperator,
    pub kstar: DenseOperator,
    pub k: DenseOperator,
    pub a: DenseOperator,
}

/// `𝕊` and `𝕂*`, `𝕂` are at `ω = 0`; `𝔸^ω` is at the given frequency.
pub fn block_operators(_cfg: &DiskPair, rule: &QuadratureRule, omega: f64) -> BlockOperators {
    BlockOperators {
        s: assemble_full(rule, KernelKind::SingleLayer, 0.0),
        kstar: assemble_full(rule, KernelKind::AdjointDoubleLayer, 0.0),
        k: assemble_full(rule, KernelKind::DoubleLayer, 0.0),
        a: assemble_full(rule, KernelKind::Remainder, omega),
    }
}

/// Norm `(Σ w_i |v_i|²)^{1/2}`.
pub fn weighted_norm(weights: &[f64], v: &[Complex]) -> f64 {
    weights.iter().zip(v).map(|(w, x)| w * x.norm_sqr()).sum::<f64>().sqrt()
}

/// Seeded random real densities in `[−1, 1]`.
pub fn random_densities(len: usize, count: usize, seed: u64) -> Vec<Vec<Complex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..len).map(|_| Complex::from(rng.random_range(-1.0..=1.0))).collect()).collect()
}

pub const CALDERON_SEED: u64 = 0x5eed;

/// `max ‖(𝕊𝕂* − 𝕂𝕊)φ‖ / ‖φ‖` over ten seeded random densities.
pub fn calderon_residual(cfg: &DiskPair, rule: &QuadratureRule) -> f64 {
    let ops = block_operators(cfg, rule, 0.0);
    calderon_residual_with(&ops.s.matrix, &ops.kstar.matrix, &ops.k.matrix, &rule.all_weights(), CALDERON_SEED)
}

pub(crate) fn calderon_residual_with(
    s: &Mat<Complex>,
    kstar: &Mat<Complex>,
    k: &Mat<Complex>,
    weights: &[f64],
    seed: u64,
) -> f64 {
    random_densities(weights.len(), 10, seed)
        .iter()
        .map(|phi| {
            let lhs = mat_vec(s, &mat_vec(kstar, phi));
            let rhs = mat_vec(k, &mat_vec(s, phi));
            let diff: Vec<Complex> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            weighted_norm(weights, &diff) / weighted_norm(weights, phi)
        })
        .fold(0.0, f64::max)
}

/// Calderón residual with a caller-chosen seed.
pub fn calderon_residual_seeded(cfg: &DiskPair, rule: &QuadratureRule, seed: u64) -> f64 {
    let ops = block_operators(cfg, rule, 0.0);
    calderon_residual_with(&ops.s.matrix, &ops.kstar.matrix, &ops.k.matrix, &rule.all_weights(), seed)
}

/// `max ‖S^ω φ − (a_ω ∫φ + 𝕊 φ + 𝔸^ω φ)‖ / ‖φ‖` over `count` seeded random densities.
pub fn splitting_residual(rule: &QuadratureRule, omega: f64, count: usize, seed: u64) -> f64 {
    let full = assemble_full(rule, KernelKind::SingleLayer, omega).matrix;
    let s0 = assemble_full(rule, KernelKind::SingleLayer, 0.0).matrix;
    let a = assemble_full(rule, KernelKind::Remainder, omega).matrix;
    let weights = rule.all_weights();
    let aw = if omega == 0.0 { ZERO } else { specfun::a_omega_unchecked(omega) };
    random_densities(weights.len(), count, seed)
        .iter()
        .map(|phi| {
            let charge: Complex = weights.iter().zip(phi).map(|(w, p)| p * *w).sum();
            let lhs = mat_vec(&full, phi);
            let (p0, pa) = (mat_vec(&s0, phi), mat_vec(&a, phi));
            let diff: Vec<Complex> = (0..lhs.len()).map(|i| lhs[i] - (aw * charge + p0[i] + pa[i])).collect();
            weighted_norm(&weights, &diff) / weighted_norm(&weights, phi)
        })
        .fold(0.0, f64::max)
}

/// `max |(W S)_{ij} − (W S)_{ji}|` relative to `max |W S|` for the static single layer.
pub fn reciprocity_defect(rule: &QuadratureRule) -> f64 {
    let s = assemble_full(rule, KernelKind::SingleLayer, 0.0).matrix;
    let w = rule.all_weights();
    let n = w.len();
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = s[(i, j)] * w[i];
            scale = scale.max(a.norm());
            if j > i {
                defect = defect.max((a - s[(j, i)] * w[j]).norm());
            }
        }
    }
    defect / scale
}

/// Largest relative defect of `∂_ν S^ω[φ]|_± = (±1/2 + (K^ω)*)[φ]` for a smooth
/// test density, with the one-sided limits replaced by evaluation at distance
/// `offset` along the normal, over every `stride`-th node.
pub fn jump_residual(rule: &QuadratureRule, omega: f64, offset: f64, stride: usize) -> f64 {
    let density: Vec<Complex> = rule
        .circles
        .iter()
        .flat_map(|c| c.node_angles.iter().map(|&th| Complex::new((2.0 * th).cos() + 0.3 * th.sin(), 0.2 * th.cos())))
        .collect();
    let kstar = mat_vec(&assemble_full(rule, KernelKind::AdjointDoubleLayer, omega).matrix, &density);
    let scale = kstar.iter().zip(&density).map(|(k, d)| (k + 0.5 * d).norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (c, circle) in rule.circles.iter().enumerate() {
        let off = rule.offset(c);
        for k in (0..circle.n).step_by(stride.max(1)) {
            let (y, nu) = (circle.nodes[k], circle.normals[k]);
            for side in [1.0, -1.0] {
                let x = y + nu * (side * offset * circle.radius);
                let (_, g) = potential_and_gradient(rule, omega, &density, x);
                let dn = g.0 * nu.x1 + g.1 * nu.x2;
                let want = kstar[off + k] + density[off + k] * (0.5 * side);
                worst = worst.max((dn - want).norm() / scale);
            }
        }
    }
    worst
}

/// Single layer `S^ω[φ](x)` and its gradient at an off-boundary point,
/// summed over all circles.
pub fn potential_and_gradient(
    rule: &QuadratureRule,
    omega: f64,
    density: &[Complex],
    x: Point2,
) -> (Complex, (Complex, Complex)) {
    let mut value = ZERO;
    let mut gx = ZERO;
    let mut gy = ZERO;
    for (c, circle) in rule.circles.iter().enumerate() {
        let off = rule.offset(c);
        let mut row = vec![[ZERO; 3]; circle.n];
        off_circle_row(
            circle,
            x,
            |y, _| {
                let d = x - y;
                let rho = d.norm();
                let g = specfun::dgamma_radial(rho, omega) / rho;
                [specfun::gamma_radial(rho, omega), g * d.x1, g * d.x2]
            },
            &mut row,
        );
        for (j, r) in row.iter().enumerate() {
            let phi = density[off + j];
            value += r[0] * phi;
            gx += r[1] * phi;
            gy += r[2] * phi;
        }
    }
    (value, (gx, gy))
}
