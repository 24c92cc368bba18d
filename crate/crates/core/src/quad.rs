//! Trapezoid rules on the circles in a graded periodic parameter, the
//! periodic log-kernel weights, and the panel rules used for targets close
//! to a boundary.
//!
//! Circle `j` is parameterized by `t ∈ [−π, π)`, with the polar angle
//! measured from the gap-facing pole given by a smooth increasing map
//! `θ(t)`. The inverse map is
//!
//! ```text
//! t(θ) = (1 − μ) θ + μ · mean_k 2 atan2(sin(θ/2)/κ_k, cos(θ/2))
//! ```
//!
//! Each term is the circle automorphism that sends the pole `p_j` to the
//! center, so a trapezoid rule in `t` resolves functions whose only nearby
//! singularity is at `p_j`. Using several `κ_k` spaced geometrically between
//! `κ_*` and 1 keeps the density of nodes finite on the far side of small
//! disks.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{self, DiskPair};
use crate::specfun::Point2;

const TWO_PI: f64 = 2.0 * PI;

/// Ratio between consecutive `κ_k` levels.
const KAPPA_RATIO: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("nodes per circle must be even and at least 16, got {0}")]
    NodeCount(usize),
    #[error("grading exponent must be finite and at least 1, got {0}")]
    Grading(f64),
}

/// Reparameterization `θ ↦ t` of one circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grading {
    pub mu: f64,
    pub kappas: Vec<f64>,
}

impl Grading {
    pub fn uniform() -> Self {
        Grading { mu: 0.0, kappas: Vec::new() }
    }

    /// Grading toward a pole at relative depth `depth = 1 − |p − z|/r` inside
    /// the circle, with blend weight `mu`.
    pub fn toward_pole(depth: f64, mu: f64) -> Self {
        if mu == 0.0 || !(depth > 0.0 && depth < 1.0) {
            return Grading::uniform();
        }
        let zeta = 1.0 - depth;
        let k0 = depth / (1.0 + zeta);
        let levels = ((1.0 / k0).ln() / KAPPA_RATIO.ln()).ceil().max(1.0) as usize;
        let kappas = (0..levels).map(|k| k0.powf(1.0 - k as f64 / levels as f64)).collect();
        Grading { mu, kappas }
    }

    fn is_uniform(&self) -> bool {
        self.mu == 0.0 || self.kappas.is_empty()
    }

    /// `t(θ)` for `θ ∈ [−π, π]`.
    fn t_of_principal(&self, th: f64) -> f64 {
        if self.is_uniform() {
            return th;
        }
        let (s, c) = (0.5 * th).sin_cos();
        let m: f64 = self.kappas.iter().map(|k| 2.0 * (s / k).atan2(c)).sum::<f64>() / self.kappas.len() as f64;
        (1.0 - self.mu) * th + self.mu * m
    }

    /// `dt/dθ`.
    pub fn dt_dtheta(&self, th: f64) -> f64 {
        if self.is_uniform() {
            return 1.0;
        }
        let (s, c) = (0.5 * th).sin_cos();
        let m: f64 =
            self.kappas.iter().map(|k| (1.0 / k) / (c * c + s * s / (k * k))).sum::<f64>() / self.kappas.len() as f64;
        (1.0 - self.mu) + self.mu * m
    }

    /// `t(θ)` for any real `θ`, using `t(θ + 2π) = t(θ) + 2π`.
    pub fn t_of(&self, th: f64) -> f64 {
        let shift = (th / TWO_PI).round() * TWO_PI;
        self.t_of_principal(th - shift) + shift
    }

    /// `θ(t)` by safeguarded Newton iteration.
    pub fn theta_of(&self, t: f64) -> f64 {
        if self.is_uniform() {
            return t;
        }
        let shift = (t / TWO_PI).round() * TWO_PI;
        let tw = t - shift;
        let (mut lo, mut hi) = (-PI, PI);
        let mut th = tw * self.kappas[0].min(1.0);
        for _ in 0..200 {
            let f = self.t_of_principal(th) - tw;
            if f == 0.0 {
                break;
            }
            if f < 0.0 {
                lo = th;
            } else {
                hi = th;
            }
            let mut next = th - f / self.dt_dtheta(th);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - th).abs() <= 1e-16 * (1.0 + th.abs());
            th = next;
            if done || hi - lo < 1e-16 {
                break;
            }
        }
        th + shift
    }
}

/// Nodes and weights on one circle.
#[derive(Clone, Debug, Serialize)]
pub struct CircleRule {
    pub center: Point2,
    pub radius: f64,
    pub n: usize,
    /// Polar angles of the nodes, strictly increasing in `[0, 2π)`.
    pub node_angles: Vec<f64>,
    pub nodes: Vec<Point2>,
    /// Unit normals pointing away from the center.
    pub normals: Vec<Point2>,
    /// Arc-length weights.
    pub weights: Vec<f64>,
    /// Parameter values `t_k = t_start + k h`.
    pub params: Vec<f64>,
    /// Speed `|x'(t)| = r θ'(t)` at the nodes.
    pub speeds: Vec<f64>,
    /// Polar angle of the point where `θ = 0`.
    pub pole_angle: f64,
    pub grading: Grading,
}

impl CircleRule {
    pub fn new(center: Point2, radius: f64, n: usize, pole_angle: f64, grading: Grading) -> Self {
        let h = TWO_PI / n as f64;
        // Starting at t = −pole_angle makes the first node sit at polar angle 0.
        let t_start = -pole_angle;
        let mut rule = CircleRule {
            center,
            radius,
            n,
            node_angles: Vec::with_capacity(n),
            nodes: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            params: Vec::with_capacity(n),
            speeds: Vec::with_capacity(n),
            pole_angle,
            grading,
        };
        for k in 0..n {
            let t = t_start + k as f64 * h;
            let th = rule.grading.theta_of(t);
            let phi = (pole_angle + th).rem_euclid(TWO_PI);
            let nu = Point2::polar(phi);
            let speed = radius / rule.grading.dt_dtheta(th);
            rule.params.push(t);
            rule.node_angles.push(if k == 0 { 0.0 } else { phi });
            rule.nodes.push(center + nu * radius);
            rule.normals.push(nu);
            rule.speeds.push(speed);
            rule.weights.push(speed * h);
        }
        rule
    }

    pub fn h(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Position, outward normal and speed at parameter `t`.
    pub fn point_at(&self, t: f64) -> (Point2, Point2, f64) {
        let th = self.grading.theta_of(t);
        let nu = Point2::polar(self.pole_angle + th);
        (self.center + nu * self.radius, nu, self.radius / self.grading.dt_dtheta(th))
    }

    /// Parameter of the radial projection of `x`, and the signed distance to the circle.
    pub fn foot(&self, x: Point2) -> (f64, f64) {
        let v = x - self.center;
        let phi = v.x2.atan2(v.x1);
        let th = (phi - self.pole_angle + PI).rem_euclid(TWO_PI) - PI;
        (self.grading.t_of(th), v.norm() - self.radius)
    }

    /// Arc length between neighbouring nodes around parameter `t`.
    pub fn local_spacing(&self, t: f64) -> f64 {
        let th = self.grading.theta_of(t);
        self.radius / self.grading.dt_dtheta(th) * self.h()
    }

    /// Values at `t` of the trigonometric cardinal functions of the nodes.
    pub fn cardinal_into(&self, t: f64, out: &mut [f64]) {
        let n = self.n;
        let h = self.h();
        let delta = t - self.params[0];
        let half = 0.5 * delta;
        let (sa, ca) = half.sin_cos();
        let s = (0.5 * n as f64 * delta).sin();
        let tables = cardinal_tables(n);
        for j in 0..n {
            let (sb, cb) = tables[j];
            let sd = sa * cb - ca * sb;
            if sd.abs() > 0.1 {
                let cd = ca * cb + sa * sb;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out[j] = sign * s * cd / (n as f64 * sd);
            } else {
                let d = (delta - j as f64 * h + PI).rem_euclid(TWO_PI) - PI;
                out[j] = if d == 0.0 { 1.0 } else { (0.5 * n as f64 * d).sin() / (n as f64 * (0.5 * d).tan()) };
            }
        }
    }

    /// Panel quadrature in `t` over one period, refined geometrically toward `t_foot`
    /// down to width `dpar`. Returns parameter nodes and weights.
    pub fn panels_toward(&self, t_foot: f64, dpar: f64) -> (Vec<f64>, Vec<f64>) {
        let h = self.h();
        let coarse = 4.0 * h;
        let mut edges = vec![0.0];
        let mut w = dpar.max(1e-300).min(coarse);
        let mut e = 0.0;
        while e + w < coarse && e + w < PI {
            e += w;
            edges.push(e);
            w *= 2.0;
        }
        while e + coarse < PI {
            e += coarse;
            edges.push(e);
        }
        edges.push(PI);
        let gl = gauss_legendre(16);
        let mut ts = Vec::with_capacity(2 * 16 * edges.len());
        let mut ws = Vec::with_capacity(2 * 16 * edges.len());
        for side in [-1.0, 1.0] {
            for pair in edges.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let mid = 0.5 * (a + b);
                let rad = 0.5 * (b - a);
                for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                    ts.push(t_foot + side * (mid + rad * x));
                    ws.push(rad * wt);
                }
            }
        }
        (ts, ws)
    }
}

fn cardinal_tables(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(usize, &'static [(f64, f64)])>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("cardinal table cache poisoned");
    if let Some((_, t)) = guard.iter().find(|(m, _)| *m == n) {
        return t;
    }
    let h = TWO_PI / n as f64;
    let table: Vec<(f64, f64)> = (0..n).map(|j| (0.5 * j as f64 * h).sin_cos()).collect();
    let leaked: &'static [(f64, f64)] = Box::leak(table.into_boxed_slice());
    guard.push((n, leaked));
    leaked
}

/// Discretization of the boundary of one or two disks.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub circles: Vec<CircleRule>,
    pub grading_exponent: f64,
    /// Smallest arc spacing among nodes facing the gap.
    pub min_gap_spacing: f64,
    /// Set when `min_gap_spacing` exceeds `0.3 √(ε min(r_1, r_2))`.
    pub resolution_warning: bool,
}

impl QuadratureRule {
    pub fn total_nodes(&self) -> usize {
        self.circles.iter().map(|c| c.n).sum()
    }

    /// Index of the first node of circle `c` in the stacked ordering.
    pub fn offset(&self, c: usize) -> usize {
        self.circles[..c].iter().map(|c| c.n).sum()
    }

    pub fn all_weights(&self) -> Vec<f64> {
        self.circles.iter().flat_map(|c| c.weights.iter().copied()).collect()
    }
}

/// Blend weight of the pole-concentrating maps for a grading exponent `g`.
pub fn grading_blend(g: f64) -> f64 {
    (g - 1.0) / (g + 1.0)
}

fn check_rule_args(n: usize, grading_exponent: f64) -> Result<(), QuadError> {
    if n < 16 || n % 2 == 1 {
        return Err(QuadError::NodeCount(n));
    }
    if !(grading_exponent >= 1.0 && grading_exponent.is_finite()) {
        return Err(QuadError::Grading(grading_exponent));
    }
    Ok(())
}

/// Rule on both circles of `cfg`, graded toward the fixed points.
pub fn build_rule(cfg: &DiskPair, n_per_circle: usize, grading_exponent: f64) -> Result<QuadratureRule, QuadError> {
    check_rule_args(n_per_circle, grading_exponent)?;
    let fp = geom::fixed_points_closed(cfg);
    let mu = grading_blend(grading_exponent);
    let c1 = CircleRule::new(cfg.z1, cfg.r1, n_per_circle, 0.0, Grading::toward_pole(geom::pole_depth(cfg, &fp, 1), mu));
    let c2 = CircleRule::new(cfg.z2, cfg.r2, n_per_circle, PI, Grading::toward_pole(geom::pole_depth(cfg, &fp, 2), mu));
    // the pole node is k = 0 on circle 1 and k = n/2 on circle 2
    let min_gap_spacing = c1.weights[0].min(c2.weights[n_per_circle / 2]);
    let limit = 0.3 * (cfg.epsilon * cfg.r1.min(cfg.r2)).sqrt();
    let resolution_warning = min_gap_spacing > limit;
    if resolution_warning {
        log::warn!("gap node spacing {min_gap_spacing:.3e} exceeds the resolution target {limit:.3e}");
    }
    Ok(QuadratureRule { circles: vec![c1, c2], grading_exponent, min_gap_spacing, resolution_warning })
}

/// Uniform rule on a single circle.
pub fn build_single_rule(center: Point2, radius: f64, n: usize) -> Result<QuadratureRule, QuadError> {
    check_rule_args(n, 1.0)?;
    let c = CircleRule::new(center, radius, n, 0.0, Grading::uniform());
    let spacing = c.weights[0];
    Ok(QuadratureRule { circles: vec![c], grading_exponent: 1.0, min_gap_spacing: spacing, resolution_warning: false })
}

/// Weights `R_j(t)` such that `∫ ln(4 sin²((t−s)/2)) f(s) ds ≈ Σ_j R_j(t) f(t_j)`
/// for a trapezoid grid of `n` points, at offset `d = t − t_j`.
pub fn log_weight(n: usize, d: f64) -> f64 {
    let m = n / 2;
    let mf = m as f64;
    let mut sum = 0.0;
    for k in 1..m {
        sum += (k as f64 * d).cos() / k as f64;
    }
    -(TWO_PI / mf) * sum - PI / (mf * mf) * (mf * d).cos()
}

/// Log-singularity correction table of one circle.
#[derive(Clone, Debug, PartialEq)]
pub struct LogCorrection {
    /// `R[m]` is the weight at node offset `i − j ≡ m (mod n)`.
    pub weights: Vec<f64>,
}

impl LogCorrection {
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let n = self.weights.len();
        self.weights[(i + n - j) % n]
    }
}

/// Periodic log-quadrature weights for the self-interaction block of circle `c`.
pub fn log_correction(rule: &QuadratureRule, c: usize) -> LogCorrection {
    let n = rule.circles[c].n;
    let h = TWO_PI / n as f64;
    LogCorrection { weights: (0..n).map(|m| log_weight(n, m as f64 * h)).collect() }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static G16: OnceLock<GaussLegendre> = OnceLock::new();
    static G64: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        16 => G16.get_or_init(|| compute_gauss_legendre(16)),
        64 => G64.get_or_init(|| compute_gauss_legendre(64)),
        _ => Box::leak(Box::new(compute_gauss_legendre(n))),
    }
}

fn compute_gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}
