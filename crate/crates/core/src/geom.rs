//! Two-disk geometry: radii `r_j = c_j ε^{α_j}`, reflections, the fixed
//! points `p_1, p_2`, the singular functions `q_0` and `q_ω`, and the closed
//! forms `τ`, `C_j`, `r_-`, `C_0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{self, Complex, Point2};

/// Threshold on `ω ε^{α_-}` above which the configuration leaves the quasi-static regime.
pub const QUASISTATIC_WARN: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid value for {field}: {value}")]
    Invalid { field: &'static str, value: f64 },
    #[error("disk index must be 1 or 2, got {0}")]
    DiskIndex(usize),
    #[error("point coincides with a singularity of {0}")]
    Singular(&'static str),
    #[error("fixed-point iteration did not converge in {0} steps")]
    NoConvergence(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, x: Point2) -> bool {
        (x - self.center).norm() < self.radius
    }

    /// Signed distance to the circle, positive outside.
    pub fn signed_distance(&self, x: Point2) -> f64 {
        (x - self.center).norm() - self.radius
    }
}

/// Full configuration of the two-inclusion problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPair {
    pub r1_coeff: f64,
    pub alpha1: f64,
    pub r2_coeff: f64,
    pub alpha2: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub permittivity_inclusion: f64,
    pub r1: f64,
    pub r2: f64,
    pub z1: Point2,
    pub z2: Point2,
}

impl DiskPair {
    pub fn disk(&self, j: usize) -> Result<Disk, GeomError> {
        match j {
            1 => Ok(Disk { center: self.z1, radius: self.r1 }),
            2 => Ok(Disk { center: self.z2, radius: self.r2 }),
            _ => Err(GeomError::DiskIndex(j)),
        }
    }

    pub fn disks(&self) -> [Disk; 2] {
        [Disk { center: self.z1, radius: self.r1 }, Disk { center: self.z2, radius: self.r2 }]
    }

    pub fn alpha_minus(&self) -> f64 {
        self.alpha1.min(self.alpha2)
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha1.max(self.alpha2)
    }

    /// `ω ε^{α_-}`, the quasi-static admissibility parameter.
    pub fn quasistatic_parameter(&self) -> f64 {
        self.omega * self.epsilon.powf(self.alpha_minus())
    }

    pub fn is_quasistatic(&self) -> bool {
        self.quasistatic_parameter() <= QUASISTATIC_WARN
    }

    /// Whether `x` lies outside both closed disks.
    pub fn is_exterior(&self, x: Point2) -> bool {
        self.disks().iter().all(|d| d.signed_distance(x) > 0.0)
    }

    /// Same physics and shape coefficients at another gap width.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<DiskPair, GeomError> {
        make_config(
            self.r1_coeff,
            self.alpha1,
            self.r2_coeff,
            self.alpha2,
            epsilon,
            self.omega,
            self.permittivity_inclusion,
        )
    }

    /// Same geometry at another frequency.
    pub fn with_omega(&self, omega: f64, permittivity_inclusion: f64) -> Result<DiskPair, GeomError> {
        make_config(
            self.r1_coeff,
            self.alpha1,
            self.r2_coeff,
            self.alpha2,
            self.epsilon,
            omega,
            permittivity_inclusion,
        )
    }

    /// Mirror image across the `x_2` axis: disk 1 and disk 2 trade places.
    pub fn swapped(&self) -> DiskPair {
        make_config(
            self.r2_coeff,
            self.alpha2,
            self.r1_coeff,
            self.alpha1,
            self.epsilon,
            self.omega,
            self.permittivity_inclusion,
        )
        .expect("swapping a valid configuration stays valid")
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), GeomError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeomError::Invalid { field, value })
    }
}

/// Builds a validated [`DiskPair`] and logs a warning outside the quasi-static regime.
pub fn make_config(
    r1_coeff: f64,
    alpha1: f64,
    r2_coeff: f64,
    alpha2: f64,
    epsilon: f64,
    omega: f64,
    permittivity_inclusion: f64,
) -> Result<DiskPair, GeomError> {
    positive("r1_coeff", r1_coeff)?;
    positive("r2_coeff", r2_coeff)?;
    positive("epsilon", epsilon)?;
    positive("permittivity_inclusion", permittivity_inclusion)?;
    if !alpha1.is_finite() {
        return Err(GeomError::Invalid { field: "alpha1", value: alpha1 });
    }
    if !alpha2.is_finite() {
        return Err(GeomError::Invalid { field: "alpha2", value: alpha2 });
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(GeomError::Invalid { field: "omega", value: omega });
    }
    let r1 = r1_coeff * epsilon.powf(alpha1);
    let r2 = r2_coeff * epsilon.powf(alpha2);
    positive("r1", r1)?;
    positive("r2", r2)?;
    let cfg = DiskPair {
        r1_coeff,
        alpha1,
        r2_coeff,
        alpha2,
        epsilon,
        omega,
        permittivity_inclusion,
        r1,
        r2,
        z1: Point2::new(-r1 - 0.5 * epsilon, 0.0),
        z2: Point2::new(r2 + 0.5 * epsilon, 0.0),
    };
    if !cfg.is_quasistatic() {
        log::warn!(
            "omega * epsilon^alpha_- = {:.3e} exceeds {QUASISTATIC_WARN}; outside the quasi-static regime",
            cfg.quasistatic_parameter()
        );
    }
    Ok(cfg)
}

/// Inversion in circle `j`.
pub fn reflect(cfg: &DiskPair, j: usize, x: Point2) -> Result<Point2, GeomError> {
    let d = cfg.disk(j)?;
    let v = x - d.center;
    let n2 = v.norm_sq();
    if n2 == 0.0 {
        return Err(GeomError::Singular("reflect"));
    }
    Ok(v * (d.radius * d.radius / n2) + d.center)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub p1: Point2,
    pub p2: Point2,
}

/// `τ(r_1, r_2, ε)`.
pub fn tau(r1: f64, r2: f64, epsilon: f64) -> f64 {
    let e = epsilon;
    (2.0 * r1 * r2 * (r1 + r2) + (r1 * r1 + 3.0 * r1 * r2 + r2 * r2) * e + (r1 + r2) * e * e + 0.25 * e * e * e)
        .sqrt()
}

pub fn tau_value(cfg: &DiskPair) -> f64 {
    tau(cfg.r1, cfg.r2, cfg.epsilon)
}

/// Closed-form fixed points of `R_1R_2` and `R_2R_1`.
pub fn fixed_points_closed(cfg: &DiskPair) -> FixedPoints {
    let (r1, r2, e) = (cfg.r1, cfg.r2, cfg.epsilon);
    let st = e.sqrt() * tau_value(cfg);
    let den = r1 + r2 + e;
    FixedPoints {
        p1: Point2::new(-((r1 - r2) * e / 2.0 + st) / den, 0.0),
        p2: Point2::new(((r2 - r1) * e / 2.0 + st) / den, 0.0),
    }
}

/// Fixed points by iterating the composed reflections from the gap ends.
///
/// The iteration stops once the extrapolated distance to the limit,
/// `step · λ/(1−λ)` with `λ` the observed contraction, falls below `tol`.
pub fn fixed_points_iterated(cfg: &DiskPair, tol: f64) -> Result<FixedPoints, GeomError> {
    positive("tol", tol)?;
    let iterate = |first: usize, second: usize, start: Point2| -> Result<Point2, GeomError> {
        const CAP: usize = 1_000_000;
        let mut x = start;
        let mut prev_step = f64::INFINITY;
        for _ in 0..CAP {
            let next = reflect(cfg, first, reflect(cfg, second, x)?)?;
            let step = (next - x).norm();
            x = next;
            if step == 0.0 {
                return Ok(x);
            }
            let lambda = step / prev_step;
            if prev_step.is_finite() && lambda < 1.0 && step * lambda / (1.0 - lambda) < tol {
                return Ok(x);
            }
            prev_step = step;
        }
        Err(GeomError::NoConvergence(CAP))
    };
    let half = 0.5 * cfg.epsilon;
    Ok(FixedPoints {
        p1: iterate(1, 2, Point2::new(-half, 0.0))?,
        p2: iterate(2, 1, Point2::new(half, 0.0))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularConstants {
    pub c1: f64,
    pub c2: f64,
}

impl SingularConstants {
    pub fn difference(&self) -> f64 {
        self.c1 - self.c2
    }
}

/// Boundary values `C_j` of `q_0`. The logarithm for `C_1` carries `r_2`
/// and the one for `C_2` carries `r_1`.
pub fn singular_constants(cfg: &DiskPair) -> SingularConstants {
    let se = cfg.epsilon.sqrt();
    let t2 = 2.0 * tau_value(cfg);
    let c = |r: f64| {
        let s = (2.0 * r + cfg.epsilon) * se;
        let arg = (t2 - s) / (t2 + s);
        assert!(arg > 0.0, "logarithm argument must be positive for a valid geometry");
        arg.ln() / (2.0 * PI)
    };
    SingularConstants { c1: c(cfg.r2), c2: -c(cfg.r1) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub r_minus: f64,
    /// Leading coefficient of `τ = C_0 ε^{tau_exponent}(1 + o(1))`.
    pub c0: f64,
    pub tau: f64,
    pub tau_exponent: f64,
    /// `τ / ε^{tau_exponent}` at the configured gap, which tends to `c0`.
    pub c0_at_epsilon: f64,
}

/// Exponents and coefficients of the monomials of `τ²` in `ε`.
fn tau_sq_monomials(cfg: &DiskPair) -> [(f64, f64); 8] {
    let (c1, a1, c2, a2) = (cfg.r1_coeff, cfg.alpha1, cfg.r2_coeff, cfg.alpha2);
    [
        (2.0 * a1 + a2, 2.0 * c1 * c1 * c2),
        (a1 + 2.0 * a2, 2.0 * c1 * c2 * c2),
        (2.0 * a1 + 1.0, c1 * c1),
        (a1 + a2 + 1.0, 3.0 * c1 * c2),
        (2.0 * a2 + 1.0, c2 * c2),
        (a1 + 2.0, c1),
        (a2 + 2.0, c2),
        (3.0, 0.25),
    ]
}

/// `α_±`, `r_-`, and the leading behaviour of `τ`.
///
/// Every monomial of `τ²` has a positive coefficient, so `C_0²` is the sum of
/// the coefficients that share the smallest exponent.
pub fn scale_params(cfg: &DiskPair) -> ScaleParams {
    let (a1, a2) = (cfg.alpha1, cfg.alpha2);
    let am = a1.min(a2);
    let r_minus = if a1 == a2 {
        cfg.r1_coeff + cfg.r2_coeff
    } else {
        (a2 - am) / (a2 - a1) * cfg.r1_coeff + (a1 - am) / (a1 - a2) * cfg.r2_coeff
    };
    let monomials = tau_sq_monomials(cfg);
    let emin = monomials.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let c0_sq: f64 = monomials.iter().filter(|m| (m.0 - emin).abs() < 1e-12).map(|m| m.1).sum();
    let tau = tau_value(cfg);
    let tau_exponent = 0.5 * emin;
    ScaleParams {
        alpha_minus: am,
        alpha_plus: a1.max(a2),
        r_minus,
        c0: c0_sq.sqrt(),
        tau,
        tau_exponent,
        c0_at_epsilon: tau / cfg.epsilon.powf(tau_exponent),
    }
}

/// `q_0` and its gradient.
pub fn q0_eval(cfg: &DiskPair, x: Point2) -> Result<(f64, Point2), GeomError> {
    let fp = fixed_points_closed(cfg);
    q0_with(&fp, x)
}

pub(crate) fn q0_with(fp: &FixedPoints, x: Point2) -> Result<(f64, Point2), GeomError> {
    let d1 = x - fp.p1;
    let d2 = x - fp.p2;
    let (n1, n2) = (d1.norm_sq(), d2.norm_sq());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(GeomError::Singular("q0"));
    }
    let value = (n1.ln() - n2.ln()) / (4.0 * PI);
    let grad = (d1 * (1.0 / n1) - d2 * (1.0 / n2)) * (1.0 / (2.0 * PI));
    Ok((value, grad))
}

/// `q_ω = Γ_ω(x − p_1) − Γ_ω(x − p_2)` and its gradient; reduces to `q_0` at `ω = 0`.
pub fn q_omega_eval(cfg: &DiskPair, x: Point2) -> Result<(Complex, (Complex, Complex)), GeomError> {
    let fp = fixed_points_closed(cfg);
    q_omega_with(&fp, cfg.omega, x)
}

pub(crate) fn q_omega_with(
    fp: &FixedPoints,
    omega: f64,
    x: Point2,
) -> Result<(Complex, (Complex, Complex)), GeomError> {
    let (v0, g0) = q0_with(fp, x)?;
    if omega == 0.0 {
        return Ok((Complex::from(v0), (Complex::from(g0.x1), Complex::from(g0.x2))));
    }
    let d1 = x - fp.p1;
    let d2 = x - fp.p2;
    let (rho1, rho2) = (d1.norm(), d2.norm());
    let av = specfun::a_remainder_radial(rho1, omega) - specfun::a_remainder_radial(rho2, omega);
    let g1 = specfun::da_remainder_radial(rho1, omega) / rho1;
    let g2 = specfun::da_remainder_radial(rho2, omega) / rho2;
    let value = av + v0;
    let grad = (g1 * d1.x1 - g2 * d2.x1 + g0.x1, g1 * d1.x2 - g2 * d2.x2 + g0.x2);
    Ok((value, grad))
}

/// The bracket `(L, 2L)` for the sup of the kernel difference
/// `(x−p_1)/|x−p_1|² − (x−p_2)/|x−p_2|²` in the max-component norm.
pub fn grad_q0_sup_bounds(cfg: &DiskPair) -> (f64, f64) {
    let e = cfg.epsilon;
    let l = (cfg.r1 + cfg.r2 + e) / (-(cfg.r1.max(cfg.r2) + e / 2.0) * e + e.sqrt() * tau_value(cfg));
    (l, 2.0 * l)
}

/// Parameter-free distance from `p_j` to the gap-side point of circle `j`,
/// divided by `r_j`. Equal to `1 − |p_j − z_j|/r_j` without cancellation.
pub(crate) fn pole_depth(cfg: &DiskPair, fp: &FixedPoints, j: usize) -> f64 {
    let half = 0.5 * cfg.epsilon;
    match j {
        1 => (-fp.p1.x1 - half) / cfg.r1,
        _ => (fp.p2.x1 - half) / cfg.r2,
    }
}
