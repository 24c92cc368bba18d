//! Separation-of-variables solution for one disk centered at the origin.

use std::f64::consts::PI;

use super::{FieldSample, IncidentField, IncidentKind, Region, SolverError};
use crate::specfun::{self, Complex, Point2};

const I: Complex = Complex { re: 0.0, im: 1.0 };

/// Mode coefficients for a unit plane wave: `β_m` multiplies `i^m H_m(ωρ) e^{imφ}`
/// outside and `γ_m` multiplies `i^m J_m(k_c ρ) e^{imφ}` inside, with
/// `φ` measured from the propagation direction.
#[derive(Clone, Debug, PartialEq)]
pub struct MieCoefficients {
    pub omega: f64,
    pub radius: f64,
    pub permittivity_inclusion: f64,
    pub scattered: Vec<Complex>,
    pub interior: Vec<Complex>,
}

fn derivatives(values: &[f64], x: f64) -> Vec<f64> {
    (0..values.len())
        .map(|m| if m == 0 { -values[1] } else { values[m - 1] - m as f64 / x * values[m] })
        .collect()
}

pub fn mie_coefficients(radius: f64, permittivity_inclusion: f64, omega: f64) -> Result<MieCoefficients, SolverError> {
    if !(radius > 0.0 && omega > 0.0 && permittivity_inclusion > 0.0) {
        return Err(SolverError::Invalid("series solution needs positive radius, frequency and permittivity".into()));
    }
    let kc = omega * permittivity_inclusion.sqrt();
    let x = omega * radius;
    let xk = kc * radius;
    let modes = 20usize.max((2.0 * x).ceil() as usize + 20);
    let j = specfun::bessel_jn_sequence(modes + 1, x);
    let y = specfun::bessel_yn_sequence(modes + 1, x);
    let jk = specfun::bessel_jn_sequence(modes + 1, xk);
    let (dj, dy, djk) = (derivatives(&j, x), derivatives(&y, x), derivatives(&jk, xk));
    let mut scattered = Vec::with_capacity(modes + 1);
    let mut interior = Vec::with_capacity(modes + 1);
    for m in 0..=modes {
        let h = Complex::new(j[m], y[m]);
        let dh = Complex::new(dj[m], dy[m]);
        if !(h.re.is_finite() && h.im.is_finite() && dh.re.is_finite() && dh.im.is_finite()) {
            break;
        }
        let ratio = kc / permittivity_inclusion;
        let det = -ratio * djk[m] * h + omega * jk[m] * dh;
        scattered.push((ratio * j[m] * djk[m] - omega * jk[m] * dj[m]) / det);
        interior.push(omega * (j[m] * dh - h * dj[m]) / det);
    }
    Ok(MieCoefficients { omega, radius, permittivity_inclusion, scattered, interior })
}

fn plane_waves(inc: &IncidentField, omega: f64) -> Result<Vec<(Complex, f64)>, SolverError> {
    let theta = inc.direction.x2.atan2(inc.direction.x1);
    let coef = |k: usize| inc.coefficients.get(k).copied().unwrap_or_default();
    Ok(match inc.kind {
        IncidentKind::PlaneWave => vec![(Complex::from(1.0), theta)],
        IncidentKind::NormalizedGradientPair => {
            let amp = (2.0 * I * omega).inv();
            vec![(amp, theta), (-amp, theta + PI)]
        }
        IncidentKind::CustomCombination => {
            if coef(0) != Complex::default() {
                return Err(SolverError::Invalid("a constant incident term is not a Helmholtz solution".into()));
            }
            vec![(coef(1), theta), (coef(2), theta + PI)]
        }
    })
}

/// Field and gradient `∂_ρ`, `ρ^{-1} ∂_φ` of the mode sum
/// `Σ_m c_m i^m Z_m(kρ) e^{imφ}` with `c_{−m} = c_m`.
fn mode_sum(coeffs: &[Complex], z: &[Complex], dz: &[Complex], k: f64, rho: f64, phi: f64) -> (Complex, Complex, Complex) {
    let mut value = Complex::default();
    let mut radial = Complex::default();
    let mut angular = Complex::default();
    let mut im = Complex::from(1.0);
    for m in 0..coeffs.len() {
        let c = coeffs[m] * im;
        if m == 0 {
            value += c * z[0];
            radial += c * k * dz[0];
        } else {
            let (s, co) = (m as f64 * phi).sin_cos();
            value += c * z[m] * (2.0 * co);
            radial += c * k * dz[m] * (2.0 * co);
            angular += c * z[m] * (-2.0 * m as f64 * s / rho);
        }
        im *= I;
    }
    (value, radial, angular)
}

/// Total field at `points` for a disk of radius `r` at the origin.
pub fn mie_single_disk(
    r: f64,
    permittivity_inclusion: f64,
    omega: f64,
    inc: &IncidentField,
    points: &[Point2],
) -> Result<Vec<FieldSample>, SolverError> {
    inc.validate()?;
    let mc = mie_coefficients(r, permittivity_inclusion, omega)?;
    let waves = plane_waves(inc, omega)?;
    let kc = omega * permittivity_inclusion.sqrt();
    let modes = mc.scattered.len();
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let rho = x.norm();
        let inside = rho < r;
        let (value, grad) = if inside {
            let jk = specfun::bessel_jn_sequence(modes, kc * rho.max(1e-300));
            let djk = derivatives(&jk, kc * rho.max(1e-300));
            let zs: Vec<Complex> = jk.iter().map(|&v| v.into()).collect();
            let dzs: Vec<Complex> = djk.iter().map(|&v| v.into()).collect();
            sum_waves(&waves, &mc.interior, &zs, &dzs, kc, x)
        } else {
            let j = specfun::bessel_jn_sequence(modes, omega * rho);
            let y = specfun::bessel_yn_sequence(modes, omega * rho);
            let (dj, dy) = (derivatives(&j, omega * rho), derivatives(&y, omega * rho));
            let hs: Vec<Complex> = (0..modes).map(|m| Complex::new(j[m], y[m])).collect();
            let dhs: Vec<Complex> = (0..modes).map(|m| Complex::new(dj[m], dy[m])).collect();
            let (vs, gs) = sum_waves(&waves, &mc.scattered, &hs, &dhs, omega, x);
            let (vi, gi) = super::incident_eval(inc, omega, x);
            (vs + vi, (gs.0 + gi.0, gs.1 + gi.1))
        };
        let region = if inside { Region::Interior(1) } else { Region::Exterior };
        out.push(FieldSample { point: x, value, grad, region, near_boundary: false });
    }
    Ok(out)
}

fn sum_waves(
    waves: &[(Complex, f64)],
    coeffs: &[Complex],
    z: &[Complex],
    dz: &[Complex],
    k: f64,
    x: Point2,
) -> (Complex, (Complex, Complex)) {
    let rho = x.norm();
    let theta = x.x2.atan2(x.x1);
    let (ct, st) = (theta.cos(), theta.sin());
    let mut value = Complex::default();
    let mut g = (Complex::default(), Complex::default());
    for &(amp, dir) in waves {
        if amp == Complex::default() {
            continue;
        }
        let (v, dr, dphi) = mode_sum(coeffs, z, dz, k, rho.max(1e-300), theta - dir);
        value += amp * v;
        g.0 += amp * (dr * ct - dphi * st);
        g.1 += amp * (dr * st + dphi * ct);
    }
    (value, g)
}
