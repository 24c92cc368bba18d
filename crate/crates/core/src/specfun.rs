//! Bessel functions of orders 0 and 1, the Helmholtz fundamental solution
//! and its low-frequency splitting `Γ_ω = a_ω + Γ_0 + A_ω`.
//!
//! Arguments up to 8 use the power series. Between 8 and 25 the Bessel
//! values come from Miller's backward recurrence with Neumann sums for the
//! second kind, and beyond 25 from the Hankel asymptotic expansion, which has
//! reached double precision there.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex double used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    /// Unit vector at polar angle `phi`.
    pub fn polar(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Point2 { x1: c, x2: s }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    /// Largest absolute component.
    pub fn norm_inf(self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Self {
        Point2 { x1: -self.x2, x2: self.x1 }
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Point2) {
        self.x1 += o.x1;
        self.x2 += o.x2;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        p * self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("{function}: argument {x} is outside the domain")]
    Domain { function: &'static str, x: f64 },
    #[error("{function}: singular at the origin")]
    Singularity { function: &'static str },
}

fn check_positive(function: &'static str, x: f64) -> Result<(), SpecfunError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::Domain { function, x })
    }
}

/// `J_0(x)` for `x ≥ 0`.
pub fn bessel_j0(x: f64) -> Result<f64, SpecfunError> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SpecfunError::Domain { function: "bessel_j0", x });
    }
    Ok(j0_unchecked(x))
}

/// `(J_0(x), Y_0(x))` for `x > 0`.
pub fn bessel_j0y0(x: f64) -> Result<(f64, f64), SpecfunError> {
    check_positive("bessel_j0y0", x)?;
    Ok(j0y0_unchecked(x))
}

/// `(J_1(x), Y_1(x))` for `x > 0`.
pub fn bessel_j1y1(x: f64) -> Result<(f64, f64), SpecfunError> {
    check_positive("bessel_j1y1", x)?;
    Ok(j1y1_unchecked(x))
}

/// `H_0^{(1)}(x) = J_0(x) + i Y_0(x)`.
pub fn hankel1_0(x: f64) -> Result<Complex, SpecfunError> {
    let (j, y) = bessel_j0y0(x)?;
    Ok(Complex::new(j, y))
}

/// `H_1^{(1)}(x) = J_1(x) + i Y_1(x)`.
pub fn hankel1_1(x: f64) -> Result<Complex, SpecfunError> {
    let (j, y) = bessel_j1y1(x)?;
    Ok(Complex::new(j, y))
}

/// Fundamental solution of `Δ + ω²`: `−(i/4) H_0^{(1)}(ω|x|)`, or
/// `ln|x| / 2π` when `ω = 0`.
pub fn fundamental_solution(x: Point2, omega: f64) -> Result<Complex, SpecfunError> {
    let rho = x.norm();
    if rho == 0.0 {
        return Err(SpecfunError::Singularity { function: "fundamental_solution" });
    }
    check_frequency("fundamental_solution", omega)?;
    Ok(gamma_radial(rho, omega))
}

/// Gradient of [`fundamental_solution`].
pub fn fundamental_gradient(x: Point2, omega: f64) -> Result<(Complex, Complex), SpecfunError> {
    let rho = x.norm();
    if rho == 0.0 {
        return Err(SpecfunError::Singularity { function: "fundamental_gradient" });
    }
    check_frequency("fundamental_gradient", omega)?;
    let g = dgamma_radial(rho, omega) / rho;
    Ok((g * x.x1, g * x.x2))
}

/// The constant `a_ω = −i/4 + γ/2π + ln(ω/2)/2π`.
pub fn a_omega(omega: f64) -> Result<Complex, SpecfunError> {
    check_positive("a_omega", omega)?;
    Ok(a_omega_unchecked(omega))
}

/// Smooth remainder `A_ω(x) = Γ_ω(x) − a_ω − Γ_0(x)`, with `A_ω(0) = 0`.
pub fn a_remainder(x: Point2, omega: f64) -> Result<Complex, SpecfunError> {
    check_positive("a_remainder", omega)?;
    Ok(a_remainder_radial(x.norm(), omega))
}

/// Gradient of [`a_remainder`]; vanishes at the origin.
pub fn a_remainder_gradient(x: Point2, omega: f64) -> Result<(Complex, Complex), SpecfunError> {
    check_positive("a_remainder_gradient", omega)?;
    let rho = x.norm();
    if rho == 0.0 {
        return Ok((Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)));
    }
    let g = da_remainder_radial(rho, omega) / rho;
    Ok((g * x.x1, g * x.x2))
}

fn check_frequency(function: &'static str, omega: f64) -> Result<(), SpecfunError> {
    if omega >= 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::Domain { function, x: omega })
    }
}

pub(crate) fn a_omega_unchecked(omega: f64) -> Complex {
    Complex::new((EULER_GAMMA + (omega / 2.0).ln()) / (2.0 * PI), -0.25)
}

/// `Γ_ω` as a function of the distance `rho > 0`.
pub(crate) fn gamma_radial(rho: f64, omega: f64) -> Complex {
    if omega == 0.0 {
        Complex::new(rho.ln() / (2.0 * PI), 0.0)
    } else {
        let (j0, y0) = j0y0_unchecked(omega * rho);
        Complex::new(0.25 * y0, -0.25 * j0)
    }
}

/// `dΓ_ω/dρ` at distance `rho > 0`.
pub(crate) fn dgamma_radial(rho: f64, omega: f64) -> Complex {
    if omega == 0.0 {
        Complex::new(1.0 / (2.0 * PI * rho), 0.0)
    } else {
        let (j1, y1) = j1y1_unchecked(omega * rho);
        Complex::new(-0.25 * omega * y1, 0.25 * omega * j1)
    }
}

pub(crate) fn a_remainder_radial(rho: f64, omega: f64) -> Complex {
    let z = omega * rho;
    if z > 2.0 {
        return gamma_radial(rho, omega) - a_omega_unchecked(omega) - rho.ln() / (2.0 * PI);
    }
    if z == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    // (J0 − 1)(−i/4 + (ln(z/2)+γ)/2π) + (1/2π) Σ (−1)^{k+1} H_k t^k/(k!)²
    let t = 0.25 * z * z;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut j0m1 = 0.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -t / (kf * kf);
        harmonic += 1.0 / kf;
        j0m1 += term;
        tail -= harmonic * term;
        if term.abs() < 1e-18 * j0m1.abs() {
            break;
        }
    }
    let logc = ((0.5 * z).ln() + EULER_GAMMA) / (2.0 * PI);
    Complex::new(j0m1 * logc + tail / (2.0 * PI), -0.25 * j0m1)
}

pub(crate) fn da_remainder_radial(rho: f64, omega: f64) -> Complex {
    let z = omega * rho;
    if z > 2.0 {
        return dgamma_radial(rho, omega) - 1.0 / (2.0 * PI * rho);
    }
    if z == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    // d/dz of the series in `a_remainder_radial`, times ω.
    let t = 0.25 * z * z;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut j0m1 = 0.0;
    let mut dtail = 0.0;
    let mut dj0 = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -t / (kf * kf);
        harmonic += 1.0 / kf;
        j0m1 += term;
        // d/dz t^k = k t^k (2/z)
        let dterm = term * kf * 2.0 / z;
        dj0 += dterm;
        dtail -= harmonic * dterm;
        if term.abs() < 1e-18 * j0m1.abs() {
            break;
        }
    }
    let logc = ((0.5 * z).ln() + EULER_GAMMA) / (2.0 * PI);
    let re = dj0 * logc + j0m1 / (2.0 * PI * z) + dtail / (2.0 * PI);
    Complex::new(re * omega, -0.25 * dj0 * omega)
}

pub(crate) fn j0_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series_j0(x)
    } else if x < ASYMPTOTIC_LIMIT {
        miller(x).0
    } else {
        asymptotic(0, x).0
    }
}

pub(crate) fn j0y0_unchecked(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        series_j0y0(x)
    } else if x < ASYMPTOTIC_LIMIT {
        let m = miller(x);
        (m.0, m.1)
    } else {
        asymptotic(0, x)
    }
}

pub(crate) fn j1y1_unchecked(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        series_j1y1(x)
    } else if x < ASYMPTOTIC_LIMIT {
        let m = miller(x);
        (m.2, m.3)
    } else {
        asymptotic(1, x)
    }
}

fn series_j0(x: f64) -> f64 {
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -t / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn series_j0y0(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut tail = 0.0;
    let mut harmonic = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -t / (kf * kf);
        harmonic += 1.0 / kf;
        j += term;
        tail -= harmonic * term;
        if term.abs() * harmonic < 1e-17 * (j.abs() + tail.abs()) {
            break;
        }
    }
    let y = 2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j + tail);
    (j, y)
}

fn series_j1y1(x: f64) -> (f64, f64) {
    // J1 = (x/2) Σ (−t)^k/(k!(k+1)!)
    // Y1 = −2/(πx) + (2/π)(ln(x/2)+γ) J1 − (x/2π) Σ (H_k + H_{k+1}) (−t)^k/(k!(k+1)!)
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut s = 1.0;
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    let mut tail = hk + hk1;
    for k in 1..80 {
        let kf = k as f64;
        term *= -t / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        s += term;
        tail += (hk + hk1) * term;
        if term.abs() * (hk + hk1) < 1e-17 * (s.abs() + tail.abs()) {
            break;
        }
    }
    let j1 = 0.5 * x * s;
    let y1 = -2.0 / (PI * x) + 2.0 / PI * ((0.5 * x).ln() + EULER_GAMMA) * j1 - x / (2.0 * PI) * tail;
    (j1, y1)
}

/// Miller backward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`, with the
/// Neumann series for `Y_0` and its derivative for `Y_1`.
/// Returns `(J0, Y0, J1, Y1)`.
fn miller(x: f64) -> (f64, f64, f64, f64) {
    let seq = miller_sequence(x, 2);
    let j = |k: usize| seq[k];
    let nmax = seq.len() - 1;
    let mut norm = j(0);
    let mut neumann0 = 0.0;
    let mut neumann1 = 0.0;
    let mut k = 1;
    while 2 * k <= nmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        norm += 2.0 * j(2 * k);
        neumann0 += sign * j(2 * k) / kf;
        let upper = if 2 * k < nmax { j(2 * k + 1) } else { 0.0 };
        neumann1 += sign * (j(2 * k - 1) - upper) / kf;
        k += 1;
    }
    let j0 = j(0) / norm;
    let j1 = j(1) / norm;
    let logc = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = 2.0 / PI * (logc * j0 - 2.0 * neumann0 / norm);
    let y1 = -2.0 / PI * j0 / x + 2.0 / PI * logc * j1 + 2.0 / PI * neumann1 / norm;
    (j0, y0, j1, y1)
}

/// Unnormalized backward-recurrence sequence proportional to `J_k(x)`, for
/// `k = 0..=top`, where `top` is chosen large enough for `x` and `min_order`.
fn miller_sequence(x: f64, min_order: usize) -> Vec<f64> {
    let start = (x.max(min_order as f64) + 20.0 + 8.0 * x.sqrt()).ceil() as usize;
    let top = start + (start % 2);
    let mut seq = vec![0.0; top + 2];
    seq[top] = 1e-30;
    for k in (1..=top).rev() {
        let v = 2.0 * k as f64 / x * seq[k] - seq[k + 1];
        seq[k - 1] = v;
        if v.abs() > 1e200 {
            for s in seq.iter_mut().skip(k - 1) {
                *s *= 1e-200;
            }
        }
    }
    seq.truncate(top + 1);
    seq
}

/// Hankel asymptotic expansion for orders 0 and 1. Returns `(J, Y)`.
fn asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // χ = x − π/4 (order 0) or x − 3π/4 (order 1)
    let (cos_chi, sin_chi) = if order == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

/// `J_m(x)` for `m = 0..=nmax` and `x > 0`.
pub(crate) fn bessel_jn_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let seq = miller_sequence(x, nmax);
    let mut norm = seq[0];
    let mut k = 2;
    while k < seq.len() {
        norm += 2.0 * seq[k];
        k += 2;
    }
    let scale = 1.0 / norm;
    seq.iter().take(nmax + 1).map(|v| v * scale).collect()
}

/// `Y_m(x)` for `m = 0..=nmax` by forward recurrence, which is stable for `Y`.
pub(crate) fn bessel_yn_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let (_, y0) = j0y0_unchecked(x);
    let (_, y1) = j1y1_unchecked(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for m in 1..nmax {
        let next = 2.0 * m as f64 / x * out[m] - out[m - 1];
        out.push(next);
    }
    out
}
