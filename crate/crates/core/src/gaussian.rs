//! Quadrature conventions and the Gaussian densities of the protocol.
//!
//! Quadratures are the real and imaginary parts of the field amplitude, so the
//! vacuum variance of each quadrature is 1/4. A pulse squeezed by `r` has
//! amplitude-quadrature variance `e^{-2r}/4` and phase-quadrature variance
//! `e^{2r}/4`. The transmission line is a beam-splitter
//! `b = T a + R v`, `e = -R a + T v` with vacuum in `v`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Tolerance on `T² + R² = 1`.
pub const CHANNEL_TOL: f64 = 1e-12;

/// Alice's four phase shifts. `Zero`/`Pi` encode bits 1/0 in basis 1,
/// `HalfPi`/`ThreeHalfPi` encode bits 1/0 in basis 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Zero,
    HalfPi,
    Pi,
    ThreeHalfPi,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Zero, Phase::HalfPi, Phase::Pi, Phase::ThreeHalfPi];

    /// Number of quarter turns, `θ = k·π/2`.
    pub fn quarter_turns(self) -> usize {
        match self {
            Phase::Zero => 0,
            Phase::HalfPi => 1,
            Phase::Pi => 2,
            Phase::ThreeHalfPi => 3,
        }
    }

    pub fn from_quarter_turns(k: usize) -> Self {
        Self::ALL[k % 4]
    }

    pub fn radians(self) -> f64 {
        self.quarter_turns() as f64 * FRAC_PI_2
    }

    /// Phase advanced by `π/2`.
    pub fn next(self) -> Self {
        Self::from_quarter_turns(self.quarter_turns() + 1)
    }
}

/// Bob's homodyne basis: 1 measures `β_r`, 2 measures `β_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Real,
    Imaginary,
}

impl Basis {
    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(Basis::Real),
            2 => Ok(Basis::Imaginary),
            other => Err(Error::InvalidParameter(format!("basis must be 1 or 2, got {other}"))),
        }
    }
}

/// A minimum-uncertainty squeezed pulse with mean amplitude `alpha0`,
/// squeezing `r` and encoding phase `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    alpha0: f64,
    r: f64,
    theta: Phase,
}

impl PulseParams {
    pub fn new(alpha0: f64, r: f64, theta: Phase) -> Result<Self> {
        if !(alpha0.is_finite() && alpha0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha0 must be finite and non-negative, got {alpha0}"
            )));
        }
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("squeezing r must be finite, got {r}")));
        }
        Ok(Self { alpha0, r, theta })
    }

    /// The `θ = 0` member of the pulse family.
    pub fn reference(alpha0: f64, r: f64) -> Result<Self> {
        Self::new(alpha0, r, Phase::Zero)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> Phase {
        self.theta
    }

    pub fn with_theta(self, theta: Phase) -> Self {
        Self { theta, ..self }
    }
}

/// Beam-splitter amplitudes with `T² + R² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    t: f64,
    r: f64,
}

impl Channel {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        let ok_range = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if !ok_range(t) || !ok_range(r) {
            return Err(Error::InvalidParameter(format!(
                "channel amplitudes must lie in [0, 1], got T = {t}, R = {r}"
            )));
        }
        if (t * t + r * r - 1.0).abs() > CHANNEL_TOL {
            return Err(Error::InvalidParameter(format!(
                "channel must satisfy T^2 + R^2 = 1, got {}",
                t * t + r * r
            )));
        }
        Ok(Self { t, r })
    }

    /// Channel with power transmission `T²`.
    pub fn from_transmission(t2: f64) -> Result<Self> {
        if !(t2.is_finite() && (0.0..=1.0).contains(&t2)) {
            return Err(Error::InvalidParameter(format!("T^2 must lie in [0, 1], got {t2}")));
        }
        Self::new(t2.sqrt(), (1.0 - t2).sqrt())
    }

    /// Channel with power loss `R²`.
    pub fn from_loss(r2: f64) -> Result<Self> {
        if !(r2.is_finite() && (0.0..=1.0).contains(&r2)) {
            return Err(Error::InvalidParameter(format!("loss R^2 must lie in [0, 1], got {r2}")));
        }
        Self::new((1.0 - r2).sqrt(), r2.sqrt())
    }

    pub fn lossless() -> Self {
        Self { t: 1.0, r: 0.0 }
    }

    /// Balanced splitter, `T = R = 1/√2`.
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: h, r: h }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn transmission(&self) -> f64 {
        self.t * self.t
    }

    pub fn loss(&self) -> f64 {
        self.r * self.r
    }
}

/// Quadrature values of Bob's (`beta`) and Eve's (`eps`) modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub beta_r: f64,
    pub beta_i: f64,
    pub eps_r: f64,
    pub eps_i: f64,
}

impl QuadPoint {
    pub fn new(beta_r: f64, beta_i: f64, eps_r: f64, eps_i: f64) -> Self {
        Self { beta_r, beta_i, eps_r, eps_i }
    }
}

/// Normal density with the given mean and variance.
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / variance).exp() / (2.0 * PI * variance).sqrt()
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `Pr[X > threshold]` for `X ~ N(mean, variance)`.
pub fn gaussian_tail(mean: f64, variance: f64, threshold: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::Domain(format!("variance must be positive, got {variance}")));
    }
    Ok(0.5 * erfc((threshold - mean) / (2.0 * variance).sqrt()))
}

/// Joint Wigner function `W_θ(β, ε)` of Bob's and Eve's modes after the
/// beam-splitter. Normalized to 1 over the four real quadratures.
pub fn wigner_joint(p: &PulseParams, ch: &Channel, q: &QuadPoint) -> f64 {
    let (t, rr) = (ch.t(), ch.r());
    // (Tβ − Rε) e^{−iθ} − α₀
    let zr = t * q.beta_r - rr * q.eps_r;
    let zi = t * q.beta_i - rr * q.eps_i;
    let (s, c) = p.theta().radians().sin_cos();
    let (s, c) = (snap(s), snap(c));
    let ar = zr * c + zi * s - p.alpha0();
    let ai = zi * c - zr * s;
    let vr = rr * q.beta_r + t * q.eps_r;
    let vi = rr * q.beta_i + t * q.eps_i;
    let e2r = (2.0 * p.r()).exp();
    let expo = -2.0 * (e2r * ar * ar + ai * ai / e2r) - 2.0 * (vr * vr + vi * vi);
    4.0 / (PI * PI) * expo.exp()
}

// sin/cos of multiples of π/2 are exactly 0 or ±1.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x.signum() * x.abs().round()
    }
}

/// Mean and variance of Bob's quadrature in the given basis.
pub fn bob_moments(p: &PulseParams, ch: &Channel, basis: Basis) -> (f64, f64) {
    let (t2, r2) = (ch.transmission(), ch.loss());
    let narrow = (t2 * (-2.0 * p.r()).exp() + r2) / 4.0;
    let broad = (t2 * (2.0 * p.r()).exp() + r2) / 4.0;
    let signal = ch.t() * p.alpha0();
    // θ = 0, π/2, π, 3π/2 put the displacement on +Re, +Im, −Re, −Im.
    let k = p.theta().quarter_turns();
    let aligned = matches!((basis, k % 2), (Basis::Real, 0) | (Basis::Imaginary, 1));
    if aligned {
        let sign = if k < 2 { 1.0 } else { -1.0 };
        (sign * signal, narrow)
    } else {
        (0.0, broad)
    }
}

/// Bob's homodyne density `P_θ(β_r)` (basis 1) or `P_θ(β_i)` (basis 2).
pub fn bob_marginal(p: &PulseParams, ch: &Channel, basis: Basis, x: f64) -> f64 {
    let (mean, var) = bob_moments(p, ch, basis);
    normal_pdf(x, mean, var)
}

/// Eve's quadrature density of the same basis, `P_θ(ε_r)` or `P_θ(ε_i)`.
pub fn eve_marginal(p: &PulseParams, ch: &Channel, basis: Basis, x: f64) -> f64 {
    let (mean, var) = eve_moments(p, ch, basis);
    normal_pdf(x, mean, var)
}

pub fn eve_moments(p: &PulseParams, ch: &Channel, basis: Basis) -> (f64, f64) {
    // Eve sees the pulse through the mirrored splitter: T ↔ R, signal sign flipped.
    let mirrored = Channel { t: ch.r(), r: ch.t() };
    let (mean, var) = bob_moments(p, &mirrored, basis);
    (-mean, var)
}
