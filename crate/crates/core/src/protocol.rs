//! Bob's post-selected statistics and the Alice–Bob information.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::gaussian::{bob_moments, erfc, normal_pdf, Basis, Channel, PulseParams};
use crate::integrate::{integrate_1d, IntegrationConfig};

/// An operating point: pulse family, channel and post-selection threshold.
///
/// `pulse` is the `θ = 0` member; the other three phases follow by rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolPoint {
    pub pulse: PulseParams,
    pub channel: Channel,
    pub beta_c: f64,
}

impl ProtocolPoint {
    pub fn new(pulse: PulseParams, channel: Channel, beta_c: f64) -> Result<Self> {
        if !(beta_c.is_finite() && beta_c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold beta_c must be finite and non-negative, got {beta_c}"
            )));
        }
        Ok(Self { pulse: pulse.with_theta(crate::gaussian::Phase::Zero), channel, beta_c })
    }

    /// Convenience constructor from scalar parameters.
    pub fn from_scalars(alpha0: f64, r: f64, transmission: f64, beta_c: f64) -> Result<Self> {
        Self::new(
            PulseParams::reference(alpha0, r)?,
            Channel::from_transmission(transmission)?,
            beta_c,
        )
    }

    /// Mean `T α₀` and variance `(T² e^{−2r} + R²)/4` of Bob's basis-1 quadrature.
    pub fn bob_moments(&self) -> (f64, f64) {
        bob_moments(&self.pulse, &self.channel, Basis::Real)
    }

    /// Bob's density `P_0(β_r)`.
    pub fn bob_density(&self, beta: f64) -> f64 {
        let (m, v) = self.bob_moments();
        normal_pdf(beta, m, v)
    }

    /// Upper end of the `β_r` integration window, `β_c + cutoff·max(σ, T α₀)`.
    pub fn beta_upper(&self, cfg: &IntegrationConfig) -> f64 {
        let (m, v) = self.bob_moments();
        self.beta_c + cfg.cutoff_sigmas * v.sqrt().max(m.abs())
    }
}

/// Post-selected statistics of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobStats {
    pub p1: f64,
    pub p0: f64,
    /// Fraction of transmitted pulses kept after sifting and post-selection.
    pub r_acc: f64,
    /// Bit error rate of accepted bits.
    pub delta: f64,
    /// Shannon information per accepted bit.
    pub i_ab: f64,
    /// Information per transmitted pulse.
    pub g_ab: f64,
}

/// `(P(1), P(0))`: probabilities that Bob keeps a correct or a wrong bit in
/// the matching basis.
pub fn accept_probs(pt: &ProtocolPoint) -> (f64, f64) {
    let (m, v) = pt.bob_moments();
    let scale = (2.0 * v).sqrt();
    let p1 = 0.5 * erfc((pt.beta_c - m) / scale);
    let p0 = 0.5 * erfc((pt.beta_c + m) / scale);
    (p1, p0)
}

/// `δ(β_r) = P_0(−β_r) / (P_0(β_r) + P_0(−β_r))`, in logistic form so it
/// never divides underflowed densities.
pub fn conditional_error(pt: &ProtocolPoint, beta: f64) -> f64 {
    let (m, v) = pt.bob_moments();
    logistic(-2.0 * beta * m / v)
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary entropy in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.ln() + (1.0 - p) * (-p).ln_1p()) / LN_2
}

fn selected_mass(pt: &ProtocolPoint) -> Result<(f64, f64, f64)> {
    let (p1, p0) = accept_probs(pt);
    let kept = p1 + p0;
    if !(kept >= f64::MIN_POSITIVE) {
        return Err(Error::EmptySelection);
    }
    Ok((p1, p0, kept))
}

/// Density of `|β_r|` among accepted pulses, `(P_0(β) + P_0(−β)) / (P(0) + P(1))`.
pub(crate) fn accepted_modulus_density(pt: &ProtocolPoint, kept: f64, beta: f64) -> f64 {
    let w = pt.bob_density(beta) + pt.bob_density(-beta);
    if w == 0.0 {
        0.0
    } else {
        w / kept
    }
}

pub fn bob_stats(pt: &ProtocolPoint, cfg: &IntegrationConfig) -> Result<BobStats> {
    let (p1, p0, kept) = selected_mass(pt)?;
    let q = integrate_1d(
        |beta| {
            let w = accepted_modulus_density(pt, kept, beta);
            if w == 0.0 {
                return 0.0;
            }
            w * (1.0 - binary_entropy(conditional_error(pt, beta)))
        },
        (pt.beta_c, pt.beta_upper(cfg)),
        cfg,
    )?;
    let i_ab = q.value.clamp(0.0, 1.0);
    let r_acc = 0.5 * kept;
    let stats = BobStats { p1, p0, r_acc, delta: p0 / kept, i_ab, g_ab: r_acc * i_ab };
    check_identities(&stats)?;
    Ok(stats)
}

fn check_identities(s: &BobStats) -> Result<()> {
    let ok = (s.r_acc - 0.5 * (s.p1 + s.p0)).abs() <= 1e-12
        && (s.delta - s.p0 / (s.p0 + s.p1)).abs() <= 1e-12
        && (s.g_ab - s.r_acc * s.i_ab).abs() <= 1e-12
        && (0.0..=0.5 + 1e-12).contains(&s.delta);
    if ok {
        Ok(())
    } else {
        Err(Error::Numerical(format!("inconsistent Bob statistics {s:?}")))
    }
}

/// Bit error rate at `T = 1`, as a function of the pulse amplitude.
fn lossless_error_rate(alpha0: f64, r: f64, beta_c: f64) -> f64 {
    let scale = (2.0 * (-2.0 * r).exp() / 4.0).sqrt();
    let p1 = 0.5 * erfc((beta_c - alpha0) / scale);
    let p0 = 0.5 * erfc((beta_c + alpha0) / scale);
    p0 / (p0 + p1)
}

/// Amplitude `α₀` at which the lossless bit error rate equals `target_delta`.
///
/// The error rate is strictly decreasing in `α₀`, so the root found by
/// bisection is unique.
pub fn calibrate_amplitude(r: f64, beta_c: f64, target_delta: f64) -> Result<f64> {
    if !r.is_finite() || !(beta_c.is_finite() && beta_c >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "calibration needs finite r and beta_c >= 0 (r = {r}, beta_c = {beta_c})"
        )));
    }
    if !(target_delta > 0.0 && target_delta <= 0.5) {
        return Err(Error::Calibration(format!(
            "target bit error rate must lie in (0, 1/2], got {target_delta}"
        )));
    }
    if target_delta == 0.5 {
        return Ok(0.0);
    }
    let delta = |a: f64| lossless_error_rate(a, r, beta_c);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !(delta(hi) < target_delta) {
        if hi > 1e3 || delta(hi).is_nan() {
            return Err(Error::Calibration(format!(
                "no amplitude reaches delta = {target_delta} (r = {r}, beta_c = {beta_c})"
            )));
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delta(mid) > target_delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dlo, dhi) = ((delta(lo) - target_delta).abs(), (delta(hi) - target_delta).abs());
    let (alpha, miss) = if dlo <= dhi { (lo, dlo) } else { (hi, dhi) };
    if miss > 1e-9 * target_delta {
        return Err(Error::Calibration(format!(
            "bisection stalled at alpha0 = {alpha} with |delta - target| = {miss:e}"
        )));
    }
    Ok(alpha)
}
