//! Eve on the lossy arm of the channel: her information about accepted bits
//! and the resulting secret key rate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{erfc, normal_pdf, Phase};
use crate::integrate::{integrate_1d, IntegrationConfig};
use crate::protocol::{accepted_modulus_density, bob_stats, conditional_error, BobStats, ProtocolPoint};

/// Slack allowed on the collision probability before it is clamped to `[½, 1]`.
pub const COLLISION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adversary {
    /// Eve measures the same quadrature as Bob on her arm.
    QuadratureEve,
    /// Eve holds her arm quantum mechanically and distinguishes the two
    /// conditional states optimally.
    GeneralBound,
}

/// Means, variances and covariance of `(β, ε)` in the sifted basis for the
/// `θ = 0` pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMoments {
    pub mean_bob: f64,
    pub mean_eve: f64,
    pub var_bob: f64,
    pub var_eve: f64,
    pub cov: f64,
}

pub fn joint_moments(pt: &ProtocolPoint) -> JointMoments {
    let (t, r) = (pt.channel.t(), pt.channel.r());
    let s = (-2.0 * pt.pulse.r()).exp();
    let a = pt.pulse.alpha0();
    JointMoments {
        mean_bob: t * a,
        mean_eve: -r * a,
        var_bob: (t * t * s + r * r) / 4.0,
        var_eve: (r * r * s + t * t) / 4.0,
        // Positive for r > 0: the squeezed noise enters β and −ε with opposite signs.
        cov: t * r * (1.0 - s) / 4.0,
    }
}

/// Sign of the displacement for a phase; odd phases live in the other
/// quadrature but have the same statistics there.
fn phase_sign(theta: Phase) -> f64 {
    if theta.quarter_turns() < 2 {
        1.0
    } else {
        -1.0
    }
}

/// Joint density `P_θ(β, ε)` of Bob's and Eve's outcomes in the sifted basis.
pub fn joint_density(pt: &ProtocolPoint, theta: Phase, beta: f64, eps: f64) -> f64 {
    let m = joint_moments(pt);
    let s = phase_sign(theta);
    let (x, y) = (beta - s * m.mean_bob, eps - s * m.mean_eve);
    let det = m.var_bob * m.var_eve - m.cov * m.cov;
    let q = (m.var_eve * x * x - 2.0 * m.cov * x * y + m.var_bob * y * y) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// Eve's density `P_θ(ε | accepted)` given that Bob's outcome passed the
/// threshold, normalized over accepted events.
pub fn eve_conditional(pt: &ProtocolPoint, theta: Phase, eps: f64) -> Result<f64> {
    let m = joint_moments(pt);
    let (p1, p0) = crate::protocol::accept_probs(pt);
    let kept = p1 + p0;
    if !(kept >= f64::MIN_POSITIVE) {
        return Err(Error::EmptySelection);
    }
    Ok(eve_conditional_unnormalized(&m, pt.beta_c, phase_sign(theta), eps) / kept)
}

fn eve_conditional_unnormalized(m: &JointMoments, beta_c: f64, sign: f64, eps: f64) -> f64 {
    let marginal = normal_pdf(eps, sign * m.mean_eve, m.var_eve);
    if marginal == 0.0 {
        return 0.0;
    }
    // β given ε is Gaussian; accept when |β| > β_c.
    let gain = m.cov / m.var_eve;
    let mu = sign * m.mean_bob + gain * (eps - sign * m.mean_eve);
    let var = (m.var_bob - m.cov * gain).max(0.0);
    let accept = if var == 0.0 {
        if mu.abs() > beta_c {
            1.0
        } else {
            0.0
        }
    } else {
        let scale = (2.0 * var).sqrt();
        0.5 * erfc((beta_c - mu) / scale) + 0.5 * erfc((beta_c + mu) / scale)
    };
    marginal * accept
}

/// Collision probability of Eve's bit guess from her quadrature outcome,
/// `½ ∫ (P_0² + P_π²) / (P_0 + P_π) dε` over accepted events.
pub fn collision_quadrature(pt: &ProtocolPoint, cfg: &IntegrationConfig) -> Result<f64> {
    let m = joint_moments(pt);
    let (p1, p0) = crate::protocol::accept_probs(pt);
    let kept = p1 + p0;
    if !(kept >= f64::MIN_POSITIVE) {
        return Err(Error::EmptySelection);
    }
    // Eve's mean conditioned on β, for the β values that matter.
    let sb = m.var_bob.sqrt();
    let gain = m.cov / m.var_bob;
    let far = pt.beta_c + cfg.cutoff_sigmas * sb;
    let reach = [pt.beta_c, far, m.mean_bob]
        .iter()
        .flat_map(|&b| [b, -b])
        .map(|b| (m.mean_eve + gain * (b - m.mean_bob)).abs())
        .fold(m.mean_eve.abs(), f64::max);
    let upper = reach + cfg.cutoff_sigmas * m.var_eve.sqrt();

    // The integrand is even in ε since P_π(ε) = P_0(−ε).
    let q = integrate_1d(
        |e| {
            let a = eve_conditional_unnormalized(&m, pt.beta_c, 1.0, e) / kept;
            let b = eve_conditional_unnormalized(&m, pt.beta_c, -1.0, e) / kept;
            let s = a + b;
            if s > 0.0 {
                (a * a + b * b) / s
            } else {
                0.0
            }
        },
        (0.0, upper),
        cfg,
    )?;
    Ok(q.value)
}

// ---------------------------------------------------------------------------
// Conditional states for the general bound

/// Whether Bob's accepted bit agrees with Alice's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EveCase {
    NoError,
    BitError,
}

/// Sign of Bob's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Eve's unnormalized state `χ(x) = exp(−A x² + L x + C)` on her arm given
/// Bob's outcome, in the position representation of her quadrature.
///
/// `NoError, Plus` is `θ = 0` with Bob at `+β`; `NoError, Minus` is `θ = π`
/// with Bob at `−β`. `BitError, Minus` is `θ = 0` with Bob at `−β`, and
/// `BitError, Plus` is `θ = π` with Bob at `+β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEveState {
    pub case: EveCase,
    pub sign: Sign,
    pub beta_abs: f64,
    pub quadratic: Complex64,
    pub linear: Complex64,
    pub log_norm: Complex64,
}

pub fn conditional_state(pt: &ProtocolPoint, case: EveCase, sign: Sign, beta_abs: f64) -> ConditionalEveState {
    let beta = beta_abs.abs();
    let (t, rr) = (pt.channel.t(), pt.channel.r());
    let e2r = (2.0 * pt.pulse.r()).exp();
    let alpha = pt.pulse.alpha0();
    // (Alice's phase sign, Bob's outcome) for each state.
    let (s_alice, b) = match (case, sign) {
        (EveCase::NoError, Sign::Plus) => (1.0, beta),
        (EveCase::NoError, Sign::Minus) => (-1.0, -beta),
        (EveCase::BitError, Sign::Minus) => (1.0, -beta),
        (EveCase::BitError, Sign::Plus) => (-1.0, beta),
    };
    // Ψ(b, x) = ψ_A(T b − R x) ψ_v(R b + T x) with
    // ψ_A(u) ∝ exp(−e^{2r}(u − s α₀)²), ψ_v(u) ∝ exp(−u²).
    let u = t * b - s_alice * alpha;
    let quadratic = e2r * rr * rr + t * t;
    let linear = 2.0 * rr * (e2r * u - t * b);
    let log_norm = 0.5 * (2.0 / PI).ln() + 0.5 * pt.pulse.r() - e2r * u * u - rr * rr * b * b;
    ConditionalEveState {
        case,
        sign,
        beta_abs: beta,
        quadratic: Complex64::new(quadratic, 0.0),
        linear: Complex64::new(linear, 0.0),
        log_norm: Complex64::new(log_norm, 0.0),
    }
}

impl ConditionalEveState {
    /// `ln ⟨self|other⟩`.
    pub fn log_inner(&self, other: &Self) -> Complex64 {
        let a = self.quadratic.conj() + other.quadratic;
        let l = self.linear.conj() + other.linear;
        let c = self.log_norm.conj() + other.log_norm;
        0.5 * (Complex64::new(PI, 0.0) / a).ln() + l * l / (4.0 * a) + c
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.log_inner(other).exp()
    }

    /// `∫ |χ|²`, the density of Bob's outcome for this branch.
    pub fn norm_sqr(&self) -> f64 {
        self.log_inner(self).re.exp()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (-self.quadratic * x * x + self.linear * x + self.log_norm).exp()
    }
}

/// `|⟨χ₁|χ₂⟩| / (‖χ₁‖ ‖χ₂‖)`, evaluated in log space.
pub fn chi_overlap(a: &ConditionalEveState, b: &ConditionalEveState) -> f64 {
    let log = a.log_inner(b).re - 0.5 * (a.log_inner(a).re + b.log_inner(b).re);
    log.exp().min(1.0)
}

/// Minimum error probability for two equiprobable pure states with overlap `o`.
pub fn helstrom_error(overlap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Domain(format!("overlap must lie in [0, 1], got {overlap}")));
    }
    Ok(0.5 * (1.0 - (1.0 - overlap * overlap).sqrt()))
}

/// Helstrom error rates `(δ_I, δ_II)` for Bob's outcome `|β|`.
pub fn helstrom_pair(pt: &ProtocolPoint, beta: f64) -> Result<(f64, f64)> {
    let o1 = chi_overlap(
        &conditional_state(pt, EveCase::NoError, Sign::Plus, beta),
        &conditional_state(pt, EveCase::NoError, Sign::Minus, beta),
    );
    let o2 = chi_overlap(
        &conditional_state(pt, EveCase::BitError, Sign::Minus, beta),
        &conditional_state(pt, EveCase::BitError, Sign::Plus, beta),
    );
    Ok((helstrom_error(o1)?, helstrom_error(o2)?))
}

/// Collision probability of Eve's bit when she discriminates the conditional
/// states optimally.
pub fn collision_general(pt: &ProtocolPoint, cfg: &IntegrationConfig) -> Result<f64> {
    let (p1, p0) = crate::protocol::accept_probs(pt);
    let kept = p1 + p0;
    if !(kept >= f64::MIN_POSITIVE) {
        return Err(Error::EmptySelection);
    }
    let mut failure = None;
    let collide = |d: f64| d * d + (1.0 - d) * (1.0 - d);
    let q = integrate_1d(
        |beta| {
            let w = accepted_modulus_density(pt, kept, beta);
            if w == 0.0 {
                return 0.0;
            }
            match helstrom_pair(pt, beta) {
                Ok((d1, d2)) => {
                    let d = conditional_error(pt, beta);
                    w * ((1.0 - d) * collide(d1) + d * collide(d2))
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        (pt.beta_c, pt.beta_upper(cfg)),
        cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q.value)
}

/// Secret key rate and its ingredients at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub adversary: Adversary,
    pub bob: BobStats,
    /// Eve's collision probability per accepted bit.
    pub p_c: f64,
    /// Fraction of bits removed by privacy amplification, `1 + log₂ P_c`.
    pub tau: f64,
    /// Secret bits per transmitted pulse; negative means no key.
    pub s_ab: f64,
}

pub fn secret_rate(pt: &ProtocolPoint, adversary: Adversary, cfg: &IntegrationConfig) -> Result<RateReport> {
    cfg.validate()?;
    let bob = bob_stats(pt, cfg)?;
    let raw = match adversary {
        Adversary::QuadratureEve => collision_quadrature(pt, cfg)?,
        Adversary::GeneralBound => collision_general(pt, cfg)?,
    };
    if !(0.5 - COLLISION_TOL..=1.0 + COLLISION_TOL).contains(&raw) {
        return Err(Error::Numerical(format!(
            "collision probability {raw} outside [1/2, 1] at {pt:?}"
        )));
    }
    let p_c = raw.clamp(0.5, 1.0);
    let tau = 1.0 + p_c.log2();
    Ok(RateReport { adversary, bob, p_c, tau, s_ab: bob.r_acc * (bob.i_ab - tau) })
}
