//! Intercept-resend attacks: Eve measures the whole pulse and guesses which
//! of the four states Alice sent.
//!
//! All three success probabilities are properties of the pulse family; by the
//! phase-shift covariance `|ψ_{θ+π/2}⟩ = U|ψ_θ⟩` the average over the four
//! equiprobable states equals the success rate for any single reference state.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{fock_coefficients, i_pow, state_overlap, FockConfig, FockState};
use crate::gaussian::{bob_moments, erf, erfc, eve_moments, normal_pdf, Basis, Channel, Phase, PulseParams};
use crate::integrate::{integrate_1d, IntegrationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    SimultaneousQuadrature,
    PhaseMeasurement,
    OptimalProjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Accumulated absolute error estimate of the quadratures involved.
    pub integration_error: f64,
    /// Fock truncation used, when the strategy needs the number basis.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackResult {
    pub p_corr: f64,
    pub strategy: Strategy,
    pub diagnostics: Diagnostics,
}

// ---------------------------------------------------------------------------
// Simultaneous quadrature measurement

/// Moments of Eve's two outcomes `(x, y)` after her balanced splitter, for the
/// `θ = 0` pulse: `x = β_r` on the transmitted arm, `y` the conjugate
/// quadrature of the reflected arm. `y` is recorded with the sign that puts
/// `θ = π/2` on the positive axis.
///
/// Returns `(mean_x, narrow_variance, broad_variance)`; `y` has mean zero.
pub fn simquad_moments(alpha0: f64, r: f64) -> (f64, f64, f64) {
    let p = PulseParams::reference(alpha0.max(0.0), if r.is_finite() { r } else { 0.0 })
        .expect("finite reference pulse");
    let ch = Channel::balanced();
    let (mx, vx) = bob_moments(&p, &ch, Basis::Real);
    let (_, vy) = eve_moments(&p, &ch, Basis::Imaginary);
    (mx, vx, vy)
}

/// Eve's maximum-likelihood guess for an outcome `(x, y)`. Ties go to the
/// smaller phase.
pub fn simquad_decide(alpha0: f64, r: f64, x: f64, y: f64) -> Phase {
    let (m, narrow, broad) = simquad_moments(alpha0, r);
    // Every hypothesis has one narrow and one broad factor, so the
    // normalizations cancel and only the exponents are compared.
    let score = |mx: f64, vx: f64, my: f64, vy: f64| {
        -(x - mx).powi(2) / (2.0 * vx) - (y - my).powi(2) / (2.0 * vy)
    };
    let scores = [
        score(m, narrow, 0.0, broad),
        score(0.0, broad, m, narrow),
        score(-m, narrow, 0.0, broad),
        score(0.0, broad, -m, narrow),
    ];
    let mut best = 0;
    for k in 1..4 {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    Phase::from_quarter_turns(best)
}

/// Success probability of the simultaneous quadrature attack.
///
/// Integrates `2 ∬_{A₀} P_0(x) P_0(y)` over the decision region of `θ = 0`
/// in the quadrant `x, y > 0`. The inner `y` integral is done in closed form,
/// leaving one adaptive quadrature over `x`.
pub fn simquad_pcorr(p: &PulseParams, cfg: &IntegrationConfig) -> Result<AttackResult> {
    let (alpha0, r) = (p.alpha0(), p.r());
    let (m, narrow, broad) = simquad_moments(alpha0, r);
    let sy = (2.0 * broad).sqrt();
    // Pr[0 < y < a] and Pr[y > a] for a ≥ 0.
    let below = |a: f64| if a > 0.0 { 0.5 * erf(a / sy) } else { 0.0 };
    let above = |a: f64| 0.5 * erfc(a.max(0.0) / sy);

    let upper = m + cfg.cutoff_sigmas * narrow.sqrt();
    let result = if r <= 0.0 {
        integrate_1d(|x| normal_pdf(x, m, narrow) * below(x), (0.0, upper), cfg)?
    } else {
        // Region boundary β_r + ε_i = √2 α₀ / (1 − e^{−2r}).
        let k = std::f64::consts::SQRT_2 * alpha0 / (-(-2.0 * r).exp_m1());
        let inner = |x: f64| {
            let (lo, hi) = if x < k - x { (x, k - x) } else { (k - x, x) };
            normal_pdf(x, m, narrow) * (below(lo) + above(hi))
        };
        let kink = 0.5 * k;
        if kink > 0.0 && kink < upper {
            let a = integrate_1d(inner, (0.0, kink), cfg)?;
            let b = integrate_1d(inner, (kink, upper), cfg)?;
            crate::integrate::Quadrature {
                value: a.value + b.value,
                error: a.error + b.error,
                evaluations: a.evaluations + b.evaluations,
            }
        } else {
            integrate_1d(inner, (0.0, upper), cfg)?
        }
    };
    Ok(AttackResult {
        p_corr: 2.0 * result.value,
        strategy: Strategy::SimultaneousQuadrature,
        diagnostics: Diagnostics { integration_error: 2.0 * result.error, n_max: None },
    })
}

// ---------------------------------------------------------------------------
// Canonical phase measurement

const PHASE_SCAN_POINTS: usize = 4096;
const PHASE_BISECT_TOL: f64 = 1e-10;
const TIE_RTOL: f64 = 1e-12;

/// Eve's guess (quarter turns) for a measured phase `phi`, given the four
/// densities `P_θ(phi)`. Exact ties go to the phase closest to `phi`, then to
/// the smaller phase, which keeps the rule covariant under `θ → θ + π/2`.
pub fn phase_decide(densities: &[f64; 4], phi: f64) -> usize {
    let top = densities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied = |v: f64| top - v <= TIE_RTOL * top;
    let distance = |k: usize| {
        let d = (phi - k as f64 * FRAC_PI_2).rem_euclid(TAU);
        d.min(TAU - d)
    };
    (0..4)
        .filter(|&k| tied(densities[k]))
        .min_by(|&a, &b| distance(a).total_cmp(&distance(b)).then(a.cmp(&b)))
        .unwrap_or(0)
}

/// Decision pieces `(start, end, winner)` covering `[0, 2π)`.
fn phase_pieces(reference: &FockState, turns: usize) -> Vec<(f64, f64, usize)> {
    // Densities of the four states in the reference frame: index k is θ_ref + kπ/2.
    let dens = |phi: f64| reference.quarter_shifted_phase_densities(phi);
    // The rule compares absolute phases, so shift by the reference phase.
    let offset = turns as f64 * FRAC_PI_2;
    let decide = |phi: f64| phase_decide(&dens(phi), phi - offset);

    let step = TAU / PHASE_SCAN_POINTS as f64;
    let mut pieces = Vec::new();
    let mut start = 0.0;
    let mut current = decide(0.0);
    for j in 1..=PHASE_SCAN_POINTS {
        let phi = if j == PHASE_SCAN_POINTS { TAU } else { j as f64 * step };
        let next = decide(phi);
        if next != current {
            let (mut lo, mut hi) = (phi - step, phi);
            while hi - lo > PHASE_BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                if decide(mid) == current {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let cut = 0.5 * (lo + hi);
            pieces.push((start, cut, current));
            start = cut;
            current = next;
        }
    }
    pieces.push((start, TAU, current));
    pieces
}

/// Decision set `F_θ` of the reference phase as a list of intervals in `[0, 2π)`.
pub fn phase_decision_set(p: &PulseParams, cfg: &FockConfig) -> Result<Vec<(f64, f64)>> {
    let state = fock_coefficients(p, cfg)?;
    Ok(phase_pieces(&state, p.theta().quarter_turns())
        .into_iter()
        .filter(|&(_, _, k)| k == 0)
        .map(|(a, b, _)| (a, b))
        .collect())
}

/// Success probability of the canonical phase measurement,
/// `∫_{F_θ} P_θ(φ) dφ`, evaluated as `¼ ∫ max_θ' P_θ'(φ) dφ` piece by piece.
pub fn phase_pcorr(
    p: &PulseParams,
    fock: &FockConfig,
    cfg: &IntegrationConfig,
) -> Result<AttackResult> {
    let state = fock_coefficients(p, fock)?;
    let pieces = phase_pieces(&state, p.theta().quarter_turns());
    let mut total = 0.0;
    let mut error = 0.0;
    for (a, b, k) in pieces {
        let q = integrate_1d(|phi| state.quarter_shifted_phase_densities(phi)[k], (a, b), cfg)?;
        total += q.value;
        error += q.error;
    }
    Ok(AttackResult {
        p_corr: 0.25 * total,
        strategy: Strategy::PhaseMeasurement,
        diagnostics: Diagnostics { integration_error: 0.25 * error, n_max: Some(state.n_max()) },
    })
}

// ---------------------------------------------------------------------------
// Optimal orthogonal projection

/// Eigenvalue floor of the Gram matrix below which the eigenvector norm is
/// taken from the number basis instead.
pub const GRAM_FLOOR: f64 = 1e-13;

/// Four orthonormal measurement states covariant under `U = exp(iπa†a/2)`.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    /// `|φ_θ⟩`, indexed by quarter turns from the reference phase.
    pub frame: [FockState; 4],
    /// `|u_ν⟩` for `ν = 1, i, −1, −i`.
    pub eigenvectors: [FockState; 4],
    /// `q[θ][ν]`, with `|φ_θ⟩ = Σ_ν q[θ][ν] |u_ν⟩`.
    pub q: [[Complex64; 4]; 4],
    /// Eigenvalues of the Gram matrix of the four protocol states.
    pub gram_eigenvalues: [f64; 4],
    /// The protocol states `|ψ_θ⟩` the frame was built for.
    pub states: [FockState; 4],
}

pub fn build_projection_basis(p: &PulseParams, cfg: &FockConfig) -> Result<ProjectionBasis> {
    let reference = fock_coefficients(p, cfg)?;
    let states: [FockState; 4] = std::array::from_fn(|k| reference.rotated(k));

    // In the span of the four states U acts as the cyclic shift, so the Gram
    // matrix is circulant and diagonalized by the discrete Fourier transform.
    let first_row: [Complex64; 4] = std::array::from_fn(|l| state_overlap(&states[0], &states[l]));
    let gram_eigenvalues: [f64; 4] = std::array::from_fn(|j| {
        (0..4).map(|l| first_row[l] * i_pow(4 - (j * l) % 4)).sum::<Complex64>().re
    });

    // |u_ν⟩ ∝ Σ_k ν^{−k} |ψ_k⟩. With ν = iʲ the sum Σ_k i^{(n−j)k} equals 4
    // when n ≡ j (mod 4) and vanishes otherwise, so the combination is the
    // projection onto that residue class; evaluating it that way avoids the
    // cancellation the explicit sum suffers when an eigenvalue is tiny.
    let mut eigenvectors = Vec::with_capacity(4);
    for (j, &gram) in gram_eigenvalues.iter().enumerate() {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); reference.coeffs().len()];
        for (n, c) in reference.coeffs().iter().enumerate() {
            if n % 4 == j {
                coeffs[n] = *c;
            }
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate(format!(
                "no support in the U-eigenspace i^{j} (alpha0 = {}, r = {}); the four states span fewer than four dimensions",
                p.alpha0(),
                p.r()
            )));
        }
        if gram > GRAM_FLOOR {
            // Cross-check the two routes to the same norm.
            let gram_norm = (gram / 4.0).sqrt();
            if (gram_norm - norm).abs() > 1e-6 * norm.max(1e-3) {
                return Err(Error::Numerical(format!(
                    "Gram eigenvalue {gram} disagrees with sector norm {norm}"
                )));
            }
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        eigenvectors.push(FockState::from_coeffs(coeffs));
    }
    let eigenvectors: [FockState; 4] = eigenvectors.try_into().expect("four eigenvectors");

    let mut q = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (k, row) in q.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let o = state_overlap(&eigenvectors[j], &states[k]);
            *slot = 0.5 * o / o.norm();
        }
    }
    let frame: [FockState; 4] = std::array::from_fn(|k| {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); reference.coeffs().len()];
        for j in 0..4 {
            for (slot, u) in coeffs.iter_mut().zip(eigenvectors[j].coeffs()) {
                *slot += q[k][j] * u;
            }
        }
        FockState::from_coeffs(coeffs)
    });
    Ok(ProjectionBasis { frame, eigenvectors, q, gram_eigenvalues, states })
}

impl ProjectionBasis {
    /// `|⟨φ_θ|ψ_θ'⟩|²`, indexed `[θ][θ']`.
    pub fn outcome_probabilities(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|k| {
            std::array::from_fn(|l| state_overlap(&self.frame[k], &self.states[l]).norm_sqr())
        })
    }
}

/// `p_corr = ¼ Σ_θ |⟨φ_θ|ψ_θ⟩|²` for the covariant optimal frame.
pub fn projection_pcorr(p: &PulseParams, cfg: &FockConfig) -> Result<AttackResult> {
    let basis = build_projection_basis(p, cfg)?;
    let p_corr = 0.25
        * (0..4)
            .map(|k| state_overlap(&basis.frame[k], &basis.states[k]).norm_sqr())
            .sum::<f64>();
    Ok(AttackResult {
        p_corr,
        strategy: Strategy::OptimalProjection,
        diagnostics: Diagnostics {
            integration_error: 0.0,
            n_max: Some(basis.states[0].n_max()),
        },
    })
}

/// Runs one strategy with default numerics.
pub fn pcorr(
    strategy: Strategy,
    p: &PulseParams,
    fock: &FockConfig,
    cfg: &IntegrationConfig,
) -> Result<AttackResult> {
    match strategy {
        Strategy::SimultaneousQuadrature => simquad_pcorr(p, cfg),
        Strategy::PhaseMeasurement => phase_pcorr(p, fock, cfg),
        Strategy::OptimalProjection => projection_pcorr(p, fock),
    }
}
