//! Number-basis representation of the protocol states.
//!
//! The displaced squeezed vacuum `D(α₀e^{iθ}) S(r e^{2iθ}) |0⟩` is an
//! eigenstate of `a cosh r + a† e^{2iθ} sinh r` with eigenvalue
//! `γ = α₀ e^{iθ} e^{r}`. Projecting that eigen-equation onto `⟨n|` gives the
//! three-term recurrence
//!
//! ```text
//! cosh r √(n+1) c_{n+1} = γ c_n − e^{2iθ} sinh r √n c_{n−1}
//! ```
//!
//! which is the scaled Hermite recurrence and never forms factorials. The
//! coefficients are generated for `θ = 0` (all real) and rotated afterwards
//! with `c_n ↦ iⁿᵏ c_n`, so phase covariance holds exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{Phase, PulseParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Grow until the norm deficit drops below `tail_tol`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub n_max: Truncation,
    pub tail_tol: f64,
    /// Largest truncation `Auto` may reach.
    pub cap: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self { n_max: Truncation::Auto, tail_tol: 1e-10, cap: 512 }
    }
}

impl FockConfig {
    pub fn fixed(n_max: usize) -> Self {
        Self { n_max: Truncation::Fixed(n_max), ..Self::default() }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail_tol must be positive, got {}",
                self.tail_tol
            )));
        }
        if let Truncation::Fixed(0) = self.n_max {
            return Err(Error::InvalidParameter("n_max must be positive".into()));
        }
        Ok(())
    }
}

/// Rule-of-thumb truncation order for a pulse.
pub fn suggested_n_max(p: &PulseParams) -> usize {
    let s = p.r().sinh();
    (30.0 + 40.0 * s * s + 10.0 * p.alpha0() * p.alpha0()).ceil() as usize
}

/// Truncated state `Σ_{n ≤ n_max} c_n |n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    coeffs: Vec<Complex64>,
    norm_deficit: f64,
}

impl FockState {
    /// Wraps raw coefficients; the deficit is recomputed from them.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        Self { coeffs, norm_deficit: (1.0 - norm).max(0.0) }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `1 − Σ|c_n|²`, clamped at zero.
    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies `U^k = exp(i k π a†a / 2)`.
    pub fn rotated(&self, quarter_turns: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * i_pow(n * quarter_turns))
            .collect();
        Self { coeffs, norm_deficit: self.norm_deficit }
    }

    /// `⟨φ|ψ⟩ = Σ_n e^{−inφ} c_n`.
    pub fn phase_amplitude(&self, phi: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -phi);
        let mut w = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * w;
            w *= step;
        }
        acc
    }

    /// The four densities `P_0(φ − kπ/2)`, k = 0..3, from one pass over the
    /// coefficients. Equal to `P_θ(φ)` for `θ = kπ/2` when `self` is `|ψ_0⟩`.
    pub fn quarter_shifted_phase_densities(&self, phi: f64) -> [f64; 4] {
        let step = Complex64::from_polar(1.0, -phi);
        let mut w = Complex64::new(1.0, 0.0);
        let mut sectors = [Complex64::new(0.0, 0.0); 4];
        for (n, c) in self.coeffs.iter().enumerate() {
            sectors[n % 4] += c * w;
            w *= step;
        }
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let amp: Complex64 = (0..4).map(|j| sectors[j] * i_pow(j * k)).sum();
            *slot = amp.norm_sqr() / (2.0 * PI);
        }
        out
    }
}

/// `iᵏ` without rounding error.
pub(crate) fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Number-basis coefficients of `|ψ_θ⟩`.
pub fn fock_coefficients(p: &PulseParams, cfg: &FockConfig) -> Result<FockState> {
    cfg.validate()?;
    let real = reference_coefficients(p.alpha0(), p.r(), cfg)?;
    let norm: f64 = real.iter().map(|c| c * c).sum();
    let k = p.theta().quarter_turns();
    let coeffs = real
        .iter()
        .enumerate()
        .map(|(n, &c)| i_pow(n * k) * c)
        .collect();
    Ok(FockState { coeffs, norm_deficit: (1.0 - norm).max(0.0) })
}

fn reference_coefficients(alpha0: f64, r: f64, cfg: &FockConfig) -> Result<Vec<f64>> {
    let (ch, sh) = (r.cosh(), r.sinh());
    let gamma = alpha0 * r.exp();
    let c0 = (-0.5 * alpha0 * alpha0 * (1.0 + r.tanh())).exp() / ch.sqrt();

    let limit = match cfg.n_max {
        Truncation::Fixed(n) => n,
        Truncation::Auto => cfg.cap,
    };
    let mut coeffs = Vec::with_capacity(limit.min(4096) + 1);
    coeffs.push(c0);
    let mut norm = c0 * c0;
    let mut prev = 0.0;
    let mut cur = c0;
    for n in 0..limit {
        // Keep at least one number state per residue class mod 4.
        if cfg.n_max == Truncation::Auto && n >= 3 && 1.0 - norm <= cfg.tail_tol {
            break;
        }
        let nf = n as f64;
        let next = (gamma * cur - sh * nf.sqrt() * prev) / (ch * (nf + 1.0).sqrt());
        coeffs.push(next);
        norm += next * next;
        prev = cur;
        cur = next;
    }
    let deficit = (1.0 - norm).max(0.0);
    if deficit > cfg.tail_tol {
        return Err(Error::Truncation { n_max: coeffs.len() - 1, deficit });
    }
    Ok(coeffs)
}

/// `⟨a|b⟩ = Σ conj(a_n) b_n`; the shorter state is padded with zeros.
pub fn state_overlap(a: &FockState, b: &FockState) -> Complex64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Canonical phase density `P_θ(φ) = |⟨φ|ψ_θ⟩|² / 2π`.
pub fn phase_distribution(p: &PulseParams, phi: f64, cfg: &FockConfig) -> Result<f64> {
    let state = fock_coefficients(p, cfg)?;
    Ok(phase_density(&state, phi))
}

pub fn phase_density(state: &FockState, phi: f64) -> f64 {
    state.phase_amplitude(phi).norm_sqr() / (2.0 * PI)
}

/// States for all four phases of a pulse family, indexed by quarter turns.
pub fn protocol_states(alpha0: f64, r: f64, cfg: &FockConfig) -> Result<[FockState; 4]> {
    let base = fock_coefficients(&PulseParams::new(alpha0, r, Phase::Zero)?, cfg)?;
    Ok([base.rotated(0), base.rotated(1), base.rotated(2), base.rotated(3)])
}
