//! Brute-force reference implementations used only by the tests.
//!
//! Each oracle takes a different route from the production code it checks:
//! sampling instead of quadrature, position-space Gaussians instead of the
//! number basis, or the number basis instead of closed-form Gaussians.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2, TAU};

use cvqkd_core::attacks::{build_projection_basis, phase_decide, simquad_decide};
use cvqkd_core::fock::{fock_coefficients, FockConfig, FockState};
use cvqkd_core::gaussian::{wigner_joint, Channel, Phase, PulseParams, QuadPoint};
use cvqkd_core::integrate::{integrate_1d, IntegrationConfig};
use cvqkd_core::superior::{EveCase, Sign};
use cvqkd_core::{Result, Strategy};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Reproducible random source: identical seeds give identical streams.
pub struct SeededSampler {
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        mean + sd * z
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn quarter(&mut self) -> usize {
        self.rng.gen_range(0..4)
    }
}

/// Monte Carlo estimate of an intercept attack's success rate and its
/// standard error.
pub fn mc_pcorr(strategy: Strategy, p: &PulseParams, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    assert!(n_samples >= 100_000, "oracle needs at least 1e5 samples");
    let mut rng = SeededSampler::new(seed);
    let hits = match strategy {
        Strategy::SimultaneousQuadrature => mc_simquad(p, n_samples, &mut rng),
        Strategy::PhaseMeasurement => mc_phase(p, n_samples, &mut rng)?,
        Strategy::OptimalProjection => mc_projection(p, n_samples, &mut rng)?,
    };
    let est = hits as f64 / n_samples as f64;
    Ok((est, (est * (1.0 - est) / n_samples as f64).sqrt()))
}

fn mc_simquad(p: &PulseParams, n: usize, rng: &mut SeededSampler) -> usize {
    let (a, r) = (p.alpha0(), p.r());
    // After a balanced splitter: signal α₀/√2, squeezed and anti-squeezed
    // quadrature variances averaged with vacuum.
    let m = a / SQRT_2;
    let narrow = ((1.0 + (-2.0 * r).exp()) / 8.0).sqrt();
    let broad = ((1.0 + (2.0 * r).exp()) / 8.0).sqrt();
    let mut hits = 0;
    for _ in 0..n {
        let k = rng.quarter();
        let (mx, sx, my, sy) = match k {
            0 => (m, narrow, 0.0, broad),
            1 => (0.0, broad, m, narrow),
            2 => (-m, narrow, 0.0, broad),
            _ => (0.0, broad, -m, narrow),
        };
        let x = rng.normal(mx, sx);
        let y = rng.normal(my, sy);
        if simquad_decide(a, r, x, y).quarter_turns() == k {
            hits += 1;
        }
    }
    hits
}

fn direct_phase_density(c: &[Complex64], phi: f64) -> f64 {
    let amp: Complex64 = c
        .iter()
        .enumerate()
        .map(|(n, cn)| cn * Complex64::from_polar(1.0, -(n as f64) * phi))
        .sum();
    amp.norm_sqr() / TAU
}

const PHASE_TABLE: usize = 65_536;

fn mc_phase(p: &PulseParams, n: usize, rng: &mut SeededSampler) -> Result<usize> {
    let state = fock_coefficients(&p.with_theta(Phase::Zero), &FockConfig::default())?;
    let c = state.coeffs().to_vec();
    // Cumulative table of P_0 by the trapezoid rule.
    let h = TAU / PHASE_TABLE as f64;
    let dens: Vec<f64> = (0..=PHASE_TABLE).map(|j| direct_phase_density(&c, j as f64 * h)).collect();
    let mut cdf = vec![0.0; PHASE_TABLE + 1];
    for j in 0..PHASE_TABLE {
        cdf[j + 1] = cdf[j] + 0.5 * h * (dens[j] + dens[j + 1]);
    }
    let total = cdf[PHASE_TABLE];
    let mut hits = 0;
    for _ in 0..n {
        let u = rng.uniform() * total;
        let j = cdf.partition_point(|&v| v <= u).clamp(1, PHASE_TABLE) - 1;
        let frac = (u - cdf[j]) / (cdf[j + 1] - cdf[j]).max(f64::MIN_POSITIVE);
        let phi0 = (j as f64 + frac) * h;
        let k = rng.quarter();
        let phi = (phi0 + k as f64 * PI / 2.0).rem_euclid(TAU);
        let four: [f64; 4] = std::array::from_fn(|l| direct_phase_density(&c, phi - l as f64 * PI / 2.0));
        if phase_decide(&four, phi) == k {
            hits += 1;
        }
    }
    Ok(hits)
}

fn mc_projection(p: &PulseParams, n: usize, rng: &mut SeededSampler) -> Result<usize> {
    let cfg = FockConfig::default();
    let basis = build_projection_basis(&p.with_theta(Phase::Zero), &cfg)?;
    let reference = fock_coefficients(&p.with_theta(Phase::Zero), &cfg)?;
    // Outcome probabilities |⟨φ_j|ψ_k⟩|² from explicit sums over the number basis.
    let probs: Vec<[f64; 4]> = (0..4)
        .map(|k| {
            let psi: Vec<Complex64> = reference
                .coeffs()
                .iter()
                .enumerate()
                .map(|(m, c)| c * Complex64::new(0.0, 1.0).powu((m * k) as u32))
                .collect();
            std::array::from_fn(|j| {
                basis.frame[j]
                    .coeffs()
                    .iter()
                    .zip(&psi)
                    .map(|(f, s)| f.conj() * s)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
        })
        .collect();
    let mut hits = 0;
    for _ in 0..n {
        let k = rng.quarter();
        let u = rng.uniform() * probs[k].iter().sum::<f64>();
        let mut acc = 0.0;
        let mut outcome = 3;
        for (j, pj) in probs[k].iter().enumerate() {
            acc += pj;
            if u < acc {
                outcome = j;
                break;
            }
        }
        if outcome == k {
            hits += 1;
        }
    }
    Ok(hits)
}

// ---------------------------------------------------------------------------
// Position-space Gaussian wavefunctions

/// `ψ(q) = exp(−A q² + B q + C)` in the oscillator coordinate `q = (a + a†)/√2`.
#[derive(Debug, Clone, Copy)]
pub struct GaussWave {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl GaussWave {
    fn log_inner(&self, other: &Self) -> Complex64 {
        let a = self.a.conj() + other.a;
        let b = self.b.conj() + other.b;
        let c = self.c.conj() + other.c;
        0.5 * (Complex64::new(PI, 0.0) / a).ln() + b * b / (4.0 * a) + c
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.log_inner(other).exp()
    }
}

/// Wavefunction of the pulse from its first and second moments, with the
/// global phase fixed so that `⟨0|ψ⟩` is real and positive.
pub fn gaussian_wave(p: &PulseParams) -> GaussWave {
    let th = p.theta().radians();
    let (s, c) = th.sin_cos();
    let (em, ep) = ((-2.0 * p.r()).exp(), (2.0 * p.r()).exp());
    let vqq = (em * c * c + ep * s * s) / 2.0;
    let vqp = c * s * (em - ep) / 2.0;
    let q0 = SQRT_2 * p.alpha0() * c;
    let p0 = SQRT_2 * p.alpha0() * s;
    let kappa = Complex64::new(1.0, -2.0 * vqp) / (2.0 * vqq);
    let mut w = GaussWave {
        a: kappa / 2.0,
        b: kappa * q0 + Complex64::new(0.0, p0),
        c: -kappa * q0 * q0 / 2.0 - 0.25 * (2.0 * PI * vqq).ln(),
    };
    let vacuum = GaussWave {
        a: Complex64::new(0.5, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(-0.25 * PI.ln(), 0.0),
    };
    let phase = vacuum.log_inner(&w).im;
    w.c -= Complex64::new(0.0, phase);
    w
}

/// `⟨ψ_1|ψ_2⟩` from the analytic Gaussian integral.
pub fn brute_gaussian_overlap(p1: &PulseParams, p2: &PulseParams) -> Complex64 {
    gaussian_wave(p1).inner(&gaussian_wave(p2))
}

// ---------------------------------------------------------------------------
// Number-basis wavefunctions

/// Harmonic-oscillator eigenfunctions `h_0..h_n` at `q`.
pub fn hermite_functions(n: usize, q: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI.powf(-0.25) * (-0.5 * q * q).exp());
    if n >= 1 {
        h.push(SQRT_2 * q * h[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * q * h[k] - (k as f64 / (k as f64 + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Position wavefunction in the quadrature `x = q/√2` (vacuum variance 1/4).
pub fn fock_wavefunction(state: &FockState, x: f64) -> Complex64 {
    let h = hermite_functions(state.coeffs().len().saturating_sub(1), SQRT_2 * x);
    let sum: Complex64 = state.coeffs().iter().zip(&h).map(|(c, hn)| c * hn).sum();
    sum * 2f64.powf(0.25)
}

/// Eve's conditional state on `grid`, from the number-basis pulse and a
/// finite-width bin around Bob's outcome, normalized on the grid.
pub fn grid_conditional_state(
    p: &PulseParams,
    ch: &Channel,
    case: EveCase,
    sign: Sign,
    beta_abs: f64,
    bin_width: f64,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    assert!(bin_width <= 0.01 && bin_width > 0.0);
    let (theta, b) = match (case, sign) {
        (EveCase::NoError, Sign::Plus) => (Phase::Zero, beta_abs),
        (EveCase::NoError, Sign::Minus) => (Phase::Pi, -beta_abs),
        (EveCase::BitError, Sign::Minus) => (Phase::Zero, -beta_abs),
        (EveCase::BitError, Sign::Plus) => (Phase::Pi, beta_abs),
    };
    let state = fock_coefficients(&p.with_theta(theta), &FockConfig::default())?;
    let (t, r) = (ch.t(), ch.r());
    let vacuum = |u: f64| (2.0 / PI).powf(0.25) * (-u * u).exp();
    let (nodes, weights) = gauss_legendre(8);
    let mut out: Vec<Complex64> = grid
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(z, w)| {
                    let xb = b + 0.5 * bin_width * z;
                    0.5 * w * fock_wavefunction(&state, t * xb - r * x) * vacuum(r * xb + t * x)
                })
                .sum::<Complex64>()
        })
        .collect();
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    out.iter_mut().for_each(|z| *z /= norm);
    Ok(out)
}

/// Nodes and weights of `n`-point Gauss–Legendre on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `order` nodes.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|k| {
            let lo = a + k as f64 * h;
            nodes
                .iter()
                .zip(weights.iter())
                .map(move |(z, w)| (lo + 0.5 * h * (z + 1.0), 0.5 * h * w))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Integrates the 4-D Wigner function in the splitter-input coordinates
/// `u = Tβ − Rε`, `v = Rβ + Tε` (a rotation, unit Jacobian), one tensor rule
/// per coordinate sized to its own spread.
pub fn wigner_mass(p: &PulseParams, ch: &Channel) -> f64 {
    let (t, r) = (ch.t(), ch.r());
    let a = p.alpha0();
    // Input mode: displaced by α₀e^{iθ}, standard deviations e^{∓r}/2 along
    // and across the displacement.
    let (narrow, broad) = (0.5 * (-p.r()).exp(), 0.5 * p.r().exp());
    let k = p.theta().quarter_turns();
    let (mean_r, mean_i) = match k {
        0 => (a, 0.0),
        1 => (0.0, a),
        2 => (-a, 0.0),
        _ => (0.0, -a),
    };
    let (sd_r, sd_i) = if k.is_multiple_of(2) { (narrow, broad) } else { (broad, narrow) };
    let rule = |m: f64, sd: f64| composite_rule(m - 10.0 * sd, m + 10.0 * sd, 3, 12);
    let rule_u_r = rule(mean_r, sd_r);
    let rule_u_i = rule(mean_i, sd_i);
    let rule_v = rule(0.0, 0.5);
    let mut total = 0.0;
    for &(ur, wur) in &rule_u_r {
        for &(ui, wui) in &rule_u_i {
            for &(vr, wvr) in &rule_v {
                for &(vi, wvi) in &rule_v {
                    let q = QuadPoint::new(t * ur + r * vr, t * ui + r * vi, -r * ur + t * vr, -r * ui + t * vi);
                    total += wur * wui * wvr * wvi * wigner_joint(p, ch, &q);
                }
            }
        }
    }
    total
}

/// `∫_{−w}^{w} f` over panels no wider than `width`, so no peak is skipped.
pub fn paneled(f: impl Fn(f64) -> f64, w: f64, width: f64, cfg: &IntegrationConfig) -> f64 {
    let n = (2.0 * w / width).ceil() as usize;
    let h = 2.0 * w / n as f64;
    (0..n)
        .map(|k| {
            let lo = -w + k as f64 * h;
            integrate_1d(&f, (lo, lo + h), cfg).unwrap().value
        })
        .sum()
}
