//! Maximization of the secret key rate over pulse amplitude and threshold.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{Channel, PulseParams};
use crate::integrate::IntegrationConfig;
use crate::protocol::ProtocolPoint;
use crate::superior::{secret_rate, Adversary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Grid points along `α₀` (log-spaced) and `β_c` (linear).
    pub grid: (usize, usize),
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    /// Pattern search stops once both steps are below this.
    pub step_tol: f64,
    pub shrink: f64,
    pub max_iterations: usize,
    /// Extra pattern searches started from the next-best grid cells.
    pub restarts: usize,
    pub integration: IntegrationConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid: (40, 40),
            alpha_range: (0.05, 4.0),
            beta_range: (0.0, 5.0),
            step_tol: 1e-4,
            shrink: 0.5,
            max_iterations: 10_000,
            restarts: 0,
            integration: IntegrationConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let (na, nb) = self.grid;
        let (a0, a1) = self.alpha_range;
        let (b0, b1) = self.beta_range;
        if na < 2 || nb < 2 {
            return Err(Error::InvalidParameter("optimizer grid needs at least 2x2 points".into()));
        }
        if !(a0 > 0.0 && a1 > a0 && a1.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad amplitude range ({a0}, {a1})")));
        }
        if !(b0 >= 0.0 && b1 > b0 && b1.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad threshold range ({b0}, {b1})")));
        }
        if !(self.step_tol > 0.0 && self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter("step tolerance and shrink factor must lie in (0, 1)".into()));
        }
        self.integration.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub alpha0_star: f64,
    pub beta_c_star: f64,
    pub s_star: f64,
    pub adversary: Adversary,
    /// False when no point with a positive rate was found; the other fields
    /// then describe the least negative point.
    pub positive: bool,
    /// Accepted pattern-search iterates `(α₀, β_c, S)`.
    pub trace: Vec<(f64, f64, f64)>,
    pub evaluations: usize,
}

/// Rate at one point; an empty post-selection carries no key.
pub fn rate_at(
    r: f64,
    channel: &Channel,
    adversary: Adversary,
    alpha0: f64,
    beta_c: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let pt = ProtocolPoint::new(PulseParams::reference(alpha0, r)?, *channel, beta_c)?;
    match secret_rate(&pt, adversary, cfg) {
        Ok(rep) => Ok(rep.s_ab),
        Err(Error::EmptySelection) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

fn grid_axes(cfg: &OptimizerConfig) -> (Vec<f64>, Vec<f64>) {
    let (na, nb) = cfg.grid;
    let (la, lb) = (cfg.alpha_range.0.ln(), cfg.alpha_range.1.ln());
    let alphas = (0..na).map(|i| (la + (lb - la) * i as f64 / (na - 1) as f64).exp()).collect();
    let (b0, b1) = cfg.beta_range;
    let betas = (0..nb).map(|j| b0 + (b1 - b0) * j as f64 / (nb - 1) as f64).collect();
    (alphas, betas)
}

/// `(α₀, β_c, S)`.
type Iterate = (f64, f64, f64);

struct Search<'a> {
    r: f64,
    channel: &'a Channel,
    adversary: Adversary,
    cfg: &'a OptimizerConfig,
    evaluations: usize,
}

impl Search<'_> {
    fn eval(&mut self, a: f64, b: f64) -> Result<f64> {
        self.evaluations += 1;
        rate_at(self.r, self.channel, self.adversary, a, b, &self.cfg.integration)
    }

    fn clamp(&self, a: f64, b: f64) -> (f64, f64) {
        (
            a.clamp(self.cfg.alpha_range.0, self.cfg.alpha_range.1),
            b.clamp(self.cfg.beta_range.0, self.cfg.beta_range.1),
        )
    }

    /// Compass search from `start` with initial steps `steps`.
    fn pattern(&mut self, start: Iterate, steps: (f64, f64)) -> Result<(Iterate, Vec<Iterate>)> {
        let (mut a, mut b, mut s) = start;
        let (mut da, mut db) = steps;
        let mut trace = vec![start];
        for _ in 0..self.cfg.max_iterations {
            if da < self.cfg.step_tol && db < self.cfg.step_tol {
                break;
            }
            let mut best = None;
            for (ma, mb) in [(da, 0.0), (-da, 0.0), (0.0, db), (0.0, -db)] {
                let (na, nb) = self.clamp(a + ma, b + mb);
                if (na, nb) == (a, b) {
                    continue;
                }
                let v = self.eval(na, nb)?;
                if v > s && best.is_none_or(|(_, _, bv)| v > bv) {
                    best = Some((na, nb, v));
                }
            }
            match best {
                Some(p) => {
                    (a, b, s) = p;
                    trace.push(p);
                }
                None => {
                    da *= self.cfg.shrink;
                    db *= self.cfg.shrink;
                }
            }
        }
        Ok(((a, b, s), trace))
    }
}

/// Maximizes `S(α₀, β_c)` at fixed squeezing and channel: a parallel grid scan
/// followed by compass search from the best cell.
pub fn maximize(r: f64, channel: &Channel, adversary: Adversary, cfg: &OptimizerConfig) -> Result<Optimum> {
    cfg.validate()?;
    PulseParams::reference(0.0, r)?;
    if !(channel.transmission() > 0.0) {
        return Err(Error::InvalidParameter("channel loss must be below 1".into()));
    }
    let (alphas, betas) = grid_axes(cfg);
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    let values = cells
        .par_iter()
        .map(|&(a, b)| rate_at(r, channel, adversary, a, b, &cfg.integration))
        .collect::<Result<Vec<f64>>>()?;

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    if values[order[0]] == f64::NEG_INFINITY {
        return Err(Error::EmptySelection);
    }

    let mut search = Search { r, channel, adversary, cfg, evaluations: cells.len() };
    let mut best: Option<(Iterate, Vec<Iterate>)> = None;
    for &idx in order.iter().take(1 + cfg.restarts) {
        let (a, b) = cells[idx];
        if values[idx] == f64::NEG_INFINITY {
            break;
        }
        // Steps of one grid cell; the amplitude axis is log-spaced.
        let ia = idx / betas.len();
        let da = if ia + 1 < alphas.len() { alphas[ia + 1] - a } else { a - alphas[ia - 1] };
        let db = betas[1] - betas[0];
        let found = search.pattern((a, b, values[idx]), (da, db))?;
        if best.as_ref().is_none_or(|cur| found.0 .2 > cur.0 .2) {
            best = Some(found);
        }
    }
    let ((a, b, s), trace) = best.expect("at least one search");
    Ok(Optimum {
        alpha0_star: a,
        beta_c_star: b,
        s_star: s,
        adversary,
        positive: s > 0.0,
        trace,
        evaluations: search.evaluations,
    })
}

/// One point of a parameter sweep; failures are kept per point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub parameter: f64,
    pub result: Result<Optimum>,
}

/// Optimum for each channel loss `R²` at fixed squeezing. Output order
/// follows `losses`.
pub fn sweep_loss(r: f64, losses: &[f64], adversary: Adversary, cfg: &OptimizerConfig) -> Vec<SweepPoint> {
    losses
        .par_iter()
        .map(|&loss| SweepPoint {
            parameter: loss,
            result: Channel::from_loss(loss).and_then(|ch| maximize(r, &ch, adversary, cfg)),
        })
        .collect()
}

/// Optimum for each squeezing parameter at fixed channel loss.
pub fn sweep_squeezing(loss: f64, rs: &[f64], adversary: Adversary, cfg: &OptimizerConfig) -> Vec<SweepPoint> {
    rs.par_iter()
        .map(|&r| SweepPoint {
            parameter: r,
            result: Channel::from_loss(loss).and_then(|ch| maximize(r, &ch, adversary, cfg)),
        })
        .collect()
}
