use std::sync::atomic::{AtomicUsize, Ordering};

use cvqkd_core::attacks::{pcorr, Strategy};
use cvqkd_core::optimize::{maximize, Optimum, OptimizerConfig};
use cvqkd_core::protocol::{bob_stats, calibrate_amplitude, ProtocolPoint};
use cvqkd_core::superior::{joint_density, secret_rate};
use cvqkd_core::{Adversary, Channel, Phase, PulseParams};
use rayon::prelude::*;

use crate::args::{
    adversary_name, CalibrateArgs, Fig1Args, Fig2Args, Fig3Args, Fig4Args, Fig5Args, OptimizeArgs, Resolved,
};
use crate::table::{sig12, Cell, Table};
use crate::Failure;

type Outcome = Result<Table, Failure>;

/// Inclusive grid `lo, lo + step, …` up to `hi`.
fn steps(name: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && step.is_finite() && hi >= lo) {
        return Err(Failure::Validation(format!("{name}: need a finite range with min ≤ max and step > 0")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(Failure::Validation(format!("{name}: {n} points is too many")));
    }
    Ok((0..n).map(|k| lo + step * k as f64).collect())
}

fn non_empty(name: &str, v: Vec<f64>) -> Result<Vec<f64>, Failure> {
    if v.is_empty() {
        return Err(Failure::Validation(format!("{name} must not be empty")));
    }
    Ok(v)
}

/// Reports finished rows of a long sweep on standard error.
struct Progress<'a> {
    label: &'a str,
    total: usize,
    done: AtomicUsize,
}

impl<'a> Progress<'a> {
    fn new(label: &'a str, total: usize) -> Self {
        Self { label, total, done: AtomicUsize::new(0) }
    }

    fn tick(&self) {
        let n = self.done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!("{}: {n}/{}", self.label, self.total);
    }
}

pub fn point(run: Resolved<crate::args::NoExtra>) -> Outcome {
    let s = &run.shared;
    let pulse = PulseParams::reference(s.alpha0.unwrap_or(0.6), s.r.unwrap_or(0.0))?;
    let pt = ProtocolPoint::new(pulse, s.channel(1.0)?, s.beta_c.unwrap_or(0.0))?;
    let adversary = s.adversary();
    let rep = secret_rate(&pt, adversary, &s.integration()?)?;
    let mut t = Table::new([
        "alpha0", "r", "t2", "beta_c", "p1", "p0", "r_acc", "delta", "i_ab", "g_ab", "p_c", "tau", "s_ab", "adversary",
    ]);
    let b = rep.bob;
    t.push(vec![
        pt.pulse.alpha0().into(),
        pt.pulse.r().into(),
        pt.channel.transmission().into(),
        pt.beta_c.into(),
        b.p1.into(),
        b.p0.into(),
        b.r_acc.into(),
        b.delta.into(),
        b.i_ab.into(),
        b.g_ab.into(),
        rep.p_c.into(),
        rep.tau.into(),
        rep.s_ab.into(),
        adversary_name(adversary).into(),
    ]);
    Ok(t)
}

pub fn fig1(run: Resolved<Fig1Args>) -> Outcome {
    let s = &run.shared;
    let pulse = PulseParams::reference(s.alpha0.unwrap_or(0.6), s.r.unwrap_or(0.0))?;
    let channel = s.channel(1.0)?;
    let lo = s.beta_c.unwrap_or(0.0);
    let betas = steps("beta_c", lo, run.extra.beta_max.unwrap_or(1.5), run.extra.beta_step.unwrap_or(0.01))?;
    let cfg = s.integration()?;
    let rows = betas
        .par_iter()
        .map(|&bc| {
            let b = bob_stats(&ProtocolPoint::new(pulse, channel, bc)?, &cfg)?;
            Ok(vec![bc.into(), b.r_acc.into(), b.delta.into(), b.i_ab.into(), b.g_ab.into()])
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut t = Table::new(["beta_c", "r_acc", "delta", "i_ab", "g_ab"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn fig2(run: Resolved<Fig2Args>) -> Outcome {
    let s = &run.shared;
    let e = &run.extra;
    let target = e.delta.unwrap_or(1e-3);
    let rs = non_empty("r-values", e.r_values.clone().unwrap_or_else(|| vec![0.0, 0.5]))?;
    let betas = steps("beta_c", s.beta_c.unwrap_or(0.0), e.beta_max.unwrap_or(2.0), e.beta_step.unwrap_or(0.1))?;
    let channel = s.channel(1.0)?;
    let (cfg, fock) = (s.integration()?, s.fock()?);
    let strategies = [Strategy::SimultaneousQuadrature, Strategy::PhaseMeasurement, Strategy::OptimalProjection];

    let mut headers = vec!["beta_c".to_string()];
    for r in &rs {
        let r = sig12(*r);
        for col in ["alpha0", "delta", "r_acc", "simquad", "phase", "projection"] {
            headers.push(format!("{col}_r{r}"));
        }
    }
    let progress = Progress::new("fig2", betas.len());
    let rows = betas
        .par_iter()
        .map(|&bc| {
            let mut row: Vec<Cell> = vec![bc.into()];
            for &r in &rs {
                let a = calibrate_amplitude(r, bc, target)?;
                let pulse = PulseParams::reference(a, r)?;
                let b = bob_stats(&ProtocolPoint::new(pulse, channel, bc)?, &cfg)?;
                row.extend([a.into(), b.delta.into(), b.r_acc.into()]);
                for st in strategies {
                    row.push(pcorr(st, &pulse, &fock, &cfg)?.p_corr.into());
                }
            }
            progress.tick();
            Ok(row)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut t = Table::new(headers);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn fig3(run: Resolved<Fig3Args>) -> Outcome {
    let s = &run.shared;
    let e = &run.extra;
    let pulse = PulseParams::reference(s.alpha0.unwrap_or(1.0), s.r.unwrap_or(0.5))?;
    let pt = ProtocolPoint::new(pulse, s.channel(0.75)?, 0.0)?;
    let step = e.step.unwrap_or(0.025);
    let betas = steps("beta_r", e.beta_min.unwrap_or(-1.5), e.beta_max.unwrap_or(3.0), step)?;
    let eps = steps("eps_r", e.eps_min.unwrap_or(-3.0), e.eps_max.unwrap_or(2.0), step)?;
    let mut t = Table::new(["beta_r", "eps_r", "density"]);
    for &b in &betas {
        for &x in &eps {
            t.push(vec![b.into(), x.into(), joint_density(&pt, Phase::Zero, b, x).into()]);
        }
    }
    Ok(t)
}

fn optimizer_config(s: &crate::args::Shared, restarts: usize) -> Result<OptimizerConfig, Failure> {
    let cfg = OptimizerConfig { restarts, integration: s.integration()?, ..OptimizerConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn optimum(r: f64, loss: f64, adversary: Adversary, cfg: &OptimizerConfig) -> Result<Optimum, Failure> {
    Ok(maximize(r, &Channel::from_loss(loss)?, adversary, cfg)?)
}

pub fn fig4(run: Resolved<Fig4Args>) -> Outcome {
    let s = &run.shared;
    let e = &run.extra;
    let rs = non_empty("r-values", e.r_values.clone().unwrap_or_else(|| vec![0.0, 0.5, 2.0]))?;
    let losses = steps("loss", e.loss_min.unwrap_or(0.02), e.loss_max.unwrap_or(0.96), e.loss_step.unwrap_or(0.02))?;
    let adversary = s.adversary();
    let cfg = optimizer_config(s, 0)?;
    let jobs: Vec<(f64, f64)> = rs.iter().flat_map(|&r| losses.iter().map(move |&l| (r, l))).collect();
    let progress = Progress::new("fig4", jobs.len());
    let rows = jobs
        .par_iter()
        .map(|&(r, loss)| {
            let o = optimum(r, loss, adversary, &cfg)?;
            progress.tick();
            Ok(vec![r.into(), loss.into(), o.alpha0_star.into(), o.beta_c_star.into(), o.s_star.into(), o.positive.into()])
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut t = Table::new(["r", "loss", "alpha0_star", "beta_c_star", "s_star", "positive"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn fig5(run: Resolved<Fig5Args>) -> Outcome {
    let s = &run.shared;
    let e = &run.extra;
    let losses = non_empty("loss-values", e.loss_values.clone().unwrap_or_else(|| vec![0.5, 0.75, 0.9]))?;
    let rs = steps("r", s.r.unwrap_or(0.0), e.r_max.unwrap_or(1.5), e.r_step.unwrap_or(0.05))?;
    let cfg = optimizer_config(s, 0)?;
    let jobs: Vec<(f64, f64)> = losses.iter().flat_map(|&l| rs.iter().map(move |&r| (l, r))).collect();
    let progress = Progress::new("fig5", jobs.len());
    let rows = jobs
        .par_iter()
        .map(|&(loss, r)| {
            let g = optimum(r, loss, Adversary::GeneralBound, &cfg)?;
            let q = optimum(r, loss, Adversary::QuadratureEve, &cfg)?;
            progress.tick();
            Ok(vec![
                loss.into(),
                r.into(),
                g.s_star.into(),
                q.s_star.into(),
                g.alpha0_star.into(),
                g.beta_c_star.into(),
                q.alpha0_star.into(),
                q.beta_c_star.into(),
            ])
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut t = Table::new([
        "loss",
        "r",
        "s_general",
        "s_quadrature",
        "alpha0_general",
        "beta_c_general",
        "alpha0_quadrature",
        "beta_c_quadrature",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn optimize(run: Resolved<OptimizeArgs>) -> Outcome {
    let s = &run.shared;
    let r = s.r.unwrap_or(0.0);
    let channel = s.channel(0.5)?;
    let adversary = s.adversary();
    let cfg = optimizer_config(s, run.extra.restarts.unwrap_or(0))?;
    let o = maximize(r, &channel, adversary, &cfg)?;
    let mut t = Table::new([
        "r", "loss", "adversary", "alpha0_star", "beta_c_star", "s_star", "positive", "evaluations",
    ]);
    t.push(vec![
        r.into(),
        channel.loss().into(),
        adversary_name(adversary).into(),
        o.alpha0_star.into(),
        o.beta_c_star.into(),
        o.s_star.into(),
        o.positive.into(),
        o.evaluations.into(),
    ]);
    Ok(t)
}

pub fn calibrate(run: Resolved<CalibrateArgs>) -> Outcome {
    let s = &run.shared;
    let (r, bc) = (s.r.unwrap_or(0.0), s.beta_c.unwrap_or(0.0));
    let target = run.extra.delta.unwrap_or(1e-3);
    let a = calibrate_amplitude(r, bc, target).map_err(|e| match e {
        cvqkd_core::Error::Calibration(m) if !(target > 0.0 && target <= 0.5) => Failure::Validation(m),
        other => other.into(),
    })?;
    let pt = ProtocolPoint::new(PulseParams::reference(a, r)?, Channel::lossless(), bc)?;
    let b = bob_stats(&pt, &s.integration()?)?;
    let mut t = Table::new(["r", "beta_c", "target_delta", "alpha0", "delta"]);
    t.push(vec![r.into(), bc.into(), target.into(), a.into(), b.delta.into()]);
    Ok(t)
}
