use cvqkd_core::gaussian::{Channel, PulseParams};
use cvqkd_core::optimize::{maximize, sweep_loss, sweep_squeezing, OptimizerConfig};
use cvqkd_core::protocol::ProtocolPoint;
use cvqkd_core::superior::{secret_rate, Adversary};

const LOSSES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn optimum(r: f64, loss: f64, adv: Adversary) -> cvqkd_core::Optimum {
    maximize(r, &Channel::from_loss(loss).unwrap(), adv, &OptimizerConfig::default()).unwrap()
}

#[test]
fn optimum_re_evaluates_to_its_rate() {
    let cfg = OptimizerConfig::default();
    for (r, loss, adv) in [(0.0, 0.5, Adversary::GeneralBound), (0.72, 0.5, Adversary::QuadratureEve), (1.2, 0.9, Adversary::GeneralBound)] {
        let o = optimum(r, loss, adv);
        let pt = ProtocolPoint::new(
            PulseParams::reference(o.alpha0_star, r).unwrap(),
            Channel::from_loss(loss).unwrap(),
            o.beta_c_star,
        )
        .unwrap();
        let s = secret_rate(&pt, adv, &cfg.integration).unwrap().s_ab;
        assert!((s - o.s_star).abs() <= 1e-9 * o.s_star.abs());
        assert_eq!(o.adversary, adv);
        assert!(o.positive);
        assert_eq!(o.trace.last().unwrap().2, o.s_star);
    }
}

#[test]
fn low_loss_rate_is_near_one_half() {
    let o = optimum(0.0, 0.01, Adversary::GeneralBound);
    assert!(o.s_star > 0.4 && o.s_star < 0.5, "{}", o.s_star);
    assert!(o.beta_c_star < 0.2);
}

#[test]
fn coherent_threshold_grows_with_loss() {
    let out = sweep_loss(0.0, &LOSSES, Adversary::GeneralBound, &OptimizerConfig::default());
    let b: Vec<f64> = out.iter().map(|p| p.result.as_ref().unwrap().beta_c_star).collect();
    assert!(b.windows(2).all(|w| w[1] >= w[0]), "{b:?}");
    assert!(b[0] < 0.5);
}

#[test]
fn strong_squeezing_amplitude_peaks_at_moderate_loss() {
    let out = sweep_loss(2.0, &LOSSES, Adversary::GeneralBound, &OptimizerConfig::default());
    let a: Vec<f64> = out.iter().map(|p| p.result.as_ref().unwrap().alpha0_star).collect();
    let peak = a.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
    assert!(peak > 0 && peak + 1 < a.len(), "{a:?}");
    assert!((LOSSES[peak] - 0.6).abs() <= 0.1 + 1e-12, "{a:?}");
}

#[test]
fn weak_squeezing_helps_and_strong_squeezing_hurts_at_low_loss() {
    let cfg = OptimizerConfig::default();
    for loss in [0.5, 0.75, 0.9] {
        let s = sweep_squeezing(loss, &[0.0, 0.5], Adversary::GeneralBound, &cfg);
        assert!(s[1].result.as_ref().unwrap().s_star > s[0].result.as_ref().unwrap().s_star);
    }
    let s = sweep_squeezing(0.1, &[0.0, 2.0], Adversary::GeneralBound, &cfg);
    assert!(s[1].result.as_ref().unwrap().s_star < s[0].result.as_ref().unwrap().s_star);
}

#[test]
fn restarts_agree_with_single_search() {
    for (r, loss) in [(0.0, 0.5), (0.5, 0.75), (2.0, 0.6)] {
        let ch = Channel::from_loss(loss).unwrap();
        let one = maximize(r, &ch, Adversary::GeneralBound, &OptimizerConfig::default()).unwrap();
        let three = maximize(r, &ch, Adversary::GeneralBound, &OptimizerConfig { restarts: 2, ..OptimizerConfig::default() }).unwrap();
        assert!(three.s_star >= one.s_star);
        assert!((three.s_star - one.s_star).abs() <= 1e-3 * one.s_star.abs());
    }
}

#[test]
fn general_bound_never_exceeds_quadrature_eve() {
    let cfg = OptimizerConfig::default();
    for loss in [0.5, 0.75, 0.9] {
        let rs = [0.0, 0.5, 1.0];
        let q = sweep_squeezing(loss, &rs, Adversary::QuadratureEve, &cfg);
        let g = sweep_squeezing(loss, &rs, Adversary::GeneralBound, &cfg);
        for (q, g) in q.iter().zip(&g) {
            let (q, g) = (q.result.as_ref().unwrap().s_star, g.result.as_ref().unwrap().s_star);
            assert!(g <= q + 1e-12, "loss {loss}: {g} > {q}");
        }
    }
}

#[test]
fn empty_sweeps_and_deterministic_runs() {
    let cfg = OptimizerConfig::default();
    assert!(sweep_loss(0.0, &[], Adversary::GeneralBound, &cfg).is_empty());
    assert!(sweep_squeezing(0.5, &[], Adversary::GeneralBound, &cfg).is_empty());
    assert_eq!(optimum(0.3, 0.6, Adversary::GeneralBound), optimum(0.3, 0.6, Adversary::GeneralBound));
}
