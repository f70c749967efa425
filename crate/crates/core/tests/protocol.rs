mod common;

use std::f64::consts::{LN_2, PI};

use common::{composite_rule, SeededSampler};
use cvqkd_core::gaussian::{bob_marginal, Basis};
use cvqkd_core::integrate::{integrate_1d, IntegrationConfig};
use cvqkd_core::protocol::{accept_probs, binary_entropy, bob_stats, conditional_error, ProtocolPoint};
use proptest::prelude::*;

fn point(a: f64, r: f64, t2: f64, bc: f64) -> ProtocolPoint {
    ProtocolPoint::from_scalars(a, r, t2, bc).unwrap()
}

#[test]
fn acceptance_probabilities_match_quadrature() {
    let pt = point(0.6, 0.0, 1.0, 0.0);
    let cfg = IntegrationConfig::default().with_tolerances(1e-14, 1e-13);
    let p1 = integrate_1d(|x| bob_marginal(&pt.pulse, &pt.channel, Basis::Real, x), (0.0, 8.0), &cfg)
        .unwrap()
        .value;
    let p0 = integrate_1d(|x| bob_marginal(&pt.pulse, &pt.channel, Basis::Real, x), (-8.0, 0.0), &cfg)
        .unwrap()
        .value;
    let (q1, q0) = accept_probs(&pt);
    assert!((p1 - q1).abs() < 1e-12 && (p0 - q0).abs() < 1e-12);
    assert!((q1 - 0.884_930).abs() < 1e-6 && (q0 - 0.115_069).abs() < 1e-6);
}

/// Coherent-state information by a fixed composite rule, written without the
/// squeezing parameter at all.
fn coherent_information(a: f64, t: f64, bc: f64) -> (f64, f64) {
    let m = t * a;
    let dens = |x: f64| (2.0 / PI).sqrt() * (-2.0 * (x - m) * (x - m)).exp();
    let kept_one = |x: f64| dens(x) + dens(-x);
    let rule = composite_rule(bc, bc + 10.0 * m.max(0.5), 200, 10);
    let kept: f64 = rule.iter().map(|&(x, w)| w * kept_one(x)).sum();
    let info: f64 = rule
        .iter()
        .map(|&(x, w)| {
            let (good, bad) = (dens(x), dens(-x));
            let e = bad / (good + bad);
            let h = if e <= 0.0 { 0.0 } else { -(e * e.ln() + (1.0 - e) * (1.0 - e).ln()) / LN_2 };
            w * kept_one(x) * (1.0 - h)
        })
        .sum();
    (kept, info / kept)
}

#[test]
fn coherent_special_case_agrees() {
    let cfg = IntegrationConfig::default();
    for (a, t2, bc) in [(0.6, 1.0, 0.0), (0.6, 1.0, 0.7), (1.1, 0.4, 0.3), (0.3, 0.8, 1.2)] {
        let s = bob_stats(&point(a, 0.0, t2, bc), &cfg).unwrap();
        let (kept, info) = coherent_information(a, f64::sqrt(t2), bc);
        assert!((s.p0 + s.p1 - kept).abs() < 1e-10);
        assert!((s.i_ab - info).abs() < 1e-8, "{} vs {}", s.i_ab, info);
    }
}

#[test]
fn information_matches_monte_carlo() {
    let pt = point(0.6, 0.0, 1.0, 0.0);
    let exact = bob_stats(&pt, &IntegrationConfig::default()).unwrap().i_ab;
    let mut rng = SeededSampler::new(2024);
    let (m, sd) = (0.6, 0.5);
    let n = 10_000_000;
    let (mut sum, mut sum_sq, mut kept) = (0.0, 0.0, 0usize);
    for _ in 0..n {
        // Alice's bit picks the sign; Bob keeps |β| > β_c.
        let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
        let beta: f64 = rng.normal(sign * m, sd);
        let good = (-2.0 * (beta.abs() - m).powi(2)).exp();
        let bad = (-2.0 * (beta.abs() + m).powi(2)).exp();
        let v = 1.0 - binary_entropy(bad / (good + bad));
        sum += v;
        sum_sq += v * v;
        kept += 1;
    }
    let mean = sum / kept as f64;
    let se = ((sum_sq / kept as f64 - mean * mean) / kept as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn information_gain_falls_with_threshold() {
    let cfg = IntegrationConfig::default();
    for (a, r, t2) in [(0.6, 0.0, 1.0), (1.0, 0.5, 0.75), (0.8, 1.0, 0.3)] {
        let mut last = f64::INFINITY;
        for k in 0..=60 {
            let g = bob_stats(&point(a, r, t2, 0.05 * k as f64), &cfg).unwrap().g_ab;
            assert!(g <= last + 1e-12);
            last = g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stats_identities_hold(a in 0.0..3.0f64, r in -1.5..2.5f64, t2 in 0.04..1.0f64, bc in 0.0..2.0f64) {
        let s = bob_stats(&point(a, r, t2, bc), &IntegrationConfig::default()).unwrap();
        prop_assert!((s.r_acc - 0.5 * (s.p1 + s.p0)).abs() <= 1e-12);
        prop_assert!((s.delta - s.p0 / (s.p0 + s.p1)).abs() <= 1e-12);
        prop_assert!((s.g_ab - s.r_acc * s.i_ab).abs() <= 1e-12);
        prop_assert!((0.0..=0.5).contains(&s.delta));
        prop_assert!((0.0..=1.0).contains(&s.i_ab));
    }

    #[test]
    fn conditional_error_in_range(a in 0.0..3.0f64, r in -1.5..2.5f64, t2 in 0.04..1.0f64, b in 0.0..20.0f64) {
        let d = conditional_error(&point(a, r, t2, 0.0), b);
        prop_assert!((0.0..=0.5).contains(&d));
    }
}
