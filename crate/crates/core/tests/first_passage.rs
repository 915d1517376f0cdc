mod common;

use common::{binomial_se, standardized_firm};
use proptest::prelude::*;
use tng_core::firstpassage::{
    bridge_crossing_probability, calibrate_alphas, process_increment_correlation,
    simulate_defaults, trace_path, CorrelationMatrix, SimConfig,
};
use tng_oracles::{first_passage_cdf, phi, pinned_bridge_crossing, two_firm_defaults};

fn default_frequency(beta: f64, gamma: f64, paths: usize, steps: usize, bridge: bool, seed: u64) -> f64 {
    let cfg = SimConfig::new(paths, steps, 1.0, seed, bridge).unwrap();
    let out = simulate_defaults(&[standardized_firm("A", beta, gamma, 0.0)], &cfg).unwrap();
    out.default_probability("A", 1.0).unwrap()
}

#[test]
fn driftless_first_passage_reflection() {
    let n = 100_000;
    let want = 2.0 * phi(-1.0);
    let bridged = default_frequency(-1.0, 0.0, n, 52, true, 1);
    assert!((bridged - want).abs() < 3.0 * binomial_se(want, n), "{bridged} vs {want}");
    let raw = default_frequency(-1.0, 0.0, n, 52, false, 1);
    assert!(want - raw > 3.0 * binomial_se(want, n), "raw {raw} not biased low");
}

#[test]
fn drifted_first_passage_matches_inverse_gaussian() {
    let n = 100_000;
    for (k, (beta, gamma)) in [(-1.0, -0.5), (-1.0, 0.5), (-0.6, 0.3), (-1.5, -1.0)]
        .into_iter()
        .enumerate()
    {
        let cfg = SimConfig::new(n, 52, 1.0, 40 + k as u64, true).unwrap();
        let out = simulate_defaults(&[standardized_firm("A", beta, gamma, 0.0)], &cfg).unwrap();
        let times = [0.25, 0.5, 1.0];
        let survival = out.survival_curve("A", &times).unwrap();
        for (t, s) in times.iter().zip(survival) {
            let p = first_passage_cdf(beta, gamma, *t);
            assert!(
                ((1.0 - s) - p).abs() < 3.0 * binomial_se(p, n),
                "β={beta} γ={gamma} t={t}: {} vs {p}",
                1.0 - s
            );
        }
    }
}

// The barrier in standardized units is β + γt, so γ < 0 moves it away from
// the process (asset drift above σ²/2) and γ > 0 pulls it in.
#[test]
fn barrier_slope_orders_default_risk() {
    let cfg = SimConfig::new(50_000, 52, 1.0, 5, true).unwrap();
    let flat = simulate_defaults(&[standardized_firm("A", -1.0, 0.0, 0.0)], &cfg).unwrap();
    let steep = simulate_defaults(&[standardized_firm("A", -1.0, -0.5, 0.0)], &cfg).unwrap();
    let rising = simulate_defaults(&[standardized_firm("A", -1.0, 0.5, 0.0)], &cfg).unwrap();
    let s0 = flat.survival_curve("A", &[1.0]).unwrap()[0];
    let s_down = steep.survival_curve("A", &[1.0]).unwrap()[0];
    let s_up = rising.survival_curve("A", &[1.0]).unwrap()[0];
    assert!(s_down > s0 && s0 > s_up, "{s_down} {s0} {s_up}");
    assert!(first_passage_cdf(-1.0, -0.5, 1.0) < first_passage_cdf(-1.0, 0.0, 1.0));
    assert!(first_passage_cdf(-1.0, 0.5, 1.0) > first_passage_cdf(-1.0, 0.0, 1.0));
}

#[test]
fn bridge_probability_matches_pinned_bridge() {
    let p = bridge_crossing_probability(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
    assert!((p - (-2.0f64).exp()).abs() < 1e-15);
    let sim = pinned_bridge_crossing(1.0, 1.0, 1.0, 2000, 40_000, 3);
    assert!(sim.within(p, 3.0), "{p} vs {sim:?}");
    // affine barrier: only the distances matter
    let shifted = bridge_crossing_probability(2.0, 3.5, 1.0, 2.5, 1.0).unwrap();
    assert!((shifted - p).abs() < 1e-15);
}

#[test]
fn pairwise_correlation_matches_brute_force() {
    let n = 200_000;
    let firms = [
        standardized_firm("A", -1.0, 0.0, 0.5),
        standardized_firm("B", -1.0, 0.0, 0.5),
    ];
    let cfg = SimConfig::new(n, 52, 1.0, 77, true).unwrap();
    let out = simulate_defaults(&firms, &cfg).unwrap();
    let got = out.pairwise_default_correlation("A", "B", 1.0).unwrap();
    let oracle = two_firm_defaults(0.25, -1.0, 0.0, 1.0, 400, n, 78);
    let want = oracle.indicator_correlation();
    // indicator correlation standard error is close to 1/√n
    let se = (1.0 / n as f64 + 1.0 / oracle.paths as f64).sqrt();
    assert!((got - want).abs() < 3.0 * se, "{got} vs {want}");
    assert!(got < 0.25, "default correlation should sit below process correlation");
}

#[test]
fn independent_and_identical_pairs() {
    let cfg = SimConfig::new(100_000, 52, 1.0, 8, true).unwrap();
    let indep = [
        standardized_firm("A", -1.0, 0.0, 0.0),
        standardized_firm("B", -1.0, 0.0, 0.0),
    ];
    let out = simulate_defaults(&indep, &cfg).unwrap();
    let c = out.pairwise_default_correlation("A", "B", 1.0).unwrap();
    assert!(c.abs() < 3.0 / (100_000f64).sqrt(), "{c}");

    let twins = [
        standardized_firm("A", -1.0, 0.0, 1.0),
        standardized_firm("B", -1.0, 0.0, 1.0),
    ];
    let out = simulate_defaults(&twins, &cfg).unwrap();
    let c = out.pairwise_default_correlation("A", "B", 1.0).unwrap();
    assert!((c - 1.0).abs() < 1e-12, "{c}");
}

#[test]
fn increment_correlation_is_loading_product() {
    let alphas = [0.0, 0.3, 0.5, 0.7, 0.9, 1.0];
    let firms: Vec<_> = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| standardized_firm(&format!("F{i}"), -3.0, 0.0, a))
        .collect();
    let cfg = SimConfig::new(2000, 50, 1.0, 13, false).unwrap();
    let m = process_increment_correlation(&firms, &cfg).unwrap();
    for i in 0..alphas.len() {
        for j in 0..alphas.len() {
            let want = if i == j { 1.0 } else { alphas[i] * alphas[j] };
            assert!((m.get(i, j) - want).abs() < 0.01, "({i},{j}) {}", m.get(i, j));
        }
    }
}

#[test]
fn recorded_defaults_are_below_barrier_in_asset_space() {
    let firms = [
        standardized_firm("A", -0.8, 0.2, 0.6),
        standardized_firm("B", -0.5, -0.3, 0.6),
    ];
    let cfg = SimConfig::new(400, 40, 1.0, 21, false).unwrap();
    let mut seen = 0;
    for p in 0..400 {
        let trace = trace_path(&firms, &cfg, p).unwrap();
        for (i, firm) in firms.iter().enumerate() {
            let Some(t) = trace.default_times[i] else { continue };
            let k = trace.times.iter().position(|&s| s == t).expect("grid time");
            let v = firm.v_of_x(trace.x[i][k], t);
            assert!(v <= firm.barrier() * (1.0 + 1e-9), "path {p} firm {i}");
            // and above it at every earlier grid time
            for j in 0..k {
                assert!(firm.v_of_x(trace.x[i][j], trace.times[j]) > firm.barrier());
            }
            seen += 1;
        }
    }
    assert!(seen > 50);
}

#[test]
fn output_independent_of_thread_count() {
    let firms: Vec<_> = (0..5)
        .map(|i| standardized_firm(&format!("F{i}"), -1.0 + 0.1 * i as f64, 0.1, 0.4))
        .collect();
    let cfg = SimConfig::new(3000, 30, 1.0, 4, true).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    simulate_defaults(&firms, &cfg).unwrap(),
                    process_increment_correlation(&firms, &cfg).unwrap(),
                )
            })
    };
    let (a, ca) = run(1);
    let (b, cb) = run(4);
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    assert_eq!(a, simulate_defaults(&firms, &cfg).unwrap());
}

#[test]
fn calibration_recovers_planted_loadings() {
    for n in 2..=10 {
        let alphas: Vec<f64> = (0..n).map(|i| 0.15 + 0.8 * i as f64 / n as f64).collect();
        let target = CorrelationMatrix::from_loadings(&alphas).unwrap();
        let fit = calibrate_alphas(&target);
        assert!(fit.objective < 1e-10, "n={n}: {}", fit.objective);
        if n > 2 {
            for (a, b) in fit.alphas.iter().zip(&alphas) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn raising_barrier_never_removes_defaults(
        beta in -2.0f64..-0.2,
        lift in 0.0f64..0.19,
        gamma in -0.5f64..0.5,
        seed in 0u64..1000,
        bridge in any::<bool>(),
    ) {
        let cfg = SimConfig::new(300, 20, 1.0, seed, bridge).unwrap();
        let low = simulate_defaults(&[standardized_firm("A", beta, gamma, 0.3)], &cfg).unwrap();
        let high = simulate_defaults(&[standardized_firm("A", beta + lift, gamma, 0.3)], &cfg).unwrap();
        for p in 0..300 {
            if low.default_time(p, 0).is_some() {
                prop_assert!(high.default_time(p, 0).is_some());
            }
        }
    }

    #[test]
    fn survival_curve_is_nonincreasing(seed in 0u64..1000, beta in -1.5f64..-0.1) {
        let cfg = SimConfig::new(500, 16, 2.0, seed, true).unwrap();
        let out = simulate_defaults(&[standardized_firm("A", beta, 0.0, 0.0)], &cfg).unwrap();
        let times: Vec<f64> = (1..=16).map(|k| k as f64 / 8.0).collect();
        let s = out.survival_curve("A", &times).unwrap();
        prop_assert!(s[0] <= 1.0);
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }
}
