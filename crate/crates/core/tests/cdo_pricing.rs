mod common;

use common::standardized_firm;
use tng_core::cdo::{tranche_loss, CdoSpec, Tranche, TrancheLabel};
use tng_core::firstpassage::{simulate_defaults, SimConfig, SimulationOutput};
use tng_core::market::{Firm, FlatCurve};
use tng_core::tng::{build_pool, TngContract};
use tng_oracles::{first_passage_cdf, first_passage_density, integrate};

fn deal(firms: &[Firm], tranches: Vec<Tranche>, recovery: f64) -> CdoSpec {
    let contracts: Vec<_> = firms
        .iter()
        .map(|f| TngContract::new(f.id().clone(), "G", 1.0, 0.0, 1.0, 0.0).unwrap())
        .collect();
    let pool = build_pool(&contracts, firms).unwrap();
    CdoSpec::new(pool, tranches, recovery, 1.0, 4.0).unwrap()
}

fn three_tranches() -> Vec<Tranche> {
    vec![
        Tranche::new(0.0, 0.1, TrancheLabel::Equity).unwrap(),
        Tranche::new(0.1, 0.3, TrancheLabel::Mezzanine).unwrap(),
        Tranche::new(0.3, 1.0, TrancheLabel::Senior).unwrap(),
    ]
}

fn pool_firms(n: usize, alpha: f64) -> Vec<Firm> {
    (0..n)
        .map(|i| standardized_firm(&format!("F{i}"), -1.2, 0.0, alpha))
        .collect()
}

fn simulate(firms: &[Firm], paths: usize, steps: usize, seed: u64) -> SimulationOutput {
    simulate_defaults(firms, &SimConfig::new(paths, steps, 1.0, seed, true).unwrap()).unwrap()
}

#[test]
fn conservation_and_subordination_on_every_path() {
    let firms = pool_firms(10, 0.5);
    let spec = deal(&firms, three_tranches(), 0.4);
    let sim = simulate(&firms, 5000, 52, 3);
    for t in [0.25, 0.5, 0.75, 1.0] {
        for loss in spec.path_losses(&sim, t).unwrap() {
            let parts: Vec<f64> = spec.tranches().iter().map(|tr| tranche_loss(loss, tr)).collect();
            let rebuilt: f64 = spec.tranches().iter().zip(&parts).map(|(tr, l)| tr.width() * l).sum();
            assert!((rebuilt - loss).abs() < 1e-12);
            assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn correlation_moves_risk_up_the_structure() {
    let curve = FlatCurve::new(0.03).unwrap();
    let low = pool_firms(10, 0.0);
    let high = pool_firms(10, 0.9);
    let r_low = deal(&low, three_tranches(), 0.4)
        .price_tranches(&simulate(&low, 20_000, 52, 17), &curve)
        .unwrap();
    let r_high = deal(&high, three_tranches(), 0.4)
        .price_tranches(&simulate(&high, 20_000, 52, 17), &curve)
        .unwrap();
    let gap = |a: f64, b: f64, sa: f64, sb: f64| (a - b) / (sa * sa + sb * sb).sqrt();
    let equity_drop = gap(r_low[0].expected_loss, r_high[0].expected_loss, r_low[0].standard_error, r_high[0].standard_error);
    let senior_rise = gap(r_high[2].expected_loss, r_low[2].expected_loss, r_high[2].standard_error, r_low[2].standard_error);
    assert!(equity_drop > 3.0, "equity {} -> {}", r_low[0].expected_loss, r_high[0].expected_loss);
    assert!(senior_rise > 3.0, "senior {} -> {}", r_low[2].expected_loss, r_high[2].expected_loss);
}

#[test]
fn expected_loss_nonincreasing_in_recovery() {
    let curve = FlatCurve::new(0.02).unwrap();
    let firms = pool_firms(8, 0.4);
    let sim = simulate(&firms, 4000, 26, 9);
    let base = deal(&firms, three_tranches(), 0.0);
    let mut previous: Option<Vec<f64>> = None;
    for r in [0.0, 0.2, 0.4, 0.6, 0.9, 1.0] {
        let losses: Vec<f64> = base
            .with_recovery(r)
            .unwrap()
            .expected_tranche_loss(&sim, &curve)
            .unwrap()
            .iter()
            .map(|e| e.expected_loss)
            .collect();
        if let Some(prev) = &previous {
            for (a, b) in losses.iter().zip(prev) {
                assert!(a <= b);
            }
        }
        previous = Some(losses);
    }
    assert!(previous.unwrap().iter().all(|&l| l == 0.0));
}

#[test]
fn two_independent_firms_match_enumeration() {
    let (beta, gamma, r) = (-1.0, 0.2, 0.03);
    let firms = [
        standardized_firm("A", beta, gamma, 0.0),
        standardized_firm("B", beta, gamma, 0.0),
    ];
    let tranches = vec![
        Tranche::new(0.0, 0.5, TrancheLabel::Equity).unwrap(),
        Tranche::new(0.5, 1.0, TrancheLabel::Senior).unwrap(),
    ];
    let spec = deal(&firms, tranches, 0.0);
    let report = spec
        .price_tranches(&simulate(&firms, 100_000, 250, 5), &FlatCurve::new(r).unwrap())
        .unwrap();

    // Outcomes: none, one, or both default by maturity. The equity tranche
    // is wiped at the first default, the senior at the second.
    let cdf = |t: f64| first_passage_cdf(beta, gamma, t);
    let pdf = |t: f64| first_passage_density(beta, gamma, t);
    let first = integrate(|t| (-r * t).exp() * 2.0 * pdf(t) * (1.0 - cdf(t)), 1e-9, 1.0, 400);
    let second = integrate(|t| (-r * t).exp() * 2.0 * pdf(t) * cdf(t), 1e-9, 1.0, 400);

    let p = cdf(1.0);
    let undiscounted = [1.0 - (1.0 - p) * (1.0 - p), p * p];
    for ((rep, want), bound) in report.iter().zip([first, second]).zip(undiscounted) {
        assert!(want < bound);
        assert!(
            (rep.expected_loss - want).abs() < 3.0 * rep.standard_error,
            "{:?}: {} vs {want}",
            rep.label,
            rep.expected_loss
        );
    }
}

#[test]
fn single_name_spread_matches_closed_form() {
    let (beta, gamma, r) = (-1.0, 0.1, 0.04);
    let firms = [standardized_firm("A", beta, gamma, 0.0)];
    let spec = deal(&firms, vec![Tranche::new(0.0, 1.0, TrancheLabel::Equity).unwrap()], 0.0);
    let report = spec
        .price_tranches(&simulate(&firms, 100_000, 200, 6), &FlatCurve::new(r).unwrap())
        .unwrap();

    let protection = integrate(
        |t| (-r * t).exp() * first_passage_density(beta, gamma, t),
        1e-9,
        1.0,
        400,
    );
    let premium: f64 = (1..=4)
        .map(|j| {
            let t = j as f64 / 4.0;
            0.25 * (-r * t).exp() * (1.0 - first_passage_cdf(beta, gamma, t))
        })
        .sum();
    let want = protection / premium;
    let got = report[0].fair_spread;
    assert!(
        (got - want).abs() < 3.0 * report[0].spread_standard_error,
        "{got} vs {want} (se {})",
        report[0].spread_standard_error
    );
}
