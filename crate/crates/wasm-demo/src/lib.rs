//! WebAssembly bindings behind `www/index.html`.
//!
//! Three curves, each computed entirely in the browser:
//! bond price and credit spread against firm value, simulated survival
//! against its closed form, and tranche expected loss against the factor
//! loading.

// `!(x < 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use tng_core::analytic::{credit_spread, linspace, merton_discount_bond, DiscountBondSpec};
use tng_core::cdo::{CdoSpec, Tranche, TrancheLabel};
use tng_core::firstpassage::{simulate_defaults, SimConfig};
use tng_core::market::{Firm, FlatCurve};
use tng_core::numerics::norm_cdf;
use tng_core::tng::{build_pool, TngContract};
use wasm_bindgen::prelude::*;

/// An x grid with up to three series over it.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    x: Vec<f64>,
    series: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Curves {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn count(&self) -> usize {
        self.series.len()
    }

    pub fn series(&self, k: usize) -> Vec<f64> {
        self.series.get(k).cloned().unwrap_or_default()
    }
}

type DemoResult<T> = Result<T, String>;

fn err(e: tng_core::Error) -> String {
    e.to_string()
}

/// Price (series 0), riskless value (1) and credit spread (2) against firm value.
pub fn bond_curves(face: f64, maturity: f64, rate: f64, sigma: f64, points: usize) -> DemoResult<Curves> {
    let spec = DiscountBondSpec::new(face, maturity).map_err(err)?;
    let curve = FlatCurve::new(rate).map_err(err)?;
    let riskless = face * curve.discount(maturity).map_err(err)?;
    let x = linspace(0.2 * face, 3.0 * face, points.max(2));
    let mut price = Vec::with_capacity(x.len());
    let mut spread = Vec::with_capacity(x.len());
    for &v in &x {
        let p = merton_discount_bond(v, &spec, &curve, sigma).map_err(err)?;
        spread.push(credit_spread(p, &spec, &curve).map_err(err)?);
        price.push(p);
    }
    Ok(Curves {
        series: vec![price, vec![riskless; x.len()], spread],
        x,
    })
}

// standardized firm: barrier β + γt for the driftless process
fn demo_firm(id: &str, beta: f64, gamma: f64, alpha: f64) -> DemoResult<Firm> {
    let sigma = 0.25;
    let mu = 0.5 * sigma * sigma - gamma * sigma;
    Firm::new(id, 1.0, mu, sigma, (beta * sigma).exp(), alpha).map_err(err)
}

/// Simulated survival (series 0) and the closed-form first-passage survival (1)
/// on the simulation grid over one year.
pub fn survival_curves(
    beta: f64,
    gamma: f64,
    paths: usize,
    steps: usize,
    seed: u64,
    bridge: bool,
) -> DemoResult<Curves> {
    if !(beta < 0.0) {
        return Err("beta must be negative".into());
    }
    let cfg = SimConfig::new(paths, steps, 1.0, seed, bridge).map_err(err)?;
    let sim = simulate_defaults(&[demo_firm("A", beta, gamma, 0.0)?], &cfg).map_err(err)?;
    let x: Vec<f64> = (1..=steps).map(|k| cfg.time(k)).collect();
    let simulated = sim.survival_curve("A", &x).map_err(err)?;
    let nu = -gamma;
    let exact = x
        .iter()
        .map(|&t| {
            let s = t.sqrt();
            1.0 - norm_cdf((beta - nu * t) / s) - (2.0 * nu * beta).exp() * norm_cdf((beta + nu * t) / s)
        })
        .collect();
    Ok(Curves {
        series: vec![simulated, exact],
        x,
    })
}

/// Discounted expected loss of equity (0), mezzanine (1) and senior (2)
/// tranches of a ten-name pool as the common loading goes from 0 to 0.95.
pub fn tranche_curves(beta: f64, recovery: f64, paths: usize, seed: u64, points: usize) -> DemoResult<Curves> {
    let names = 10;
    let x = linspace(0.0, 0.95, points.max(2));
    let tranches = vec![
        Tranche::new(0.0, 0.1, TrancheLabel::Equity).map_err(err)?,
        Tranche::new(0.1, 0.3, TrancheLabel::Mezzanine).map_err(err)?,
        Tranche::new(0.3, 1.0, TrancheLabel::Senior).map_err(err)?,
    ];
    let contracts: Vec<TngContract> = (0..names)
        .map(|i| TngContract::new(format!("N{i}").as_str(), "G", 1.0, 0.0, 1.0, 0.0).map_err(err))
        .collect::<DemoResult<_>>()?;
    let curve = FlatCurve::new(0.02).map_err(err)?;
    let cfg = SimConfig::new(paths, 26, 1.0, seed, true).map_err(err)?;
    let mut series: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(x.len())).collect();
    for &alpha in &x {
        let firms: Vec<Firm> = (0..names)
            .map(|i| demo_firm(&format!("N{i}"), beta, 0.0, alpha))
            .collect::<DemoResult<_>>()?;
        let pool = build_pool(&contracts, &firms).map_err(err)?;
        let spec = CdoSpec::new(pool, tranches.clone(), recovery, 1.0, 4.0).map_err(err)?;
        let sim = simulate_defaults(&firms, &cfg).map_err(err)?;
        for (s, e) in series.iter_mut().zip(spec.expected_tranche_loss(&sim, &curve).map_err(err)?) {
            s.push(e.expected_loss);
        }
    }
    Ok(Curves { x, series })
}

#[wasm_bindgen(js_name = bondCurves)]
pub fn bond_curves_js(face: f64, maturity: f64, rate: f64, sigma: f64, points: usize) -> Result<Curves, JsError> {
    bond_curves(face, maturity, rate, sigma, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = survivalCurves)]
pub fn survival_curves_js(
    beta: f64,
    gamma: f64,
    paths: usize,
    steps: usize,
    seed: u32,
    bridge: bool,
) -> Result<Curves, JsError> {
    survival_curves(beta, gamma, paths, steps, seed as u64, bridge).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = trancheCurves)]
pub fn tranche_curves_js(beta: f64, recovery: f64, paths: usize, seed: u32, points: usize) -> Result<Curves, JsError> {
    tranche_curves(beta, recovery, paths, seed as u64, points).map_err(|e| JsError::new(&e))
}
