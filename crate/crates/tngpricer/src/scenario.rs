//! Scenario files: JSON in, validated core types out.
//!
//! ```json
//! {
//!   "curve": { "r": 0.03 },
//!   "firms": [
//!     { "id": "ACME", "v0": 120.0, "sigma": 0.25, "barrier": 60.0, "alpha": 0.4, "mu": 0.05 }
//!   ],
//!   "contracts": [
//!     { "obligor_id": "ACME", "guarantor_id": "G1", "tax_amount": 40.0,
//!       "initiation": 0.0, "maturity": 2.0, "contract_rate": 0.02 }
//!   ],
//!   "valuation_time": 0.0,
//!   "perpetual": [ { "firm_id": "ACME", "coupon_rate": 3.0 } ],
//!   "pde_grid": { "v_min": 50, "v_max": 200, "v_step": 0.25,
//!                 "tau_min": 0.5, "tau_max": 2.0, "tau_step": 0.001953125 },
//!   "cdo": { "tranches": [ { "label": "equity", "attachment": 0.0, "detachment": 1.0 } ],
//!            "recovery": 0.4, "maturity": 2.0, "premium_frequency": 4 },
//!   "sim": { "paths": 10000, "steps": 52, "horizon": 2.0, "bridge": true }
//! }
//! ```
//!
//! `alpha` defaults to 0 and `mu` to the curve rate. Everything after
//! `contracts` is optional.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tng_core::cdo::{Tranche, TrancheLabel};
use tng_core::market::{Firm, FlatCurve};
use tng_core::tng::TngContract;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveInput {
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmInput {
    pub id: String,
    pub v0: f64,
    pub sigma: f64,
    pub barrier: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractInput {
    pub obligor_id: String,
    pub guarantor_id: String,
    pub tax_amount: f64,
    pub initiation: f64,
    pub maturity: f64,
    pub contract_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerpetualInput {
    pub firm_id: String,
    pub coupon_rate: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeGrid {
    pub v_min: f64,
    pub v_max: f64,
    pub v_step: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
}

impl Default for PdeGrid {
    fn default() -> Self {
        Self {
            v_min: 50.0,
            v_max: 200.0,
            v_step: 0.25,
            tau_min: 0.5,
            tau_max: 2.0,
            tau_step: 1.0 / 512.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrancheInput {
    pub label: String,
    pub attachment: f64,
    pub detachment: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdoInput {
    pub tranches: Vec<TrancheInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<f64>,
    pub maturity: f64,
    pub premium_frequency: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimInput {
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
    pub bridge: Option<bool>,
}

/// The file as written.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub curve: CurveInput,
    pub firms: Vec<FirmInput>,
    #[serde(default)]
    pub contracts: Vec<ContractInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perpetual: Vec<PerpetualInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde_grid: Option<PdeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdo: Option<CdoInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimInput>,
}

#[derive(Debug, Clone)]
pub struct PerpetualRequest {
    pub firm_index: usize,
    pub coupon_rate: f64,
}

#[derive(Debug, Clone)]
pub struct CdoTerms {
    pub tranches: Vec<Tranche>,
    pub recovery: Option<f64>,
    pub maturity: f64,
    pub premium_frequency: f64,
}

/// Validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub curve: FlatCurve,
    pub firms: Vec<Firm>,
    pub contracts: Vec<TngContract>,
    pub valuation_time: Option<f64>,
    pub perpetual: Vec<PerpetualRequest>,
    pub pde_grid: PdeGrid,
    pub cdo: Option<CdoTerms>,
    pub sim: SimInput,
    /// Source as parsed, echoed into reports.
    pub raw: ScenarioFile,
}

impl Scenario {
    pub fn firm_index(&self, id: &str) -> Option<usize> {
        self.firms.iter().position(|f| f.id().as_str() == id)
    }
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text)
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let raw: ScenarioFile = serde_json::from_str(text).map_err(|e| {
        let kind = if e.is_syntax() || e.is_eof() { "parse error" } else { "schema error" };
        CliError::Validation(format!("scenario {kind}: {e}"))
    })?;
    validate(raw)
}

fn validate(raw: ScenarioFile) -> CliResult<Scenario> {
    let curve = FlatCurve::new(raw.curve.r).map_err(|e| CliError::core("curve", e))?;

    let mut firms = Vec::with_capacity(raw.firms.len());
    let mut seen = HashSet::new();
    for (k, f) in raw.firms.iter().enumerate() {
        let ctx = format!("firms[{k}]");
        if f.id.is_empty() {
            return Err(CliError::Validation(format!("{ctx}.id: must not be empty")));
        }
        if !seen.insert(f.id.as_str()) {
            return Err(CliError::Validation(format!("{ctx}.id: duplicate firm id `{}`", f.id)));
        }
        let mu = f.mu.unwrap_or(curve.rate());
        let firm = Firm::new(f.id.as_str(), f.v0, mu, f.sigma, f.barrier, f.alpha)
            .map_err(|e| CliError::core(&ctx, e))?;
        firms.push(firm);
    }

    let mut contracts = Vec::with_capacity(raw.contracts.len());
    for (k, c) in raw.contracts.iter().enumerate() {
        let ctx = format!("contracts[{k}]");
        if !seen.contains(c.obligor_id.as_str()) {
            return Err(CliError::Validation(format!(
                "{ctx}.obligor_id: references unknown firm `{}`",
                c.obligor_id
            )));
        }
        let contract = TngContract::new(
            c.obligor_id.as_str(),
            c.guarantor_id.as_str(),
            c.tax_amount,
            c.initiation,
            c.maturity,
            c.contract_rate,
        )
        .map_err(|e| CliError::core(&ctx, e))?;
        contracts.push(contract);
    }

    if let Some(t) = raw.valuation_time {
        if !t.is_finite() {
            return Err(CliError::Validation(format!("valuation_time: must be finite, got {t}")));
        }
    }

    let mut perpetual = Vec::with_capacity(raw.perpetual.len());
    for (k, p) in raw.perpetual.iter().enumerate() {
        let firm_index = firms
            .iter()
            .position(|f| f.id().as_str() == p.firm_id)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "perpetual[{k}].firm_id: references unknown firm `{}`",
                    p.firm_id
                ))
            })?;
        if !(p.coupon_rate > 0.0 && p.coupon_rate.is_finite()) {
            return Err(CliError::Validation(format!(
                "perpetual[{k}].coupon_rate: must be finite and > 0, got {}",
                p.coupon_rate
            )));
        }
        perpetual.push(PerpetualRequest {
            firm_index,
            coupon_rate: p.coupon_rate,
        });
    }

    let pde_grid = raw.pde_grid.unwrap_or_default();
    validate_grid(&pde_grid)?;

    let cdo = raw.cdo.as_ref().map(validate_cdo).transpose()?;

    let sim = raw.sim.unwrap_or_default();
    if sim.paths == Some(0) {
        return Err(CliError::Validation("sim.paths: must be >= 1".into()));
    }
    if sim.steps == Some(0) {
        return Err(CliError::Validation("sim.steps: must be >= 1".into()));
    }
    if let Some(h) = sim.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Validation(format!("sim.horizon: must be finite and > 0, got {h}")));
        }
    }

    Ok(Scenario {
        curve,
        firms,
        contracts,
        valuation_time: raw.valuation_time,
        perpetual,
        pde_grid,
        cdo,
        sim,
        raw,
    })
}

fn validate_grid(g: &PdeGrid) -> CliResult<()> {
    let check = |name: &str, lo: f64, hi: f64, step: f64| {
        let ok = lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo && step > 0.0 && (hi - lo) / step >= 2.0;
        if ok {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "pde_grid.{name}: need 0 < min < max and at least 3 nodes, got [{lo}, {hi}] step {step}"
            )))
        }
    };
    check("v", g.v_min, g.v_max, g.v_step)?;
    check("tau", g.tau_min, g.tau_max, g.tau_step)
}

fn validate_cdo(c: &CdoInput) -> CliResult<CdoTerms> {
    let mut tranches = Vec::with_capacity(c.tranches.len());
    for (k, t) in c.tranches.iter().enumerate() {
        let ctx = format!("cdo.tranches[{k}]");
        let label: TrancheLabel = t.label.parse().map_err(|e| CliError::core(&ctx, e))?;
        tranches.push(Tranche::new(t.attachment, t.detachment, label).map_err(|e| CliError::core(&ctx, e))?);
    }
    Ok(CdoTerms {
        tranches,
        recovery: c.recovery,
        maturity: c.maturity,
        premium_frequency: c.premium_frequency,
    })
}
