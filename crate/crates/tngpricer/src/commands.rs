use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use tng_core::analytic::{
    credit_spread, linspace, merton_discount_bond, pde_residual, perpetual_coupon_bond,
    GridSurface, PerpetualBondSpec,
};
use tng_core::cdo::{tranche_loss, CdoSpec};
use tng_core::firstpassage::{calibrate_alphas, simulate_defaults, CorrelationMatrix, SimConfig};
use tng_core::tng::build_pool;

use crate::cli::{Command, Options, Switch};
use crate::error::{CliError, CliResult};
use crate::report::{num, write_json, CsvReport};
use crate::scenario::{load_scenario, Scenario};

pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_STEPS: usize = 52;
pub const DEFAULT_RECOVERY: f64 = 0.4;

/// Runs one command and returns the files written.
pub fn run_command(command: Command, opts: &Options) -> CliResult<Vec<PathBuf>> {
    if command.is_randomized() && opts.seed.is_none() {
        return Err(CliError::Validation(format!(
            "{} is randomized and needs an explicit --seed",
            command.name()
        )));
    }
    if let Some(r) = opts.recovery {
        if !(0.0..=1.0).contains(&r) {
            return Err(CliError::Validation(format!("--recovery: must lie in [0, 1], got {r}")));
        }
    }
    let scenario = match (&opts.scenario, command) {
        (Some(path), _) => Some(load_scenario(path)?),
        (None, Command::Calibrate) => None,
        (None, _) => return Err(CliError::Validation(format!("{} needs --scenario", command.name()))),
    };
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let job = Job {
        command,
        opts,
        out: &opts.out,
    };
    match (command, scenario) {
        (Command::Calibrate, s) => job.calibrate(s.as_ref()),
        (_, None) => unreachable!("scenario loaded above"),
        (Command::PriceBond, Some(s)) => job.price_bond(&s),
        (Command::PricePerpetual, Some(s)) => job.price_perpetual(&s),
        (Command::CheckPde, Some(s)) => job.check_pde(&s),
        (Command::Simulate, Some(s)) => job.simulate(&s),
        (Command::PriceCdo, Some(s)) => job.price_cdo(&s),
    }
}

struct Job<'a> {
    command: Command,
    opts: &'a Options,
    out: &'a Path,
}

impl Job<'_> {
    // Resolved inputs echoed into every report.
    fn params(&self, scenario: Option<&Scenario>, run: Value) -> Value {
        let mut p = Map::new();
        p.insert("command".into(), json!(self.command.name()));
        p.insert("schema_version".into(), json!(crate::report::SCHEMA_VERSION));
        p.insert("run".into(), run);
        if let Some(s) = scenario {
            p.insert("scenario".into(), serde_json::to_value(&s.raw).expect("scenario serializes"));
            let firms: Vec<Value> = s
                .firms
                .iter()
                .map(|f| {
                    json!({
                        "id": f.id().as_str(), "v0": f.v0(), "mu": f.mu(), "sigma": f.sigma(),
                        "barrier": f.barrier(), "alpha": f.alpha(),
                    })
                })
                .collect();
            p.insert("resolved_firms".into(), Value::Array(firms));
        }
        Value::Object(p)
    }

    fn summary(&self, params: &Value, schemas: &[&CsvReport], results: Value) -> CliResult<PathBuf> {
        let schemas: Vec<String> = schemas.iter().map(|r| r.schema()).collect();
        write_json(
            self.out,
            "summary.json",
            &json!({ "params": params, "report_schemas": schemas, "results": results }),
        )
    }

    fn sim_config(&self, s: &Scenario, default_horizon: f64) -> CliResult<SimConfig> {
        let paths = self.opts.paths.or(s.sim.paths).unwrap_or(DEFAULT_PATHS);
        let steps = self.opts.steps.or(s.sim.steps).unwrap_or(DEFAULT_STEPS);
        let bridge = match self.opts.bridge {
            Some(sw) => sw == Switch::On,
            None => s.sim.bridge.unwrap_or(true),
        };
        let horizon = s.sim.horizon.unwrap_or(default_horizon);
        let seed = self.opts.seed.expect("seed checked for randomized commands");
        SimConfig::new(paths, steps, horizon, seed, bridge).map_err(|e| CliError::core("sim", e))
    }

    fn price_bond(&self, s: &Scenario) -> CliResult<Vec<PathBuf>> {
        if s.contracts.is_empty() {
            return Err(CliError::Validation("price-bond: scenario has no contracts".into()));
        }
        let mut report = CsvReport::new(
            "tngpricer.prices",
            [
                "contract", "obligor_id", "guarantor_id", "face", "valuation_time", "tau",
                "firm_value", "price", "riskless_value", "credit_spread",
            ],
        );
        let mut results = Vec::new();
        for (k, c) in s.contracts.iter().enumerate() {
            let ctx = format!("contracts[{k}]");
            let firm = &s.firms[s.firm_index(c.obligor_id().as_str()).expect("validated reference")];
            let t = s.valuation_time.unwrap_or(c.initiation());
            let spec = c.bond_spec(t).map_err(|e| CliError::core(&ctx, e))?;
            let price = c.price(firm, &s.curve, t).map_err(|e| CliError::core(&ctx, e))?;
            let riskless = spec.face() * s.curve.discount(spec.maturity()).map_err(|e| CliError::core(&ctx, e))?;
            let spread = credit_spread(price, &spec, &s.curve).map_err(|e| CliError::core(&ctx, e))?;
            report.push(vec![
                k.to_string(),
                c.obligor_id().to_string(),
                c.guarantor_id().to_string(),
                num(spec.face()),
                num(t),
                num(spec.maturity()),
                num(firm.v0()),
                num(price),
                num(riskless),
                num(spread),
            ]);
            results.push(json!({ "contract": k, "price": price, "credit_spread": spread }));
        }
        let params = self.params(Some(s), json!({ "valuation_time": s.valuation_time }));
        Ok(vec![
            report.write(self.out, "prices.csv", &params)?,
            self.summary(&params, &[&report], Value::Array(results))?,
        ])
    }

    fn price_perpetual(&self, s: &Scenario) -> CliResult<Vec<PathBuf>> {
        if s.perpetual.is_empty() {
            return Err(CliError::Validation("price-perpetual: scenario has no `perpetual` entries".into()));
        }
        let mut report = CsvReport::new(
            "tngpricer.perpetual",
            ["entry", "firm_id", "firm_value", "sigma", "coupon_rate", "price", "riskless_value"],
        );
        let mut results = Vec::new();
        for (k, p) in s.perpetual.iter().enumerate() {
            let ctx = format!("perpetual[{k}]");
            let firm = &s.firms[p.firm_index];
            let spec = PerpetualBondSpec::new(p.coupon_rate).map_err(|e| CliError::core(&ctx, e))?;
            let price = perpetual_coupon_bond(firm.v0(), &spec, &s.curve, firm.sigma())
                .map_err(|e| CliError::core(&ctx, e))?;
            let riskless = p.coupon_rate / s.curve.rate();
            report.push(vec![
                k.to_string(),
                firm.id().to_string(),
                num(firm.v0()),
                num(firm.sigma()),
                num(p.coupon_rate),
                num(price),
                num(riskless),
            ]);
            results.push(json!({ "entry": k, "price": price }));
        }
        let params = self.params(Some(s), json!({}));
        Ok(vec![
            report.write(self.out, "prices.csv", &params)?,
            self.summary(&params, &[&report], Value::Array(results))?,
        ])
    }

    fn check_pde(&self, s: &Scenario) -> CliResult<Vec<PathBuf>> {
        if s.contracts.is_empty() {
            return Err(CliError::Validation("check-pde: scenario has no contracts".into()));
        }
        let g = s.pde_grid;
        let nodes = |lo: f64, hi: f64, step: f64| ((hi - lo) / step).round() as usize + 1;
        let (nv, nt) = (nodes(g.v_min, g.v_max, g.v_step), nodes(g.tau_min, g.tau_max, g.tau_step));
        let mut report = CsvReport::new(
            "tngpricer.pde_residuals",
            [
                "contract", "obligor_id", "face", "sigma", "v_nodes", "tau_nodes", "max_abs",
                "max_relative", "max_relative_halved", "convergence_ratio",
            ],
        );
        let mut results = Vec::new();
        for (k, c) in s.contracts.iter().enumerate() {
            let ctx = format!("contracts[{k}]");
            let firm = &s.firms[s.firm_index(c.obligor_id().as_str()).expect("validated reference")];
            let face = c.face();
            let sigma = firm.sigma();
            let residual = |nv: usize, nt: usize| {
                let surface = GridSurface::from_fn(
                    linspace(g.v_min, g.v_max, nv),
                    linspace(g.tau_min, g.tau_max, nt),
                    |v, tau| {
                        let spec = tng_core::analytic::DiscountBondSpec::new(face, tau)?;
                        merton_discount_bond(v, &spec, &s.curve, sigma)
                    },
                )?;
                pde_residual(&surface, &s.curve, sigma, |_, _| 0.0, |_, _| 0.0)
            };
            let coarse = residual(nv, nt).map_err(|e| CliError::core(&ctx, e))?;
            let fine = residual(2 * nv - 1, 2 * nt - 1).map_err(|e| CliError::core(&ctx, e))?;
            let ratio = coarse.max_relative() / fine.max_relative();
            report.push(vec![
                k.to_string(),
                c.obligor_id().to_string(),
                num(face),
                num(sigma),
                nv.to_string(),
                nt.to_string(),
                num(coarse.max_abs()),
                num(coarse.max_relative()),
                num(fine.max_relative()),
                num(ratio),
            ]);
            results.push(json!({
                "contract": k, "max_relative": coarse.max_relative(),
                "max_relative_halved": fine.max_relative(), "convergence_ratio": ratio,
            }));
        }
        let params = self.params(Some(s), json!({ "pde_grid": g }));
        Ok(vec![
            report.write(self.out, "pde_residuals.csv", &params)?,
            self.summary(&params, &[&report], Value::Array(results))?,
        ])
    }

    fn simulate(&self, s: &Scenario) -> CliResult<Vec<PathBuf>> {
        if s.firms.is_empty() {
            return Err(CliError::Validation("simulate: scenario has no firms".into()));
        }
        let default_horizon = s.contracts.iter().map(|c| c.maturity()).fold(1.0_f64, f64::max);
        let cfg = self.sim_config(s, default_horizon)?;
        let sim = simulate_defaults(&s.firms, &cfg).map_err(|e| CliError::core("simulate", e))?;
        let times: Vec<f64> = (1..=cfg.n_steps()).map(|k| cfg.time(k)).collect();
        let n = cfg.n_paths() as f64;

        let mut report = CsvReport::new(
            "tngpricer.survival",
            ["firm_id", "time", "survival", "default_probability", "std_error"],
        );
        let mut probabilities = Map::new();
        for f in &s.firms {
            let id = f.id().as_str();
            let curve = sim.survival_curve(id, &times).map_err(|e| CliError::core("simulate", e))?;
            for (t, surv) in times.iter().zip(&curve) {
                let p = 1.0 - surv;
                report.push(vec![id.to_string(), num(*t), num(*surv), num(p), num((p * surv / n).sqrt())]);
            }
            probabilities.insert(id.to_string(), json!(1.0 - curve[curve.len() - 1]));
        }

        let horizon = cfg.horizon();
        let correlations: Vec<Vec<Value>> = s
            .firms
            .iter()
            .map(|a| {
                s.firms
                    .iter()
                    .map(|b| match sim.pairwise_default_correlation(a.id().as_str(), b.id().as_str(), horizon) {
                        Ok(c) => json!(c),
                        Err(_) => Value::Null,
                    })
                    .collect()
            })
            .collect();

        let params = self.params(Some(s), run_json(&cfg));
        Ok(vec![
            report.write(self.out, "survival.csv", &params)?,
            self.summary(
                &params,
                &[&report],
                json!({
                    "default_probability_at_horizon": probabilities,
                    "default_indicator_correlation": correlations,
                }),
            )?,
        ])
    }

    fn price_cdo(&self, s: &Scenario) -> CliResult<Vec<PathBuf>> {
        let terms = s
            .cdo
            .as_ref()
            .ok_or_else(|| CliError::Validation("price-cdo: scenario has no `cdo` section".into()))?;
        let recovery = self.opts.recovery.or(terms.recovery).unwrap_or(DEFAULT_RECOVERY);
        let pool = build_pool(&s.contracts, &s.firms).map_err(|e| CliError::core("contracts", e))?;
        let spec = CdoSpec::new(pool, terms.tranches.clone(), recovery, terms.maturity, terms.premium_frequency)
            .map_err(|e| CliError::core("cdo", e))?;
        let cfg = self.sim_config(s, terms.maturity)?;
        let firms = spec.pool().firms();
        let sim = simulate_defaults(&firms, &cfg).map_err(|e| CliError::core("simulate", e))?;
        let reports = spec.price_tranches(&sim, &s.curve).map_err(|e| CliError::core("cdo", e))?;

        let mut tranches = CsvReport::new(
            "tngpricer.tranches",
            [
                "tranche", "label", "attachment", "detachment", "expected_loss", "standard_error",
                "protection_leg", "premium_leg", "fair_spread", "spread_standard_error",
            ],
        );
        for (k, r) in reports.iter().enumerate() {
            tranches.push(vec![
                k.to_string(),
                r.label.to_string(),
                num(r.attachment),
                num(r.detachment),
                num(r.expected_loss),
                num(r.standard_error),
                num(r.protection_leg),
                num(r.premium_leg),
                num(r.fair_spread),
                num(r.spread_standard_error),
            ]);
        }

        let mut columns = vec!["path".to_string(), "pool_loss".to_string()];
        columns.extend((0..spec.tranches().len()).map(|k| format!("tranche_{k}_loss")));
        let mut losses = CsvReport::new("tngpricer.path_losses", columns);
        for (p, pool_loss) in spec
            .path_losses(&sim, spec.maturity())
            .map_err(|e| CliError::core("cdo", e))?
            .into_iter()
            .enumerate()
        {
            let mut row = vec![p.to_string(), num(pool_loss)];
            row.extend(spec.tranches().iter().map(|t| num(tranche_loss(pool_loss, t))));
            losses.push(row);
        }

        let mut run = run_json(&cfg);
        run["recovery"] = json!(recovery);
        let params = self.params(Some(s), run);
        let results: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "label": r.label.to_string(), "attachment": r.attachment, "detachment": r.detachment,
                    "expected_loss": r.expected_loss, "standard_error": r.standard_error,
                    "fair_spread": r.fair_spread, "spread_standard_error": r.spread_standard_error,
                })
            })
            .collect();
        Ok(vec![
            tranches.write(self.out, "tranches.csv", &params)?,
            losses.write(self.out, "path_losses.csv", &params)?,
            self.summary(&params, &[&tranches, &losses], Value::Array(results))?,
        ])
    }

    fn calibrate(&self, s: Option<&Scenario>) -> CliResult<Vec<PathBuf>> {
        let path = self
            .opts
            .correlation
            .as_ref()
            .ok_or_else(|| CliError::Validation("calibrate needs --correlation <csv>".into()))?;
        let target = read_correlation(path)?;
        let fit = calibrate_alphas(&target);
        let ids: Vec<String> = match s {
            Some(s) if s.firms.len() == target.size() => s.firms.iter().map(|f| f.id().to_string()).collect(),
            Some(s) => {
                return Err(CliError::Validation(format!(
                    "calibrate: matrix is {n}x{n} but scenario has {} firms",
                    s.firms.len(),
                    n = target.size()
                )))
            }
            None => (0..target.size()).map(|i| format!("firm_{i}")).collect(),
        };
        let mut report = CsvReport::new("tngpricer.alphas", ["index", "firm_id", "alpha"]);
        for (i, (id, a)) in ids.iter().zip(&fit.alphas).enumerate() {
            report.push(vec![i.to_string(), id.clone(), num(*a)]);
        }
        let params = self.params(s, json!({ "correlation": target.rows().map(|r| r.to_vec()).collect::<Vec<_>>() }));
        Ok(vec![
            report.write(self.out, "alphas.csv", &params)?,
            self.summary(
                &params,
                &[&report],
                json!({ "alphas": fit.alphas, "objective": fit.objective, "sweeps": fit.sweeps }),
            )?,
        ])
    }
}

fn run_json(cfg: &SimConfig) -> Value {
    json!({
        "seed": cfg.seed(), "paths": cfg.n_paths(), "steps": cfg.n_steps(),
        "horizon": cfg.horizon(), "bridge": cfg.bridge_correction(),
    })
}

/// Square numeric CSV, no header; `#` lines are comments.
pub fn read_correlation(path: &Path) -> CliResult<CorrelationMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, e.into()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::Validation(format!("{}: row {i}, column {j}: `{cell}` is not a number", path.display()))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    CorrelationMatrix::new(rows).map_err(|e| CliError::core("correlation", e))
}
