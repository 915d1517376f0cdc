//! Tranching of a TNG pool and Monte Carlo tranche pricing.
//!
//! Losses hit the pool when an obligor defaults: `(1 - R) · face` paid at the
//! default time. Pool losses are expressed as a fraction of total pool
//! notional and fill the tranches from the bottom:
//!
//! ```text
//! tranche loss = min(max(L - a, 0), d - a) / (d - a)
//! ```
//!
//! The protection leg of a tranche is the discounted sum of its loss
//! increments. The premium leg pays the spread on the outstanding tranche
//! notional at each premium date (no accrual-on-default). The fair spread
//! equates the two.

use std::fmt;
use std::str::FromStr;

use crate::firstpassage::SimulationOutput;
use crate::market::FlatCurve;
use crate::tng::TngPool;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrancheLabel {
    Equity,
    Mezzanine,
    Senior,
}

impl fmt::Display for TrancheLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrancheLabel::Equity => "equity",
            TrancheLabel::Mezzanine => "mezzanine",
            TrancheLabel::Senior => "senior",
        })
    }
}

impl FromStr for TrancheLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equity" => Ok(TrancheLabel::Equity),
            "mezzanine" => Ok(TrancheLabel::Mezzanine),
            "senior" => Ok(TrancheLabel::Senior),
            other => Err(Error::invalid(
                "label",
                format!("expected equity, mezzanine or senior, got `{other}`"),
            )),
        }
    }
}

/// Slice `[attachment, detachment]` of pool notional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tranche {
    attachment: f64,
    detachment: f64,
    label: TrancheLabel,
}

impl Tranche {
    pub fn new(attachment: f64, detachment: f64, label: TrancheLabel) -> Result<Self> {
        if !(0.0..1.0).contains(&attachment) {
            return Err(Error::invalid(
                "attachment",
                format!("must lie in [0, 1), got {attachment}"),
            ));
        }
        if !(detachment > attachment && detachment <= 1.0) {
            return Err(Error::invalid(
                "detachment",
                format!("must lie in ({attachment}, 1], got {detachment}"),
            ));
        }
        Ok(Self {
            attachment,
            detachment,
            label,
        })
    }

    pub fn attachment(&self) -> f64 {
        self.attachment
    }

    pub fn detachment(&self) -> f64 {
        self.detachment
    }

    pub fn label(&self) -> TrancheLabel {
        self.label
    }

    pub fn width(&self) -> f64 {
        self.detachment - self.attachment
    }
}

/// Loss of `tranche` as a fraction of its notional, for pool loss fraction `pool_loss`.
pub fn tranche_loss(pool_loss: f64, tranche: &Tranche) -> f64 {
    let width = tranche.width();
    (pool_loss - tranche.attachment).max(0.0).min(width) / width
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdoSpec {
    pool: TngPool,
    tranches: Vec<Tranche>,
    recovery: f64,
    maturity: f64,
    premium_frequency: f64,
}

// Tolerance on tranche boundaries read from decimal inputs.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

impl CdoSpec {
    /// `tranches` must be ordered and partition `[0, 1]`.
    pub fn new(
        pool: TngPool,
        tranches: Vec<Tranche>,
        recovery: f64,
        maturity: f64,
        premium_frequency: f64,
    ) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let first = tranches
            .first()
            .ok_or_else(|| Error::invalid("tranches", "need at least one tranche"))?;
        if first.attachment != 0.0 {
            return Err(Error::invalid("tranches", "first tranche must attach at 0"));
        }
        for (k, pair) in tranches.windows(2).enumerate() {
            if (pair[1].attachment - pair[0].detachment).abs() > BOUNDARY_TOLERANCE {
                return Err(Error::invalid(
                    "tranches",
                    format!(
                        "tranche {} attaches at {} but tranche {k} detaches at {}",
                        k + 1,
                        pair[1].attachment,
                        pair[0].detachment
                    ),
                ));
            }
        }
        if (tranches[tranches.len() - 1].detachment - 1.0).abs() > BOUNDARY_TOLERANCE {
            return Err(Error::invalid("tranches", "last tranche must detach at 1"));
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(Error::invalid("recovery", format!("must lie in [0, 1], got {recovery}")));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::invalid("maturity", format!("must be finite and > 0, got {maturity}")));
        }
        if !(premium_frequency > 0.0) || !premium_frequency.is_finite() {
            return Err(Error::invalid(
                "premium_frequency",
                format!("must be finite and > 0, got {premium_frequency}"),
            ));
        }
        Ok(Self {
            pool,
            tranches,
            recovery,
            maturity,
            premium_frequency,
        })
    }

    pub fn pool(&self) -> &TngPool {
        &self.pool
    }

    pub fn tranches(&self) -> &[Tranche] {
        &self.tranches
    }

    pub fn recovery(&self) -> f64 {
        self.recovery
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn premium_frequency(&self) -> f64 {
        self.premium_frequency
    }

    /// Same deal with a different recovery rate.
    pub fn with_recovery(&self, recovery: f64) -> Result<Self> {
        Self::new(
            self.pool.clone(),
            self.tranches.clone(),
            recovery,
            self.maturity,
            self.premium_frequency,
        )
    }

    /// Premium dates with their accrual fractions; the last period is a
    /// stub ending at maturity when maturity is not on the schedule.
    pub fn premium_schedule(&self) -> Vec<(f64, f64)> {
        let periods = (self.maturity * self.premium_frequency - 1e-9).ceil().max(1.0) as usize;
        let mut previous = 0.0;
        (1..=periods)
            .map(|j| {
                let t = if j == periods {
                    self.maturity
                } else {
                    j as f64 / self.premium_frequency
                };
                let accrual = t - previous;
                previous = t;
                (t, accrual)
            })
            .collect()
    }

    // Loss of each obligor on default, as a fraction of pool notional.
    fn loss_weights(&self) -> Vec<f64> {
        let notional = self.pool.notional();
        self.pool
            .entries()
            .iter()
            .map(|e| (1.0 - self.recovery) * e.contract.face() / notional)
            .collect()
    }

    /// Pool loss fraction at `t` given one path's default times (pool order).
    pub fn pool_loss(&self, path_defaults: &[Option<f64>], t: f64) -> f64 {
        let weights = self.loss_weights();
        path_defaults
            .iter()
            .zip(&weights)
            .filter(|(d, _)| d.is_some_and(|d| d <= t))
            .map(|(_, w)| w)
            .sum::<f64>()
            .min(1.0)
    }

    fn check_simulation(&self, sim: &SimulationOutput) -> Result<()> {
        let horizon = sim.config().horizon();
        if horizon < self.maturity {
            return Err(Error::HorizonTooShort {
                horizon,
                maturity: self.maturity,
            });
        }
        let pool_ids = self.pool.entries().iter().map(|e| e.firm.id());
        if sim.firm_ids().len() != self.pool.len() || !pool_ids.eq(sim.firm_ids().iter()) {
            return Err(Error::invalid(
                "simulation",
                "firms must be the pool obligors in pool order",
            ));
        }
        Ok(())
    }

    /// Pool loss fraction at `t` on every path.
    pub fn path_losses(&self, sim: &SimulationOutput, t: f64) -> Result<Vec<f64>> {
        self.check_simulation(sim)?;
        Ok((0..sim.n_paths())
            .map(|p| self.pool_loss(sim.path(p), t))
            .collect())
    }

    /// Discounted expected loss of each tranche, per unit of tranche notional.
    pub fn expected_tranche_loss(
        &self,
        sim: &SimulationOutput,
        curve: &FlatCurve,
    ) -> Result<Vec<LossEstimate>> {
        Ok(self
            .price_tranches(sim, curve)?
            .into_iter()
            .map(|r| LossEstimate {
                label: r.label,
                expected_loss: r.expected_loss,
                standard_error: r.standard_error,
            })
            .collect())
    }

    /// Fair running spread of each tranche.
    pub fn fair_spreads(&self, sim: &SimulationOutput, curve: &FlatCurve) -> Result<Vec<f64>> {
        Ok(self
            .price_tranches(sim, curve)?
            .into_iter()
            .map(|r| r.fair_spread)
            .collect())
    }

    /// Full tranche report from a completed simulation of the pool obligors.
    pub fn price_tranches(
        &self,
        sim: &SimulationOutput,
        curve: &FlatCurve,
    ) -> Result<Vec<TrancheReport>> {
        self.check_simulation(sim)?;
        let weights = self.loss_weights();
        let schedule: Vec<(f64, f64, f64)> = self
            .premium_schedule()
            .into_iter()
            .map(|(t, accrual)| (t, accrual, curve.discount_unchecked(t)))
            .collect();
        let nt = self.tranches.len();
        let mut stats = vec![LegSums::default(); nt];
        let mut events: Vec<(f64, f64)> = Vec::with_capacity(self.pool.len());
        let mut protection = vec![0.0; nt];
        let mut premium = vec![0.0; nt];

        for p in 0..sim.n_paths() {
            events.clear();
            events.extend(
                sim.path(p)
                    .iter()
                    .zip(&weights)
                    .filter_map(|(d, &w)| d.filter(|&t| t <= self.maturity).map(|t| (t, w))),
            );
            events.sort_by(|a, b| a.0.total_cmp(&b.0));

            protection.fill(0.0);
            let mut pool_loss = 0.0_f64;
            for &(t, w) in &events {
                let before = pool_loss;
                pool_loss = (pool_loss + w).min(1.0);
                let df = curve.discount_unchecked(t);
                for (k, tranche) in self.tranches.iter().enumerate() {
                    protection[k] += df * (tranche_loss(pool_loss, tranche) - tranche_loss(before, tranche));
                }
            }

            premium.fill(0.0);
            let mut next_event = 0;
            let mut loss_at_date = 0.0_f64;
            for &(t, accrual, df) in &schedule {
                while next_event < events.len() && events[next_event].0 <= t {
                    loss_at_date = (loss_at_date + events[next_event].1).min(1.0);
                    next_event += 1;
                }
                for (k, tranche) in self.tranches.iter().enumerate() {
                    premium[k] += accrual * df * (1.0 - tranche_loss(loss_at_date, tranche));
                }
            }

            for k in 0..nt {
                stats[k].add(protection[k], premium[k]);
            }
        }

        let n = sim.n_paths() as f64;
        self.tranches
            .iter()
            .zip(&stats)
            .map(|(tranche, s)| {
                let protection_leg = s.protection / n;
                let premium_leg = s.premium / n;
                let fair_spread = if protection_leg == 0.0 {
                    0.0
                } else if premium_leg == 0.0 {
                    return Err(Error::Unpriceable {
                        attachment: tranche.attachment,
                        detachment: tranche.detachment,
                    });
                } else {
                    protection_leg / premium_leg
                };
                let loss_var = sample_variance(s.protection, s.protection_sq, n);
                // delta method for the ratio of means
                let spread_var = if premium_leg > 0.0 {
                    let resid = s.protection_sq - 2.0 * fair_spread * s.cross
                        + fair_spread * fair_spread * s.premium_sq;
                    (resid / n).max(0.0) / (n * premium_leg * premium_leg) * n / (n - 1.0).max(1.0)
                } else {
                    0.0
                };
                Ok(TrancheReport {
                    label: tranche.label,
                    attachment: tranche.attachment,
                    detachment: tranche.detachment,
                    expected_loss: protection_leg,
                    standard_error: (loss_var / n).sqrt(),
                    protection_leg,
                    premium_leg,
                    fair_spread,
                    spread_standard_error: spread_var.sqrt(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LegSums {
    protection: f64,
    protection_sq: f64,
    premium: f64,
    premium_sq: f64,
    cross: f64,
}

impl LegSums {
    fn add(&mut self, protection: f64, premium: f64) {
        self.protection += protection;
        self.protection_sq += protection * protection;
        self.premium += premium;
        self.premium_sq += premium * premium;
        self.cross += protection * premium;
    }
}

fn sample_variance(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n < 2.0 {
        return 0.0;
    }
    let mean = sum / n;
    ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    pub label: TrancheLabel,
    pub expected_loss: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrancheReport {
    pub label: TrancheLabel,
    pub attachment: f64,
    pub detachment: f64,
    /// Discounted expected loss per unit tranche notional.
    pub expected_loss: f64,
    /// Standard error of `expected_loss`.
    pub standard_error: f64,
    pub protection_leg: f64,
    /// Expected discounted outstanding notional times accrual, per unit notional.
    pub premium_leg: f64,
    pub fair_spread: f64,
    pub spread_standard_error: f64,
}
