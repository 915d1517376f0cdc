//! Tax-advance guarantee contracts.
//!
//! The guarantor pays the obligor's tax bill `T₁` at initiation `t₀` and is
//! repaid in one bullet at maturity `T`, accrued at the contract rate:
//! `face = T₁ e^{r_c (T - t₀)}`. To the guarantor this is a risky zero-coupon
//! claim on the obligor and is priced with [`merton_discount_bond`].

use std::collections::{HashMap, HashSet};

use crate::analytic::{merton_discount_bond, DiscountBondSpec};
use crate::error::{require_finite, require_positive};
use crate::market::{Firm, FirmId, FlatCurve};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TngContract {
    obligor_id: FirmId,
    guarantor_id: String,
    tax_amount: f64,
    initiation: f64,
    maturity: f64,
    contract_rate: f64,
}

impl TngContract {
    pub fn new(
        obligor_id: impl Into<FirmId>,
        guarantor_id: impl Into<String>,
        tax_amount: f64,
        initiation: f64,
        maturity: f64,
        contract_rate: f64,
    ) -> Result<Self> {
        let tax_amount = require_positive("tax_amount", tax_amount)?;
        let initiation = require_finite("initiation", initiation)?;
        if initiation < 0.0 {
            return Err(Error::invalid("initiation", format!("must be >= 0, got {initiation}")));
        }
        let maturity = require_finite("maturity", maturity)?;
        if maturity <= initiation {
            return Err(Error::invalid(
                "maturity",
                format!("must be after initiation {initiation}, got {maturity}"),
            ));
        }
        Ok(Self {
            obligor_id: obligor_id.into(),
            guarantor_id: guarantor_id.into(),
            tax_amount,
            initiation,
            maturity,
            contract_rate: require_finite("contract_rate", contract_rate)?,
        })
    }

    pub fn obligor_id(&self) -> &FirmId {
        &self.obligor_id
    }

    pub fn guarantor_id(&self) -> &str {
        &self.guarantor_id
    }

    pub fn tax_amount(&self) -> f64 {
        self.tax_amount
    }

    pub fn initiation(&self) -> f64 {
        self.initiation
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn contract_rate(&self) -> f64 {
        self.contract_rate
    }

    /// Amount repaid at maturity.
    pub fn face(&self) -> f64 {
        self.tax_amount * (self.contract_rate * (self.maturity - self.initiation)).exp()
    }

    /// Bond terms seen at `valuation_time`.
    pub fn bond_spec(&self, valuation_time: f64) -> Result<DiscountBondSpec> {
        if !(valuation_time >= self.initiation && valuation_time < self.maturity) {
            return Err(Error::invalid(
                "valuation_time",
                format!(
                    "must lie in [{}, {}), got {valuation_time}",
                    self.initiation, self.maturity
                ),
            ));
        }
        DiscountBondSpec::new(self.face(), self.maturity - valuation_time)
    }

    /// Value of the repayment claim at `valuation_time`, taking the obligor's
    /// current asset value to be `firm.v0()`.
    pub fn price(&self, firm: &Firm, curve: &FlatCurve, valuation_time: f64) -> Result<f64> {
        if firm.id() != &self.obligor_id {
            return Err(Error::invalid(
                "firm",
                format!("contract obligor is `{}`, got `{}`", self.obligor_id, firm.id()),
            ));
        }
        let spec = self.bond_spec(valuation_time)?;
        merton_discount_bond(firm.v0(), &spec, curve, firm.sigma())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub contract: TngContract,
    pub firm: Firm,
}

/// Contracts matched to their obligors, one contract per firm.
#[derive(Debug, Clone, PartialEq)]
pub struct TngPool {
    entries: Vec<PoolEntry>,
}

impl TngPool {
    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Obligor firms in pool order.
    pub fn firms(&self) -> Vec<Firm> {
        self.entries.iter().map(|e| e.firm.clone()).collect()
    }

    /// Sum of repayment faces.
    pub fn notional(&self) -> f64 {
        self.entries.iter().map(|e| e.contract.face()).sum()
    }
}

/// Pairs every contract with its obligor, keeping contract order.
pub fn build_pool(contracts: &[TngContract], firms: &[Firm]) -> Result<TngPool> {
    if contracts.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut by_id: HashMap<&FirmId, &Firm> = HashMap::with_capacity(firms.len());
    for firm in firms {
        if by_id.insert(firm.id(), firm).is_some() {
            return Err(Error::DuplicateFirm(firm.id().to_string()));
        }
    }
    let mut used = HashSet::with_capacity(contracts.len());
    let entries = contracts
        .iter()
        .map(|c| {
            let firm = by_id
                .get(c.obligor_id())
                .ok_or_else(|| Error::UnresolvedObligor(c.obligor_id().to_string()))?;
            if !used.insert(c.obligor_id()) {
                return Err(Error::DuplicateFirm(c.obligor_id().to_string()));
            }
            Ok(PoolEntry {
                contract: c.clone(),
                firm: (*firm).clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TngPool { entries })
}
