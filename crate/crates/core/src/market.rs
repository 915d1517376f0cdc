//! Firms, the flat riskless curve and the standardized default coordinates.
//!
//! A firm's asset value follows geometric Brownian motion
//! `dV = μ V dt + σ V dz` with no payout. Writing
//!
//! ```text
//! X(t) = [ln V(t) - ln V(0) - (μ - σ²/2) t] / σ
//! ```
//!
//! turns `z` into the standardized process `X` with `X(0) = 0`, and the
//! default condition `V(t) ≤ B` into `X(t) ≤ β + γ t` with
//! `β = (ln B - ln V(0)) / σ` and `γ = -(μ - σ²/2) / σ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{require_finite, require_positive};
use crate::{Error, Result};

/// Opaque firm identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FirmId(Arc<str>);

impl FirmId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FirmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FirmId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Flat, non-stochastic term structure with continuously compounded rate `r`.
///
/// Zero and negative rates are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatCurve {
    r: f64,
}

impl FlatCurve {
    pub fn new(r: f64) -> Result<Self> {
        Ok(Self {
            r: require_finite("curve.r", r)?,
        })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    /// Price of a riskless unit zero-coupon bond maturing in `tau`.
    pub fn discount(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::invalid("tau", format!("must be finite and >= 0, got {tau}")));
        }
        Ok((-self.r * tau).exp())
    }

    // Hot-loop variant for callers that already validated `tau`.
    pub(crate) fn discount_unchecked(&self, tau: f64) -> f64 {
        (-self.r * tau).exp()
    }
}

/// `d = B e^{-rτ} / V`: present value of the promised payment per unit of assets.
pub fn quasi_debt_ratio(firm_value: f64, face: f64, curve: &FlatCurve, tau: f64) -> Result<f64> {
    require_positive("firm_value", firm_value)?;
    require_positive("face", face)?;
    Ok(face * curve.discount(tau)? / firm_value)
}

/// One obligor's asset process and default barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Firm {
    id: FirmId,
    v0: f64,
    mu: f64,
    sigma: f64,
    barrier: f64,
    alpha: f64,
}

impl Firm {
    /// Validates `v0 > 0`, `sigma > 0`, `0 < barrier < v0` and `|alpha| ≤ 1`.
    pub fn new(
        id: impl Into<FirmId>,
        v0: f64,
        mu: f64,
        sigma: f64,
        barrier: f64,
        alpha: f64,
    ) -> Result<Self> {
        let v0 = require_positive("v0", v0)?;
        let mu = require_finite("mu", mu)?;
        let sigma = require_positive("sigma", sigma)?;
        let barrier = require_positive("barrier", barrier)?;
        if barrier >= v0 {
            return Err(Error::invalid(
                "barrier",
                format!("must lie below v0 = {v0}, got {barrier}"),
            ));
        }
        if !(alpha.abs() <= 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in [-1, 1], got {alpha}"),
            ));
        }
        Ok(Self {
            id: id.into(),
            v0,
            mu,
            sigma,
            barrier,
            alpha,
        })
    }

    /// Firm whose asset drift is the riskless rate of `curve`.
    pub fn risk_neutral(
        id: impl Into<FirmId>,
        v0: f64,
        sigma: f64,
        barrier: f64,
        alpha: f64,
        curve: &FlatCurve,
    ) -> Result<Self> {
        Self::new(id, v0, curve.rate(), sigma, barrier, alpha)
    }

    pub fn id(&self) -> &FirmId {
        &self.id
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same firm with a different factor loading.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.id.clone(), self.v0, self.mu, self.sigma, self.barrier, alpha)
    }

    /// Same firm with a different default barrier.
    pub fn with_barrier(&self, barrier: f64) -> Result<Self> {
        Self::new(self.id.clone(), self.v0, self.mu, self.sigma, barrier, self.alpha)
    }

    /// Standardized process value `X(t)` for asset value `v_t` at time `t`.
    pub fn x_of_v(&self, v_t: f64, t: f64) -> Result<f64> {
        require_positive("v_t", v_t)?;
        if !(t >= 0.0) {
            return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
        }
        Ok(((v_t / self.v0).ln() - self.log_drift() * t) / self.sigma)
    }

    /// Inverse of [`Firm::x_of_v`].
    pub fn v_of_x(&self, x: f64, t: f64) -> f64 {
        self.v0 * (self.sigma * x + self.log_drift() * t).exp()
    }

    pub fn barrier_params(&self) -> BarrierParams {
        BarrierParams {
            beta: (self.barrier.ln() - self.v0.ln()) / self.sigma,
            gamma: -self.log_drift() / self.sigma,
        }
    }

    fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }
}

/// Barrier `β + γ t` for the standardized process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub beta: f64,
    pub gamma: f64,
}

impl BarrierParams {
    pub fn level(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
        }
        Ok(self.level_unchecked(t))
    }

    #[inline]
    pub(crate) fn level_unchecked(&self, t: f64) -> f64 {
        self.beta + self.gamma * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn firm() -> Firm {
        Firm::new("A", 100.0, 0.05, 0.25, 60.0, 0.3).unwrap()
    }

    #[test]
    fn discount_examples() {
        let c = FlatCurve::new(0.05).unwrap();
        assert_eq!(c.discount(0.0).unwrap(), 1.0);
        assert_eq!(FlatCurve::new(0.0).unwrap().discount(10.0).unwrap(), 1.0);
        assert!((c.discount(1.0).unwrap() - 0.951229424500714).abs() < 1e-15);
        assert!(c.discount(-1.0).is_err());
        assert!(FlatCurve::new(-0.01).unwrap().discount(1.0).unwrap() > 1.0);
        assert!(FlatCurve::new(f64::NAN).is_err());
    }

    #[test]
    fn quasi_debt_ratio_examples() {
        let zero = FlatCurve::new(0.0).unwrap();
        assert_eq!(quasi_debt_ratio(100.0, 100.0, &zero, 1.0).unwrap(), 1.0);
        assert_eq!(quasi_debt_ratio(200.0, 100.0, &zero, 1.0).unwrap(), 0.5);
        let c = FlatCurve::new(0.05).unwrap();
        assert!((quasi_debt_ratio(100.0, 100.0, &c, 1.0).unwrap() - 0.951229424500714).abs() < 1e-15);
        assert!(quasi_debt_ratio(0.0, 100.0, &c, 1.0).is_err());
        assert!(quasi_debt_ratio(100.0, -1.0, &c, 1.0).is_err());
    }

    #[test]
    fn firm_validation() {
        assert!(Firm::new("A", 100.0, 0.0, 0.0, 60.0, 0.0).is_err());
        assert!(Firm::new("A", 100.0, 0.0, 0.2, 100.0, 0.0).is_err());
        assert!(Firm::new("A", 100.0, 0.0, 0.2, 0.0, 0.0).is_err());
        assert!(Firm::new("A", -1.0, 0.0, 0.2, 0.5, 0.0).is_err());
        assert!(Firm::new("A", 100.0, 0.0, 0.2, 60.0, 1.01).is_err());
        assert!(Firm::new("A", 100.0, 0.0, 0.2, 60.0, -1.0).is_ok());
        let err = Firm::new("A", 100.0, 0.0, 0.0, 60.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput { field: "sigma", .. }));
    }

    #[test]
    fn x_of_v_examples() {
        let f = Firm::new("A", 100.0, 0.05, 0.2, 60.0, 0.0).unwrap();
        assert_eq!(f.x_of_v(100.0, 0.0).unwrap(), 0.0);
        for t in [0.5_f64, 1.0, 3.0] {
            let v = 100.0 * ((0.05 - 0.02) * t).exp();
            assert!(f.x_of_v(v, t).unwrap().abs() < 1e-14);
        }
        let x = f.x_of_v(110.0, 1.0).unwrap();
        assert!((x - (1.1f64.ln() - 0.03) / 0.2).abs() < 1e-15);
        assert!((x - 0.32655).abs() < 1e-5);
        assert!(f.x_of_v(0.0, 1.0).is_err());
        assert!((f.v_of_x(x, 1.0) - 110.0).abs() < 1e-12);
    }

    #[test]
    fn barrier_params_example() {
        let p = firm().barrier_params();
        assert!((p.beta - 0.6f64.ln() / 0.25).abs() < 1e-14);
        assert!((p.beta + 2.04330).abs() < 1e-5);
        assert!((p.gamma + 0.075).abs() < 1e-15);
        let f = Firm::new("A", 100.0, 0.02, 0.2, 60.0, 0.0).unwrap();
        assert!(f.barrier_params().gamma.abs() < 1e-15);
        let near = Firm::new("A", 100.0, 0.0, 0.3, 100.0 - 1e-9, 0.0).unwrap();
        assert!(near.barrier_params().beta.abs() < 1e-10);
        assert!(near.barrier_params().beta < 0.0);
    }

    #[test]
    fn barrier_level_examples() {
        let p = BarrierParams { beta: -2.04330, gamma: -0.075 };
        assert_eq!(p.level(0.0).unwrap(), -2.04330);
        assert!((p.level(2.0).unwrap() + 2.19330).abs() < 1e-12);
        let flat = BarrierParams { beta: -1.0, gamma: 0.0 };
        assert_eq!(flat.level(7.0).unwrap(), -1.0);
        assert!(p.level(-0.1).is_err());
    }
}
