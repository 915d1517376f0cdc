//! Closed-form Merton prices and a finite-difference check of the valuation PDE.

use crate::error::require_positive;
use crate::market::{quasi_debt_ratio, FlatCurve};
use crate::numerics::{kummer_m, ln_gamma, norm_cdf};
use crate::{Error, Result};

/// Zero-coupon debt promising `face` at `maturity` (time to maturity, years).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountBondSpec {
    face: f64,
    maturity: f64,
}

impl DiscountBondSpec {
    pub fn new(face: f64, maturity: f64) -> Result<Self> {
        Ok(Self {
            face: require_positive("face", face)?,
            maturity: require_positive("maturity", maturity)?,
        })
    }

    pub fn face(&self) -> f64 {
        self.face
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }
}

/// Perpetual debt paying `coupon_rate` per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetualBondSpec {
    coupon_rate: f64,
}

impl PerpetualBondSpec {
    pub fn new(coupon_rate: f64) -> Result<Self> {
        Ok(Self {
            coupon_rate: require_positive("coupon_rate", coupon_rate)?,
        })
    }

    pub fn coupon_rate(&self) -> f64 {
        self.coupon_rate
    }
}

/// Merton's `(h1, h2)` for quasi-debt ratio `d` and total variance `σ²τ`.
///
/// `h1 = -(σ²τ/2 - ln d)/√(σ²τ)`, `h2 = -(σ²τ/2 + ln d)/√(σ²τ)`.
pub fn merton_h(d: f64, sigma2tau: f64) -> Result<(f64, f64)> {
    require_positive("d", d)?;
    require_positive("sigma2tau", sigma2tau)?;
    let sd = sigma2tau.sqrt();
    let ln_d = d.ln();
    let half_var = 0.5 * sigma2tau;
    Ok((-(half_var - ln_d) / sd, -(half_var + ln_d) / sd))
}

// Below this total variance the h-functions are numerically singular and
// the zero-volatility limit is returned instead.
const MIN_SIGMA2TAU: f64 = 1e-24;

/// Merton price of risky zero-coupon debt on a firm worth `firm_value`.
///
/// `F = B e^{-rτ} [Φ(h2) + Φ(h1)/d]`. The result is capped at
/// `min(V, B e^{-rτ})`, which it can only exceed by rounding.
pub fn merton_discount_bond(
    firm_value: f64,
    spec: &DiscountBondSpec,
    curve: &FlatCurve,
    sigma: f64,
) -> Result<f64> {
    require_positive("firm_value", firm_value)?;
    require_positive("sigma", sigma)?;
    let tau = spec.maturity;
    let riskless = spec.face * curve.discount(tau)?;
    let sigma2tau = sigma * sigma * tau;
    if sigma2tau < MIN_SIGMA2TAU {
        return Ok(firm_value.min(riskless));
    }
    let d = quasi_debt_ratio(firm_value, spec.face, curve, tau)?;
    let (h1, h2) = merton_h(d, sigma2tau)?;
    let price = riskless * norm_cdf(h2) + firm_value * norm_cdf(h1);
    Ok(price.min(riskless).min(firm_value))
}

/// Promised continuously compounded yield over the riskless rate.
pub fn credit_spread(price: f64, spec: &DiscountBondSpec, curve: &FlatCurve) -> Result<f64> {
    require_positive("price", price)?;
    let tau = spec.maturity;
    let riskless = spec.face * curve.discount(tau)?;
    if price > riskless * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::invalid(
            "price",
            format!("{price} exceeds the riskless value {riskless}"),
        ));
    }
    Ok((-(price / spec.face).ln() / tau - curve.rate()).max(0.0))
}

/// Merton price of a perpetual bond paying `C` per unit time:
///
/// ```text
/// F = (C/r) [1 - z^a / Γ(2 + a) · M(a, 2 + a, -z)],   a = 2r/σ²,  z = 2C/(σ²V)
/// ```
///
/// Only defined for `r > 0`. Fails with [`Error::Overflow`] when `z`
/// exceeds [`crate::numerics::KUMMER_MAX_ABS_Z`].
pub fn perpetual_coupon_bond(
    firm_value: f64,
    spec: &PerpetualBondSpec,
    curve: &FlatCurve,
    sigma: f64,
) -> Result<f64> {
    require_positive("firm_value", firm_value)?;
    require_positive("sigma", sigma)?;
    let r = curve.rate();
    if !(r > 0.0) {
        return Err(Error::NonPositiveRate(r));
    }
    let c = spec.coupon_rate;
    let s2 = sigma * sigma;
    let a = 2.0 * r / s2;
    let z = 2.0 * c / (s2 * firm_value);
    let m = kummer_m(a, 2.0 + a, -z)?;
    let weight = (a * z.ln() - ln_gamma(2.0 + a)?).exp();
    let default_share = weight * m;
    if !default_share.is_finite() {
        return Err(Error::Overflow("perpetual_coupon_bond"));
    }
    Ok((c / r * (1.0 - default_share)).max(0.0))
}

/// Claim values sampled on a rectangular `(V, τ)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSurface {
    v_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    // row-major: values[i * tau_grid.len() + j] = F(v_grid[i], tau_grid[j])
    values: Vec<f64>,
}

impl GridSurface {
    pub fn new(v_grid: Vec<f64>, tau_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if v_grid.first().is_some_and(|&v| !(v > 0.0)) {
            return Err(Error::invalid("v_grid", "asset values must be positive"));
        }
        if tau_grid.first().is_some_and(|&t| !(t >= 0.0)) {
            return Err(Error::invalid("tau_grid", "maturities must be nonnegative"));
        }
        check_increasing("v_grid", &v_grid)?;
        check_increasing("tau_grid", &tau_grid)?;
        if values.len() != v_grid.len() * tau_grid.len() {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} x {} entries, got {}",
                    v_grid.len(),
                    tau_grid.len(),
                    values.len()
                ),
            ));
        }
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite entry {bad}")));
        }
        Ok(Self {
            v_grid,
            tau_grid,
            values,
        })
    }

    /// Samples `claim(v, tau)` at every grid node.
    pub fn from_fn<F>(v_grid: Vec<f64>, tau_grid: Vec<f64>, claim: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(v_grid.len() * tau_grid.len());
        for &v in &v_grid {
            for &tau in &tau_grid {
                values.push(claim(v, tau)?);
            }
        }
        Self::new(v_grid, tau_grid, values)
    }

    pub fn v_grid(&self) -> &[f64] {
        &self.v_grid
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.tau_grid.len() + j]
    }
}

fn check_increasing(field: &'static str, grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::invalid(
            field,
            format!("need at least 3 points for central differences, got {}", grid.len()),
        ));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(field, "must be finite and strictly increasing"));
    }
    Ok(())
}

/// Evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    let step = (end - start) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { end } else { start + k as f64 * step })
        .collect()
}

/// PDE residuals at the interior nodes of a [`GridSurface`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrid {
    v_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    values: Vec<f64>,
    claim: Vec<f64>,
}

impl ResidualGrid {
    pub fn v_grid(&self) -> &[f64] {
        &self.v_grid
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn residual(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.tau_grid.len() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest `|residual| / |f|` over nodes where `f ≠ 0`.
    pub fn max_relative(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.claim)
            .filter(|(_, f)| **f != 0.0)
            .fold(0.0, |m, (r, f)| m.max((r / f).abs()))
    }
}

// Three-point weights for the first and second derivative at the middle of
// nodes spaced h0, h1 (exact for quadratics).
fn stencil(h0: f64, h1: f64) -> ([f64; 3], [f64; 3]) {
    let s = h0 + h1;
    let first = [-h1 / (h0 * s), (h1 - h0) / (h0 * h1), h0 / (h1 * s)];
    let second = [2.0 / (h0 * s), -2.0 / (h0 * h1), 2.0 / (h1 * s)];
    (first, second)
}

/// Residual of the claim valuation PDE in time-to-maturity form,
///
/// ```text
/// ½σ²V² f_VV + (rV - p(V,τ)) f_V - r f - f_τ + p'(V,τ)
/// ```
///
/// where `p` is the firm's payout rate and `p'` the payout received by the
/// claim. The sign of `f_τ` makes the riskless bond `B e^{-rτ}` an exact
/// solution. Derivatives are three-point central differences (non-uniform
/// spacing allowed); boundary nodes are left out.
pub fn pde_residual<P, Q>(
    surface: &GridSurface,
    curve: &FlatCurve,
    sigma: f64,
    payout_firm: P,
    payout_claim: Q,
) -> Result<ResidualGrid>
where
    P: Fn(f64, f64) -> f64,
    Q: Fn(f64, f64) -> f64,
{
    require_positive("sigma", sigma)?;
    let r = curve.rate();
    let half_var = 0.5 * sigma * sigma;
    let (vs, ts) = (&surface.v_grid, &surface.tau_grid);
    let (nv, nt) = (vs.len(), ts.len());
    let mut values = Vec::with_capacity((nv - 2) * (nt - 2));
    let mut claim = Vec::with_capacity(values.capacity());
    for i in 1..nv - 1 {
        let v = vs[i];
        let (dv, dvv) = stencil(v - vs[i - 1], vs[i + 1] - v);
        for j in 1..nt - 1 {
            let tau = ts[j];
            let (dt, _) = stencil(tau - ts[j - 1], ts[j + 1] - tau);
            let f = surface.value(i, j);
            let along_v = [surface.value(i - 1, j), f, surface.value(i + 1, j)];
            let along_t = [surface.value(i, j - 1), f, surface.value(i, j + 1)];
            let f_v: f64 = dv.iter().zip(along_v).map(|(w, x)| w * x).sum();
            let f_vv: f64 = dvv.iter().zip(along_v).map(|(w, x)| w * x).sum();
            let f_tau: f64 = dt.iter().zip(along_t).map(|(w, x)| w * x).sum();
            let res = half_var * v * v * f_vv + (r * v - payout_firm(v, tau)) * f_v - r * f
                - f_tau
                + payout_claim(v, tau);
            values.push(res);
            claim.push(f);
        }
    }
    Ok(ResidualGrid {
        v_grid: vs[1..nv - 1].to_vec(),
        tau_grid: ts[1..nt - 1].to_vec(),
        values,
        claim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(r: f64) -> FlatCurve {
        FlatCurve::new(r).unwrap()
    }

    #[test]
    fn merton_h_examples() {
        let (h1, h2) = merton_h(1.0, 0.04).unwrap();
        assert!((h1 + 0.1).abs() < 1e-15 && (h2 + 0.1).abs() < 1e-15);
        let d = (-0.05f64).exp();
        let (h1, h2) = merton_h(d, 0.04).unwrap();
        assert!((h1 + 0.35).abs() < 1e-12);
        assert!((h2 - 0.15).abs() < 1e-12);
        let (h1, h2) = merton_h(0.951229, 0.04).unwrap();
        // (-0.02 + ln 0.951229) / 0.2 and (0.02 + ln 0.951229) / -0.2
        assert!((h1 + 0.350_002_231_327_153).abs() < 1e-12);
        assert!((h2 - 0.150_002_231_327_153).abs() < 1e-12);
        assert!(merton_h(0.0, 0.04).is_err());
        assert!(merton_h(1.0, 0.0).is_err());
    }

    #[test]
    fn discount_bond_limits() {
        let spec = DiscountBondSpec::new(100.0, 1.0).unwrap();
        let c = curve(0.05);
        let riskless = 100.0 * (-0.05f64).exp();
        let rich = merton_discount_bond(1e9, &spec, &c, 0.2).unwrap();
        assert!((rich / riskless - 1.0).abs() < 1e-9);
        // vanishing volatility with d > 1: bondholders take the firm
        let poor = merton_discount_bond(60.0, &spec, &c, 1e-13).unwrap();
        assert_eq!(poor, 60.0);
        let poor = merton_discount_bond(60.0, &spec, &c, 1e-6).unwrap();
        assert!((poor - 60.0).abs() < 1e-9);
        // d = 1 is regular
        let atm = riskless;
        let p = merton_discount_bond(atm, &spec, &c, 0.2).unwrap();
        assert!(p > 0.0 && p < atm);
    }

    #[test]
    fn discount_bond_accepts_nonpositive_rates() {
        let spec = DiscountBondSpec::new(100.0, 2.0).unwrap();
        for r in [0.0, -0.01] {
            let p = merton_discount_bond(120.0, &spec, &curve(r), 0.3).unwrap();
            assert!(p > 0.0 && p <= 100.0 * (-r * 2.0f64).exp());
        }
    }

    #[test]
    fn discount_bond_rejects_bad_inputs() {
        let spec = DiscountBondSpec::new(100.0, 1.0).unwrap();
        assert!(merton_discount_bond(0.0, &spec, &curve(0.05), 0.2).is_err());
        assert!(merton_discount_bond(100.0, &spec, &curve(0.05), 0.0).is_err());
        assert!(DiscountBondSpec::new(0.0, 1.0).is_err());
        assert!(DiscountBondSpec::new(100.0, 0.0).is_err());
    }

    #[test]
    fn credit_spread_examples() {
        let spec = DiscountBondSpec::new(100.0, 2.0).unwrap();
        let c = curve(0.03);
        let riskless = 100.0 * (-0.06f64).exp();
        assert!(credit_spread(riskless, &spec, &c).unwrap().abs() < 1e-15);
        let risky = 100.0 * (-(0.03 + 0.01) * 2.0f64).exp();
        assert!((credit_spread(risky, &spec, &c).unwrap() - 0.01).abs() < 1e-14);
        assert!(credit_spread(riskless * 1.001, &spec, &c).is_err());
        let p = merton_discount_bond(1e9, &spec, &c, 0.2).unwrap();
        assert!(credit_spread(p, &spec, &c).unwrap() < 1e-12);
    }

    #[test]
    fn perpetual_limits_and_errors() {
        let spec = PerpetualBondSpec::new(5.0).unwrap();
        let c = curve(0.05);
        let far = perpetual_coupon_bond(1e7, &spec, &c, 0.2).unwrap();
        assert!((far / 100.0 - 1.0).abs() < 1e-6);
        assert!(far < 100.0);
        let lo = perpetual_coupon_bond(50.0, &spec, &c, 0.2).unwrap();
        let hi = perpetual_coupon_bond(200.0, &spec, &c, 0.2).unwrap();
        assert!(lo < hi);
        assert_eq!(
            perpetual_coupon_bond(100.0, &spec, &curve(0.0), 0.2),
            Err(Error::NonPositiveRate(0.0))
        );
        assert!(matches!(
            perpetual_coupon_bond(100.0, &spec, &curve(-0.01), 0.2),
            Err(Error::NonPositiveRate(_))
        ));
        // z = 2C/(σ²V) = 250/V > 700
        assert_eq!(
            perpetual_coupon_bond(0.3, &spec, &c, 0.2),
            Err(Error::Overflow("kummer_m"))
        );
        assert!(PerpetualBondSpec::new(0.0).is_err());
    }

    #[test]
    fn perpetual_small_firm_value_approaches_firm_value() {
        // As V -> 0 the bond takes the whole firm: F ≈ V.
        let spec = PerpetualBondSpec::new(5.0).unwrap();
        let f = perpetual_coupon_bond(1.0, &spec, &curve(0.05), 0.2).unwrap();
        assert!((f - 1.0).abs() < 0.02, "{f}");
    }

    #[test]
    fn surface_validation() {
        let v = vec![1.0, 2.0, 3.0];
        let t = vec![0.0, 0.5, 1.0];
        assert!(GridSurface::new(v.clone(), t.clone(), vec![0.0; 9]).is_ok());
        assert!(GridSurface::new(v.clone(), t.clone(), vec![0.0; 8]).is_err());
        assert!(GridSurface::new(vec![1.0, 2.0], t.clone(), vec![0.0; 6]).is_err());
        assert!(GridSurface::new(vec![1.0, 1.0, 2.0], t.clone(), vec![0.0; 9]).is_err());
        assert!(GridSurface::new(vec![0.0, 1.0, 2.0], t.clone(), vec![0.0; 9]).is_err());
        assert!(GridSurface::new(v.clone(), vec![-1.0, 0.0, 1.0], vec![0.0; 9]).is_err());
        let mut bad = vec![0.0; 9];
        bad[4] = f64::NAN;
        assert!(GridSurface::new(v, t, bad).is_err());
    }

    #[test]
    fn riskless_bond_and_firm_have_zero_residual() {
        let c = curve(0.04);
        let v = linspace(50.0, 150.0, 41);
        let t = linspace(0.1, 2.0, 41);
        let bond = GridSurface::from_fn(v.clone(), t.clone(), |_, tau| Ok(100.0 * (-0.04 * tau).exp())).unwrap();
        let res = pde_residual(&bond, &c, 0.3, |_, _| 0.0, |_, _| 0.0).unwrap();
        // only the O(Δτ²) truncation of f_τ remains
        assert!(res.max_relative() < 1e-5, "{}", res.max_relative());
        let firm = GridSurface::from_fn(v, t, |v, _| Ok(v)).unwrap();
        let res = pde_residual(&firm, &c, 0.3, |_, _| 0.0, |_, _| 0.0).unwrap();
        assert!(res.max_abs() < 1e-10);
        assert_eq!(res.v_grid().len(), 39);
        assert_eq!(res.tau_grid().len(), 39);
    }

    #[test]
    fn nonuniform_stencil_is_exact_for_quadratics() {
        let (d1, d2) = stencil(0.3, 0.7);
        let f = |x: f64| 2.0 + 3.0 * x - 1.5 * x * x;
        let xs = [-0.3, 0.0, 0.7];
        let fd1: f64 = d1.iter().zip(xs).map(|(w, x)| w * f(x)).sum();
        let fd2: f64 = d2.iter().zip(xs).map(|(w, x)| w * f(x)).sum();
        assert!((fd1 - 3.0).abs() < 1e-13);
        assert!((fd2 + 3.0).abs() < 1e-13);
    }
}
