//! Structural credit pricing for tax-advance guarantees.
//!
//! A tax-advance guarantee (TNG) is a contract in which a guarantor pays a
//! firm's tax bill today and is repaid, with accrual, at a later date. Seen
//! from the guarantor it is a risky zero-coupon bond on the firm, so it is
//! priced here with the Merton structural model. Pools of such contracts are
//! tranched and priced with a correlated first-passage Monte Carlo model in
//! which every firm's standardized log-asset process loads on one common
//! Wiener factor.
//!
//! Module map:
//!
//! * [`numerics`]: normal CDF, log-gamma, Kummer's function and
//!   counter-based random streams.
//! * [`market`]: firms, the flat riskless curve and the transforms between
//!   asset space and the standardized default process.
//! * [`analytic`]: closed-form discount and perpetual coupon bonds, and a
//!   finite-difference residual of the valuation PDE.
//! * [`tng`]: the guarantee contract and pool construction.
//! * [`firstpassage`]: correlated first-passage simulation, survival and
//!   correlation readouts, factor-loading calibration.
//! * [`cdo`]: tranche waterfall, expected tranche loss and fair spreads.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cdo;
mod error;
pub mod firstpassage;
pub mod market;
pub mod numerics;
pub mod tng;

pub use error::{Error, Result};
