#![allow(dead_code)]

use tng_core::market::Firm;

/// Firm whose standardized process has barrier `beta + gamma t`.
pub fn standardized_firm(id: &str, beta: f64, gamma: f64, alpha: f64) -> Firm {
    let sigma = 0.25;
    let mu = 0.5 * sigma * sigma - gamma * sigma;
    Firm::new(id, 1.0, mu, sigma, (beta * sigma).exp(), alpha).unwrap()
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
