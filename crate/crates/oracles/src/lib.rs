//! Reference computations for checking `tng-core`.
//!
//! Everything here is written independently of the library under test: its
//! own random number generator (xoshiro via `SmallRng` with Box-Muller
//! normals), a normal CDF obtained by quadrature of the density, and
//! brute-force or quadrature methods rather than closed forms where possible. Nothing in this crate
//! depends on `tng-core`.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|self.mean - value| ≤ k · std_error`.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Standard normal CDF by Gauss-Legendre quadrature of the density.
///
/// The lower tail is integrated directly over `[x - 14, x]` so it keeps
/// full relative precision; the upper tail uses `1 - Φ(-x)`.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        integrate(normal_density, x - 14.0, x, 280)
    } else {
        1.0 - phi(-x)
    }
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

/// Standard normal CDF by integrating the density from 0.
pub fn normal_cdf_by_quadrature(x: f64) -> f64 {
    0.5 + integrate(normal_density, 0.0, x, 400)
}

/// Black-Scholes European call.
pub fn black_scholes_call(spot: f64, strike: f64, r: f64, tau: f64, sigma: f64) -> f64 {
    let sd = sigma * tau.sqrt();
    let d1 = ((spot / strike).ln() + (r + 0.5 * sigma * sigma) * tau) / sd;
    let d2 = d1 - sd;
    spot * phi(d1) - strike * (-r * tau).exp() * phi(d2)
}

/// Box-Muller normal generator on top of xoshiro.
pub struct NormalSource {
    rng: SmallRng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SmallRng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

fn estimate(sum: f64, sum_sq: f64, n: usize) -> Estimate {
    let n_f = n as f64;
    let mean = sum / n_f;
    let var = (sum_sq / n_f - mean * mean).max(0.0) * n_f / (n_f - 1.0);
    Estimate {
        mean,
        std_error: (var / n_f).sqrt(),
    }
}

/// `E[e^{-rτ} min(V_τ, B)]` under risk-neutral GBM, by exact terminal sampling.
pub fn merton_terminal_mc(
    v0: f64,
    face: f64,
    r: f64,
    tau: f64,
    sigma: f64,
    paths: usize,
    seed: u64,
) -> Estimate {
    let mut normals = NormalSource::new(seed);
    let drift = (r - 0.5 * sigma * sigma) * tau;
    let vol = sigma * tau.sqrt();
    let df = (-r * tau).exp();
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..paths {
        let v_t = v0 * (drift + vol * normals.normal()).exp();
        let payoff = df * v_t.min(face);
        s += payoff;
        s2 += payoff * payoff;
    }
    estimate(s, s2, paths)
}

/// Thomas algorithm for a tridiagonal system; `lower[0]` and `upper[n-1]` are unused.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Perpetual coupon bond value from a finite-difference boundary-value solve.
///
/// Solves `½σ²V²F'' + (rV - C)F' - rF + C = 0` (the valuation PDE with the
/// coupon paid out of the firm and received by the bond, no time
/// dependence) with `F(0) = 0` and `F(∞) = C/r`. The solve runs in
/// `x = 2C/(σ²V)` where the equation is
///
/// ```text
/// x² F'' + ((2 - a) x + x²) F' - a F + 2C/σ² = 0,   a = 2r/σ²
/// ```
///
/// on a uniform grid over `[0, x_max]`, with `F(0) = C/r` and the small-V
/// behaviour `F ≈ V` imposed at `x_max`. Values at the requested `V` are
/// linearly interpolated.
pub fn perpetual_bond_bvp(
    coupon: f64,
    r: f64,
    sigma: f64,
    firm_values: &[f64],
    x_max: f64,
    cells: usize,
) -> Vec<f64> {
    let s2 = sigma * sigma;
    let a = 2.0 * r / s2;
    let k = 2.0 * coupon / s2;
    let h = x_max / cells as f64;
    let n = cells - 1;
    let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let left = coupon / r;
    let right = k / x_max;
    for i in 0..n {
        let x = (i + 1) as f64 * h;
        let second = x * x / (h * h);
        let first = ((2.0 - a) * x + x * x) / (2.0 * h);
        lo[i] = second - first;
        di[i] = -2.0 * second - a;
        up[i] = second + first;
        rhs[i] = -2.0 * coupon / s2;
    }
    rhs[0] -= lo[0] * left;
    rhs[n - 1] -= up[n - 1] * right;
    let interior = solve_tridiagonal(&lo, &di, &up, &rhs);
    let value_at = |j: usize| -> f64 {
        if j == 0 {
            left
        } else if j == cells {
            right
        } else {
            interior[j - 1]
        }
    };
    firm_values
        .iter()
        .map(|&v| {
            let x = k / v;
            assert!(x < x_max, "V = {v} lies outside the solved domain");
            let pos = x / h;
            let j = pos.floor() as usize;
            let w = pos - j as f64;
            (1.0 - w) * value_at(j) + w * value_at(j + 1)
        })
        .collect()
}

/// `P(min_{s≤t} (W_s - γ s) ≤ β)` for standard Brownian `W`, `β < 0`.
///
/// Inverse-Gaussian first-passage law of a Brownian motion with drift
/// `ν = -γ` through level `β`.
pub fn first_passage_cdf(beta: f64, gamma: f64, t: f64) -> f64 {
    let nu = -gamma;
    let st = t.sqrt();
    phi((beta - nu * t) / st) + (2.0 * nu * beta).exp() * phi((beta + nu * t) / st)
}

/// Density of the first-passage time in [`first_passage_cdf`].
pub fn first_passage_density(beta: f64, gamma: f64, t: f64) -> f64 {
    let nu = -gamma;
    let dev = beta - nu * t;
    beta.abs() / (2.0 * std::f64::consts::PI * t * t * t).sqrt() * (-dev * dev / (2.0 * t)).exp()
}

/// Joint default frequencies of two firms from a dense-grid simulation.
#[derive(Debug, Clone, Copy)]
pub struct JointDefaults {
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
    pub paths: usize,
}

impl JointDefaults {
    /// Correlation of the two default indicators.
    pub fn indicator_correlation(&self) -> f64 {
        let cov = self.p_ab - self.p_a * self.p_b;
        cov / (self.p_a * (1.0 - self.p_a) * self.p_b * (1.0 - self.p_b)).sqrt()
    }
}

/// Two standardized processes with increment correlation `rho`, each killed
/// at `β + γ s`; discrete monitoring with the Broadie-Glasserman-Kou
/// continuity shift of `0.5826 √Δt`.
pub fn two_firm_defaults(
    rho: f64,
    beta: f64,
    gamma: f64,
    t: f64,
    steps: usize,
    paths: usize,
    seed: u64,
) -> JointDefaults {
    let mut normals = NormalSource::new(seed);
    let dt = t / steps as f64;
    let sdt = dt.sqrt();
    let shift = 0.5826 * sdt;
    let ortho = (1.0 - rho * rho).max(0.0).sqrt();
    let (mut na, mut nb, mut nab) = (0usize, 0usize, 0usize);
    for _ in 0..paths {
        let (mut xa, mut xb) = (0.0, 0.0);
        let (mut da, mut db) = (false, false);
        for k in 1..=steps {
            let w1 = normals.normal();
            let w2 = normals.normal();
            xa += sdt * w1;
            xb += sdt * (rho * w1 + ortho * w2);
            let level = beta + gamma * k as f64 * dt + shift;
            da |= xa <= level;
            db |= xb <= level;
            if da && db {
                break;
            }
        }
        na += da as usize;
        nb += db as usize;
        nab += (da && db) as usize;
    }
    let n = paths as f64;
    JointDefaults {
        p_a: na as f64 / n,
        p_b: nb as f64 / n,
        p_ab: nab as f64 / n,
        paths,
    }
}

/// Fraction of Brownian bridges from `start` to `end` over `dt` whose
/// minimum reaches 0, by sequential bridge sampling on a dense grid with the
/// same continuity shift as [`two_firm_defaults`].
pub fn pinned_bridge_crossing(
    start: f64,
    end: f64,
    dt: f64,
    steps: usize,
    bridges: usize,
    seed: u64,
) -> Estimate {
    let mut normals = NormalSource::new(seed);
    let h = dt / steps as f64;
    let shift = 0.5826 * h.sqrt();
    let mut hits = 0usize;
    for _ in 0..bridges {
        let mut x = start;
        for j in 0..steps - 1 {
            let remaining = dt - j as f64 * h;
            let mean = x + (end - x) * h / remaining;
            let var = h * (remaining - h) / remaining;
            x = mean + var.sqrt() * normals.normal();
            if x <= shift {
                hits += 1;
                break;
            }
        }
    }
    let p = hits as f64 / bridges as f64;
    Estimate {
        mean: p,
        std_error: (p * (1.0 - p) / bridges as f64).sqrt(),
    }
}

/// Kolmogorov-Smirnov distance between the sample and the standard normal.
pub fn ks_statistic_normal(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample KS statistic (asymptotic).
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
