//! Correlated first-passage default simulation.
//!
//! Each firm's standardized process is driven by one common factor and its
//! own idiosyncratic noise,
//!
//! ```text
//! dX_i = α_i dF + √(1 - α_i²) dU_i,
//! ```
//!
//! so increments of two firms have correlation `α_i α_j`. Firm `i` defaults
//! the first time `X_i(t) ≤ β_i + γ_i t`.
//!
//! Paths are simulated on a uniform grid `Δt = horizon / n_steps`. With the
//! bridge correction on, a step whose endpoints are both above the barrier
//! still counts as a default with the Brownian-bridge crossing probability,
//! which removes the low bias of discrete monitoring.
//!
//! The bridge decision of firm `i` compares the crossing probability with
//! `u_i = Φ(α_i Z_c + √(1 - α_i²) Z_i)`, built from one common and one own
//! normal per step. Each `u_i` is uniform, and firms with equal loadings of
//! one share the same decision, as their paths do.
//!
//! Path `p` draws only from [`RandomStream::new(seed, p)`](RandomStream). Per
//! step it consumes, in order, one common normal, one idiosyncratic normal
//! per firm and, when bridging, one common and one own normal per firm; the
//! same count is drawn whatever the loadings or default states are. Results
//! therefore depend on nothing but `(firms, config)`, and a path's draws do
//! not shift when a barrier moves.

use crate::market::{BarrierParams, Firm, FirmId};
use crate::numerics::{norm_cdf, RandomStream, StreamSampler};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    n_paths: usize,
    n_steps: usize,
    horizon: f64,
    seed: u64,
    bridge_correction: bool,
}

impl SimConfig {
    pub fn new(
        n_paths: usize,
        n_steps: usize,
        horizon: f64,
        seed: u64,
        bridge_correction: bool,
    ) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::invalid("n_paths", "must be >= 1"));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be >= 1"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        Ok(Self {
            n_paths,
            n_steps,
            horizon,
            seed,
            bridge_correction,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bridge_correction(&self) -> bool {
        self.bridge_correction
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Grid time `t_k`; `time(n_steps)` is exactly the horizon.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            self.horizon * k as f64 / self.n_steps as f64
        }
    }
}

/// Probability that a Brownian bridge from `x_start` to `x_end` over `dt`
/// touches the straight-line barrier from `b_start` to `b_end`.
///
/// Subtracting the affine barrier leaves a Brownian bridge between the two
/// distances, whose minimum is below zero with probability
/// `exp(-2 d_start d_end / dt)`.
pub fn bridge_crossing_probability(
    x_start: f64,
    x_end: f64,
    b_start: f64,
    b_end: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(x_start > b_start) {
        return Err(Error::invalid("x_start", "must lie above the barrier"));
    }
    if !(x_end > b_end) {
        return Err(Error::invalid("x_end", "must lie above the barrier"));
    }
    Ok(crossing_probability(x_start - b_start, x_end - b_end, dt))
}

#[inline]
fn crossing_probability(dist_start: f64, dist_end: f64, dt: f64) -> f64 {
    (-2.0 * dist_start * dist_end / dt).exp().min(1.0)
}

#[derive(Debug, Clone, Copy)]
struct Dynamics {
    barrier: BarrierParams,
    common: f64,
    idiosyncratic: f64,
}

impl Dynamics {
    fn of(firm: &Firm) -> Self {
        let alpha = firm.alpha();
        let idiosyncratic = if alpha.abs() == 1.0 {
            0.0
        } else {
            (1.0 - alpha * alpha).sqrt()
        };
        Self {
            barrier: firm.barrier_params(),
            common: alpha,
            idiosyncratic,
        }
    }
}

fn dynamics(firms: &[Firm]) -> Result<Vec<Dynamics>> {
    if firms.is_empty() {
        return Err(Error::invalid("firms", "need at least one firm"));
    }
    Ok(firms.iter().map(Dynamics::of).collect())
}

/// Draws the per-step increments of one path.
struct PathStepper {
    sampler: StreamSampler,
    sqrt_dt: f64,
    bridge: bool,
}

impl PathStepper {
    fn new(config: &SimConfig, path_id: usize) -> Self {
        Self {
            sampler: RandomStream::new(config.seed, path_id as u64).sampler(),
            sqrt_dt: config.dt().sqrt(),
            bridge: config.bridge_correction,
        }
    }

    fn step(&mut self, dynamics: &[Dynamics], increments: &mut [f64], uniforms: &mut [f64]) {
        let common = self.sampler.standard_normal();
        for (inc, d) in increments.iter_mut().zip(dynamics) {
            let own = self.sampler.standard_normal();
            *inc = self.sqrt_dt * (d.common * common + d.idiosyncratic * own);
        }
        if self.bridge {
            let common = self.sampler.standard_normal();
            for (u, d) in uniforms.iter_mut().zip(dynamics) {
                let own = self.sampler.standard_normal();
                *u = norm_cdf(d.common * common + d.idiosyncratic * own);
            }
        }
    }
}

/// Runs one path, writing first-passage times into `defaults` and reporting
/// every grid state to `observe(k, x)`. Without `full_grid` the path stops
/// once every firm has defaulted.
fn run_path<O>(
    dynamics: &[Dynamics],
    config: &SimConfig,
    path_id: usize,
    defaults: &mut [Option<f64>],
    full_grid: bool,
    mut observe: O,
) where
    O: FnMut(usize, &[f64]),
{
    let n = dynamics.len();
    let dt = config.dt();
    let mut stepper = PathStepper::new(config, path_id);
    let mut x = vec![0.0; n];
    let mut inc = vec![0.0; n];
    let mut uniforms = vec![0.0; n];
    defaults.fill(None);
    observe(0, &x);
    let mut alive = n;
    for k in 0..config.n_steps {
        if alive == 0 && !full_grid {
            break;
        }
        stepper.step(dynamics, &mut inc, &mut uniforms);
        let t0 = config.time(k);
        let t1 = config.time(k + 1);
        let stamp = if config.bridge_correction {
            t0 + 0.5 * dt
        } else {
            t1
        };
        for i in 0..n {
            let x0 = x[i];
            let x1 = x0 + inc[i];
            x[i] = x1;
            if defaults[i].is_some() {
                continue;
            }
            let b1 = dynamics[i].barrier.level_unchecked(t1);
            let crossed = x1 <= b1
                || (config.bridge_correction && {
                    let b0 = dynamics[i].barrier.level_unchecked(t0);
                    uniforms[i] < crossing_probability(x0 - b0, x1 - b1, dt)
                });
            if crossed {
                defaults[i] = Some(stamp);
                alive -= 1;
            }
        }
        observe(k + 1, &x);
    }
}

#[cfg(feature = "parallel")]
fn for_each_path<T, F>(out: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(p, slot)| f(p, slot));
}

#[cfg(not(feature = "parallel"))]
fn for_each_path<T, F>(out: &mut [T], width: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    out.chunks_mut(width)
        .enumerate()
        .for_each(|(p, slot)| f(p, slot));
}

/// One firm's outcome on one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultRecord<'a> {
    pub path_id: usize,
    pub firm_id: &'a FirmId,
    /// In `(0, horizon]`, or `None` if the firm survived the horizon.
    pub default_time: Option<f64>,
}

/// First-passage times for every path and firm.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    firm_ids: Vec<FirmId>,
    config: SimConfig,
    // path-major: default_times[path * n_firms + firm]
    default_times: Vec<Option<f64>>,
}

/// Simulates first-passage defaults for `firms` under `config`.
///
/// Output is identical for a given `(firms, config)` however many threads
/// run it.
pub fn simulate_defaults(firms: &[Firm], config: &SimConfig) -> Result<SimulationOutput> {
    let dynamics = dynamics(firms)?;
    let n = firms.len();
    let mut default_times = vec![None; config.n_paths * n];
    for_each_path(&mut default_times, n, |p, slot| {
        run_path(&dynamics, config, p, slot, false, |_, _| {})
    });
    Ok(SimulationOutput {
        firm_ids: firms.iter().map(|f| f.id().clone()).collect(),
        config: *config,
        default_times,
    })
}

impl SimulationOutput {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn n_paths(&self) -> usize {
        self.config.n_paths
    }

    pub fn firm_ids(&self) -> &[FirmId] {
        &self.firm_ids
    }

    pub fn firm_index(&self, firm_id: &str) -> Result<usize> {
        self.firm_ids
            .iter()
            .position(|id| id.as_str() == firm_id)
            .ok_or_else(|| Error::UnknownFirm(firm_id.to_string()))
    }

    /// Default times of all firms on one path, in firm order.
    pub fn path(&self, path_id: usize) -> &[Option<f64>] {
        let n = self.firm_ids.len();
        &self.default_times[path_id * n..(path_id + 1) * n]
    }

    pub fn default_time(&self, path_id: usize, firm_index: usize) -> Option<f64> {
        self.default_times[path_id * self.firm_ids.len() + firm_index]
    }

    pub fn records(&self) -> impl Iterator<Item = DefaultRecord<'_>> + '_ {
        let n = self.firm_ids.len();
        self.default_times
            .iter()
            .enumerate()
            .map(move |(k, &default_time)| DefaultRecord {
                path_id: k / n,
                firm_id: &self.firm_ids[k % n],
                default_time,
            })
    }

    fn defaulted_by(&self, firm: usize, t: f64) -> impl Iterator<Item = bool> + '_ {
        (0..self.n_paths()).map(move |p| self.default_time(p, firm).is_some_and(|d| d <= t))
    }

    /// Fraction of paths on which the firm has defaulted by `t`.
    pub fn default_probability(&self, firm_id: &str, t: f64) -> Result<f64> {
        let i = self.firm_index(firm_id)?;
        let hits = self.defaulted_by(i, t).filter(|&d| d).count();
        Ok(hits as f64 / self.n_paths() as f64)
    }

    /// Empirical survival probability at each of `times`.
    pub fn survival_curve(&self, firm_id: &str, times: &[f64]) -> Result<Vec<f64>> {
        let i = self.firm_index(firm_id)?;
        if times.iter().any(|&t| !(t > 0.0 && t <= self.config.horizon))
            || times.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::invalid(
                "times",
                format!("must be ascending within (0, {}]", self.config.horizon),
            ));
        }
        let mut sorted: Vec<f64> = (0..self.n_paths())
            .filter_map(|p| self.default_time(p, i))
            .collect();
        sorted.sort_by(f64::total_cmp);
        let n = self.n_paths() as f64;
        Ok(times
            .iter()
            .map(|&t| {
                let defaulted = sorted.partition_point(|&d| d <= t);
                1.0 - defaulted as f64 / n
            })
            .collect())
    }

    /// Sample correlation across paths of the indicators "defaulted by `t`".
    pub fn pairwise_default_correlation(&self, firm_a: &str, firm_b: &str, t: f64) -> Result<f64> {
        let a = self.firm_index(firm_a)?;
        let b = self.firm_index(firm_b)?;
        let n = self.n_paths() as f64;
        let (mut na, mut nb, mut nab) = (0usize, 0usize, 0usize);
        for (da, db) in self.defaulted_by(a, t).zip(self.defaulted_by(b, t)) {
            na += da as usize;
            nb += db as usize;
            nab += (da && db) as usize;
        }
        let (pa, pb, pab) = (na as f64 / n, nb as f64 / n, nab as f64 / n);
        for (p, id) in [(pa, firm_a), (pb, firm_b)] {
            if p == 0.0 || p == 1.0 {
                return Err(Error::DegenerateMarginal(id.to_string()));
            }
        }
        let corr = (pab - pa * pb) / (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
        Ok(corr.clamp(-1.0, 1.0))
    }
}

/// The standardized processes of one path on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    /// `t_0 = 0, …, t_n = horizon`.
    pub times: Vec<f64>,
    /// `x[firm][k] = X_firm(t_k)`, continued past default.
    pub x: Vec<Vec<f64>>,
    pub default_times: Vec<Option<f64>>,
}

/// Re-runs path `path_id` of [`simulate_defaults`] and keeps every grid value.
pub fn trace_path(firms: &[Firm], config: &SimConfig, path_id: usize) -> Result<PathTrace> {
    let dynamics = dynamics(firms)?;
    if path_id >= config.n_paths {
        return Err(Error::invalid("path_id", format!("must be < {}", config.n_paths)));
    }
    let n = firms.len();
    let mut x = vec![Vec::with_capacity(config.n_steps + 1); n];
    let mut default_times = vec![None; n];
    run_path(&dynamics, config, path_id, &mut default_times, true, |_, xs| {
        for (series, &v) in x.iter_mut().zip(xs) {
            series.push(v);
        }
    });
    Ok(PathTrace {
        times: (0..=config.n_steps).map(|k| config.time(k)).collect(),
        x,
        default_times,
    })
}

/// Symmetric matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CorrelationMatrix {
    const TOLERANCE: f64 = 1e-12;

    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::invalid("correlation", "matrix is empty"));
        }
        if let Some(k) = rows.iter().position(|row| row.len() != size) {
            return Err(Error::invalid(
                "correlation",
                format!("row {k} has {} entries, expected {size}", rows[k].len()),
            ));
        }
        #[allow(clippy::needless_range_loop)]
        for i in 0..size {
            if (rows[i][i] - 1.0).abs() > Self::TOLERANCE {
                return Err(Error::invalid(
                    "correlation",
                    format!("diagonal entry ({i}, {i}) is {}, expected 1", rows[i][i]),
                ));
            }
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !(a.abs() <= 1.0) {
                    return Err(Error::invalid(
                        "correlation",
                        format!("entry ({i}, {j}) = {a} outside [-1, 1]"),
                    ));
                }
                if !((a - b).abs() <= Self::TOLERANCE) {
                    return Err(Error::invalid(
                        "correlation",
                        format!("not symmetric at ({i}, {j}): {a} vs {b}"),
                    ));
                }
            }
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            entries.extend(row.into_iter().enumerate().map(|(j, v)| if i == j { 1.0 } else { v }));
        }
        Ok(Self { size, entries })
    }

    /// One-factor structure: off-diagonal entries `α_i α_j`.
    pub fn from_loadings(alphas: &[f64]) -> Result<Self> {
        let rows = alphas
            .iter()
            .enumerate()
            .map(|(i, a)| {
                alphas
                    .iter()
                    .enumerate()
                    .map(|(j, b)| if i == j { 1.0 } else { a * b })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }
}

// Paths per parallel work unit; fixed so that summation order does not
// depend on the thread count.
const PATH_CHUNK: usize = 256;

/// Sample correlation matrix of the simulated per-step increments `ΔX_i`,
/// pooled over all paths and steps (`n_paths × n_steps` samples).
pub fn process_increment_correlation(firms: &[Firm], config: &SimConfig) -> Result<CorrelationMatrix> {
    if firms.len() < 2 {
        return Err(Error::invalid("firms", "need at least two firms"));
    }
    let dynamics = dynamics(firms)?;
    let n = firms.len();
    // per chunk: n sums followed by n*n cross sums
    let width = n + n * n;
    let chunks = config.n_paths.div_ceil(PATH_CHUNK);
    let mut partial = vec![0.0; chunks * width];
    for_each_path(&mut partial, width, |c, acc| {
        let mut inc = vec![0.0; n];
        let mut uniforms = vec![0.0; n];
        let end = ((c + 1) * PATH_CHUNK).min(config.n_paths);
        for p in c * PATH_CHUNK..end {
            let mut stepper = PathStepper::new(config, p);
            for _ in 0..config.n_steps {
                stepper.step(&dynamics, &mut inc, &mut uniforms);
                for i in 0..n {
                    acc[i] += inc[i];
                    for j in 0..n {
                        acc[n + i * n + j] += inc[i] * inc[j];
                    }
                }
            }
        }
    });
    let mut sums = vec![0.0; width];
    for chunk in partial.chunks(width) {
        for (s, c) in sums.iter_mut().zip(chunk) {
            *s += c;
        }
    }
    let samples = (config.n_paths * config.n_steps) as f64;
    let mean: Vec<f64> = sums[..n].iter().map(|s| s / samples).collect();
    let cov = |i: usize, j: usize| sums[n + i * n + j] / samples - mean[i] * mean[j];
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        (cov(i, j) / (cov(i, i) * cov(j, j)).sqrt()).clamp(-1.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    CorrelationMatrix::new(rows)
}

/// Fitted one-factor loadings.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub alphas: Vec<f64>,
    /// `Σ_{i<j} (target_ij - α_i α_j)²` at the fitted loadings.
    pub objective: f64,
    pub sweeps: usize,
}

const CALIBRATION_MAX_SWEEPS: usize = 100_000;

fn one_factor_objective(target: &CorrelationMatrix, alphas: &[f64]) -> f64 {
    let n = target.size();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let e = target.get(i, j) - alphas[i] * alphas[j];
            total += e * e;
        }
    }
    total
}

/// Least-squares one-factor fit `target_ij ≈ α_i α_j` (`i ≠ j`).
///
/// Projected coordinate descent: each loading in turn is set to the exact
/// minimiser of the objective in that coordinate, clamped to `[-1, 1]`.
/// The loadings are returned with a nonnegative sum (the fit is invariant
/// under a global sign flip).
pub fn calibrate_alphas(target: &CorrelationMatrix) -> Calibration {
    let n = target.size();
    let mut alphas: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                return 0.0;
            }
            let mean_abs = (0..n)
                .filter(|&j| j != i)
                .map(|j| target.get(i, j).abs())
                .sum::<f64>()
                / (n - 1) as f64;
            mean_abs.sqrt()
        })
        .collect();
    let mut sweeps = 0;
    while sweeps < CALIBRATION_MAX_SWEEPS {
        sweeps += 1;
        let mut largest_move = 0.0_f64;
        for i in 0..n {
            let (mut num, mut den) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                num += target.get(i, j) * alphas[j];
                den += alphas[j] * alphas[j];
            }
            let updated = if den > 0.0 { (num / den).clamp(-1.0, 1.0) } else { 0.0 };
            largest_move = largest_move.max((updated - alphas[i]).abs());
            alphas[i] = updated;
        }
        if largest_move < 1e-15 {
            break;
        }
    }
    if alphas.iter().sum::<f64>() < 0.0 {
        alphas.iter_mut().for_each(|a| *a = -*a);
    }
    Calibration {
        objective: one_factor_objective(target, &alphas),
        alphas,
        sweeps,
    }
}
