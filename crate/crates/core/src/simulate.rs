//! Monte Carlo null distributions of LM and ALM.
//!
//! Replication `r` for sample size `n` draws its `n` normals from the stream
//! with index `(n << 32) | (r / chunk_size)`, after the `n * (r % chunk_size)`
//! deviates used by the earlier replications of that chunk. Chunks run on a
//! worker pool, each writing into its own slice of the per-`n` output
//! vectors, and their moment accumulators are merged in chunk order. The
//! resulting table depends only on the [`SimConfig`], never on the number of
//! workers.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{CentralMoments, FiniteSampleConstants, StatisticKind};
use crate::rng::{GeneratorKind, Stream, StreamSpec, TRANSFORM_NAME};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_CHUNK_SIZE: u64 = 10_000;
pub const DEFAULT_REPLICATIONS: u64 = 1_000_000;
pub const MIN_REPLICATIONS: u64 = 1_000;

/// The 1%, 5% and 10% significance levels as distribution-function values.
pub const REQUIRED_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

pub const DEFAULT_N_GRID: [usize; 19] = [
    10, 15, 20, 25, 30, 40, 50, 75, 100, 150, 200, 300, 400, 500, 800, 1000, 2000, 5000, 10000,
];

/// `k / 2000` for `k = 1..=1999`, plus the tail anchors 0.0001 and 0.9999.
pub fn default_p_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(2001);
    grid.push(0.0001);
    grid.extend((1..2000).map(|k| k as f64 / 2000.0));
    grid.push(0.9999);
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub replications: u64,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub chunk_size: u64,
}

impl SimConfig {
    pub fn new(n_grid: Vec<usize>, p_grid: Vec<f64>, replications: u64, seed: u64) -> SimConfig {
        SimConfig {
            n_grid,
            p_grid,
            replications,
            seed,
            generator: GeneratorKind::default(),
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    /// Default grids, `replications` and `seed` as given.
    pub fn with_default_grids(replications: u64, seed: u64) -> SimConfig {
        SimConfig::new(
            DEFAULT_N_GRID.to_vec(),
            default_p_grid(),
            replications,
            seed,
        )
    }

    pub fn with_generator(mut self, generator: GeneratorKind) -> SimConfig {
        self.generator = generator;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> SimConfig {
        self.chunk_size = chunk_size;
        self
    }

    /// Grid and size checks shared by simulation and table loading.
    pub fn validate_grids(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("empty sample size grid".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidConfig(format!(
                "sample size grid contains N = {n}; N < 4 is not allowed"
            )));
        }
        if self.n_grid.iter().any(|&n| n as u64 > u32::MAX as u64) {
            return Err(Error::InvalidConfig("sample size exceeds 2^32 - 1".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "sample size grid must be strictly ascending".into(),
            ));
        }
        if self.p_grid.is_empty() {
            return Err(Error::InvalidConfig("empty probability grid".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "probability {p} outside the open interval (0, 1)"
            )));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "probability grid must be strictly ascending".into(),
            ));
        }
        for level in REQUIRED_LEVELS {
            if !self.p_grid.contains(&level) {
                return Err(Error::InvalidConfig(format!(
                    "probability grid must contain {level}"
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_grids()?;
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk size must be positive".into()));
        }
        if self.chunk_count() > u32::MAX as u64 + 1 {
            return Err(Error::InvalidConfig(
                "too many chunks; raise the chunk size".into(),
            ));
        }
        if usize::try_from(self.replications).is_err() {
            return Err(Error::InvalidConfig("replication count too large".into()));
        }
        Ok(())
    }

    pub fn chunk_count(&self) -> u64 {
        self.replications.div_ceil(self.chunk_size.max(1))
    }
}

/// Index of the stream feeding chunk `chunk` of sample size `n`.
pub fn stream_index(n: usize, chunk: u64) -> u64 {
    ((n as u64) << 32) | chunk
}

/// Simulated quantiles `q[kind][p][n]` together with the configuration
/// that produced them and a standard error for each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    config: SimConfig,
    // row-major: p index major, n index minor
    quantiles: [Vec<f64>; 2],
    std_errors: [Vec<f64>; 2],
}

impl QuantileTable {
    /// Assembles a table from row-major `[p][n]` value vectors, checking
    /// shapes, signs and monotonicity in `p`.
    pub fn from_parts(
        config: SimConfig,
        quantiles: [Vec<f64>; 2],
        std_errors: [Vec<f64>; 2],
    ) -> Result<QuantileTable> {
        config
            .validate_grids()
            .map_err(|e| Error::InvalidTable(e.to_string()))?;
        let cells = config.n_grid.len() * config.p_grid.len();
        for kind in StatisticKind::ALL {
            let (q, se) = (&quantiles[kind.index()], &std_errors[kind.index()]);
            if q.len() != cells || se.len() != cells {
                return Err(Error::InvalidTable(format!(
                    "{kind} grid has {} values, expected {cells}",
                    q.len()
                )));
            }
            if q.iter().chain(se).any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidTable(format!(
                    "{kind} grid contains a negative or non-finite entry"
                )));
            }
        }
        let table = QuantileTable {
            config,
            quantiles,
            std_errors,
        };
        table.check_monotone()?;
        Ok(table)
    }

    fn check_monotone(&self) -> Result<()> {
        for kind in StatisticKind::ALL {
            for (j, &n) in self.config.n_grid.iter().enumerate() {
                let col = self.column(kind, j);
                if let Some(i) = col.windows(2).position(|w| w[1] < w[0]) {
                    return Err(Error::InvalidTable(format!(
                        "{kind} quantiles for N = {n} decrease between p = {} and p = {}",
                        self.config.p_grid[i],
                        self.config.p_grid[i + 1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn n_grid(&self) -> &[usize] {
        &self.config.n_grid
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.config.p_grid
    }

    pub fn generator_name(&self) -> &'static str {
        self.config.generator.name()
    }

    pub fn transform_name(&self) -> &'static str {
        TRANSFORM_NAME
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }

    fn cell(&self, p_index: usize, n_index: usize) -> usize {
        p_index * self.config.n_grid.len() + n_index
    }

    pub fn quantile(&self, kind: StatisticKind, p_index: usize, n_index: usize) -> f64 {
        self.quantiles[kind.index()][self.cell(p_index, n_index)]
    }

    pub fn std_error(&self, kind: StatisticKind, p_index: usize, n_index: usize) -> f64 {
        self.std_errors[kind.index()][self.cell(p_index, n_index)]
    }

    /// Quantiles across `n_grid` for one probability.
    pub fn row(&self, kind: StatisticKind, p_index: usize) -> &[f64] {
        let w = self.config.n_grid.len();
        &self.quantiles[kind.index()][p_index * w..(p_index + 1) * w]
    }

    pub fn std_error_row(&self, kind: StatisticKind, p_index: usize) -> &[f64] {
        let w = self.config.n_grid.len();
        &self.std_errors[kind.index()][p_index * w..(p_index + 1) * w]
    }

    /// Quantiles across `p_grid` for one sample size.
    pub fn column(&self, kind: StatisticKind, n_index: usize) -> Vec<f64> {
        (0..self.config.p_grid.len())
            .map(|i| self.quantile(kind, i, n_index))
            .collect()
    }

    pub fn p_index(&self, p: f64) -> Option<usize> {
        self.config.p_grid.iter().position(|&x| x == p)
    }

    pub fn n_index(&self, n: usize) -> Option<usize> {
        self.config.n_grid.iter().position(|&x| x == n)
    }
}

/// Linear interpolation between order statistics at zero-based position
/// `(R - 1) p`.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    Ok(order_statistic_at(sorted, p))
}

fn order_statistic_at(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Distribution-free standard error of the `p` quantile: half the spread of
/// the empirical quantiles at `p ± sqrt(p(1-p)/R)`.
fn quantile_std_error(sorted: &[f64], p: f64) -> f64 {
    let r = sorted.len() as f64;
    let s = (p * (1.0 - p) / r).sqrt();
    0.5 * (order_statistic_at(sorted, p + s) - order_statistic_at(sorted, p - s))
}

/// Count, mean and second to fourth central sums, mergeable in a fixed
/// order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct MomentAccumulator {
    count: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub(crate) fn push(&mut self, x: f64) {
        self.merge(&MomentAccumulator {
            count: 1.0,
            mean: x,
            ..Default::default()
        });
    }

    pub(crate) fn merge(&mut self, other: &MomentAccumulator) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count, other.count);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d_n = d / n;
        let d2 = d * d;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * d_n * na * nb * (na - nb) / n
            + 3.0 * d_n * (na * other.m2 - nb * self.m2);
        let m4 = self.m4
            + other.m4
            + d2 * d_n * d_n * na * nb * (na * na - na * nb + nb * nb) / n
            + 6.0 * d_n * d_n * (na * na * other.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * other.m3 - nb * self.m3);
        *self = MomentAccumulator {
            count: n,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        };
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased variance.
    pub(crate) fn variance(&self) -> f64 {
        self.m2 / (self.count - 1.0)
    }

    pub(crate) fn std_error_of_mean(&self) -> f64 {
        (self.variance() / self.count).sqrt()
    }

    /// Large-sample standard error of the variance estimate,
    /// `sqrt((mu4 - sigma^4) / R)`.
    pub(crate) fn std_error_of_variance(&self) -> f64 {
        let mu2 = self.m2 / self.count;
        let mu4 = self.m4 / self.count;
        ((mu4 - mu2 * mu2) / self.count).sqrt()
    }
}

/// Monte Carlo moments of skewness and kurtosis against their exact values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDiagnostics {
    pub n: usize,
    pub replications: u64,
    pub mean_b2: f64,
    pub var_b2: f64,
    pub var_sqrt_b1: f64,
    pub expected: FiniteSampleConstants,
    pub se_mean_b2: f64,
    pub se_var_b2: f64,
    pub se_var_sqrt_b1: f64,
    pub z_mean_b2: f64,
    pub z_var_b2: f64,
    pub z_var_sqrt_b1: f64,
}

impl MomentDiagnostics {
    fn from_accumulators(
        expected: FiniteSampleConstants,
        replications: u64,
        sqrt_b1: &MomentAccumulator,
        b2: &MomentAccumulator,
    ) -> MomentDiagnostics {
        let mean_b2 = b2.mean();
        let var_b2 = b2.variance();
        let var_sqrt_b1 = sqrt_b1.variance();
        let se_mean_b2 = b2.std_error_of_mean();
        let se_var_b2 = b2.std_error_of_variance();
        let se_var_sqrt_b1 = sqrt_b1.std_error_of_variance();
        MomentDiagnostics {
            n: expected.n,
            replications,
            mean_b2,
            var_b2,
            var_sqrt_b1,
            expected,
            se_mean_b2,
            se_var_b2,
            se_var_sqrt_b1,
            z_mean_b2: (mean_b2 - expected.c2) / se_mean_b2,
            z_var_b2: (var_b2 - expected.c3) / se_var_b2,
            z_var_sqrt_b1: (var_sqrt_b1 - expected.c1) / se_var_sqrt_b1,
        }
    }

    pub fn max_abs_z(&self) -> f64 {
        self.z_mean_b2
            .abs()
            .max(self.z_var_b2.abs())
            .max(self.z_var_sqrt_b1.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub completed: u64,
    pub total: u64,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub table: QuantileTable,
    pub diagnostics: Vec<MomentDiagnostics>,
}

/// Runs a [`SimConfig`] on a pool of `workers` threads (0 = one per CPU).
pub struct Simulator<'a> {
    config: &'a SimConfig,
    workers: usize,
    progress: Option<&'a (dyn Fn(Progress) + Sync)>,
}

impl<'a> Simulator<'a> {
    pub fn new(config: &'a SimConfig) -> Self {
        Simulator {
            config,
            workers: 0,
            progress: None,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Called after every finished chunk with the replications completed
    /// across the whole grid. Calls may arrive from any worker thread.
    pub fn progress(mut self, hook: &'a (dyn Fn(Progress) + Sync)) -> Self {
        self.progress = Some(hook);
        self
    }

    pub fn run(&self) -> Result<SimulationOutput> {
        let cfg = self.config;
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

        let width = cfg.n_grid.len();
        let cells = width * cfg.p_grid.len();
        let mut quantiles = [vec![0.0; cells], vec![0.0; cells]];
        let mut std_errors = [vec![0.0; cells], vec![0.0; cells]];
        let mut diagnostics = Vec::with_capacity(width);
        let total = cfg.replications * width as u64;
        let completed = AtomicU64::new(0);

        for (j, &n) in cfg.n_grid.iter().enumerate() {
            let constants = FiniteSampleConstants::new(n)?;
            let reps = cfg.replications as usize;
            let chunk = cfg.chunk_size as usize;
            // The only O(R) allocations: one vector per statistic.
            let mut lm = vec![0.0; reps];
            let mut alm = vec![0.0; reps];

            let partials: Vec<(MomentAccumulator, MomentAccumulator)> = pool.install(|| {
                lm.par_chunks_mut(chunk)
                    .zip(alm.par_chunks_mut(chunk))
                    .enumerate()
                    .map(|(c, (lm_out, alm_out))| {
                        let spec =
                            StreamSpec::new(cfg.seed, stream_index(n, c as u64), cfg.generator);
                        let acc = run_chunk(&constants, spec, lm_out, alm_out)?;
                        if let Some(hook) = self.progress {
                            let done = completed.fetch_add(lm_out.len() as u64, Ordering::Relaxed)
                                + lm_out.len() as u64;
                            hook(Progress {
                                completed: done,
                                total,
                            });
                        }
                        Ok(acc)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;

            let mut acc_b1 = MomentAccumulator::default();
            let mut acc_b2 = MomentAccumulator::default();
            for (b1, b2) in &partials {
                acc_b1.merge(b1);
                acc_b2.merge(b2);
            }
            diagnostics.push(MomentDiagnostics::from_accumulators(
                constants,
                cfg.replications,
                &acc_b1,
                &acc_b2,
            ));

            pool.install(|| {
                lm.par_sort_unstable_by(f64::total_cmp);
                alm.par_sort_unstable_by(f64::total_cmp);
            });
            for (kind, values) in [(StatisticKind::Lm, &lm), (StatisticKind::Alm, &alm)] {
                for (i, &p) in cfg.p_grid.iter().enumerate() {
                    let cell = i * width + j;
                    quantiles[kind.index()][cell] = order_statistic_at(values, p);
                    std_errors[kind.index()][cell] = quantile_std_error(values, p);
                }
            }
        }

        let table = QuantileTable::from_parts(cfg.clone(), quantiles, std_errors)?;
        Ok(SimulationOutput { table, diagnostics })
    }
}

/// Simulates one chunk; replication `k` of the chunk fills `lm_out[k]` and
/// `alm_out[k]` from the same sample.
fn run_chunk(
    constants: &FiniteSampleConstants,
    spec: StreamSpec,
    lm_out: &mut [f64],
    alm_out: &mut [f64],
) -> Result<(MomentAccumulator, MomentAccumulator)> {
    let n = constants.n;
    let mut stream = Stream::new(spec);
    let mut sample = vec![0.0; n];
    let mut acc_b1 = MomentAccumulator::default();
    let mut acc_b2 = MomentAccumulator::default();
    for (lm, alm) in lm_out.iter_mut().zip(alm_out.iter_mut()) {
        stream.fill_normal(&mut sample);
        let shape = CentralMoments::in_order(&sample).shape()?;
        *lm = shape.lm(n);
        *alm = shape.alm(constants);
        acc_b1.push(shape.sqrt_b1);
        acc_b2.push(shape.b2);
    }
    Ok((acc_b1, acc_b2))
}

/// Runs `config` with one worker per CPU.
pub fn simulate_null(config: &SimConfig) -> Result<QuantileTable> {
    Ok(Simulator::new(config).run()?.table)
}

/// Simulates `replications` null samples of size `n` and compares the Monte
/// Carlo mean and variance of kurtosis and variance of skewness with their
/// exact finite-sample values.
pub fn moment_diagnostics(n: usize, replications: u64, seed: u64) -> Result<MomentDiagnostics> {
    moment_diagnostics_with(n, replications, seed, GeneratorKind::default(), 0)
}

pub fn moment_diagnostics_with(
    n: usize,
    replications: u64,
    seed: u64,
    generator: GeneratorKind,
    workers: usize,
) -> Result<MomentDiagnostics> {
    let cfg = SimConfig::new(vec![n], REQUIRED_LEVELS.to_vec(), replications, seed)
        .with_generator(generator);
    let out = Simulator::new(&cfg).workers(workers).run()?;
    Ok(out.diagnostics[0])
}

/// The raw sample behind replication `r` of sample size `n`.
pub fn replay_replication(config: &SimConfig, n: usize, r: u64) -> Result<Vec<f64>> {
    config.validate()?;
    if r >= config.replications {
        return Err(Error::Domain(format!(
            "replication {r} out of range (R = {})",
            config.replications
        )));
    }
    let chunk = r / config.chunk_size;
    let offset = (r % config.chunk_size) as usize;
    let mut stream = Stream::new(StreamSpec::new(
        config.seed,
        stream_index(n, chunk),
        config.generator,
    ));
    let mut sample = vec![0.0; n];
    for _ in 0..=offset {
        stream.fill_normal(&mut sample);
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_quantile_examples() {
        assert_eq!(
            empirical_quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5).unwrap(),
            3.0
        );
        assert_eq!(empirical_quantile(&[10.0, 20.0], 0.75).unwrap(), 17.5);
        for p in [0.001, 0.3, 0.999] {
            assert_eq!(empirical_quantile(&[4.25], p).unwrap(), 4.25);
        }
        assert!(matches!(
            empirical_quantile(&[], 0.5),
            Err(Error::EmptySample)
        ));
        assert!(empirical_quantile(&[1.0], 1.0).is_err());
    }

    #[test]
    fn default_p_grid_shape() {
        let g = default_p_grid();
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 0.0001);
        assert_eq!(*g.last().unwrap(), 0.9999);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        for level in REQUIRED_LEVELS {
            assert!(g.contains(&level));
        }
    }

    #[test]
    fn accumulator_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0)
            .collect();
        let mut whole = MomentAccumulator::default();
        for &x in &xs {
            whole.push(x);
        }
        let mut merged = MomentAccumulator::default();
        for part in xs.chunks(97) {
            let mut a = MomentAccumulator::default();
            for &x in part {
                a.push(x);
            }
            merged.merge(&a);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let c = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>();
        for acc in [whole, merged] {
            assert!((acc.mean - mean).abs() < 1e-12);
            assert!((acc.m2 - c(2)).abs() < 1e-9 * c(2).abs());
            assert!((acc.m3 - c(3)).abs() < 1e-9 * c(4).abs());
            assert!((acc.m4 - c(4)).abs() < 1e-9 * c(4).abs());
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let base = SimConfig::new(vec![10, 20], REQUIRED_LEVELS.to_vec(), 1000, 1);
        assert!(base.validate().is_ok());

        let mut c = base.clone();
        c.n_grid = vec![3, 10];
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("N < 4"), "{msg}");

        let mut c = base.clone();
        c.n_grid = vec![20, 10];
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.p_grid = vec![0.9, 0.95];
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.p_grid = vec![0.5, 0.9, 0.95, 0.99, 1.0];
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.replications = 999;
        assert!(c.validate().is_err());

        let mut c = base;
        c.chunk_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_run_is_monotone_and_paired() {
        let cfg = SimConfig::new(vec![4, 12], vec![0.1, 0.5, 0.9, 0.95, 0.99], 3000, 11)
            .with_chunk_size(700);
        let table = simulate_null(&cfg).unwrap();
        for kind in StatisticKind::ALL {
            for j in 0..2 {
                let col = table.column(kind, j);
                assert!(col.windows(2).all(|w| w[0] < w[1]), "{kind} {col:?}");
            }
        }
        let sample =
            crate::moments::Sample::new(replay_replication(&cfg, 12, 1234).unwrap()).unwrap();
        assert_eq!(sample.len(), 12);
        assert!(sample.lm_statistic().unwrap() >= 0.0);
    }
}
