//! Self-contained scaling benchmark for the fit loop.
//!
//! Each measured point fits the same number of synthetic windows at a
//! different window length, holding cluster count and dimensions fixed, and
//! reports the best per-iteration wall time over a few repeats. With two or
//! more lengths the report includes the least-squares slope of log time
//! against log length, which exposes how the inner alignment solver scales.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fcm::{fit, InitStrategy};
use crate::params::HyperParams;
use crate::synth::{AnomalyKind, SynthConfig};
use crate::window::make_windows;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Window lengths to measure.
    pub sizes: Vec<usize>,
    /// Number of windows fitted at every length.
    pub windows: usize,
    pub clusters: usize,
    pub dims: usize,
    /// Fixed iteration count per fit; convergence is disabled so every
    /// repeat does the same work.
    pub iters: usize,
    /// Repeats per length; the fastest one is kept.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![16, 32, 64, 128],
            windows: 60,
            clusters: 3,
            dims: 2,
            iters: 5,
            repeats: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub window_length: usize,
    pub windows: usize,
    pub per_iter_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Log-log slope of time against window length; absent with fewer than
    /// two distinct lengths.
    pub slope: Option<f64>,
}

fn measure(options: &BenchOptions, window_length: usize) -> Result<f64> {
    let config = SynthConfig {
        length: options.windows + window_length - 1,
        dims: options.dims,
        period: 50.0,
        noise: 0.05,
        anomalies: 0,
        anomaly_length: 1,
        kind: AnomalyKind::Amplitude,
        seed: options.seed,
    };
    let series = crate::synth::generate(&config)?;
    let windows = make_windows(&series, window_length, 1)?;
    let params = HyperParams {
        clusters: options.clusters,
        fuzziness: 1.7,
        weight_exponent: 2.0,
        epsilon: f64::MIN_POSITIVE,
        max_iters: options.iters,
        ..HyperParams::default()
    };
    let mut best = f64::INFINITY;
    for repeat in 0..options.repeats {
        let start = Instant::now();
        let state = fit(
            &windows,
            &params,
            InitStrategy::Random,
            options.seed.wrapping_add(repeat as u64),
        )?;
        let per_iter = start.elapsed().as_secs_f64() / state.iterations().max(1) as f64;
        best = best.min(per_iter);
    }
    Ok(best)
}

/// Least-squares slope of y against x.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn run_bench(options: &BenchOptions) -> Result<BenchReport> {
    if options.sizes.is_empty() {
        return Err(Error::Config("no window lengths to measure".into()));
    }
    if options.sizes.iter().any(|&a| a < 2) {
        return Err(Error::Config("window lengths must be at least 2".into()));
    }
    if options.iters == 0 || options.repeats == 0 {
        return Err(Error::Config(
            "iteration and repeat counts must be positive".into(),
        ));
    }
    if options.windows <= options.clusters {
        return Err(Error::Config(format!(
            "{} windows cannot support {} clusters",
            options.windows, options.clusters
        )));
    }
    let mut rows = Vec::with_capacity(options.sizes.len());
    for &window_length in &options.sizes {
        rows.push(BenchRow {
            window_length,
            windows: options.windows,
            per_iter_seconds: measure(options, window_length)?,
        });
    }
    let mut distinct: Vec<usize> = options.sizes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let slope = (distinct.len() >= 2).then(|| {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.window_length as f64).ln(), r.per_iter_seconds.ln()))
            .collect();
        slope(&points)
    });
    Ok(BenchReport { rows, slope })
}
