//! Seeded synthetic series for tests, benchmarks, and demos.
//!
//! The base signal is a sine wave per dimension, each with its own amplitude
//! and phase so the dimensions are correlated but not identical. Anomalies
//! are injected into randomly placed, non-overlapping segments, and the label
//! vector marks exactly those observations.

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::MultivariateSeries;

/// What an injected segment does to the clean signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnomalyKind {
    /// Scales the segment, producing out-of-range magnitudes.
    Amplitude,
    /// Shifts the segment by half a period, breaking the temporal pattern.
    PatternShift,
    /// Rotates the dimension columns within the segment, keeping each
    /// dimension's marginal behavior plausible while breaking the
    /// relationship between them.
    DimensionFlip,
}

impl std::str::FromStr for AnomalyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(Self::Amplitude),
            "pattern-shift" => Ok(Self::PatternShift),
            "dimension-flip" => Ok(Self::DimensionFlip),
            other => Err(Error::Config(format!(
                "unknown anomaly kind {other:?}, expected amplitude, pattern-shift, or dimension-flip"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub length: usize,
    pub dims: usize,
    /// Observations per sine cycle.
    pub period: f64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub anomalies: usize,
    pub anomaly_length: usize,
    pub kind: AnomalyKind,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 2000,
            dims: 2,
            period: 50.0,
            noise: 0.05,
            anomalies: 5,
            anomaly_length: 24,
            kind: AnomalyKind::DimensionFlip,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validated(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Config(format!(
                "series length {} is too short",
                self.length
            )));
        }
        if self.dims == 0 {
            return Err(Error::Config("series needs at least one dimension".into()));
        }
        if !(self.period.is_finite() && self.period > 1.0) {
            return Err(Error::Config(format!(
                "period {} must be a finite number above 1",
                self.period
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Config(format!(
                "noise level {} must be finite and non-negative",
                self.noise
            )));
        }
        if self.anomalies > 0 && self.anomaly_length == 0 {
            return Err(Error::Config("anomaly length must be positive".into()));
        }
        if self.kind == AnomalyKind::DimensionFlip && self.anomalies > 0 && self.dims < 2 {
            return Err(Error::Config(
                "dimension-flip anomalies need at least 2 dimensions".into(),
            ));
        }
        // each segment needs a separating gap of its own length, plus margins
        // at both series ends
        let footprint = self.anomaly_length.saturating_mul(2 * self.anomalies + 1);
        if self.anomalies > 0 && footprint > self.length {
            return Err(Error::Config(format!(
                "{} anomalies of length {} do not fit into {} observations",
                self.anomalies, self.anomaly_length, self.length
            )));
        }
        Ok(())
    }
}

/// Amplitude and phase for one dimension. Spacing the phases irrationally
/// relative to the period keeps every pair of dimensions distinguishable,
/// which is what makes a dimension flip detectable.
fn dim_shape(d: usize) -> (f64, f64) {
    let amplitude = 1.0 + 0.3 * d as f64;
    let phase = d as f64 * std::f64::consts::FRAC_PI_3;
    (amplitude, phase)
}

/// Draw non-overlapping segment starts, keeping one segment length of margin
/// at both ends and between segments. Lays the segments out at their minimum
/// spacing and distributes the remaining slack with sorted random offsets, so
/// placement succeeds whenever the config is feasible.
fn place_segments(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let len = config.anomaly_length;
    let k = config.anomalies;
    let slack = config.length - len * (2 * k + 1);
    let mut offsets: Vec<usize> = (0..k).map(|_| rng.random_range(0..=slack)).collect();
    offsets.sort_unstable();
    offsets
        .iter()
        .enumerate()
        .map(|(i, &u)| len + i * 2 * len + u)
        .collect()
}

/// Generate a labeled series: sine base, injected anomaly segments, then
/// additive Gaussian noise. The same config always yields the same bytes.
pub fn generate(config: &SynthConfig) -> Result<MultivariateSeries> {
    config.validated()?;
    let (n, w) = (config.length, config.dims);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut values = Array2::zeros((n, w));
    for t in 0..n {
        for d in 0..w {
            let (amplitude, phase) = dim_shape(d);
            let angle = 2.0 * std::f64::consts::PI * t as f64 / config.period + phase;
            values[[t, d]] = amplitude * angle.sin();
        }
    }

    let starts = if config.anomalies > 0 {
        place_segments(config, &mut rng)
    } else {
        Vec::new()
    };
    let mut labels = vec![0u8; n];
    for &start in &starts {
        for t in start..start + config.anomaly_length {
            labels[t] = 1;
            match config.kind {
                AnomalyKind::Amplitude => {
                    for d in 0..w {
                        values[[t, d]] *= 2.5;
                    }
                }
                AnomalyKind::PatternShift => {
                    for d in 0..w {
                        let (amplitude, phase) = dim_shape(d);
                        let angle = 2.0 * std::f64::consts::PI * (t as f64 + config.period / 2.0)
                            / config.period
                            + phase;
                        values[[t, d]] = amplitude * angle.sin();
                    }
                }
                AnomalyKind::DimensionFlip => {
                    let row: Vec<f64> = (0..w).map(|d| values[[t, d]]).collect();
                    for d in 0..w {
                        values[[t, d]] = row[(d + 1) % w];
                    }
                }
            }
        }
    }

    if config.noise > 0.0 {
        let normal = Normal::new(0.0, config.noise)
            .map_err(|e| Error::Config(format!("bad noise level: {e}")))?;
        for t in 0..n {
            for d in 0..w {
                values[[t, d]] += normal.sample(&mut rng);
            }
        }
    }

    let names = (0..w).map(|d| format!("dim_{d}")).collect();
    MultivariateSeries::new(values, Some(names), Some(labels))
}
