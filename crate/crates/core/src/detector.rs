//! Reconstruction-based anomaly scoring.
//!
//! A fitted model explains a window by softly assigning it to the cluster
//! centers and rebuilding it from them along the warping alignments. The
//! anomaly score of a window is the warped distance between the window and
//! its reconstruction, solved fresh rather than read off the encoding
//! alignments. Window scores are folded back onto observation indices; an
//! observation inherits the scores of every window that covers it.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fcm::{membership_column, FcmModel};
use crate::series::MultivariateSeries;
use crate::wdtw::{wdtw_distance, DimensionWeights, WarpingPath};
use crate::window::make_windows;

/// How per-observation scores combine the scores of covering windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            other => Err(Error::Config(format!(
                "unknown aggregation {other:?}, expected \"mean\" or \"max\""
            ))),
        }
    }
}

/// Per-observation anomaly scores for one series.
///
/// `scores[t]` is `None` when no window covers observation t (possible with
/// a stride above 1 or near the series end), never silently zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub scores: Vec<Option<f64>>,
    pub coverage: Vec<usize>,
    pub labels: Option<Vec<u8>>,
    /// Raw per-window scores, index k for the window starting at k * stride.
    pub window_scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Write `index,score,coverage[,label]` rows; uncovered observations get
    /// an empty score cell.
    pub fn to_csv_writer<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let with_labels = self.labels.is_some();
        if with_labels {
            writer.write_record(["index", "score", "coverage", "label"])?;
        } else {
            writer.write_record(["index", "score", "coverage"])?;
        }
        for t in 0..self.len() {
            let score = match self.scores[t] {
                Some(s) => s.to_string(),
                None => String::new(),
            };
            let coverage = self.coverage[t].to_string();
            if let Some(labels) = &self.labels {
                writer.write_record([t.to_string(), score, coverage, labels[t].to_string()])?;
            } else {
                writer.write_record([t.to_string(), score, coverage])?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_path(&self, path: &std::path::Path) -> Result<()> {
        self.to_csv_writer(std::fs::File::create(path)?)
    }

    pub fn from_csv_reader<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let headers = reader.headers()?.clone();
        let expected_base = ["index", "score", "coverage"];
        let fields: Vec<&str> = headers.iter().collect();
        let with_labels = match fields.as_slice() {
            f if f == expected_base => false,
            ["index", "score", "coverage", "label"] => true,
            other => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected score header {other:?}"),
                })
            }
        };
        let mut scores = Vec::new();
        let mut coverage = Vec::new();
        let mut labels = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let line = k + 2;
            let record = record?;
            let parse_err = |message: String| Error::Parse { line, message };
            let index: usize = record[0]
                .parse()
                .map_err(|_| parse_err(format!("bad index {:?}", &record[0])))?;
            if index != k {
                return Err(parse_err(format!("index {index} out of order")));
            }
            let score = if record[1].is_empty() {
                None
            } else {
                let value: f64 = record[1]
                    .parse()
                    .map_err(|_| parse_err(format!("bad score {:?}", &record[1])))?;
                if !value.is_finite() {
                    return Err(parse_err(format!("non-finite score {value}")));
                }
                Some(value)
            };
            let cov: usize = record[2]
                .parse()
                .map_err(|_| parse_err(format!("bad coverage {:?}", &record[2])))?;
            if with_labels {
                let label = match &record[3] {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(parse_err(format!("bad label {other:?}"))),
                };
                labels.push(label);
            }
            scores.push(score);
            coverage.push(cov);
        }
        if scores.is_empty() {
            return Err(Error::EmptyInput("score file has no rows"));
        }
        Ok(Self {
            scores,
            coverage,
            labels: if with_labels { Some(labels) } else { None },
            window_scores: Vec::new(),
        })
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// The pieces of a model needed to score windows, with weights rebuilt once.
struct Engine {
    centers: Vec<Array2<f64>>,
    weights: DimensionWeights,
    fuzziness: f64,
}

impl Engine {
    fn from_model(model: &FcmModel) -> Result<Self> {
        model.check_invariants()?;
        Ok(Self {
            centers: model.center_arrays(),
            weights: model.weights()?,
            fuzziness: model.fuzziness,
        })
    }

    /// Soft assignment of one window to the centers, plus the alignments and
    /// distances the assignment was derived from.
    fn encode(
        &self,
        window: ArrayView2<'_, f64>,
    ) -> Result<(Vec<f64>, Vec<WarpingPath>, Vec<f64>)> {
        let mut dists = Vec::with_capacity(self.centers.len());
        let mut paths = Vec::with_capacity(self.centers.len());
        for center in &self.centers {
            let (d, p) = wdtw_distance(center.view(), window, &self.weights)?;
            dists.push(d);
            paths.push(p);
        }
        let mut memberships = vec![0.0; self.centers.len()];
        membership_column(&dists, self.fuzziness, &mut memberships);
        Ok((memberships, paths, dists))
    }

    /// Rebuild a window of `len` rows from the centers: each observation is
    /// the membership-weighted mean of every center row aligned to it.
    fn reconstruct(&self, len: usize, memberships: &[f64], paths: &[WarpingPath]) -> Array2<f64> {
        let dims = self.weights.len();
        let mut num = Array2::<f64>::zeros((len, dims));
        let mut den = vec![0.0; len];
        for (i, center) in self.centers.iter().enumerate() {
            let u = memberships[i];
            if u == 0.0 {
                continue;
            }
            let um = u.powf(self.fuzziness);
            for &(r, s) in paths[i].pairs() {
                den[s] += um;
                for d in 0..dims {
                    num[[s, d]] += um * center[[r, d]];
                }
            }
        }
        for s in 0..len {
            if den[s] > 0.0 {
                for d in 0..dims {
                    num[[s, d]] /= den[s];
                }
            }
        }
        num
    }

    /// Warped distance between a window and its reconstruction, solved with
    /// a fresh alignment.
    fn score(&self, window: ArrayView2<'_, f64>) -> Result<f64> {
        let (memberships, paths, _) = self.encode(window)?;
        let rebuilt = self.reconstruct(window.nrows(), &memberships, &paths);
        Ok(wdtw_distance(window, rebuilt.view(), &self.weights)?.0)
    }
}

/// Soft cluster assignment of one window under a fitted model: memberships,
/// the alignment to each center, and the distance along each alignment.
pub fn encode(
    model: &FcmModel,
    window: ArrayView2<'_, f64>,
) -> Result<(Vec<f64>, Vec<WarpingPath>, Vec<f64>)> {
    Engine::from_model(model)?.encode(window)
}

/// Reconstruction of one window from a fitted model's centers.
pub fn reconstruct(model: &FcmModel, window: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let engine = Engine::from_model(model)?;
    let (memberships, paths, _) = engine.encode(window)?;
    Ok(engine.reconstruct(window.nrows(), &memberships, &paths))
}

/// Anomaly score of one window: distance to its own reconstruction.
pub fn score_window(model: &FcmModel, window: ArrayView2<'_, f64>) -> Result<f64> {
    Engine::from_model(model)?.score(window)
}

/// Score a whole series against a fitted model.
///
/// The series is normalized with the model's stored normalization (when
/// present), windowed with the model's geometry, and scored window by
/// window. Each observation aggregates the scores of the windows covering
/// it; labels on the input are carried through.
pub fn score_series(
    model: &FcmModel,
    series: &MultivariateSeries,
    aggregation: Aggregation,
) -> Result<ScoreSeries> {
    let engine = Engine::from_model(model)?;
    if series.dims() != model.dims {
        return Err(Error::DimensionMismatch {
            expected: model.dims,
            actual: series.dims(),
        });
    }
    let normalized = match &model.normalization {
        Some(norm) => norm.apply(series)?,
        None => series.clone(),
    };
    let windows = make_windows(&normalized, model.window_length, model.stride)?;
    let window_scores: Vec<f64> = windows
        .windows()
        .par_iter()
        .map(|win| engine.score(win.values()))
        .collect::<Result<_>>()?;

    let n = series.len();
    let mut sums = vec![0.0; n];
    let mut maxes = vec![f64::NEG_INFINITY; n];
    let mut coverage = vec![0usize; n];
    for (k, &score) in window_scores.iter().enumerate() {
        for t in windows.covered_range(k) {
            sums[t] += score;
            maxes[t] = maxes[t].max(score);
            coverage[t] += 1;
        }
    }
    let scores = (0..n)
        .map(|t| {
            if coverage[t] == 0 {
                None
            } else {
                Some(match aggregation {
                    Aggregation::Mean => sums[t] / coverage[t] as f64,
                    Aggregation::Max => maxes[t],
                })
            }
        })
        .collect();
    Ok(ScoreSeries {
        scores,
        coverage,
        labels: series.labels().map(|l| l.to_vec()),
        window_scores,
    })
}
