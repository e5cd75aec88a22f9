//! Fuzzy clustering of multivariate time series under a learned, locally
//! weighted dynamic time warping distance, with a reconstruction-based
//! anomaly score on top.
//!
//! The pipeline is: slice a series into windows, cluster the windows with
//! fuzzy C-means where the distance is weighted DTW and the per-dimension
//! weights are learned jointly with the clusters, then score each window by
//! how badly the learned centers reconstruct it. Window scores are folded
//! back onto time indices to give a per-observation anomaly score.

pub mod bench;
pub mod config;
pub mod detector;
pub mod error;
pub mod fcm;
pub mod grid;
pub mod metrics;
pub mod params;
pub mod pipeline;
pub mod series;
pub mod synth;
pub mod wdtw;
pub mod window;

pub use bench::{run_bench, BenchOptions, BenchReport, BenchRow};
pub use config::{ConfigLayer, RunConfig};
pub use detector::{score_series, Aggregation, ScoreSeries};
pub use error::{Error, Result};
pub use fcm::{fit, FcmModel, FitState, InitStrategy};
pub use grid::{run_grid, GridCell, GridReport};
pub use metrics::{evaluate, pr_auc, roc_auc, EvalResult};
pub use params::HyperParams;
pub use pipeline::{fit_series, labeled_scores};
pub use series::{MultivariateSeries, Normalizer};
pub use synth::{generate, AnomalyKind, SynthConfig};
pub use wdtw::{
    cost_matrix, solve_owp, wdtw_distance, weighted_euclidean, DimensionWeights, WarpingPath,
};
pub use window::{make_windows, Window, WindowSet};
