//! Shared plumbing from a raw series to a fitted model and evaluated scores.

use crate::config::RunConfig;
use crate::detector::ScoreSeries;
use crate::error::{Error, Result};
use crate::fcm::{fit, FcmModel, FitState, InitStrategy};
use crate::params::HyperParams;
use crate::series::{MultivariateSeries, Normalizer};
use crate::window::make_windows;

/// Normalize (when asked), window, and fit one model. The returned model
/// carries the normalization so scoring new data reapplies it.
pub fn fit_series(
    series: &MultivariateSeries,
    config: &RunConfig,
    params: &HyperParams,
    seed: u64,
) -> Result<(FcmModel, FitState)> {
    let normalizer = config.normalize.then(|| Normalizer::fit(series));
    let prepared = match &normalizer {
        Some(n) => n.apply(series)?,
        None => series.clone(),
    };
    let windows = make_windows(&prepared, config.window_length, config.stride)?;
    let state = fit(&windows, params, InitStrategy::DensityPeaks, seed)?;
    let mut model = state.to_model();
    model.normalization = normalizer;
    Ok((model, state))
}

/// Pair up the scores of covered observations with their labels, dropping
/// observations no window reached.
pub fn labeled_scores(scored: &ScoreSeries) -> Result<(Vec<f64>, Vec<u8>)> {
    let labels = scored
        .labels
        .as_ref()
        .ok_or(Error::EmptyInput("scores carry no labels"))?;
    let mut s = Vec::with_capacity(scored.scores.len());
    let mut l = Vec::with_capacity(scored.scores.len());
    for (score, &label) in scored.scores.iter().zip(labels) {
        if let Some(value) = score {
            s.push(*value);
            l.push(label);
        }
    }
    if s.is_empty() {
        return Err(Error::EmptyInput("no observation was covered by a window"));
    }
    Ok((s, l))
}
