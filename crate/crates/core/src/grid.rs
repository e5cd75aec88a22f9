//! Hyperparameter grid search over cluster count, fuzziness, and weight
//! exponent.
//!
//! Every cell runs the full fit, score, evaluate pipeline on its own
//! seed-derived substream, so cells are independent and the whole table is
//! reproducible from (input, config, seed). Cells run in parallel; the
//! report is assembled in a deterministic order regardless.

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::detector::score_series;
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::params::HyperParams;
use crate::pipeline::{fit_series, labeled_scores};
use crate::series::MultivariateSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub clusters: usize,
    pub fuzziness: f64,
    pub weight_exponent: f64,
    pub seed: u64,
    pub roc_auc: f64,
    pub pr_auc: f64,
    pub final_loss: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    /// Cells sorted best-first by roc_auc, then pr_auc, then parameters.
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn best(&self) -> &GridCell {
        &self.cells[0]
    }
}

fn run_cell(
    series: &MultivariateSeries,
    config: &RunConfig,
    params: &HyperParams,
    seed: u64,
) -> Result<GridCell> {
    let (model, state) = fit_series(series, config, params, seed)?;
    let scored = score_series(&model, series, config.aggregation)?;
    let (scores, labels) = labeled_scores(&scored)?;
    let eval = evaluate(&scores, &labels)?;
    Ok(GridCell {
        clusters: params.clusters,
        fuzziness: params.fuzziness,
        weight_exponent: params.weight_exponent,
        seed,
        roc_auc: eval.roc_auc,
        pr_auc: eval.pr_auc,
        final_loss: state.loss_history().last().copied().unwrap_or(f64::NAN),
        iterations: state.iterations(),
    })
}

pub fn run_grid(series: &MultivariateSeries, config: &RunConfig) -> Result<GridReport> {
    if series.labels().is_none() {
        return Err(Error::EmptyInput("grid search needs a labeled input"));
    }
    let mut cells: Vec<HyperParams> = Vec::new();
    for &clusters in &config.c_grid {
        for &fuzziness in &config.m_grid {
            for &weight_exponent in &config.q_grid {
                cells.push(HyperParams {
                    clusters,
                    fuzziness,
                    weight_exponent,
                    ..config.params()
                });
            }
        }
    }
    let mut results: Vec<GridCell> = cells
        .par_iter()
        .enumerate()
        .map(|(index, params)| {
            run_cell(
                series,
                config,
                params,
                config.seed.wrapping_add(index as u64),
            )
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| {
        b.roc_auc
            .total_cmp(&a.roc_auc)
            .then(b.pr_auc.total_cmp(&a.pr_auc))
            .then(a.clusters.cmp(&b.clusters))
            .then(a.fuzziness.total_cmp(&b.fuzziness))
            .then(a.weight_exponent.total_cmp(&b.weight_exponent))
    });
    Ok(GridReport { cells: results })
}
