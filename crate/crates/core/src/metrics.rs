//! Ranking metrics for scored, labeled observations.
//!
//! Both metrics care only about the ordering of scores. Ties are handled
//! the standard way: the ROC area gives tied positive/negative pairs half
//! credit (average-rank formulation), and the precision-recall area
//! processes tied scores as one block so a tie cannot be split into a
//! flattering order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Both areas, with the class counts they were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub roc_auc: f64,
    pub pr_auc: f64,
    pub positives: usize,
    pub negatives: usize,
}

fn validate(scores: &[f64], labels: &[u8]) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::LabelLengthMismatch {
            labels: labels.len(),
            series: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scored observations"));
    }
    for (row, &label) in labels.iter().enumerate() {
        if label > 1 {
            return Err(Error::InvalidLabel {
                row,
                value: label.to_string(),
            });
        }
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::UndefinedMetric);
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((positives as f64, negatives as f64))
}

fn sorted_order(scores: &[f64], ascending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = scores[a].partial_cmp(&scores[b]).expect("finite scores");
        if ascending {
            cmp
        } else {
            cmp.reverse()
        }
    });
    order
}

/// Area under the ROC curve: the probability that a random positive
/// outscores a random negative, with ties counting half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (positives, negatives) = validate(scores, labels)?;
    let order = sorted_order(scores, true);
    let n = order.len();
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their average
        let rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                positive_rank_sum += rank;
            }
        }
        i = j + 1;
    }
    Ok((positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives))
}

/// Area under the precision-recall curve, computed as average precision:
/// the recall-weighted sum of precision at each distinct score threshold.
pub fn pr_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (positives, _) = validate(scores, labels)?;
    let order = sorted_order(scores, false);
    let n = order.len();
    let mut true_pos = 0.0;
    let mut seen = 0.0;
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                true_pos += 1.0;
            }
            seen += 1.0;
        }
        let recall = true_pos / positives;
        let precision = true_pos / seen;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    Ok(area)
}

/// Compute both areas at once.
pub fn evaluate(scores: &[f64], labels: &[u8]) -> Result<EvalResult> {
    let (positives, negatives) = validate(scores, labels)?;
    Ok(EvalResult {
        roc_auc: roc_auc(scores, labels)?,
        pr_auc: pr_auc(scores, labels)?,
        positives: positives as usize,
        negatives: negatives as usize,
    })
}
