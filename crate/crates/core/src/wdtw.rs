//! Weighted dynamic time warping.
//!
//! The pointwise measure is a weighted squared Euclidean distance with one
//! weight per dimension raised to a shared exponent. The distance between two
//! samples is the minimal accumulated pointwise cost over all monotone
//! warping paths, found by dynamic programming over the pointwise cost
//! matrix. No square root is ever taken: the distance is the accumulated
//! squared quantity itself.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Weights are clamped at this floor before exponentiation so that negative
/// exponents cannot divide by zero. The closed-form updates drive weights to
/// zero only in the limit, so the clamp is inert in practice.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Tolerance on the sum-to-one constraints.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Per-dimension weights on the simplex together with their exponent q.
/// The effective factor applied to each squared difference is `lambda_d^q`,
/// precomputed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionWeights {
    lambdas: Vec<f64>,
    exponent: f64,
    powered: Vec<f64>,
}

impl DimensionWeights {
    pub fn new(lambdas: Vec<f64>, exponent: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidWeights("no dimensions".to_string()));
        }
        for &l in &lambdas {
            if !(0.0..=1.0).contains(&l) || !l.is_finite() {
                return Err(Error::InvalidWeights(format!("weight {l} outside [0, 1]")));
            }
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let powered = lambdas
            .iter()
            .map(|&l| l.max(LAMBDA_FLOOR).powf(exponent))
            .collect();
        Ok(Self {
            lambdas,
            exponent,
            powered,
        })
    }

    /// Equal weights 1/w on every dimension.
    pub fn uniform(dims: usize, exponent: f64) -> Result<Self> {
        Self::new(vec![1.0 / dims as f64; dims], exponent)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// The effective per-dimension factors `lambda_d^q`.
    pub fn powered(&self) -> &[f64] {
        &self.powered
    }
}

/// A monotone alignment between two samples: 0-based index pairs from (0, 0)
/// to (m-1, n-1) with steps in {(1,0), (0,1), (1,1)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath {
    pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Check every path invariant against the aligned sample lengths.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidWeights(msg));
        if self.pairs.is_empty() {
            return fail("empty warping path".into());
        }
        if self.pairs[0] != (0, 0) {
            return fail(format!("path starts at {:?}, not (0, 0)", self.pairs[0]));
        }
        if *self.pairs.last().unwrap() != (rows - 1, cols - 1) {
            return fail(format!(
                "path ends at {:?}, not ({}, {})",
                self.pairs.last().unwrap(),
                rows - 1,
                cols - 1
            ));
        }
        for k in 1..self.pairs.len() {
            let (pi, pj) = self.pairs[k - 1];
            let (i, j) = self.pairs[k];
            let step = (i.wrapping_sub(pi), j.wrapping_sub(pj));
            if !matches!(step, (1, 0) | (0, 1) | (1, 1)) {
                return fail(format!("inadmissible step {:?} -> {:?}", (pi, pj), (i, j)));
            }
        }
        Ok(())
    }
}

/// Weighted squared Euclidean distance between two observation vectors.
pub fn weighted_euclidean(
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
    weights: &DimensionWeights,
) -> Result<f64> {
    if x.len() != y.len() || x.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: if x.len() != weights.len() {
                x.len()
            } else {
                y.len()
            },
        });
    }
    Ok(wed_unchecked(x, y, weights.powered()))
}

#[inline]
fn wed_unchecked(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, powered: &[f64]) -> f64 {
    let mut acc = 0.0;
    for d in 0..powered.len() {
        let diff = x[d] - y[d];
        acc += powered[d] * diff * diff;
    }
    acc
}

/// Pointwise cost matrix: entry (i, j) is the weighted squared Euclidean
/// distance between row i of `x` and row j of `y`.
pub fn cost_matrix(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    weights: &DimensionWeights,
) -> Result<Array2<f64>> {
    if x.ncols() != y.ncols() || x.ncols() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: if x.ncols() != weights.len() {
                x.ncols()
            } else {
                y.ncols()
            },
        });
    }
    let (m, n) = (x.nrows(), y.nrows());
    let powered = weights.powered();
    let mut pcm = Array2::zeros((m, n));
    for i in 0..m {
        let xi = x.row(i);
        for j in 0..n {
            pcm[[i, j]] = wed_unchecked(xi, y.row(j), powered);
        }
    }
    Ok(pcm)
}

/// Solve for the optimal warping path over a pointwise cost matrix by
/// dynamic programming, returning the path and its total cost.
///
/// Tie-breaking in backtracking is deterministic: when several predecessors
/// attain the minimum, the diagonal step wins, then (0,1), then (1,0). Ties
/// never change the distance, only the reported path.
pub fn solve_owp(pcm: ArrayView2<'_, f64>) -> Result<(WarpingPath, f64)> {
    solve_owp_impl(pcm, None)
}

/// Banded variant of [`solve_owp`]: cells farther than `band` from the
/// (scaled) diagonal are never visited. The band is widened to the length
/// difference so a path always exists. Purely a speed knob; the unbanded
/// solver is the reference behavior.
pub fn solve_owp_banded(pcm: ArrayView2<'_, f64>, band: usize) -> Result<(WarpingPath, f64)> {
    solve_owp_impl(pcm, Some(band))
}

fn solve_owp_impl(pcm: ArrayView2<'_, f64>, band: Option<usize>) -> Result<(WarpingPath, f64)> {
    let (m, n) = pcm.dim();
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("empty cost matrix"));
    }
    let radius = band.map(|r| {
        // keep the corner cells reachable whatever the aspect ratio
        r.max(m.abs_diff(n))
    });
    let within = |i: usize, j: usize| -> bool {
        match radius {
            None => true,
            Some(r) => {
                let diag = if m == 1 {
                    j as f64
                } else {
                    i as f64 * (n as f64 - 1.0) / (m as f64 - 1.0)
                };
                (j as f64 - diag).abs() <= r as f64
            }
        }
    };

    // cum[i][j] = minimal accumulated cost of a path ending at (i, j)
    let mut cum = Array2::from_elem((m, n), f64::INFINITY);
    for i in 0..m {
        for j in 0..n {
            if !within(i, j) {
                continue;
            }
            let best_prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cum[[0, j - 1]],
                (_, 0) => cum[[i - 1, 0]],
                _ => cum[[i - 1, j - 1]]
                    .min(cum[[i, j - 1]])
                    .min(cum[[i - 1, j]]),
            };
            cum[[i, j]] = pcm[[i, j]] + best_prev;
        }
    }
    let total = cum[[m - 1, n - 1]];

    let mut pairs = Vec::with_capacity(m + n);
    let (mut i, mut j) = (m - 1, n - 1);
    pairs.push((i, j));
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = cum[[i - 1, j - 1]];
            let left = cum[[i, j - 1]];
            let up = cum[[i - 1, j]];
            if diag <= left && diag <= up {
                (i - 1, j - 1)
            } else if left <= up {
                (i, j - 1)
            } else {
                (i - 1, j)
            }
        };
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok((WarpingPath { pairs }, total))
}

/// Weighted DTW distance between two samples, together with the optimal
/// warping path that attains it.
pub fn wdtw_distance(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    weights: &DimensionWeights,
) -> Result<(f64, WarpingPath)> {
    let pcm = cost_matrix(x, y, weights)?;
    let (path, cost) = solve_owp(pcm.view())?;
    Ok((cost, path))
}

/// Accumulated cost of a fixed path under possibly different data or weights
/// than the ones it was solved with.
pub fn path_cost(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    path: &WarpingPath,
    weights: &DimensionWeights,
) -> f64 {
    let powered = weights.powered();
    path.pairs()
        .iter()
        .map(|&(i, j)| wed_unchecked(x.row(i), y.row(j), powered))
        .sum()
}
