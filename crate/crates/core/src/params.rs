//! Hyperparameter configuration and validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clustering hyperparameters.
///
/// `fuzziness` (m) controls how soft the memberships are: values near 1 give
/// nearly hard assignments, larger values flatten them. The useful range is
/// (1, 2]. `weight_exponent` (q) shapes the learned dimension weights; it
/// must lie outside [0, 1], where the weighting degenerates (q=0 collapses to
/// plain Euclidean distance, q=1 keeps a single dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Cluster count c (at least 2).
    pub clusters: usize,
    /// Fuzzy coefficient m in (1, 2].
    pub fuzziness: f64,
    /// Dimension weight exponent q in (-inf, 0) or (1, +inf).
    pub weight_exponent: f64,
    /// Convergence tolerance for the fit loop (relative loss improvement).
    pub epsilon: f64,
    /// Iteration cap for the fit loop.
    pub max_iters: usize,
    /// Cluster center length b; `None` means "same as the window length".
    pub center_length: Option<usize>,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            clusters: 10,
            fuzziness: 1.7,
            weight_exponent: 2.0,
            epsilon: 1e-6,
            max_iters: 100,
            center_length: None,
        }
    }
}

impl HyperParams {
    /// Check every invariant and hand the parameters back unchanged.
    pub fn validated(self) -> Result<Self> {
        if self.clusters < 2 {
            return Err(Error::InvalidClusterCount(self.clusters));
        }
        if !(self.fuzziness > 1.0 && self.fuzziness <= 2.0) {
            return Err(Error::InvalidFuzzyCoefficient(self.fuzziness));
        }
        if !weight_exponent_valid(self.weight_exponent) {
            return Err(Error::InvalidWeightExponent(self.weight_exponent));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidMaxIters);
        }
        Ok(self)
    }

    /// Center length to use for windows of length `window_length`.
    pub fn center_length_for(&self, window_length: usize) -> usize {
        self.center_length.unwrap_or(window_length)
    }
}

/// q is valid outside [0, 1] (and must be finite).
pub fn weight_exponent_valid(q: f64) -> bool {
    q.is_finite() && (q < 0.0 || q > 1.0)
}
