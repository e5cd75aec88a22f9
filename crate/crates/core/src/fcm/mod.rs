//! Fuzzy C-means over windows with a jointly learned warped distance.
//!
//! The objective being minimized is the membership-weighted sum of warped
//! distances between cluster centers and windows. Four quantities alternate:
//! warping paths, soft memberships, per-dimension weights, and the centers
//! themselves. Each block update is the exact minimizer of the objective
//! with the other blocks held fixed, so the loss never increases.
//!
//! [`fit`] drives the loop; [`FitState`] exposes the individual updates so
//! callers can instrument or replay them step by step.

mod init;

pub use init::{init_dpc, init_random, InitStrategy, DPC_SAMPLE_CAP};

use ndarray::{Array2, Array3, ArrayView2};
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{weight_exponent_valid, HyperParams};
use crate::series::Normalizer;
use crate::wdtw::{cost_matrix, solve_owp, DimensionWeights, WarpingPath, SIMPLEX_TOL};
use crate::window::WindowSet;

/// Fuzzy cardinality below which a cluster is considered lost and its center
/// is reseeded.
const DEGENERATE_MASS: f64 = 1e-12;

/// Denominator floor for the relative-improvement convergence test.
const LOSS_FLOOR: f64 = 1e-30;

/// Floor applied to per-dimension loss totals before the weight update so a
/// perfectly explained dimension cannot divide by zero.
const DIM_LOSS_FLOOR: f64 = 1e-12;

/// Format tag written into every serialized model.
const MODEL_FORMAT: &str = "fcmwdtw.model/1";

/// One column of soft memberships from one column of distances.
///
/// Windows at distance exactly zero from some center split all mass evenly
/// among those centers; otherwise mass follows the inverse-distance power
/// rule. Working with ratios against the smallest distance keeps the
/// exponentiation in (0, 1] even for fuzziness close to 1.
pub(crate) fn membership_column(dists: &[f64], fuzziness: f64, out: &mut [f64]) {
    let zeros = dists.iter().filter(|&&d| d == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        for (o, &d) in out.iter_mut().zip(dists) {
            *o = if d == 0.0 { share } else { 0.0 };
        }
        return;
    }
    let t = 1.0 / (fuzziness - 1.0);
    let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (o, &d) in out.iter_mut().zip(dists) {
        let s = (dmin / d).powf(t);
        *o = s;
        sum += s;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Closed-form weight update: given the accumulated per-dimension loss
/// totals, return the simplex point minimizing the weighted objective.
pub(crate) fn weight_simplex(dim_losses: &[f64], exponent: f64) -> Vec<f64> {
    let e = 1.0 / (exponent - 1.0);
    let amin = dim_losses
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(DIM_LOSS_FLOOR);
    let raw: Vec<f64> = dim_losses
        .iter()
        .map(|&a| (amin / a.max(DIM_LOSS_FLOOR)).powf(e))
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|&b| b / sum).collect()
}

/// Working state of the alternating optimization.
///
/// Invariant between updates: `paths[i][j]` aligns center i with window j,
/// `dim_costs[(i, j, d)]` is the per-dimension squared-difference total along
/// that path, and `distances[(i, j)]` is the weighted combination of those
/// totals. The update methods keep this invariant current; callers composing
/// them manually should start with [`FitState::update_paths`] and follow the
/// memberships, weights, centers order to reproduce [`fit`].
#[derive(Debug, Clone)]
pub struct FitState {
    data: WindowSet,
    fuzziness: f64,
    centers: Vec<Array2<f64>>,
    weights: DimensionWeights,
    memberships: Array2<f64>,
    paths: Vec<Vec<WarpingPath>>,
    dim_costs: Array3<f64>,
    distances: Array2<f64>,
    loss_history: Vec<f64>,
    iterations: usize,
    reinits: usize,
}

impl FitState {
    fn new(
        data: WindowSet,
        centers: Vec<Array2<f64>>,
        weights: DimensionWeights,
        fuzziness: f64,
    ) -> Self {
        let c = centers.len();
        let n = data.len();
        let w = weights.len();
        Self {
            data,
            fuzziness,
            centers,
            weights,
            memberships: Array2::zeros((c, n)),
            paths: Vec::new(),
            dim_costs: Array3::zeros((c, n, w)),
            distances: Array2::zeros((c, n)),
            loss_history: Vec::new(),
            iterations: 0,
            reinits: 0,
        }
    }

    /// Assemble a state from explicit parts, for instrumentation and tests.
    /// Unlike [`fit`] this accepts any cluster count down to 1. Paths and
    /// distances are solved immediately so the state starts consistent.
    pub fn from_parts(
        data: WindowSet,
        centers: Vec<Array2<f64>>,
        lambdas: Vec<f64>,
        memberships: Array2<f64>,
        fuzziness: f64,
        weight_exponent: f64,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidClusterCount(0));
        }
        let w = data.dims();
        let b = centers[0].nrows();
        if b < 2 {
            return Err(Error::InvalidWindow(b));
        }
        for center in &centers {
            if center.nrows() != b || center.ncols() != w {
                return Err(Error::DimensionMismatch {
                    expected: w,
                    actual: center.ncols(),
                });
            }
        }
        if !(fuzziness > 1.0 && fuzziness <= 2.0) {
            return Err(Error::InvalidFuzzyCoefficient(fuzziness));
        }
        if !weight_exponent_valid(weight_exponent) {
            return Err(Error::InvalidWeightExponent(weight_exponent));
        }
        let (c, n) = (centers.len(), data.len());
        if memberships.dim() != (c, n) {
            return Err(Error::DimensionMismatch {
                expected: c * n,
                actual: memberships.len(),
            });
        }
        for j in 0..n {
            let col: f64 = (0..c).map(|i| memberships[[i, j]]).sum();
            if (col - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidWeights(format!(
                    "membership column {j} sums to {col}"
                )));
            }
        }
        let weights = DimensionWeights::new(lambdas, weight_exponent)?;
        let mut state = Self::new(data, centers, weights, fuzziness);
        state.memberships = memberships;
        state.update_paths();
        Ok(state)
    }

    pub fn data(&self) -> &WindowSet {
        &self.data
    }

    pub fn fuzziness(&self) -> f64 {
        self.fuzziness
    }

    pub fn centers(&self) -> &[Array2<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &DimensionWeights {
        &self.weights
    }

    pub fn memberships(&self) -> ArrayView2<'_, f64> {
        self.memberships.view()
    }

    pub fn distances(&self) -> ArrayView2<'_, f64> {
        self.distances.view()
    }

    pub fn paths(&self) -> &[Vec<WarpingPath>] {
        &self.paths
    }

    /// Loss after each iteration, with one trailing entry from the final
    /// consistency pass.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// How many degenerate clusters were reseeded during the fit.
    pub fn reinits(&self) -> usize {
        self.reinits
    }

    /// The quantity being minimized: membership-weighted total distance.
    pub fn objective(&self) -> f64 {
        let (c, n) = self.memberships.dim();
        let mut total = 0.0;
        for i in 0..c {
            for j in 0..n {
                let u = self.memberships[[i, j]];
                if u > 0.0 {
                    total += u.powf(self.fuzziness) * self.distances[[i, j]];
                }
            }
        }
        total
    }

    /// Re-solve the optimal warping path for every center/window pair and
    /// refresh the cached per-dimension costs and distances.
    pub fn update_paths(&mut self) {
        let (c, n) = self.memberships.dim();
        let w = self.weights.len();
        let centers = &self.centers;
        let weights = &self.weights;
        let data = &self.data;
        let solved: Vec<(WarpingPath, Vec<f64>)> = (0..c * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                solve_pair(centers[i].view(), data.windows()[j].values(), weights, w)
            })
            .collect();
        let mut solved = solved.into_iter();
        let mut paths = Vec::with_capacity(c);
        for i in 0..c {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let (path, costs) = solved.next().expect("one result per pair");
                for d in 0..w {
                    self.dim_costs[[i, j, d]] = costs[d];
                }
                row.push(path);
            }
            paths.push(row);
        }
        self.paths = paths;
        self.refresh_distances();
    }

    /// Closed-form membership update from the current distances.
    pub fn update_memberships(&mut self) {
        let (c, n) = self.memberships.dim();
        let mut dists = vec![0.0; c];
        let mut column = vec![0.0; c];
        for j in 0..n {
            for i in 0..c {
                dists[i] = self.distances[[i, j]];
            }
            membership_column(&dists, self.fuzziness, &mut column);
            for i in 0..c {
                self.memberships[[i, j]] = column[i];
            }
        }
    }

    /// Closed-form weight update from the per-dimension loss totals, then
    /// refresh the distances under the new weights (paths stay fixed).
    pub fn update_weights(&mut self) {
        let (c, n) = self.memberships.dim();
        let w = self.weights.len();
        let mut dim_losses = vec![0.0; w];
        for i in 0..c {
            for j in 0..n {
                let u = self.memberships[[i, j]];
                if u == 0.0 {
                    continue;
                }
                let um = u.powf(self.fuzziness);
                for d in 0..w {
                    dim_losses[d] += um * self.dim_costs[[i, j, d]];
                }
            }
        }
        let lambdas = weight_simplex(&dim_losses, self.weights.exponent());
        self.weights = DimensionWeights::new(lambdas, self.weights.exponent())
            .expect("update produces a valid simplex");
        self.refresh_distances();
    }

    /// Closed-form center update along the stored paths, then refresh the
    /// cached costs and distances under the new centers.
    ///
    /// Each center row becomes the membership-weighted mean of the window
    /// observations its path aligns to it, which does not depend on the
    /// dimension weights.
    pub fn update_centers(&mut self) {
        let (c, n) = self.memberships.dim();
        let w = self.weights.len();
        let b = self.centers[0].nrows();
        debug_assert!(!self.paths.is_empty(), "update_paths must run first");
        for i in 0..c {
            let mut num = Array2::<f64>::zeros((b, w));
            let mut den = vec![0.0; b];
            for j in 0..n {
                let u = self.memberships[[i, j]];
                if u == 0.0 {
                    continue;
                }
                let um = u.powf(self.fuzziness);
                let x = self.data.windows()[j].values();
                for &(r, s) in self.paths[i][j].pairs() {
                    den[r] += um;
                    for d in 0..w {
                        num[[r, d]] += um * x[[s, d]];
                    }
                }
            }
            for r in 0..b {
                if den[r] > 0.0 {
                    for d in 0..w {
                        self.centers[i][[r, d]] = num[[r, d]] / den[r];
                    }
                }
            }
        }
        self.recompute_dim_costs();
        self.refresh_distances();
    }

    /// Reseed clusters whose fuzzy cardinality has collapsed, moving each to
    /// the window farthest from every current center. Returns how many were
    /// reseeded; the caller should refresh memberships if any were.
    pub fn rescue_degenerate_clusters(&mut self) -> usize {
        let (c, n) = self.memberships.dim();
        let mut rescued = 0;
        for i in 0..c {
            let mass: f64 = (0..n)
                .map(|j| self.memberships[[i, j]].powf(self.fuzziness))
                .sum();
            if mass >= DEGENERATE_MASS {
                continue;
            }
            let mut best_j = 0;
            let mut best = f64::NEG_INFINITY;
            for j in 0..n {
                let nearest = (0..c)
                    .map(|s| self.distances[[s, j]])
                    .fold(f64::INFINITY, f64::min);
                if nearest > best {
                    best = nearest;
                    best_j = j;
                }
            }
            let b = self.centers[i].nrows();
            self.centers[i] = init::resample_rows(self.data.windows()[best_j].values(), b);
            self.refresh_row(i);
            rescued += 1;
        }
        self.reinits += rescued;
        rescued
    }

    /// Freeze the fitted state into a serializable model. The normalization
    /// slot starts empty; callers that normalized their data fill it in.
    pub fn to_model(&self) -> FcmModel {
        FcmModel {
            format: MODEL_FORMAT.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            clusters: self.centers.len(),
            fuzziness: self.fuzziness,
            weight_exponent: self.weights.exponent(),
            window_length: self.data.window_length(),
            center_length: self.centers[0].nrows(),
            dims: self.weights.len(),
            stride: self.data.stride(),
            lambdas: self.weights.lambdas().to_vec(),
            centers: self
                .centers
                .iter()
                .map(|v| v.rows().into_iter().map(|r| r.to_vec()).collect())
                .collect(),
            normalization: None,
            final_loss: self.objective(),
            iterations: self.iterations,
        }
    }

    fn refresh_distances(&mut self) {
        let (c, n) = self.memberships.dim();
        let powered = self.weights.powered().to_vec();
        for i in 0..c {
            for j in 0..n {
                let mut total = 0.0;
                for (d, &p) in powered.iter().enumerate() {
                    total += p * self.dim_costs[[i, j, d]];
                }
                self.distances[[i, j]] = total;
            }
        }
    }

    fn recompute_dim_costs(&mut self) {
        let (c, n) = self.memberships.dim();
        let w = self.weights.len();
        let mut costs = vec![0.0; w];
        for i in 0..c {
            for j in 0..n {
                path_dim_costs(
                    self.centers[i].view(),
                    self.data.windows()[j].values(),
                    &self.paths[i][j],
                    &mut costs,
                );
                for d in 0..w {
                    self.dim_costs[[i, j, d]] = costs[d];
                }
            }
        }
    }

    fn refresh_row(&mut self, i: usize) {
        let n = self.data.len();
        let w = self.weights.len();
        for j in 0..n {
            let (path, costs) = solve_pair(
                self.centers[i].view(),
                self.data.windows()[j].values(),
                &self.weights,
                w,
            );
            for d in 0..w {
                self.dim_costs[[i, j, d]] = costs[d];
            }
            let mut total = 0.0;
            for (d, &p) in self.weights.powered().iter().enumerate() {
                total += p * self.dim_costs[[i, j, d]];
            }
            self.distances[[i, j]] = total;
            self.paths[i][j] = path;
        }
    }
}

fn solve_pair(
    center: ArrayView2<'_, f64>,
    window: ArrayView2<'_, f64>,
    weights: &DimensionWeights,
    dims: usize,
) -> (WarpingPath, Vec<f64>) {
    let pcm = cost_matrix(center, window, weights).expect("shapes checked at construction");
    let (path, _) = solve_owp(pcm.view()).expect("cost matrix is never empty");
    let mut costs = vec![0.0; dims];
    path_dim_costs(center, window, &path, &mut costs);
    (path, costs)
}

fn path_dim_costs(
    center: ArrayView2<'_, f64>,
    window: ArrayView2<'_, f64>,
    path: &WarpingPath,
    out: &mut [f64],
) {
    out.fill(0.0);
    for &(r, s) in path.pairs() {
        for (d, o) in out.iter_mut().enumerate() {
            let diff = center[[r, d]] - window[[s, d]];
            *o += diff * diff;
        }
    }
}

/// Run the alternating optimization to convergence.
///
/// Convergence is declared when the relative loss improvement over one
/// iteration drops below `epsilon`, when the loss itself drops below
/// `epsilon`, or when `max_iters` is reached. The returned state has had a
/// final path and membership refresh so everything it exposes is consistent
/// with its centers and weights.
pub fn fit(
    data: &WindowSet,
    params: &HyperParams,
    init: InitStrategy,
    seed: u64,
) -> Result<FitState> {
    let params = params.clone().validated()?;
    let n = data.len();
    let c = params.clusters;
    if n < c {
        return Err(Error::InsufficientData {
            windows: n,
            clusters: c,
        });
    }
    let b = params.center_length_for(data.window_length());
    if b < 2 {
        return Err(Error::InvalidWindow(b));
    }
    let chosen = match init {
        InitStrategy::DensityPeaks => init_dpc(data, c, params.weight_exponent, seed)?,
        InitStrategy::Random => init_random(data, c, seed)?,
        InitStrategy::Indices(idx) => {
            if idx.len() != c {
                return Err(Error::Config(format!(
                    "{} initial indices for {} clusters",
                    idx.len(),
                    c
                )));
            }
            let mut seen = idx.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != c || seen.iter().any(|&j| j >= n) {
                return Err(Error::Config(
                    "initial indices must be distinct and within the window set".to_string(),
                ));
            }
            idx
        }
    };
    let centers: Vec<Array2<f64>> = chosen
        .iter()
        .map(|&j| init::resample_rows(data.windows()[j].values(), b))
        .collect();
    let weights = DimensionWeights::uniform(data.dims(), params.weight_exponent)?;
    let mut state = FitState::new(data.clone(), centers, weights, params.fuzziness);

    state.update_paths();
    for iter in 1..=params.max_iters {
        state.update_memberships();
        if state.rescue_degenerate_clusters() > 0 {
            state.update_memberships();
        }
        state.update_weights();
        state.update_centers();
        let loss = state.objective();
        let prev = state.loss_history.last().copied();
        state.loss_history.push(loss);
        state.iterations = iter;
        let converged = match prev {
            Some(p) => (p - loss) / p.max(LOSS_FLOOR) < params.epsilon || loss < params.epsilon,
            None => loss < params.epsilon,
        };
        if converged {
            break;
        }
        if iter < params.max_iters {
            state.update_paths();
        }
    }
    state.update_paths();
    state.update_memberships();
    state.loss_history.push(state.objective());
    Ok(state)
}

/// A fitted clustering model: everything needed to score new data.
///
/// Serializes to a single self-describing JSON document. Floating point
/// values survive the round trip bit for bit, so a reloaded model scores
/// identically to the one that was saved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmModel {
    pub format: String,
    pub library_version: String,
    pub clusters: usize,
    pub fuzziness: f64,
    pub weight_exponent: f64,
    pub window_length: usize,
    pub center_length: usize,
    pub dims: usize,
    pub stride: usize,
    pub lambdas: Vec<f64>,
    /// `centers[i][r][d]`: cluster i, row r, dimension d.
    pub centers: Vec<Vec<Vec<f64>>>,
    pub normalization: Option<Normalizer>,
    pub final_loss: f64,
    pub iterations: usize,
}

impl FcmModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.check_invariants()?;
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rebuild the weight object, including its precomputed powers.
    pub fn weights(&self) -> Result<DimensionWeights> {
        DimensionWeights::new(self.lambdas.clone(), self.weight_exponent)
    }

    /// Centers as dense arrays, in cluster order.
    pub fn center_arrays(&self) -> Vec<Array2<f64>> {
        self.centers
            .iter()
            .map(|rows| {
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Array2::from_shape_vec((self.center_length, self.dims), flat)
                    .expect("invariants guarantee rectangular centers")
            })
            .collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::ModelFormat(msg));
        if self.format != MODEL_FORMAT {
            return fail(format!(
                "unrecognized format tag {:?}, expected {MODEL_FORMAT:?}",
                self.format
            ));
        }
        if self.clusters == 0 || self.centers.len() != self.clusters {
            return fail(format!(
                "{} centers for {} clusters",
                self.centers.len(),
                self.clusters
            ));
        }
        if self.center_length < 2 || self.window_length < 2 || self.stride == 0 {
            return fail("degenerate window geometry".to_string());
        }
        if !(self.fuzziness > 1.0 && self.fuzziness <= 2.0) {
            return fail(format!("fuzziness {} out of range", self.fuzziness));
        }
        if !weight_exponent_valid(self.weight_exponent) {
            return fail(format!(
                "weight exponent {} out of range",
                self.weight_exponent
            ));
        }
        if self.lambdas.len() != self.dims || self.dims == 0 {
            return fail(format!(
                "{} weights for {} dimensions",
                self.lambdas.len(),
                self.dims
            ));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL
            || self.lambdas.iter().any(|&l| !(0.0..=1.0).contains(&l))
        {
            return fail(format!("weights are not a simplex point (sum {sum})"));
        }
        for (i, rows) in self.centers.iter().enumerate() {
            if rows.len() != self.center_length {
                return fail(format!("center {i} has {} rows", rows.len()));
            }
            for row in rows {
                if row.len() != self.dims {
                    return fail(format!("center {i} has a row of width {}", row.len()));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return fail(format!("center {i} contains a non-finite value"));
                }
            }
        }
        if let Some(norm) = &self.normalization {
            if norm.mins.len() != self.dims || norm.maxs.len() != self.dims {
                return fail("normalization width does not match dimensions".to_string());
            }
        }
        if !self.final_loss.is_finite() {
            return fail("non-finite final loss".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    use crate::wdtw::path_cost;
    use crate::window::Window;

    fn window_set(values: &[Vec<[f64; 2]>]) -> WindowSet {
        let windows = values
            .iter()
            .map(|rows| {
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Window::new(Array2::from_shape_vec((rows.len(), 2), flat).unwrap(), 0).unwrap()
            })
            .collect();
        WindowSet::from_windows(windows, 1, values[0].len()).unwrap()
    }

    /// Two groups of near-constant windows at well-separated levels, with a
    /// deterministic wobble so nothing coincides exactly.
    fn two_group_data(per_group: usize) -> WindowSet {
        let mut values = Vec::new();
        for g in 0..2 {
            let level = g as f64 * 5.0;
            for k in 0..per_group {
                let wobble = 0.01 * (k as f64 + 1.0);
                let rows: Vec<[f64; 2]> = (0..4)
                    .map(|r| {
                        let v = level + wobble * (1.0 + 0.1 * r as f64);
                        [v, v]
                    })
                    .collect();
                values.push(rows);
            }
        }
        window_set(&values)
    }

    fn entropy(u: &[f64]) -> f64 {
        -u.iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    #[test]
    fn membership_column_examples() {
        let mut out = vec![0.0; 2];
        membership_column(&[1.0, 4.0], 2.0, &mut out);
        assert_abs_diff_eq!(out[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.2, epsilon = 1e-15);

        membership_column(&[0.0, 5.0], 2.0, &mut out);
        assert_eq!(out, vec![1.0, 0.0]);

        let mut out3 = vec![0.0; 3];
        membership_column(&[0.0, 0.0, 3.0], 1.5, &mut out3);
        assert_eq!(out3, vec![0.5, 0.5, 0.0]);

        membership_column(&[2.0, 3.0, 11.0], 1.3, &mut out3);
        assert_abs_diff_eq!(out3.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(out3[0] > out3[1] && out3[1] > out3[2]);
    }

    #[test]
    fn memberships_sharpen_as_fuzziness_drops() {
        let dists = [1.0, 2.0, 3.0];
        let mut sharp = vec![0.0; 3];
        let mut mid = vec![0.0; 3];
        let mut soft = vec![0.0; 3];
        membership_column(&dists, 1.1, &mut sharp);
        membership_column(&dists, 1.5, &mut mid);
        membership_column(&dists, 2.0, &mut soft);
        assert!(entropy(&sharp) < entropy(&mid));
        assert!(entropy(&mid) < entropy(&soft));
        assert!(sharp[0] > mid[0] && mid[0] > soft[0]);
    }

    #[test]
    fn membership_column_survives_tiny_fuzziness_margin() {
        let mut out = vec![0.0; 3];
        membership_column(&[1.0, 1.0001, 50.0], 1.000_001, &mut out);
        assert_abs_diff_eq!(out.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(out.iter().all(|&u| u.is_finite()));
        assert!(out[0] > 0.999);
    }

    #[test]
    fn weight_simplex_examples() {
        // totals (1, 8) with cubic exponent
        let l = weight_simplex(&[1.0, 8.0], 3.0);
        assert_abs_diff_eq!(l[0], 1.0 / (1.0 + (1.0f64 / 8.0).sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(l[1], 1.0 - l[0], epsilon = 1e-14);

        // negative exponent: minimizing sum of a_d / lambda_d
        let l = weight_simplex(&[1.0, 4.0], -1.0);
        assert_abs_diff_eq!(l[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l[1], 2.0 / 3.0, epsilon = 1e-14);

        // equal totals give equal weights
        let l = weight_simplex(&[5.0, 5.0, 5.0], 4.0);
        for &v in &l {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        }

        // wildly unbalanced totals stay on the simplex
        let l = weight_simplex(&[1e-300, 1.0], 3.0);
        assert!(l.iter().all(|&v| v.is_finite() && (0.0..=1.0).contains(&v)));
        assert_abs_diff_eq!(l.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(l[0] > l[1]);
    }

    #[test]
    fn weight_update_is_the_block_minimizer_on_a_grid() {
        // check against a dense scan over the 2-simplex
        let losses = [2.0, 5.0];
        for q in [3.0, 5.0, -1.0, -4.0] {
            let l = weight_simplex(&losses, q);
            let j_closed: f64 = l
                .iter()
                .zip(&losses)
                .map(|(&lam, &a)| lam.powf(q) * a)
                .sum();
            for k in 1..1000 {
                let x = k as f64 / 1000.0;
                let j: f64 = x.powf(q) * losses[0] + (1.0 - x).powf(q) * losses[1];
                assert!(
                    j_closed <= j + 1e-9,
                    "q={q} x={x} closed={j_closed} grid={j}"
                );
            }
        }
    }

    #[test]
    fn center_update_follows_the_warping_path() {
        // the optimal path aligns center row 0 with the first two window
        // observations, so row 0 moves to their mean
        let data = window_set(&[vec![[1.0, 1.0], [3.0, 3.0], [10.0, 10.0]]]);
        let centers = vec![arr2(&[[0.0, 0.0], [10.0, 10.0]])];
        let memberships = Array2::from_elem((1, 1), 1.0);
        let mut state =
            FitState::from_parts(data, centers, vec![0.5, 0.5], memberships, 1.7, 2.0).unwrap();
        assert_eq!(state.paths()[0][0].pairs(), &[(0, 0), (0, 1), (1, 2)]);
        let before = state.objective();
        state.update_centers();
        assert_eq!(state.centers()[0], arr2(&[[2.0, 2.0], [10.0, 10.0]]));
        assert!(state.objective() < before);
        // 0.5^2 * ((2-1)^2 + (2-3)^2) per dimension, both dimensions equal
        assert_abs_diff_eq!(state.distances()[[0, 0]], 2.0 * 0.25 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_center_hits_absorb_membership() {
        let data = window_set(&[vec![[0.0, 0.0], [1.0, 1.0]], vec![[5.0, 5.0], [6.0, 6.0]]]);
        let centers = vec![
            data.windows()[0].values().to_owned(),
            data.windows()[1].values().to_owned(),
        ];
        let memberships = Array2::from_elem((2, 2), 0.5);
        let mut state =
            FitState::from_parts(data, centers, vec![0.5, 0.5], memberships, 2.0, 2.0).unwrap();
        state.update_memberships();
        assert_eq!(state.memberships()[[0, 0]], 1.0);
        assert_eq!(state.memberships()[[1, 0]], 0.0);
        assert_eq!(state.memberships()[[0, 1]], 0.0);
        assert_eq!(state.memberships()[[1, 1]], 1.0);
    }

    #[test]
    fn coincident_centers_split_membership_evenly() {
        let data = window_set(&[vec![[0.0, 0.0], [1.0, 1.0]], vec![[9.0, 9.0], [9.5, 9.5]]]);
        let same = data.windows()[0].values().to_owned();
        let centers = vec![same.clone(), same];
        let memberships = Array2::from_elem((2, 2), 0.5);
        let mut state =
            FitState::from_parts(data, centers, vec![0.5, 0.5], memberships, 1.5, 3.0).unwrap();
        state.update_memberships();
        assert_eq!(state.memberships()[[0, 0]], 0.5);
        assert_eq!(state.memberships()[[1, 0]], 0.5);
    }

    #[test]
    fn degenerate_cluster_is_reseeded() {
        let data = two_group_data(4);
        let far = arr2(&[[100.0, 100.0]; 4]);
        let centers = vec![data.windows()[0].values().to_owned(), far];
        let mut memberships = Array2::zeros((2, 8));
        for j in 0..8 {
            memberships[[0, j]] = 1.0;
        }
        let mut state =
            FitState::from_parts(data, centers, vec![0.5, 0.5], memberships, 1.7, 2.0).unwrap();
        assert_eq!(state.rescue_degenerate_clusters(), 1);
        assert_eq!(state.reinits(), 1);
        // the reseeded center sits on an actual window now
        assert!(state.centers()[1][[0, 0]] < 10.0);
        state.update_memberships();
        let mass: f64 = (0..8).map(|j| state.memberships()[[1, j]]).sum();
        assert!(mass > 0.5);
    }

    #[test]
    fn fit_separates_two_groups() {
        let data = two_group_data(5);
        let params = HyperParams {
            clusters: 2,
            fuzziness: 1.7,
            weight_exponent: 3.0,
            ..HyperParams::default()
        };
        let state = fit(&data, &params, InitStrategy::DensityPeaks, 11).unwrap();
        let u = state.memberships();
        // group labels by argmax membership
        let owner = |j: usize| if u[[0, j]] > u[[1, j]] { 0 } else { 1 };
        let first = owner(0);
        for j in 0..5 {
            assert_eq!(owner(j), first, "window {j}");
            assert!(u[[first, j]] > 0.99);
        }
        for j in 5..10 {
            assert_eq!(owner(j), 1 - first, "window {j}");
            assert!(u[[1 - first, j]] > 0.99);
        }
        // both dimensions carry identical data, so neither is favored
        assert_abs_diff_eq!(state.weights().lambdas()[0], 0.5, epsilon = 1e-12);
        assert!(state.loss_history().last().unwrap() < &1e-2);
    }

    #[test]
    fn loss_never_increases() {
        // deterministic wiggly data that does not cluster cleanly
        let mut values = Vec::new();
        for k in 0..24 {
            let rows: Vec<[f64; 2]> = (0..6)
                .map(|r| {
                    let t = (k * 6 + r) as f64;
                    [(t * 0.7).sin() + 0.05 * k as f64, (t * 0.3).cos()]
                })
                .collect();
            values.push(rows);
        }
        let data = window_set(&values);
        let params = HyperParams {
            clusters: 3,
            fuzziness: 1.5,
            weight_exponent: 3.0,
            epsilon: 1e-12,
            max_iters: 25,
            ..HyperParams::default()
        };
        let state = fit(&data, &params, InitStrategy::DensityPeaks, 3).unwrap();
        let history = state.loss_history();
        assert!(history.len() >= 2);
        for pair in history.windows(2) {
            assert!(
                pair[1] <= pair[0] * (1.0 + 1e-9) + 1e-15,
                "loss rose from {} to {}",
                pair[0],
                pair[1]
            );
        }
        // the recorded objective matches an independent recomputation along
        // the stored paths
        let mut recomputed = 0.0;
        for i in 0..3 {
            for j in 0..data.len() {
                let u = state.memberships()[[i, j]];
                recomputed += u.powf(1.5)
                    * path_cost(
                        state.centers()[i].view(),
                        data.windows()[j].values(),
                        &state.paths()[i][j],
                        state.weights(),
                    );
            }
        }
        assert_abs_diff_eq!(recomputed, state.objective(), epsilon = 1e-9);
    }

    #[test]
    fn duplicated_data_doubles_the_loss() {
        let data = two_group_data(4);
        let doubled = {
            let mut windows: Vec<Window> = data.windows().to_vec();
            windows.extend_from_slice(data.windows());
            WindowSet::from_windows(windows, data.stride(), data.source_length()).unwrap()
        };
        let params = HyperParams {
            clusters: 2,
            fuzziness: 1.6,
            weight_exponent: 3.0,
            epsilon: 1e-15,
            max_iters: 5,
            ..HyperParams::default()
        };
        let base = fit(&data, &params, InitStrategy::Indices(vec![0, 4]), 0).unwrap();
        let twice = fit(&doubled, &params, InitStrategy::Indices(vec![0, 4]), 0).unwrap();
        assert_eq!(base.loss_history().len(), twice.loss_history().len());
        for (a, b) in base.loss_history().iter().zip(twice.loss_history()) {
            if *a > 1e-12 {
                assert_abs_diff_eq!(b / a, 2.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn window_order_does_not_change_the_fit() {
        let data = two_group_data(4);
        let reversed = {
            let mut windows: Vec<Window> = data.windows().to_vec();
            windows.reverse();
            WindowSet::from_windows(windows, data.stride(), data.source_length()).unwrap()
        };
        let n = data.len();
        let params = HyperParams {
            clusters: 2,
            fuzziness: 1.6,
            weight_exponent: 3.0,
            epsilon: 1e-15,
            max_iters: 3,
            ..HyperParams::default()
        };
        let a = fit(&data, &params, InitStrategy::Indices(vec![0, 4]), 0).unwrap();
        let b = fit(
            &reversed,
            &params,
            InitStrategy::Indices(vec![n - 1, n - 5]),
            0,
        )
        .unwrap();
        for (x, y) in a.loss_history().iter().zip(b.loss_history()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9 * x.abs().max(1.0));
        }
        for j in 0..n {
            assert_abs_diff_eq!(
                a.memberships()[[0, j]],
                b.memberships()[[0, n - 1 - j]],
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn fit_validates_inputs() {
        let data = two_group_data(2);
        let params = HyperParams {
            clusters: 5,
            ..HyperParams::default()
        };
        assert!(matches!(
            fit(&data, &params, InitStrategy::DensityPeaks, 0),
            Err(Error::InsufficientData { .. })
        ));

        let params = HyperParams {
            clusters: 2,
            ..HyperParams::default()
        };
        for bad in [vec![0usize], vec![0, 0], vec![0, 99]] {
            assert!(matches!(
                fit(&data, &params, InitStrategy::Indices(bad), 0),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn shorter_center_length_works() {
        let mut values = Vec::new();
        for k in 0..12 {
            let rows: Vec<[f64; 2]> = (0..8)
                .map(|r| {
                    let t = (k + r) as f64;
                    [t.sin(), (t * 0.5).cos() + k as f64 * 0.02]
                })
                .collect();
            values.push(rows);
        }
        let data = window_set(&values);
        let params = HyperParams {
            clusters: 2,
            center_length: Some(5),
            epsilon: 1e-10,
            max_iters: 10,
            ..HyperParams::default()
        };
        let state = fit(&data, &params, InitStrategy::DensityPeaks, 5).unwrap();
        assert_eq!(state.centers()[0].nrows(), 5);
        for pair in state.loss_history().windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9) + 1e-15);
        }
        let model = state.to_model();
        assert_eq!(model.center_length, 5);
        assert_eq!(model.window_length, 8);
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let data = two_group_data(4);
        let params = HyperParams {
            clusters: 2,
            fuzziness: 1.7,
            weight_exponent: 3.0,
            ..HyperParams::default()
        };
        let state = fit(&data, &params, InitStrategy::DensityPeaks, 2).unwrap();
        let mut model = state.to_model();
        model.normalization = Some(Normalizer {
            mins: vec![0.0, -1.5],
            maxs: vec![5.3, 2.7],
        });
        model.check_invariants().unwrap();
        assert_eq!(model.final_loss, state.objective());
        assert_eq!(model.iterations, state.iterations());

        let text = model.to_json().unwrap();
        let back = FcmModel::from_json(&text).unwrap();
        assert_eq!(back, model);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded = FcmModel::load(&path).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.center_arrays()[0], state.centers()[0]);
    }

    #[test]
    fn model_load_rejects_garbage() {
        assert!(matches!(
            FcmModel::from_json("{\"format\": \"other\"}"),
            Err(Error::Json(_))
        ));

        let data = two_group_data(3);
        let params = HyperParams {
            clusters: 2,
            ..HyperParams::default()
        };
        let state = fit(&data, &params, InitStrategy::DensityPeaks, 1).unwrap();
        let mut model = state.to_model();
        model.format = "something.else/9".to_string();
        let text = serde_json::to_string(&model).unwrap();
        assert!(matches!(
            FcmModel::from_json(&text),
            Err(Error::ModelFormat(_))
        ));

        let mut broken = state.to_model();
        broken.lambdas = vec![0.9, 0.9];
        let text = serde_json::to_string(&broken).unwrap();
        assert!(matches!(
            FcmModel::from_json(&text),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let data = two_group_data(5);
        let params = HyperParams {
            clusters: 2,
            fuzziness: 1.7,
            weight_exponent: 3.0,
            epsilon: 1e-12,
            max_iters: 200,
            ..HyperParams::default()
        };
        let mut state = fit(&data, &params, InitStrategy::DensityPeaks, 4).unwrap();
        let before = state.objective();
        let paths_before = state.paths().to_vec();
        state.update_paths();
        assert_eq!(state.paths(), &paths_before[..]);
        state.update_memberships();
        state.update_weights();
        state.update_centers();
        let after = state.objective();
        assert!(after <= before * (1.0 + 1e-9));
        assert!((before - after) / before.max(1e-30) < 1e-6);
    }

    #[test]
    fn objective_matches_a_hand_computed_value() {
        // powered weights are 0.5^-1 = 2 per dimension, so the flat window at
        // zero sits at distance 4 from the first center and 8 from the second;
        // with equal memberships and m = 2 the objective is 0.25*4 + 0.25*8
        let data = window_set(&[vec![[0.0, 0.0], [0.0, 0.0]]]);
        let centers = vec![
            arr2(&[[1.0, 0.0], [1.0, 0.0]]),
            arr2(&[[1.0, 1.0], [1.0, 1.0]]),
        ];
        let memberships = arr2(&[[0.5], [0.5]]);
        let state =
            FitState::from_parts(data, centers, vec![0.5, 0.5], memberships, 2.0, -1.0).unwrap();
        assert_eq!(state.distances()[[0, 0]], 4.0);
        assert_eq!(state.distances()[[1, 0]], 8.0);
        assert_eq!(state.objective(), 3.0);
    }

    #[test]
    fn center_update_ignores_the_dimension_weights() {
        let values = vec![vec![[1.0, 1.0], [9.0, 9.0]], vec![[0.5, 1.5], [8.5, 9.5]]];
        let centers = || vec![arr2(&[[0.0, 0.0], [10.0, 10.0]])];
        let memberships = arr2(&[[1.0, 1.0]]);
        let mut lopsided = FitState::from_parts(
            window_set(&values),
            centers(),
            vec![0.3, 0.7],
            memberships.clone(),
            2.0,
            3.0,
        )
        .unwrap();
        let mut mirrored = FitState::from_parts(
            window_set(&values),
            centers(),
            vec![0.7, 0.3],
            memberships,
            2.0,
            3.0,
        )
        .unwrap();
        assert_eq!(lopsided.paths(), mirrored.paths());
        lopsided.update_centers();
        mirrored.update_centers();
        assert_eq!(lopsided.centers(), mirrored.centers());
        assert_eq!(lopsided.centers()[0], arr2(&[[0.75, 1.25], [8.75, 9.25]]));
    }
}
