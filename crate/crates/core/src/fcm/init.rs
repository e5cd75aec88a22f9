//! Center initialization for the clustering loop.
//!
//! The default strategy follows the density-peaks idea: centers are samples
//! that combine high local density with a large distance to any denser
//! sample. Distances here are plain window-to-window warped distances under
//! equal dimension weights, since no weights have been learned yet.

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::wdtw::{wdtw_distance, DimensionWeights};
use crate::window::WindowSet;

/// Density-peaks initialization works on at most this many windows; larger
/// data is subsampled (seeded) before the quadratic pairwise pass.
pub const DPC_SAMPLE_CAP: usize = 512;

/// How initial cluster centers are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitStrategy {
    /// Density peaks over pairwise warped distances (the default).
    DensityPeaks,
    /// Distinct windows drawn uniformly at random.
    Random,
    /// Caller-supplied window indices, one per cluster.
    Indices(Vec<usize>),
}

/// Pick `clusters` window indices by the density-peaks rule.
///
/// Every choice in here is deterministic for a given seed: subsampling uses
/// a seeded generator, and all orderings break ties by ascending index.
pub fn init_dpc(
    data: &WindowSet,
    clusters: usize,
    weight_exponent: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = data.len();
    if n < clusters {
        return Err(Error::InsufficientData {
            windows: n,
            clusters,
        });
    }

    let pool: Vec<usize> = if n > DPC_SAMPLE_CAP {
        let take = DPC_SAMPLE_CAP.max(clusters);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, n, take).into_vec();
        picked.sort_unstable();
        picked
    } else {
        (0..n).collect()
    };
    let s = pool.len();

    let weights = DimensionWeights::uniform(data.dims(), weight_exponent)?;
    let dist = pairwise_distances(data, &pool, &weights);

    // cutoff distance: the 2nd percentile of pairwise distances (nearest rank)
    let mut flat: Vec<f64> = Vec::with_capacity(s * (s - 1) / 2);
    for i in 0..s {
        for j in (i + 1)..s {
            flat.push(dist[[i, j]]);
        }
    }
    flat.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((flat.len() as f64 * 0.02).ceil() as usize).max(1);
    let mut cutoff = flat[rank - 1];
    if cutoff <= 0.0 {
        cutoff = flat.iter().copied().find(|&d| d > 0.0).unwrap_or(1.0);
    }

    // local density under a Gaussian kernel
    let density: Vec<f64> = (0..s)
        .map(|i| {
            (0..s)
                .filter(|&j| j != i)
                .map(|j| {
                    let r = dist[[i, j]] / cutoff;
                    (-r * r).exp()
                })
                .sum()
        })
        .collect();

    // separation: distance to the nearest denser sample; the densest sample
    // gets its farthest distance instead
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| density[b].partial_cmp(&density[a]).unwrap().then(a.cmp(&b)));
    let mut separation = vec![0.0; s];
    for (pos, &i) in order.iter().enumerate() {
        separation[i] = if pos == 0 {
            (0..s)
                .filter(|&j| j != i)
                .map(|j| dist[[i, j]])
                .fold(0.0, f64::max)
        } else {
            order[..pos]
                .iter()
                .map(|&j| dist[[i, j]])
                .fold(f64::INFINITY, f64::min)
        };
    }

    // rank by the product of density and separation
    let mut by_score: Vec<usize> = (0..s).collect();
    by_score.sort_by(|&a, &b| {
        let ga = density[a] * separation[a];
        let gb = density[b] * separation[b];
        gb.partial_cmp(&ga).unwrap().then(a.cmp(&b))
    });
    Ok(by_score[..clusters].iter().map(|&i| pool[i]).collect())
}

/// Pick `clusters` distinct window indices uniformly at random.
pub fn init_random(data: &WindowSet, clusters: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.len();
    if n < clusters {
        return Err(Error::InsufficientData {
            windows: n,
            clusters,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, clusters).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

fn pairwise_distances(data: &WindowSet, pool: &[usize], weights: &DimensionWeights) -> Array2<f64> {
    let s = pool.len();
    let pairs: Vec<(usize, usize)> = (0..s)
        .flat_map(|i| ((i + 1)..s).map(move |j| (i, j)))
        .collect();
    let costs: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let x = data.windows()[pool[i]].values();
            let y = data.windows()[pool[j]].values();
            wdtw_distance(x, y, weights).expect("windows share shape").0
        })
        .collect();
    let mut dist = Array2::zeros((s, s));
    for (&(i, j), &d) in pairs.iter().zip(&costs) {
        dist[[i, j]] = d;
        dist[[j, i]] = d;
    }
    dist
}

/// Linearly resample the rows of `x` onto `target` evenly spaced positions,
/// keeping both endpoints. Used when the center length differs from the
/// window length.
pub(crate) fn resample_rows(x: ArrayView2<'_, f64>, target: usize) -> Array2<f64> {
    let a = x.nrows();
    if target == a {
        return x.to_owned();
    }
    let mut out = Array2::zeros((target, x.ncols()));
    for r in 0..target {
        let pos = r as f64 * (a - 1) as f64 / (target - 1) as f64;
        let lo = (pos.floor() as usize).min(a - 1);
        let hi = (lo + 1).min(a - 1);
        let frac = pos - lo as f64;
        for d in 0..x.ncols() {
            out[[r, d]] = (1.0 - frac) * x[[lo, d]] + frac * x[[hi, d]];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    use crate::series::MultivariateSeries;
    use crate::window::{make_windows, Window};

    fn flat_window_set(levels: &[f64]) -> WindowSet {
        let windows = levels
            .iter()
            .map(|&v| Window::new(arr2(&[[v], [v]]), 0).unwrap())
            .collect();
        WindowSet::from_windows(windows, 1, 2).unwrap()
    }

    #[test]
    fn dpc_picks_one_center_per_clump() {
        let ws = flat_window_set(&[0.0, 0.1, 5.0, 5.1, 10.0, 10.1]);
        let picked = init_dpc(&ws, 3, 2.0, 7).unwrap();
        assert_eq!(picked.len(), 3);
        let clump = |i: usize| i / 2;
        let mut clumps: Vec<usize> = picked.iter().map(|&i| clump(i)).collect();
        clumps.sort_unstable();
        assert_eq!(clumps, vec![0, 1, 2]);
    }

    #[test]
    fn dpc_is_deterministic() {
        let ws = flat_window_set(&[0.0, 0.1, 5.0, 5.1, 10.0, 10.1, 0.05, 5.05]);
        assert_eq!(
            init_dpc(&ws, 3, 2.0, 1).unwrap(),
            init_dpc(&ws, 3, 2.0, 1).unwrap()
        );
    }

    #[test]
    fn dpc_subsamples_large_inputs_deterministically() {
        let n = DPC_SAMPLE_CAP + 200;
        let values: Vec<f64> = (0..n + 1).map(|i| (i % 97) as f64 * 0.13).collect();
        let series = MultivariateSeries::new(
            Array2::from_shape_vec((n + 1, 1), values).unwrap(),
            None,
            None,
        )
        .unwrap();
        let ws = make_windows(&series, 2, 1).unwrap();
        assert!(ws.len() > DPC_SAMPLE_CAP);
        let a = init_dpc(&ws, 4, 2.0, 9).unwrap();
        let b = init_dpc(&ws, 4, 2.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        let mut dedup = a.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), 4);
        assert!(a.iter().all(|&i| i < ws.len()));
    }

    #[test]
    fn dpc_with_as_many_clusters_as_windows_selects_everything() {
        let ws = flat_window_set(&[0.0, 0.1, 5.0, 5.1, 10.0, 10.1]);
        let mut picked = init_dpc(&ws, 6, 2.0, 3).unwrap();
        picked.sort_unstable();
        assert_eq!(picked, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn dpc_rejects_too_few_windows() {
        let ws = flat_window_set(&[0.0, 1.0]);
        assert!(matches!(
            init_dpc(&ws, 3, 2.0, 0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn random_init_is_seeded_and_distinct() {
        let ws = flat_window_set(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = init_random(&ws, 3, 42).unwrap();
        let b = init_random(&ws, 3, 42).unwrap();
        assert_eq!(a, b);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 3);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn resample_keeps_endpoints_and_linearity() {
        let ramp = arr2(&[[0.0], [1.0], [2.0], [3.0], [4.0]]);
        assert_eq!(resample_rows(ramp.view(), 5), ramp);

        let down = resample_rows(ramp.view(), 3);
        assert_eq!(down, arr2(&[[0.0], [2.0], [4.0]]));

        let up = resample_rows(ramp.view(), 9);
        assert_eq!(up.nrows(), 9);
        assert_eq!(up[[0, 0]], 0.0);
        assert_eq!(up[[8, 0]], 4.0);
        for r in 0..9 {
            assert_abs_diff_eq!(up[[r, 0]], r as f64 * 0.5, epsilon = 1e-12);
        }
    }
}
