//! Repeated k-fold cross-validation on a tabular dataset with an
//! importance-weighted ℓ1 metric, comparing Lagrange against local Lagrange
//! quasi-interpolation.
//!
//! Per fold: feature importances are fitted on the training rows only, the
//! weighted distances are rescaled so every vertex has a neighbor within
//! distance 1, the connectivity slack ε is picked as the smallest grid value
//! keeping the graph connected, and both bases predict the test rows
//! transductively (test rows participate as unknown vertices).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{compute_lagrange_basis, compute_local_basis};
use crate::graph::{graph_ball, normalized_laplacian, Edge, Graph, Partition};
use crate::interp::{mse, quasi_interpolate, SignalData};
use crate::io::Dataset;
use crate::par::map_indices;
use crate::solver::SolverConfig;

use super::report::{mean_std, CvFoldRow, CvReport, CvRow};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EnergyCvConfig {
    pub k_folds: usize,
    pub repetitions: usize,
    /// Outer radii in rescaled graph-distance units.
    pub r_outer_values: Vec<f64>,
    pub seed: u64,
    /// Minkowski order of the weighted metric; 1 gives the weighted ℓ1 norm.
    pub minkowski_p: f64,
    /// Candidate slacks ε for the inner radius 1 + ε, searched in order for
    /// the first connected graph.
    pub epsilon_grid: Vec<f64>,
    /// Floor applied to per-feature MSEs before inversion.
    pub mse_floor: f64,
    pub solver: SolverConfig,
}

impl Default for EnergyCvConfig {
    fn default() -> Self {
        Self {
            k_folds: 10,
            repetitions: 20,
            r_outer_values: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            seed: 7,
            minkowski_p: 1.0,
            epsilon_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            mse_floor: 1e-12,
            solver: SolverConfig::default(),
        }
    }
}

impl EnergyCvConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.k_folds < 2 || self.repetitions == 0 {
            return Err(HarnessError::InvalidConfig(
                "cross-validation needs k ≥ 2 folds and at least one repetition".into(),
            ));
        }
        if self.r_outer_values.is_empty() || self.epsilon_grid.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "r_outer_values and epsilon_grid must be nonempty".into(),
            ));
        }
        Ok(())
    }
}

/// Per-feature importance weights from leave-one-out single-feature
/// 1-nearest-neighbor regression: weight ∝ 1 / MSE, normalized to sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub weights: Vec<f64>,
    pub loo_mse: Vec<f64>,
    /// Indices of zero-variance features, which get the smallest positive
    /// weight of the remaining features.
    pub zero_variance: Vec<usize>,
}

pub fn feature_importance(
    features: &[Vec<f64>],
    target: &[f64],
    mse_floor: f64,
) -> Result<FeatureImportance, HarnessError> {
    if features.len() < 2 {
        return Err(HarnessError::TooFewFeatures(features.len()));
    }
    let n = target.len();
    if n < 2 {
        return Err(HarnessError::TooFewPoints(n));
    }
    for col in features {
        if col.len() != n {
            return Err(HarnessError::InvalidConfig(format!(
                "feature column of length {} does not match {} target rows",
                col.len(),
                n
            )));
        }
    }
    let mut loo_mse = vec![f64::NAN; features.len()];
    let mut zero_variance = Vec::new();
    for (f, col) in features.iter().enumerate() {
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            zero_variance.push(f);
            continue;
        }
        let mut sum_sq = 0.0;
        for j in 0..n {
            let mut best = usize::MAX;
            let mut best_dist = f64::INFINITY;
            for k in 0..n {
                if k == j {
                    continue;
                }
                let d = (col[k] - col[j]).abs();
                if d < best_dist {
                    best_dist = d;
                    best = k;
                }
            }
            let err = target[best] - target[j];
            sum_sq += err * err;
        }
        loo_mse[f] = sum_sq / n as f64;
    }
    if zero_variance.len() == features.len() {
        return Err(HarnessError::AllFeaturesConstant);
    }
    let mut raw: Vec<f64> = loo_mse
        .iter()
        .map(|&m| if m.is_nan() { f64::NAN } else { 1.0 / m.max(mse_floor) })
        .collect();
    let min_positive = raw
        .iter()
        .copied()
        .filter(|w| w.is_finite())
        .fold(f64::INFINITY, f64::min);
    for &f in &zero_variance {
        raw[f] = min_positive;
    }
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    Ok(FeatureImportance {
        weights,
        loo_mse,
        zero_variance,
    })
}

/// Condensed upper-triangle index for i < j.
#[cfg(test)]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Weighted-Minkowski distances between all row pairs, with exact-duplicate
/// pairs floored to half the smallest positive distance so that ρ stays
/// positive on distinct vertices.
fn pairwise_distances(
    features: &[Vec<f64>],
    weights: &[f64],
    p: f64,
    n: usize,
) -> Result<Vec<f64>, HarnessError> {
    let mut dist = vec![0.0f64; n * (n - 1) / 2];
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (col, &w) in features.iter().zip(weights) {
                let d = (col[i] - col[j]).abs();
                acc += if p == 1.0 { w * d } else { w * d.powf(p) };
            }
            dist[idx] = if p == 1.0 { acc } else { acc.powf(1.0 / p) };
            idx += 1;
        }
    }
    let theta_pos = dist
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !theta_pos.is_finite() {
        return Err(HarnessError::DegenerateDistances);
    }
    for d in &mut dist {
        if *d == 0.0 {
            *d = theta_pos / 2.0;
        }
    }
    Ok(dist)
}

/// Divides all distances by the largest per-vertex nearest-neighbor
/// distance, so every vertex has a neighbor within 1 afterwards.
fn rescale_unit_neighbor(dist: &mut [f64], n: usize) {
    let mut nn = vec![f64::INFINITY; n];
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            nn[i] = nn[i].min(dist[idx]);
            nn[j] = nn[j].min(dist[idx]);
            idx += 1;
        }
    }
    let s = nn.iter().copied().fold(0.0, f64::max);
    for d in dist.iter_mut() {
        *d /= s;
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Builds the fold graph: smallest ε from the grid such that connecting all
/// pairs at rescaled distance < 1 + ε yields a connected graph.
fn connected_graph_from_grid(
    dist: &[f64],
    n: usize,
    grid: &[f64],
) -> Result<(Graph, f64), HarnessError> {
    let theta = dist.iter().copied().fold(f64::INFINITY, f64::min);
    for &eps in grid {
        let r_inner = 1.0 + eps;
        let mut uf = UnionFind::new(n);
        let mut idx = 0;
        let mut count = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[idx] < r_inner {
                    uf.union(i, j);
                    count += 1;
                }
                idx += 1;
            }
        }
        let root = uf.find(0);
        if (1..n).all(|v| uf.find(v) == root) {
            let mut edges = Vec::with_capacity(count);
            let mut idx = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if dist[idx] < r_inner {
                        edges.push(Edge {
                            i,
                            j,
                            length: dist[idx],
                        });
                    }
                    idx += 1;
                }
            }
            let graph = Graph::from_edges(n, edges, theta)?;
            return Ok((graph, eps));
        }
    }
    Err(HarnessError::NoConnectedRadius {
        max_epsilon: grid.iter().copied().fold(f64::NAN, f64::max),
    })
}

struct FoldOutcome {
    mse_lagrange: f64,
    mse_local: f64,
    epsilon: f64,
    test_size: usize,
    zero_variance: Vec<usize>,
}

fn run_fold(
    ds: &Dataset,
    target: &[f64],
    train: &[usize],
    test: &[usize],
    r_outer: f64,
    cfg: &EnergyCvConfig,
) -> Result<FoldOutcome, HarnessError> {
    let n = ds.n_rows;
    // importances from training rows only
    let train_cols: Vec<Vec<f64>> = ds
        .features
        .iter()
        .map(|col| train.iter().map(|&r| col[r]).collect())
        .collect();
    let train_target: Vec<f64> = train.iter().map(|&r| target[r]).collect();
    let importance = feature_importance(&train_cols, &train_target, cfg.mse_floor)?;

    let mut dist = pairwise_distances(&ds.features, &importance.weights, cfg.minkowski_p, n)?;
    rescale_unit_neighbor(&mut dist, n);
    let (graph, epsilon) = connected_graph_from_grid(&dist, n, &cfg.epsilon_grid)?;
    let laplacian = normalized_laplacian(&graph)?;
    let partition = Partition::from_known(n, train.iter().copied())?;
    let data = SignalData::new(&partition, train_target, None)?;

    let lagrange = compute_lagrange_basis(&laplacian, &partition, &cfg.solver)?;
    let predicted = quasi_interpolate(&lagrange, &data)?;
    let mse_lagrange = mse(&predicted, target, test)?;

    let neighborhoods = partition
        .known()
        .iter()
        .map(|&v| graph_ball(&graph, v, r_outer, &partition))
        .collect::<Result<Vec<_>, _>>()?;
    let local = compute_local_basis(&laplacian, &partition, &neighborhoods, &cfg.solver)?;
    let predicted = quasi_interpolate(&local, &data)?;
    let mse_local = mse(&predicted, target, test)?;

    Ok(FoldOutcome {
        mse_lagrange,
        mse_local,
        epsilon,
        test_size: test.len(),
        zero_variance: importance.zero_variance,
    })
}

/// Contiguous chunks of a shuffled index list; the first `n % k` folds get
/// one extra row, and every row lands in exactly one fold.
fn fold_slices(permutation: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = permutation.len();
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(permutation[start..start + len].to_vec());
        start += len;
    }
    folds
}

/// Runs the repeated k-fold cross-validation experiment.
///
/// Each (R_o row, repetition) pair draws its own shuffle, and the Lagrange
/// and local runs of that pair consume the identical fold assignment.
pub fn run_energy_cv(cfg: &EnergyCvConfig, ds: &Dataset) -> Result<CvReport, HarnessError> {
    cfg.validate()?;
    let n = ds.n_rows;
    if n < cfg.k_folds {
        return Err(HarnessError::InvalidConfig(format!(
            "{n} rows cannot be split into {} folds",
            cfg.k_folds
        )));
    }
    let mut rows = Vec::new();
    let mut per_fold = Vec::new();
    for (row_idx, &r_outer) in cfg.r_outer_values.iter().enumerate() {
        // per-row shuffles: one permutation per repetition, shared by both
        // methods and both targets
        let shuffles: Vec<Vec<usize>> = (0..cfg.repetitions)
            .map(|rep| {
                let stream = ((row_idx as u64) << 32) | rep as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E3779B97F4A7C15) ^ stream);
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                perm
            })
            .collect();
        for (target_name, target) in &ds.targets {
            let jobs: Vec<(usize, usize)> = (0..cfg.repetitions)
                .flat_map(|rep| (0..cfg.k_folds).map(move |fold| (rep, fold)))
                .collect();
            let outcomes = map_indices(jobs.len(), |j| {
                let (rep, fold) = jobs[j];
                let folds = fold_slices(&shuffles[rep], cfg.k_folds);
                let mut test = folds[fold].clone();
                test.sort_unstable();
                let mut train: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|&(f, _)| f != fold)
                    .flat_map(|(_, rows)| rows.iter().copied())
                    .collect();
                train.sort_unstable();
                run_fold(ds, target, &train, &test, r_outer, cfg)
            });
            let mut rep_lagrange = vec![0.0f64; cfg.repetitions];
            let mut rep_local = vec![0.0f64; cfg.repetitions];
            let mut rep_rows = vec![0usize; cfg.repetitions];
            for (j, outcome) in outcomes.into_iter().enumerate() {
                let (rep, fold) = jobs[j];
                let out = outcome?;
                rep_lagrange[rep] += out.mse_lagrange * out.test_size as f64;
                rep_local[rep] += out.mse_local * out.test_size as f64;
                rep_rows[rep] += out.test_size;
                per_fold.push(CvFoldRow {
                    r_outer,
                    target: target_name.clone(),
                    repetition: rep,
                    fold,
                    test_size: out.test_size,
                    mse_lagrange: out.mse_lagrange,
                    mse_local: out.mse_local,
                    epsilon: out.epsilon,
                    zero_variance_features: out
                        .zero_variance
                        .iter()
                        .map(|&f| ds.feature_names[f].clone())
                        .collect::<Vec<_>>()
                        .join(";"),
                });
            }
            // pooled per repetition: every row is predicted exactly once
            let lagrange_by_rep: Vec<f64> = rep_lagrange
                .iter()
                .zip(&rep_rows)
                .map(|(&s, &c)| s / c as f64)
                .collect();
            let local_by_rep: Vec<f64> = rep_local
                .iter()
                .zip(&rep_rows)
                .map(|(&s, &c)| s / c as f64)
                .collect();
            let (lagrange_mean, lagrange_std) = mean_std(&lagrange_by_rep);
            let (local_mean, local_std) = mean_std(&local_by_rep);
            rows.push(CvRow {
                r_outer,
                target: target_name.clone(),
                lagrange_mean,
                lagrange_std,
                local_mean,
                local_std,
            });
        }
    }
    Ok(CvReport {
        seed: cfg.seed,
        k_folds: cfg.k_folds,
        repetitions: cfg.repetitions,
        n_rows: n,
        rows,
        per_fold,
    })
}
