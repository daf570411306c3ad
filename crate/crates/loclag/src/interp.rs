//! Quasi-interpolation: linear combinations Σ f_v χ̄_v of basis columns.
//!
//! With the Lagrange basis the combination interpolates the known data
//! exactly; with a local basis it "almost" interpolates, the deviation
//! controlled by the basis discrepancy.

use thiserror::Error;

use crate::basis::{BasisMatrix, BasisMode};
use crate::graph::{Graph, Partition};

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("expected {expected} known values, got {got}")]
    KnownLengthMismatch { got: usize, expected: usize },
    #[error("expected {expected} truth values, got {got}")]
    TruthLengthMismatch { got: usize, expected: usize },
    #[error("value at position {0} is not finite")]
    NonFiniteValue(usize),
    #[error("basis has {basis} columns but the data has {data} known values")]
    BasisDataMismatch { basis: usize, data: usize },
    #[error("prediction mask is empty")]
    EmptyMask,
    #[error("mask index {index} out of bounds for length {len}")]
    MaskOutOfBounds { index: usize, len: usize },
    #[error("vectors have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("local sums need a local basis with a uniform radius; column {column} has radius {got}, expected {expected}")]
    MixedRadii {
        column: usize,
        got: f64,
        expected: f64,
    },
    #[error("query vertex {0} is a known center, not an unknown vertex")]
    KnownQueryVertex(usize),
    #[error("no known centers within radius {radius} of vertex {vertex}")]
    NoCentersInRange { vertex: usize, radius: f64 },
}

/// Signal values at the known vertices, with optional ground truth at the
/// unknown vertices for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalData {
    known_values: Vec<f64>,
    truth_unknown: Option<Vec<f64>>,
}

impl SignalData {
    /// `known_values` aligns with `partition.known()`, `truth_unknown` (when
    /// given) with `partition.unknown()`. All values must be finite.
    pub fn new(
        partition: &Partition,
        known_values: Vec<f64>,
        truth_unknown: Option<Vec<f64>>,
    ) -> Result<Self, InterpError> {
        if known_values.len() != partition.known().len() {
            return Err(InterpError::KnownLengthMismatch {
                got: known_values.len(),
                expected: partition.known().len(),
            });
        }
        if let Some(pos) = known_values.iter().position(|v| !v.is_finite()) {
            return Err(InterpError::NonFiniteValue(pos));
        }
        if let Some(truth) = &truth_unknown {
            if truth.len() != partition.unknown().len() {
                return Err(InterpError::TruthLengthMismatch {
                    got: truth.len(),
                    expected: partition.unknown().len(),
                });
            }
            if let Some(pos) = truth.iter().position(|v| !v.is_finite()) {
                return Err(InterpError::NonFiniteValue(pos));
            }
        }
        Ok(Self {
            known_values,
            truth_unknown,
        })
    }

    /// Values in `partition.known()` order.
    pub fn known_values(&self) -> &[f64] {
        &self.known_values
    }

    /// Ground truth in `partition.unknown()` order, when present.
    pub fn truth_unknown(&self) -> Option<&[f64]> {
        self.truth_unknown.as_deref()
    }
}

/// Full quasi-interpolant Σ_{v∈𝒱_k} f_v χ̄_v evaluated at every vertex.
///
/// At known vertices a Lagrange basis reproduces the data bit-exactly: the
/// only stored entry hitting a known row is the center's own 1.
pub fn quasi_interpolate(b: &BasisMatrix, d: &SignalData) -> Result<Vec<f64>, InterpError> {
    if b.column_count() != d.known_values().len() {
        return Err(InterpError::BasisDataMismatch {
            basis: b.column_count(),
            data: d.known_values().len(),
        });
    }
    let mut out = vec![0.0; b.nrows()];
    for (c, &fv) in d.known_values().iter().enumerate() {
        if fv == 0.0 {
            continue;
        }
        let (rows, vals) = b.column(c);
        for (&r, &v) in rows.iter().zip(vals) {
            out[r] += fv * v;
        }
    }
    Ok(out)
}

/// Local quasi-interpolant Σ_{v∈𝒱_k ∩ Ω_w} f_v χ̄_v(w) at a single unknown
/// vertex `w`, restricted to centers within graph distance `r_outer`.
///
/// Requires every basis neighborhood to share the radius `r_outer`.
pub fn local_quasi_interpolate(
    g: &Graph,
    b: &BasisMatrix,
    d: &SignalData,
    w: usize,
    r_outer: f64,
) -> Result<f64, InterpError> {
    if b.column_count() != d.known_values().len() {
        return Err(InterpError::BasisDataMismatch {
            basis: b.column_count(),
            data: d.known_values().len(),
        });
    }
    if b.mode() == BasisMode::Local {
        for (column, &r) in b.radii().iter().enumerate() {
            if r != r_outer {
                return Err(InterpError::MixedRadii {
                    column,
                    got: r,
                    expected: r_outer,
                });
            }
        }
    }
    if b.column_of_center(w).is_some() {
        return Err(InterpError::KnownQueryVertex(w));
    }
    let dist = g.dijkstra(w, r_outer);
    let mut sum = 0.0;
    let mut hits = 0usize;
    for (c, &center) in b.centers().iter().enumerate() {
        if dist[center] <= r_outer {
            hits += 1;
            sum += d.known_values()[c] * b.value(w, c);
        }
    }
    if hits == 0 {
        return Err(InterpError::NoCentersInRange {
            vertex: w,
            radius: r_outer,
        });
    }
    Ok(sum)
}

/// Mean squared error of `predicted` against `truth` over the index mask.
pub fn mse(predicted: &[f64], truth: &[f64], mask: &[usize]) -> Result<f64, InterpError> {
    if predicted.len() != truth.len() {
        return Err(InterpError::LengthMismatch {
            a: predicted.len(),
            b: truth.len(),
        });
    }
    if mask.is_empty() {
        return Err(InterpError::EmptyMask);
    }
    let mut sum = 0.0;
    for &i in mask {
        if i >= predicted.len() {
            return Err(InterpError::MaskOutOfBounds {
                index: i,
                len: predicted.len(),
            });
        }
        let d = predicted[i] - truth[i];
        sum += d * d;
    }
    Ok(sum / mask.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{compute_lagrange_basis, compute_local_basis};
    use crate::graph::{build_graph, graph_ball, normalized_laplacian, Metric, PointCloud};
    use crate::solver::SolverConfig;
    use proptest::prelude::*;

    fn path_instance(
        n: usize,
        known: Vec<usize>,
    ) -> (Graph, crate::graph::Laplacian, Partition) {
        let pc = PointCloud::new((0..n).map(|i| vec![i as f64]).collect(), None).unwrap();
        let g = build_graph(&pc, &Metric::Euclidean, 1.5).unwrap();
        let l = normalized_laplacian(&g).unwrap();
        let p = Partition::from_known(n, known).unwrap();
        (g, l, p)
    }

    #[test]
    fn lagrange_interpolation_is_exact_at_known_vertices() {
        let (_, l, p) = path_instance(5, vec![0, 2, 4]);
        let basis = compute_lagrange_basis(&l, &p, &SolverConfig::default()).unwrap();
        let data = SignalData::new(&p, vec![3.0, -1.5, 0.25], None).unwrap();
        let f = quasi_interpolate(&basis, &data).unwrap();
        assert_eq!(f[0], 3.0);
        assert_eq!(f[2], -1.5);
        assert_eq!(f[4], 0.25);
    }

    #[test]
    fn constant_data_on_two_vertex_graph() {
        let (_, l, p) = path_instance(2, vec![0]);
        let basis = compute_lagrange_basis(&l, &p, &SolverConfig::default()).unwrap();
        let data = SignalData::new(&p, vec![1.0], None).unwrap();
        let f = quasi_interpolate(&basis, &data).unwrap();
        assert!((f[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn local_basis_full_radius_matches_lagrange_interpolant() {
        let (g, l, p) = path_instance(6, vec![0, 2, 3, 5]);
        let cfg = SolverConfig::default();
        let nbhds: Vec<_> = p
            .known()
            .iter()
            .map(|&v| graph_ball(&g, v, 1e6, &p).unwrap())
            .collect();
        let local = compute_local_basis(&l, &p, &nbhds, &cfg).unwrap();
        let global = compute_lagrange_basis(&l, &p, &cfg).unwrap();
        let data = SignalData::new(&p, vec![1.0, -2.0, 4.0, 0.5], None).unwrap();
        let fl = quasi_interpolate(&local, &data).unwrap();
        let fg = quasi_interpolate(&global, &data).unwrap();
        for w in 0..6 {
            assert!((fl[w] - fg[w]).abs() <= 10.0 * cfg.tolerance * 4.0);
        }
    }

    #[test]
    fn local_sum_with_all_centers_in_range_matches_full_sum() {
        let (g, l, p) = path_instance(5, vec![0, 2, 4]);
        let cfg = SolverConfig::default();
        let r = 100.0;
        let nbhds: Vec<_> = p
            .known()
            .iter()
            .map(|&v| graph_ball(&g, v, r, &p).unwrap())
            .collect();
        let local = compute_local_basis(&l, &p, &nbhds, &cfg).unwrap();
        let data = SignalData::new(&p, vec![2.0, 1.0, -1.0], None).unwrap();
        let full = quasi_interpolate(&local, &data).unwrap();
        for &w in p.unknown() {
            let s = local_quasi_interpolate(&g, &local, &data, w, r).unwrap();
            assert!((s - full[w]).abs() < 1e-12);
        }
    }

    #[test]
    fn local_sum_single_center() {
        let (g, l, p) = path_instance(4, vec![0, 3]);
        let cfg = SolverConfig::default();
        let r = 1.0;
        let nbhds: Vec<_> = p
            .known()
            .iter()
            .map(|&v| graph_ball(&g, v, r, &p).unwrap())
            .collect();
        let local = compute_local_basis(&l, &p, &nbhds, &cfg).unwrap();
        let c = 7.0;
        let data = SignalData::new(&p, vec![c, 0.0], None).unwrap();
        // only center 0 is within distance 1 of vertex 1
        let s = local_quasi_interpolate(&g, &local, &data, 1, r).unwrap();
        assert!((s - c * local.value(1, 0)).abs() < 1e-12);
    }

    #[test]
    fn local_sum_errors_without_centers() {
        let (g, l, p) = path_instance(4, vec![0]);
        let cfg = SolverConfig::default();
        let r = 0.5;
        let nbhds: Vec<_> = p
            .known()
            .iter()
            .map(|&v| graph_ball(&g, v, r, &p).unwrap())
            .collect();
        let local = compute_local_basis(&l, &p, &nbhds, &cfg).unwrap();
        let data = SignalData::new(&p, vec![1.0], None).unwrap();
        assert!(matches!(
            local_quasi_interpolate(&g, &local, &data, 2, r),
            Err(InterpError::NoCentersInRange { .. })
        ));
    }

    #[test]
    fn mse_basics() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0], &[0, 1]).unwrap(), 0.0);
        assert_eq!(
            mse(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0], &[0, 1, 2]).unwrap(),
            1.0
        );
        assert!(matches!(
            mse(&[1.0], &[1.0], &[]),
            Err(InterpError::EmptyMask)
        ));
    }

    #[test]
    fn signal_data_validation() {
        let (_, _, p) = path_instance(4, vec![0, 2]);
        assert!(SignalData::new(&p, vec![1.0], None).is_err());
        assert!(SignalData::new(&p, vec![1.0, f64::NAN], None).is_err());
        assert!(SignalData::new(&p, vec![1.0, 2.0], Some(vec![0.0])).is_err());
        assert!(SignalData::new(&p, vec![1.0, 2.0], Some(vec![0.0, 0.0])).is_ok());
    }

    proptest! {
        /// quasi_interpolate(αd₁ + βd₂) = α·quasi_interpolate(d₁) + β·quasi_interpolate(d₂)
        #[test]
        fn quasi_interpolation_is_linear(
            d1 in prop::collection::vec(-3.0f64..3.0, 3),
            d2 in prop::collection::vec(-3.0f64..3.0, 3),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let (_, l, p) = path_instance(5, vec![0, 2, 4]);
            let basis = compute_lagrange_basis(&l, &p, &SolverConfig::default()).unwrap();
            let combo: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| alpha * a + beta * b).collect();
            let f1 = quasi_interpolate(&basis, &SignalData::new(&p, d1, None).unwrap()).unwrap();
            let f2 = quasi_interpolate(&basis, &SignalData::new(&p, d2, None).unwrap()).unwrap();
            let fc = quasi_interpolate(&basis, &SignalData::new(&p, combo, None).unwrap()).unwrap();
            for w in 0..5 {
                prop_assert!((fc[w] - (alpha * f1[w] + beta * f2[w])).abs() < 1e-12);
            }
        }

        #[test]
        fn mse_is_permutation_invariant(perm_seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let predicted = [1.0, 4.0, -2.0, 0.5, 3.0];
            let truth = [0.5, 4.5, -1.0, 0.5, 2.0];
            let mut mask = vec![0usize, 2, 3, 4];
            let base = mse(&predicted, &truth, &mask).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
            mask.shuffle(&mut rng);
            let shuffled = mse(&predicted, &truth, &mask).unwrap();
            prop_assert!((base - shuffled).abs() < 1e-15);
        }
    }
}
