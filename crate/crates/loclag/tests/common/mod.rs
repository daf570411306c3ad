//! Shared generators and dense oracles for the integration suites.
//!
//! Oracles here go through dense SVD least squares on the full matrices and
//! stay independent of the sparse solve paths they are used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use loclag::graph::{
    build_graph, expand_to_dirichlet, graph_ball, Graph, Metric, Neighborhood, Partition,
    PointCloud,
};

/// Random 2-D point cloud with a connected Euclidean radius graph and a
/// random partition (known set nonempty). The inner radius starts near the
/// quasi-uniform spacing and grows until the graph connects.
pub fn random_connected_instance(
    rng: &mut ChaCha8Rng,
    n_min: usize,
    n_max: usize,
) -> (PointCloud, Graph, Partition, f64) {
    loop {
        let n = rng.gen_range(n_min..=n_max);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let Ok(cloud) = PointCloud::new(points, None) else {
            continue;
        };
        let mut r_inner = 1.6 / (n as f64).sqrt();
        let graph = loop {
            match build_graph(&cloud, &Metric::Euclidean, r_inner) {
                Ok(g) => break g,
                Err(_) => r_inner *= 1.35,
            }
        };
        let known: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let known = if known.is_empty() { vec![0] } else { known };
        let partition = Partition::from_known(n, known).unwrap();
        return (cloud, graph, partition, r_inner);
    }
}

/// Dense SVD least-squares solve of `min ‖A x − b‖₂`.
pub fn dense_lstsq(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    nalgebra::SVD::new(a, true, true)
        .solve(&b, 1e-14)
        .expect("SVD solve")
}

/// Dense oracle for the Lagrange column: full vector over all vertices.
pub fn oracle_lagrange_column(lap: &DMatrix<f64>, p: &Partition, v: usize) -> Vec<f64> {
    let n = lap.nrows();
    let unknown = p.unknown();
    let mut column = vec![0.0; n];
    column[v] = 1.0;
    if unknown.is_empty() {
        return column;
    }
    let a = DMatrix::from_fn(n, unknown.len(), |r, c| lap[(r, unknown[c])]);
    let b = -lap.column(v).clone_owned();
    let f = dense_lstsq(a, b);
    for (pos, &u) in unknown.iter().enumerate() {
        column[u] = f[pos];
    }
    column
}

/// Dense oracle for the local column: restricted problem on the
/// neighborhood submatrix, zero outside, delta on the known members.
pub fn oracle_local_column(
    lap: &DMatrix<f64>,
    p: &Partition,
    nb: &Neighborhood,
) -> Vec<f64> {
    let n = lap.nrows();
    let members = nb.members();
    let m = members.len();
    let sub = DMatrix::from_fn(m, m, |r, c| lap[(members[r], members[c])]);
    let local_unknown: Vec<usize> = (0..m).filter(|&i| !p.is_known(members[i])).collect();
    let center_pos = members.binary_search(&nb.center()).unwrap();
    let mut column = vec![0.0; n];
    column[nb.center()] = 1.0;
    if local_unknown.is_empty() {
        return column;
    }
    let a = DMatrix::from_fn(m, local_unknown.len(), |r, c| sub[(r, local_unknown[c])]);
    let b = -sub.column(center_pos).clone_owned();
    let f = dense_lstsq(a, b);
    for (pos, &i) in local_unknown.iter().enumerate() {
        column[members[i]] = f[pos];
    }
    column
}

/// Connected instance where the unknown vertices form an independent set
/// (unknown vertices are only adjacent to known ones).
pub fn independent_unknown_instance(
    rng: &mut ChaCha8Rng,
    n_min: usize,
    n_max: usize,
) -> (Graph, Partition) {
    let (_, graph, _, _) = random_connected_instance(rng, n_min, n_max);
    let n = graph.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut unknown = vec![false; n];
    for &v in &order {
        if !rng.gen_bool(0.6) {
            continue;
        }
        let free = graph.neighbors(v).iter().all(|&(w, _)| !unknown[w]);
        if free {
            unknown[v] = true;
        }
    }
    // keep at least one unknown vertex so the problems are nontrivial
    if !unknown.iter().any(|&b| b) {
        unknown[order[0]] = true;
    }
    let known: Vec<usize> = (0..n).filter(|&v| !unknown[v]).collect();
    let partition = Partition::from_known(n, known).unwrap();
    (graph, partition)
}

/// Ball around `center` grown to satisfy the Dirichlet condition: every
/// boundary vertex known.
pub fn dirichlet_neighborhood(
    g: &Graph,
    p: &Partition,
    center: usize,
    radius: f64,
) -> Neighborhood {
    let ball = graph_ball(g, center, radius, p).unwrap();
    expand_to_dirichlet(g, p, &ball)
}

/// Least-squares slope of y against x.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
