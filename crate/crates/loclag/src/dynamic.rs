//! Incremental vertex insertion with localized basis refresh.
//!
//! Adding a point only adds edges incident to the new vertex, so the columns
//! that can change are those of centers within the outer radius of the new
//! vertex plus centers whose neighborhood contains a vertex whose degree
//! changed (the normalized Laplacian couples every entry of a row to the
//! degree, so a degree change perturbs neighborhood submatrices even when
//! the new vertex itself stays outside). Everything else is carried over
//! bit-identically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{compute_local_basis, local_lagrange_column, BasisError, BasisMatrix, BasisMode};
use crate::graph::{
    build_graph, graph_ball, normalized_laplacian, Edge, Graph, GraphError, Laplacian, Metric,
    Neighborhood, Partition, PointCloud,
};
use crate::par::map_indices;
use crate::solver::SolverConfig;
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum DynamicError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("new point has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("new point duplicates vertex {0} (metric distance zero)")]
    DuplicatePoint(usize),
    #[error("new point has no neighbor within the inner radius {0}; it would be isolated")]
    IsolatedInsertion(f64),
    #[error("state basis must be in local mode")]
    NotLocalBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexStatus {
    Known,
    Unknown,
}

/// Record of one insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateDelta {
    pub new_vertex: NewVertex,
    /// Edges created by the insertion as (existing vertex, length).
    pub new_edges: Vec<(usize, f64)>,
    /// Known centers whose columns were recomputed (the new center, when
    /// known, included).
    pub affected_centers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewVertex {
    pub index: usize,
    pub id: String,
    pub status: VertexStatus,
    pub coords: Vec<f64>,
}

/// A graph, its partition, the per-center neighborhoods, and the local
/// Lagrange basis, kept consistent across insertions.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub points: PointCloud,
    pub metric: Metric,
    pub r_inner: f64,
    pub r_outer: f64,
    pub graph: Graph,
    pub laplacian: Laplacian,
    pub partition: Partition,
    /// One neighborhood per known center, aligned with `basis.centers()`.
    pub neighborhoods: Vec<Neighborhood>,
    pub basis: BasisMatrix,
}

impl ModelState {
    /// Builds the graph, Laplacian, neighborhoods of radius `r_outer`, and
    /// the local Lagrange basis from scratch.
    pub fn build(
        points: PointCloud,
        metric: Metric,
        r_inner: f64,
        r_outer: f64,
        known: impl IntoIterator<Item = usize>,
        cfg: &SolverConfig,
    ) -> Result<Self, DynamicError> {
        let graph = build_graph(&points, &metric, r_inner)?;
        let laplacian = normalized_laplacian(&graph)?;
        let partition = Partition::from_known(points.len(), known)?;
        let neighborhoods = partition
            .known()
            .iter()
            .map(|&v| graph_ball(&graph, v, r_outer, &partition))
            .collect::<Result<Vec<_>, _>>()?;
        let basis = compute_local_basis(&laplacian, &partition, &neighborhoods, cfg)?;
        Ok(Self {
            points,
            metric,
            r_inner,
            r_outer,
            graph,
            laplacian,
            partition,
            neighborhoods,
            basis,
        })
    }

    /// Inserts a point, connects it to everything within the inner radius,
    /// rebuilds the Laplacian, and refreshes exactly the affected columns.
    /// Untouched columns are carried over bit-identically.
    pub fn insert(
        &self,
        coords: Vec<f64>,
        id: Option<String>,
        status: VertexStatus,
        cfg: &SolverConfig,
    ) -> Result<(ModelState, UpdateDelta), DynamicError> {
        if self.basis.mode() != BasisMode::Local {
            return Err(DynamicError::NotLocalBasis);
        }
        if coords.len() != self.points.dim() {
            return Err(DynamicError::DimensionMismatch {
                got: coords.len(),
                expected: self.points.dim(),
            });
        }
        let n = self.points.len();
        let v0 = n;

        // Neighbors in parameter space; zero distance means a duplicate.
        let mut new_edges = Vec::new();
        let mut min_dist = f64::INFINITY;
        for i in 0..n {
            let d = self.metric.distance(self.points.point(i), &coords)?;
            if d == 0.0 {
                return Err(DynamicError::DuplicatePoint(i));
            }
            min_dist = min_dist.min(d);
            if d < self.r_inner {
                new_edges.push((i, d));
            }
        }
        if new_edges.is_empty() {
            return Err(DynamicError::IsolatedInsertion(self.r_inner));
        }

        let points = self.points.with_point(coords.clone(), id)?;
        let mut edges: Vec<Edge> = self.graph.edges().to_vec();
        edges.extend(new_edges.iter().map(|&(i, length)| Edge {
            i,
            j: v0,
            length,
        }));
        let theta = self.graph.theta().min(min_dist);
        let graph = Graph::from_edges(n + 1, edges, theta)?;
        // Rebuilt rather than patched: degrees of every neighbor changed,
        // and a rebuild is O(edges) at this scale.
        let laplacian = normalized_laplacian(&graph)?;
        let partition = self.partition.with_appended(status == VertexStatus::Known);

        let affected = affected_centers(&graph, v0, &self.neighborhoods, self.r_outer);

        // Refresh neighborhoods: affected centers get a fresh ball on the
        // new graph; the rest are structurally untouched.
        let mut neighborhoods = Vec::with_capacity(self.neighborhoods.len() + 1);
        for nb in &self.neighborhoods {
            if affected.binary_search(&nb.center()).is_ok() {
                neighborhoods.push(graph_ball(&graph, nb.center(), self.r_outer, &partition)?);
            } else {
                neighborhoods.push(nb.clone());
            }
        }
        let mut affected_centers = affected;
        if status == VertexStatus::Known {
            neighborhoods.push(graph_ball(&graph, v0, self.r_outer, &partition)?);
            affected_centers.push(v0);
        }

        // Recompute affected columns in parallel; copy the others.
        let recompute: Vec<usize> = affected_centers.clone();
        let new_columns = map_indices(recompute.len(), |k| {
            let center = recompute[k];
            let pos = partition
                .known()
                .binary_search(&center)
                .expect("affected center is known");
            local_lagrange_column(&laplacian, &partition, &neighborhoods[pos], cfg)
        });
        let mut columns: Vec<Vec<(usize, f64)>> = Vec::with_capacity(partition.known().len());
        for (pos, &center) in partition.known().iter().enumerate() {
            if let Ok(k) = recompute.binary_search(&center) {
                match &new_columns[k] {
                    Ok(col) => columns.push(col.clone()),
                    Err(_) => {
                        // propagate the first failure with its center id
                        return Err(DynamicError::Basis(
                            new_columns
                                .into_iter()
                                .find_map(Result::err)
                                .expect("a failure exists"),
                        ));
                    }
                }
            } else {
                // bit-identical carry-over of the stored column
                let old_pos = self
                    .basis
                    .column_of_center(center)
                    .expect("untouched center existed before");
                let (rows, vals) = self.basis.column(old_pos);
                columns.push(rows.iter().copied().zip(vals.iter().copied()).collect());
                let _ = pos;
            }
        }
        let storage = CscMatrix::from_columns(n + 1, columns);
        let radii = vec![self.r_outer; partition.known().len()];
        let supports = neighborhoods
            .iter()
            .map(|nb| nb.members().to_vec())
            .collect();
        let basis = BasisMatrix::from_parts(
            BasisMode::Local,
            n + 1,
            partition.known().to_vec(),
            storage,
            radii,
            supports,
        );

        let delta = UpdateDelta {
            new_vertex: NewVertex {
                index: v0,
                id: points.id(v0).to_string(),
                status,
                coords,
            },
            new_edges,
            affected_centers,
        };
        let state = ModelState {
            points,
            metric: self.metric.clone(),
            r_inner: self.r_inner,
            r_outer: self.r_outer,
            graph,
            laplacian,
            partition,
            neighborhoods,
            basis,
        };
        Ok((state, delta))
    }
}

/// Known centers whose local columns can change after inserting `v0`:
/// centers within graph distance `r_outer` of `v0` in the updated graph,
/// plus centers whose neighborhood contains a neighbor of `v0` (their
/// degrees changed).
pub fn affected_centers(
    g_new: &Graph,
    v0: usize,
    nbhds: &[Neighborhood],
    r_outer: f64,
) -> Vec<usize> {
    let dist = g_new.dijkstra(v0, r_outer);
    let changed_degree: Vec<usize> = g_new.neighbors(v0).iter().map(|&(w, _)| w).collect();
    let mut out: Vec<usize> = nbhds
        .iter()
        .filter(|nb| {
            dist[nb.center()] <= r_outer
                || changed_degree.iter().any(|&w| nb.contains(w))
        })
        .map(Neighborhood::center)
        .collect();
    out.sort_unstable();
    out
}
