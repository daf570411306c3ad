//! Energy-minimizing Lagrange and locally supported local Lagrange bases on
//! weighted graphs built from point-cloud data.
//!
//! The pipeline has four stages: graph construction ([`graph`]), basis
//! computation ([`basis`]), incremental updates ([`dynamic`]), and
//! quasi-interpolation ([`interp`]). The [`harness`] module reproduces the
//! sphere and tabular cross-validation experiments end to end, and [`io`]
//! covers the CSV/JSON file formats shared with the CLI.
//!
//! Basis columns are independent, so column maps run data-parallel under the
//! default `parallel` feature (rayon) and fall back to a sequential loop
//! without it; results are identical either way.

pub mod basis;
pub mod dynamic;
pub mod graph;
pub mod harness;
pub mod interp;
pub mod io;
pub mod par;
pub mod solver;
pub mod sparse;

pub use basis::{
    basis_discrepancy, check_inf_norm_bound, compute_lagrange_basis, compute_local_basis,
    lagrange_column, local_lagrange_column, sparsity_ratio, BasisMatrix, BasisMode,
};
pub use dynamic::{affected_centers, ModelState, UpdateDelta, VertexStatus};
pub use graph::{
    build_graph, expand_to_dirichlet, graph_ball, min_pairwise_distance, normalized_laplacian,
    rescale_to_unit_neighbor, validate_assumptions, Edge, Graph, GraphError, Laplacian, Metric,
    Neighborhood, Partition, PointCloud,
};
pub use interp::{local_quasi_interpolate, mse, quasi_interpolate, SignalData};
pub use solver::{SolveMethod, SolverConfig};
