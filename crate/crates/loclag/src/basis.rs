//! Lagrange and local Lagrange basis functions.
//!
//! The Lagrange function χ_v centered at a known vertex v is the energy
//! minimizer `argmin_f ‖L f‖₂` subject to f = 1 at v and f = 0 at every other
//! known vertex; with the known values fixed this reduces to the least-squares
//! problem `min ‖L_u f + L_k χ_{v,k}‖₂` over the unknown values. The local
//! variant solves the same problem on the submatrix L_Ω of a neighborhood Ω
//! around v and is set to zero outside Ω — structurally zero, the entries are
//! simply absent from the sparse storage.
//!
//! Known-vertex values are assigned, never solved, so the interpolation
//! constraints hold exactly by construction.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Laplacian, Neighborhood, Partition};
use crate::par::map_indices;
use crate::solver::{LeastSquares, SolverConfig, SolverError};
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("center {0} is not a known vertex")]
    CenterNotKnown(usize),
    #[error("Laplacian has {laplacian} vertices but the partition has {partition}")]
    SizeMismatch { laplacian: usize, partition: usize },
    #[error("expected one neighborhood per known center: {got} for {expected} centers")]
    NeighborhoodCountMismatch { got: usize, expected: usize },
    #[error("neighborhood center {got} does not match known center {expected}")]
    NeighborhoodCenterMismatch { got: usize, expected: usize },
    #[error("solver failed for center {center}: {source}")]
    Column {
        center: usize,
        #[source]
        source: SolverError,
    },
    #[error("{failed} of {total} columns failed; first failure at center {center}: {source}")]
    Columns {
        failed: usize,
        total: usize,
        center: usize,
        source: SolverError,
    },
    #[error("basis matrices have different row counts: {a} vs {b}")]
    RowCountMismatch { a: usize, b: usize },
    #[error("center {0} is missing from the basis")]
    UnknownCenter(usize),
    #[error("expected a {expected:?}-mode basis")]
    WrongMode { expected: BasisMode },
    #[error("sparsity threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    Lagrange,
    Local,
}

/// Sparse column-major collection of basis functions, one column per known
/// center in ascending center order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    mode: BasisMode,
    nrows: usize,
    centers: Vec<usize>,
    columns: CscMatrix,
    /// Per-column neighborhood radius; local mode only.
    radii: Vec<f64>,
    /// Per-column neighborhood members Ω_v (sorted); local mode only.
    supports: Vec<Vec<usize>>,
}

impl BasisMatrix {
    pub fn from_parts(
        mode: BasisMode,
        nrows: usize,
        centers: Vec<usize>,
        columns: CscMatrix,
        radii: Vec<f64>,
        supports: Vec<Vec<usize>>,
    ) -> Self {
        assert_eq!(columns.nrows(), nrows);
        assert_eq!(columns.ncols(), centers.len());
        if mode == BasisMode::Local {
            assert_eq!(radii.len(), centers.len());
            assert_eq!(supports.len(), centers.len());
        }
        Self {
            mode,
            nrows,
            centers,
            columns,
            radii,
            supports,
        }
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    /// Number of vertices (rows).
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Known centers in ascending order, one per column.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn column_count(&self) -> usize {
        self.centers.len()
    }

    /// Position of center `v` among the columns.
    pub fn column_of_center(&self, v: usize) -> Option<usize> {
        self.centers.binary_search(&v).ok()
    }

    /// Stored entries of column `c` as (rows, values).
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        self.columns.col(c)
    }

    /// Basis value χ_v(w) for column `c`; zero when unstored.
    pub fn value(&self, w: usize, c: usize) -> f64 {
        self.columns.get(w, c)
    }

    pub fn storage(&self) -> &CscMatrix {
        &self.columns
    }

    /// Neighborhood radius of column `c` (local mode).
    pub fn radius(&self, c: usize) -> Option<f64> {
        self.radii.get(c).copied()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Ω_v member list of column `c` (local mode).
    pub fn support(&self, c: usize) -> Option<&[usize]> {
        self.supports.get(c).map(Vec::as_slice)
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    /// Column scattered into a dense vector of length `nrows`.
    pub fn dense_column(&self, c: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        let (rows, vals) = self.column(c);
        for (&r, &v) in rows.iter().zip(vals) {
            out[r] = v;
        }
        out
    }
}

fn check_center(p: &Partition, v: usize) -> Result<(), BasisError> {
    if v >= p.n() || !p.is_known(v) {
        return Err(BasisError::CenterNotKnown(v));
    }
    Ok(())
}

fn check_sizes(l: &Laplacian, p: &Partition) -> Result<(), BasisError> {
    if l.n() != p.n() {
        return Err(BasisError::SizeMismatch {
            laplacian: l.n(),
            partition: p.n(),
        });
    }
    Ok(())
}

/// Lagrange function χ_v as a dense vector over all vertices: the delta data
/// on 𝒱_k and the least-squares solution on 𝒱_u.
pub fn lagrange_column(
    l: &Laplacian,
    p: &Partition,
    v: usize,
    cfg: &SolverConfig,
) -> Result<Vec<f64>, BasisError> {
    check_sizes(l, p)?;
    check_center(p, v)?;
    let ls = LeastSquares::new(l.matrix(), p.unknown());
    let values = ls
        .solve(v, cfg)
        .map_err(|source| BasisError::Column { center: v, source })?;
    let mut column = vec![0.0; l.n()];
    column[v] = 1.0;
    for (pos, &u) in p.unknown().iter().enumerate() {
        column[u] = values[pos];
    }
    Ok(column)
}

/// One stored basis column: strictly increasing (row, value) pairs.
pub type SparseColumn = Vec<(usize, f64)>;

/// Local Lagrange function χ̄_v on the neighborhood `nb`, zero outside it.
///
/// The returned pairs carry global row indices; rows outside Ω_v never
/// appear. An empty Ω_{v,u} degenerates to the delta at the center.
pub fn local_lagrange_column(
    l: &Laplacian,
    p: &Partition,
    nb: &Neighborhood,
    cfg: &SolverConfig,
) -> Result<SparseColumn, BasisError> {
    check_sizes(l, p)?;
    let v = nb.center();
    check_center(p, v)?;
    let members = nb.members();
    let sub = l.matrix().submatrix(members, members);
    let local_unknown: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|&(_, &m)| !p.is_known(m))
        .map(|(pos, _)| pos)
        .collect();
    let local_center = members
        .binary_search(&v)
        .expect("center is a neighborhood member");
    let ls = LeastSquares::new(&sub, &local_unknown);
    let values = ls
        .solve(local_center, cfg)
        .map_err(|source| BasisError::Column { center: v, source })?;
    let mut column: SparseColumn = Vec::with_capacity(values.len() + 1);
    column.push((v, 1.0));
    for (i, &pos) in local_unknown.iter().enumerate() {
        if values[i] != 0.0 {
            column.push((members[pos], values[i]));
        }
    }
    column.sort_unstable_by_key(|&(r, _)| r);
    Ok(column)
}

fn collect_columns(
    nrows: usize,
    centers: &[usize],
    results: Vec<Result<SparseColumn, BasisError>>,
) -> Result<CscMatrix, BasisError> {
    let mut columns = Vec::with_capacity(results.len());
    let mut first_failure: Option<(usize, SolverError)> = None;
    let mut failed = 0;
    for (c, result) in results.into_iter().enumerate() {
        match result {
            Ok(col) => columns.push(col),
            Err(e) => {
                failed += 1;
                columns.push(Vec::new());
                if first_failure.is_none() {
                    let source = match e {
                        BasisError::Column { source, .. } => source,
                        // center/size validation happens before the map
                        other => panic!("unexpected column error: {other}"),
                    };
                    first_failure = Some((centers[c], source));
                }
            }
        }
    }
    if let Some((center, source)) = first_failure {
        return Err(BasisError::Columns {
            failed,
            total: centers.len(),
            center,
            source,
        });
    }
    Ok(CscMatrix::from_columns(nrows, columns))
}

/// Computes the full Lagrange basis, one column per known center.
///
/// The normal equations are factored once and shared across all columns;
/// columns are independent and evaluated as a parallel map with output
/// order fixed by center index.
pub fn compute_lagrange_basis(
    l: &Laplacian,
    p: &Partition,
    cfg: &SolverConfig,
) -> Result<BasisMatrix, BasisError> {
    check_sizes(l, p)?;
    let centers = p.known().to_vec();
    let ls = match cfg.method {
        crate::solver::SolveMethod::NormalEquationsDirect => {
            LeastSquares::new(l.matrix(), p.unknown())
                .with_factorization()
                .map_err(|source| BasisError::Columns {
                    failed: centers.len(),
                    total: centers.len(),
                    center: centers[0],
                    source,
                })?
        }
        crate::solver::SolveMethod::IterativeLsqr => LeastSquares::new(l.matrix(), p.unknown()),
    };
    let results = map_indices(centers.len(), |c| {
        let v = centers[c];
        let values = ls
            .solve(v, cfg)
            .map_err(|source| BasisError::Column { center: v, source })?;
        let mut column: SparseColumn = Vec::with_capacity(values.len() + 1);
        column.push((v, 1.0));
        for (pos, &u) in p.unknown().iter().enumerate() {
            if values[pos] != 0.0 {
                column.push((u, values[pos]));
            }
        }
        column.sort_unstable_by_key(|&(r, _)| r);
        Ok(column)
    });
    let columns = collect_columns(l.n(), &centers, results)?;
    Ok(BasisMatrix::from_parts(
        BasisMode::Lagrange,
        l.n(),
        centers,
        columns,
        Vec::new(),
        Vec::new(),
    ))
}

/// Computes the local Lagrange basis from one neighborhood per known center
/// (aligned with `p.known()`). Columns are an independent parallel map.
pub fn compute_local_basis(
    l: &Laplacian,
    p: &Partition,
    nbhds: &[Neighborhood],
    cfg: &SolverConfig,
) -> Result<BasisMatrix, BasisError> {
    check_sizes(l, p)?;
    let centers = p.known().to_vec();
    if nbhds.len() != centers.len() {
        return Err(BasisError::NeighborhoodCountMismatch {
            got: nbhds.len(),
            expected: centers.len(),
        });
    }
    for (nb, &c) in nbhds.iter().zip(&centers) {
        if nb.center() != c {
            return Err(BasisError::NeighborhoodCenterMismatch {
                got: nb.center(),
                expected: c,
            });
        }
    }
    let results = map_indices(centers.len(), |c| local_lagrange_column(l, p, &nbhds[c], cfg));
    let columns = collect_columns(l.n(), &centers, results)?;
    let radii = nbhds.iter().map(Neighborhood::radius).collect();
    let supports = nbhds.iter().map(|nb| nb.members().to_vec()).collect();
    Ok(BasisMatrix::from_parts(
        BasisMode::Local,
        l.n(),
        centers,
        columns,
        radii,
        supports,
    ))
}

/// ℓ∞ discrepancies between a Lagrange and a local Lagrange column for the
/// same center: `inside` over Ω_v, `outside` as the tail of the full column
/// off Ω_v (where the local column is structurally zero).
pub fn basis_discrepancy(
    full: &BasisMatrix,
    local: &BasisMatrix,
    v: usize,
) -> Result<(f64, f64), BasisError> {
    if full.mode() != BasisMode::Lagrange {
        return Err(BasisError::WrongMode {
            expected: BasisMode::Lagrange,
        });
    }
    if local.mode() != BasisMode::Local {
        return Err(BasisError::WrongMode {
            expected: BasisMode::Local,
        });
    }
    if full.nrows() != local.nrows() {
        return Err(BasisError::RowCountMismatch {
            a: full.nrows(),
            b: local.nrows(),
        });
    }
    let cf = full.column_of_center(v).ok_or(BasisError::UnknownCenter(v))?;
    let cl = local
        .column_of_center(v)
        .ok_or(BasisError::UnknownCenter(v))?;
    let full_col = full.dense_column(cf);
    let local_col = local.dense_column(cl);
    let support = local.support(cl).expect("local basis stores supports");
    let mut inside = vec![false; full.nrows()];
    for &m in support {
        inside[m] = true;
    }
    let mut inside_err = 0.0f64;
    let mut outside_err = 0.0f64;
    for w in 0..full.nrows() {
        if inside[w] {
            inside_err = inside_err.max((local_col[w] - full_col[w]).abs());
        } else {
            outside_err = outside_err.max(full_col[w].abs());
        }
    }
    Ok((inside_err, outside_err))
}

/// Fraction of entries of the stacked basis matrix that exceed `threshold`
/// in magnitude. Threshold zero counts the stored structural nonzeros.
pub fn sparsity_ratio(b: &BasisMatrix, threshold: f64) -> Result<f64, BasisError> {
    if threshold < 0.0 {
        return Err(BasisError::NegativeThreshold(threshold));
    }
    let total = (b.nrows() * b.column_count()) as f64;
    let count = if threshold == 0.0 {
        b.storage().nnz()
    } else {
        b.storage().iter().filter(|&(_, _, v)| v.abs() > threshold).count()
    };
    Ok(count as f64 / total)
}

/// Result of the positive-definite ∞-norm bound check
/// `‖A⁻¹‖_∞ ≤ (√n + 1) / (2 λ_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfNormBound {
    pub inverse_inf_norm: f64,
    pub bound: f64,
    pub min_eigenvalue: f64,
    pub holds: bool,
}

/// Evaluates both sides of the bound for a symmetric positive-definite
/// matrix. `holds` allows 1e−12 slack for floating point; the inequality
/// itself is exact mathematics and must come out true for every valid input.
pub fn check_inf_norm_bound(a: &DMatrix<f64>) -> Result<InfNormBound, BasisError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(BasisError::NotSymmetric);
    }
    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                return Err(BasisError::NotSymmetric);
            }
        }
    }
    let eigen = SymmetricEigen::new(a.clone());
    let min_eigenvalue = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > 0.0) {
        return Err(BasisError::NotPositiveDefinite(min_eigenvalue));
    }
    let inverse = match a.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => a
            .clone()
            .lu()
            .try_inverse()
            .ok_or(BasisError::NotPositiveDefinite(min_eigenvalue))?,
    };
    let inverse_inf_norm = (0..n)
        .map(|i| (0..n).map(|j| inverse[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let bound = ((n as f64).sqrt() + 1.0) / (2.0 * min_eigenvalue);
    Ok(InfNormBound {
        inverse_inf_norm,
        bound,
        min_eigenvalue,
        holds: inverse_inf_norm <= bound + 1e-12,
    })
}
