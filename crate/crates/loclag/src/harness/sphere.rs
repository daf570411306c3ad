//! Sphere experiments: Fibonacci-lattice sampling and the convergence sweep
//! over inner and outer radii.

use crate::basis::{basis_discrepancy, compute_lagrange_basis, compute_local_basis, sparsity_ratio};
use crate::graph::{build_graph, graph_ball, normalized_laplacian, GraphError, Metric, Partition, PointCloud};
use crate::interp::{mse, quasi_interpolate, SignalData};
use crate::solver::SolverConfig;

use super::report::{SphereConvergenceReport, SphereRow};
use super::HarnessError;

/// `n` points on S² at the Fibonacci (golden-angle) lattice: point `i` sits
/// at height z = 1 − (2i+1)/n and azimuth i·π(3−√5). Distances between the
/// points are chordal (Euclidean in ℝ³).
pub fn fibonacci_sphere(n: usize) -> Result<PointCloud, HarnessError> {
    if n < 2 {
        return Err(HarnessError::TooFewPoints(n));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    Ok(PointCloud::new(points, None)?)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SphereConvergenceConfig {
    pub n: usize,
    /// Every `unknown_stride`-th point (by index) is treated as unknown.
    pub unknown_stride: usize,
    /// Inner radii as multiples of θ.
    pub r_inner_multipliers: Vec<f64>,
    /// Outer radii as multiples of θ.
    pub r_outer_multipliers: Vec<f64>,
    /// Number of centers sampled for the ℓ∞ basis discrepancy.
    pub discrepancy_sample: usize,
    pub solver: SolverConfig,
}

impl Default for SphereConvergenceConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            unknown_stride: 3,
            r_inner_multipliers: vec![2.0, 3.0, 4.0],
            r_outer_multipliers: vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            discrepancy_sample: 24,
            solver: SolverConfig::default(),
        }
    }
}

impl SphereConvergenceConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.n < 2 {
            return Err(HarnessError::TooFewPoints(self.n));
        }
        if self.unknown_stride < 2 {
            return Err(HarnessError::InvalidConfig(
                "unknown_stride must be at least 2 so both vertex classes are nonempty".into(),
            ));
        }
        if self.r_inner_multipliers.is_empty() || self.r_outer_multipliers.is_empty() {
            return Err(HarnessError::InvalidConfig("radius sweeps must be nonempty".into()));
        }
        if self.discrepancy_sample == 0 {
            return Err(HarnessError::InvalidConfig("discrepancy_sample must be positive".into()));
        }
        Ok(())
    }
}

/// Evenly strided sample of `k` items from `0..len`.
fn sample_positions(len: usize, k: usize) -> Vec<usize> {
    let k = k.min(len).max(1);
    (0..k).map(|i| i * len / k).collect()
}

/// Constant-function quasi-interpolation MSE at the unknown vertices, basis
/// ℓ∞ discrepancies over sampled centers, and sparsity ratios, for each
/// (R_i, R_o) pair of the sweep.
pub fn run_sphere_convergence(
    cfg: &SphereConvergenceConfig,
) -> Result<SphereConvergenceReport, HarnessError> {
    cfg.validate()?;
    let cloud = fibonacci_sphere(cfg.n)?;
    let metric = Metric::Euclidean;
    let n = cfg.n;
    let unknown: Vec<usize> = (0..n).filter(|i| i % cfg.unknown_stride == 0).collect();
    let known: Vec<usize> = (0..n).filter(|i| i % cfg.unknown_stride != 0).collect();
    let partition = Partition::from_sets(n, known, unknown)?;

    let theta = crate::graph::min_pairwise_distance(&cloud, &metric)?;
    let mut rows = Vec::new();
    for &ri_mult in &cfg.r_inner_multipliers {
        let graph = match build_graph(&cloud, &metric, ri_mult * theta) {
            Ok(g) => g,
            Err(GraphError::Disconnected(sizes)) => {
                // failed cell, not fatal: keep a row per R_o with the reason
                for &ro_mult in &cfg.r_outer_multipliers {
                    rows.push(SphereRow {
                        n,
                        r_inner_multiple: ri_mult,
                        r_outer_multiple: ro_mult,
                        theta,
                        status: format!("disconnected({sizes:?})"),
                        mse_lagrange: None,
                        mse_local: None,
                        discrepancy_inside: None,
                        discrepancy_outside: None,
                        sparsity_lagrange: None,
                        sparsity_local: None,
                    });
                }
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let laplacian = normalized_laplacian(&graph)?;
        let lagrange = compute_lagrange_basis(&laplacian, &partition, &cfg.solver)?;
        let ones = SignalData::new(&partition, vec![1.0; partition.known().len()], None)?;
        let truth = vec![1.0; n];
        let predicted = quasi_interpolate(&lagrange, &ones)?;
        let mse_lagrange = mse(&predicted, &truth, partition.unknown())?;
        let sparsity_lagrange = sparsity_ratio(&lagrange, 0.0)?;
        let sampled: Vec<usize> = sample_positions(partition.known().len(), cfg.discrepancy_sample)
            .into_iter()
            .map(|pos| partition.known()[pos])
            .collect();

        for &ro_mult in &cfg.r_outer_multipliers {
            let r_outer = ro_mult * theta;
            let neighborhoods = partition
                .known()
                .iter()
                .map(|&v| graph_ball(&graph, v, r_outer, &partition))
                .collect::<Result<Vec<_>, _>>()?;
            let local = compute_local_basis(&laplacian, &partition, &neighborhoods, &cfg.solver)?;
            let predicted = quasi_interpolate(&local, &ones)?;
            let mse_local = mse(&predicted, &truth, partition.unknown())?;
            let sparsity_local = sparsity_ratio(&local, 0.0)?;
            let mut inside = 0.0f64;
            let mut outside = 0.0f64;
            for &v in &sampled {
                let (i, o) = basis_discrepancy(&lagrange, &local, v)?;
                inside = inside.max(i);
                outside = outside.max(o);
            }
            rows.push(SphereRow {
                n,
                r_inner_multiple: ri_mult,
                r_outer_multiple: ro_mult,
                theta,
                status: "ok".into(),
                mse_lagrange: Some(mse_lagrange),
                mse_local: Some(mse_local),
                discrepancy_inside: Some(inside),
                discrepancy_outside: Some(outside),
                sparsity_lagrange: Some(sparsity_lagrange),
                sparsity_local: Some(sparsity_local),
            });
        }
    }
    Ok(SphereConvergenceReport {
        n,
        unknown_stride: cfg.unknown_stride,
        discrepancy_sample: cfg.discrepancy_sample,
        rows,
    })
}
