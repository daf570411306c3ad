//! Wall-clock comparison of full Lagrange basis computation, serial local
//! basis computation, and single-vertex updates over a sweep of graph sizes.
//!
//! Absolute times are machine-dependent; reports are meant for ratio and
//! trend analysis only. Each measurement is the median of `repeats` runs.

use std::time::Instant;

use crate::basis::{compute_lagrange_basis, compute_local_basis};
use crate::dynamic::{ModelState, VertexStatus};
use crate::graph::{build_graph, graph_ball, min_pairwise_distance, normalized_laplacian, Metric, Partition};
use crate::par::run_serial;
use crate::solver::SolverConfig;

use super::report::{TimingReport, TimingRow};
use super::sphere::fibonacci_sphere;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    /// Fibonacci-sphere sizes to sweep; half of each graph is known.
    pub n_values: Vec<usize>,
    pub r_inner_multiplier: f64,
    pub r_outer_multiplier: f64,
    /// Runs per measurement; the median is reported.
    pub repeats: usize,
    pub solver: SolverConfig,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            n_values: vec![500, 1000, 2000, 4000],
            r_inner_multiplier: 3.0,
            r_outer_multiplier: 8.0,
            repeats: 3,
            solver: SolverConfig::default(),
        }
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

fn time_seconds<T>(f: impl FnOnce() -> T) -> (f64, T) {
    let start = Instant::now();
    let out = f();
    (start.elapsed().as_secs_f64(), out)
}

pub fn run_timing(cfg: &TimingConfig) -> Result<TimingReport, HarnessError> {
    if cfg.n_values.is_empty() || cfg.repeats == 0 {
        return Err(HarnessError::InvalidConfig(
            "timing needs at least one graph size and one repeat".into(),
        ));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let cloud = fibonacci_sphere(n)?;
        let metric = Metric::Euclidean;
        let theta = min_pairwise_distance(&cloud, &metric)?;
        let r_inner = cfg.r_inner_multiplier * theta;
        let r_outer = cfg.r_outer_multiplier * theta;
        let known: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
        let graph = build_graph(&cloud, &metric, r_inner)?;
        let laplacian = normalized_laplacian(&graph)?;
        let partition = Partition::from_known(n, known.iter().copied())?;

        let mut t_lagrange = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let (t, basis) = time_seconds(|| {
                compute_lagrange_basis(&laplacian, &partition, &cfg.solver)
            });
            basis?;
            t_lagrange.push(t);
        }

        // The local basis is timed serially, neighborhood construction
        // included.
        let mut t_local = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let (t, result) = time_seconds(|| {
                run_serial(|| -> Result<_, HarnessError> {
                    let neighborhoods = partition
                        .known()
                        .iter()
                        .map(|&v| graph_ball(&graph, v, r_outer, &partition))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(compute_local_basis(
                        &laplacian,
                        &partition,
                        &neighborhoods,
                        &cfg.solver,
                    )?)
                })
            });
            result?;
            t_local.push(t);
        }

        // Insertion point: between vertex 0 and its nearest neighbor,
        // projected back to the sphere, so it lands inside the lattice.
        let state = ModelState::build(
            cloud.clone(),
            metric.clone(),
            r_inner,
            r_outer,
            known.iter().copied(),
            &cfg.solver,
        )?;
        let (&(nn, _), p0) = (
            graph
                .neighbors(0)
                .iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("connected graph"),
            cloud.point(0),
        );
        let pn = cloud.point(nn);
        let mut mid: Vec<f64> = p0.iter().zip(pn).map(|(a, b)| 0.58 * a + 0.42 * b).collect();
        let norm: f64 = mid.iter().map(|c| c * c).sum::<f64>().sqrt();
        mid.iter_mut().for_each(|c| *c /= norm);

        // Updates are timed serially as well, so the update-to-local ratio
        // compares the same execution mode.
        let mut t_update = Vec::with_capacity(cfg.repeats);
        let mut affected = 0usize;
        for _ in 0..cfg.repeats {
            let (t, result) = time_seconds(|| {
                run_serial(|| state.insert(mid.clone(), None, VertexStatus::Known, &cfg.solver))
            });
            let (_, delta) = result?;
            affected = delta.affected_centers.len();
            t_update.push(t);
        }

        rows.push(TimingRow {
            n,
            known_count: partition.known().len(),
            edge_count: graph.edges().len(),
            t_lagrange_s: median(t_lagrange),
            t_local_serial_s: median(t_local),
            t_update_s: median(t_update),
            update_affected_centers: affected,
        });
    }
    Ok(TimingReport {
        r_inner_multiplier: cfg.r_inner_multiplier,
        r_outer_multiplier: cfg.r_outer_multiplier,
        repeats: cfg.repeats,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_reports_positive_times() {
        let cfg = TimingConfig {
            n_values: vec![40, 80],
            repeats: 1,
            ..TimingConfig::default()
        };
        let report = run_timing(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!(row.t_lagrange_s > 0.0);
            assert!(row.t_local_serial_s > 0.0);
            assert!(row.t_update_s > 0.0);
            assert!(row.update_affected_centers > 0);
        }
    }
}
