//! `loclag` command line: graph construction, basis computation and
//! comparison, quasi-interpolation, incremental insertion, and the
//! experiment harness.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use loclag::dynamic::{ModelState, VertexStatus};
use loclag::graph::{build_graph, graph_ball, normalized_laplacian, Metric, Partition};
use loclag::harness::{
    run_energy_cv, run_sphere_convergence, run_timing, EnergyCvConfig, ExperimentReport,
    ReportFormat, SphereConvergenceConfig, TimingConfig,
};
use loclag::interp::SignalData;
use loclag::io::{
    graph_hash, read_basis, read_dataset_csv, read_graph, read_json, read_points_csv, write_basis,
    write_graph, write_json, write_predictions_csv, ColumnMapping,
};
use loclag::solver::{SolveMethod, SolverConfig};
use loclag::{basis_discrepancy, compute_lagrange_basis, compute_local_basis, quasi_interpolate};

#[derive(Parser)]
#[command(name = "loclag", version, about = "Local Lagrange bases on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed override for experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Least-squares backend.
    #[arg(long, global = true, value_enum)]
    solver: Option<SolverArg>,
    /// Normal-equation residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output path (file or prefix, subcommand dependent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file for experiment subcommands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Lsqr,
}

impl Cli {
    fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(arg) = self.solver {
            cfg.method = match arg {
                SolverArg::Direct => SolveMethod::NormalEquationsDirect,
                SolverArg::Lsqr => SolveMethod::IterativeLsqr,
            };
        }
        if let Some(tol) = self.tol {
            cfg.tolerance = tol;
        }
        cfg
    }

    fn out(&self) -> Result<&Path> {
        self.out.as_deref().context("--out is required")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Graph construction and inspection.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// Basis computation and comparison.
    Basis {
        #[command(subcommand)]
        cmd: BasisCmd,
    },
    /// Quasi-interpolate data over a stored basis.
    Interpolate(InterpolateArgs),
    /// Insert a new point and refresh the affected basis columns.
    Insert(InsertArgs),
    /// Experiment harness.
    Exp {
        #[command(subcommand)]
        cmd: ExpCmd,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Build a graph from a points CSV and write `<out>.edges.csv` plus
    /// `<out>.graph.json`.
    Build(GraphBuildArgs),
}

#[derive(Args)]
struct GraphBuildArgs {
    /// Points CSV with a header row.
    #[arg(long)]
    points: PathBuf,
    /// Name of the id column, when present.
    #[arg(long)]
    id_col: Option<String>,
    /// Comma-separated feature columns (default: all numeric columns).
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Inner radius: connect points at distance < r_inner.
    #[arg(long)]
    r_inner: f64,
    /// Metric: euclidean (default) or weighted ℓp.
    #[arg(long, default_value = "euclidean")]
    metric: String,
    /// Minkowski order for --metric minkowski.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Comma-separated per-feature weights for --metric minkowski.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum BasisCmd {
    /// Compute a Lagrange or local basis over a stored graph and write
    /// `<out>.basis.csv` plus `<out>.basis.json`.
    Compute(BasisComputeArgs),
    /// Compare two stored bases center by center.
    Diff(BasisDiffArgs),
}

#[derive(Args)]
struct BasisComputeArgs {
    /// Graph file prefix (as written by `graph build`).
    #[arg(long)]
    graph: PathBuf,
    /// Unknown vertices: `every:K`, a comma list of indices, or `@file`
    /// with one index per line.
    #[arg(long)]
    unknown: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Local)]
    mode: ModeArg,
    /// Outer (graph-distance) radius for local mode.
    #[arg(long)]
    r_outer: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lagrange,
    Local,
}

#[derive(Args)]
struct BasisDiffArgs {
    /// Prefix of the Lagrange basis.
    #[arg(long)]
    lagrange: PathBuf,
    /// Prefix of the local basis.
    #[arg(long)]
    local: PathBuf,
    /// Center vertex to compare (default: every shared center).
    #[arg(long)]
    center: Option<usize>,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Points CSV the basis was built from (for vertex ids).
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    id_col: Option<String>,
    /// Basis file prefix.
    #[arg(long)]
    basis: PathBuf,
    /// CSV `vertex_id,value` with one row per known vertex.
    #[arg(long)]
    data: PathBuf,
    /// Optional CSV `vertex_id,value` with ground truth at unknown vertices.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct InsertArgs {
    /// Points CSV of the current state.
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    id_col: Option<String>,
    /// Graph file prefix (provides the metric).
    #[arg(long)]
    graph: PathBuf,
    /// Unknown vertices of the current state (same syntax as basis compute).
    #[arg(long)]
    unknown: String,
    /// Single-row CSV with the new point (same feature columns).
    #[arg(long)]
    point: PathBuf,
    #[arg(long, value_enum)]
    status: StatusArg,
    /// Inner radius used when the graph was built.
    #[arg(long)]
    r_inner: f64,
    /// Outer radius for the local basis.
    #[arg(long)]
    r_outer: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatusArg {
    Known,
    Unknown,
}

#[derive(Subcommand)]
enum ExpCmd {
    /// Sphere convergence sweep (constant-function MSE, basis discrepancy,
    /// sparsity) over R_i and R_o.
    Sphere,
    /// Wall-clock comparison of Lagrange, serial local, and update times.
    Timing,
    /// Repeated k-fold cross-validation on a tabular dataset.
    EnergyCv(EnergyArgs),
}

#[derive(Args)]
struct EnergyArgs {
    /// Dataset CSV (UCI energy-efficiency layout or canonical headers).
    #[arg(long)]
    data: PathBuf,
    /// JSON column mapping (default: the UCI energy headers X1..X7/Y1/Y2).
    #[arg(long)]
    mapping: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Graph { cmd } => match cmd {
            GraphCmd::Build(args) => graph_build(&cli, args),
        },
        Command::Basis { cmd } => match cmd {
            BasisCmd::Compute(args) => basis_compute(&cli, args),
            BasisCmd::Diff(args) => basis_diff(args),
        },
        Command::Interpolate(args) => interpolate(&cli, args),
        Command::Insert(args) => insert(&cli, args),
        Command::Exp { cmd } => match cmd {
            ExpCmd::Sphere => exp_sphere(&cli),
            ExpCmd::Timing => exp_timing(&cli),
            ExpCmd::EnergyCv(args) => exp_energy(&cli, args),
        },
    }
}

fn parse_metric(args: &GraphBuildArgs) -> Result<Metric> {
    match args.metric.as_str() {
        "euclidean" => Ok(Metric::Euclidean),
        "minkowski" | "weighted-minkowski" => {
            let weights = args
                .weights
                .clone()
                .context("--weights is required for the minkowski metric")?;
            Ok(Metric::WeightedMinkowski { p: args.p, weights })
        }
        other => bail!("unknown metric `{other}`"),
    }
}

fn graph_build(cli: &Cli, args: &GraphBuildArgs) -> Result<()> {
    let parsed = read_points_csv(&args.points, args.id_col.as_deref(), args.features.as_deref())?;
    let metric = parse_metric(args)?;
    let graph = build_graph(&parsed.cloud, &metric, args.r_inner)?;
    let out = cli.out()?;
    write_graph(out, &graph, &metric)?;
    println!(
        "graph: {} vertices, {} edges, theta {:.6e}, rho_max {:.6e} -> {}",
        graph.vertex_count(),
        graph.edges().len(),
        graph.theta(),
        graph.rho_max(),
        out.display()
    );
    Ok(())
}

fn parse_unknown(spec: &str, n: usize) -> Result<Vec<usize>> {
    if let Some(k) = spec.strip_prefix("every:") {
        let k: usize = k.parse().context("bad stride in `every:K`")?;
        if k < 2 {
            bail!("stride must be at least 2");
        }
        return Ok((0..n).filter(|i| i % k == 0).collect());
    }
    if let Some(path) = spec.strip_prefix('@') {
        let body = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<usize>().context("bad index in unknown file"))
            .collect();
    }
    spec.split(',')
        .map(|tok| tok.trim().parse::<usize>().context("bad index in unknown list"))
        .collect()
}

fn basis_compute(cli: &Cli, args: &BasisComputeArgs) -> Result<()> {
    let (graph, _) = read_graph(&args.graph)?;
    let n = graph.vertex_count();
    let unknown = parse_unknown(&args.unknown, n)?;
    let known = (0..n).filter(|v| !unknown.contains(v));
    let partition = Partition::from_sets(n, known, unknown.iter().copied())?;
    let laplacian = normalized_laplacian(&graph)?;
    let solver = cli.solver_config();
    let basis = match args.mode {
        ModeArg::Lagrange => compute_lagrange_basis(&laplacian, &partition, &solver)?,
        ModeArg::Local => {
            let r_outer = args.r_outer.context("--r-outer is required for local mode")?;
            let nbhds = partition
                .known()
                .iter()
                .map(|&v| graph_ball(&graph, v, r_outer, &partition))
                .collect::<Result<Vec<_>, _>>()?;
            compute_local_basis(&laplacian, &partition, &nbhds, &solver)?
        }
    };
    let out = cli.out()?;
    write_basis(out, &basis, &solver, &graph_hash(&graph))?;
    println!(
        "basis: {:?} mode, {} columns, {} stored entries -> {}",
        basis.mode(),
        basis.column_count(),
        basis.storage().nnz(),
        out.display()
    );
    Ok(())
}

fn basis_diff(args: &BasisDiffArgs) -> Result<()> {
    let (lagrange, _) = read_basis(&args.lagrange)?;
    let (local, _) = read_basis(&args.local)?;
    let centers: Vec<usize> = match args.center {
        Some(v) => vec![v],
        None => local
            .centers()
            .iter()
            .copied()
            .filter(|&v| lagrange.column_of_center(v).is_some())
            .collect(),
    };
    let mut worst_inside = 0.0f64;
    let mut worst_outside = 0.0f64;
    for &v in &centers {
        let (inside, outside) = basis_discrepancy(&lagrange, &local, v)?;
        println!("center {v}: inside {inside:.6e}, outside {outside:.6e}");
        worst_inside = worst_inside.max(inside);
        worst_outside = worst_outside.max(outside);
    }
    if centers.len() > 1 {
        println!("max over {} centers: inside {worst_inside:.6e}, outside {worst_outside:.6e}", centers.len());
    }
    Ok(())
}

fn read_value_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_string();
        let value: f64 = record
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .with_context(|| format!("non-numeric value for id {id}"))?;
        out.push((id, value));
    }
    Ok(out)
}

fn interpolate(cli: &Cli, args: &InterpolateArgs) -> Result<()> {
    let parsed = read_points_csv(&args.points, args.id_col.as_deref(), None)?;
    let (basis, _) = read_basis(&args.basis)?;
    let n = basis.nrows();
    if parsed.cloud.len() != n {
        bail!(
            "points file has {} rows but the basis covers {} vertices",
            parsed.cloud.len(),
            n
        );
    }
    let index_of = |id: &str| -> Result<usize> {
        parsed
            .cloud
            .ids()
            .iter()
            .position(|x| x == id)
            .with_context(|| format!("unknown vertex id `{id}`"))
    };
    let partition = Partition::from_known(n, basis.centers().iter().copied())?;
    let mut known_values = vec![f64::NAN; partition.known().len()];
    for (id, value) in read_value_csv(&args.data)? {
        let v = index_of(&id)?;
        let pos = partition
            .known()
            .binary_search(&v)
            .map_err(|_| anyhow::anyhow!("vertex {id} is not a known center of this basis"))?;
        known_values[pos] = value;
    }
    if known_values.iter().any(|v| v.is_nan()) {
        bail!("data file must provide a value for every known vertex");
    }
    let data = SignalData::new(&partition, known_values, None)?;
    let predicted_all = quasi_interpolate(&basis, &data)?;
    let unknown = partition.unknown().to_vec();
    let predicted: Vec<f64> = unknown.iter().map(|&v| predicted_all[v]).collect();
    let truth = match &args.truth {
        Some(path) => {
            let mut values = vec![f64::NAN; unknown.len()];
            for (id, value) in read_value_csv(path)? {
                let v = index_of(&id)?;
                if let Ok(pos) = unknown.binary_search(&v) {
                    values[pos] = value;
                }
            }
            if values.iter().any(|v| v.is_nan()) {
                bail!("truth file must cover every unknown vertex");
            }
            Some(values)
        }
        None => None,
    };
    let out = cli.out()?;
    write_predictions_csv(out, parsed.cloud.ids(), &unknown, &predicted, truth.as_deref())?;
    println!("wrote {} predictions -> {}", unknown.len(), out.display());
    Ok(())
}

fn insert(cli: &Cli, args: &InsertArgs) -> Result<()> {
    let parsed = read_points_csv(&args.points, args.id_col.as_deref(), None)?;
    let (_, metric) = read_graph(&args.graph)?;
    let n = parsed.cloud.len();
    let unknown = parse_unknown(&args.unknown, n)?;
    let known: Vec<usize> = (0..n).filter(|v| !unknown.contains(v)).collect();
    let solver = cli.solver_config();
    let state = ModelState::build(
        parsed.cloud,
        metric,
        args.r_inner,
        args.r_outer,
        known,
        &solver,
    )?;
    let new_points = read_points_csv(&args.point, args.id_col.as_deref(), Some(&parsed.feature_names))?;
    if new_points.cloud.len() != 1 {
        bail!("--point file must contain exactly one row");
    }
    let status = match args.status {
        StatusArg::Known => VertexStatus::Known,
        StatusArg::Unknown => VertexStatus::Unknown,
    };
    let started = std::time::Instant::now();
    let (_, delta) = state.insert(
        new_points.cloud.point(0).to_vec(),
        Some(new_points.cloud.id(0).to_string()),
        status,
        &solver,
    )?;
    let elapsed = started.elapsed().as_secs_f64();
    let payload = serde_json::json!({
        "new_vertex": delta.new_vertex,
        "new_edges": delta.new_edges,
        "affected_center_count": delta.affected_centers.len(),
        "affected_centers": delta.affected_centers,
        "seconds": elapsed,
    });
    match &cli.out {
        Some(path) => {
            write_json(path, &payload)?;
            println!("wrote update delta -> {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&payload)?),
    }
    Ok(())
}

fn emit(cli: &Cli, report: &ExperimentReport) -> Result<()> {
    let out = cli.out()?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    report.emit(ReportFormat::Csv, &csv_path)?;
    report.emit(ReportFormat::Json, &json_path)?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn load_config<T: serde::de::DeserializeOwned + Default>(cli: &Cli) -> Result<T> {
    match &cli.config {
        Some(path) => Ok(read_json(path)?),
        None => Ok(T::default()),
    }
}

fn exp_sphere(cli: &Cli) -> Result<()> {
    let mut cfg: SphereConvergenceConfig = load_config(cli)?;
    cfg.solver = apply_solver_overrides(cli, cfg.solver);
    let report = run_sphere_convergence(&cfg)?;
    emit(cli, &ExperimentReport::SphereConvergence(report))
}

fn exp_timing(cli: &Cli) -> Result<()> {
    let mut cfg: TimingConfig = load_config(cli)?;
    cfg.solver = apply_solver_overrides(cli, cfg.solver);
    let report = run_timing(&cfg)?;
    emit(cli, &ExperimentReport::Timing(report))
}

fn exp_energy(cli: &Cli, args: &EnergyArgs) -> Result<()> {
    let mut cfg: EnergyCvConfig = load_config(cli)?;
    cfg.solver = apply_solver_overrides(cli, cfg.solver);
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mapping = match &args.mapping {
        Some(path) => read_json::<ColumnMapping>(path)?,
        None => ColumnMapping::energy_default(),
    };
    let dataset = read_dataset_csv(&args.data, &mapping)?;
    let report = run_energy_cv(&cfg, &dataset)?;
    for row in &report.rows {
        println!(
            "R_o {:>4}: {:<14} lagrange {:.4} ± {:.4}   local {:.4} ± {:.4}",
            row.r_outer, row.target, row.lagrange_mean, row.lagrange_std, row.local_mean, row.local_std
        );
    }
    emit(cli, &ExperimentReport::EnergyCv(report))
}

fn apply_solver_overrides(cli: &Cli, mut cfg: SolverConfig) -> SolverConfig {
    if let Some(arg) = cli.solver {
        cfg.method = match arg {
            SolverArg::Direct => SolveMethod::NormalEquationsDirect,
            SolverArg::Lsqr => SolveMethod::IterativeLsqr,
        };
    }
    if let Some(tol) = cli.tol {
        cfg.tolerance = tol;
    }
    cfg
}
