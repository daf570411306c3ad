//! CSV and JSON persistence: point clouds, graphs, basis matrices, and
//! prediction tables.
//!
//! All writers emit fields in a fixed order and format floats with the
//! shortest round-trip representation, so identical in-memory values produce
//! byte-identical files.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::basis::{BasisMatrix, BasisMode};
use crate::graph::{Edge, Graph, GraphError, Metric, PointCloud};
use crate::solver::SolverConfig;
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io error on {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("non-numeric cell `{value}` in column `{column}`, row {row}")]
    NonNumericCell {
        column: String,
        row: usize,
        value: String,
    },
    #[error("CSV has no data rows")]
    EmptyCsv,
    #[error("basis triplet references column {col} but the sidecar lists {ncols} centers")]
    TripletOutOfRange { col: usize, ncols: usize },
}

fn open(path: &Path) -> Result<std::fs::File, IoError> {
    std::fs::File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn create(path: &Path) -> Result<std::fs::File, IoError> {
    std::fs::File::create(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// A parsed points CSV: the feature columns as a cloud, plus every other
/// column passed through untouched as strings.
#[derive(Debug, Clone)]
pub struct PointsCsv {
    pub cloud: PointCloud,
    pub feature_names: Vec<String>,
    pub extras: Vec<(String, Vec<String>)>,
}

/// Reads a points CSV with a header row. `id_column` names the id column
/// when present; `feature_columns` selects and orders the feature set
/// (default: every column other than the id that parses as numeric in the
/// first row). Non-feature columns are passed through untouched.
pub fn read_points_csv(
    path: &Path,
    id_column: Option<&str>,
    feature_columns: Option<&[String]>,
) -> Result<PointsCsv, IoError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(IoError::EmptyCsv);
    }
    let col_index = |name: &str| -> Result<usize, IoError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::MissingColumn(name.to_string()))
    };
    let id_idx = match id_column {
        Some(name) => Some(col_index(name)?),
        None => None,
    };
    let feature_names: Vec<String> = match feature_columns {
        Some(cols) => cols.to_vec(),
        None => headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != id_idx)
            .filter(|&(i, _)| rows[0].get(i).is_some_and(|v| v.trim().parse::<f64>().is_ok()))
            .map(|(_, h)| h.clone())
            .collect(),
    };
    let feature_idx: Vec<usize> = feature_names
        .iter()
        .map(|name| col_index(name))
        .collect::<Result<_, _>>()?;

    let mut points = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let mut point = Vec::with_capacity(feature_idx.len());
        for (&i, name) in feature_idx.iter().zip(&feature_names) {
            let raw = row.get(i).unwrap_or("");
            let value: f64 = raw.trim().parse().map_err(|_| IoError::NonNumericCell {
                column: name.clone(),
                row: r,
                value: raw.to_string(),
            })?;
            point.push(value);
        }
        points.push(point);
    }
    let ids = id_idx.map(|i| {
        rows.iter()
            .map(|row| row.get(i).unwrap_or("").to_string())
            .collect()
    });
    let cloud = PointCloud::new(points, ids)?;
    let extras = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != id_idx && !feature_idx.contains(&i))
        .map(|(i, h)| {
            (
                h.clone(),
                rows.iter().map(|row| row.get(i).unwrap_or("").to_string()).collect(),
            )
        })
        .collect();
    Ok(PointsCsv {
        cloud,
        feature_names,
        extras,
    })
}

/// Sidecar metadata stored next to a graph edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub n: usize,
    pub theta: f64,
    pub rho_max: f64,
    pub metric: Metric,
}

/// Writes `<prefix>.edges.csv` (`i,j,length`) and `<prefix>.graph.json`.
pub fn write_graph(prefix: &Path, g: &Graph, metric: &Metric) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(create(&suffixed(prefix, ".edges.csv"))?);
    w.write_record(["i", "j", "length"])?;
    for e in g.edges() {
        w.write_record([e.i.to_string(), e.j.to_string(), format!("{}", e.length)])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: prefix.display().to_string(),
        source,
    })?;
    let sidecar = GraphSidecar {
        n: g.vertex_count(),
        theta: g.theta(),
        rho_max: g.rho_max(),
        metric: metric.clone(),
    };
    write_json(&suffixed(prefix, ".graph.json"), &sidecar)
}

/// Reads a graph written by [`write_graph`].
pub fn read_graph(prefix: &Path) -> Result<(Graph, Metric), IoError> {
    let sidecar: GraphSidecar = read_json(&suffixed(prefix, ".graph.json"))?;
    let mut reader = csv::Reader::from_reader(open(&suffixed(prefix, ".edges.csv"))?);
    let mut edges = Vec::new();
    for row in reader.deserialize() {
        let (i, j, length): (usize, usize, f64) = row?;
        edges.push(Edge { i, j, length });
    }
    let g = Graph::from_edges(sidecar.n, edges, sidecar.theta)?;
    Ok((g, sidecar.metric))
}

fn suffixed(prefix: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    std::path::PathBuf::from(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n").map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let mut buf = String::new();
    open(path)?
        .read_to_string(&mut buf)
        .map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
    Ok(serde_json::from_str(&buf)?)
}

/// Canonical content hash of a graph, recorded in basis sidecars so a basis
/// file can be matched to the graph it was computed on.
pub fn graph_hash(g: &Graph) -> String {
    let mut hasher = Sha256::new();
    hasher.update(g.vertex_count().to_le_bytes());
    hasher.update(g.theta().to_le_bytes());
    for e in g.edges() {
        hasher.update(e.i.to_le_bytes());
        hasher.update(e.j.to_le_bytes());
        hasher.update(e.length.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sidecar metadata stored next to a basis triplet file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSidecar {
    pub mode: BasisMode,
    pub nrows: usize,
    pub centers: Vec<usize>,
    /// Per-column neighborhood radius; empty in Lagrange mode.
    pub radii: Vec<f64>,
    /// Per-column neighborhood members; empty in Lagrange mode.
    pub supports: Vec<Vec<usize>>,
    pub solver: SolverConfig,
    pub graph_hash: String,
}

/// Writes `<prefix>.basis.csv` (`row,col,value` triplets) and
/// `<prefix>.basis.json`.
pub fn write_basis(
    prefix: &Path,
    b: &BasisMatrix,
    solver: &SolverConfig,
    graph_hash_hex: &str,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(create(&suffixed(prefix, ".basis.csv"))?);
    w.write_record(["row", "col", "value"])?;
    for (row, col, value) in b.storage().iter() {
        w.write_record([row.to_string(), col.to_string(), format!("{value}")])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: prefix.display().to_string(),
        source,
    })?;
    let sidecar = BasisSidecar {
        mode: b.mode(),
        nrows: b.nrows(),
        centers: b.centers().to_vec(),
        radii: b.radii().to_vec(),
        supports: b.supports().to_vec(),
        solver: *solver,
        graph_hash: graph_hash_hex.to_string(),
    };
    write_json(&suffixed(prefix, ".basis.json"), &sidecar)
}

/// Reads a basis written by [`write_basis`].
pub fn read_basis(prefix: &Path) -> Result<(BasisMatrix, BasisSidecar), IoError> {
    let sidecar: BasisSidecar = read_json(&suffixed(prefix, ".basis.json"))?;
    let mut reader = csv::Reader::from_reader(open(&suffixed(prefix, ".basis.csv"))?);
    let mut triplets = Vec::new();
    for row in reader.deserialize() {
        let (r, c, v): (usize, usize, f64) = row?;
        if c >= sidecar.centers.len() {
            return Err(IoError::TripletOutOfRange {
                col: c,
                ncols: sidecar.centers.len(),
            });
        }
        triplets.push((r, c, v));
    }
    let storage = CscMatrix::from_triplets(sidecar.nrows, sidecar.centers.len(), triplets);
    let basis = BasisMatrix::from_parts(
        sidecar.mode,
        sidecar.nrows,
        sidecar.centers.clone(),
        storage,
        sidecar.radii.clone(),
        sidecar.supports.clone(),
    );
    Ok((basis, sidecar))
}

/// Writes predictions as `vertex_id,predicted[,truth,sq_error]`.
pub fn write_predictions_csv(
    path: &Path,
    ids: &[String],
    vertices: &[usize],
    predicted: &[f64],
    truth: Option<&[f64]>,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    if truth.is_some() {
        w.write_record(["vertex_id", "predicted", "truth", "sq_error"])?;
    } else {
        w.write_record(["vertex_id", "predicted"])?;
    }
    for (k, &v) in vertices.iter().enumerate() {
        match truth {
            Some(t) => {
                let err = predicted[k] - t[k];
                w.write_record([
                    ids[v].clone(),
                    format!("{}", predicted[k]),
                    format!("{}", t[k]),
                    format!("{}", err * err),
                ])?;
            }
            None => {
                w.write_record([ids[v].clone(), format!("{}", predicted[k])])?;
            }
        }
    }
    w.flush().map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Column-name mapping from canonical names to the headers of a concrete
/// CSV file (the distributed UCI file uses X1..X8/Y1/Y2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    /// (canonical feature name, CSV header) in feature order.
    pub features: Vec<(String, String)>,
    /// (canonical target name, CSV header).
    pub targets: Vec<(String, String)>,
}

impl ColumnMapping {
    /// The seven building parameters and two loads of the energy-efficiency
    /// data set, keyed by the UCI distribution headers. The glazing-area
    /// distribution column (X8) is deliberately absent.
    pub fn energy_default() -> Self {
        let features = [
            ("Relative Compactness", "X1"),
            ("Surface Area", "X2"),
            ("Wall Area", "X3"),
            ("Roof Area", "X4"),
            ("Overall Height", "X5"),
            ("Orientation", "X6"),
            ("Glazing Area", "X7"),
        ];
        let targets = [("Heating Load", "Y1"), ("Cooling Load", "Y2")];
        ColumnMapping {
            features: features
                .iter()
                .map(|&(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            targets: targets
                .iter()
                .map(|&(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }
}

/// A numeric table of named feature and target columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// Column-major feature values.
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<(String, Vec<f64>)>,
    pub n_rows: usize,
}

/// Reads a dataset CSV through a column mapping. Headers may carry either
/// the mapped CSV names or the canonical names directly.
pub fn read_dataset_csv(path: &Path, mapping: &ColumnMapping) -> Result<Dataset, IoError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(IoError::EmptyCsv);
    }
    let locate = |canonical: &str, csv_name: &str| -> Result<usize, IoError> {
        headers
            .iter()
            .position(|h| h == csv_name || h == canonical)
            .ok_or_else(|| IoError::MissingColumn(format!("{canonical} ({csv_name})")))
    };
    let parse_column = |idx: usize, name: &str| -> Result<Vec<f64>, IoError> {
        rows.iter()
            .enumerate()
            .map(|(r, row)| {
                let raw = row.get(idx).unwrap_or("");
                raw.trim().parse::<f64>().map_err(|_| IoError::NonNumericCell {
                    column: name.to_string(),
                    row: r,
                    value: raw.to_string(),
                })
            })
            .collect()
    };
    let mut feature_names = Vec::new();
    let mut features = Vec::new();
    for (canonical, csv_name) in &mapping.features {
        let idx = locate(canonical, csv_name)?;
        features.push(parse_column(idx, canonical)?);
        feature_names.push(canonical.clone());
    }
    let mut targets = Vec::new();
    for (canonical, csv_name) in &mapping.targets {
        let idx = locate(canonical, csv_name)?;
        targets.push((canonical.clone(), parse_column(idx, canonical)?));
    }
    Ok(Dataset {
        feature_names,
        features,
        targets,
        n_rows: rows.len(),
    })
}

/// Lookup helper over extras returned by [`read_points_csv`].
pub fn extras_as_numeric(
    extras: &[(String, Vec<String>)],
) -> Result<HashMap<String, Vec<f64>>, IoError> {
    let mut out = HashMap::new();
    for (name, values) in extras {
        let parsed: Result<Vec<f64>, IoError> = values
            .iter()
            .enumerate()
            .map(|(row, raw)| {
                raw.trim().parse::<f64>().map_err(|_| IoError::NonNumericCell {
                    column: name.clone(),
                    row,
                    value: raw.clone(),
                })
            })
            .collect();
        if let Ok(parsed) = parsed {
            out.insert(name.clone(), parsed);
        }
    }
    Ok(out)
}
