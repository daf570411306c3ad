//! Weighted graphs built from point-cloud data, the normalized Laplacian,
//! graph-distance neighborhoods, and structural-assumption checks.
//!
//! A graph connects every pair of points closer than an inner radius; edge
//! lengths are the point distances and edge weights their reciprocals. All
//! types here are immutable after construction and safe to share across
//! threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("point cloud is empty")]
    EmptyPointCloud,
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("points {i} and {j} are identical (or at metric distance zero)")]
    DuplicatePoints { i: usize, j: usize },
    #[error("id list has {got} entries for {expected} points")]
    IdCountMismatch { got: usize, expected: usize },
    #[error("duplicate vertex id `{0}`")]
    DuplicateId(String),
    #[error("vector dimensions {x} and {y} do not match the metric")]
    MetricDimensionMismatch { x: usize, y: usize },
    #[error("Minkowski order p = {0} is below 1")]
    InvalidOrder(f64),
    #[error("metric weights must be nonnegative with at least one positive entry")]
    InvalidWeights,
    #[error("inner radius must be positive, got {0}")]
    InvalidInnerRadius(f64),
    #[error("ball radius must be positive, got {0}")]
    InvalidBallRadius(f64),
    #[error("graph needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("graph is disconnected: component sizes {0:?}")]
    Disconnected(Vec<usize>),
    #[error("edge ({i},{j}) has non-positive length {length}")]
    NonPositiveEdgeLength { i: usize, j: usize, length: f64 },
    #[error("edge endpoint {0} out of bounds for {1} vertices")]
    EdgeOutOfBounds(usize, usize),
    #[error("vertex {0} is isolated (zero weighted degree)")]
    IsolatedVertex(usize),
    #[error("vertex index {index} out of bounds for {n} vertices")]
    VertexOutOfBounds { index: usize, n: usize },
    #[error("known and unknown sets must be disjoint and cover 0..{n}")]
    InvalidPartition { n: usize },
    #[error("known vertex set is empty")]
    EmptyKnownSet,
}

/// A set of data points; one graph vertex per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    ids: Vec<String>,
    dim: usize,
}

impl PointCloud {
    /// Validates dimensions and id uniqueness. Ids default to the row index.
    /// Coordinate-identical points are rejected.
    pub fn new(points: Vec<Vec<f64>>, ids: Option<Vec<String>>) -> Result<Self, GraphError> {
        if points.is_empty() {
            return Err(GraphError::EmptyPointCloud);
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(GraphError::DimensionMismatch {
                index: 0,
                got: 0,
                expected: 1,
            });
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GraphError::DimensionMismatch {
                    index,
                    got: p.len(),
                    expected: dim,
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(GraphError::NonFiniteCoordinate { index });
            }
        }
        // Bitwise duplicate check; metric-distance-zero pairs are caught at
        // graph construction where a metric is available.
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
            if let Some(&first) = seen.get(&key) {
                return Err(GraphError::DuplicatePoints { i: first, j: index });
            }
            seen.insert(key, index);
        }
        let ids = match ids {
            Some(ids) => {
                if ids.len() != points.len() {
                    return Err(GraphError::IdCountMismatch {
                        got: ids.len(),
                        expected: points.len(),
                    });
                }
                let mut uniq = std::collections::HashSet::new();
                for id in &ids {
                    if !uniq.insert(id.clone()) {
                        return Err(GraphError::DuplicateId(id.clone()));
                    }
                }
                ids
            }
            None => (0..points.len()).map(|i| i.to_string()).collect(),
        };
        Ok(Self { points, ids, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Appends a point, revalidating invariants.
    pub fn with_point(&self, point: Vec<f64>, id: Option<String>) -> Result<Self, GraphError> {
        let mut points = self.points.clone();
        points.push(point);
        let mut ids = self.ids.clone();
        ids.push(id.unwrap_or_else(|| (points.len() - 1).to_string()));
        Self::new(points, Some(ids))
    }
}

/// Distance function between feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    /// (Σᵢ wᵢ |xᵢ − yᵢ|ᵖ)^(1/p) with p ≥ 1 and nonnegative weights, at least
    /// one of them positive.
    WeightedMinkowski { p: f64, weights: Vec<f64> },
}

impl Metric {
    /// Weighted ℓ1 metric, the variant used for tabular data.
    pub fn weighted_l1(weights: Vec<f64>) -> Self {
        Metric::WeightedMinkowski { p: 1.0, weights }
    }

    pub fn validate(&self, dim: usize) -> Result<(), GraphError> {
        match self {
            Metric::Euclidean => Ok(()),
            Metric::WeightedMinkowski { p, weights } => {
                if !p.is_finite() || *p < 1.0 {
                    return Err(GraphError::InvalidOrder(*p));
                }
                if weights.len() != dim {
                    return Err(GraphError::MetricDimensionMismatch {
                        x: dim,
                        y: weights.len(),
                    });
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || !weights.iter().any(|w| *w > 0.0)
                {
                    return Err(GraphError::InvalidWeights);
                }
                Ok(())
            }
        }
    }

    /// Distance between `x` and `y`. Symmetric; zero iff `x == y` when all
    /// weights are positive.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64, GraphError> {
        if x.len() != y.len() {
            return Err(GraphError::MetricDimensionMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        self.validate(x.len())?;
        Ok(match self {
            Metric::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::WeightedMinkowski { p, weights } => {
                let sum: f64 = x
                    .iter()
                    .zip(y)
                    .zip(weights)
                    .map(|((a, b), w)| w * (a - b).abs().powf(*p))
                    .sum();
                sum.powf(1.0 / p)
            }
        })
    }
}

/// Undirected edge stored once with `i < j`; the weight is `1 / length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

impl Edge {
    pub fn weight(&self) -> f64 {
        1.0 / self.length
    }
}

/// Finite connected weighted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
    theta: f64,
    rho_max: f64,
    max_degree: usize,
}

impl Graph {
    /// Assembles a graph from an edge list, verifying lengths, symmetry-free
    /// storage (`i < j`), and connectivity. `theta` is the smallest pairwise
    /// point distance of the originating cloud.
    pub fn from_edges(n: usize, mut edges: Vec<Edge>, theta: f64) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        for e in &mut edges {
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.i == e.j || e.j >= n {
                return Err(GraphError::EdgeOutOfBounds(e.j, n));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(GraphError::NonPositiveEdgeLength {
                    i: e.i,
                    j: e.j,
                    length: e.length,
                });
            }
        }
        edges.sort_unstable_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            adj[e.i].push((e.j, e.length));
            adj[e.j].push((e.i, e.length));
        }
        for list in &mut adj {
            list.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        }
        let components = component_sizes(&adj);
        if components.len() > 1 {
            return Err(GraphError::Disconnected(components));
        }
        let rho_max = edges.iter().map(|e| e.length).fold(0.0, f64::max);
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            n,
            edges,
            adj,
            theta,
            rho_max,
            max_degree,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `v` as (vertex, edge length), sorted by vertex.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Smallest pairwise point distance of the source cloud.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Longest edge length.
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Maximum vertex degree M.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Weighted degree (adjacency row sum) of every vertex.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            let w = e.weight();
            d[e.i] += w;
            d[e.j] += w;
        }
        d
    }

    /// Shortest-path distances from `source` to vertices within `limit`
    /// (edge lengths as costs). Unreached vertices hold `f64::INFINITY`.
    pub fn dijkstra(&self, source: usize, limit: f64) -> Vec<f64> {
        #[derive(PartialEq)]
        struct State {
            dist: f64,
            vertex: usize,
        }
        impl Eq for State {}
        impl Ord for State {
            fn cmp(&self, other: &Self) -> Ordering {
                // reversed for a min-heap
                other
                    .dist
                    .partial_cmp(&self.dist)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| other.vertex.cmp(&self.vertex))
            }
        }
        impl PartialOrd for State {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut dist = vec![f64::INFINITY; self.n];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(State {
            dist: 0.0,
            vertex: source,
        });
        while let Some(State { dist: d, vertex }) = heap.pop() {
            if d > dist[vertex] {
                continue;
            }
            if d > limit {
                break;
            }
            for &(next, len) in &self.adj[vertex] {
                let nd = d + len;
                if nd < dist[next] && nd <= limit {
                    dist[next] = nd;
                    heap.push(State {
                        dist: nd,
                        vertex: next,
                    });
                }
            }
        }
        dist
    }
}

fn component_sizes(adj: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Connects every pair of points at metric distance strictly below
/// `r_inner`. Pairs at exactly `r_inner` are excluded.
///
/// Fails with component sizes when the resulting graph is disconnected, and
/// rejects point pairs at distance zero.
pub fn build_graph(pc: &PointCloud, metric: &Metric, r_inner: f64) -> Result<Graph, GraphError> {
    if !(r_inner > 0.0) {
        return Err(GraphError::InvalidInnerRadius(r_inner));
    }
    metric.validate(pc.dim())?;
    let n = pc.len();
    if n < 2 {
        return Err(GraphError::TooFewVertices(n));
    }
    let mut edges = Vec::new();
    let mut theta = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(pc.point(i), pc.point(j))?;
            if d == 0.0 {
                return Err(GraphError::DuplicatePoints { i, j });
            }
            theta = theta.min(d);
            if d < r_inner {
                edges.push(Edge { i, j, length: d });
            }
        }
    }
    Graph::from_edges(n, edges, theta)
}

/// Smallest pairwise distance of a cloud under a metric; the unit `θ` for
/// radius sweeps.
pub fn min_pairwise_distance(pc: &PointCloud, metric: &Metric) -> Result<f64, GraphError> {
    metric.validate(pc.dim())?;
    let n = pc.len();
    if n < 2 {
        return Err(GraphError::TooFewVertices(n));
    }
    let mut theta = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(pc.point(i), pc.point(j))?;
            if d == 0.0 {
                return Err(GraphError::DuplicatePoints { i, j });
            }
            theta = theta.min(d);
        }
    }
    Ok(theta)
}

/// Divides all edge lengths by the largest per-vertex minimum incident
/// length, so that every vertex ends up with a neighbor within distance 1
/// and at least one vertex attains exactly 1.
pub fn rescale_to_unit_neighbor(g: &Graph) -> Graph {
    let n = g.vertex_count();
    let mut min_incident = vec![f64::INFINITY; n];
    for e in g.edges() {
        min_incident[e.i] = min_incident[e.i].min(e.length);
        min_incident[e.j] = min_incident[e.j].min(e.length);
    }
    let s = min_incident.iter().copied().fold(0.0, f64::max);
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge {
            i: e.i,
            j: e.j,
            length: e.length / s,
        })
        .collect();
    Graph::from_edges(n, edges, g.theta() / s).expect("rescaling preserves graph validity")
}

/// Split of the vertex set into known (data given) and unknown vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    known: Vec<usize>,
    unknown: Vec<usize>,
    is_known: Vec<bool>,
}

impl Partition {
    /// Builds a partition of `0..n` from the known set; the unknown set is
    /// the complement. The known set must be nonempty.
    pub fn from_known(n: usize, known: impl IntoIterator<Item = usize>) -> Result<Self, GraphError> {
        let mut is_known = vec![false; n];
        for v in known {
            if v >= n {
                return Err(GraphError::VertexOutOfBounds { index: v, n });
            }
            is_known[v] = true;
        }
        let known: Vec<usize> = (0..n).filter(|&v| is_known[v]).collect();
        if known.is_empty() {
            return Err(GraphError::EmptyKnownSet);
        }
        let unknown = (0..n).filter(|&v| !is_known[v]).collect();
        Ok(Self {
            known,
            unknown,
            is_known,
        })
    }

    /// Builds a partition from explicit disjoint sets covering `0..n`.
    pub fn from_sets(
        n: usize,
        known: impl IntoIterator<Item = usize>,
        unknown: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        let known: Vec<usize> = known.into_iter().collect();
        let unknown: Vec<usize> = unknown.into_iter().collect();
        let mut seen = vec![0u8; n];
        for &v in known.iter().chain(&unknown) {
            if v >= n {
                return Err(GraphError::VertexOutOfBounds { index: v, n });
            }
            seen[v] += 1;
        }
        if known.len() + unknown.len() != n || seen.iter().any(|&c| c != 1) {
            return Err(GraphError::InvalidPartition { n });
        }
        Self::from_known(n, known)
    }

    pub fn n(&self) -> usize {
        self.is_known.len()
    }

    /// Sorted known vertex indices.
    pub fn known(&self) -> &[usize] {
        &self.known
    }

    /// Sorted unknown vertex indices.
    pub fn unknown(&self) -> &[usize] {
        &self.unknown
    }

    pub fn is_known(&self, v: usize) -> bool {
        self.is_known[v]
    }

    /// Partition for the graph extended by one vertex of the given status.
    pub fn with_appended(&self, known: bool) -> Partition {
        let v = self.n();
        let mut is_known = self.is_known.clone();
        is_known.push(known);
        let mut kn = self.known.clone();
        let mut un = self.unknown.clone();
        if known {
            kn.push(v);
        } else {
            un.push(v);
        }
        Partition {
            known: kn,
            unknown: un,
            is_known,
        }
    }
}

/// Graph-distance neighborhood Ω of a center vertex.
///
/// Members need not form an exact metric ball (Dirichlet expansion can grow
/// them), but every member lies within `radius` of the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    center: usize,
    radius: f64,
    members: Vec<usize>,
    boundary: Vec<usize>,
    known_members: Vec<usize>,
    unknown_members: Vec<usize>,
}

impl Neighborhood {
    fn from_members(
        g: &Graph,
        p: &Partition,
        center: usize,
        radius: f64,
        members: Vec<usize>,
    ) -> Self {
        debug_assert!(members.binary_search(&center).is_ok());
        let inside = |v: usize| members.binary_search(&v).is_ok();
        let boundary = members
            .iter()
            .copied()
            .filter(|&m| g.neighbors(m).iter().any(|&(w, _)| !inside(w)))
            .collect();
        let (known_members, unknown_members) =
            members.iter().partition(|&&m| p.is_known(m));
        Self {
            center,
            radius,
            members,
            boundary,
            known_members,
            unknown_members,
        }
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sorted member vertices, center included.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Members with at least one neighbor outside the neighborhood.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Members that are not boundary vertices.
    pub fn interior(&self) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .filter(|v| self.boundary.binary_search(v).is_err())
            .collect()
    }

    /// Ω ∩ 𝒱_k, sorted.
    pub fn known_members(&self) -> &[usize] {
        &self.known_members
    }

    /// Ω ∩ 𝒱_u, sorted.
    pub fn unknown_members(&self) -> &[usize] {
        &self.unknown_members
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// All vertices within shortest-path distance `r_outer` of `center`.
///
/// Distance is measured on the graph with edge lengths as costs, not in the
/// parameter space.
pub fn graph_ball(
    g: &Graph,
    center: usize,
    r_outer: f64,
    p: &Partition,
) -> Result<Neighborhood, GraphError> {
    if center >= g.vertex_count() {
        return Err(GraphError::VertexOutOfBounds {
            index: center,
            n: g.vertex_count(),
        });
    }
    if !(r_outer > 0.0) {
        return Err(GraphError::InvalidBallRadius(r_outer));
    }
    let dist = g.dijkstra(center, r_outer);
    let members: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| dist[v] <= r_outer)
        .collect();
    Ok(Neighborhood::from_members(g, p, center, r_outer, members))
}

/// Grows a neighborhood until every boundary vertex is known, the graph
/// version of a Dirichlet boundary condition. Each round pulls in the
/// neighbors of unknown boundary vertices; the radius is re-derived as the
/// largest member distance so the radius invariant keeps holding.
pub fn expand_to_dirichlet(
    g: &Graph,
    p: &Partition,
    nb: &Neighborhood,
) -> Neighborhood {
    let n = g.vertex_count();
    let mut inside = vec![false; n];
    for &m in nb.members() {
        inside[m] = true;
    }
    loop {
        let mut grew = false;
        for v in 0..n {
            if !inside[v] || p.is_known(v) {
                continue;
            }
            for &(w, _) in g.neighbors(v) {
                if !inside[w] {
                    inside[w] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let members: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    let dist = g.dijkstra(nb.center(), f64::INFINITY);
    let radius = members
        .iter()
        .map(|&m| dist[m])
        .fold(0.0, f64::max)
        .max(nb.radius());
    Neighborhood::from_members(g, p, nb.center(), radius, members)
}

/// Normalized graph Laplacian L = D^{-1/2} (D − A) D^{-1/2}.
///
/// Diagonal entries are exactly 1 and every entry has absolute value at
/// most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: CscMatrix,
    degrees: Vec<f64>,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// The sparse symmetric matrix, unit diagonal included.
    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    /// Adjacency row sums (the diagonal of D).
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Column `v` of L as (rows, values).
    pub fn column(&self, v: usize) -> (&[usize], &[f64]) {
        self.matrix.col(v)
    }
}

/// Assembles the normalized Laplacian of a connected graph.
pub fn normalized_laplacian(g: &Graph) -> Result<Laplacian, GraphError> {
    let n = g.vertex_count();
    let degrees = g.weighted_degrees();
    if let Some(v) = degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(GraphError::IsolatedVertex(v));
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut triplets = Vec::with_capacity(n + 2 * g.edges().len());
    for v in 0..n {
        triplets.push((v, v, 1.0));
    }
    for e in g.edges() {
        let off = -e.weight() * inv_sqrt[e.i] * inv_sqrt[e.j];
        debug_assert!(off.abs() <= 1.0 + 1e-12);
        triplets.push((e.i, e.j, off));
        triplets.push((e.j, e.i, off));
    }
    Ok(Laplacian {
        matrix: CscMatrix::from_triplets(n, n, triplets),
        degrees,
    })
}

/// Findings of the structural-assumption check. Advisory only; nothing in
/// the pipeline refuses to run on a violating graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Assumption 1 violations: edges joining two unknown vertices.
    pub unknown_unknown_edges: Vec<(usize, usize)>,
    /// Assumption 2 violations: (center, boundary vertex) pairs where the
    /// boundary vertex is unknown.
    pub dirichlet_violations: Vec<(usize, usize)>,
    pub min_edge_length: f64,
    pub rho_max: f64,
}

impl AssumptionReport {
    /// Assumption 1: unknown vertices are only connected to known vertices.
    pub fn known_unknown_adjacency_holds(&self) -> bool {
        self.unknown_unknown_edges.is_empty()
    }

    /// Assumption 2: every neighborhood boundary vertex is known.
    pub fn dirichlet_holds(&self) -> bool {
        self.dirichlet_violations.is_empty()
    }

    /// Edge lengths bounded below by ρ_max / 2.
    pub fn edge_lower_bound_holds(&self) -> bool {
        self.min_edge_length >= self.rho_max / 2.0
    }
}

/// Checks the structural assumptions the error theory relies on.
pub fn validate_assumptions(
    g: &Graph,
    p: &Partition,
    nbhds: &[Neighborhood],
) -> AssumptionReport {
    let unknown_unknown_edges = g
        .edges()
        .iter()
        .filter(|e| !p.is_known(e.i) && !p.is_known(e.j))
        .map(|e| (e.i, e.j))
        .collect();
    let mut dirichlet_violations = Vec::new();
    for nb in nbhds {
        for &b in nb.boundary() {
            if !p.is_known(b) {
                dirichlet_violations.push((nb.center(), b));
            }
        }
    }
    let min_edge_length = g
        .edges()
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min);
    AssumptionReport {
        unknown_unknown_edges,
        dirichlet_violations,
        min_edge_length,
        rho_max: g.rho_max(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    fn path_graph(lengths: &[f64]) -> Graph {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, &length)| Edge {
                i,
                j: i + 1,
                length,
            })
            .collect();
        Graph::from_edges(lengths.len() + 1, edges, lengths.iter().copied().fold(f64::INFINITY, f64::min)).unwrap()
    }

    #[test]
    fn distance_identity_and_pythagorean() {
        let m = Metric::Euclidean;
        assert_eq!(m.distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(m.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn distance_weighted_l1_hand_value() {
        // 2·|1−0| + 1·|0−2| = 4
        let m = Metric::weighted_l1(vec![2.0, 1.0]);
        assert_eq!(m.distance(&[1.0, 0.0], &[0.0, 2.0]).unwrap(), 4.0);
    }

    #[test]
    fn distance_rejects_bad_inputs() {
        let m = Metric::Euclidean;
        assert!(m.distance(&[0.0], &[0.0, 1.0]).is_err());
        let bad = Metric::WeightedMinkowski {
            p: 0.5,
            weights: vec![1.0],
        };
        assert!(bad.distance(&[0.0], &[1.0]).is_err());
        let zero_weights = Metric::WeightedMinkowski {
            p: 1.0,
            weights: vec![0.0, 0.0],
        };
        assert!(zero_weights.distance(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn build_graph_two_points() {
        let pc = cloud(&[&[0.0, 0.0], &[0.5, 0.0]]);
        let g = build_graph(&pc, &Metric::Euclidean, 1.0).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].length, 0.5);
        assert_eq!(g.edges()[0].weight(), 2.0);
        assert_eq!(g.theta(), 0.5);
    }

    #[test]
    fn build_graph_collinear_path() {
        let pc = cloud(&[&[0.0], &[1.0], &[2.0]]);
        let g = build_graph(&pc, &Metric::Euclidean, 1.5).unwrap();
        // endpoints at distance 2 are not connected
        assert_eq!(g.edges().len(), 2);
        assert!(g
            .edges()
            .iter()
            .all(|e| (e.j as i64 - e.i as i64).abs() == 1));
    }

    #[test]
    fn build_graph_strict_inequality_at_radius() {
        let pc = cloud(&[&[0.0], &[1.0]]);
        // distance exactly equal to the inner radius is excluded
        assert!(matches!(
            build_graph(&pc, &Metric::Euclidean, 1.0),
            Err(GraphError::Disconnected(_))
        ));
    }

    #[test]
    fn build_graph_disconnected_reports_components() {
        let pc = cloud(&[&[0.0], &[0.1], &[10.0], &[10.1], &[10.2]]);
        match build_graph(&pc, &Metric::Euclidean, 0.5) {
            Err(GraphError::Disconnected(mut sizes)) => {
                sizes.sort_unstable();
                assert_eq!(sizes, vec![2, 3]);
            }
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn build_graph_rejects_duplicates() {
        let pc = PointCloud::new(vec![vec![1.0], vec![1.0]], None);
        assert!(matches!(pc, Err(GraphError::DuplicatePoints { .. })));
        // metric-degenerate pair: distinct points, zero weighted distance
        let pc = cloud(&[&[0.0, 0.0], &[0.0, 5.0]]);
        let m = Metric::WeightedMinkowski {
            p: 1.0,
            weights: vec![1.0, 0.0],
        };
        assert!(matches!(
            build_graph(&pc, &m, 1.0),
            Err(GraphError::DuplicatePoints { i: 0, j: 1 })
        ));
    }

    #[test]
    fn rescale_path_example() {
        let g = path_graph(&[2.0, 4.0]);
        let r = rescale_to_unit_neighbor(&g);
        let lengths: Vec<f64> = r.edges().iter().map(|e| e.length).collect();
        assert_eq!(lengths, vec![0.5, 1.0]);
        // idempotent up to floating tolerance
        let again = rescale_to_unit_neighbor(&r);
        for (a, b) in r.edges().iter().zip(again.edges()) {
            assert!((a.length - b.length).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_single_edge() {
        let g = path_graph(&[10.0]);
        let r = rescale_to_unit_neighbor(&g);
        assert_eq!(r.edges()[0].length, 1.0);
    }

    #[test]
    fn laplacian_two_vertices() {
        let g = path_graph(&[0.37]);
        let l = normalized_laplacian(&g).unwrap();
        let d = l.matrix().to_dense();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(1, 1)], 1.0);
        assert!((d[(0, 1)] + 1.0).abs() < 1e-15);
        assert!((d[(1, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_star_graph() {
        // hub 0 with three unit-length spokes
        let edges = (1..4)
            .map(|j| Edge {
                i: 0,
                j,
                length: 1.0,
            })
            .collect();
        let g = Graph::from_edges(4, edges, 1.0).unwrap();
        let l = normalized_laplacian(&g).unwrap();
        let d = l.matrix().to_dense();
        for v in 0..4 {
            assert_eq!(d[(v, v)], 1.0);
        }
        for leaf in 1..4 {
            assert!((d[(0, leaf)] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
            assert!((d[(leaf, 0)] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_invariants_on_irregular_graph() {
        let pc = cloud(&[&[0.0, 0.0], &[0.4, 0.0], &[0.1, 0.5], &[0.9, 0.4], &[0.5, 0.8]]);
        let g = build_graph(&pc, &Metric::Euclidean, 0.8).unwrap();
        let l = normalized_laplacian(&g).unwrap();
        let d = l.matrix().to_dense();
        let n = g.vertex_count();
        for i in 0..n {
            assert_eq!(d[(i, i)], 1.0, "unit diagonal");
            for j in 0..n {
                assert_eq!(d[(i, j)], d[(j, i)], "symmetry");
                assert!(d[(i, j)].abs() <= 1.0 + 1e-12, "entries bounded by 1");
            }
        }
    }

    #[test]
    fn graph_ball_examples() {
        let g = path_graph(&[1.0, 1.0, 1.0]);
        let p = Partition::from_known(4, [0, 2]).unwrap();
        // radius below the min incident edge keeps only the center
        let nb = graph_ball(&g, 1, 0.5, &p).unwrap();
        assert_eq!(nb.members(), &[1]);
        // left end, radius 2 reaches the first three vertices
        let nb = graph_ball(&g, 0, 2.0, &p).unwrap();
        assert_eq!(nb.members(), &[0, 1, 2]);
        assert_eq!(nb.boundary(), &[2]);
        assert_eq!(nb.known_members(), &[0, 2]);
        assert_eq!(nb.unknown_members(), &[1]);
        assert_eq!(nb.interior(), vec![0, 1]);
        // radius at least the diameter includes everything, empty boundary
        let nb = graph_ball(&g, 0, 3.0, &p).unwrap();
        assert_eq!(nb.members(), &[0, 1, 2, 3]);
        assert!(nb.boundary().is_empty());
    }

    #[test]
    fn dirichlet_expansion_pulls_in_neighbors_of_unknown_boundary() {
        // path 0-1-2-3-4, unknowns {1, 3}
        let g = path_graph(&[1.0; 4]);
        let p = Partition::from_known(5, [0, 2, 4]).unwrap();
        let nb = graph_ball(&g, 2, 1.0, &p).unwrap();
        assert_eq!(nb.members(), &[1, 2, 3]);
        // 1 and 3 are unknown boundary vertices
        let fixed = expand_to_dirichlet(&g, &p, &nb);
        assert_eq!(fixed.members(), &[0, 1, 2, 3, 4]);
        assert!(fixed
            .boundary()
            .iter()
            .all(|&b| p.is_known(b)));
        assert!(fixed.radius() >= 2.0);
    }

    #[test]
    fn validate_assumptions_findings() {
        let g = path_graph(&[1.0, 1.0, 1.0]);
        // alternating known/unknown: no unknown-unknown edge
        let p = Partition::from_known(4, [0, 2]).unwrap();
        let report = validate_assumptions(&g, &p, &[]);
        assert!(report.known_unknown_adjacency_holds());
        assert!(report.edge_lower_bound_holds());

        // two adjacent unknowns
        let p = Partition::from_known(4, [0, 3]).unwrap();
        let report = validate_assumptions(&g, &p, &[]);
        assert_eq!(report.unknown_unknown_edges, vec![(1, 2)]);
        assert!(!report.known_unknown_adjacency_holds());

        // neighborhood with an unknown boundary vertex
        let nb = graph_ball(&g, 0, 1.0, &p).unwrap();
        let report = validate_assumptions(&g, &p, &[nb]);
        assert_eq!(report.dirichlet_violations, vec![(0, 1)]);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_known(3, []).is_err());
        assert!(Partition::from_known(3, [5]).is_err());
        assert!(Partition::from_sets(3, [0, 1], [1, 2]).is_err());
        let p = Partition::from_sets(3, [2, 0], [1]).unwrap();
        assert_eq!(p.known(), &[0, 2]);
        assert_eq!(p.unknown(), &[1]);
    }

    proptest! {
        #[test]
        fn distance_symmetry_and_triangle(
            x in prop::collection::vec(-5.0f64..5.0, 3),
            y in prop::collection::vec(-5.0f64..5.0, 3),
            z in prop::collection::vec(-5.0f64..5.0, 3),
            p in 1.0f64..4.0,
            w in prop::collection::vec(0.01f64..3.0, 3),
        ) {
            let m = Metric::WeightedMinkowski { p, weights: w };
            let dxy = m.distance(&x, &y).unwrap();
            let dyx = m.distance(&y, &x).unwrap();
            prop_assert!((dxy - dyx).abs() < 1e-12);
            let dxz = m.distance(&x, &z).unwrap();
            let dzy = m.distance(&z, &y).unwrap();
            prop_assert!(dxy <= dxz + dzy + 1e-9);
        }

        #[test]
        fn ball_membership_monotone_in_radius(
            seed in 0u64..500,
            r_small in 0.1f64..1.0,
            grow in 0.0f64..2.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(5..20);
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            let pc = PointCloud::new(points, None).unwrap();
            let g = match build_graph(&pc, &Metric::Euclidean, 0.9) {
                Ok(g) => g,
                Err(_) => return Ok(()), // disconnected draw, skip
            };
            let p = Partition::from_known(n, [0]).unwrap();
            let small = graph_ball(&g, 0, r_small, &p).unwrap();
            let large = graph_ball(&g, 0, r_small + grow, &p).unwrap();
            for m in small.members() {
                prop_assert!(large.contains(*m));
            }
        }

        #[test]
        fn larger_inner_radius_gives_edge_superset(
            seed in 0u64..500,
            r in 0.3f64..0.8,
            extra in 0.0f64..0.6,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..15);
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            let pc = PointCloud::new(points, None).unwrap();
            let small = build_graph(&pc, &Metric::Euclidean, r);
            let large = build_graph(&pc, &Metric::Euclidean, r + extra);
            if let (Ok(small), Ok(large)) = (small, large) {
                let set: std::collections::HashSet<(usize, usize)> =
                    large.edges().iter().map(|e| (e.i, e.j)).collect();
                for e in small.edges() {
                    prop_assert!(set.contains(&(e.i, e.j)));
                }
            }
        }
    }
}
