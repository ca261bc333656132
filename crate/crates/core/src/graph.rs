//! Immutable DAGs, topological orders, boundary profiles and induced sub-DAGs.
//!
//! Vertices are dense integer ids `0..n`. Adjacency is stored in CSR form in
//! both directions with every neighbour list sorted ascending, so a `Dag` is
//! cheap to share and compare.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {vertex} does not exist in a graph with {n} vertices")]
    UnknownVertex { vertex: VertexId, n: usize },
    #[error("edge set contains a cycle: {cycle:?}")]
    Cycle { cycle: Vec<VertexId> },
    #[error("order mismatch: {0}")]
    OrderMismatch(String),
}

struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Csr {
    fn build(n: usize, pairs: &[(VertexId, VertexId)]) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in pairs {
            offsets[a + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; pairs.len()];
        for &(a, b) in pairs {
            targets[fill[a]] = b;
            fill[a] += 1;
        }
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

struct DagData {
    n: usize,
    preds: Csr,
    succs: Csr,
    max_in_degree: usize,
    order: Vec<VertexId>,
    depth: OnceLock<usize>,
}

/// A directed acyclic graph. Cloning is O(1).
#[derive(Clone)]
pub struct Dag {
    inner: Arc<DagData>,
}

impl Dag {
    /// Builds a DAG on vertices `0..n`, rejecting self-loops, duplicate edges,
    /// out-of-range endpoints and cycles.
    pub fn new<I>(n: usize, edges: I) -> Result<Dag, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::UnknownVertex { vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            pairs.push((u, v));
        }
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }

        let succs = Csr::build(n, &sorted);
        let reversed: Vec<_> = sorted.iter().map(|&(u, v)| (v, u)).collect();
        let preds = Csr::build(n, &reversed);
        let order =
            kahn_min_id(n, &preds, &succs).map_err(|rest| GraphError::Cycle { cycle: find_cycle(&preds, &rest) })?;
        let max_in_degree = (0..n).map(|v| preds.row(v).len()).max().unwrap_or(0);

        Ok(Dag { inner: Arc::new(DagData { n, preds, succs, max_in_degree, order, depth: OnceLock::new() }) })
    }

    pub fn vertex_count(&self) -> usize {
        self.inner.n
    }

    pub fn edge_count(&self) -> usize {
        self.inner.succs.targets.len()
    }

    /// Maximum in-degree `d`.
    pub fn max_in_degree(&self) -> usize {
        self.inner.max_in_degree
    }

    /// Average in-degree `m / n` as an exact pair `(m, n)`.
    pub fn average_in_degree(&self) -> (usize, usize) {
        (self.edge_count(), self.vertex_count())
    }

    #[inline]
    pub fn preds(&self, v: VertexId) -> &[VertexId] {
        self.inner.preds.row(v)
    }

    #[inline]
    pub fn succs(&self, v: VertexId) -> &[VertexId] {
        self.inner.succs.row(v)
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.preds(v).len()
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.succs(v).len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.vertex_count() && self.succs(u).binary_search(&v).is_ok()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.vertex_count()
    }

    /// All edges, sorted by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| self.succs(u).iter().map(move |&v| (u, v)))
    }

    pub fn sources(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.in_degree(v) == 0)
    }

    pub fn sinks(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.out_degree(v) == 0)
    }

    /// The canonical topological order: Kahn's algorithm, always releasing
    /// the smallest ready vertex id first.
    pub fn topological_order(&self) -> TopoOrder {
        TopoOrder::from_valid(self.inner.order.clone())
    }

    /// Topological depth `l`: the number of edges on a longest directed path.
    pub fn topological_depth(&self) -> usize {
        *self.inner.depth.get_or_init(|| {
            let mut longest = vec![0usize; self.vertex_count()];
            let mut best = 0;
            for &v in &self.inner.order {
                let lv = self.preds(v).iter().map(|&p| longest[p] + 1).max().unwrap_or(0);
                longest[v] = lv;
                best = best.max(lv);
            }
            best
        })
    }

    /// Longest-path length ending at each vertex.
    pub fn vertex_depths(&self) -> Vec<usize> {
        let mut longest = vec![0usize; self.vertex_count()];
        for &v in &self.inner.order {
            longest[v] = self.preds(v).iter().map(|&p| longest[p] + 1).max().unwrap_or(0);
        }
        longest
    }
}

impl PartialEq for Dag {
    fn eq(&self, other: &Dag) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.inner.succs.offsets == other.inner.succs.offsets
            && self.inner.succs.targets == other.inner.succs.targets
    }
}

impl Eq for Dag {}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dag")
            .field("n", &self.vertex_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

fn kahn_min_id(n: usize, preds: &Csr, succs: &Csr) -> Result<Vec<VertexId>, Vec<VertexId>> {
    let mut remaining: Vec<usize> = (0..n).map(|v| preds.row(v).len()).collect();
    let mut ready: BinaryHeap<Reverse<VertexId>> = (0..n).filter(|&v| remaining[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &s in succs.row(v) {
            remaining[s] -= 1;
            if remaining[s] == 0 {
                ready.push(Reverse(s));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| remaining[v] > 0).collect())
    }
}

/// Every vertex Kahn's algorithm could not release still has an unreleased
/// predecessor, so walking predecessors inside that set must revisit a vertex.
fn find_cycle(preds: &Csr, rest: &[VertexId]) -> Vec<VertexId> {
    let n = preds.offsets.len() - 1;
    let mut stuck = vec![false; n];
    for &v in rest {
        stuck[v] = true;
    }
    let mut seen_at = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut v = rest[0];
    while seen_at[v] == usize::MAX {
        seen_at[v] = path.len();
        path.push(v);
        v = *preds.row(v).iter().find(|&&p| stuck[p]).expect("stuck vertex has a stuck predecessor");
    }
    let mut cycle = path[seen_at[v]..].to_vec();
    cycle.reverse();
    cycle
}

/// A permutation of the vertices in which every edge points forward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoOrder {
    order: Vec<VertexId>,
    rank: Vec<usize>,
}

impl TopoOrder {
    /// Validates `order` against `dag`.
    pub fn new(dag: &Dag, order: Vec<VertexId>) -> Result<TopoOrder, GraphError> {
        let n = dag.vertex_count();
        if order.len() != n {
            return Err(GraphError::OrderMismatch(format!(
                "order has {} entries, graph has {n} vertices",
                order.len()
            )));
        }
        let mut rank = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(GraphError::UnknownVertex { vertex: v, n });
            }
            if rank[v] != usize::MAX {
                return Err(GraphError::OrderMismatch(format!("vertex {v} appears twice")));
            }
            rank[v] = i;
        }
        if let Some((u, v)) = dag.edges().find(|&(u, v)| rank[u] > rank[v]) {
            return Err(GraphError::OrderMismatch(format!("edge {u} -> {v} points backwards")));
        }
        Ok(TopoOrder { order, rank })
    }

    pub(crate) fn from_valid(order: Vec<VertexId>) -> TopoOrder {
        let mut rank = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        TopoOrder { order, rank }
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.order
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Zero-based position of `v`.
    pub fn rank(&self, v: VertexId) -> usize {
        self.rank[v]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }
}

/// Convenience wrapper returning the canonical order of `dag`.
pub fn topological_sort(dag: &Dag) -> TopoOrder {
    dag.topological_order()
}

/// `values[i - 1]` is the i-th boundary: the number of vertices among the
/// first `i` of the order that still have a successor later in the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryProfile {
    pub values: Vec<usize>,
    pub max_value: usize,
    /// One-based index of the first prefix attaining `max_value`.
    pub argmax: usize,
}

/// Boundary profile of `dag` under `order`, computed by a single scan that
/// keeps a counter of not-yet-visited successors for every boundary vertex.
pub fn boundary_profile(dag: &Dag, order: &TopoOrder) -> Result<BoundaryProfile, GraphError> {
    if order.len() != dag.vertex_count() {
        return Err(GraphError::OrderMismatch(format!(
            "order has {} entries, graph has {} vertices",
            order.len(),
            dag.vertex_count()
        )));
    }
    if let Some((u, v)) = dag.edges().find(|&(u, v)| order.rank(u) > order.rank(v)) {
        return Err(GraphError::OrderMismatch(format!("edge {u} -> {v} points backwards")));
    }
    let scan = scan_segment(dag, order.as_slice(), order.ranks(), 0, order.len());
    Ok(scan.profile)
}

pub(crate) struct SegmentScan {
    pub profile: BoundaryProfile,
    pub edges: usize,
}

/// Boundary scan of the sub-DAG induced by `order[lo..hi]`, where `order` is a
/// topological order of the whole graph and `rank` its inverse.
pub(crate) fn scan_segment(dag: &Dag, order: &[VertexId], rank: &[usize], lo: usize, hi: usize) -> SegmentScan {
    let len = hi - lo;
    let mut pending = vec![0u32; len];
    let mut edges = 0usize;
    let mut values = Vec::with_capacity(len);
    let mut boundary = 0usize;
    let (mut max_value, mut argmax) = (0usize, 1usize);
    for i in lo..hi {
        let v = order[i];
        let inside = dag.succs(v).iter().filter(|&&s| rank[s] < hi).count();
        edges += inside;
        if inside > 0 {
            pending[i - lo] = inside as u32;
            boundary += 1;
        }
        for &p in dag.preds(v) {
            let rp = rank[p];
            if rp >= lo {
                let c = &mut pending[rp - lo];
                *c -= 1;
                if *c == 0 {
                    boundary -= 1;
                }
            }
        }
        values.push(boundary);
        if boundary > max_value {
            max_value = boundary;
            argmax = i - lo + 1;
        }
    }
    SegmentScan { profile: BoundaryProfile { values, max_value, argmax }, edges }
}

/// Number of edges with both endpoints in `order[lo..hi]`.
pub(crate) fn segment_edges(dag: &Dag, order: &[VertexId], rank: &[usize], lo: usize, hi: usize) -> usize {
    order[lo..hi].iter().map(|&v| dag.preds(v).iter().filter(|&&p| rank[p] >= lo).count()).sum()
}

/// A sub-DAG together with the parent ids of its vertices: local vertex `i`
/// is parent vertex `vertices[i]`, and `vertices` is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubdag {
    pub dag: Dag,
    pub vertices: Vec<VertexId>,
}

impl InducedSubdag {
    pub fn to_parent(&self, local: VertexId) -> VertexId {
        self.vertices[local]
    }

    pub fn to_local(&self, parent: VertexId) -> Option<VertexId> {
        self.vertices.binary_search(&parent).ok()
    }

    /// Edges expressed in parent ids.
    pub fn parent_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.dag.edges().map(|(u, v)| (self.vertices[u], self.vertices[v]))
    }
}

/// The sub-DAG `(V', (V' x V') ∩ E)` induced by `subset`.
pub fn induced_subdag(dag: &Dag, subset: &[VertexId]) -> Result<InducedSubdag, GraphError> {
    let n = dag.vertex_count();
    if let Some(&v) = subset.iter().find(|&&v| v >= n) {
        return Err(GraphError::UnknownVertex { vertex: v, n });
    }
    let mut vertices = subset.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<_> = vertices
        .iter()
        .flat_map(|&u| {
            let local = &local;
            dag.succs(u).iter().filter(move |&&v| local[v] != usize::MAX).map(move |&v| (local[u], local[v]))
        })
        .collect();
    let sub = Dag::new(vertices.len(), edges).expect("induced sub-DAG of a DAG is a DAG");
    Ok(InducedSubdag { dag: sub, vertices })
}
