//! DAG network model: multi-edges, cut/reachability analysis, unit-capacity
//! max-flow, cut-set enumeration, and primary-minimum-cut reduction of
//! wiretap collections.
//!
//! The order of the edge list is the canonical edge order used everywhere:
//! vector layouts, enumeration order, and first-violator reporting.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub tail: NodeId,
    pub head: NodeId,
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("unknown node name `{0}`")]
    UnknownNode(String),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("network is structurally invalid: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("graph has a directed cycle; no topological order exists")]
    Cyclic,
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("wiretap set is empty")]
    EmptyInput,
    #[error("no source reaches the given edge set")]
    NoSourceReaches,
    #[error("network file: {0}")]
    File(String),
}

/// Structural invariant violations reported by [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    CycleFound,
    SourceHasInputEdge { source: String },
    SinkHasOutputEdge,
    NoPathToSink { node: String },
    SinkIsSource,
    NoSources,
}

/// Enumeration caps; configuration rather than constants.
#[derive(Debug, Clone)]
pub struct Limits {
    pub max_enum_edges: usize,
    pub max_wiretap_sets: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_enum_edges: 20,
            max_wiretap_sets: 100_000,
        }
    }
}

/// Directed acyclic network with ordered sources and a single sink.
#[derive(Debug, Clone)]
pub struct Network {
    node_names: Vec<String>,
    edges: Vec<Edge>,
    sources: Vec<NodeId>,
    sink: NodeId,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    edge_index: BTreeMap<String, EdgeId>,
    node_index: BTreeMap<String, NodeId>,
}

impl Network {
    /// Builds a network without structural validation; name resolution
    /// errors are still rejected. Use [`Network::validated`] for checked
    /// construction, or call [`Network::validate`] for diagnostics.
    pub fn build(
        nodes: Vec<String>,
        edges: Vec<(String, String, String)>, // (id, tail, head)
        sources: Vec<String>,
        sink: String,
    ) -> Result<Self, NetError> {
        let mut node_index = BTreeMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if node_index.insert(name.clone(), NodeId(i)).is_some() {
                return Err(NetError::Duplicate {
                    kind: "node",
                    name: name.clone(),
                });
            }
        }
        let lookup = |name: &str| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| NetError::UnknownNode(name.into()))
        };
        let mut edge_index = BTreeMap::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, (id, tail, head)) in edges.into_iter().enumerate() {
            let (tail, head) = (lookup(&tail)?, lookup(&head)?);
            if edge_index.insert(id.clone(), EdgeId(i)).is_some() {
                return Err(NetError::Duplicate {
                    kind: "edge",
                    name: id,
                });
            }
            out_edges[tail.0].push(EdgeId(i));
            in_edges[head.0].push(EdgeId(i));
            edge_list.push(Edge { id, tail, head });
        }
        let mut source_ids = Vec::with_capacity(sources.len());
        for s in &sources {
            let id = lookup(s)?;
            if source_ids.contains(&id) {
                return Err(NetError::Duplicate {
                    kind: "source",
                    name: s.clone(),
                });
            }
            source_ids.push(id);
        }
        Ok(Network {
            node_names: nodes,
            edges: edge_list,
            sources: source_ids,
            sink: lookup(&sink)?,
            out_edges,
            in_edges,
            edge_index,
            node_index,
        })
    }

    /// Builds and validates; any violation is an error.
    pub fn validated(
        nodes: Vec<String>,
        edges: Vec<(String, String, String)>,
        sources: Vec<String>,
        sink: String,
    ) -> Result<Self, NetError> {
        let net = Self::build(nodes, edges, sources, sink)?;
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(NetError::Invalid(violations))
        }
    }

    /// Returns every violated structural invariant (empty means valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.sources.is_empty() {
            out.push(Violation::NoSources);
        }
        if self.sources.contains(&self.sink) {
            out.push(Violation::SinkIsSource);
        }
        if self.topo_nodes().is_err() {
            out.push(Violation::CycleFound);
        }
        for &s in &self.sources {
            if !self.in_edges[s.0].is_empty() {
                out.push(Violation::SourceHasInputEdge {
                    source: self.node_names[s.0].clone(),
                });
            }
        }
        if !self.out_edges[self.sink.0].is_empty() {
            out.push(Violation::SinkHasOutputEdge);
        }
        // Every non-sink node must reach the sink.
        let mut reaches = vec![false; self.node_names.len()];
        reaches[self.sink.0] = true;
        let mut stack = vec![self.sink];
        while let Some(v) = stack.pop() {
            for &e in &self.in_edges[v.0] {
                let t = self.edges[e.0].tail;
                if !reaches[t.0] {
                    reaches[t.0] = true;
                    stack.push(t);
                }
            }
        }
        for (i, ok) in reaches.iter().enumerate() {
            if !ok {
                out.push(Violation::NoPathToSink {
                    node: self.node_names[i].clone(),
                });
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_by_id(&self, id: &str) -> Result<EdgeId, NetError> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| NetError::UnknownEdge(id.into()))
    }

    pub fn node_by_name(&self, name: &str) -> Result<NodeId, NetError> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownNode(name.into()))
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.node_names[v.0]
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v.0]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    /// Index of a node within the ordered source list, if it is a source.
    pub fn source_index(&self, v: NodeId) -> Option<usize> {
        self.sources.iter().position(|&s| s == v)
    }

    /// Nodes in a topological order (lowest index first among ready nodes).
    pub fn topo_nodes(&self) -> Result<Vec<NodeId>, NetError> {
        let n = self.node_names.len();
        let mut indegree: Vec<usize> = (0..n).map(|v| self.in_edges[v].len()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().min() {
            ready.retain(|&u| u != v);
            order.push(NodeId(v));
            for &e in &self.out_edges[v] {
                let h = self.edges[e.0].head.0;
                indegree[h] -= 1;
                if indegree[h] == 0 {
                    ready.push(h);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(NetError::Cyclic)
        }
    }

    /// Nodes reachable from `start` along directed edges, `start` included.
    fn reachable_from(&self, start: NodeId, deleted: u32) -> Vec<bool> {
        let mut seen = vec![false; self.node_names.len()];
        seen[start.0] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &e in &self.out_edges[v.0] {
                if deleted & (1 << e.0) != 0 {
                    continue;
                }
                let h = self.edges[e.0].head;
                if !seen[h.0] {
                    seen[h.0] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    /// Per-edge masks (over source indices) of the sources with a path to
    /// each edge, canonical edge order. A single edge counts as a path from
    /// itself, so the tail being the source qualifies.
    pub(crate) fn all_edge_source_masks(&self) -> Vec<u64> {
        let reach: Vec<Vec<bool>> = self
            .sources
            .iter()
            .map(|&s| self.reachable_from(s, 0))
            .collect();
        self.edges
            .iter()
            .map(|edge| {
                let mut mask = 0;
                for (i, r) in reach.iter().enumerate() {
                    if r[edge.tail.0] {
                        mask |= 1 << i;
                    }
                }
                mask
            })
            .collect()
    }

    /// Bitmask of sources cut off from the sink when `deleted` edges (bitmask
    /// over edge indices) are removed.
    pub(crate) fn isolated_mask(&self, deleted: u32) -> u64 {
        let mut mask = 0;
        for (i, &s) in self.sources.iter().enumerate() {
            if !self.reachable_from(s, deleted)[self.sink.0] {
                mask |= 1 << i;
            }
        }
        mask
    }

    pub(crate) fn edge_mask(&self, set: &[EdgeId]) -> u32 {
        set.iter().fold(0, |m, e| m | (1 << e.0))
    }

    pub(crate) fn sources_from_mask(&self, mask: u64) -> Vec<NodeId> {
        self.sources
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &s)| s)
            .collect()
    }

    /// The D/I/J source-set analysis of an edge set.
    pub fn cut_analysis(&self, set: &[EdgeId]) -> CutAnalysis {
        let masks = self.all_edge_source_masks();
        let d_mask = set.iter().fold(0, |m, &e| m | masks[e.0]);
        let i_mask = self.isolated_mask(self.edge_mask(set));
        let full: u64 = if self.sources.is_empty() {
            0
        } else {
            (1 << self.sources.len()) - 1
        };
        CutAnalysis {
            cut: set.to_vec(),
            d: self.sources_from_mask(d_mask),
            i: self.sources_from_mask(i_mask),
            j: self.sources_from_mask(d_mask & !i_mask),
            is_cut_set: i_mask != 0,
            is_global_cut_set: i_mask == full && full != 0,
        }
    }

    /// Unit-capacity minimum cut (max flow) separating `to` from `from`.
    /// Several `from` nodes are joined by a super-source with unbounded arcs.
    pub fn mincut(&self, from: &[NodeId], to: NodeId) -> usize {
        if from.contains(&to) {
            return usize::MAX;
        }
        let n = self.node_names.len();
        let inf = self.edges.len() as i64 + 1;
        let mut g = FlowGraph::new(n + 1);
        for edge in &self.edges {
            g.add_arc(edge.tail.0, edge.head.0, 1);
        }
        let s = if from.len() == 1 {
            from[0].0
        } else {
            for &v in from {
                g.add_arc(n, v.0, inf);
            }
            n
        };
        g.max_flow(s, to.0) as usize
    }

    /// Smallest per-source minimum cut capacity to the sink.
    pub fn c_min(&self) -> usize {
        self.sources
            .iter()
            .map(|&s| self.mincut(&[s], self.sink))
            .min()
            .unwrap_or(0)
    }

    /// Minimum cut capacity separating the sink from all sources jointly.
    pub fn c_min_s(&self) -> usize {
        self.mincut(&self.sources.clone(), self.sink)
    }

    /// All cut sets (edge subsets isolating at least one source) in
    /// (size, lexicographic) order.
    pub fn cut_sets(&self, limits: &Limits) -> Result<Vec<Vec<EdgeId>>, NetError> {
        let m = self.edges.len();
        if m > limits.max_enum_edges {
            return Err(NetError::TooLarge(format!(
                "{m} edges exceeds the enumeration cap {}",
                limits.max_enum_edges
            )));
        }
        let mut out = Vec::new();
        for size in 1..=m {
            for combo in (0..m).combinations(size) {
                let set: Vec<EdgeId> = combo.into_iter().map(EdgeId).collect();
                if self.isolated_mask(self.edge_mask(&set)) != 0 {
                    out.push(set);
                }
            }
        }
        Ok(out)
    }

    /// The minimum cut separating `w` from the sources reaching it that is
    /// nearest the sources: after a max flow from D_W to the member edges,
    /// the unit arcs crossing out of the residual-reachable region.
    pub fn primary_min_cut(&self, w: &[EdgeId]) -> Result<Vec<EdgeId>, NetError> {
        if w.is_empty() {
            return Err(NetError::EmptyInput);
        }
        let masks = self.all_edge_source_masks();
        let d_mask = w.iter().fold(0u64, |m, &e| m | masks[e.0]);
        if d_mask == 0 {
            return Err(NetError::NoSourceReaches);
        }
        let n = self.node_names.len();
        let m = self.edges.len();
        let inf = m as i64 + 1;
        // Node layout: originals, then one exit node per edge, then
        // super-source and super-sink.
        let (ss, tt) = (n + m, n + m + 1);
        let mut g = FlowGraph::new(n + m + 2);
        let mut unit_arcs = Vec::with_capacity(m);
        for (i, edge) in self.edges.iter().enumerate() {
            unit_arcs.push(g.add_arc(edge.tail.0, n + i, 1));
            g.add_arc(n + i, edge.head.0, inf);
        }
        for &s in &self.sources_from_mask(d_mask) {
            g.add_arc(ss, s.0, inf);
        }
        for &e in w {
            g.add_arc(n + e.0, tt, inf);
        }
        g.max_flow(ss, tt);
        let reach = g.residual_reachable(ss);
        let cut: Vec<EdgeId> = (0..m)
            .filter(|&i| {
                let edge = &self.edges[i];
                reach[edge.tail.0] && !reach[n + i] && g.is_saturated(unit_arcs[i])
            })
            .map(EdgeId)
            .collect();
        Ok(cut)
    }

    /// `count` edge-disjoint paths from `from` to the sink, or `None` when
    /// the max flow is too small. Decomposes a max flow by walking saturated
    /// arcs, lowest edge index first, so the result is deterministic.
    pub fn edge_disjoint_paths(&self, from: NodeId, count: usize) -> Option<Vec<Vec<EdgeId>>> {
        if count == 0 {
            return Some(Vec::new());
        }
        let mut g = FlowGraph::new(self.node_names.len());
        for edge in &self.edges {
            g.add_arc(edge.tail.0, edge.head.0, 1);
        }
        if (g.max_flow(from.0, self.sink.0) as usize) < count {
            return None;
        }
        let mut used = vec![false; self.edges.len()];
        let mut paths = Vec::with_capacity(count);
        for _ in 0..count {
            let mut v = from;
            let mut path = Vec::new();
            while v != self.sink {
                // Arc 2e is edge e's forward arc; zero residual means it
                // carries flow.
                let &e = self.out_edges[v.0]
                    .iter()
                    .find(|&&e| g.cap[2 * e.0] == 0 && !used[e.0])
                    .expect("flow conservation leaves an unused saturated arc");
                used[e.0] = true;
                path.push(e);
                v = self.edges[e.0].head;
            }
            paths.push(path);
        }
        Some(paths)
    }

    /// Wiretap collection of security level `r`: all edge subsets of size at
    /// most `r` (the empty set included), or, when `reduce` is set, only the
    /// size-`r` subsets that equal their own primary minimum cut.
    pub fn wiretap_collection(
        &self,
        r: usize,
        reduce: bool,
        limits: &Limits,
    ) -> Result<WiretapCollection, NetError> {
        let m = self.edges.len();
        let mut count: u128 = 0;
        for k in 0..=r.min(m) {
            count += binomial(m, k);
            if count > limits.max_wiretap_sets as u128 {
                return Err(NetError::TooLarge(format!(
                    "wiretap collection exceeds the cap {}",
                    limits.max_wiretap_sets
                )));
            }
        }
        let mut sets = Vec::new();
        if reduce {
            if r > 0 && r <= m {
                for combo in (0..m).combinations(r) {
                    let set: Vec<EdgeId> = combo.into_iter().map(EdgeId).collect();
                    match self.primary_min_cut(&set) {
                        Ok(cut) if cut == set => sets.push(set),
                        Ok(_) | Err(NetError::NoSourceReaches) => {}
                        Err(err) => return Err(err),
                    }
                }
            }
        } else {
            sets.push(Vec::new());
            for size in 1..=r.min(m) {
                for combo in (0..m).combinations(size) {
                    sets.push(combo.into_iter().map(EdgeId).collect());
                }
            }
        }
        Ok(WiretapCollection {
            r,
            sets,
            reduced: reduce,
        })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// D/I/J classification of the sources relative to an edge set.
#[derive(Debug, Clone)]
pub struct CutAnalysis {
    pub cut: Vec<EdgeId>,
    /// Sources with a path to some edge of the set.
    pub d: Vec<NodeId>,
    /// Sources disconnected from the sink when the set is deleted.
    pub i: Vec<NodeId>,
    /// D minus I.
    pub j: Vec<NodeId>,
    pub is_cut_set: bool,
    pub is_global_cut_set: bool,
}

/// An explicit list of wiretap sets, either the full collection up to size
/// `r` or the reduced collection of self-primary size-`r` sets.
#[derive(Debug, Clone)]
pub struct WiretapCollection {
    pub r: usize,
    /// Members in (size, lexicographic) canonical order.
    pub sets: Vec<Vec<EdgeId>>,
    pub reduced: bool,
}

impl WiretapCollection {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Member count excluding the empty set.
    pub fn nonempty_len(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }
}

/// Edmonds-Karp max flow on small integer-capacity graphs. Arcs are stored
/// in forward/backward pairs; BFS augmentation keeps runs deterministic.
struct FlowGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.to.len();
        self.adj[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.adj[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        id
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::from([s]);
            'bfs: while let Some(v) = queue.pop_front() {
                for &a in &self.adj[v] {
                    let u = self.to[a];
                    if self.cap[a] > 0 && parent[u].is_none() && u != s {
                        parent[u] = Some(a);
                        if u == t {
                            break 'bfs;
                        }
                        queue.push_back(u);
                    }
                }
            }
            if parent[t].is_none() {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while v != s {
                let a = parent[v].unwrap();
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = parent[v].unwrap();
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &a in &self.adj[v] {
                let u = self.to[a];
                if self.cap[a] > 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    fn is_saturated(&self, arc: usize) -> bool {
        self.cap[arc] == 0
    }
}

/// On-disk network description. The `edges` array order is the canonical
/// edge order.
#[derive(Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub field: u64,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeFile>,
    pub sources: Vec<String>,
    pub sink: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeFile {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self, NetError> {
        serde_json::from_str(text).map_err(|e| NetError::File(e.to_string()))
    }

    pub fn to_network(&self) -> Result<(Network, FieldSpec), NetError> {
        let field = FieldSpec::from_order(self.field).map_err(|e| NetError::File(e.to_string()))?;
        let net = Network::validated(
            self.nodes.clone(),
            self.edges
                .iter()
                .map(|e| (e.id.clone(), e.tail.clone(), e.head.clone()))
                .collect(),
            self.sources.clone(),
            self.sink.clone(),
        )?;
        Ok((net, field))
    }

    pub fn from_network(net: &Network, field: &FieldSpec) -> Self {
        NetworkFile {
            field: field.order(),
            nodes: (0..net.node_count())
                .map(|i| net.node_name(NodeId(i)).to_string())
                .collect(),
            edges: net
                .edges()
                .iter()
                .map(|e| EdgeFile {
                    id: e.id.clone(),
                    tail: net.node_name(e.tail).to_string(),
                    head: net.node_name(e.head).to_string(),
                })
                .collect(),
            sources: net
                .sources()
                .iter()
                .map(|&s| net.node_name(s).to_string())
                .collect(),
            sink: net.node_name(net.sink()).to_string(),
        }
    }
}
