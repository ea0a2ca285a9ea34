//! The shape-graph data model: nodes in space joined by curve-valued edges.
//!
//! A [`ShapeGraph`] is immutable once built; every structural operation
//! returns a new graph. Node and edge ids are assigned in construction order
//! and strictly increase, so element provenance stays traceable across
//! reduction stages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Number of sample points per edge unless overridden.
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A discretized edge: an ordered polyline of at least two sample points.
///
/// After [`resample_edge`] the samples are uniformly spaced by arc length,
/// with the parameterization t_k = k/(T-1) implied by sample order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCurve {
    points: Vec<Point>,
}

impl EdgeCurve {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "edge curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite curve point {:?}",
                p.coords
            )));
        }
        Ok(EdgeCurve { points })
    }

    /// Straight segment from `a` to `b` with `t` samples.
    pub fn segment(a: Point, b: Point, t: usize) -> Self {
        let t = t.max(2);
        let points = (0..t)
            .map(|k| {
                let s = k as f64 / (t - 1) as f64;
                a.add(&b.sub(&a).scale(s))
            })
            .collect();
        EdgeCurve { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn sample_count(&self) -> usize {
        self.points.len()
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        *self.points.last().unwrap()
    }

    /// True when the curve has zero total length (all samples coincide).
    pub fn is_degenerate(&self) -> bool {
        edge_length(self) <= 0.0
    }

    /// Same polyline traversed end to start.
    pub fn reversed(&self) -> EdgeCurve {
        let mut points = self.points.clone();
        points.reverse();
        EdgeCurve { points }
    }

    pub(crate) fn snap_endpoints(&mut self, start: Point, end: Point) {
        *self.points.first_mut().unwrap() = start;
        *self.points.last_mut().unwrap() = end;
    }
}

/// Total arc length: the sum of Euclidean lengths of consecutive segments.
pub fn edge_length(curve: &EdgeCurve) -> f64 {
    curve
        .points()
        .windows(2)
        .map(|w| w[0].dist(&w[1]))
        .sum()
}

/// Resample a polyline to `t` points uniformly spaced by arc length.
///
/// Endpoints are preserved exactly. A degenerate curve of total length zero
/// yields `t` copies of its single location.
pub fn resample_edge(curve: &EdgeCurve, t: usize) -> EdgeCurve {
    let t = t.max(2);
    let pts = curve.points();
    // Cumulative arc length at each input sample.
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0);
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return EdgeCurve {
            points: vec![pts[0]; t],
        };
    }
    let mut out = Vec::with_capacity(t);
    out.push(pts[0]);
    let mut seg = 0usize;
    for k in 1..t - 1 {
        let target = total * k as f64 / (t - 1) as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        let frac = if seg_len > 0.0 {
            (target - cum[seg]) / seg_len
        } else {
            0.0
        };
        out.push(pts[seg].add(&pts[seg + 1].sub(&pts[seg]).scale(frac)));
    }
    out.push(*pts.last().unwrap());
    EdgeCurve { points: out }
}

/// An edge joining two distinct nodes, carrying its spatial curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub curve: EdgeCurve,
}

/// A graph embedded in R^2 or R^3 whose edges are full spatial curves.
///
/// Invariants enforced on construction: curve endpoints coincide exactly with
/// the endpoint node positions (curves are snapped), no self-loops, and every
/// referenced node exists. Parallel edges between one node pair are allowed.
#[derive(Debug, Clone)]
pub struct ShapeGraph {
    dim: usize,
    samples_per_edge: usize,
    nodes: BTreeMap<NodeId, Point>,
    edges: BTreeMap<EdgeId, Edge>,
    next_node: u64,
    next_edge: u64,
}

/// Equality over observable content; the id counters are bookkeeping.
impl PartialEq for ShapeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.samples_per_edge == other.samples_per_edge
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

impl ShapeGraph {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The per-edge sample count used whenever this graph creates new curves.
    pub fn samples_per_edge(&self) -> usize {
        self.samples_per_edge
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Point)> {
        self.nodes.iter().map(|(id, p)| (*id, p))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn node(&self, id: NodeId) -> Option<&Point> {
        self.nodes.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    /// Multigraph degree: parallel edges count separately.
    pub fn degree(&self, node: NodeId) -> usize {
        self.edges
            .values()
            .filter(|e| e.u == node || e.v == node)
            .count()
    }

    pub fn incident_edges(&self, node: NodeId) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, e)| e.u == node || e.v == node)
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn neighbors(&self, node: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for e in self.edges.values() {
            if e.u == node {
                out.insert(e.v);
            } else if e.v == node {
                out.insert(e.u);
            }
        }
        out
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.edges
            .values()
            .any(|e| (e.u == a && e.v == b) || (e.u == b && e.v == a))
    }

    /// An edge is terminal when at least one endpoint has degree one.
    pub fn is_terminal_edge(&self, id: EdgeId) -> bool {
        let e = &self.edges[&id];
        self.degree(e.u) == 1 || self.degree(e.v) == 1
    }

    /// Empty graph with the same dim and sample count whose id counters
    /// continue from this graph's, so fresh elements never collide with
    /// retained ones.
    pub(crate) fn clone_structure(&self) -> ShapeGraph {
        ShapeGraph {
            dim: self.dim,
            samples_per_edge: self.samples_per_edge,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            next_node: self.next_node,
            next_edge: self.next_edge,
        }
    }

    /// Re-insert a node under its original id (element retention during
    /// reductions).
    pub(crate) fn insert_node_with_id(&mut self, id: NodeId, p: Point) {
        self.nodes.insert(id, p);
        self.next_node = self.next_node.max(id.0 + 1);
    }

    /// Re-insert an edge under its original id.
    pub(crate) fn insert_edge_with_id(
        &mut self,
        id: EdgeId,
        u: NodeId,
        v: NodeId,
        mut curve: EdgeCurve,
    ) -> Result<()> {
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at {u}")));
        }
        let (pu, pv) = match (self.nodes.get(&u), self.nodes.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "edge references missing node {u} or {v}"
                )))
            }
        };
        curve.snap_endpoints(pu, pv);
        self.edges.insert(id, Edge { u, v, curve });
        self.next_edge = self.next_edge.max(id.0 + 1);
        Ok(())
    }

    pub(crate) fn add_node(&mut self, p: Point) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.nodes.insert(id, p);
        id
    }

    /// Insert an edge, snapping the curve endpoints onto the node positions.
    /// The curve must be oriented from `u` to `v`.
    pub(crate) fn add_edge(&mut self, u: NodeId, v: NodeId, mut curve: EdgeCurve) -> Result<EdgeId> {
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at {u}")));
        }
        let (pu, pv) = match (self.nodes.get(&u), self.nodes.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "edge references missing node {u} or {v}"
                )))
            }
        };
        curve.snap_endpoints(pu, pv);
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.edges.insert(id, Edge { u, v, curve });
        Ok(id)
    }

    pub(crate) fn remove_edge(&mut self, id: EdgeId) -> Option<Edge> {
        self.edges.remove(&id)
    }

    /// Remove a node; any still-incident edges are removed with it.
    pub(crate) fn remove_node(&mut self, id: NodeId) {
        let incident: Vec<EdgeId> = self.incident_edges(id);
        for e in incident {
            self.edges.remove(&e);
        }
        self.nodes.remove(&id);
    }

    /// Curve of `id` oriented so it starts at `from`.
    pub(crate) fn curve_from(&self, id: EdgeId, from: NodeId) -> EdgeCurve {
        let e = &self.edges[&id];
        if e.u == from {
            e.curve.clone()
        } else {
            e.curve.reversed()
        }
    }
}

/// Constructs [`ShapeGraph`] values, enforcing the structural invariants.
pub struct ShapeGraphBuilder {
    graph: ShapeGraph,
    violations: Vec<String>,
}

impl ShapeGraphBuilder {
    pub fn new(dim: usize) -> Self {
        Self::with_samples(dim, DEFAULT_SAMPLES_PER_EDGE)
    }

    pub fn with_samples(dim: usize, samples_per_edge: usize) -> Self {
        ShapeGraphBuilder {
            graph: ShapeGraph {
                dim: if dim == 3 { 3 } else { 2 },
                samples_per_edge: samples_per_edge.max(2),
                nodes: BTreeMap::new(),
                edges: BTreeMap::new(),
                next_node: 0,
                next_edge: 0,
            },
            violations: Vec::new(),
        }
    }

    pub fn add_node(&mut self, p: Point) -> NodeId {
        self.graph.add_node(p)
    }

    /// Insert a node with an explicit id (used when reloading documents).
    pub fn add_node_with_id(&mut self, id: u64, p: Point) -> Result<NodeId> {
        let id = NodeId(id);
        if self.graph.nodes.contains_key(&id) {
            return Err(Error::InvalidDocument(format!("duplicate node id {id}")));
        }
        self.graph.nodes.insert(id, p);
        self.graph.next_node = self.graph.next_node.max(id.0 + 1);
        Ok(id)
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId, curve: EdgeCurve) -> Result<EdgeId> {
        self.graph.add_edge(u, v, curve)
    }

    pub fn add_edge_with_id(
        &mut self,
        id: u64,
        u: NodeId,
        v: NodeId,
        mut curve: EdgeCurve,
    ) -> Result<EdgeId> {
        let id = EdgeId(id);
        if self.graph.edges.contains_key(&id) {
            return Err(Error::InvalidDocument(format!("duplicate edge id {id}")));
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at {u}")));
        }
        let (pu, pv) = match (self.graph.nodes.get(&u), self.graph.nodes.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                return Err(Error::InvalidDocument(format!(
                    "edge {id} references missing node {u} or {v}"
                )))
            }
        };
        curve.snap_endpoints(pu, pv);
        self.graph.edges.insert(id, Edge { u, v, curve });
        self.graph.next_edge = self.graph.next_edge.max(id.0 + 1);
        Ok(id)
    }

    /// Insert an edge without snapping or endpoint checks. For building
    /// deliberately malformed graphs that `validate` should flag.
    pub fn add_edge_unchecked(&mut self, u: NodeId, v: NodeId, curve: EdgeCurve) -> EdgeId {
        let id = EdgeId(self.graph.next_edge);
        self.graph.next_edge += 1;
        self.graph.edges.insert(id, Edge { u, v, curve });
        self.violations.push(format!("unchecked edge {id}"));
        id
    }

    pub fn build(self) -> ShapeGraph {
        self.graph
    }
}

/// One violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonFiniteNode(NodeId),
    NonFiniteCurve(EdgeId),
    CurveTooShort(EdgeId),
    SelfLoop(EdgeId),
    MissingEndpoint(EdgeId, NodeId),
    EndpointMismatch(EdgeId, NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteNode(n) => write!(f, "node {n} has non-finite coordinates"),
            Violation::NonFiniteCurve(e) => write!(f, "edge {e} has non-finite curve points"),
            Violation::CurveTooShort(e) => write!(f, "edge {e} has fewer than 2 curve points"),
            Violation::SelfLoop(e) => write!(f, "edge {e} is a self-loop"),
            Violation::MissingEndpoint(e, n) => write!(f, "edge {e} references missing node {n}"),
            Violation::EndpointMismatch(e, n) => {
                write!(f, "edge {e} curve endpoint differs from node {n} position")
            }
        }
    }
}

/// Check every structural invariant; an empty report means the graph is valid.
pub fn validate(g: &ShapeGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for (id, p) in g.nodes() {
        if !p.is_finite() {
            out.push(Violation::NonFiniteNode(id));
        }
    }
    for (id, e) in g.edges() {
        if e.curve.sample_count() < 2 {
            out.push(Violation::CurveTooShort(id));
        }
        if e.curve.points().iter().any(|p| !p.is_finite()) {
            out.push(Violation::NonFiniteCurve(id));
        }
        if e.u == e.v {
            out.push(Violation::SelfLoop(id));
        }
        for (node, endpoint) in [(e.u, e.curve.first()), (e.v, e.curve.last())] {
            match g.node(node) {
                None => out.push(Violation::MissingEndpoint(id, node)),
                Some(p) => {
                    if *p != endpoint {
                        out.push(Violation::EndpointMismatch(id, node));
                    }
                }
            }
        }
    }
    out
}

/// Partition node ids into maximal connected sets via edge adjacency.
pub fn connected_components(g: &ShapeGraph) -> Vec<BTreeSet<NodeId>> {
    let mut unseen: BTreeSet<NodeId> = g.node_ids().collect();
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (_, e) in g.edges() {
        adjacency.entry(e.u).or_default().push(e.v);
        adjacency.entry(e.v).or_default().push(e.u);
    }
    let mut components = Vec::new();
    while let Some(&start) = unseen.iter().next() {
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if !unseen.remove(&n) {
                continue;
            }
            comp.insert(n);
            if let Some(nbrs) = adjacency.get(&n) {
                for &nb in nbrs {
                    if unseen.contains(&nb) {
                        stack.push(nb);
                    }
                }
            }
        }
        components.push(comp);
    }
    components
}

pub fn is_connected(g: &ShapeGraph) -> bool {
    connected_components(g).len() <= 1
}

/// Remove every degree-two node whose neighbors are not themselves adjacent,
/// concatenating its two incident edges, until a fixed point is reached.
///
/// A degree-two node forming a triangle (its two neighbors are directly
/// adjacent) is kept, as is one whose incident edges are parallel (removal
/// would collapse a two-edge cycle into a self-loop).
pub fn elide_degree_two(g: &ShapeGraph) -> ShapeGraph {
    let mut g = g.clone();
    loop {
        let candidate = g.node_ids().find(|&n| elidable(&g, n));
        let Some(node) = candidate else {
            return g;
        };
        let incident = g.incident_edges(node);
        let (e1, e2) = (incident[0], incident[1]);
        let other1 = other_endpoint(&g, e1, node);
        let other2 = other_endpoint(&g, e2, node);
        // Concatenate other1 -> node -> other2, dropping the duplicated
        // midpoint sample, then resample to the lattice size.
        let c1 = g.curve_from(e1, other1);
        let c2 = g.curve_from(e2, node);
        let mut points = c1.points().to_vec();
        points.extend_from_slice(&c2.points()[1..]);
        let joined = resample_edge(
            &EdgeCurve::new(points).expect("concatenation has >= 3 points"),
            g.samples_per_edge(),
        );
        g.remove_edge(e1);
        g.remove_edge(e2);
        g.remove_node(node);
        g.add_edge(other1, other2, joined)
            .expect("endpoints exist and differ");
    }
}

fn elidable(g: &ShapeGraph, node: NodeId) -> bool {
    let incident = g.incident_edges(node);
    if incident.len() != 2 {
        return false;
    }
    let a = other_endpoint(g, incident[0], node);
    let b = other_endpoint(g, incident[1], node);
    // Parallel incident edges (a == b) would concatenate into a self-loop;
    // adjacent neighbors form the triangle case. Both are kept.
    a != b && !g.adjacent(a, b)
}

fn other_endpoint(g: &ShapeGraph, edge: EdgeId, node: NodeId) -> NodeId {
    let e = g.edge(edge).unwrap();
    if e.u == node {
        e.v
    } else {
        e.u
    }
}
