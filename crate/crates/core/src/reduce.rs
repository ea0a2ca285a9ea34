//! Complexity reduction: terminal-edge trimming, node- and edge-clustering
//! reductions, and the multi-resolution cycle that chains them.
//!
//! Trimming removes terminal edges that are very short or near-duplicates of
//! nearby terminal edges. Node clustering groups nodes by effective
//! resistance (complete linkage) and replaces each cluster with one node;
//! edge clustering groups edges by chamfer distance (average linkage) and
//! replaces each multi-edge cluster with a node. The multi-resolution cycle
//! runs edge clustering, node clustering, and trimming at each target
//! resolution, producing a ladder of progressively simpler graphs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cluster::{cut_by_ceiling, cut_by_count, linkage, Linkage};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Point};
use crate::graph::{
    edge_length, elide_degree_two, is_connected, EdgeCurve, EdgeId, NodeId, ShapeGraph,
};
use crate::join::join_components;
use crate::metrics::{chamfer_matrix, effective_resistance};
use crate::srvf::mean_edge;
use crate::stats::percentile;

/// Tuning parameters for trimming and the resolution ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    /// Fraction of the length percentile used as the short-edge threshold.
    pub theta_tag: f64,
    /// Percentile (0-100) of edge lengths anchoring the short-edge threshold.
    pub theta_til: f64,
    /// Percentile (0-100) of pairwise chamfer distances used as the
    /// similar-terminal cluster ceiling.
    pub phi_til: f64,
    /// Strictly decreasing resolutions in (0, 1).
    pub resolutions: Vec<f64>,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams {
            theta_tag: 0.25,
            theta_til: 50.0,
            phi_til: 1.0,
            resolutions: vec![0.8, 0.6, 0.4],
        }
    }
}

impl ReductionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_tag > 0.0 && self.theta_tag <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta_tag must be in (0, 1], got {}",
                self.theta_tag
            )));
        }
        for (name, p) in [("theta_til", self.theta_til), ("phi_til", self.phi_til)] {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be a percentile in [0, 100], got {p}"
                )));
            }
        }
        for w in self.resolutions.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidArgument(
                    "resolutions must be strictly decreasing".into(),
                ));
            }
        }
        if self
            .resolutions
            .iter()
            .any(|r| !(0.0 < *r && *r < 1.0))
        {
            return Err(Error::InvalidArgument(
                "resolutions must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a trimming stage, with removal provenance.
#[derive(Debug, Clone)]
pub struct Trimmed {
    pub graph: ShapeGraph,
    /// Edges removed as short terminals.
    pub removed_short: Vec<EdgeId>,
    /// Edges removed as redundant members of similar-terminal clusters.
    pub removed_similar: Vec<EdgeId>,
    /// Cluster label per terminal edge from the similar-terminal pass.
    pub terminal_clusters: BTreeMap<EdgeId, usize>,
    pub warnings: Vec<String>,
}

impl Trimmed {
    fn unchanged(graph: ShapeGraph) -> Self {
        Trimmed {
            graph,
            removed_short: Vec::new(),
            removed_similar: Vec::new(),
            terminal_clusters: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

/// Remove terminal edges shorter than a length threshold, repeatedly.
///
/// The threshold is `theta_tag` times the `theta_til` percentile of all edge
/// lengths, fixed once at entry. Each round removes the qualifying terminal
/// edges together with their terminal nodes, then elides freshly exposed
/// non-triangle degree-two nodes so chains of short terminals are not eaten
/// piecemeal. Stops when no terminal edge is below the threshold; a removal
/// that would delete the last edge is skipped with a warning.
pub fn trim_short_terminals(g: &ShapeGraph, theta_tag: f64, theta_til: f64) -> Trimmed {
    let mut out = Trimmed::unchanged(g.clone());
    if g.edge_count() == 0 {
        return out;
    }
    let lengths: Vec<f64> = g.edges().map(|(_, e)| edge_length(&e.curve)).collect();
    let threshold = theta_tag * percentile(&lengths, theta_til);

    loop {
        let victims: Vec<EdgeId> = out
            .graph
            .edge_ids()
            .filter(|&id| {
                out.graph.is_terminal_edge(id)
                    && edge_length(&out.graph.edge(id).unwrap().curve) < threshold
            })
            .collect();
        if victims.is_empty() {
            break;
        }
        let mut removed_any = false;
        for id in victims {
            if out.graph.edge_count() == 1 {
                out.warnings
                    .push("trimming would delete the last edge; kept".into());
                break;
            }
            remove_terminal_edge(&mut out.graph, id);
            out.removed_short.push(id);
            removed_any = true;
        }
        if !removed_any {
            break;
        }
        out.graph = elide_degree_two(&out.graph);
        if out.graph.node_count() <= 1 {
            out.warnings
                .push("graph reduced to a trivial remnant by trimming".into());
            break;
        }
    }
    out
}

/// Remove all but the longest edge from each cluster of similar terminal
/// edges.
///
/// Pairwise chamfer distances over all edges set the cluster ceiling at the
/// `phi_til` percentile; terminal edges are then single-linkage clustered
/// under that ceiling and each cluster keeps only its longest member.
pub fn trim_similar_terminals(g: &ShapeGraph, phi_til: f64) -> Trimmed {
    let mut out = Trimmed::unchanged(g.clone());
    if g.edge_count() < 2 {
        return out;
    }
    let edge_ids: Vec<EdgeId> = g.edge_ids().collect();
    let all = chamfer_matrix(g);
    let radius = percentile(&all.upper_triangle(), phi_til);

    let terminals: Vec<usize> = edge_ids
        .iter()
        .enumerate()
        .filter(|(_, id)| g.is_terminal_edge(**id))
        .map(|(i, _)| i)
        .collect();
    if terminals.is_empty() {
        return out;
    }
    let sub = crate::metrics::DistanceMatrix::from_fn_symmetric(terminals.len(), |i, j| {
        all.get(terminals[i], terminals[j])
    });
    let labels = cut_by_ceiling(&linkage(&sub, Linkage::Single), radius);

    let mut clusters: BTreeMap<usize, Vec<EdgeId>> = BTreeMap::new();
    for (slot, &label) in labels.iter().enumerate() {
        let id = edge_ids[terminals[slot]];
        out.terminal_clusters.insert(id, label);
        clusters.entry(label).or_default().push(id);
    }
    for members in clusters.values() {
        // Longest member survives; ties keep the lowest id.
        let keep = members
            .iter()
            .copied()
            .max_by(|a, b| {
                let la = edge_length(&g.edge(*a).unwrap().curve);
                let lb = edge_length(&g.edge(*b).unwrap().curve);
                la.partial_cmp(&lb).unwrap().then(b.cmp(a))
            })
            .unwrap();
        for &id in members.iter().filter(|&&id| id != keep) {
            remove_terminal_edge(&mut out.graph, id);
            out.removed_similar.push(id);
        }
    }
    out.graph = elide_degree_two(&out.graph);
    out
}

/// One round of terminal edge removal: short-terminal trimming followed by
/// similar-terminal trimming.
pub fn trim(g: &ShapeGraph, params: &ReductionParams) -> Trimmed {
    let short = trim_short_terminals(g, params.theta_tag, params.theta_til);
    let mut similar = trim_similar_terminals(&short.graph, params.phi_til);
    similar.removed_short = short.removed_short;
    let mut warnings = short.warnings;
    warnings.append(&mut similar.warnings);
    similar.warnings = warnings;
    similar
}

/// Remove a terminal edge along with its degree-one endpoints.
fn remove_terminal_edge(g: &mut ShapeGraph, id: EdgeId) {
    let Some(edge) = g.edge(id) else { return };
    let (u, v) = (edge.u, edge.v);
    let drop_u = g.degree(u) == 1;
    let drop_v = g.degree(v) == 1;
    g.remove_edge(id);
    if drop_u {
        g.remove_node(u);
    }
    if drop_v {
        g.remove_node(v);
    }
}

/// How an input element fared through a clustering reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFate {
    /// Kept verbatim (singleton edge cluster).
    Retained,
    /// Absorbed into the numbered cluster.
    Clustered(usize),
    /// Dropped (connected two nodes of the same node cluster).
    Dropped,
}

/// Result of a node-clustering reduction.
#[derive(Debug, Clone)]
pub struct NodeReduction {
    pub graph: ShapeGraph,
    /// Cluster label for every input node.
    pub node_clusters: BTreeMap<NodeId, usize>,
    /// New node representing each cluster label (pre-elision).
    pub cluster_nodes: BTreeMap<usize, NodeId>,
    /// Fate of every input edge.
    pub edge_fates: BTreeMap<EdgeId, EdgeFate>,
    pub warnings: Vec<String>,
}

/// Cluster the nodes to `n_target` groups by effective resistance (complete
/// linkage) and rebuild the graph over the cluster representatives.
///
/// Each cluster becomes one node at the Euclidean mean of its members.
/// Clusters are adjacent when any prior adjacency existed between members,
/// and each new edge is the Karcher mean of all prior edges connecting the
/// two clusters, fit to the new nodes. Intra-cluster edges are dropped and
/// the result is degree-two elided.
pub fn reduce_nodes(g: &ShapeGraph, n_target: usize) -> Result<NodeReduction> {
    let n = g.node_count();
    if n_target >= n {
        return Err(Error::TargetNotReduction {
            target: n_target,
            current: n,
        });
    }
    if n_target == 0 {
        return Err(Error::InvalidArgument("node target must be positive".into()));
    }
    let node_ids: Vec<NodeId> = g.node_ids().collect();
    let resistance = effective_resistance(g)?;
    let labels = cut_by_count(&linkage(&resistance, Linkage::Complete), n_target)?;

    let mut members: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    let mut node_clusters = BTreeMap::new();
    for (slot, &label) in labels.iter().enumerate() {
        node_clusters.insert(node_ids[slot], label);
        members.entry(label).or_default().push(node_ids[slot]);
    }

    let mut out = g.clone_structure();
    let mut cluster_nodes = BTreeMap::new();
    for (label, ids) in &members {
        let positions: Vec<Point> = ids.iter().map(|id| *g.node(*id).unwrap()).collect();
        cluster_nodes.insert(*label, out.add_node(centroid(&positions)));
    }

    // Group surviving edges by unordered cluster pair.
    let mut cross: BTreeMap<(usize, usize), Vec<EdgeId>> = BTreeMap::new();
    let mut edge_fates = BTreeMap::new();
    for (id, e) in g.edges() {
        let (cu, cv) = (node_clusters[&e.u], node_clusters[&e.v]);
        if cu == cv {
            edge_fates.insert(id, EdgeFate::Dropped);
        } else {
            let key = (cu.min(cv), cu.max(cv));
            cross.entry(key).or_default().push(id);
        }
    }

    let mut warnings = Vec::new();
    let t = g.samples_per_edge();
    for ((ci, cj), edge_ids) in &cross {
        let (na, nb) = (cluster_nodes[ci], cluster_nodes[cj]);
        let (pa, pb) = (*out.node(na).unwrap(), *out.node(nb).unwrap());
        // Orient every contributing edge from its ci-side endpoint.
        let curves: Vec<EdgeCurve> = edge_ids
            .iter()
            .map(|id| {
                let e = g.edge(*id).unwrap();
                let from = if node_clusters[&e.u] == *ci { e.u } else { e.v };
                g.curve_from(*id, from)
            })
            .collect();
        let curve = if pa.dist(&pb) < 1e-12 {
            warnings.push(format!(
                "cluster centers of {ci} and {cj} coincide; degenerate edge"
            ));
            EdgeCurve::segment(pa, pb, t)
        } else {
            mean_edge(&curves, pa, pb, t)?
        };
        out.add_edge(na, nb, curve)?;
        for id in edge_ids {
            edge_fates.insert(*id, EdgeFate::Clustered(*ci));
        }
    }

    let graph = elide_degree_two(&out);
    Ok(NodeReduction {
        graph,
        node_clusters,
        cluster_nodes,
        edge_fates,
        warnings,
    })
}

/// Result of an edge-clustering reduction.
#[derive(Debug, Clone)]
pub struct EdgeReduction {
    pub graph: ShapeGraph,
    /// Fate of every input edge: retained singleton or cluster member.
    pub edge_fates: BTreeMap<EdgeId, EdgeFate>,
    /// New node representing each true (multi-edge) cluster.
    pub cluster_nodes: BTreeMap<usize, NodeId>,
    pub warnings: Vec<String>,
}

/// Cluster the edges to `m_target` groups by chamfer distance (average
/// linkage) and replace each multi-edge cluster with a node.
///
/// Singleton clusters keep their edge and endpoint nodes verbatim. A true
/// cluster becomes a node at the Euclidean mean of the unique endpoints of
/// its member edges. Two cluster nodes are adjacent when some input node
/// bounds an edge of each; a retained node is adjacent to a cluster holding
/// any of its incident edges. New edges are Karcher means of the incident
/// member edges. The output can have more nodes than `m_target`; if the
/// rebuild disconnects the graph it is repaired by component joining.
pub fn reduce_edges(g: &ShapeGraph, m_target: usize) -> Result<EdgeReduction> {
    let m = g.edge_count();
    if m_target >= m {
        return Err(Error::TargetNotReduction {
            target: m_target,
            current: m,
        });
    }
    if m_target == 0 {
        return Err(Error::InvalidArgument("edge target must be positive".into()));
    }
    let edge_ids: Vec<EdgeId> = g.edge_ids().collect();
    let labels = cut_by_count(&linkage(&chamfer_matrix(g), Linkage::Average), m_target)?;

    let mut members: BTreeMap<usize, Vec<EdgeId>> = BTreeMap::new();
    for (slot, &label) in labels.iter().enumerate() {
        members.entry(label).or_default().push(edge_ids[slot]);
    }

    let mut edge_fates = BTreeMap::new();
    let mut retained_nodes: BTreeSet<NodeId> = BTreeSet::new();
    let mut true_clusters: BTreeMap<usize, &Vec<EdgeId>> = BTreeMap::new();
    for (label, ids) in &members {
        if ids.len() == 1 {
            let e = g.edge(ids[0]).unwrap();
            retained_nodes.insert(e.u);
            retained_nodes.insert(e.v);
            edge_fates.insert(ids[0], EdgeFate::Retained);
        } else {
            true_clusters.insert(*label, ids);
            for id in ids {
                edge_fates.insert(*id, EdgeFate::Clustered(*label));
            }
        }
    }

    let mut out = g.clone_structure();
    for id in &retained_nodes {
        out.insert_node_with_id(*id, *g.node(*id).unwrap());
    }
    for ids in members.values() {
        if ids.len() == 1 {
            let e = g.edge(ids[0]).unwrap();
            out.insert_edge_with_id(ids[0], e.u, e.v, e.curve.clone())?;
        }
    }

    // Cluster representative nodes at the mean of unique member endpoints.
    let mut cluster_nodes = BTreeMap::new();
    for (label, ids) in &true_clusters {
        let mut endpoint_ids: BTreeSet<NodeId> = BTreeSet::new();
        for id in *ids {
            let e = g.edge(*id).unwrap();
            endpoint_ids.insert(e.u);
            endpoint_ids.insert(e.v);
        }
        let positions: Vec<Point> = endpoint_ids.iter().map(|n| *g.node(*n).unwrap()).collect();
        cluster_nodes.insert(*label, out.add_node(centroid(&positions)));
    }

    // Incidence index: cluster label -> member edges per input node.
    let mut incident_in_cluster: BTreeMap<(NodeId, usize), Vec<EdgeId>> = BTreeMap::new();
    for (label, ids) in &true_clusters {
        for id in *ids {
            let e = g.edge(*id).unwrap();
            for node in [e.u, e.v] {
                incident_in_cluster
                    .entry((node, *label))
                    .or_default()
                    .push(*id);
            }
        }
    }

    let t = g.samples_per_edge();
    let mut warnings = Vec::new();

    // Cluster-cluster adjacencies through shared endpoint nodes.
    let cluster_labels: Vec<usize> = true_clusters.keys().copied().collect();
    for (x, &ci) in cluster_labels.iter().enumerate() {
        for &cj in &cluster_labels[x + 1..] {
            let mut shared_edges: BTreeSet<EdgeId> = BTreeSet::new();
            let mut any_shared_node = false;
            for node in g.node_ids() {
                let in_i = incident_in_cluster.get(&(node, ci));
                let in_j = incident_in_cluster.get(&(node, cj));
                if let (Some(a), Some(b)) = (in_i, in_j) {
                    any_shared_node = true;
                    shared_edges.extend(a.iter().copied());
                    shared_edges.extend(b.iter().copied());
                }
            }
            if !any_shared_node {
                continue;
            }
            let (na, nb) = (cluster_nodes[&ci], cluster_nodes[&cj]);
            let (pa, pb) = (*out.node(na).unwrap(), *out.node(nb).unwrap());
            let curves: Vec<EdgeCurve> = shared_edges
                .iter()
                .map(|id| {
                    // Orient from a shared endpoint (lowest id if both are).
                    let e = g.edge(*id).unwrap();
                    let from = pick_orientation_node(&incident_in_cluster, e.u, e.v, ci, cj);
                    g.curve_from(*id, from)
                })
                .collect();
            let curve = degenerate_or_mean(&curves, pa, pb, t, &mut warnings)?;
            out.add_edge(na, nb, curve)?;
        }
    }

    // Retained-node to cluster adjacencies.
    for node in &retained_nodes {
        for label in true_clusters.keys() {
            let Some(cluster_edges) = incident_in_cluster.get(&(*node, *label)) else {
                continue;
            };
            let nb = cluster_nodes[label];
            let (pa, pb) = (*out.node(*node).unwrap(), *out.node(nb).unwrap());
            // Mean over the retained node's singleton edges plus the cluster
            // members at this node, all oriented leaving the node.
            let mut curves: Vec<EdgeCurve> = Vec::new();
            for id in g.incident_edges(*node) {
                if edge_fates[&id] == EdgeFate::Retained {
                    curves.push(g.curve_from(id, *node));
                }
            }
            for id in cluster_edges {
                curves.push(g.curve_from(*id, *node));
            }
            let curve = degenerate_or_mean(&curves, pa, pb, t, &mut warnings)?;
            out.add_edge(*node, nb, curve)?;
        }
    }

    let graph = if is_connected(&out) {
        out
    } else {
        warnings.push("edge clustering disconnected the graph; rejoined".into());
        join_components(&out)?
    };

    Ok(EdgeReduction {
        graph,
        edge_fates,
        cluster_nodes,
        warnings,
    })
}

fn pick_orientation_node(
    incident: &BTreeMap<(NodeId, usize), Vec<EdgeId>>,
    u: NodeId,
    v: NodeId,
    ci: usize,
    cj: usize,
) -> NodeId {
    let shared = |n: NodeId| {
        incident.contains_key(&(n, ci)) && incident.contains_key(&(n, cj))
    };
    if shared(u) {
        u
    } else if shared(v) {
        v
    } else {
        u
    }
}

fn degenerate_or_mean(
    curves: &[EdgeCurve],
    pa: Point,
    pb: Point,
    t: usize,
    warnings: &mut Vec<String>,
) -> Result<EdgeCurve> {
    if pa.dist(&pb) < 1e-12 {
        warnings.push("adjacent representatives coincide; degenerate edge".into());
        Ok(EdgeCurve::segment(pa, pb, t))
    } else if curves.is_empty() {
        Ok(EdgeCurve::segment(pa, pb, t))
    } else {
        mean_edge(curves, pa, pb, t)
    }
}

/// One rung of the multi-resolution ladder.
#[derive(Debug, Clone)]
pub struct MultiResLevel {
    pub resolution: f64,
    pub edge_target: usize,
    pub node_target: usize,
    /// Edge-clustering stage output, when the step ran.
    pub edge_stage: Option<EdgeReduction>,
    /// Node-clustering stage output, when the step ran.
    pub node_stage: Option<NodeReduction>,
    /// Final trim whose graph is this level's reduced graph.
    pub trim: Trimmed,
}

impl MultiResLevel {
    pub fn graph(&self) -> &ShapeGraph {
        &self.trim.graph
    }

    /// Cluster labels for this level's surviving representative nodes,
    /// suitable for provenance-colored rendering.
    pub fn surviving_cluster_labels(&self) -> crate::doc::ClusterLabels {
        let mut labels = crate::doc::ClusterLabels::default();
        let graph = self.graph();
        let stage_nodes = self
            .node_stage
            .as_ref()
            .map(|s| &s.cluster_nodes)
            .or_else(|| self.edge_stage.as_ref().map(|s| &s.cluster_nodes));
        if let Some(cluster_nodes) = stage_nodes {
            for (cluster, node) in cluster_nodes {
                if graph.node(*node).is_some() {
                    labels.nodes.insert(node.0, *cluster);
                }
            }
        }
        labels
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(s) = &self.edge_stage {
            out.extend(s.warnings.iter().cloned());
        }
        if let Some(s) = &self.node_stage {
            out.extend(s.warnings.iter().cloned());
        }
        out.extend(self.trim.warnings.iter().cloned());
        out
    }
}

/// A multi-resolution reduction: the trimmed baseline plus one graph per
/// requested resolution.
#[derive(Debug, Clone)]
pub struct MultiResResult {
    /// Preliminary trim of the input (the graph at resolution 1).
    pub base: Trimmed,
    /// Edge count of the trimmed baseline.
    pub base_edges: usize,
    /// Node count of the trimmed baseline.
    pub base_nodes: usize,
    pub levels: Vec<MultiResLevel>,
}

impl MultiResResult {
    /// All graphs in the ladder, paired with their resolution (1.0 first).
    pub fn graphs(&self) -> Vec<(f64, &ShapeGraph)> {
        let mut out = vec![(1.0, &self.base.graph)];
        for level in &self.levels {
            out.push((level.resolution, level.graph()));
        }
        out
    }
}

/// Multi-resolution reduction of a connected shape graph.
///
/// The input is trimmed into the baseline `G_0`; its edge and node counts fix
/// the per-level cluster targets `ceil(rho * m_0)` and `ceil(rho * n_0)`.
/// Each level runs edge clustering, node clustering, and a final trim. A
/// clustering step whose target is not a strict reduction of the current
/// graph is skipped, and the node target never exceeds the previous level's
/// node count so ladder node counts are nonincreasing.
pub fn multires(g: &ShapeGraph, params: &ReductionParams) -> Result<MultiResResult> {
    params.validate()?;
    let base = trim(g, params);
    let base_edges = base.graph.edge_count();
    let base_nodes = base.graph.node_count();
    let mut current = base.graph.clone();
    let mut levels = Vec::new();

    for &rho in &params.resolutions {
        let edge_target = (rho * base_edges as f64).ceil() as usize;
        let node_target_ladder = (rho * base_nodes as f64).ceil() as usize;
        // Never allow a level to end with more nodes than the previous one.
        let node_target = node_target_ladder.min(current.node_count()).max(1);

        let edge_stage = if edge_target >= 1 && edge_target < current.edge_count() {
            Some(reduce_edges(&current, edge_target)?)
        } else {
            None
        };
        let after_edge = edge_stage
            .as_ref()
            .map(|s| s.graph.clone())
            .unwrap_or_else(|| current.clone());

        let node_stage = if node_target < after_edge.node_count() {
            Some(reduce_nodes(&after_edge, node_target)?)
        } else {
            None
        };
        let after_node = node_stage
            .as_ref()
            .map(|s| s.graph.clone())
            .unwrap_or(after_edge);

        let level_trim = trim(&after_node, params);
        current = level_trim.graph.clone();
        levels.push(MultiResLevel {
            resolution: rho,
            edge_target,
            node_target,
            edge_stage,
            node_stage,
            trim: level_trim,
        });
    }

    Ok(MultiResResult {
        base,
        base_edges,
        base_nodes,
        levels,
    })
}
