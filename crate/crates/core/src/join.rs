//! Automatic connection of disconnected shape graphs.
//!
//! Data imperfections can leave a graph in several components. The repair
//! repeatedly finds the closest Euclidean point pair between one component
//! and the rest (at least one of the two points must be a node), splits an
//! edge when the chosen point lies mid-curve, and bridges the gap with an
//! edge shaped like the Karcher mean of the edges incident to the two new
//! endpoints.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{connected_components, resample_edge, EdgeCurve, EdgeId, NodeId, ShapeGraph};
use crate::srvf::mean_edge;

/// A candidate attachment point: an existing node, or an interior sample of
/// an edge (which must be split into a node before bridging).
#[derive(Debug, Clone, Copy, PartialEq)]
enum Anchor {
    Node(NodeId),
    EdgeSample(EdgeId, usize),
}

/// Join all connected components into one by inserting bridge edges.
///
/// Node positions of the input are preserved; edges are only added (or split
/// in place when a bridge lands mid-edge). Already-connected graphs return
/// unchanged.
pub fn join_components(g: &ShapeGraph) -> Result<ShapeGraph> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut g = g.clone();
    loop {
        let comps = connected_components(&g);
        if comps.len() <= 1 {
            return Ok(g);
        }
        // The component holding the smallest node id is joined first.
        let chosen = comps
            .iter()
            .min_by_key(|c| c.iter().next().copied())
            .unwrap()
            .clone();
        let (a, b) = closest_cross_pair(&g, &chosen);
        let node_a = materialize(&mut g, a);
        let node_b = materialize(&mut g, b);
        let bridge = bridge_curve(&g, node_a, node_b)?;
        g.add_edge(node_a, node_b, bridge)?;
    }
}

/// Closest pair of points across the component boundary such that at least
/// one side is a node. Ties resolve to the first candidate in a fixed scan
/// order (nodes ascending, then edge samples ascending by id and index).
fn closest_cross_pair(g: &ShapeGraph, chosen: &BTreeSet<NodeId>) -> (Anchor, Anchor) {
    let inside = |n: &NodeId| chosen.contains(n);
    let mut best = f64::INFINITY;
    let mut pair = None;

    let side_nodes = |in_chosen: bool| {
        g.nodes()
            .filter(move |(id, _)| inside(id) == in_chosen)
            .collect::<Vec<_>>()
    };
    let nodes_a = side_nodes(true);
    let nodes_b = side_nodes(false);

    // Node-node candidates.
    for (na, pa) in &nodes_a {
        for (nb, pb) in &nodes_b {
            let d = pa.dist(pb);
            if d < best {
                best = d;
                pair = Some((Anchor::Node(*na), Anchor::Node(*nb)));
            }
        }
    }
    // Node on one side against interior edge samples on the other, both ways.
    for (flip, nodes) in [(false, &nodes_a), (true, &nodes_b)] {
        for (eid, edge) in g.edges() {
            let edge_in_chosen = inside(&edge.u);
            // Pair chosen-side nodes with complement edges and vice versa.
            if edge_in_chosen != flip {
                continue;
            }
            let pts = edge.curve.points();
            for (nid, npos) in nodes {
                for k in 1..pts.len() - 1 {
                    let d = npos.dist(&pts[k]);
                    if d < best {
                        best = d;
                        let anchor = Anchor::EdgeSample(eid, k);
                        pair = Some(if flip {
                            (anchor, Anchor::Node(*nid))
                        } else {
                            (Anchor::Node(*nid), anchor)
                        });
                    }
                }
            }
        }
    }
    pair.expect("both sides nonempty")
}

/// Turn an anchor into a node, splitting its host edge at the sample point
/// when necessary. Splitting keeps all curves on the T-sample lattice.
fn materialize(g: &mut ShapeGraph, anchor: Anchor) -> NodeId {
    match anchor {
        Anchor::Node(n) => n,
        Anchor::EdgeSample(eid, k) => {
            let edge = g.remove_edge(eid).expect("anchor edge exists");
            let pts = edge.curve.points().to_vec();
            let t = g.samples_per_edge();
            let mid = g.add_node(pts[k]);
            let first = EdgeCurve::new(pts[..=k].to_vec()).expect("split keeps >= 2 points");
            let second = EdgeCurve::new(pts[k..].to_vec()).expect("split keeps >= 2 points");
            g.add_edge(edge.u, mid, resample_edge(&first, t))
                .expect("endpoints exist");
            g.add_edge(mid, edge.v, resample_edge(&second, t))
                .expect("endpoints exist");
            mid
        }
    }
}

/// Bridge shape: Karcher mean of the edges incident to the two endpoints,
/// each oriented leaving its endpoint, fit to the gap. Isolated endpoints
/// fall back to a straight segment.
fn bridge_curve(g: &ShapeGraph, a: NodeId, b: NodeId) -> Result<EdgeCurve> {
    let t = g.samples_per_edge();
    let pa = *g.node(a).expect("node a exists");
    let pb = *g.node(b).expect("node b exists");
    let mut nearby = Vec::new();
    for (node, reverse) in [(a, false), (b, true)] {
        for eid in g.incident_edges(node) {
            let curve = g.curve_from(eid, node);
            nearby.push(if reverse { curve.reversed() } else { curve });
        }
    }
    if nearby.is_empty() || pa.dist(&pb) < 1e-12 {
        return Ok(EdgeCurve::segment(pa, pb, t));
    }
    mean_edge(&nearby, pa, pb, t)
}
