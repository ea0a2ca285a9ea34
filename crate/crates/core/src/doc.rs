//! The native graph-document JSON format.
//!
//! Documents round-trip losslessly: floats serialize with full shortest-
//! round-trip precision, keys keep struct order, and node/edge ids survive,
//! so `parse(write(g))` reproduces `g` bit-exactly for finite coordinates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{EdgeCurve, ShapeGraph, ShapeGraphBuilder};
use crate::reduce::ReductionParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocNode {
    pub id: u64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEdge {
    pub id: u64,
    pub u: u64,
    pub v: u64,
    pub points: Vec<Vec<f64>>,
}

/// Cluster labels attached to a document's own nodes and edges, used for
/// provenance-colored rendering.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterLabels {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nodes: BTreeMap<u64, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edges: BTreeMap<u64, usize>,
}

impl ClusterLabels {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DocMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ReductionParams>,
    #[serde(default, skip_serializing_if = "ClusterLabels::is_empty")]
    pub clusters: ClusterLabels,
    /// SWC per-sample (index, type, radius) triples preserved from
    /// ingestion; unused by any computation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub swc_samples: Vec<(i64, i32, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: u32,
    pub dim: usize,
    pub samples_per_edge: usize,
    pub nodes: Vec<DocNode>,
    pub edges: Vec<DocEdge>,
    #[serde(default)]
    pub metadata: DocMetadata,
}

/// Capture a graph (plus metadata) as a document.
pub fn to_document(g: &ShapeGraph, metadata: DocMetadata) -> GraphDocument {
    let dim = g.dim();
    GraphDocument {
        schema_version: SCHEMA_VERSION,
        dim,
        samples_per_edge: g.samples_per_edge(),
        nodes: g
            .nodes()
            .map(|(id, p)| DocNode {
                id: id.0,
                coords: p.coords[..dim].to_vec(),
            })
            .collect(),
        edges: g
            .edges()
            .map(|(id, e)| DocEdge {
                id: id.0,
                u: e.u.0,
                v: e.v.0,
                points: e
                    .curve
                    .points()
                    .iter()
                    .map(|p| p.coords[..dim].to_vec())
                    .collect(),
            })
            .collect(),
        metadata,
    }
}

/// Rebuild the graph described by a document, checking its invariants.
pub fn from_document(doc: &GraphDocument) -> Result<ShapeGraph> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: doc.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if doc.dim != 2 && doc.dim != 3 {
        return Err(Error::InvalidDocument(format!("dim must be 2 or 3, got {}", doc.dim)));
    }
    let mut builder = ShapeGraphBuilder::with_samples(doc.dim, doc.samples_per_edge);
    for node in &doc.nodes {
        if node.coords.len() != doc.dim {
            return Err(Error::InvalidDocument(format!(
                "node {} has {} coordinates in a {}-dimensional document",
                node.id,
                node.coords.len(),
                doc.dim
            )));
        }
        let p = Point::from_slice(&node.coords);
        if !p.is_finite() {
            return Err(Error::InvalidDocument(format!(
                "node {} has non-finite coordinates",
                node.id
            )));
        }
        builder.add_node_with_id(node.id, p)?;
    }
    for edge in &doc.edges {
        if edge.points.len() < 2 {
            return Err(Error::InvalidDocument(format!(
                "edge {} has fewer than 2 points",
                edge.id
            )));
        }
        let mut pts = Vec::with_capacity(edge.points.len());
        for raw in &edge.points {
            if raw.len() != doc.dim {
                return Err(Error::InvalidDocument(format!(
                    "edge {} has a point with {} coordinates",
                    edge.id,
                    raw.len()
                )));
            }
            pts.push(Point::from_slice(raw));
        }
        let curve = EdgeCurve::new(pts)?;
        builder.add_edge_with_id(
            edge.id,
            crate::graph::NodeId(edge.u),
            crate::graph::NodeId(edge.v),
            curve,
        )?;
    }
    Ok(builder.build())
}

/// Serialize a graph document as pretty-printed JSON with stable key order.
pub fn write_graph(g: &ShapeGraph, metadata: DocMetadata) -> String {
    serde_json::to_string_pretty(&to_document(g, metadata)).expect("document serializes")
}

/// Parse graph-document JSON back into a graph and its metadata.
pub fn parse_graph(text: &str) -> Result<(ShapeGraph, DocMetadata)> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    let graph = from_document(&doc)?;
    Ok((graph, doc.metadata))
}
