//! Shape graphs: spatial graphs with curve-valued edges.
//!
//! This crate models networks embedded in R^2 or R^3 whose edges carry full
//! spatial curves (retinal blood vessels, neuron reconstructions), reduces
//! their complexity through terminal-edge trimming and hierarchical
//! node/edge clustering into a multi-resolution ladder, and runs
//! interpretable-feature classification experiments over the ladder.
//!
//! The main pieces:
//!
//! * [`graph`] — the [`ShapeGraph`] data model, resampling, component
//!   joining, degree-two elision, validation.
//! * [`srvf`] — square-root velocity representation of edge curves, elastic
//!   shape distance, Karcher means, mean edges.
//! * [`metrics`] — chamfer distance, effective resistance, per-edge
//!   curvature and tortuosity statistics.
//! * [`cluster`] — agglomerative hierarchical clustering over dissimilarity
//!   matrices.
//! * [`reduce`] — terminal trimming, node/edge clustering reductions, and
//!   the multi-resolution cycle.
//! * [`features`] — the 37-dimensional interpretable feature vector.
//! * [`svm`] — RBF-kernel SVM with SMO training and cross-validated grid
//!   search.
//! * [`swc`], [`doc`], [`svg`] — file formats and rendering.

pub mod cluster;
pub mod doc;
pub mod error;
pub mod features;
pub mod geometry;
pub mod graph;
pub mod join;
pub mod metrics;
pub mod reduce;
pub mod srvf;
pub mod stats;
pub mod svg;
pub mod svm;
pub mod swc;
pub mod synth;

pub use cluster::{cut_by_ceiling, cut_by_count, linkage, Dendrogram, Linkage, Merge};
pub use doc::{
    from_document, parse_graph, to_document, write_graph, ClusterLabels, DocMetadata,
    GraphDocument,
};
pub use error::{Error, Result};
pub use features::{
    feature_names, features, write_feature_csv, FeatureMode, FeatureRow, FeatureVector,
};
pub use geometry::Point;
pub use graph::{
    connected_components, edge_length, elide_degree_two, is_connected, resample_edge, validate,
    Edge, EdgeCurve, EdgeId, NodeId, ShapeGraph, ShapeGraphBuilder, Violation,
    DEFAULT_SAMPLES_PER_EDGE,
};
pub use join::join_components;
pub use metrics::{
    avg_curvature, chamfer, chamfer_matrix, effective_resistance, tortuosity, DistanceMatrix,
};
pub use reduce::{
    multires, reduce_edges, reduce_nodes, trim, trim_short_terminals, trim_similar_terminals,
    EdgeFate, EdgeReduction, MultiResLevel, MultiResResult, NodeReduction, ReductionParams,
    Trimmed,
};
pub use srvf::{
    apply_reparam, from_srvf, karcher_mean, karcher_mean_detailed, mean_edge, optimal_reparam,
    shape_distance, to_srvf, KarcherMean, Reparam, Srvf,
};
pub use svg::{render_multires, render_svg, RenderOptions};
pub use svm::{
    cross_validate, predict, train, CrossValidation, CvScheme, GridCell, GridSpec, GridSummary,
    SvmModel,
};
pub use swc::{parse_swc, parse_swc_records, SwcRecord};
