//! Edge and node dissimilarities: chamfer distance, effective resistance,
//! and the per-edge descriptive statistics (curvature, tortuosity).

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{edge_length, is_connected, EdgeCurve, NodeId, ShapeGraph};

/// Edge lengths below this are clamped when used as resistance weights.
const MIN_EDGE_LENGTH: f64 = 1e-9;

/// Sentinel tortuosity for edges with coincident endpoints.
pub const TORTUOSITY_CAP: f64 = 1e6;

/// A symmetric nonnegative dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(size: usize) -> Self {
        DistanceMatrix {
            size,
            entries: vec![0.0; size * size],
        }
    }

    /// Build by evaluating `f` on every unordered index pair, in parallel.
    pub fn from_fn_symmetric(size: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let pairs: Vec<(usize, usize, f64)> = (0..size)
            .flat_map(|i| ((i + 1)..size).map(move |j| (i, j)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(i, j)| (i, j, f(i, j)))
            .collect();
        let mut m = DistanceMatrix::zeros(size);
        for (i, j, v) in pairs {
            m.set(i, j, v);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.size + j] = value;
        self.entries[j * self.size + i] = value;
    }

    /// All upper-triangle entries (i < j) in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size * (self.size.saturating_sub(1)) / 2);
        for i in 0..self.size {
            for j in (i + 1)..self.size {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Chamfer distance between two sampled edges: the symmetric average of
/// directed nearest-sample distances. Not a metric (no triangle inequality).
pub fn chamfer(e1: &EdgeCurve, e2: &EdgeCurve) -> f64 {
    directed_chamfer(e1, e2) + directed_chamfer(e2, e1)
}

fn directed_chamfer(from: &EdgeCurve, to: &EdgeCurve) -> f64 {
    let sum: f64 = from
        .points()
        .iter()
        .map(|p| {
            to.points()
                .iter()
                .map(|q| p.dist_sq(q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    sum / from.sample_count() as f64
}

/// Pairwise chamfer distances between all edges of a graph, indexed in edge-id
/// order.
pub fn chamfer_matrix(g: &ShapeGraph) -> DistanceMatrix {
    let curves: Vec<&EdgeCurve> = g.edges().map(|(_, e)| &e.curve).collect();
    DistanceMatrix::from_fn_symmetric(curves.len(), |i, j| chamfer(curves[i], curves[j]))
}

/// Effective resistance between all node pairs of a connected graph.
///
/// Edge weights are reciprocal lengths (parallel edges sum); the weighted
/// Laplacian Q = S - W is pseudoinverted through a full symmetric
/// eigendecomposition, zeroing eigenvalues below 1e-10 of the largest, which
/// realizes the inverse on the complement of span{1} and the zero map on
/// span{1}. Row/column order follows ascending node id.
pub fn effective_resistance(g: &ShapeGraph) -> Result<DistanceMatrix> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let nodes: Vec<NodeId> = g.node_ids().collect();
    let index: std::collections::BTreeMap<NodeId, usize> =
        nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();

    let mut weights = DMatrix::<f64>::zeros(n, n);
    for (_, e) in g.edges() {
        let w = 1.0 / edge_length(&e.curve).max(MIN_EDGE_LENGTH);
        let (i, j) = (index[&e.u], index[&e.v]);
        weights[(i, j)] += w;
        weights[(j, i)] += w;
    }
    let mut laplacian = -weights.clone();
    for i in 0..n {
        let strength: f64 = weights.row(i).sum();
        laplacian[(i, i)] = strength;
    }

    let eig = laplacian.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = 1e-10 * lambda_max.max(1.0);
    // Q+ = sum over nonzero eigenvalues of (1/lambda) u u^T.
    let mut pinv = DMatrix::<f64>::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let u = eig.eigenvectors.column(k);
            let scale = 1.0 / lambda;
            for i in 0..n {
                for j in 0..n {
                    pinv[(i, j)] += scale * u[i] * u[j];
                }
            }
        }
    }

    let mut out = DistanceMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pinv[(i, i)] + pinv[(j, j)] - 2.0 * pinv[(i, j)];
            out.set(i, j, d.max(0.0));
        }
    }
    Ok(out)
}

/// Average curvature of an edge: discrete curvature at each interior sample
/// integrated by arc length and divided by the total length.
///
/// At each interior sample the curvature is the turning angle between the
/// adjacent segment directions divided by the mean of their lengths; this
/// converges to 1/r on circles.
pub fn avg_curvature(e: &EdgeCurve) -> f64 {
    let pts = e.points();
    let len = edge_length(e);
    if len <= 0.0 || pts.len() < 3 {
        return 0.0;
    }
    let mut integral = 0.0;
    for k in 1..pts.len() - 1 {
        let before = pts[k].sub(&pts[k - 1]);
        let after = pts[k + 1].sub(&pts[k]);
        let (lb, la) = (before.norm(), after.norm());
        if lb < 1e-12 || la < 1e-12 {
            continue;
        }
        let cos_t = (before.dot(&after) / (lb * la)).clamp(-1.0, 1.0);
        if cos_t >= 1.0 - 1e-12 {
            // Collinear up to rounding; acos noise would otherwise leak in.
            continue;
        }
        // kappa = angle / mean segment length; the arc-length element is that
        // same mean, so each sample contributes its turning angle.
        integral += cos_t.acos();
    }
    integral / len
}

/// Tortuosity: arc length over endpoint chord length; 1 for straight edges.
/// Coincident endpoints yield the capped sentinel value.
pub fn tortuosity(e: &EdgeCurve) -> f64 {
    let len = edge_length(e);
    let chord = e.first().dist(&e.last());
    if chord < MIN_EDGE_LENGTH {
        (len / MIN_EDGE_LENGTH).min(TORTUOSITY_CAP)
    } else {
        len / chord
    }
}

/// True when the edge's endpoints coincide and [`tortuosity`] returned the
/// capped sentinel.
pub fn tortuosity_is_degenerate(e: &EdgeCurve) -> bool {
    e.first().dist(&e.last()) < MIN_EDGE_LENGTH
}
