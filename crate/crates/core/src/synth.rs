//! Seeded generators for synthetic shape graphs and curves.
//!
//! These produce vessel-network-like test inputs: random spatial trees grown
//! by nearest-neighbor attachment with gently curved edges, plus optional
//! cross-links that introduce cycles. Everything is deterministic in the
//! seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::graph::{resample_edge, EdgeCurve, NodeId, ShapeGraph, ShapeGraphBuilder};
use crate::srvf::Reparam;

/// Random spatial tree with `n` nodes in dimension `dim` (2 or 3).
///
/// Nodes attach to the nearest existing node, biased outward so the result
/// spreads like a vascular tree; edges are slightly bowed rather than
/// straight.
pub fn random_tree_graph(seed: u64, n: usize, dim: usize) -> ShapeGraph {
    random_network_graph(seed, n, dim, 0)
}

/// Random spatial network: a tree plus `extra_edges` cross-links forming
/// cycles.
pub fn random_network_graph(seed: u64, n: usize, dim: usize, extra_edges: usize) -> ShapeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = crate::graph::DEFAULT_SAMPLES_PER_EDGE;
    let mut b = ShapeGraphBuilder::with_samples(dim, t);

    let mut positions: Vec<Point> = Vec::with_capacity(n);
    let mut ids: Vec<NodeId> = Vec::with_capacity(n);
    let first = Point::ORIGIN;
    positions.push(first);
    ids.push(b.add_node(first));

    for _ in 1..n {
        // Candidate position near a random existing node.
        let anchor = positions[rng.random_range(0..positions.len())];
        let step = 0.5 + rng.random::<f64>() * 1.5;
        let dir = random_unit(&mut rng, dim);
        let pos = anchor.add(&dir.scale(step));
        // Attach to the nearest existing node.
        let (nearest, _) = positions
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.dist_sq(&pos)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let id = b.add_node(pos);
        let curve = bowed_curve(positions[nearest], pos, &mut rng, t);
        b.add_edge(ids[nearest], id, curve).expect("fresh nodes");
        positions.push(pos);
        ids.push(id);
    }

    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < extra_edges * 20 + 20 {
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        if positions[i].dist(&positions[j]) > 4.0 {
            continue;
        }
        let curve = bowed_curve(positions[i], positions[j], &mut rng, t);
        if b.add_edge(ids[i], ids[j], curve).is_ok() {
            added += 1;
        }
    }
    b.build()
}

/// A segment from `a` to `b` bowed sideways by a random fraction of its
/// length.
fn bowed_curve(a: Point, b: Point, rng: &mut ChaCha8Rng, t: usize) -> EdgeCurve {
    let chord = b.sub(&a);
    let len = chord.norm();
    if len < 1e-9 {
        return EdgeCurve::segment(a, b, t);
    }
    let dir = chord.scale(1.0 / len);
    // A deterministic perpendicular in the plane of the chord.
    let helper = if dir.x().abs() < 0.9 {
        Point::new3(1.0, 0.0, 0.0)
    } else {
        Point::new3(0.0, 1.0, 0.0)
    };
    let perp = dir.cross(&helper).normalized().unwrap_or(Point::ORIGIN);
    let bow = (rng.random::<f64>() - 0.5) * 0.4 * len;
    let pts: Vec<Point> = (0..t)
        .map(|k| {
            let s = k as f64 / (t - 1) as f64;
            let along = a.add(&chord.scale(s));
            along.add(&perp.scale(bow * (std::f64::consts::PI * s).sin()))
        })
        .collect();
    resample_edge(&EdgeCurve::new(pts).expect("t >= 2"), t)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let x = rng.random::<f64>() * 2.0 - 1.0;
        let y = rng.random::<f64>() * 2.0 - 1.0;
        let z = if dim == 3 {
            rng.random::<f64>() * 2.0 - 1.0
        } else {
            0.0
        };
        let v = Point::new3(x, y, z);
        if let Some(unit) = v.normalized() {
            if v.norm() <= 1.0 {
                return unit;
            }
        }
    }
}

/// Smooth random open curve in R^2 of length about one.
///
/// Built by integrating a random tangent angle whose derivative (and hence
/// the curvature) is bounded near 2.5, so a 30-sample arc-length resampling
/// keeps the length within 0.1%.
pub fn random_smooth_curve(seed: u64, t: usize) -> EdgeCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = (rng.random::<f64>() - 0.5) * 1.2;
    let modes = 4;
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let angle = |s: f64| -> f64 {
        let mut theta = base;
        for (m, (a, b)) in coeffs.iter().enumerate() {
            let w = std::f64::consts::PI * (m + 1) as f64 * s;
            theta += 0.2 * (a * w.sin() + b * (w.cos() - 1.0)) / (m + 1) as f64;
        }
        theta
    };
    let h = 1.0 / (t - 1) as f64;
    let mut pts = Vec::with_capacity(t);
    let mut p = Point::ORIGIN;
    pts.push(p);
    for k in 1..t {
        let mid = angle((k as f64 - 0.5) * h);
        p = p.add(&Point::new2(mid.cos() * h, mid.sin() * h));
        pts.push(p);
    }
    EdgeCurve::new(pts).expect("t >= 2")
}

/// Smooth random diffeomorphism of the unit interval with slopes bounded away
/// from the lattice stencil limits.
pub fn random_reparam(seed: u64, t: usize) -> Reparam {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Amplitudes keep gamma's slope within roughly [0.4, 1.6], well inside
    // the alignment lattice's representable slope range.
    let a1 = (rng.random::<f64>() - 0.5) * 0.4;
    let a2 = (rng.random::<f64>() - 0.5) * 0.2;
    let gamma: Vec<f64> = (0..t)
        .map(|k| {
            let s = k as f64 / (t - 1) as f64;
            let warp = a1 * (std::f64::consts::PI * s).sin()
                + a2 * (2.0 * std::f64::consts::PI * s).sin();
            (s + s * (1.0 - s) * warp).clamp(0.0, 1.0)
        })
        .collect();
    let mut gamma = gamma;
    gamma[0] = 0.0;
    let last = gamma.len() - 1;
    gamma[last] = 1.0;
    for k in 1..gamma.len() {
        if gamma[k] < gamma[k - 1] {
            gamma[k] = gamma[k - 1];
        }
    }
    Reparam::from_unit_values(&gamma).expect("constructed monotone")
}
