//! Interpretable graph statistics for classification.
//!
//! Each graph reduces to 37 numbers: node counts by degree, edge count,
//! total/percentile/mean edge lengths, and the same percentile blocks for
//! per-edge average curvature and tortuosity. The reduced mode keeps only
//! the first 17 entries, excluding the curvature and tortuosity blocks.

use std::io::Write;

use crate::error::Result;
use crate::graph::{edge_length, ShapeGraph};
use crate::metrics::{avg_curvature, tortuosity, tortuosity_is_degenerate};
use crate::stats::{mean, percentile_sorted};

/// Percentile levels used by every edge-statistic block.
pub const PERCENTILE_LEVELS: [f64; 9] = [0.0, 5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0, 100.0];

/// Which slice of the feature vector an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// All 37 statistics.
    Full37,
    /// The first 17, excluding average curvature and tortuosity.
    Reduced17,
}

impl FeatureMode {
    pub fn feature_count(&self) -> usize {
        match self {
            FeatureMode::Full37 => 37,
            FeatureMode::Reduced17 => 17,
        }
    }
}

/// The ordered feature values of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [f64; 37],
    mode: FeatureMode,
    /// Set when the graph had no edges (edge statistics default to zero) or
    /// a tortuosity sentinel participated.
    pub degenerate: bool,
}

impl FeatureVector {
    /// Values in table order, truncated to the mode's length.
    pub fn values(&self) -> &[f64] {
        &self.values[..self.mode.feature_count()]
    }

    pub fn full(&self) -> &[f64; 37] {
        &self.values
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }
}

/// Column names in table order.
pub fn feature_names() -> Vec<String> {
    let mut names = vec![
        "n_nodes".to_string(),
        "n_deg1".to_string(),
        "n_deg2".to_string(),
        "n_deg3".to_string(),
        "n_deg4plus".to_string(),
        "n_edges".to_string(),
        "total_length".to_string(),
    ];
    for block in ["len", "curv", "tort"] {
        for p in PERCENTILE_LEVELS {
            names.push(format!("{block}_p{}", p as u32));
        }
        let mean_name = match block {
            "len" => "mean_length",
            "curv" => "mean_curvature",
            _ => "mean_tortuosity",
        };
        names.push(mean_name.to_string());
    }
    names
}

/// Compute the feature vector of a graph.
///
/// Degree counts use multigraph degree (parallel edges count separately).
/// Percentiles interpolate linearly between order statistics. A graph with
/// no edges keeps zero edge statistics and is flagged degenerate.
pub fn features(g: &ShapeGraph, mode: FeatureMode) -> FeatureVector {
    let mut values = [0.0f64; 37];
    values[0] = g.node_count() as f64;
    for (id, _) in g.nodes() {
        match g.degree(id) {
            1 => values[1] += 1.0,
            2 => values[2] += 1.0,
            3 => values[3] += 1.0,
            d if d >= 4 => values[4] += 1.0,
            _ => {}
        }
    }
    values[5] = g.edge_count() as f64;

    let mut degenerate = g.edge_count() == 0;
    if g.edge_count() > 0 {
        let mut lengths = Vec::with_capacity(g.edge_count());
        let mut curvatures = Vec::with_capacity(g.edge_count());
        let mut tortuosities = Vec::with_capacity(g.edge_count());
        for (_, e) in g.edges() {
            lengths.push(edge_length(&e.curve));
            curvatures.push(avg_curvature(&e.curve));
            tortuosities.push(tortuosity(&e.curve));
            degenerate |= tortuosity_is_degenerate(&e.curve);
        }
        values[6] = lengths.iter().sum();
        fill_block(&mut values[7..17], &lengths);
        fill_block(&mut values[17..27], &curvatures);
        fill_block(&mut values[27..37], &tortuosities);
    }

    FeatureVector {
        values,
        mode,
        degenerate,
    }
}

/// Write the nine percentiles followed by the mean into a 10-wide block.
fn fill_block(slot: &mut [f64], raw: &[f64]) {
    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (i, p) in PERCENTILE_LEVELS.iter().enumerate() {
        slot[i] = percentile_sorted(&sorted, *p);
    }
    slot[9] = mean(raw);
}

/// One labeled row destined for the feature CSV.
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub id: String,
    pub label: String,
    pub features: FeatureVector,
}

/// Write rows as CSV: `id,label,<feature columns>` with the header naming
/// every feature in table order.
pub fn write_feature_csv<W: Write>(out: &mut W, rows: &[FeatureRow], mode: FeatureMode) -> Result<()> {
    let names = feature_names();
    write!(out, "id,label")?;
    for name in names.iter().take(mode.feature_count()) {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{},{}", row.id, row.label)?;
        for v in row.features.values().iter().take(mode.feature_count()) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::graph::{EdgeCurve, ShapeGraphBuilder};

    #[test]
    fn single_straight_edge() {
        let mut b = ShapeGraphBuilder::with_samples(2, 10);
        let u = b.add_node(Point::new2(0.0, 0.0));
        let v = b.add_node(Point::new2(2.0, 0.0));
        b.add_edge(u, v, EdgeCurve::segment(Point::new2(0.0, 0.0), Point::new2(2.0, 0.0), 10))
            .unwrap();
        let g = b.build();
        let f = features(&g, FeatureMode::Full37);
        let v = f.full();
        assert_eq!(v[0], 2.0); // nodes
        assert_eq!(v[1], 2.0); // deg 1
        assert_eq!(v[5], 1.0); // edges
        assert!((v[6] - 2.0).abs() < 1e-12);
        for i in 7..17 {
            assert!((v[i] - 2.0).abs() < 1e-12, "length stat {i}");
        }
        for i in 17..27 {
            assert_eq!(v[i], 0.0, "curvature stat {i}");
        }
        for i in 27..37 {
            assert!((v[i] - 1.0).abs() < 1e-12, "tortuosity stat {i}");
        }
    }

    #[test]
    fn star_with_three_unit_arms() {
        let mut b = ShapeGraphBuilder::with_samples(2, 10);
        let c = b.add_node(Point::new2(0.0, 0.0));
        for k in 0..3 {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let tip = Point::new2(a.cos(), a.sin());
            let t = b.add_node(tip);
            b.add_edge(c, t, EdgeCurve::segment(Point::new2(0.0, 0.0), tip, 10))
                .unwrap();
        }
        let g = b.build();
        let f = features(&g, FeatureMode::Full37);
        let v = f.full();
        assert_eq!(v[0], 4.0);
        assert_eq!(v[1], 3.0); // tips
        assert_eq!(v[3], 1.0); // center
        assert_eq!(v[5], 3.0);
        assert!((v[6] - 3.0).abs() < 1e-9);
        for i in 7..17 {
            assert!((v[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_mode_is_prefix_of_full() {
        let g = crate::synth::random_tree_graph(5, 20, 2);
        let full = features(&g, FeatureMode::Full37);
        let reduced = features(&g, FeatureMode::Reduced17);
        assert_eq!(reduced.values().len(), 17);
        assert_eq!(&full.values()[..17], reduced.values());
    }

    #[test]
    fn degree_counts_sum_to_node_count() {
        let g = crate::synth::random_network_graph(9, 30, 2, 4);
        let v = *features(&g, FeatureMode::Full37).full();
        assert_eq!(v[1] + v[2] + v[3] + v[4], v[0]);
    }

    #[test]
    fn percentile_blocks_nondecreasing() {
        let g = crate::synth::random_network_graph(13, 40, 3, 3);
        let v = *features(&g, FeatureMode::Full37).full();
        for start in [7, 17, 27] {
            for i in start..start + 8 {
                assert!(v[i + 1] >= v[i] - 1e-12, "block at {start}, index {i}");
            }
        }
    }

    #[test]
    fn translation_invariant() {
        let g = crate::synth::random_tree_graph(21, 25, 2);
        let f1 = features(&g, FeatureMode::Full37);
        // Rebuild the same graph shifted.
        let shift = Point::new2(100.0, -50.0);
        let mut b = ShapeGraphBuilder::with_samples(g.dim(), g.samples_per_edge());
        let mut map = std::collections::BTreeMap::new();
        for (id, p) in g.nodes() {
            map.insert(id, b.add_node(p.add(&shift)));
        }
        for (_, e) in g.edges() {
            let pts: Vec<Point> = e.curve.points().iter().map(|p| p.add(&shift)).collect();
            b.add_edge(map[&e.u], map[&e.v], EdgeCurve::new(pts).unwrap())
                .unwrap();
        }
        let f2 = features(&b.build(), FeatureMode::Full37);
        for (a, b) in f1.full().iter().zip(f2.full()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn invariant_to_id_relabeling() {
        let g = crate::synth::random_network_graph(37, 22, 2, 3);
        let f1 = features(&g, FeatureMode::Full37);
        // Rebuild with nodes inserted in reverse, renumbering every id.
        let mut b = ShapeGraphBuilder::with_samples(g.dim(), g.samples_per_edge());
        let mut map = std::collections::BTreeMap::new();
        let nodes: Vec<_> = g.nodes().map(|(id, p)| (id, *p)).collect();
        for (id, p) in nodes.iter().rev() {
            map.insert(*id, b.add_node(*p));
        }
        let edges: Vec<_> = g.edges().map(|(_, e)| e.clone()).collect();
        for e in edges.iter().rev() {
            b.add_edge(map[&e.u], map[&e.v], e.curve.clone()).unwrap();
        }
        let f2 = features(&b.build(), FeatureMode::Full37);
        for (a, b) in f1.full().iter().zip(f2.full()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_edge_graph_is_degenerate() {
        let mut b = ShapeGraphBuilder::new(2);
        b.add_node(Point::new2(0.0, 0.0));
        let g = b.build();
        let f = features(&g, FeatureMode::Full37);
        assert!(f.degenerate);
        assert_eq!(f.full()[5], 0.0);
        assert_eq!(f.full()[6], 0.0);
    }

    #[test]
    fn csv_has_expected_columns() {
        let g = crate::synth::random_tree_graph(2, 10, 2);
        let row = FeatureRow {
            id: "g0".into(),
            label: "healthy".into(),
            features: features(&g, FeatureMode::Reduced17),
        };
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &[row], FeatureMode::Reduced17).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 2 + 17);
        assert_eq!(header[0], "id");
        assert_eq!(header[2], "n_nodes");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 2 + 17);
    }

    #[test]
    fn total_length_matches_edge_sum() {
        let g = crate::synth::random_network_graph(31, 35, 2, 2);
        let v = *features(&g, FeatureMode::Full37).full();
        let direct: f64 = g.edges().map(|(_, e)| edge_length(&e.curve)).sum();
        assert!((v[6] - direct).abs() < 1e-9);
    }
}
