//! SVG rendering of shape graphs and reduction ladders.
//!
//! Edges draw as polylines and nodes as dots. Planar graphs render in one
//! panel; 3D graphs render as three axis-aligned orthographic views stacked
//! vertically. A multi-resolution result lays its graphs out left to right,
//! one column per resolution. With cluster coloring enabled, elements carrying
//! a provenance cluster label get a palette fill and unclustered ones stay
//! black. Output is deterministic and references no external resources.

use std::fmt::Write as _;

use crate::doc::ClusterLabels;
use crate::geometry::Point;
use crate::graph::ShapeGraph;
use crate::reduce::MultiResResult;

const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
    "#fabebe", "#008080", "#e6beff", "#9a6324",
];

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Side length of one square panel in user units.
    pub panel_size: f64,
    pub stroke_width: f64,
    pub node_radius: f64,
    /// Fill nodes/edges by provenance cluster labels when present.
    pub color_clusters: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            panel_size: 400.0,
            stroke_width: 1.0,
            node_radius: 2.5,
            color_clusters: false,
        }
    }
}

fn color_for(label: Option<usize>, enabled: bool) -> &'static str {
    match label {
        Some(l) if enabled => PALETTE[l % PALETTE.len()],
        _ => "#000000",
    }
}

/// Orthographic projection for the given view: xy, then xz, then yz.
fn project(p: &Point, view: usize) -> (f64, f64) {
    match view {
        0 => (p.x(), p.y()),
        1 => (p.x(), p.z()),
        _ => (p.y(), p.z()),
    }
}

struct Panel<'a> {
    graph: &'a ShapeGraph,
    clusters: Option<&'a ClusterLabels>,
    view: usize,
    col: usize,
    row: usize,
}

/// Render one graph (optionally with provenance cluster labels).
pub fn render_svg(g: &ShapeGraph, clusters: Option<&ClusterLabels>, opts: &RenderOptions) -> String {
    let views = if g.dim() == 3 { 3 } else { 1 };
    let panels: Vec<Panel> = (0..views)
        .map(|view| Panel {
            graph: g,
            clusters,
            view,
            col: 0,
            row: view,
        })
        .collect();
    render_panels(&panels, opts)
}

/// Render a multi-resolution ladder, one column per resolution level.
pub fn render_multires(result: &MultiResResult, opts: &RenderOptions) -> String {
    let graphs = result.graphs();
    let mut owned_labels: Vec<Option<ClusterLabels>> = vec![None; graphs.len()];
    if opts.color_clusters {
        for (i, level) in result.levels.iter().enumerate() {
            owned_labels[i + 1] = Some(level.surviving_cluster_labels());
        }
    }
    let mut panels = Vec::new();
    for (col, (_, g)) in graphs.iter().enumerate() {
        let views = if g.dim() == 3 { 3 } else { 1 };
        for view in 0..views {
            panels.push(Panel {
                graph: g,
                clusters: owned_labels[col].as_ref(),
                view,
                col,
                row: view,
            });
        }
    }
    render_panels(&panels, opts)
}

fn render_panels(panels: &[Panel], opts: &RenderOptions) -> String {
    let size = opts.panel_size;
    let cols = panels.iter().map(|p| p.col).max().unwrap_or(0) + 1;
    let rows = panels.iter().map(|p| p.row).max().unwrap_or(0) + 1;
    let total_w = cols as f64 * size;
    let total_h = rows as f64 * size;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {total_w:.3} {total_h:.3}\">"
    );
    for panel in panels {
        render_one_panel(&mut out, panel, opts);
    }
    out.push_str("</svg>\n");
    out
}

fn render_one_panel(out: &mut String, panel: &Panel, opts: &RenderOptions) {
    let g = panel.graph;
    let size = opts.panel_size;
    let origin_x = panel.col as f64 * size;
    let origin_y = panel.row as f64 * size;

    // Data bounds in this view with a 5% margin.
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut expand = |p: (f64, f64)| {
        min.0 = min.0.min(p.0);
        min.1 = min.1.min(p.1);
        max.0 = max.0.max(p.0);
        max.1 = max.1.max(p.1);
    };
    for (_, p) in g.nodes() {
        expand(project(p, panel.view));
    }
    for (_, e) in g.edges() {
        for p in e.curve.points() {
            expand(project(p, panel.view));
        }
    }
    if !min.0.is_finite() {
        min = (0.0, 0.0);
        max = (1.0, 1.0);
    }
    let span = ((max.0 - min.0).max(1e-9), (max.1 - min.1).max(1e-9));
    let margin = 0.05 * span.0.max(span.1);
    let world = (span.0 + 2.0 * margin).max(span.1 + 2.0 * margin);
    let scale = size / world;
    let to_screen = |p: (f64, f64)| -> (f64, f64) {
        let x = origin_x + (p.0 - min.0 + margin) * scale;
        // Flip y so larger world-y is up.
        let y = origin_y + size - (p.1 - min.1 + margin) * scale;
        (x, y)
    };

    let _ = writeln!(out, "  <g class=\"panel\">");
    for (id, e) in g.edges() {
        let label = panel.clusters.and_then(|c| c.edges.get(&id.0)).copied();
        let stroke = color_for(label, opts.color_clusters);
        let mut points = String::new();
        for p in e.curve.points() {
            let (x, y) = to_screen(project(p, panel.view));
            let _ = write!(points, "{x:.3},{y:.3} ");
        }
        let _ = writeln!(
            out,
            "    <polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{:.3}\" points=\"{}\"/>",
            opts.stroke_width,
            points.trim_end()
        );
    }
    for (id, p) in g.nodes() {
        let label = panel.clusters.and_then(|c| c.nodes.get(&id.0)).copied();
        let fill = color_for(label, opts.color_clusters);
        let (x, y) = to_screen(project(p, panel.view));
        let _ = writeln!(
            out,
            "    <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{:.3}\" fill=\"{fill}\"/>",
            opts.node_radius
        );
    }
    let _ = writeln!(out, "  </g>");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeCurve, ShapeGraphBuilder};
    use crate::reduce::{multires, ReductionParams};
    use crate::synth::random_tree_graph;

    fn two_node_graph() -> ShapeGraph {
        let mut b = ShapeGraphBuilder::with_samples(2, 8);
        let u = b.add_node(Point::new2(0.0, 0.0));
        let v = b.add_node(Point::new2(3.0, 1.0));
        b.add_edge(u, v, EdgeCurve::segment(Point::new2(0.0, 0.0), Point::new2(3.0, 1.0), 8))
            .unwrap();
        b.build()
    }

    #[test]
    fn one_edge_two_circles() {
        let svg = render_svg(&two_node_graph(), None, &RenderOptions::default());
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn three_views_for_3d() {
        let g = random_tree_graph(3, 10, 3);
        let svg = render_svg(&g, None, &RenderOptions::default());
        assert_eq!(svg.matches("class=\"panel\"").count(), 3);
    }

    #[test]
    fn multires_panels_left_to_right() {
        let g = random_tree_graph(8, 50, 2);
        let result = multires(&g, &ReductionParams::default()).unwrap();
        let svg = render_multires(&result, &RenderOptions::default());
        // Base plus three levels.
        assert_eq!(svg.matches("class=\"panel\"").count(), 4);
    }

    #[test]
    fn cluster_coloring_uses_palette_and_black() {
        let g = two_node_graph();
        let mut clusters = ClusterLabels::default();
        clusters.nodes.insert(0, 0);
        let opts = RenderOptions {
            color_clusters: true,
            ..RenderOptions::default()
        };
        let svg = render_svg(&g, Some(&clusters), &opts);
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains("#000000"));
    }

    #[test]
    fn output_is_balanced_xml_without_external_refs() {
        let g = random_tree_graph(5, 20, 2);
        let svg = render_svg(&g, None, &RenderOptions::default());
        assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
        assert_eq!(svg.matches("<svg").count(), svg.matches("</svg>").count());
        assert!(!svg.contains("http://") || svg.contains("http://www.w3.org/2000/svg"));
        assert!(!svg.contains("href"));
        // Deterministic output.
        assert_eq!(svg, render_svg(&g, None, &RenderOptions::default()));
    }
}
