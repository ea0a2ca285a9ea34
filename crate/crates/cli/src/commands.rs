//! Subcommand implementations.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use shapegraph::reduce::{multires, ReductionParams};
use shapegraph::svm::{cross_validate, CvScheme, GridSpec};
use shapegraph::{
    features as graph_features, join_components, render_svg, write_feature_csv, write_graph,
    DocMetadata, FeatureMode, FeatureRow, RenderOptions,
};

use crate::io::{load_graph, write_atomic};
use crate::stem_of;

/// Errors split by exit code: usage problems (1) and data problems (2).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

pub fn connect(input: &Path, output: &Path, samples: usize) -> Result<(), CliError> {
    let (graph, mut meta) = load_graph(input, samples)?;
    let joined = join_components(&graph).map_err(|e| CliError::Data(e.to_string()))?;
    meta.source = Some(input.display().to_string());
    write_atomic(output, &write_graph(&joined, meta))
}

#[allow(clippy::too_many_arguments)]
pub fn reduce(
    input: &Path,
    outdir: &Path,
    resolutions: Vec<f64>,
    theta_tag: f64,
    theta_til: f64,
    phi_til: f64,
    emit_intermediates: bool,
    samples: usize,
) -> Result<(), CliError> {
    let params = ReductionParams {
        theta_tag,
        theta_til,
        phi_til,
        resolutions,
    };
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (graph, _) = load_graph(input, samples)?;
    let graph = join_components(&graph).map_err(|e| CliError::Data(e.to_string()))?;
    let result = multires(&graph, &params).map_err(|e| CliError::Data(e.to_string()))?;

    let stem = stem_of(input);
    let source = Some(input.display().to_string());
    let meta_for = |resolution: f64, clusters, notes: Vec<String>| DocMetadata {
        source: source.clone(),
        resolution: Some(resolution),
        params: Some(params.clone()),
        clusters,
        notes,
        ..DocMetadata::default()
    };

    for warning in &result.base.warnings {
        eprintln!("warning: {warning}");
    }
    let base_meta = meta_for(1.0, Default::default(), result.base.warnings.clone());
    write_atomic(
        &outdir.join(format!("{stem}_1.000.json")),
        &write_graph(&result.base.graph, base_meta),
    )?;

    for level in &result.levels {
        for warning in level.warnings() {
            eprintln!("warning: {warning}");
        }
        let name = format!("{stem}_{:.3}.json", level.resolution);
        let meta = meta_for(
            level.resolution,
            level.surviving_cluster_labels(),
            level.warnings(),
        );
        write_atomic(&outdir.join(name), &write_graph(level.graph(), meta))?;

        if emit_intermediates {
            if let Some(stage) = &level.edge_stage {
                let mut clusters = shapegraph::ClusterLabels::default();
                for (cluster, node) in &stage.cluster_nodes {
                    if stage.graph.node(*node).is_some() {
                        clusters.nodes.insert(node.0, *cluster);
                    }
                }
                let name = format!("{stem}_{:.3}.edge.json", level.resolution);
                let meta = meta_for(level.resolution, clusters, stage.warnings.clone());
                write_atomic(&outdir.join(name), &write_graph(&stage.graph, meta))?;
            }
            if let Some(stage) = &level.node_stage {
                let mut clusters = shapegraph::ClusterLabels::default();
                for (cluster, node) in &stage.cluster_nodes {
                    if stage.graph.node(*node).is_some() {
                        clusters.nodes.insert(node.0, *cluster);
                    }
                }
                let name = format!("{stem}_{:.3}.node.json", level.resolution);
                let meta = meta_for(level.resolution, clusters, stage.warnings.clone());
                write_atomic(&outdir.join(name), &write_graph(&stage.graph, meta))?;
            }
        }
    }
    Ok(())
}

pub fn features(
    pattern: &str,
    output: &Path,
    mode: &str,
    labels: Option<&Path>,
) -> Result<(), CliError> {
    let mode = match mode {
        "37" => FeatureMode::Full37,
        "17" => FeatureMode::Reduced17,
        other => return Err(CliError::Usage(format!("mode must be 37 or 17, got {other}"))),
    };
    let label_map = labels.map(read_labels).transpose()?;

    let mut paths: Vec<std::path::PathBuf> = glob::glob(pattern)
        .map_err(|e| CliError::Usage(format!("bad glob '{pattern}': {e}")))?
        .filter_map(|entry| entry.ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no files match '{pattern}'")));
    }

    // Per-graph work is independent; rows come back in path order.
    let rows = paths
        .par_iter()
        .map(|path| {
            let (graph, _) = load_graph(path, shapegraph::DEFAULT_SAMPLES_PER_EDGE)?;
            let id = stem_of(path);
            let label = label_map
                .as_ref()
                .and_then(|m| m.get(&id).cloned())
                .unwrap_or_default();
            Ok(FeatureRow {
                id,
                label,
                features: graph_features(&graph, mode),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &rows, mode).map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(output, &String::from_utf8(buf).expect("csv is utf-8"))
}

/// Two-column `id,label` file (comma or whitespace separated, # comments).
fn read_labels(path: &Path) -> Result<std::collections::BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut map = std::collections::BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, label) = line
            .split_once(',')
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| CliError::Data(format!("bad label line '{line}'")))?;
        map.insert(id.trim().to_string(), label.trim().to_string());
    }
    Ok(map)
}

#[derive(Serialize)]
struct ClassifySummary {
    scheme: String,
    grid: String,
    seed: u64,
    samples: usize,
    classes: Vec<String>,
    cells: usize,
    average: f64,
    max: f64,
    std: f64,
    best_h: f64,
    best_eta: f64,
}

pub fn classify(
    features_path: &Path,
    scheme: &str,
    grid_name: &str,
    seed: u64,
    out: &Path,
    table: Option<&Path>,
) -> Result<(), CliError> {
    let scheme_parsed = parse_scheme(scheme)?;
    let grid = match grid_name {
        "default" => GridSpec::default(),
        "coarse" => GridSpec::coarse(),
        other => {
            return Err(CliError::Usage(format!(
                "grid must be 'default' or 'coarse', got {other}"
            )))
        }
    };
    let (x, y) = read_feature_csv(features_path)?;
    let cv = cross_validate(&x, &y, scheme_parsed, &grid, seed)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let mut classes: Vec<String> = y.clone();
    classes.sort();
    classes.dedup();
    let summary = ClassifySummary {
        scheme: scheme.to_string(),
        grid: grid_name.to_string(),
        seed,
        samples: x.len(),
        classes,
        cells: cv.cells.len(),
        average: cv.summary.average,
        max: cv.summary.max,
        std: cv.summary.std,
        best_h: cv.best_h,
        best_eta: cv.best_eta,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(out, &json)?;

    if let Some(table_path) = table {
        let mut csv = String::from("h,eta,accuracy\n");
        for cell in &cv.cells {
            csv.push_str(&format!("{},{},{}\n", cell.h, cell.eta, cell.accuracy));
        }
        write_atomic(table_path, &csv)?;
    }
    Ok(())
}

fn parse_scheme(text: &str) -> Result<CvScheme, CliError> {
    if text == "loo" {
        return Ok(CvScheme::LeaveOneOut);
    }
    if let Some(k) = text.strip_prefix("kfold:") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::Usage(format!("bad fold count in '{text}'")))?;
        return Ok(CvScheme::KFold(k));
    }
    Err(CliError::Usage(format!(
        "scheme must be 'loo' or 'kfold:K', got '{text}'"
    )))
}

/// Read back a CSV produced by `features`: id,label,then numeric columns.
fn read_feature_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<String>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data("empty feature csv".into()))?;
    let columns = header.split(',').count();
    if columns < 3 || !header.starts_with("id,label") {
        return Err(CliError::Data(
            "feature csv must start with 'id,label,...'".into(),
        ));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(CliError::Data(format!(
                "line {}: expected {columns} fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(columns - 2);
        for value in &fields[2..] {
            row.push(value.parse::<f64>().map_err(|_| {
                CliError::Data(format!("line {}: bad number '{value}'", lineno + 2))
            })?);
        }
        x.push(row);
        y.push(fields[1].to_string());
    }
    if x.is_empty() {
        return Err(CliError::Data("feature csv has no data rows".into()));
    }
    Ok((x, y))
}

pub fn render(
    input: &Path,
    output: &Path,
    color_clusters: bool,
    samples: usize,
) -> Result<(), CliError> {
    let (graph, meta) = load_graph(input, samples)?;
    let opts = RenderOptions {
        color_clusters,
        ..RenderOptions::default()
    };
    let clusters = if color_clusters && !meta.clusters.is_empty() {
        Some(&meta.clusters)
    } else {
        None
    };
    write_atomic(output, &render_svg(&graph, clusters, &opts))
}
