//! File helpers: format sniffing and atomic writes.

use std::fs;
use std::path::Path;

use shapegraph::{parse_graph, parse_swc, parse_swc_records, DocMetadata, ShapeGraph};

use crate::commands::CliError;

/// Load a graph from a JSON document or an SWC file, sniffing by content.
/// SWC radius and type columns carry over into the metadata, unused.
pub fn load_graph(path: &Path, samples: usize) -> Result<(ShapeGraph, DocMetadata), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_graph(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    } else {
        let data_err = |e: shapegraph::Error| CliError::Data(format!("{}: {e}", path.display()));
        let graph = parse_swc(&text, samples).map_err(data_err)?;
        let records = parse_swc_records(&text).map_err(data_err)?;
        let meta = DocMetadata {
            swc_samples: records
                .iter()
                .map(|r| (r.index, r.type_code, r.radius))
                .collect(),
            ..DocMetadata::default()
        };
        Ok((graph, meta))
    }
}

/// Write a file atomically (write to a sibling temp file, then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Data(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}
