//! SWC neuron morphology ingestion.
//!
//! An SWC file is a list of samples `index type x y z radius parent` with
//! `#` comments. Samples that are roots, terminals, or branch points become
//! graph nodes; the unbranched parent-child chains between them become edges
//! resampled to the standard lattice. Radius and type are parsed but carry
//! no meaning downstream. Multi-root files (forests) are reconnected by
//! component joining.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{resample_edge, EdgeCurve, NodeId, ShapeGraph, ShapeGraphBuilder};
use crate::join::join_components;

/// One SWC sample line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwcRecord {
    pub index: i64,
    pub type_code: i32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub radius: f64,
    pub parent: i64,
}

impl SwcRecord {
    fn position(&self) -> Point {
        Point::new3(self.x, self.y, self.z)
    }
}

/// Parse SWC text into records, reporting the offending line on failure.
pub fn parse_swc_records(text: &str) -> Result<Vec<SwcRecord>> {
    let mut records = Vec::new();
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let record = SwcRecord {
            index: fields[0]
                .parse()
                .map_err(|_| err(format!("bad index '{}'", fields[0])))?,
            type_code: fields[1]
                .parse()
                .map_err(|_| err(format!("bad type '{}'", fields[1])))?,
            x: fields[2]
                .parse()
                .map_err(|_| err(format!("bad x '{}'", fields[2])))?,
            y: fields[3]
                .parse()
                .map_err(|_| err(format!("bad y '{}'", fields[3])))?,
            z: fields[4]
                .parse()
                .map_err(|_| err(format!("bad z '{}'", fields[4])))?,
            radius: fields[5]
                .parse()
                .map_err(|_| err(format!("bad radius '{}'", fields[5])))?,
            parent: fields[6]
                .parse()
                .map_err(|_| err(format!("bad parent '{}'", fields[6])))?,
        };
        if record.parent == record.index {
            return Err(err(format!("sample {} is its own parent", record.index)));
        }
        if seen.insert(record.index, lineno + 1).is_some() {
            return Err(err(format!("duplicate index {}", record.index)));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no records".into(),
        });
    }
    for r in &records {
        if r.parent != -1 && !seen.contains_key(&r.parent) {
            return Err(Error::Parse {
                line: seen[&r.index],
                message: format!("sample {} references missing parent {}", r.index, r.parent),
            });
        }
    }
    Ok(records)
}

/// Parse SWC text into a connected shape graph with `t` samples per edge.
pub fn parse_swc(text: &str, t: usize) -> Result<ShapeGraph> {
    let records = parse_swc_records(text)?;
    let by_index: BTreeMap<i64, &SwcRecord> = records.iter().map(|r| (r.index, r)).collect();
    let mut children: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for r in &records {
        children.entry(r.index).or_default();
        if r.parent != -1 {
            children.entry(r.parent).or_default().push(r.index);
        }
    }
    for list in children.values_mut() {
        list.sort_unstable();
    }

    let is_node_sample = |idx: i64| -> bool {
        let r = by_index[&idx];
        r.parent == -1 || children[&idx].len() != 1
    };

    let mut builder = ShapeGraphBuilder::with_samples(3, t);
    let mut node_of: BTreeMap<i64, NodeId> = BTreeMap::new();
    for r in &records {
        if is_node_sample(r.index) {
            node_of.insert(r.index, builder.add_node(r.position()));
        }
    }

    // Walk each unbranched chain from a node sample down to the next one.
    let mut visited: BTreeMap<i64, bool> = records.iter().map(|r| (r.index, false)).collect();
    for r in &records {
        if !is_node_sample(r.index) {
            continue;
        }
        visited.insert(r.index, true);
        for &first in &children[&r.index] {
            let mut chain = vec![r.position()];
            let mut cursor = first;
            loop {
                chain.push(by_index[&cursor].position());
                if is_node_sample(cursor) {
                    break;
                }
                visited.insert(cursor, true);
                cursor = children[&cursor][0];
            }
            visited.insert(cursor, true);
            let curve = resample_edge(&EdgeCurve::new(chain)?, t);
            builder.add_edge(node_of[&r.index], node_of[&cursor], curve)?;
        }
    }
    if let Some((idx, _)) = visited.iter().find(|(_, seen)| !**seen) {
        return Err(Error::Parse {
            line: 0,
            message: format!("sample {idx} is unreachable from any root (cycle?)"),
        });
    }

    let graph = builder.build();
    join_components(&graph)
}
