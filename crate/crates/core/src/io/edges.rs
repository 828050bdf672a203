//! Edge lists: one `src dst` pair per line.
//!
//! Endpoints name elements of an existing node object, by label or, for
//! unlabelled elements, by ordinal. Blank lines and `#` comments are
//! skipped. Repeated pairs collapse to one edge.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::{read_file, IoError};
use crate::category::{CategoryObject, Element, ElementId, InstanceCategory, Morphism, Payload};

/// Builds the edge relationship `edge_name` over `node_object` of `nodes`,
/// with projection morphisms `{edge_name}_src` and `{edge_name}_dst`. The
/// result refers to `node_object` and is meant to be merged into `nodes`.
pub fn edges_from_str(
    src: &str,
    origin: &str,
    nodes: &InstanceCategory,
    node_object: &str,
    edge_name: &str,
) -> Result<InstanceCategory, IoError> {
    let members = nodes
        .members(node_object)
        .map_err(|e| IoError::format(origin, e.to_string()))?;
    let mut by_name: HashMap<String, ElementId> = HashMap::new();
    for id in members {
        let name = nodes
            .element(id)
            .and_then(|e| e.label.clone())
            .unwrap_or_else(|| id.ordinal().to_string());
        by_name.entry(name).or_insert_with(|| id.clone());
    }
    let mut seen = HashSet::new();
    let mut elements = Vec::new();
    let (mut src_map, mut dst_map) = (Vec::new(), Vec::new());
    for (i, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("{origin}:{}", i + 1);
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = parts.as_slice() else {
            return Err(IoError::format(at, format!("expected `src dst`, found `{line}`")));
        };
        let resolve = |n: &str| {
            by_name
                .get(n)
                .cloned()
                .ok_or_else(|| IoError::format(&at, format!("endpoint `{n}` is not an element of `{node_object}`")))
        };
        let (s, d) = (resolve(a)?, resolve(b)?);
        if !seen.insert((s.clone(), d.clone())) {
            continue;
        }
        let id = ElementId::new(edge_name, elements.len() as u32);
        src_map.push((id.clone(), s.clone()));
        dst_map.push((id.clone(), d.clone()));
        elements.push(Element::new(id, Payload::Tuple(vec![s, d])));
    }
    let object = CategoryObject::relationship(edge_name, vec![node_object.to_string(), node_object.to_string()], elements);
    let morphisms = vec![
        Morphism::new(format!("{edge_name}_src"), edge_name, node_object, src_map),
        Morphism::new(format!("{edge_name}_dst"), edge_name, node_object, dst_map),
    ];
    Ok(InstanceCategory::new(vec![object], morphisms))
}

pub fn load_edges(
    path: impl AsRef<Path>,
    nodes: &InstanceCategory,
    node_object: &str,
    edge_name: &str,
) -> Result<InstanceCategory, IoError> {
    let path = path.as_ref();
    edges_from_str(&read_file(path)?, &path.display().to_string(), nodes, node_object, edge_name)
}

/// Writes an edge relationship back out as an edge list, endpoints by label.
pub fn edges_to_string(cat: &InstanceCategory, edge_name: &str) -> Result<String, IoError> {
    let mut out = String::new();
    for id in cat.members(edge_name)? {
        let (Some(s), Some(d)) = (cat.tuple_component(id, 0), cat.tuple_component(id, 1)) else {
            return Err(IoError::format(format!("element {id}"), "not an edge"));
        };
        let name = |x: &ElementId| {
            cat.element(x)
                .and_then(|e| e.label.clone())
                .unwrap_or_else(|| x.ordinal().to_string())
        };
        out.push_str(&format!("{} {}\n", name(s), name(d)));
    }
    Ok(out)
}
