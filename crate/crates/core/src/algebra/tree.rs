//! Tree axes over Dewey-coded elements.

use std::collections::HashMap;

use super::{scan, AlgebraError};
use crate::category::{ElementId, InstanceCategory, Payload};
use crate::dewey::DeweyCode;
use crate::relation::{Relation, Row};
use crate::value::Value;

/// The Dewey code carried by an element: an atomic dewey value or a
/// record field named `dewey`.
pub fn dewey_of<'a>(cat: &'a InstanceCategory, id: &ElementId) -> Result<&'a DeweyCode, AlgebraError> {
    let element = cat.element(id).ok_or_else(|| AlgebraError::NotDewey(id.clone()))?;
    let value = match &element.payload {
        Payload::Atom(v) => Some(v),
        Payload::Record(_) => element.record_field("dewey"),
        Payload::Tuple(_) => None,
    };
    match value {
        Some(Value::Dewey(d)) => Ok(d),
        _ => Err(AlgebraError::NotDewey(id.clone())),
    }
}

fn codes<'a>(cat: &'a InstanceCategory, rel: &Relation) -> Result<Vec<(&'a DeweyCode, ElementId)>, AlgebraError> {
    if rel.arity() != 1 {
        return Err(AlgebraError::Invalid(format!("tree operators expect one-column inputs, got {}", rel.arity())));
    }
    rel.rows()
        .iter()
        .map(|r| Ok((dewey_of(cat, &r[0])?, r[0].clone())))
        .collect()
}

fn pair_relation(d1: &Relation, d2: &Relation, rows: Vec<Row>) -> Relation {
    let mut columns = d1.columns().to_vec();
    columns.extend_from_slice(d2.columns());
    Relation::new(columns, rows)
}

fn index_by_code<'a>(items: &[(&'a DeweyCode, ElementId)]) -> HashMap<&'a [u32], Vec<ElementId>> {
    let mut index: HashMap<&[u32], Vec<ElementId>> = HashMap::new();
    for (code, id) in items {
        index.entry(code.components()).or_default().push(id.clone());
    }
    index
}

/// Pairs `(x1, x2)` where `x1` is the immediate parent of `x2`.
pub fn get_parent(cat: &InstanceCategory, d1: &Relation, d2: &Relation) -> Result<Relation, AlgebraError> {
    let parents = codes(cat, d1)?;
    let children = codes(cat, d2)?;
    let index = index_by_code(&parents);
    let mut rows = Vec::new();
    for (code, child) in &children {
        let c = code.components();
        if c.len() < 2 {
            continue;
        }
        for p in index.get(&c[..c.len() - 1]).into_iter().flatten() {
            rows.push(vec![p.clone(), child.clone()].into_boxed_slice());
        }
    }
    Ok(pair_relation(d1, d2, rows))
}

/// Pairs `(x1, x2)` where `x1` is a proper ancestor of `x2`.
pub fn get_ancestor(cat: &InstanceCategory, d1: &Relation, d2: &Relation) -> Result<Relation, AlgebraError> {
    let ancestors = codes(cat, d1)?;
    let descendants = codes(cat, d2)?;
    let index = index_by_code(&ancestors);
    let mut rows = Vec::new();
    for (code, desc) in &descendants {
        let c = code.components();
        for len in 1..c.len() {
            for a in index.get(&c[..len]).into_iter().flatten() {
                rows.push(vec![a.clone(), desc.clone()].into_boxed_slice());
            }
        }
    }
    Ok(pair_relation(d1, d2, rows))
}

/// Pairs of distinct elements sharing a parent.
pub fn get_sibling(cat: &InstanceCategory, d1: &Relation, d2: &Relation) -> Result<Relation, AlgebraError> {
    let left = codes(cat, d1)?;
    let right = codes(cat, d2)?;
    let mut by_parent: HashMap<&[u32], Vec<(&DeweyCode, ElementId)>> = HashMap::new();
    for (code, id) in &right {
        let c = code.components();
        if c.len() >= 2 {
            by_parent.entry(&c[..c.len() - 1]).or_default().push((code, id.clone()));
        }
    }
    let mut rows = Vec::new();
    for (code, x1) in &left {
        let c = code.components();
        if c.len() < 2 {
            continue;
        }
        for (other, x2) in by_parent.get(&c[..c.len() - 1]).into_iter().flatten() {
            if code.is_sibling_of(other) {
                rows.push(vec![x1.clone(), x2.clone()].into_boxed_slice());
            }
        }
    }
    Ok(pair_relation(d1, d2, rows))
}

fn stored(cat: &InstanceCategory, d1: &str, d2: &str) -> Result<(Relation, Relation), AlgebraError> {
    Ok((scan(cat, d1, "x1")?, scan(cat, d2, "x2")?))
}

pub fn op_get_parent(cat: &InstanceCategory, d1: &str, d2: &str) -> Result<Relation, AlgebraError> {
    let (a, b) = stored(cat, d1, d2)?;
    get_parent(cat, &a, &b)
}

pub fn op_get_ancestor(cat: &InstanceCategory, d1: &str, d2: &str) -> Result<Relation, AlgebraError> {
    let (a, b) = stored(cat, d1, d2)?;
    get_ancestor(cat, &a, &b)
}

pub fn op_get_sibling(cat: &InstanceCategory, d1: &str, d2: &str) -> Result<Relation, AlgebraError> {
    let (a, b) = stored(cat, d1, d2)?;
    get_sibling(cat, &a, &b)
}
