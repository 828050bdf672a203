//! Relational tables from CSV.
//!
//! A table becomes an entity object of record elements keyed by the key
//! column, plus one attribute object and morphism per non-key column, both
//! named `{object}_{column}`.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::IoError;
use crate::category::{Carrier, CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
use crate::value::Value;

fn cell_text(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Text(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Decimal(d) => d.to_string(),
        Value::Dewey(d) => d.to_string(),
    }
}

/// Reads a table from any CSV source. `origin` names the source in errors.
pub fn table_from_reader(reader: impl std::io::Read, origin: &str, object: &str, key: &str) -> Result<InstanceCategory, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| IoError::format(origin, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let key_col = headers
        .iter()
        .position(|h| h == key)
        .ok_or_else(|| IoError::format(origin, format!("no key column `{key}` in header")))?;
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(IoError::format(origin, format!("column `{h}` appears twice in header")));
        }
    }

    let mut elements = Vec::new();
    let mut keys = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| IoError::format(format!("{origin}:{line}"), e.to_string()))?;
        let cells: Vec<&str> = record.iter().collect();
        let key_value = cells[key_col].to_string();
        if !keys.insert(key_value.clone()) {
            return Err(IoError::format(format!("{origin}:{line}"), format!("duplicate key `{key_value}`")));
        }
        let fields = headers.iter().cloned().zip(cells.iter().map(|c| Value::infer(c))).collect();
        elements.push(Element::new(ElementId::new(object, i as u32), Payload::Record(fields)).with_label(key_value));
    }

    let mut objects = Vec::new();
    let mut morphisms = Vec::new();
    for (c, column) in headers.iter().enumerate().filter(|&(c, _)| c != key_col) {
        let name = format!("{object}_{column}");
        let mut index: HashMap<Value, u32> = HashMap::new();
        let mut values = Vec::new();
        let mut mapping = Vec::new();
        for e in &elements {
            let Payload::Record(fields) = &e.payload else { unreachable!() };
            let v = &fields[c].1;
            let ord = *index.entry(v.clone()).or_insert_with(|| {
                values.push(v.clone());
                values.len() as u32 - 1
            });
            mapping.push((e.id.clone(), ElementId::new(name.as_str(), ord)));
        }
        let attr_elements = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let label = cell_text(&v);
                Element::new(ElementId::new(name.as_str(), i as u32), Payload::Atom(v)).with_label(label)
            })
            .collect();
        objects.push(CategoryObject::owned(&name, ObjectKind::Attribute, attr_elements));
        morphisms.push(Morphism::new(&name, object, &name, mapping));
    }
    objects.insert(0, CategoryObject::owned(object, ObjectKind::Entity, elements));
    let cat = InstanceCategory::new(objects, morphisms);
    let violations = cat.validate();
    if violations.is_empty() {
        Ok(cat)
    } else {
        Err(IoError::Invalid(violations))
    }
}

pub fn load_table_csv(path: impl AsRef<Path>, object: &str, key: &str) -> Result<InstanceCategory, IoError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    table_from_reader(file, &path.display().to_string(), object, key)
}

/// Writes the record elements of `object` back out as CSV, columns in the
/// order of the first element's fields. An object without elements has no
/// recorded key column and is written as empty text.
pub fn table_to_csv(cat: &InstanceCategory, object: &str) -> Result<String, IoError> {
    let o = cat
        .object(object)
        .ok_or_else(|| IoError::format(object, "no such object"))?;
    let Carrier::Owned(elements) = &o.carrier else {
        return Err(IoError::format(object, "only owned objects can be exported as tables"));
    };
    let mut header: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for e in elements {
        let Payload::Record(fields) = &e.payload else {
            return Err(IoError::format(format!("element {}", e.id), "not a record"));
        };
        if header.is_empty() {
            header = fields.iter().map(|(k, _)| k.clone()).collect();
        }
        if fields.len() != header.len() || fields.iter().zip(&header).any(|((k, _), h)| k != h) {
            return Err(IoError::format(format!("element {}", e.id), "fields differ from the first element's"));
        }
        rows.push(fields.iter().map(|(_, v)| cell_text(v)).collect::<Vec<_>>());
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let io_err = |e: csv::Error| IoError::format(object, e.to_string());
    if !header.is_empty() {
        w.write_record(&header).map_err(io_err)?;
    }
    for r in rows {
        w.write_record(&r).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::format(object, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
