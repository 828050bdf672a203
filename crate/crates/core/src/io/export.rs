//! Writing relations: JSON lines and aligned text tables.

use std::io::Write;

use serde_json::{Map, Value as Json};

use crate::category::InstanceCategory;
use crate::relation::Relation;

/// One JSON object per row, keyed by column variable, in canonical row
/// order. Elements are written by label, or `Object#ordinal` without one.
pub fn relation_to_json_lines(rel: &Relation, cat: &InstanceCategory) -> String {
    let mut out = String::new();
    for row in rel.rows() {
        let obj: Map<String, Json> = rel
            .columns()
            .iter()
            .zip(row.iter())
            .map(|(c, x)| (c.var.clone(), Json::String(cat.display_element(x))))
            .collect();
        out.push_str(&Json::Object(obj).to_string());
        out.push('\n');
    }
    out
}

pub fn write_relation_json_lines(rel: &Relation, cat: &InstanceCategory, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(relation_to_json_lines(rel, cat).as_bytes())
}

/// A header of column variables, a rule, then one left-aligned line per row.
pub fn relation_to_table(rel: &Relation, cat: &InstanceCategory) -> String {
    let header: Vec<String> = rel.columns().iter().map(|c| c.var.clone()).collect();
    let body: Vec<Vec<String>> = rel
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| cat.display_element(x)).collect())
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| body.iter().map(|r| r[i].chars().count()).chain([header[i].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(&header);
    out.push_str(&line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>()));
    for r in &body {
        out.push_str(&line(r));
    }
    out.push_str(&format!("({} row{})\n", body.len(), if body.len() == 1 { "" } else { "s" }));
    out
}
