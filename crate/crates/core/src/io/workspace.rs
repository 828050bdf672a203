//! Workspace files: the list of data sources that make up one category.
//!
//! ```toml
//! [[sources]]
//! type = "csv"
//! path = "people.csv"
//! object = "Person"
//! key = "id"
//!
//! [[sources]]
//! type = "edges"
//! path = "follows.txt"
//! nodes = "Person"
//! name = "Follows"
//! ```
//!
//! Sources load in order and merge into one category; an edge list resolves
//! its endpoints against everything loaded before it. Relative paths are
//! taken from the workspace file's directory. A `.json` workspace file uses
//! the same structure.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{load_category_json, load_edges, load_table_csv, load_xml, read_file, IoError};
use crate::category::InstanceCategory;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Csv { path: PathBuf, object: String, key: String },
    Edges { path: PathBuf, nodes: String, name: String },
    Xml { path: PathBuf, name: String },
    Json { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

impl WorkspaceConfig {
    pub fn parse(src: &str, json: bool) -> Result<Self, IoError> {
        if json {
            let de = &mut serde_json::Deserializer::from_str(src);
            serde_path_to_error::deserialize(de).map_err(|e| IoError::format(e.path().to_string(), e.into_inner().to_string()))
        } else {
            toml::from_str(src).map_err(|e| IoError::format("workspace", e.to_string()))
        }
    }

    /// Loads every source, relative to `base`, and merges them.
    pub fn load(&self, base: &Path) -> Result<InstanceCategory, IoError> {
        let mut cat = InstanceCategory::default();
        for source in &self.sources {
            let part = match source {
                SourceSpec::Csv { path, object, key } => load_table_csv(base.join(path), object, key)?,
                SourceSpec::Edges { path, nodes, name } => load_edges(base.join(path), &cat, nodes, name)?,
                SourceSpec::Xml { path, name } => load_xml(base.join(path), name)?,
                SourceSpec::Json { path } => load_category_json(base.join(path))?,
            };
            cat = cat.merge(part)?;
        }
        let violations = cat.validate();
        if violations.is_empty() {
            Ok(cat)
        } else {
            Err(IoError::Invalid(violations))
        }
    }
}

/// Reads a workspace file (TOML, or JSON by extension) and loads its
/// sources. A bare category JSON file is accepted as a one-source
/// workspace.
pub fn load_workspace(path: impl AsRef<Path>) -> Result<InstanceCategory, IoError> {
    let path = path.as_ref();
    let is_json = path.extension().is_some_and(|e| e == "json");
    let src = read_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if is_json {
        let probe: serde_json::Value =
            serde_json::from_str(&src).map_err(|e| IoError::format(path.display().to_string(), e.to_string()))?;
        if probe.get("sources").is_none() {
            return load_category_json(path);
        }
    }
    let config = WorkspaceConfig::parse(&src, is_json).map_err(|e| match e {
        IoError::Format { location, message } => IoError::format(format!("{}: {location}", path.display()), message),
        other => other,
    })?;
    config.load(base)
}
