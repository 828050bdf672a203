//! Loading multi-model data into an [`InstanceCategory`] and writing
//! results back out.
//!
//! [`InstanceCategory`]: crate::category::InstanceCategory

mod edges;
mod export;
mod json;
mod table;
mod workspace;
mod xml;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::category::{CategoryError, Violation};

pub use edges::{edges_from_str, edges_to_string, load_edges};
pub use export::{relation_to_json_lines, relation_to_table, write_relation_json_lines};
pub use json::{category_from_json_str, category_to_json_string, load_category_json, save_category_json};
pub use table::{load_table_csv, table_from_reader, table_to_csv};
pub use workspace::{load_workspace, SourceSpec, WorkspaceConfig};
pub use xml::{load_xml, xml_from_str};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{location}: {message}")]
    Format { location: String, message: String },
    #[error("invalid category: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Category(#[from] CategoryError),
}

impl IoError {
    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Format {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}
