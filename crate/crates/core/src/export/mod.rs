//! Result serialization: CSV tables, the CRE session container and the
//! explorer bundle.

pub mod bundle;
pub mod cre;
pub mod csv;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::ModelError;

pub use self::bundle::{export_ui_bundle, top_references, TopReference, UiBundle};
pub use self::cre::{decode_cre, encode_cre, load_cre, save_cre, CreError, FORMAT_VERSION};
pub use self::csv::{csv_cr_bytes, csv_graph_bytes, export_csv_cr, export_csv_graph, CSV_CR_HEADER, CSV_GRAPH_HEADER};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv encoding failed: {0}")]
    Csv(#[from] ::csv::Error),
    #[error(transparent)]
    Cre(#[from] CreError),
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    std::fs::write(path, bytes).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}
