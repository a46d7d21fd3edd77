//! Reference publication year spectroscopy (RPYS).
//!
//! The pipeline reads Web of Science plain-text exports, collapses and
//! clusters cited-reference variants, computes per-reference indicators and
//! the RPYS spectrogram with Tukey-flagged peaks, and serializes the results.
//! [`script`] replays whole analyses from CRExplorer-style scripts.

pub mod analysis;
pub mod cluster;
pub mod export;
pub mod indicators;
pub mod levenshtein;
pub mod model;
pub mod par;
pub mod script;
pub mod session;
pub mod spectro;
pub mod synth;
pub mod union_find;
pub mod wos;

pub use analysis::Analysis;
pub use cluster::{ClusterAssignment, ClusterConfig};
pub use indicators::IndicatorRow;
pub use model::{CitedReference, CrId, Dataset, DatasetStats, Operation, YearFilter};
pub use session::{Session, SessionError, SessionOp};
pub use spectro::SpectrogramRow;
pub use wos::{CitingRecord, RawCitedReference};
