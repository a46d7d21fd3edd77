//! CRE session container.
//!
//! Layout: `b"CRE1"`, format version (u32 LE), deflate-compressed JSON
//! payload, CRC-32 (u32 LE) over every preceding byte.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{write_file, ExportError};
use crate::analysis::Analysis;
use crate::cluster::ClusterAssignment;
use crate::indicators::IndicatorRow;
use crate::model::{Dataset, DatasetStats};
use crate::session::Session;

pub const MAGIC: &[u8; 4] = b"CRE1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8;
const TRAILER_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum CreError {
    #[error("not a CRE container (bad magic bytes)")]
    BadMagic,
    #[error("CRE checksum mismatch: file is truncated or corrupt")]
    Checksum,
    #[error("unsupported CRE format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("CRE payload is malformed: {0}")]
    Payload(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreContainer {
    pub format_version: u32,
    pub stats: Option<DatasetStats>,
    pub dataset: Option<Dataset>,
    pub indicators: Vec<IndicatorRow>,
    pub assignment: Option<ClusterAssignment>,
}

impl CreContainer {
    pub fn from_session(session: &Session) -> Self {
        let analysis = session.dataset.as_ref().and_then(|d| Analysis::of(d).ok());
        Self {
            format_version: FORMAT_VERSION,
            stats: session.dataset.as_ref().map(Dataset::stats),
            dataset: session.dataset.clone(),
            indicators: analysis.map(|a| a.indicators).unwrap_or_default(),
            assignment: session.assignment.clone(),
        }
    }

    pub fn into_session(self) -> Session {
        Session { dataset: self.dataset, assignment: self.assignment }
    }
}

pub fn encode_container(container: &CreContainer) -> Vec<u8> {
    let json = serde_json::to_vec(container).expect("container serializes");
    let mut out = Vec::with_capacity(json.len() / 4 + 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&container.format_version.to_le_bytes());
    let mut enc = DeflateEncoder::new(out, Compression::default());
    enc.write_all(&json).expect("in-memory write");
    let mut out = enc.finish().expect("in-memory write");
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_container(bytes: &[u8]) -> Result<CreContainer, CreError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CreError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(CreError::Checksum);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - TRAILER_LEN);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(CreError::Checksum);
    }
    let version = u32::from_le_bytes(body[4..HEADER_LEN].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(CreError::UnsupportedVersion(version));
    }
    let mut json = Vec::new();
    DeflateDecoder::new(&body[HEADER_LEN..])
        .read_to_end(&mut json)
        .map_err(|e| CreError::Payload(e.to_string()))?;
    let container: CreContainer =
        serde_json::from_slice(&json).map_err(|e| CreError::Payload(e.to_string()))?;
    if container.format_version != version {
        return Err(CreError::UnsupportedVersion(container.format_version));
    }
    Ok(container)
}

pub fn encode_cre(session: &Session) -> Vec<u8> {
    encode_container(&CreContainer::from_session(session))
}

pub fn decode_cre(bytes: &[u8]) -> Result<Session, CreError> {
    decode_container(bytes).map(CreContainer::into_session)
}

pub fn save_cre(session: &Session, path: &Path) -> Result<(), ExportError> {
    write_file(path, &encode_cre(session))
}

pub fn load_cre(path: &Path) -> Result<Session, CreError> {
    let bytes = std::fs::read(path)
        .map_err(|source| CreError::Io { path: path.display().to_string(), source })?;
    decode_cre(&bytes)
}
