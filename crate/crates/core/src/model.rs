//! The working dataset: citing records, distinct cited references with their
//! per-citing-year counts, and the log of operations applied so far.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wos::{parse_cited_reference, CitingRecord, RawCitedReference};

pub type CrId = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty dataset: no cited references remain")]
    EmptyDataset,
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: i64, hi: i64 },
}

/// Inclusive year bounds plus whether items without a year are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearFilter {
    pub lo: i32,
    pub hi: i32,
    pub include_missing: bool,
}

impl YearFilter {
    pub fn new(lo: i32, hi: i32, include_missing: bool) -> Self {
        Self { lo, hi, include_missing }
    }

    pub fn accepts(&self, year: Option<i32>) -> bool {
        match year {
            Some(y) => (self.lo..=self.hi).contains(&y),
            None => self.include_missing,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.lo > self.hi {
            return Err(ModelError::InvalidRange { lo: self.lo.into(), hi: self.hi.into() });
        }
        Ok(())
    }
}

impl Default for YearFilter {
    fn default() -> Self {
        Self::new(crate::wos::MIN_YEAR, crate::wos::MAX_YEAR, true)
    }
}

/// A distinct cited reference.
///
/// Occurrences in citing records without a publication year are tallied in
/// `undated_count`, so `n_cr` is the sum of `counts_by_citing_year` plus
/// `undated_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedReference {
    pub cr_id: CrId,
    pub parsed: RawCitedReference,
    pub counts_by_citing_year: BTreeMap<i32, u64>,
    #[serde(default)]
    pub undated_count: u64,
    pub n_cr: u64,
    pub cluster_id: Option<u64>,
}

impl CitedReference {
    pub fn raw(&self) -> &str {
        &self.parsed.raw
    }

    pub fn rpy(&self) -> Option<i32> {
        self.parsed.rpy
    }

    pub fn count_in(&self, year: i32) -> u64 {
        self.counts_by_citing_year.get(&year).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum Operation {
    #[serde(rename = "importFile")]
    Import {
        files: Vec<String>,
        rpy: YearFilter,
        py: YearFilter,
        max_cr: u64,
    },
    #[serde(rename = "cluster")]
    Cluster {
        threshold: f64,
        volume: bool,
        page: bool,
        doi: bool,
        n_clusters: u64,
    },
    #[serde(rename = "merge")]
    Merge { before: u64, after: u64 },
    #[serde(rename = "removeCR")]
    RemoveCr { lo: u64, hi: u64, removed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub citing_records: Vec<CitingRecord>,
    pub references: Vec<CitedReference>,
    pub rpy_filter: YearFilter,
    pub py_filter: YearFilter,
    pub max_cr: u64,
    pub op_log: Vec<Operation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total_nondistinct_crs: u64,
    pub min_rpy: Option<i32>,
    pub max_rpy: Option<i32>,
    pub n_citing_pubs: u64,
    pub min_citing_year: Option<i32>,
    pub max_citing_year: Option<i32>,
    pub n_distinct_crs: u64,
    pub n_distinct_rpys: u64,
    pub n_distinct_citing_years: u64,
}

/// Whitespace-collapsed, case-preserved form used for exact-string identity.
pub fn normalize_raw(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Dataset {
    /// Applies the import filters and collapses identical normalized
    /// reference strings. `files` is only recorded in the op log.
    pub fn build(
        records: Vec<CitingRecord>,
        files: Vec<String>,
        rpy_filter: YearFilter,
        py_filter: YearFilter,
        max_cr: u64,
    ) -> Result<Self, ModelError> {
        rpy_filter.validate()?;
        py_filter.validate()?;

        let citing_records: Vec<CitingRecord> =
            records.into_iter().filter(|r| py_filter.accepts(r.py)).collect();

        let mut index: HashMap<String, Option<usize>> = HashMap::new();
        let mut references: Vec<CitedReference> = Vec::new();
        for record in &citing_records {
            for line in &record.raw_cr_lines {
                let key = normalize_raw(line);
                if key.is_empty() {
                    continue;
                }
                let slot = match index.get(&key) {
                    Some(Some(i)) => *i,
                    Some(None) => continue,
                    None => {
                        let parsed = parse_cited_reference(&key);
                        if !rpy_filter.accepts(parsed.rpy) {
                            index.insert(key, None);
                            continue;
                        }
                        let i = references.len();
                        references.push(CitedReference {
                            cr_id: i as CrId,
                            parsed,
                            counts_by_citing_year: BTreeMap::new(),
                            undated_count: 0,
                            n_cr: 0,
                            cluster_id: None,
                        });
                        index.insert(key, Some(i));
                        i
                    }
                };
                let r = &mut references[slot];
                match record.py {
                    Some(y) => *r.counts_by_citing_year.entry(y).or_insert(0) += 1,
                    None => r.undated_count += 1,
                }
                r.n_cr += 1;
            }
        }

        if max_cr > 0 && (references.len() as u64) > max_cr {
            let mut order: Vec<usize> = (0..references.len()).collect();
            order.sort_by(|&a, &b| {
                let (ra, rb) = (&references[a], &references[b]);
                rb.n_cr.cmp(&ra.n_cr).then_with(|| ra.raw().cmp(rb.raw()))
            });
            let keep: BTreeSet<usize> = order.into_iter().take(max_cr as usize).collect();
            references = references
                .into_iter()
                .enumerate()
                .filter_map(|(i, r)| keep.contains(&i).then_some(r))
                .collect();
        }

        if references.is_empty() {
            return Err(ModelError::EmptyDataset);
        }

        Ok(Dataset {
            citing_records,
            references,
            rpy_filter,
            py_filter,
            max_cr,
            op_log: vec![Operation::Import { files, rpy: rpy_filter, py: py_filter, max_cr }],
        })
    }

    pub fn is_empty(&self) -> bool {
        self.references.is_empty()
    }

    pub fn ensure_non_empty(&self) -> Result<(), ModelError> {
        if self.is_empty() {
            Err(ModelError::EmptyDataset)
        } else {
            Ok(())
        }
    }

    pub fn reference(&self, cr_id: CrId) -> Option<&CitedReference> {
        self.references.iter().find(|r| r.cr_id == cr_id)
    }

    pub fn stats(&self) -> DatasetStats {
        let rpys: BTreeSet<i32> = self.references.iter().filter_map(|r| r.rpy()).collect();
        let pys: BTreeSet<i32> = self.citing_records.iter().filter_map(|r| r.py).collect();
        DatasetStats {
            total_nondistinct_crs: self.references.iter().map(|r| r.n_cr).sum(),
            min_rpy: rpys.first().copied(),
            max_rpy: rpys.last().copied(),
            n_citing_pubs: self.citing_records.len() as u64,
            min_citing_year: pys.first().copied(),
            max_citing_year: pys.last().copied(),
            n_distinct_crs: self.references.len() as u64,
            n_distinct_rpys: rpys.len() as u64,
            n_distinct_citing_years: pys.len() as u64,
        }
    }

    /// Removes every reference whose `n_cr` lies in `[lo, hi]`.
    pub fn remove_by_ncr(&mut self, lo: u64, hi: u64) -> Result<u64, ModelError> {
        if lo > hi {
            return Err(ModelError::InvalidRange { lo: lo as i64, hi: hi as i64 });
        }
        let before = self.references.len();
        self.references.retain(|r| !(lo..=hi).contains(&r.n_cr));
        let removed = (before - self.references.len()) as u64;
        self.op_log.push(Operation::RemoveCr { lo, hi, removed });
        Ok(removed)
    }

    /// All citing years that appear on retained citing records.
    pub fn citing_years(&self) -> BTreeSet<i32> {
        self.citing_records.iter().filter_map(|r| r.py).collect()
    }
}
