//! Per-reference influence indicators.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CrId, Dataset};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndicatorError {
    #[error("cited reference {0} has no RPY")]
    NoRpy(CrId),
    #[error("unknown cited reference {0}")]
    UnknownReference(CrId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub cr_id: CrId,
    pub n_cr: u64,
    /// Absent for references without an RPY.
    pub perc_yr: Option<f64>,
    pub n_pyears: u32,
    pub n_top10: u32,
    pub n_top1: u32,
    pub n_top0_1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NcrByRpy {
    pub by_year: BTreeMap<i32, u64>,
    /// Occurrences of references without an RPY.
    pub remainder: u64,
}

pub fn ncr_by_rpy(dataset: &Dataset) -> NcrByRpy {
    let mut out = NcrByRpy::default();
    for r in &dataset.references {
        match r.rpy() {
            Some(y) => *out.by_year.entry(y).or_insert(0) += r.n_cr,
            None => out.remainder += r.n_cr,
        }
    }
    out
}

pub fn perc_yr(dataset: &Dataset, cr_id: CrId) -> Result<f64, IndicatorError> {
    let r = dataset.reference(cr_id).ok_or(IndicatorError::UnknownReference(cr_id))?;
    let y = r.rpy().ok_or(IndicatorError::NoRpy(cr_id))?;
    let total: u64 = dataset
        .references
        .iter()
        .filter(|o| o.rpy() == Some(y))
        .map(|o| o.n_cr)
        .sum();
    Ok(r.n_cr as f64 / total as f64)
}

/// Top-share levels in thousandths of a percent.
pub const TOP10: u32 = 10_000;
pub const TOP1: u32 = 1_000;
pub const TOP0_1: u32 = 100;

/// `p` percent expressed in thousandths of a percent, the unit used by
/// [`n_top_family_milli`].
pub fn percent_to_milli(p: f64) -> u32 {
    (p * 1000.0).round().clamp(0.0, 100_000.0) as u32
}

/// 1-based nearest rank of the `(100 - p)`th percentile within `n` values.
pub fn nearest_rank(n: usize, p_milli: u32) -> usize {
    let keep = u64::from(100_000 - p_milli.min(100_000));
    let rank = (keep * n as u64).div_ceil(100_000) as usize;
    rank.max(1)
}

/// Per-citing-year counts of every reference cited in that year.
fn year_columns(dataset: &Dataset) -> Vec<(i32, Vec<(usize, u64)>)> {
    let mut cols: BTreeMap<i32, Vec<(usize, u64)>> = BTreeMap::new();
    for (i, r) in dataset.references.iter().enumerate() {
        for (&y, &c) in &r.counts_by_citing_year {
            if c > 0 {
                cols.entry(y).or_default().push((i, c));
            }
        }
    }
    cols.into_iter().collect()
}

fn thresholds(counts: &mut [u64], levels: &[u32]) -> Vec<u64> {
    counts.sort_unstable();
    levels
        .iter()
        .map(|&p| counts[nearest_rank(counts.len(), p) - 1])
        .collect()
}

/// Number of citing years in which each reference reaches the top `p`
/// percent of that year's per-reference counts (ties included).
pub fn n_top_family(dataset: &Dataset, p: f64) -> BTreeMap<CrId, u32> {
    n_top_family_milli(dataset, percent_to_milli(p))
}

pub fn n_top_family_milli(dataset: &Dataset, p_milli: u32) -> BTreeMap<CrId, u32> {
    let counts = top_counts(dataset, &[p_milli], Execution::default());
    dataset
        .references
        .iter()
        .zip(counts)
        .map(|(r, c)| (r.cr_id, c[0]))
        .collect()
}

/// For each reference (dataset order), its top-share year counts per level.
fn top_counts(dataset: &Dataset, levels: &[u32], exec: Execution) -> Vec<Vec<u32>> {
    let columns = year_columns(dataset);
    let per_year: Vec<Vec<(usize, usize)>> = par::map_collect(&columns, exec, |(_, col)| {
        let mut values: Vec<u64> = col.iter().map(|&(_, c)| c).collect();
        let qs = thresholds(&mut values, levels);
        let mut hits = Vec::new();
        for &(i, c) in col {
            for (l, &q) in qs.iter().enumerate() {
                if c >= q {
                    hits.push((i, l));
                }
            }
        }
        hits
    });
    let mut out = vec![vec![0u32; levels.len()]; dataset.references.len()];
    for hits in per_year {
        for (i, l) in hits {
            out[i][l] += 1;
        }
    }
    out
}

/// All indicator rows in dataset order.
pub fn compute_indicators(dataset: &Dataset) -> Vec<IndicatorRow> {
    compute_indicators_with(dataset, Execution::default())
}

pub fn compute_indicators_with(dataset: &Dataset, exec: Execution) -> Vec<IndicatorRow> {
    let ncr = ncr_by_rpy(dataset);
    let tops = top_counts(dataset, &[TOP10, TOP1, TOP0_1], exec);
    dataset
        .references
        .iter()
        .zip(tops)
        .map(|(r, t)| IndicatorRow {
            cr_id: r.cr_id,
            n_cr: r.n_cr,
            perc_yr: r.rpy().map(|y| r.n_cr as f64 / ncr.by_year[&y] as f64),
            n_pyears: r.counts_by_citing_year.values().filter(|&&c| c > 0).count() as u32,
            n_top10: t[0],
            n_top1: t[1],
            n_top0_1: t[2],
        })
        .collect()
}

/// References whose N_TOP10 exceeds half the number of distinct citing
/// years, most influential first.
pub fn highly_influential(rows: &[IndicatorRow], n_citing_years: u64) -> Vec<CrId> {
    let mut hits: Vec<&IndicatorRow> = rows
        .iter()
        .filter(|r| 2 * u64::from(r.n_top10) > n_citing_years)
        .collect();
    hits.sort_by(|a, b| {
        b.n_top10
            .cmp(&a.n_top10)
            .then(b.n_cr.cmp(&a.n_cr))
            .then(a.cr_id.cmp(&b.cr_id))
    });
    hits.into_iter().map(|r| r.cr_id).collect()
}

pub fn rows_by_id(rows: &[IndicatorRow]) -> HashMap<CrId, &IndicatorRow> {
    rows.iter().map(|r| (r.cr_id, r)).collect()
}
