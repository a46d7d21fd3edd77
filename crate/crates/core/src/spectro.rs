//! RPYS spectrogram: NCR per reference publication year, the five-year
//! median deviation, and Tukey-fence peak flags.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::{ncr_by_rpy, IndicatorRow};
use crate::model::{CrId, Dataset};

pub const HALF_WINDOW: i32 = 2;
pub const FENCE_K: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectroError {
    #[error("year {0} lies outside the spectrogram span")]
    YearOutOfRange(i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramRow {
    pub rpy: i32,
    pub ncr: u64,
    pub median_dev: f64,
    pub is_peak: bool,
}

/// Fills every year between the first and last key with zero.
pub fn fill_span(series: &BTreeMap<i32, u64>) -> BTreeMap<i32, u64> {
    match (series.first_key_value(), series.last_key_value()) {
        (Some((&lo, _)), Some((&hi, _))) => {
            (lo..=hi).map(|y| (y, series.get(&y).copied().unwrap_or(0))).collect()
        }
        _ => BTreeMap::new(),
    }
}

fn median_sorted(v: &[u64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

/// `ncr(y)` minus the median over `[y-2, y+2]`, the window truncated to the
/// filled span.
pub fn median_deviation(series: &BTreeMap<i32, u64>) -> BTreeMap<i32, f64> {
    let filled = fill_span(series);
    let values: Vec<u64> = filled.values().copied().collect();
    let n = values.len() as i64;
    filled
        .keys()
        .enumerate()
        .map(|(i, &year)| {
            let lo = (i as i64 - HALF_WINDOW as i64).max(0) as usize;
            let hi = (i as i64 + HALF_WINDOW as i64).min(n - 1) as usize;
            let mut window: Vec<u64> = values[lo..=hi].to_vec();
            window.sort_unstable();
            (year, values[i] as f64 - median_sorted(&window))
        })
        .collect()
}

fn median_f64(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Lower and upper Tukey hinges; for odd counts both halves include the
/// median. `None` for fewer than four values.
pub fn tukey_hinges(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let half = n.div_ceil(2);
    Some((median_f64(&v[..half]), median_f64(&v[n - half..])))
}

pub fn upper_fence(values: &[f64]) -> Option<f64> {
    tukey_hinges(values).map(|(lo, hi)| hi + FENCE_K * (hi - lo))
}

/// Years whose deviation strictly exceeds the upper fence.
pub fn tukey_peaks(devs: &BTreeMap<i32, f64>) -> BTreeSet<i32> {
    let values: Vec<f64> = devs.values().copied().collect();
    match upper_fence(&values) {
        None => BTreeSet::new(),
        Some(fence) => devs.iter().filter(|(_, &d)| d > fence).map(|(&y, _)| y).collect(),
    }
}

pub fn spectrogram(dataset: &Dataset) -> Vec<SpectrogramRow> {
    let filled = fill_span(&ncr_by_rpy(dataset).by_year);
    let devs = median_deviation(&filled);
    let peaks = tukey_peaks(&devs);
    filled
        .iter()
        .map(|(&rpy, &ncr)| SpectrogramRow {
            rpy,
            ncr,
            median_dev: devs[&rpy],
            is_peak: peaks.contains(&rpy),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub cr_id: CrId,
    pub n_cr: u64,
    pub perc_yr: f64,
    pub suggested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub rpy: i32,
    pub entries: Vec<PeakEntry>,
    /// Number of leading entries above the largest N_CR gap.
    pub cut: usize,
}

/// Position after which the largest drop occurs in a descending list,
/// counting the drop from the last value to zero. Earliest wins ties.
pub fn largest_gap_cut(desc: &[u64]) -> usize {
    let mut best = (0u64, 0usize);
    for (k, &v) in desc.iter().enumerate() {
        let next = desc.get(k + 1).copied().unwrap_or(0);
        let gap = v.abs_diff(next);
        if gap > best.0 {
            best = (gap, k + 1);
        }
    }
    best.1
}

pub fn peak_report(
    dataset: &Dataset,
    rows: &[IndicatorRow],
    year: i32,
) -> Result<PeakReport, SpectroError> {
    let span = ncr_by_rpy(dataset).by_year;
    let in_span = matches!(
        (span.first_key_value(), span.last_key_value()),
        (Some((&lo, _)), Some((&hi, _))) if (lo..=hi).contains(&year)
    );
    if !in_span {
        return Err(SpectroError::YearOutOfRange(year));
    }
    let perc: BTreeMap<CrId, f64> =
        rows.iter().filter_map(|r| r.perc_yr.map(|p| (r.cr_id, p))).collect();
    let mut members: Vec<_> = dataset.references.iter().filter(|r| r.rpy() == Some(year)).collect();
    members.sort_by(|a, b| b.n_cr.cmp(&a.n_cr).then_with(|| a.raw().cmp(b.raw())));
    let counts: Vec<u64> = members.iter().map(|r| r.n_cr).collect();
    let cut = largest_gap_cut(&counts);
    let entries = members
        .iter()
        .enumerate()
        .map(|(k, r)| PeakEntry {
            cr_id: r.cr_id,
            n_cr: r.n_cr,
            perc_yr: perc.get(&r.cr_id).copied().unwrap_or(0.0),
            suggested: k < cut,
        })
        .collect();
    Ok(PeakReport { rpy: year, entries, cut })
}
