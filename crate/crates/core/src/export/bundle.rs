use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::model::{CrId, Dataset, DatasetStats};
use crate::spectro::SpectrogramRow;

pub const TOOLTIP_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopReference {
    pub cr_id: CrId,
    #[serde(rename = "CR")]
    pub cr: String,
    #[serde(rename = "RPY")]
    pub rpy: Option<i32>,
    #[serde(rename = "N_CR")]
    pub n_cr: u64,
    #[serde(rename = "PERC_YR")]
    pub perc_yr: Option<f64>,
    #[serde(rename = "N_TOP10")]
    pub n_top10: u32,
    #[serde(rename = "N_PYEARS")]
    pub n_pyears: u32,
}

/// Document consumed by the explorer UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiBundle {
    pub stats: DatasetStats,
    pub spectrogram: Vec<SpectrogramRow>,
    pub peaks: Vec<i32>,
    pub top_references: BTreeMap<i32, Vec<TopReference>>,
    pub op_log_len: usize,
}

/// References of one RPY ordered by N_CR descending, then raw string.
pub fn top_references(dataset: &Dataset, analysis: &Analysis, year: i32, limit: usize) -> Vec<TopReference> {
    let rows = analysis.indicator_map();
    let mut members: Vec<_> = dataset.references.iter().filter(|r| r.rpy() == Some(year)).collect();
    members.sort_by(|a, b| b.n_cr.cmp(&a.n_cr).then_with(|| a.raw().cmp(b.raw())));
    members
        .into_iter()
        .take(limit)
        .map(|r| {
            let ind = rows[&r.cr_id];
            TopReference {
                cr_id: r.cr_id,
                cr: r.raw().to_string(),
                rpy: r.rpy(),
                n_cr: r.n_cr,
                perc_yr: ind.perc_yr,
                n_top10: ind.n_top10,
                n_pyears: ind.n_pyears,
            }
        })
        .collect()
}

pub fn export_ui_bundle(dataset: &Dataset, analysis: &Analysis) -> UiBundle {
    let top_references = analysis
        .spectrogram
        .iter()
        .filter(|row| row.ncr > 0)
        .map(|row| (row.rpy, top_references(dataset, analysis, row.rpy, TOOLTIP_LIMIT)))
        .collect();
    UiBundle {
        stats: analysis.stats,
        spectrogram: analysis.spectrogram.clone(),
        peaks: analysis.peak_years(),
        top_references,
        op_log_len: dataset.op_log.len(),
    }
}
