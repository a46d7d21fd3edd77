use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::indicators::{compute_indicators, highly_influential, IndicatorRow};
use crate::model::{CrId, Dataset, DatasetStats, ModelError};
use crate::spectro::{spectrogram, SpectrogramRow};

/// Everything derived from one dataset snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub stats: DatasetStats,
    pub indicators: Vec<IndicatorRow>,
    pub spectrogram: Vec<SpectrogramRow>,
}

impl Analysis {
    pub fn of(dataset: &Dataset) -> Result<Self, ModelError> {
        dataset.ensure_non_empty()?;
        Ok(Self {
            stats: dataset.stats(),
            indicators: compute_indicators(dataset),
            spectrogram: spectrogram(dataset),
        })
    }

    pub fn peak_years(&self) -> Vec<i32> {
        self.spectrogram.iter().filter(|r| r.is_peak).map(|r| r.rpy).collect()
    }

    pub fn highly_influential(&self) -> Vec<CrId> {
        highly_influential(&self.indicators, self.stats.n_distinct_citing_years)
    }

    pub fn indicator_map(&self) -> BTreeMap<CrId, &IndicatorRow> {
        self.indicators.iter().map(|r| (r.cr_id, r)).collect()
    }
}
