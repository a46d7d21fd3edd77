use std::path::Path;

use csv::{QuoteStyle, Terminator, WriterBuilder};

use super::{write_file, ExportError};
use crate::analysis::Analysis;
use crate::model::Dataset;

pub const CSV_CR_HEADER: [&str; 8] =
    ["CR", "RPY", "N_CR", "PERC_YR", "N_PYEARS", "N_TOP10", "N_TOP1", "N_TOP0_1"];
pub const CSV_GRAPH_HEADER: [&str; 4] = ["RPY", "N_CR", "MEDIAN_DEVIATION", "PEAK"];

fn writer() -> csv::Writer<Vec<u8>> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .quote_style(QuoteStyle::Necessary)
        .from_writer(Vec::new())
}

fn real(x: f64) -> String {
    format!("{x:.6}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, ExportError> {
    w.into_inner().map_err(|e| ExportError::Csv(e.into_error().into()))
}

pub fn csv_cr_bytes(dataset: &Dataset, analysis: &Analysis) -> Result<Vec<u8>, ExportError> {
    dataset.ensure_non_empty()?;
    let rows = analysis.indicator_map();
    let mut refs: Vec<_> = dataset.references.iter().collect();
    refs.sort_by(|a, b| b.n_cr.cmp(&a.n_cr).then_with(|| a.raw().cmp(b.raw())));

    let mut w = writer();
    w.write_record(CSV_CR_HEADER)?;
    for r in refs {
        let ind = rows[&r.cr_id];
        w.write_record([
            r.raw().to_string(),
            r.rpy().map(|y| y.to_string()).unwrap_or_default(),
            r.n_cr.to_string(),
            ind.perc_yr.map(real).unwrap_or_default(),
            ind.n_pyears.to_string(),
            ind.n_top10.to_string(),
            ind.n_top1.to_string(),
            ind.n_top0_1.to_string(),
        ])?;
    }
    finish(w)
}

pub fn csv_graph_bytes(dataset: &Dataset, analysis: &Analysis) -> Result<Vec<u8>, ExportError> {
    dataset.ensure_non_empty()?;
    let mut w = writer();
    w.write_record(CSV_GRAPH_HEADER)?;
    for row in &analysis.spectrogram {
        w.write_record([
            row.rpy.to_string(),
            row.ncr.to_string(),
            real(row.median_dev),
            u8::from(row.is_peak).to_string(),
        ])?;
    }
    finish(w)
}

/// Writes the per-reference indicator table. Nothing is written on error.
pub fn export_csv_cr(dataset: &Dataset, path: &Path) -> Result<(), ExportError> {
    let analysis = Analysis::of(dataset)?;
    write_file(path, &csv_cr_bytes(dataset, &analysis)?)
}

/// Writes the spectrogram series. Nothing is written on error.
pub fn export_csv_graph(dataset: &Dataset, path: &Path) -> Result<(), ExportError> {
    let analysis = Analysis::of(dataset)?;
    write_file(path, &csv_graph_bytes(dataset, &analysis)?)
}
