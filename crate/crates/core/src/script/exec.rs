use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::{ExportKind, ScriptCommand, ScriptError, Step};
use crate::analysis::Analysis;
use crate::export::{self, ExportError};
use crate::model::{Dataset, DatasetStats, ModelError};
use crate::session::{Session, SessionError, SessionOp};
use crate::wos::{parse_wos_named, FormatError};

/// Script file names mapped to actual paths.
pub type Bindings = HashMap<String, PathBuf>;

#[derive(Debug, Error)]
pub enum ExecErrorKind {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("the first command must be importFile")]
    NotStartingWithImport,
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

#[derive(Debug, Error)]
#[error("command {index} ({command}) failed: {kind}")]
pub struct ExecError {
    pub index: usize,
    pub command: String,
    pub kind: ExecErrorKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub command: String,
    pub elapsed_ms: f64,
    pub stats: Option<DatasetStats>,
    pub outputs: Vec<PathBuf>,
    pub diagnostics: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExecutionReport {
    pub steps: Vec<StepReport>,
}

fn resolve(name: &str, workdir: &Path, bindings: &Bindings) -> PathBuf {
    match bindings.get(name) {
        Some(p) => p.clone(),
        None => workdir.join(name),
    }
}

/// Runs the commands in order against a fresh session.
pub fn execute(
    commands: &[ScriptCommand],
    workdir: &Path,
    bindings: &Bindings,
) -> Result<(ExecutionReport, Session), ExecError> {
    let mut session = Session::default();
    let mut report = ExecutionReport::default();
    for (index, cmd) in commands.iter().enumerate() {
        let fail = |kind: ExecErrorKind| ExecError { index, command: cmd.name.to_string(), kind };
        let step = cmd.step().map_err(|e| fail(e.into()))?;
        if index == 0 && !matches!(step, Step::Import { .. }) {
            return Err(fail(ExecErrorKind::NotStartingWithImport));
        }
        let started = Instant::now();
        let (outputs, diagnostics) =
            run_step(&step, &mut session, workdir, bindings).map_err(fail)?;
        report.steps.push(StepReport {
            index,
            command: cmd.name.to_string(),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            stats: session.dataset.as_ref().map(Dataset::stats),
            outputs,
            diagnostics,
        });
    }
    Ok((report, session))
}

fn run_step(
    step: &Step,
    session: &mut Session,
    workdir: &Path,
    bindings: &Bindings,
) -> Result<(Vec<PathBuf>, usize), ExecErrorKind> {
    match step {
        Step::Import { files, rpy, py, max_cr } => {
            let mut records = Vec::new();
            let mut diagnostics = 0;
            for name in files {
                let path = resolve(name, workdir, bindings);
                let bytes = std::fs::read(&path)
                    .map_err(|source| ExecErrorKind::Read { path: path.clone(), source })?;
                let parsed = parse_wos_named(name, &bytes)
                    .map_err(|source| ExecErrorKind::Format { path: path.clone(), source })?;
                diagnostics += parsed.diagnostics.len();
                records.extend(parsed.records);
            }
            let dataset = Dataset::build(records, files.clone(), *rpy, *py, *max_cr)?;
            *session = Session::new(dataset);
            Ok((vec![], diagnostics))
        }
        Step::Cluster(config) => {
            session.apply(&SessionOp::Cluster(*config))?;
            Ok((vec![], 0))
        }
        Step::Merge => {
            session.apply(&SessionOp::Merge)?;
            Ok((vec![], 0))
        }
        Step::RemoveCr { lo, hi } => {
            session.apply(&SessionOp::RemoveCr { lo: *lo, hi: *hi })?;
            Ok((vec![], 0))
        }
        Step::Export { file, kind } => {
            let dataset = session.dataset()?;
            let analysis = Analysis::of(dataset)?;
            let bytes = match kind {
                ExportKind::CsvCr => export::csv_cr_bytes(dataset, &analysis)?,
                ExportKind::CsvGraph => export::csv_graph_bytes(dataset, &analysis)?,
            };
            let path = resolve(file, workdir, bindings);
            export::write_file(&path, &bytes)?;
            Ok((vec![path], 0))
        }
        Step::Save { file } => {
            let path = resolve(file, workdir, bindings);
            export::save_cre(session, &path)?;
            Ok((vec![path], 0))
        }
    }
}
