//! Helpers behind the `run-script` and `analyze` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rpys_core::cluster::ClusterConfig;
use rpys_core::script::{Bindings, ExecutionReport};
use rpys_core::script::{CommandName, ScriptCommand, Value};
use rpys_core::{Analysis, DatasetStats, Session, YearFilter};

/// Parses `NAME=PATH`.
pub fn parse_binding(s: &str) -> anyhow::Result<(String, PathBuf)> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => bail!("expected NAME=PATH, got {s:?}"),
    }
}

/// Parses `lo,hi` or `lo,hi,include_missing`. The flag defaults to true.
pub fn parse_year_range(s: &str) -> anyhow::Result<YearFilter> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let (lo, hi, missing) = match parts.as_slice() {
        [lo, hi] => (lo, hi, "true"),
        [lo, hi, m] => (lo, hi, *m),
        _ => bail!("expected lo,hi[,include_missing], got {s:?}"),
    };
    Ok(YearFilter::new(
        lo.parse().with_context(|| format!("bad year {lo:?}"))?,
        hi.parse().with_context(|| format!("bad year {hi:?}"))?,
        missing.parse().with_context(|| format!("bad flag {missing:?}"))?,
    ))
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub files: Vec<PathBuf>,
    /// `None` skips clustering and merging.
    pub cluster: Option<ClusterConfig>,
    /// References cited fewer times are removed after merging.
    pub min_ncr: u64,
    pub rpy: YearFilter,
    pub py: YearFilter,
    /// Output file stem. Defaults to the first input's stem.
    pub name: Option<String>,
}

fn num(n: impl Into<f64>) -> Value {
    Value::Num(n.into())
}

fn range(f: YearFilter) -> Value {
    Value::Array(vec![num(f.lo), num(f.hi), Value::Bool(f.include_missing)])
}

fn arg(key: &str, v: Value) -> (String, Value) {
    (key.to_string(), v)
}

/// The script equivalent to an `analyze` invocation. Inputs are referenced
/// by basename and bound to their real paths, outputs land in the workdir.
pub fn analyze_script(opts: &AnalyzeOptions) -> anyhow::Result<(Vec<ScriptCommand>, Bindings)> {
    if opts.files.is_empty() {
        bail!("no input files");
    }
    let mut bindings = Bindings::new();
    let mut names = Vec::new();
    for path in &opts.files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .with_context(|| format!("{} has no usable file name", path.display()))?
            .to_string();
        if bindings.insert(name.clone(), path.clone()).is_some() {
            bail!("two inputs share the file name {name}");
        }
        names.push(Value::Str(name));
    }
    let stem = match &opts.name {
        Some(n) => n.clone(),
        None => opts.files[0].file_stem().and_then(|s| s.to_str()).unwrap_or("rpys").to_string(),
    };

    let mut commands = vec![ScriptCommand::new(
        CommandName::ImportFile,
        vec![
            arg("files", Value::Array(names)),
            arg("type", Value::Str("WOS".into())),
            arg("RPY", range(opts.rpy)),
            arg("PY", range(opts.py)),
            arg("maxCR", num(0)),
        ],
    )];
    if let Some(c) = opts.cluster {
        commands.push(ScriptCommand::new(
            CommandName::Cluster,
            vec![
                arg("threshold", num(c.threshold)),
                arg("volume", Value::Bool(c.use_volume)),
                arg("page", Value::Bool(c.use_page)),
                arg("DOI", Value::Bool(c.use_doi)),
            ],
        ));
        commands.push(ScriptCommand::new(CommandName::Merge, vec![]));
    }
    if opts.min_ncr > 1 {
        commands.push(ScriptCommand::new(
            CommandName::RemoveCr,
            vec![arg("N_CR", Value::Array(vec![num(0), num((opts.min_ncr - 1) as f64)]))],
        ));
    }
    for (suffix, kind) in [("_CR.csv", "CSV_CR"), ("_GRAPH.csv", "CSV_GRAPH")] {
        commands.push(ScriptCommand::new(
            CommandName::ExportFile,
            vec![arg("file", Value::Str(format!("{stem}{suffix}"))), arg("type", Value::Str(kind.into()))],
        ));
    }
    commands.push(ScriptCommand::new(CommandName::SaveFile, vec![arg("file", Value::Str(format!("{stem}.cre")))]));
    Ok((commands, bindings))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Plain-text step table.
pub fn render_report(report: &ExecutionReport, workdir: &Path) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>3}  {:<11} {:>10} {:>10} {:>9}  outputs", "#", "command", "ms", "N_CR", "distinct");
    for s in &report.steps {
        let outputs: Vec<String> = s
            .outputs
            .iter()
            .map(|p| p.strip_prefix(workdir).unwrap_or(p).display().to_string())
            .collect();
        let _ = writeln!(
            out,
            "{:>3}  {:<11} {:>10.1} {:>10} {:>9}  {}",
            s.index,
            s.command,
            s.elapsed_ms,
            opt(s.stats.map(|t| t.total_nondistinct_crs)),
            opt(s.stats.map(|t| t.n_distinct_crs)),
            outputs.join(", ")
        );
        if s.diagnostics > 0 {
            let _ = writeln!(out, "     {} record diagnostics", s.diagnostics);
        }
    }
    out
}

pub fn render_stats(stats: &DatasetStats) -> String {
    let span = |lo: Option<i32>, hi: Option<i32>| format!("{}..{}", opt(lo), opt(hi));
    format!(
        "cited references   {}\n\
         distinct           {}\n\
         RPY span           {} ({} distinct)\n\
         citing records     {}\n\
         citing years       {} ({} distinct)\n",
        stats.total_nondistinct_crs,
        stats.n_distinct_crs,
        span(stats.min_rpy, stats.max_rpy),
        stats.n_distinct_rpys,
        stats.n_citing_pubs,
        span(stats.min_citing_year, stats.max_citing_year),
        stats.n_distinct_citing_years,
    )
}

/// Stats plus peak years of the session's final state.
pub fn render_summary(session: &Session) -> String {
    let Some(ds) = &session.dataset else {
        return "no dataset\n".into();
    };
    let mut out = render_stats(&ds.stats());
    match Analysis::of(ds) {
        Ok(a) => {
            let peaks: Vec<String> = a.peak_years().iter().map(i32::to_string).collect();
            let _ = writeln!(out, "peak years         {}", if peaks.is_empty() { "none".into() } else { peaks.join(" ") });
        }
        Err(e) => {
            let _ = writeln!(out, "no analysis: {e}");
        }
    }
    out
}
