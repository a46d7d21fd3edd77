use std::io::{Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgAction, Parser, Subcommand};
use rpys::commands::{self, AnalyzeOptions};
use rpys_core::cluster::ClusterConfig;
use rpys_core::script::{execute, Bindings, ExecErrorKind};
use rpys_core::script::{parse_script, ScriptError};
use rpys_core::synth::{synthetic_records, to_wos_text, SynthConfig};
use rpys_core::YearFilter;

#[derive(Parser)]
#[command(name = "rpys", version, about = "Reference publication year spectroscopy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a CRExplorer-style script.
    RunScript {
        /// Script path, or `-` for stdin.
        script: String,
        /// Directory that relative file names resolve against.
        #[arg(long)]
        workdir: Option<PathBuf>,
        /// Map a file name used in the script to a path.
        #[arg(long = "bind", value_name = "NAME=PATH")]
        bindings: Vec<String>,
        /// Print the step report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Import, cluster, merge, filter and export in one go.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.75)]
        cluster_threshold: f64,
        #[arg(long, overrides_with = "no_volume")]
        volume: bool,
        #[arg(long, action = ArgAction::SetTrue)]
        no_volume: bool,
        #[arg(long, overrides_with = "no_page")]
        page: bool,
        #[arg(long, action = ArgAction::SetTrue)]
        no_page: bool,
        #[arg(long, overrides_with = "no_doi")]
        doi: bool,
        #[arg(long, action = ArgAction::SetTrue)]
        no_doi: bool,
        /// Skip clustering and merging.
        #[arg(long)]
        no_cluster: bool,
        /// Drop references cited fewer than N times.
        #[arg(long, default_value_t = 1, value_name = "N")]
        min_ncr: u64,
        /// RPY filter as lo,hi[,include_missing].
        #[arg(long, value_name = "LO,HI")]
        rpy_range: Option<String>,
        /// Citing-year filter as lo,hi[,include_missing].
        #[arg(long, value_name = "LO,HI")]
        py_range: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Stem of the output file names.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Serve the explorer HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "RPYS_BIND", default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Root for server-side imports.
        #[arg(long, default_value = ".")]
        workdir: PathBuf,
    },
    /// Write a synthetic WoS export.
    Synth {
        #[arg(long, default_value_t = 1000)]
        refs: usize,
        #[arg(long, default_value_t = 0.1)]
        variant_rate: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_script(arg: &str) -> anyhow::Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("cannot read {arg}"))
    }
}

fn run_commands(
    script: &[rpys_core::script::ScriptCommand],
    workdir: &Path,
    bindings: &Bindings,
    json: bool,
) -> Result<(), Failure> {
    let (report, session) = execute(script, workdir, bindings).map_err(|e| match e.kind {
        ExecErrorKind::Script(_) => Failure::Usage(e.into()),
        _ => Failure::Run(e.into()),
    })?;
    let text = if json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        commands::render_report(&report, workdir) + &commands::render_summary(&session)
    };
    emit(&text)
}

/// Writes to stdout. A closed pipe is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn flag(on: bool, off: bool, default: bool) -> bool {
    if on {
        true
    } else if off {
        false
    } else {
        default
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::RunScript { script, workdir, bindings, json } => {
            let text = read_script(&script).map_err(Failure::Usage)?;
            let parsed = parse_script(&text).map_err(|e: ScriptError| Failure::Usage(e.into()))?;
            let workdir = match workdir {
                Some(w) => w,
                None => std::env::current_dir()?,
            };
            let bindings = bindings
                .iter()
                .map(|b| commands::parse_binding(b))
                .collect::<anyhow::Result<Bindings>>()
                .map_err(Failure::Usage)?;
            run_commands(&parsed, &workdir, &bindings, json)
        }
        Command::Analyze {
            files,
            cluster_threshold,
            volume,
            no_volume,
            page,
            no_page,
            doi,
            no_doi,
            no_cluster,
            min_ncr,
            rpy_range,
            py_range,
            out_dir,
            name,
            json,
        } => {
            let d = ClusterConfig::default();
            let range = |r: Option<String>| -> Result<YearFilter, Failure> {
                r.map_or(Ok(YearFilter::default()), |s| commands::parse_year_range(&s).map_err(Failure::Usage))
            };
            let opts = AnalyzeOptions {
                files,
                cluster: (!no_cluster).then_some(ClusterConfig {
                    threshold: cluster_threshold,
                    use_volume: flag(volume, no_volume, d.use_volume),
                    use_page: flag(page, no_page, d.use_page),
                    use_doi: flag(doi, no_doi, d.use_doi),
                }),
                min_ncr,
                rpy: range(rpy_range)?,
                py: range(py_range)?,
                name,
            };
            let (script, bindings) = commands::analyze_script(&opts).map_err(Failure::Usage)?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
            run_commands(&script, &out_dir, &bindings, json)
        }
        Command::Serve { port, bind, workdir } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(rpys::server::serve(SocketAddr::new(bind, port), workdir))?;
            Ok(())
        }
        Command::Synth { refs, variant_rate, seed, out } => {
            let config = SynthConfig { distinct_refs: refs, variant_rate, seed, ..SynthConfig::default() };
            let records = synthetic_records(&config);
            std::fs::write(&out, to_wos_text(&records)).with_context(|| format!("cannot write {}", out.display()))?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(())
        }
    }
}
