use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sheetstack::ingest::{SheetFormat, WindowSize};
use sheetstack::personalize::ConfigDefaults;
use sheetstack::service::{serve, Engine, EngineOptions, ServiceError};

#[derive(Debug, Parser)]
#[command(name = "sheetstack", version, about = "Insight feeds over recurring spreadsheet reports")]
struct Cli {
    #[arg(long, env = "SHEETSTACK_DATA_ROOT", default_value = "sheetstack-data", global = true)]
    data_root: PathBuf,
    #[arg(long, env = "SHEETSTACK_PORT", default_value_t = 8080, global = true)]
    port: u16,
    /// Default window: a count of at least 2, or "all".
    #[arg(long, env = "SHEETSTACK_WINDOW", default_value = "10", global = true)]
    window: WindowSize,
    #[arg(long, env = "SHEETSTACK_SEED", default_value_t = 42, global = true)]
    seed: u64,
    /// Min-max scale series before fitting, by default.
    #[arg(long, env = "SHEETSTACK_NORMALIZE", global = true)]
    normalize: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the HTTP API.
    Serve,
    /// Add sheets to a report type; prints one pipeline run per file.
    Ingest {
        report: String,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Epoch seconds; only valid with a single file.
        #[arg(long)]
        ts: Option<i64>,
    },
    /// Print the feed JSON of a report type.
    Feed {
        report: String,
        #[arg(long)]
        user: Option<String>,
    },
    /// Apply a preference command and print the outcome with the new feed.
    Command {
        #[arg(long, default_value = "default")]
        user: String,
        #[arg(required = true, num_args = 1..)]
        text: Vec<String>,
    },
    /// Print one series with its stats.
    Series {
        key: String,
        #[arg(long)]
        report: Option<String>,
        #[arg(long)]
        user: Option<String>,
    },
    /// Print per-series stats as TSV.
    DumpStats {
        report: String,
        #[arg(long)]
        user: Option<String>,
    },
    /// Print every series of the window.
    DumpSeries {
        report: String,
        #[arg(long)]
        user: Option<String>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let engine = Engine::open(EngineOptions {
        data_root: Some(cli.data_root.clone()),
        defaults: ConfigDefaults {
            window_size: cli.window,
            normalize: cli.normalize,
            rng_seed: cli.seed,
        },
        ..EngineOptions::default()
    })
    .with_context(|| format!("opening data root {}", cli.data_root.display()))?;

    match cli.command {
        Cmd::Serve => {
            let addr = SocketAddr::from(([0, 0, 0, 0], cli.port));
            tokio::runtime::Runtime::new()?.block_on(serve(Arc::new(engine), addr))?;
        }
        Cmd::Ingest { report, files, ts } => {
            anyhow::ensure!(ts.is_none() || files.len() == 1, "--ts needs exactly one file");
            for path in files {
                let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let format = SheetFormat::from_file_name(&name).unwrap_or(SheetFormat::Csv);
                let run = engine
                    .upload(&report, &name, &bytes, format, ts)
                    .with_context(|| format!("ingesting {}", path.display()))?;
                println!("{}", serde_json::to_string(&run)?);
            }
        }
        Cmd::Feed { report, user } => println!("{}", engine.feed(&report, user.as_deref())?),
        Cmd::Command { user, text } => {
            let outcome = engine.command(&user, &text.join(" ")).map_err(|e| match e {
                ServiceError::Parse(p) => {
                    let hint = p.suggestion.map(|s| format!("did you mean: {s}\n")).unwrap_or_default();
                    anyhow::anyhow!("{}\n{hint}{}", p.message, p.help)
                }
                other => other.into(),
            })?;
            println!("{}", serde_json::to_string(&outcome)?);
        }
        Cmd::Series { key, report, user } => {
            let detail = engine.series(&key, report.as_deref(), user.as_deref())?;
            println!("{}", serde_json::to_string(&detail)?);
        }
        Cmd::DumpStats { report, user } => print!("{}", engine.dump_stats(&report, user.as_deref())?),
        Cmd::DumpSeries { report, user } => print!("{}", engine.dump_series(&report, user.as_deref())?),
    }
    Ok(())
}
