use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use timelab_report::{export_run, export_sweep, load_config, run_scenario, sweep, Format, ReportError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "timelab", version, about = "Run time-of-arrival measurement scenarios")]
struct Cli {
    /// Reserved; every current scenario is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (a sweep file is run as a sweep).
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run every point of a sweep scenario.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn destination(config: &ScenarioConfig, out: Option<PathBuf>, format: Option<FormatArg>) -> (PathBuf, Format) {
    let dir = out.or_else(|| config.output().dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let format = match format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => config.output().format.unwrap_or(Format::Json),
    };
    (dir, format)
}

fn run_sweep(config: &ScenarioConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>, ReportError> {
    let result = sweep(config)?;
    println!("{}", result.table.columns.join("\t"));
    for row in &result.table.rows {
        let cells: Vec<String> = row.iter().map(|v| v.map(|x| format!("{x:.6e}")).unwrap_or_default()).collect();
        println!("{}", cells.join("\t"));
    }
    export_sweep(&result, dir, format)
}

fn execute(cli: Cli) -> Result<(), ReportError> {
    let written = match cli.command {
        Command::Validate { scenario } => {
            let config = load_config(&scenario)?;
            println!("ok: {} scenario `{}`", config.kind(), config.id());
            return Ok(());
        }
        Command::Run { scenario, out, format } => {
            let config = load_config(&scenario)?;
            let (dir, format) = destination(&config, out, format);
            if matches!(config, ScenarioConfig::Sweep(_)) {
                run_sweep(&config, &dir, format)?
            } else {
                let result = run_scenario(&config)?;
                for (k, v) in &result.summary {
                    println!("{k} = {v:.10e}");
                }
                for w in &result.provenance.warnings {
                    eprintln!("warning: {w}");
                }
                export_run(&result, &dir, format)?
            }
        }
        Command::Sweep { scenario, out, format } => {
            let config = load_config(&scenario)?;
            if !matches!(config, ScenarioConfig::Sweep(_)) {
                return Err(ReportError::config("kind", format!("`sweep` needs a sweep scenario, got `{}`", config.kind())));
            }
            let (dir, format) = destination(&config, out, format);
            run_sweep(&config, &dir, format)?
        }
    };
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.seed;
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
