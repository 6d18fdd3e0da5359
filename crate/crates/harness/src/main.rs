use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use labeling_core::adversary::Profile;
use labeling_harness::experiment::{audit_records, create_dir, write_json};
use labeling_harness::record::read_record;
use labeling_harness::sweep::{parse_grid, read_sweep, write_sweep};
use labeling_harness::{fit_sweep, run_experiment, sweep, ExperimentSpec, HarnessError, Result};

/// Experiments for the online labeling game.
///
/// Exit codes: 0 success, 1 other failure, 2 bad configuration, 3 adversary
/// stuck, 4 capacity exceeded, 5 invalid placement.
#[derive(Parser)]
#[command(name = "labeling", version)]
struct Cli {
    /// Directory for output artifacts.
    #[arg(long, global = true, env = "LABELING_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the seed in the experiment config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the adversary parameter profile (paper or desk).
    #[arg(long, global = true)]
    profile: Option<Profile>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the configured game and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Play the configured game once per grid value of n, in parallel.
    Sweep {
        /// Comma separated step counts, such as `2^10,2^12,2^14`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-audit a run record CSV.
    Audit {
        #[arg(long)]
        record: PathBuf,
        /// Parameter sidecar; defaults to the record path with `.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Fit chi/n = a + b ln(n)^2 to a sweep CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(profile) = cli.profile {
        spec.adversary.profile = profile;
    }
    Ok(spec)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let spec = load(cli, config)?;
            for (summary, _) in run_experiment(&spec, &cli.out_dir)? {
                print_json(&summary)?;
            }
        }
        Command::Sweep { grid, config } => {
            let spec = load(cli, config)?;
            let rows = sweep(&parse_grid(grid)?, &spec)?;
            create_dir(&cli.out_dir)?;
            let path = cli.out_dir.join("sweep.csv");
            write_sweep(&rows, &path)?;
            for r in &rows {
                let chi = r.chi.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
                println!("n={} rep={} chi={} status={}", r.n, r.rep, chi, r.status);
            }
            println!("wrote {}", path.display());
        }
        Command::Audit { record, meta } => {
            let rec = read_record(record, meta.as_deref())?;
            let audits = audit_records(std::slice::from_ref(&rec));
            create_dir(&cli.out_dir)?;
            let path = cli.out_dir.join("audit.json");
            write_json(&path, &audits)?;
            for p in &audits[0].report.properties {
                println!("{:<22} {:?} {}/{}", p.name, p.status, p.violations, p.checked);
            }
            println!("wrote {}", path.display());
        }
        Command::Fit { input } => {
            let fit = fit_sweep(&read_sweep(input)?)?;
            create_dir(&cli.out_dir)?;
            write_json(&cli.out_dir.join("fit.json"), &fit)?;
            print_json(&fit)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            report_code(&e)
        }
    }
}

fn report_code(e: &HarnessError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
