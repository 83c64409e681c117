use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use confine::harness::{self, HarnessError, HarnessResult, RunOptions};
use confine::search::{adversarial_search, SearchConfig};

/// Generate zero-sum vector families, run the rearrangement constructions
/// and oracles on them, and verify the claimed bounds.
#[derive(Parser)]
#[command(name = "confine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a GenSpec (or an array of them) into a JSON-lines instance file.
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the seed of every spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run constructions on an instance file and write one record per (instance, algorithm).
    Run {
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated tags (sqrt5, steinitz2, sector, weighted) or `all`.
        #[arg(long, default_value = "all")]
        algorithms: String,
        /// Attach the exact optimal radius for small instances.
        #[arg(long)]
        oracle: bool,
        /// Store instance and permutation in each record for re-verification.
        #[arg(long)]
        embed_perms: bool,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Record runtime_ms (makes the output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Check a record file; exits 1 on any violation or mismatch.
    Verify {
        records: PathBuf,
        /// Write the summary JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a record file without judging it.
    Summarize {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Hill-climb for instances with a large radius.
    Search {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the accepted-step history as CSV.
        #[arg(long)]
        history_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> HarnessResult<u8> {
    match command {
        Command::Generate { spec, out, seed } => {
            let specs = harness::parse_gen_specs(&harness::read_text(&spec)?)?;
            let records = harness::generate(&specs, seed)?;
            harness::write_text(&out, &harness::to_jsonl(&records))?;
            log::info!("wrote {} instances to {}", records.len(), out.display());
            Ok(0)
        }
        Command::Run {
            instances,
            out,
            algorithms,
            oracle,
            embed_perms,
            workers,
            timing,
        } => {
            let opts = RunOptions {
                algorithms: harness::parse_algorithms(&algorithms)?,
                oracle,
                embed_perms,
                workers,
                timing,
            };
            let input = harness::parse_instances(&harness::read_text(&instances)?, &name(&instances))?;
            let records = harness::run_instances(&input, &opts)?;
            harness::write_text(&out, &harness::to_jsonl(&records))?;
            Ok(0)
        }
        Command::Verify { records, out } => {
            let recs = harness::parse_records(&harness::read_text(&records)?, &name(&records))?;
            let report = harness::verify(&recs);
            eprint!("{}", report.text());
            emit_json(&report, out.as_deref())?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Summarize { records, out, csv } => {
            let recs = harness::parse_records(&harness::read_text(&records)?, &name(&records))?;
            let report = harness::summarize(&recs);
            eprint!("{}", report.text());
            emit_json(&report, out.as_deref())?;
            if let Some(path) = csv {
                harness::write_text(&path, &harness::records_csv(&recs))?;
            }
            Ok(0)
        }
        Command::Search {
            config,
            out,
            seed,
            history_csv,
            workers,
        } => {
            let mut cfg: SearchConfig = serde_json::from_str(&harness::read_text(&config)?)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", config.display())))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
            let report = pool.install(|| adversarial_search(&cfg))?;
            eprintln!(
                "best radius {:.15} ({} objective, restart {})",
                report.best_radius, report.objective_label, report.best_restart
            );
            if report.conjecture_candidate {
                eprintln!("*** best radius exceeds √2: candidate counterexample, see report ***");
            }
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            harness::write_text(&out, &(json + "\n"))?;
            if let Some(path) = history_csv {
                harness::write_text(&path, &report.history_csv())?;
            }
            Ok(0)
        }
    }
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> HarnessResult<()> {
    let json = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match out {
        Some(path) => harness::write_text(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
