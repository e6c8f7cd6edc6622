use std::path::PathBuf;
use std::process::ExitCode;

use atmr::harness::{run_experiment, summarize_dir, ExperimentConfig};
use atmr::problems::{fmt_f64, has_reference_front, reference_front};
use atmr::{Error, ProblemParams, ProblemRegistry};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "atmr",
    version,
    about = "Constrained multiobjective optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the base seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuild tables and summary.csv from the run records in a directory.
    Summarize {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Print a reference front as CSV.
    Front {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        count: usize,
    },
    /// List the built-in problems.
    ListProblems,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnknownProblem { .. } => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, jobs, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            let report = run_experiment(&cfg, jobs)?;
            eprintln!(
                "{} runs completed, {} failed; output in {}",
                report.records.len(),
                report.failures.len(),
                report.output_dir.display()
            );
            for f in &report.failures {
                eprintln!(
                    "failed: {} {} run {} (seed {}): {}",
                    f.problem, f.algorithm, f.run_index, f.seed, f.error
                );
            }
            if let Some(s) = &report.summary {
                for r in &s.ranks {
                    println!(
                        "{:<10} igd rank {:.3}  hv rank {:.3}",
                        r.algorithm, r.igd_rank, r.hv_rank
                    );
                }
            }
            Ok(if report.is_success() { 0 } else { 3 })
        }
        Command::Summarize { dir } => {
            let s = summarize_dir(&dir)?;
            for r in &s.ranks {
                println!(
                    "{:<10} igd rank {:.3}  hv rank {:.3}",
                    r.algorithm, r.igd_rank, r.hv_rank
                );
            }
            Ok(0)
        }
        Command::Front { problem, count } => {
            if count == 0 {
                return Err(Error::Config("count must be positive".into()));
            }
            let registry = ProblemRegistry::builtin();
            let def = registry.get(&problem, &ProblemParams::new())?;
            if !has_reference_front(&problem) {
                return Err(Error::Config(format!("{problem} has no reference front")));
            }
            let front = reference_front(&problem, count)?;
            let header: Vec<String> = (1..=def.n_obj()).map(|i| format!("f{i}")).collect();
            println!("{}", header.join(","));
            for p in front {
                println!(
                    "{}",
                    p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
                );
            }
            Ok(0)
        }
        Command::ListProblems => {
            for name in ProblemRegistry::builtin().names() {
                let def = ProblemRegistry::builtin().get(&name, &ProblemParams::new())?;
                println!(
                    "{name}\tD={} m={} inequality={} equality={}",
                    def.n_var(),
                    def.n_obj(),
                    def.n_ineq(),
                    def.n_eq()
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
