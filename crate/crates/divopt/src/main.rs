//! Command-line front end: run experiments from JSON configs, evaluate the
//! star discrepancy of point files, and print feature vectors of instances.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use divopt::discrepancy::DiscrepancyMeasure;
use divopt::harness::{self, DomainKind, HarnessError};

#[derive(Parser)]
#[command(name = "divopt", version, about = "Evolves quality-gated solution sets toward low star discrepancy of their feature vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        /// Experiment config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (overrides the config's base_seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the repetitions; DIVOPT_JOBS sets the default.
        #[arg(long)]
        jobs: Option<usize>,
        /// Reference image path (overrides the config's image.reference).
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Print the star discrepancy of a point-set CSV file.
    Discrepancy {
        /// Point file: `# d=<d> k=<k>` header, one point per line.
        #[arg(long)]
        points: PathBuf,
        /// Evaluate the literal one-sided formula instead.
        #[arg(long)]
        one_sided: bool,
    },
    /// Print the feature vector of a single instance file.
    Features {
        #[arg(long, value_enum)]
        domain: DomainArg,
        /// Instance file (`n` + coordinate lines for tsp, binary PPM for image).
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Tsp,
    Image,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
            reference,
        } => {
            let mut config = harness::load_config(&config)?;
            if let Some(out) = out {
                config.output_dir = Some(out);
            }
            if let Some(seed) = seed {
                config.base_seed = seed;
            }
            if let Some(reference) = reference {
                match config.image.as_mut() {
                    Some(section) => section.reference = reference,
                    None => {
                        eprintln!("warning: --reference ignored for non-image domain");
                    }
                }
            }
            config.validate()?;
            println!("{}", serde_json::to_string_pretty(&config)?);

            let jobs = jobs.unwrap_or_else(jobs_from_env);
            let summary = harness::run_experiment(&config, jobs)?;
            for outcome in &summary.outcomes {
                match &outcome.result {
                    Ok(data) => println!(
                        "rep {:3} seed {:>6}: discrepancy {:.6} -> {:.6}",
                        outcome.repetition,
                        outcome.seed,
                        data.initial_discrepancy,
                        data.final_discrepancy
                    ),
                    Err(message) => {
                        println!("rep {:3} seed {:>6}: FAILED: {message}", outcome.repetition, outcome.seed)
                    }
                }
            }
            if let Some((min, mean, std)) = summary.aggregate {
                println!("final discrepancy: min {min:.6} mean {mean:.6} std {std:.6}");
            }
            Ok(if summary.all_completed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Discrepancy { points, one_sided } => {
            let measure = if one_sided {
                DiscrepancyMeasure::OneSided
            } else {
                DiscrepancyMeasure::TwoSided
            };
            let value = harness::discrepancy_of_file(&points, measure)?;
            println!("{value}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Features { domain, instance } => {
            let domain = match domain {
                DomainArg::Tsp => DomainKind::Tsp,
                DomainArg::Image => DomainKind::Image,
            };
            for (name, value) in harness::features_of_file(domain, &instance)? {
                println!("{name} {value}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn jobs_from_env() -> usize {
    std::env::var("DIVOPT_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
}
