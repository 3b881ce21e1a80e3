mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cmab::bench::{
    decompose_runs, emit, read_trace, run_experiment_partial, summary_path, write_summary,
    write_trace, DecompositionReport, Summary,
};
use cmab::BanditError;

use args::{parse_config_file, RunArgs, RunPlan};

/// Contextual bandit experiments.
#[derive(Debug, Parser)]
#[command(name = "bandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run an algorithm over one or more seeds and write per-round logs
    /// plus `<out>.summary.json`.
    Run(RunArgs),
    /// Split the pseudo-regret of a recorded run into its three terms.
    Decompose {
        /// Trace written by `bandit run --record`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<BanditError> for Failure {
    fn from(e: BanditError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Decompose { input, out } => decompose(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli_args: RunArgs) -> Result<(), Failure> {
    let args = match &cli_args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let file = parse_config_file(path, &text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            cli_args.merged(file)
        }
        None => cli_args,
    };
    let plan = RunPlan::try_from(args).map_err(Failure::Config)?;

    let (runs, failure) = run_experiment_partial(&plan.config);
    // completed seeds are written even when a later one fails
    if !runs.is_empty() {
        emit(&runs, plan.format, &plan.out)?;
        if let Some(path) = &plan.record {
            write_trace(&runs, path)?;
        }
    }
    if let Some(e) = failure {
        return Err(e.into());
    }
    let summary = Summary::from_runs(&plan.config, &runs)?;
    write_summary(&summary, &summary_path(&plan.out))?;

    let pv = summary.final_pv_loss;
    print!(
        "{} over {} seed(s): final PV loss {:.4}",
        summary.algorithm,
        runs.len(),
        pv.mean
    );
    if let Some(std) = pv.std {
        print!(" ± {std:.4}");
    }
    if let Some(r) = summary.final_pseudo_regret {
        print!(", pseudo-regret {:.3}", r.mean);
        if let Some(std) = r.std {
            print!(" ± {std:.3}");
        }
    }
    println!();
    Ok(())
}

#[derive(Serialize)]
struct SeedReport {
    seed: u64,
    #[serde(flatten)]
    report: DecompositionReport,
    residual: f64,
}

fn decompose(input: &Path, out: &Path) -> Result<(), Failure> {
    let trace = read_trace(input)?;
    if trace.is_empty() {
        return Err(Failure::Config(format!("{}: empty trace", input.display())));
    }
    let reports: Vec<SeedReport> = decompose_runs(&trace)?
        .into_iter()
        .map(|(seed, report)| SeedReport {
            seed,
            report,
            residual: report.residual(),
        })
        .collect();
    let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
    std::fs::write(out, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    for r in &reports {
        println!(
            "seed {}: I {:.4}  II {:.4}  III {:.4}  pseudo-regret {:.4}",
            r.seed, r.report.term_i, r.report.term_ii, r.report.term_iii, r.report.pseudo_regret
        );
    }
    Ok(())
}
