//! `gbsim`: run uplink sweeps, print closed-form limits, validate configs.

mod config;
mod error;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbsim_core::{run_plan, AsymptoticReport, SinrEvaluation, SubspaceMode};
use serde::Serialize;

use config::{OutputFormat, RunConfig};
use error::CliError;
use output::{csv_failure, write_csv, write_json, JsonContext};

#[derive(Debug, Parser)]
#[command(
    name = "gbsim",
    version,
    about = "Group-blind massive MIMO uplink simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config and write metrics.
    Run(RunArgs),
    /// Print the two-cell closed-form limits as JSON.
    Asymptotics(AsymptoticsArgs),
    /// Check a config for schema errors and feasibility without running it.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; results do not depend on this value.
    #[arg(long, env = "GBSIM_THREADS")]
    threads: Option<usize>,
    /// Overrides `output.path`; `-` writes to stdout.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Debug, Args)]
struct AsymptoticsArgs {
    #[arg(long, allow_negative_numbers = true)]
    beta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    beta2: f64,
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    RunConfig::parse(&text)
}

fn subspace_name(mode: SubspaceMode) -> &'static str {
    match mode {
        SubspaceMode::Genie => "genie",
        SubspaceMode::Eigen => "eigen",
        SubspaceMode::TrainingSpan => "training_span",
    }
}

fn sinr_name(mode: SinrEvaluation) -> &'static str {
    match mode {
        SinrEvaluation::Genie => "genie",
        SinrEvaluation::Conditional => "conditional",
        SinrEvaluation::Empirical => "empirical",
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = load(&args.config)?;
    let plans = cfg.plans()?;
    let threads = args
        .threads
        .or(cfg.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut records = Vec::new();
    for plan in &plans {
        log::info!(
            "running {} eps={} over {} antenna counts, {} trials, {threads} threads",
            plan.scenario_id,
            plan.scenario.eps(),
            plan.n_list.len(),
            plan.trials
        );
        records.extend(run_plan(plan, threads).map_err(|e| CliError::Runtime(e.to_string()))?);
    }

    let path = args.output.unwrap_or_else(|| cfg.output.path.clone());
    let sink: Box<dyn Write> = if path == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(File::create(&path).map_err(|e| CliError::io(&path, e))?)
    };
    let sink = BufWriter::new(sink);
    match cfg.output.format {
        OutputFormat::Csv => write_csv(sink, &records).map_err(|e| csv_failure(&path, e)),
        OutputFormat::Json => {
            let ctx = JsonContext {
                subspace: subspace_name(cfg.subspace),
                sinr_eval: sinr_name(cfg.sinr_eval),
                seed: cfg.seed,
            };
            write_json(sink, &records, &ctx).map_err(|e| CliError::io(&path, e))
        }
    }
}

#[derive(Serialize)]
struct AsymptoticsOutput {
    beta1: f64,
    beta2: f64,
    eps: f64,
    phi: f64,
    rho: f64,
    gamma_bar: f64,
    gamma_bar_prime: f64,
    eta: f64,
    #[serde(rename = "delta_R")]
    delta_r: f64,
    lemma1: Lemma1Output,
}

#[derive(Serialize)]
struct Lemma1Output {
    a_sig: f64,
    a_contam: f64,
    a_err: f64,
    lambda: f64,
}

fn asymptotics(args: AsymptoticsArgs) -> Result<(), CliError> {
    let r =
        AsymptoticReport::new(args.beta1, args.beta2, args.eps).map_err(|e| CliError::Config {
            message: e.to_string(),
            key: None,
        })?;
    let out = AsymptoticsOutput {
        beta1: args.beta1,
        beta2: args.beta2,
        eps: args.eps,
        phi: r.phi,
        rho: r.rho,
        gamma_bar: r.gamma_bar,
        gamma_bar_prime: r.gamma_bar_prime,
        eta: r.eta_bar,
        delta_r: r.delta_r,
        lemma1: Lemma1Output {
            a_sig: r.lemma1.a_sig,
            a_contam: r.lemma1.a_contam,
            a_err: r.lemma1.a_err,
            lambda: r.lemma1.lambda,
        },
    };
    let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let plans = load(&args.config)?.plans()?;
    let points: usize = plans.iter().map(|p| p.n_list.len()).sum();
    println!(
        "{}",
        serde_json::json!({ "status": "ok", "plans": plans.len(), "points": points })
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config {
                message: e
                    .to_string()
                    .trim()
                    .trim_start_matches("error: ")
                    .to_string(),
                key: None,
            };
            eprintln!("{}", err.report());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Asymptotics(args) => asymptotics(args),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
