//! `levy-fock`: batch verification of Lévy–Khintchine pipelines.
//!
//! Exit status is 0 when every check passes, 1 when a mathematical verdict fails
//! and 2 for usage or input errors, in which case nothing is written.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levy_fock::exponent::Convention;
use levy_fock::gns::{DEFAULT_COBOUNDARY_THRESHOLD, DEFAULT_EIGEN_FLOOR};
use levy_fock::posdef::DEFAULT_PSD_TOL;
use levy_fock::sampler::DEFAULT_DELTA;

use crate::output::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "levy-fock", version, about = "Check Lévy–Khintchine exponents, cocycles and their Fock embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Triplet document (.json) or characteristic-function table (.csv with t,re,im)
    #[arg(long)]
    pub input: PathBuf,
    /// Evaluation grid as lo:hi:step
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output directory
    #[arg(long, default_value = "levy-fock-out")]
    pub out: PathBuf,
    /// Format of tabular outputs
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Relative tolerance of eigenvalue positivity tests
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GnsArgs {
    /// Translation used by the shift-covariance check
    #[arg(long, default_value_t = 0.5)]
    pub shift: f64,
    /// Normalized coboundary residual below which the cocycle counts as a coboundary
    #[arg(long, default_value_t = DEFAULT_COBOUNDARY_THRESHOLD)]
    pub coboundary_threshold: f64,
    /// Relative eigenvalue floor of the finite-rank realization
    #[arg(long, default_value_t = DEFAULT_EIGEN_FLOOR)]
    pub eigen_floor: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    /// First translation of the Weyl checks
    #[arg(long, default_value_t = 0.5)]
    pub shift: f64,
    /// Second translation of the representation check
    #[arg(long, default_value_t = 1.0)]
    pub shift2: f64,
    /// Fock truncation degree of the coherent-vector check
    #[arg(long, default_value_t = levy_fock::fock::DEFAULT_DEGREE)]
    pub degree: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Small-jump threshold
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Time horizon T
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate f and F = exp f on a grid, with the triplet's integrability checks
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite a triplet in another centering convention
    Convert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Convention,
    },
    /// Gram-matrix positivity of F, and conditional positivity of f for triplets
    CheckPd {
        #[command(flatten)]
        common: Common,
    },
    /// Positivity of the n-th roots exp(f/n) for n = 1..nmax
    CheckId {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
    },
    /// Cocycle kernel, finite-rank realization, shift covariance and coboundary fit
    Gns {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gns: GnsArgs,
    },
    /// Coherent-state identities and the Weyl action on EXP ψ
    EmbedVerify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, default_value_t = DEFAULT_EIGEN_FLOOR)]
        eigen_floor: f64,
    },
    /// Write sample paths as CSV files
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 10)]
        paths: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Compare the empirical characteristic function of X(T) with exp(T f)
    EcfCompare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 200_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Allowed deviation is radius_mult / sqrt(paths)
        #[arg(long, default_value_t = 5.0)]
        radius_mult: f64,
        /// Allowed deviation of the divisibility-in-law check, times 1/sqrt(paths)
        #[arg(long, default_value_t = 6.0)]
        divisibility_mult: f64,
    },
    /// Run eval, check-pd, check-id, gns and embed-verify on one triplet
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
        #[command(flatten)]
        gns: GnsArgs,
        #[arg(long, default_value_t = levy_fock::fock::DEFAULT_DEGREE)]
        degree: usize,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, common, result) = match &cli.command {
        Command::Eval { common } => ("eval", common, commands::eval(common)),
        Command::Convert { common, target } => ("convert", common, commands::convert(common, *target)),
        Command::CheckPd { common } => ("check-pd", common, commands::check_pd(common)),
        Command::CheckId { common, nmax } => ("check-id", common, commands::check_id(common, *nmax)),
        Command::Gns { common, gns } => ("gns", common, commands::gns(common, gns)),
        Command::EmbedVerify {
            common,
            embed,
            eigen_floor,
        } => ("embed-verify", common, commands::embed_verify(common, embed, *eigen_floor)),
        Command::Sample {
            common,
            sample,
            paths,
            steps,
        } => ("sample", common, commands::sample(common, sample, *paths, *steps)),
        Command::EcfCompare {
            common,
            sample,
            paths,
            steps,
            radius_mult,
            divisibility_mult,
        } => (
            "ecf-compare",
            common,
            commands::ecf_compare(common, sample, *paths, *steps, *radius_mult, *divisibility_mult),
        ),
        Command::Report {
            common,
            nmax,
            gns,
            degree,
        } => ("report", common, commands::report(common, *nmax, gns, *degree)),
    };
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            eprintln!("levy-fock {name}: {}", one_line(&e));
            return ExitCode::from(2);
        }
    };
    let manifest = RunManifest {
        tool: "levy-fock",
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        argv: argv.into_iter().skip(1).collect(),
        inputs: run.inputs.clone(),
        seed: run.seed,
        settings: run.settings.clone(),
        passed: run.passed,
        outputs: run.outputs.digests(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let mut outputs = run.outputs;
    outputs.add_json("manifest.json", &manifest);
    if let Err(e) = outputs.write_all(&common.out) {
        eprintln!("levy-fock {name}: {}", one_line(&e));
        return ExitCode::from(2);
    }
    for line in &run.summary {
        println!("{line}");
    }
    if run.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn one_line(e: &anyhow::Error) -> String {
    format!("{e:#}").replace('\n', " ")
}
