//! `rewit` command-line front end.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 usage or input
//! error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rewit", version, about = "Reduction-type entanglement witness toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Args, Debug)]
pub struct OracleKnobs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 200)]
    pub seesaw_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the witness operator from a parameter file.
    Build { params: PathBuf },
    /// Exact eigenvalues, checked against a numeric eigensolver.
    Spectrum { params: PathBuf },
    /// Apexes and facets of the feasible region for a shape.
    Apexes {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Exact minimum over product states.
    Lp { params: PathBuf },
    /// Witness classification and decomposition.
    Classify { params: PathBuf },
    /// Decomposability verdict and PPT detector states.
    Detect {
        params: PathBuf,
        /// Optional state (ket or density matrix) to evaluate.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Bell-diagonal witnesses.
    Bd {
        #[command(subcommand)]
        mode: BdMode,
    },
    /// Positive map of a witness applied to a density matrix.
    Map(MapArgs),
    /// See-saw minimization cross-checked against the exact minimum.
    Oracle {
        params: PathBuf,
        #[command(flatten)]
        knobs: OracleKnobs,
    },
    /// Run the built-in regression fixtures.
    Reproduce,
}

#[derive(Subcommand, Debug)]
pub enum BdMode {
    /// Witness W1 with its exact LP and optimality certificate.
    W1 {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Sampling check of the curved region; optionally a see-saw minimum.
    W2 {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true, requires_all = ["b", "c"])]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct MapArgs {
    /// Density matrix the map is applied to.
    #[arg(long)]
    pub rho: PathBuf,
    /// Witness operator file in interleaved (input, output) order.
    #[arg(long, requires_all = ["input_dims", "output_dims"])]
    pub witness: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub input_dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub output_dims: Option<Vec<usize>>,
    /// Factor witness `d,d_out,a1,a2,a1'`; repeat once per factor.
    #[arg(long = "factor", allow_hyphen_values = true)]
    pub factors: Vec<String>,
    /// Random states for the positivity check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match commands::run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let text = match cli.format {
        Format::Human => report.human(),
        Format::Json => report.structured(),
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("check failed: {f}");
        }
        ExitCode::from(1)
    }
}
