use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vectk::Tolerances;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "vectk",
    version,
    about = "Vectorial bundles, twisted cocycles and Fredholm families"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "VECTK_JOBS")]
    jobs: Option<usize>,
    /// Agreement tolerance for ≐ and strict checks.
    #[arg(long, global = true)]
    tol_doteq: Option<f64>,
    /// Minimum half-width of a spectral gap.
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    /// Eigensolver convergence tolerance.
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    /// Largest denominator accepted when reading phases.
    #[arg(long, global = true)]
    q_max: Option<u32>,
    /// Write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print the JSON report on stdout instead of the summary.
    #[arg(long, global = true)]
    json: bool,
}

impl Global {
    fn tolerances(&self) -> vectk::Result<Tolerances> {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_doteq {
            tol.doteq = v;
        }
        if let Some(v) = self.gap_tol {
            tol.gap = v;
        }
        if let Some(v) = self.tol_eig {
            tol.eig = v;
        }
        if let Some(v) = self.q_max {
            tol.q_max = v;
        }
        tol.validate().map_err(vectk::Error::Format)?;
        Ok(tol)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integral cohomology of a complex in one degree.
    Cohomology {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Dixmier-Douady class of a U(1) cocycle.
    Dd {
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long)]
        complex: PathBuf,
    },
    /// Whether a twisted bundle of the given rank can exist (exit 1 if not).
    Obstruction {
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        rank: u32,
        /// Write the witness cochain here instead of into the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncate a (twisted) family to a vectorial bundle.
    Approximate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        lifts: Option<PathBuf>,
        /// Expected twist; must equal the cocycle of the lifts.
        #[arg(long)]
        cocycle: Option<PathBuf>,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        out: PathBuf,
        /// Flag neighboring samples whose spectra differ by more than this.
        #[arg(long)]
        lipschitz: Option<f64>,
    },
    /// Check the vectorial bundle conditions (exit 1 on failure).
    Verify {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        cocycle: Option<PathBuf>,
    },
    /// Graded index per connected component.
    Index {
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Write the input files of a built-in scenario.
    Scenario {
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Vertices of the circle (flow-s1).
        #[arg(long)]
        n: Option<usize>,
        /// Random seed (point-operator).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.global.jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let code = pool.install(|| commands::run(&cli.global, &cli.command));
    ExitCode::from(code)
}
