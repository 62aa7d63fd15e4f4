//! Batch front end for the stable-rank workbench.
//!
//! Exit codes: 0 success, 2 configuration error, 3 invariant violation.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "srbench", version, about = "Stable-rank workbench for represented C*-algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Algebra: a JSON spec file, or one of `m<k>`, `sum:<k1>,<k2>,…`,
    /// `interval`, `disk` (fields use --mesh-res).
    #[arg(long, default_value = "m2")]
    pub algebra: String,
    /// Tuple length, or the largest n tried by `sr`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    #[arg(long = "mesh-res", default_value_t = 64)]
    pub mesh_res: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Slack for the invariant checks made on results.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ElementArgs {
    /// `probe:<i>`, `random`, `zero` or `one`.
    #[arg(long, default_value = "probe:0")]
    pub element: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the randomized verification suites.
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
        /// Instances per suite; per-suite defaults when absent.
        #[arg(long)]
        instances: Option<usize>,
        /// Comma-separated subset of shift,section,distance_formula,eigen,polar.
        #[arg(long)]
        suites: Option<String>,
    },
    /// Certified bounds on the distance of an element to `Lg_n`.
    Dist {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        element: ElementArgs,
    },
    /// Maximal-distance witness built from a distance certificate.
    Witness {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        element: ElementArgs,
    },
    /// Estimate φ_n on an algebra.
    Phi {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the stable rank up to `--n`.
    Sr {
        #[command(flatten)]
        common: Common,
    },
    /// Kadison–Kastler distance between two subalgebras of `M_d`.
    Kk {
        #[command(flatten)]
        common: Common,
        /// Subalgebra: a JSON spec file, or `full:<d>`, `diag:<d>`,
        /// `blocks:<k1>,<k2>,…`.
        #[arg(long)]
        first: String,
        /// Defaults to the first subalgebra.
        #[arg(long)]
        second: Option<String>,
        /// Conjugate the second subalgebra by a unitary within this of 1.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Stable-rank agreement across perturbed pairs.
    PerturbExperiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        matrix_pairs: usize,
        #[arg(long, default_value_t = 10)]
        disk_pairs: usize,
    },
    /// Parse a sentence and check that its canonical form round-trips.
    Parse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        formula: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::VerifyLemmas {
            common,
            instances,
            suites,
        } => commands::verify_lemmas(common, *instances, suites.as_deref()),
        Command::Dist { common, element } => commands::dist(common, &element.element),
        Command::Witness { common, element } => commands::witness(common, &element.element),
        Command::Phi { common } => commands::phi(common),
        Command::Sr { common } => commands::sr(common),
        Command::Kk {
            common,
            first,
            second,
            epsilon,
        } => commands::kk(common, first, second.as_deref(), *epsilon),
        Command::PerturbExperiment {
            common,
            matrix_pairs,
            disk_pairs,
        } => commands::perturb_experiment(common, *matrix_pairs, *disk_pairs),
        Command::Parse { common, formula } => commands::parse(common, formula),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
