//! The `olverify` command line.

mod commands;
mod inputs;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::combinat::{budget_from_env, AveragingPlan, Mode};
use crate::error::Result;
use crate::report::{Table, VerificationReport};

#[derive(Debug, Parser)]
#[command(
    name = "olverify",
    version,
    about = "Orlicz-Lorentz norms, permutation averages and L1 embeddings, with numerical verification"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

/// Averaging plan and output options, accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Stop Monte Carlo early once se/mean falls below this.
    #[arg(long, global = true)]
    pub target_rel_se: Option<f64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Exact-enumeration budget in elementary terms (default: OL_BUDGET or 1e8).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Report path; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Optional CSV table path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

impl RunArgs {
    pub fn plan(&self) -> AveragingPlan {
        AveragingPlan {
            mode: match self.mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Mc => Mode::MonteCarlo,
            },
            samples: self.samples,
            seed: self.seed,
            target_rel_se: self.target_rel_se,
            budget: self.budget.unwrap_or_else(budget_from_env),
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Lp,
    Lorentz,
    Orlicz,
    OrliczLorentz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Slow,
    Fast,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a norm of a vector.
    Norm {
        #[arg(long, value_enum)]
        space: SpaceArg,
        /// JSON array, or @path to a JSON file.
        #[arg(long)]
        vector: String,
        #[arg(long)]
        p: Option<f64>,
        /// JSON array, @path, `ones`, or `decay:<alpha>` for `i^-alpha`.
        #[arg(long)]
        weights: Option<String>,
        /// `power:p=..[,c=..]` or `pl:[[t,v],...]`.
        #[arg(long)]
        orlicz: Option<String>,
    },
    /// Numerical verification of the norm identities and inequalities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Empirical Hardy-operator constant on a sample.
    Hardy {
        /// 1 for the head p-mean, 2 for the quadratic tail.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[arg(long)]
        orlicz: String,
        #[arg(long)]
        weights: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: Option<usize>,
        /// Random vectors added to the structured sample.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Fail if the constant exceeds this.
        #[arg(long)]
        max_constant: Option<f64>,
    },
    /// Weight-decay sufficient conditions.
    Weightcond {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        weights: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Fail if the constant exceeds this.
        #[arg(long)]
        max_constant: Option<f64>,
    },
    /// The embedding into L1.
    Embed {
        #[command(subcommand)]
        action: EmbedCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Partial-sum and tail scans for z_i = (n/i)^(1/p), all n <= nmax and m <= n.
    Corollary22 {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        nmax: usize,
    },
    /// Mixed-norm average against its head/tail expression, all k.
    Lemma23 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Permutation average against the constructed Orlicz norm.
    Lemma21 {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 2.5)]
        max_log_spread: f64,
    },
    /// Triple permutation average against the Orlicz-Lorentz norm of M_d.
    Theorem31 {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        orlicz: String,
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 2.5)]
        max_log_spread: f64,
    },
    /// t <= M⁻¹(t)(M*)⁻¹(t) <= 2t on a log grid.
    Duality {
        #[arg(long)]
        orlicz: String,
        #[arg(long, default_value_t = 1e-3)]
        grid_min: f64,
        #[arg(long, default_value_t = 1e3)]
        grid_max: f64,
        #[arg(long, default_value_t = 50)]
        grid_points: usize,
    },
}

/// Either a saved spec or the parameters to build one.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// EmbeddingSpec JSON file.
    #[arg(long, conflicts_with_all = ["p", "orlicz", "weights"])]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub orlicz: Option<String>,
    #[arg(long)]
    pub weights: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum EmbedCommand {
    /// Build and print the EmbeddingSpec.
    Build {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// ‖Ψ_n x‖₁ for one vector.
    Norm {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        vector: String,
        /// Write all coordinates of Ψ_n x to this JSON file (n <= 3).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Ratios ‖Ψ_n x‖₁ / ‖x‖_{M,a} on the default sample.
    Distortion {
        #[command(flatten)]
        spec: SpecArgs,
        /// Vectors to use instead of the default sample (JSON array of arrays or @path).
        #[arg(long)]
        sample: Option<String>,
        #[arg(long)]
        max_distortion: Option<f64>,
    },
    /// Equivalence of M_d* and M* on the grid l/n.
    Md {
        #[arg(long)]
        orlicz: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        spread_bound: Option<f64>,
    },
    /// Sign-average ratio of a square matrix against its Frobenius norm.
    Khintchine {
        /// JSON array of rows, or @path.
        #[arg(long)]
        matrix: String,
    },
}

/// What a command produced.
pub struct Outcome {
    pub report: VerificationReport,
    pub table: Option<Table>,
}

/// Runs a parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let mut outcome = commands::dispatch(cli)?;
    outcome.report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(outcome)
}

/// Entry point: parses `args`, writes the report, and returns the exit code (0 pass, 1 a
/// check failed, 2 error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|o| write_outcome(&cli.run, &o).map(|_| o.report.pass)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("olverify: {e}");
            2
        }
    }
}

fn write_outcome(run: &RunArgs, outcome: &Outcome) -> Result<()> {
    let json = outcome.report.to_json();
    match &run.out {
        Some(path) => inputs::write_file(path, &json)?,
        None => println!("{json}"),
    }
    if let (Some(path), Some(table)) = (&run.csv, &outcome.table) {
        table.write_csv(path)?;
    }
    Ok(())
}
