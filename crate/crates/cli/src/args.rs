use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sumprod", version, about = "Product sets of shifted rationals: generators and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance set file.
    Gen(GenArgs),
    /// Run a verification suite and write reports.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    /// Destination file; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Generalised geometric progression p₁^{i₁}⋯p_r^{i_r} over an exponent box.
    Ggp {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        /// One lo..hi range per prime, comma separated.
        #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        boxes: Vec<String>,
    },
    /// The first `count` primes.
    Primes {
        #[arg(long)]
        count: usize,
    },
    /// A seeded uniform subset of an existing set file.
    RandomSubset {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(subcommand)]
    pub suite: Suite,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub max_tuples: u64,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub max_samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "SUMPROD_OUT_DIR", default_value = "sumprod-reports")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SetArgs {
    /// Set file: one rational per line, `#` starts a comment.
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Rational shift u applied as A + u.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Auto,
    Integer,
    Rational,
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Γ table, E_k, E_k^+ and the brute-force cross-check.
    Energy {
        #[command(flatten)]
        set: SetArgs,
        /// Skip the 2k-tuple oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Certified lower bound on Λ_k.
    Lambda {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        opts: LambdaArgs,
    },
    /// Theorem bounds for A + u (u defaults to 1).
    Bounds {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        opts: LambdaArgs,
        #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
        regime: RegimeArg,
        /// Random subsets for the stability check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Mean values of the Dirichlet polynomial with uniform weights.
    Dirichlet {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        samples_per_period: u32,
        /// Also write a gnuplot data file.
        #[arg(long)]
        plot: bool,
    },
    /// Solutions of c₁s₁ + c₂s₂ = 1 with s_i of height ≤ H.
    Sunit {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long)]
        height: u32,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        c1: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        c2: String,
    },
    /// Collision claim inside sign-pattern groups.
    Claim {
        #[command(flatten)]
        set: SetArgs,
        /// A single group index; all groups within budget otherwise.
        #[arg(long)]
        group: Option<usize>,
    },
    /// Valuation image, multiplicative dimension and canonical form.
    Dimension {
        #[arg(long)]
        set: PathBuf,
    },
}
