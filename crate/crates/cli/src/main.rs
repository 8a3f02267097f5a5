use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use interpband::{Error, ErrorKind, TargetKind};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "interpband", version, about = "Interpolated sup-t uniform confidence bands")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interpolation error of a reference function on equally spaced grids.
    InterpError(InterpErrorArgs),
    /// Uniform confidence bands for a DiD target on user data.
    Band(BandArgs),
    /// Monte Carlo coverage and L2 study.
    Mc(McArgs),
    /// Deterministic interpolation error bounds.
    Bound(BoundArgs),
}

#[derive(Args, Debug)]
pub struct InterpErrorArgs {
    #[arg(long, default_value = "cos5x-sqrt")]
    pub function: String,
    /// Nodes per axis, comma separated.
    #[arg(long = "L", value_delimiter = ',', default_values_t = [4usize, 8, 10])]
    pub nodes: Vec<usize>,
    /// Number of probe points.
    #[arg(long, default_value_t = 1_000_001)]
    pub probe: usize,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-point error curve for plotting.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    pub curve_points: usize,
}

#[derive(Args, Debug)]
pub struct BandArgs {
    /// CSV with columns y1..yd, d, t and optional w.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "DTT")]
    pub target: TargetKind,
    /// Explicit nodes per axis; otherwise the grid rule with --a/--b.
    #[arg(long = "L", conflicts_with_all = ["a", "b"])]
    pub nodes: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub b: f64,
    /// Region from these empirical quantiles of the pooled outcomes.
    #[arg(long, default_value_t = 0.05)]
    pub tau_lb: f64,
    #[arg(long, default_value_t = 0.95)]
    pub tau_ub: f64,
    #[arg(long = "draws", short = 'B', default_value_t = 499)]
    pub draws: usize,
    #[arg(long = "alpha", value_delimiter = ',', default_values_t = [0.10, 0.05, 0.01])]
    pub alphas: Vec<f64>,
    #[arg(long)]
    pub seed: u64,
    /// Estimation rate; defaults to the sample size.
    #[arg(long)]
    pub r_n: Option<f64>,
    /// Lattice points per axis in the band CSVs.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value = "band-out")]
    pub out_dir: PathBuf,
    /// Also write the bootstrap draw matrix.
    #[arg(long)]
    pub dump_draws: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Args, Debug)]
pub struct McArgs {
    /// Study file (TOML, or JSON by extension).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// uni-desk, biv-desk, uni-full or biv-full.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow studies above desk scale.
    #[arg(long)]
    pub long: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-replication records, one CSV per design.
    #[arg(long)]
    pub audit_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub r_n: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long = "C")]
    pub c: f64,
    #[arg(long = "L")]
    pub nodes: Option<usize>,
    /// Also report the smallest L with bound at most this value.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Hölder exponent; switches to the modulus-of-continuity bound.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0, requires = "alpha")]
    pub c_tilde: f64,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config {
                field: "threads".into(),
                message: "must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config {
                field: "threads".into(),
                message: e.to_string(),
            })?;
    }
    match cli.command {
        Command::InterpError(args) => commands::interp_error(&args),
        Command::Band(args) => commands::band(&args),
        Command::Mc(args) => commands::mc(&args),
        Command::Bound(args) => commands::bound(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
