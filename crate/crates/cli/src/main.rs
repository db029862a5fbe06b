//! `kzn`: construct, verify and certify Kakeya sets over `Z/NZ`.
//!
//! Exit status is 0 when every check passes, 2 when a mathematical check
//! fails and 1 on usage or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "kzn", version, about = "Exact Kakeya set toolkit over Z/NZ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Where to write the report (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the explicit construction and verify it with its witness lines.
    Construct {
        #[arg(long, requires_all = ["s"], conflicts_with = "spec")]
        p: Option<u64>,
        #[arg(long)]
        s: Option<u32>,
        /// Comma-separated `p:s` pairs for a CRT product, e.g. `2:0,3:0`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        n: usize,
        /// Write the point set here.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Write the witness lines here.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Check the (m, eps)-Kakeya property of a point set file.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: Option<u64>,
        /// A fraction such as `1`, `1/3` or `0.5`.
        #[arg(long, default_value = "1")]
        eps: String,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// F_p-rank of M_{p^l,n} against its certified lower bounds.
    Rank {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        n: usize,
        /// Also compare with the rank of the rows with a unit coordinate.
        #[arg(long)]
        restrict: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form lower bounds, and construction upper bounds for a spec.
    Bounds {
        #[arg(long = "N")]
        modulus: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        eps: Option<String>,
        /// Comma-separated `p:s` pairs whose construction bounds to add.
        #[arg(long)]
        spec: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Verify the decoding identity on lines of (Z/p^kZ)^n.
    DecodeCheck {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        n: usize,
        /// Every direction and every lift instead of the first direction.
        #[arg(long)]
        all_directions: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest Kakeya set by exhaustive search, or greedy beyond its range.
    SearchMin {
        #[arg(long = "N")]
        modulus: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the set found here.
        #[arg(long)]
        points: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Parameter sweeps as one report.
    Report {
        #[arg(long, value_enum, default_value = "empty")]
        sweep: Sweep,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 3)]
        max_ell: u32,
        #[arg(long, default_value_t = 2)]
        max_n: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Empty,
    Rank,
    Construct,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("KZN_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("KZN_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    use commands::*;
    match cli.command {
        Command::Construct {
            p,
            s,
            spec,
            n,
            points,
            witness,
            output,
        } => construct(p.zip(s), spec.as_deref(), n, points, witness, &output),
        Command::Verify {
            input,
            m,
            eps,
            witness,
            output,
        } => verify(&input, m, &eps, witness.as_deref(), &output),
        Command::Rank {
            p,
            ell,
            n,
            restrict,
            output,
        } => rank(p, ell, n, restrict, &output),
        Command::Bounds {
            modulus,
            n,
            m,
            eps,
            spec,
            output,
        } => bounds(modulus, n, m, eps.as_deref(), spec.as_deref(), &output),
        Command::DecodeCheck {
            p,
            k,
            ell,
            n,
            all_directions,
            seed,
            output,
        } => decode_check(p, k, ell, n, all_directions, seed, &output),
        Command::SearchMin {
            modulus,
            n,
            seed,
            points,
            output,
        } => search_min(modulus, n, seed, points, &output),
        Command::Report {
            sweep,
            p,
            s,
            max_ell,
            max_n,
            output,
        } => report(sweep, p, s, max_ell, max_n, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
