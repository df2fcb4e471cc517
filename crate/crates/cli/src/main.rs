mod render;
mod simulate;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use blockwish::classify::{classify, predict_limit_law};
use blockwish::free_poisson::{asymptotic_limit, compound_from_choi};
use blockwish::moments::{is_multiplicative, spectral_atoms, DEFAULT_TOLERANCE};
use blockwish::partition::enumerate_partitions;
use blockwish::{Error, Partition};

use render::{CompoundRoute, PartitionRow, PredictOutput};
use source::SourceArgs;

/// Environment variable naming the default directory for simulation artifacts.
pub const OUT_DIR_ENV: &str = "BLOCKWISH_OUT_DIR";

#[derive(Parser)]
#[command(name = "blockwish", version, about = "Easy and twisted block maps, their Choi matrices and Wishart limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List the partitions with K upper and L lower points.
    Partitions {
        upper: usize,
        lower: usize,
        /// Only partitions whose blocks all have even size.
        #[arg(long)]
        even: bool,
        #[arg(long)]
        noncrossing: bool,
        /// Only partitions fixed by the middle symmetry.
        #[arg(long)]
        symmetric: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Symmetric components and eligibility of one partition.
    Classify {
        #[arg(long)]
        pi: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check whether a Choi matrix is multiplicative up to a given order.
    CheckMult {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "pmax", default_value_t = 4)]
        p_max: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact limiting *-moments of the block-modified Wishart matrix.
    Predict {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long = "pmax", default_value_t = 4)]
        p_max: usize,
        /// Fail unless the compound free Poisson route applies.
        #[arg(long)]
        require_eligible: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo convergence sweep against the exact limit.
    Simulate(simulate::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Partitions { upper, lower, even, noncrossing, symmetric, out } => {
            let rows: Vec<PartitionRow> = enumerate_partitions(upper, lower, even)?
                .iter()
                .filter(|pi| !noncrossing || pi.is_noncrossing())
                .map(PartitionRow::new)
                .filter(|row| !symmetric || row.symmetric == Some(true))
                .collect();
            emit(&out, render::partitions(&rows, out.format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { pi, out } => {
            let pi: Partition = pi.parse()?;
            let report = classify(&pi)?;
            emit(&out, render::classification(&pi, &report, out.format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckMult { source, p_max, tol, out } => {
            let resolved = source.resolve()?;
            let report = is_multiplicative(&resolved.choi, p_max, tol)?;
            emit(&out, render::multiplicativity(&resolved, &report, out.format)?)?;
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Predict { source, m, p_max, require_eligible, out } => {
            let resolved = source.resolve()?;
            let limit = asymptotic_limit(&resolved.choi, m, p_max)?;
            let (compound, note) = compound_route(&resolved, m, p_max)?;
            if require_eligible && compound.is_none() {
                bail!("{}", note.unwrap_or_default());
            }
            let output = PredictOutput {
                source: resolved.label.clone(),
                twisted: resolved.twisted,
                n: resolved.choi.inner_dim(),
                m,
                p_max,
                w_tilde: limit.rescaled(1.0 / m as f64),
                m_w_tilde: limit,
                compound,
                note,
            };
            emit(&out, render::prediction(&resolved, &output, out.format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => simulate::run(args),
    }
}

/// The compound free Poisson route, or the reason it does not apply.
fn compound_route(resolved: &source::Resolved, m: usize, p_max: usize) -> Result<(Option<CompoundRoute>, Option<String>)> {
    if let (Some(pi), Some(base)) = (&resolved.partition, resolved.base) {
        return match predict_limit_law(pi, base, m, resolved.twisted, p_max) {
            Ok(prediction) => Ok((
                Some(CompoundRoute { moments: prediction.moments, base: prediction.base }),
                None,
            )),
            Err(Error::Ineligible(reason)) => Ok((None, Some(format!("no compound route: {reason}")))),
            Err(Error::Inconsistent(_)) => Ok((
                None,
                Some(format!("no compound route: the twisted limit of {pi} differs from the untwisted prediction")),
            )),
            Err(e) => Err(e.into()),
        };
    }
    let report = is_multiplicative(&resolved.choi, p_max, DEFAULT_TOLERANCE)?;
    if !report.verdict {
        return Ok((None, Some(format!("no compound route: the Choi matrix is not multiplicative up to p = {p_max}"))));
    }
    let moments = compound_from_choi(&resolved.choi, m, p_max)?;
    let mn = (m * resolved.choi.inner_dim()) as f64;
    let base = if resolved.choi.is_self_adjoint(DEFAULT_TOLERANCE) {
        Some(spectral_atoms(&resolved.choi, 1e-8)?.scaled(mn)?)
    } else {
        None
    };
    Ok((Some(CompoundRoute { moments, base }), None))
}

fn emit(out: &OutputArgs, text: String) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
