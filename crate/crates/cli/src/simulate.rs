use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use blockwish::free_poisson::{asymptotic_limit, compound_from_choi, compound_moments, free_bessel};
use blockwish::maps::BuiltinMap;
use blockwish::wishart::{convergence_report, ConvergenceReport, WishartConfig};
use blockwish::{ExponentWord, MomentTable};

use crate::render::table;
use crate::source::{Resolved, SourceArgs};
use crate::{Format, OUT_DIR_ENV};

const SIGMAS: f64 = 3.0;
const RELATIVE: f64 = 0.05;
const MISMATCH_SIGMAS: f64 = 5.0;

#[derive(Args)]
pub struct SimulateArgs {
    /// TOML file with the same keys as the flags below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    m: Option<usize>,
    /// Matrix sizes of the sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "pmax")]
    p_max: Option<usize>,
    /// Exponent words such as `11` or `1*1*`, comma separated; all words up to pmax by default.
    #[arg(long, value_delimiter = ',')]
    words: Vec<String>,
    /// Multiply W̃ by this factor before taking moments; defaults to m.
    #[arg(long)]
    rescale: Option<f64>,
    /// Directory for the CSV and JSON artifacts; defaults to $BLOCKWISH_OUT_DIR, then `.`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Artifact file stem.
    #[arg(long)]
    name: Option<String>,
    /// Exit 1 unless every word at the largest d is within max(3 SE, 5%) of the exact limit.
    #[arg(long)]
    assert: bool,
    /// Exit 1 unless the exact limit holds while the compound free Poisson prediction stays at least 5 SE away.
    #[arg(long)]
    assert_mismatch: bool,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

/// Keys accepted in a simulation config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub pi: Option<String>,
    pub map: Option<String>,
    #[serde(rename = "N")]
    pub base: Option<usize>,
    pub n: Option<usize>,
    pub twisted: Option<bool>,
    pub m: Option<usize>,
    /// A single size, or the sweep.
    pub d: Option<SizeSweep>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub p_max: Option<usize>,
    pub words: Option<Vec<String>>,
    pub rescale: Option<f64>,
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSweep {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Serialize)]
struct MismatchRow {
    word: ExponentWord,
    compound: Complex64,
    sigmas_from_compound: f64,
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    source: &'a str,
    twisted: bool,
    config: &'a WishartConfig,
    sweep: &'a [usize],
    rescale: f64,
    report: &'a ConvergenceReport,
    within_thresholds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<Vec<MismatchRow>>,
}

pub fn run(args: SimulateArgs) -> Result<ExitCode> {
    let file: SimulationFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SimulationFile::default(),
    };
    let mut source = args.source.clone();
    if source.pi.is_none() && source.map.is_none() {
        source.pi = file.pi.clone();
        source.map = file.map.clone();
    }
    source.base = source.base.or(file.base);
    source.inner = source.inner.or(file.n);
    source.twisted |= file.twisted.unwrap_or(false);
    let resolved = source.resolve()?;

    let n = resolved.choi.inner_dim();
    let m = args.m.or(file.m).unwrap_or(1);
    let sweep = if !args.d.is_empty() {
        args.d.clone()
    } else {
        match &file.d {
            Some(SizeSweep::One(d)) => vec![*d],
            Some(SizeSweep::Many(ds)) => ds.clone(),
            None => vec![100],
        }
    };
    let word_texts = if args.words.is_empty() { file.words.clone().unwrap_or_default() } else { args.words.clone() };
    let words = if word_texts.is_empty() {
        None
    } else {
        Some(word_texts.iter().map(|w| w.parse::<ExponentWord>()).collect::<Result<Vec<_>, _>>()?)
    };
    let p_max = match &words {
        Some(ws) => ws.iter().map(ExponentWord::len).max().unwrap_or(1),
        None => args.p_max.or(file.p_max).unwrap_or(4),
    };
    let config = WishartConfig {
        d: *sweep.first().context("the d sweep is empty")?,
        n,
        m,
        trials: args.trials.or(file.trials).unwrap_or(200),
        seed: args.seed.or(file.seed).unwrap_or(0),
        p_max,
        words,
    };
    config.validate()?;
    let rescale = args.rescale.or(file.rescale).unwrap_or(m as f64);
    let exact = asymptotic_limit(&resolved.choi, m, p_max)?.rescaled(rescale / m as f64);
    let report = convergence_report(&config, &sweep, &resolved.map, rescale, &exact)?;
    let within = report.final_rows().all(|r| r.within(SIGMAS, RELATIVE));

    let mismatch = if args.assert_mismatch {
        let reference = compound_reference(&resolved, m, p_max, rescale)?;
        let rows = report
            .final_rows()
            .filter_map(|r| {
                let value = reference.get(&r.word)?;
                let separated = (r.exact.0 - value).norm() > 1e-9 * r.exact.0.norm().max(1.0);
                separated.then(|| MismatchRow {
                    word: r.word.clone(),
                    compound: value,
                    sigmas_from_compound: (r.mean.0 - value).norm() / r.standard_error,
                })
            })
            .collect::<Vec<_>>();
        Some(rows)
    } else {
        None
    };

    let name = args.name.clone().or(file.name.clone()).unwrap_or_else(|| "convergence".to_string());
    let dir = match &args.out_dir {
        Some(dir) => dir.clone(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let output = SimulationOutput {
        source: &resolved.label,
        twisted: resolved.twisted,
        config: &config,
        sweep: &sweep,
        rescale,
        report: &report,
        within_thresholds: within,
        mismatch,
    };
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let csv = String::from_utf8(csv)?;
    let json = serde_json::to_string_pretty(&output)? + "\n";
    for (ext, body) in [("csv", &csv), ("json", &json)] {
        let path = dir.join(format!("{name}.{ext}"));
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }

    match args.format {
        Format::Csv => print!("{csv}"),
        Format::Json => print!("{json}"),
        Format::Pretty => print!("{}", pretty(&output)?),
    }

    let mut failed = Vec::new();
    if args.assert && !within {
        failed.push("some word at the largest d is outside max(3 SE, 5%) of the exact limit".to_string());
    }
    if let Some(rows) = &output.mismatch {
        if !within {
            failed.push("the exact limit does not hold within max(3 SE, 5%)".to_string());
        }
        if rows.is_empty() {
            failed.push("no requested word separates the exact limit from the compound-law value".to_string());
        }
        for r in rows.iter().filter(|r| r.sigmas_from_compound < MISMATCH_SIGMAS) {
            failed.push(format!("{} is only {:.1} SE from the compound-law value", r.word, r.sigmas_from_compound));
        }
    }
    for f in &failed {
        eprintln!("assertion failed: {f}");
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// The compound free Poisson prediction that `--assert-mismatch` tests against:
/// `(m/n)·β^r_{n/m}` for a Bessel map of order `r`, the compound law of `Λ` otherwise.
fn compound_reference(resolved: &Resolved, m: usize, p_max: usize, rescale: f64) -> Result<MomentTable> {
    let n = resolved.choi.inner_dim();
    let bessel = match resolved.partition {
        None => match resolved.label.parse::<BuiltinMap>()? {
            BuiltinMap::Bessel { order } => Some(order.unwrap_or(n)),
            _ => None,
        },
        Some(_) => None,
    };
    let Some(r) = bessel else {
        return Ok(compound_from_choi(&resolved.choi, m, p_max)?.rescaled(rescale / m as f64));
    };
    let law = compound_moments(&free_bessel(r, n as f64 / m as f64)?, p_max)?;
    let mut table = MomentTable::new(p_max);
    for (word, z) in law.iter().filter(|(w, _)| !w.is_empty()) {
        table.insert(word.clone(), z * (m as f64 / n as f64) * rescale.powi(word.len() as i32))?;
    }
    Ok(table)
}

fn pretty(output: &SimulationOutput) -> Result<String> {
    let c = output.config;
    let mut out = format!(
        "{}{} n = {} m = {} trials = {} seed = {} rescale = {}\n",
        if output.twisted { "twisted " } else { "" },
        output.source,
        c.n,
        c.m,
        c.trials,
        c.seed,
        output.rescale
    );
    let mut rows = vec![["d", "word", "mean", "se", "exact", "gap", "ok"].map(String::from).to_vec()];
    for r in &output.report.rows {
        rows.push(vec![
            r.d.to_string(),
            r.word.to_string(),
            format!("{:.6}{:+.6}i", r.mean.0.re, r.mean.0.im),
            format!("{:.6}", r.standard_error),
            format!("{}{:+}i", r.exact.0.re, r.exact.0.im),
            format!("{:.6}", r.gap),
            if r.within(SIGMAS, RELATIVE) { "yes" } else { "no" }.to_string(),
        ]);
    }
    out.push_str(&table(&rows));
    for t in &output.report.trends {
        writeln!(out, "trend {}: shrinking {} monotone {}", t.word, t.shrinking, t.monotone)?;
    }
    if let Some(rows) = &output.mismatch {
        for r in rows {
            writeln!(out, "compound-law value for {}: {} ({:.1} SE away)", r.word, r.compound, r.sigmas_from_compound)?;
        }
    }
    Ok(out)
}
