use std::fmt::Write as _;

use anyhow::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use blockwish::classify::{easy_case_eligible, is_symmetric, ClassificationReport, ComponentKind};
use blockwish::partition::signature;
use blockwish::{AtomicMeasure, ExponentWord, MomentTable, MultiplicativityReport, Partition};

use crate::source::Resolved;
use crate::Format;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub partition: String,
    pub blocks: usize,
    pub even: bool,
    pub noncrossing: bool,
    /// Only defined on `P(2s,2s)`.
    pub symmetric: Option<bool>,
    /// Only defined on even partitions.
    pub signature: Option<i32>,
    /// Only defined on symmetric even partitions.
    pub eligible: Option<bool>,
}

impl PartitionRow {
    pub fn new(pi: &Partition) -> Self {
        let symmetric = is_symmetric(pi).ok();
        let even = pi.is_even();
        Self {
            partition: pi.to_string(),
            blocks: pi.block_count(),
            even,
            noncrossing: pi.is_noncrossing(),
            symmetric,
            signature: even.then(|| signature(pi).ok()).flatten(),
            eligible: (even && symmetric == Some(true)).then(|| easy_case_eligible(pi).ok().map(|r| r.verdict)).flatten(),
        }
    }
}

pub const PARTITION_CSV_HEADER: &str = "partition,blocks,even,noncrossing,symmetric,signature,eligible";

fn cell<T: ToString>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn partitions(rows: &[PartitionRow], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = format!("{PARTITION_CSV_HEADER}\n");
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.partition,
                    r.blocks,
                    r.even,
                    r.noncrossing,
                    cell(r.symmetric),
                    cell(r.signature),
                    cell(r.eligible)
                )?;
            }
            Ok(out)
        }
        Format::Pretty => {
            let mut out = String::new();
            for r in rows {
                let pi: Partition = r.partition.parse()?;
                let yes_no = |b: bool| if b { "yes" } else { "no" };
                write!(out, "{}  blocks {}  even {}  noncrossing {}", r.partition, r.blocks, yes_no(r.even), yes_no(r.noncrossing))?;
                if let Some(s) = r.symmetric {
                    write!(out, "  symmetric {}", yes_no(s))?;
                }
                if let Some(e) = r.signature {
                    write!(out, "  signature {e:+}")?;
                }
                if let Some(e) = r.eligible {
                    write!(out, "  eligible {}", yes_no(e))?;
                }
                writeln!(out, "\n{}\n", pi.picture())?;
            }
            writeln!(out, "{} partitions", rows.len())?;
            Ok(out)
        }
    }
}

pub fn classification(pi: &Partition, report: &ClassificationReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut out = String::from("kind,upper_legs,lower_legs,r,u,v,w\n");
            for c in &report.components {
                let legs = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
                let kind = match c.kind {
                    ComponentKind::SymmetricBlock => "symmetric-block",
                    ComponentKind::AsymmetricPair => "asymmetric-pair",
                };
                writeln!(out, "{kind},{},{},{},{},{},{}", legs(&c.upper_legs), legs(&c.lower_legs), c.r, c.u, c.v, c.w)?;
            }
            Ok(out)
        }
        Format::Pretty => Ok(format!("{}\n\n{}", pi.picture(), report.to_text())),
    }
}

fn header(resolved: &Resolved) -> String {
    let n = resolved.choi.inner_dim();
    match (&resolved.partition, resolved.base) {
        (Some(pi), Some(base)) => format!(
            "{}{pi} at N = {base}, n = {n}\n{}\n",
            if resolved.twisted { "twisted " } else { "" },
            pi.picture()
        ),
        _ => format!("map {} at n = {n}\n", resolved.label),
    }
}

#[derive(Serialize)]
struct MultiplicativityOutput<'a> {
    source: &'a str,
    twisted: bool,
    n: usize,
    report: &'a MultiplicativityReport,
}

pub fn multiplicativity(resolved: &Resolved, report: &MultiplicativityReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(&MultiplicativityOutput {
            source: &resolved.label,
            twisted: resolved.twisted,
            n: resolved.choi.inner_dim(),
            report,
        }),
        Format::Csv => {
            let mut out = String::from("p,word,sigma,left_re,left_im,right_re,right_im\n");
            for f in &report.failures {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    f.p, f.word, f.sigma, f.left.0.re, f.left.0.im, f.right.0.re, f.right.0.im
                )?;
            }
            Ok(out)
        }
        Format::Pretty => Ok(format!("{}\n{}", header(resolved), report.to_text())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompoundRoute {
    /// Moments of `mW̃` under the compound free Poisson law.
    pub moments: MomentTable,
    /// The base measure `mn·law(Λ)`.
    pub base: Option<AtomicMeasure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictOutput {
    pub source: String,
    pub twisted: bool,
    pub n: usize,
    pub m: usize,
    pub p_max: usize,
    /// Limit moments of `mW̃`.
    pub m_w_tilde: MomentTable,
    /// Limit moments of `W̃`.
    pub w_tilde: MomentTable,
    pub compound: Option<CompoundRoute>,
    pub note: Option<String>,
}

/// Nonempty words, shortest first.
fn by_length(table: &MomentTable) -> Vec<(&ExponentWord, Complex64)> {
    let mut entries: Vec<_> = table.iter().filter(|(w, _)| !w.is_empty()).collect();
    entries.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
    entries
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

pub fn prediction(resolved: &Resolved, output: &PredictOutput, format: Format) -> Result<String> {
    let compound = output.compound.as_ref().map(|c| &c.moments);
    match format {
        Format::Json => json(output),
        Format::Csv => {
            let mut out = String::from("normalization,word,re,im\n");
            let mut tables = vec![("m_w_tilde", &output.m_w_tilde), ("w_tilde", &output.w_tilde)];
            tables.extend(compound.map(|c| ("compound_m_w_tilde", c)));
            for (name, table) in tables {
                for (word, z) in by_length(table) {
                    writeln!(out, "{name},{word},{},{}", z.re, z.im)?;
                }
            }
            Ok(out)
        }
        Format::Pretty => {
            let mut out = header(resolved);
            writeln!(out, "m = {}, p_max = {}", output.m, output.p_max)?;
            let mut columns = vec!["word", "limit of m·W̃", "limit of W̃"];
            if compound.is_some() {
                columns.push("compound law of m·W̃");
            }
            let mut rows = vec![columns.iter().map(|c| c.to_string()).collect::<Vec<_>>()];
            for (word, z) in by_length(&output.m_w_tilde) {
                let mut row = vec![word.to_string(), complex(z), complex(output.w_tilde.get(word).unwrap_or_default())];
                if let Some(c) = compound {
                    row.push(c.get(word).map(complex).unwrap_or_default());
                }
                rows.push(row);
            }
            out.push_str(&table(&rows));
            if let Some(base) = output.compound.as_ref().and_then(|c| c.base.as_ref()) {
                writeln!(out, "base measure mn·law(Λ), weight,re,im:\n{}", base.to_text().trim_end())?;
            }
            if let Some(note) = &output.note {
                writeln!(out, "{note}")?;
            }
            Ok(out)
        }
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..columns).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> =
            row.iter().zip(&widths).map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count()))).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
