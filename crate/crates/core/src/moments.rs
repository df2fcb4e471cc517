//! Plain and generalized *-moments of Choi matrices, and the multiplicativity test.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_poisson::AtomicMeasure;
use crate::maps::{CMatrix, ChoiMatrix};
use crate::partition::{enumerate_noncrossing, Partition, Permutation};
use crate::word::{Exponent, ExponentWord};

/// Default cap on the number of index tuples `n^{2p}` a brute-force moment may visit.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// Orders whose brute-force cross-check in [`law_moments`] stays below this many terms.
const CROSS_CHECK_BUDGET: u128 = 20_000_000;

/// Tolerance for floating comparisons of moments.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Complex value serialized as the text `re,im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ComplexValue(pub Complex64);

impl From<ComplexValue> for String {
    fn from(value: ComplexValue) -> Self {
        format!("{},{}", value.0.re, value.0.im)
    }
}

impl TryFrom<String> for ComplexValue {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        parse_complex(&text).map(ComplexValue)
    }
}

/// Parse `re,im` (or a bare real number).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = |e: std::num::ParseFloatError| Error::Invalid(format!("bad complex value {text:?}: {e}"));
    match text.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(re.trim().parse().map_err(bad)?, im.trim().parse().map_err(bad)?)),
        None => Ok(Complex64::new(text.trim().parse().map_err(bad)?, 0.0)),
    }
}

/// Moments keyed by exponent word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    order: usize,
    entries: BTreeMap<ExponentWord, ComplexValue>,
}

impl MomentTable {
    /// A table of the given order holding only the empty word `↦ 1`.
    pub fn new(order: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(ExponentWord::empty(), ComplexValue(Complex64::new(1.0, 0.0)));
        Self { order, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn insert(&mut self, word: ExponentWord, value: Complex64) -> Result<()> {
        if word.len() > self.order {
            return Err(Error::Invalid(format!("word {word} is longer than the table order {}", self.order)));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Invalid(format!("moment for {word} is not finite")));
        }
        self.entries.insert(word, ComplexValue(value));
        Ok(())
    }

    pub fn get(&self, word: &ExponentWord) -> Option<Complex64> {
        self.entries.get(word).map(|v| v.0)
    }

    /// The plain moment `M_p`.
    pub fn plain(&self, p: usize) -> Option<Complex64> {
        self.get(&ExponentWord::plain(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExponentWord, Complex64)> {
        self.entries.iter().map(|(w, v)| (w, v.0))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `|a - b|` over words present in both tables.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.iter()
            .filter_map(|(w, a)| other.get(w).map(|b| (a - b).norm()))
            .fold(0.0, f64::max)
    }

    /// Entrywise comparison with tolerance scaled by `max(1, |value|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self.iter().all(|(w, a)| other.get(w).is_some_and(|b| (a - b).norm() <= tol * a.norm().max(1.0)))
    }

    /// Every entry multiplied by `factor^{|word|}`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(w, v)| (w.clone(), ComplexValue(v.0 * factor.powi(w.len() as i32))))
            .collect();
        Self { order: self.order, entries }
    }

    /// Structured text: one `word = re,im` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = format!("order = {}\n", self.order);
        for (w, v) in self.iter() {
            out.push_str(&format!("{w} = {},{}\n", v.re, v.im));
        }
        out
    }

    /// Inverse of [`MomentTable::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut order = None;
        let mut entries = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Invalid(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "order" {
                order = Some(value.parse().map_err(|_| Error::Invalid(format!("bad order {value:?}")))?);
            } else {
                entries.insert(key.parse::<ExponentWord>()?, ComplexValue(parse_complex(value)?));
            }
        }
        let order = order.ok_or_else(|| Error::Invalid("missing order line".into()))?;
        Ok(Self { order, entries })
    }
}

impl fmt::Display for MomentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Normalized trace of `X^{e_1} ⋯ X^{e_p}`; the empty word gives 1.
pub fn trace_star_moment(x: &CMatrix, word: &ExponentWord) -> Result<Complex64> {
    if !x.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", x.nrows(), x.ncols())));
    }
    if word.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let adjoint = x.adjoint();
    let pick = |e: Exponent| if e == Exponent::One { x } else { &adjoint };
    let mut product = pick(word.letters()[0]).clone();
    for &e in &word.letters()[1..] {
        product = &product * pick(e);
    }
    Ok(product.trace() / x.nrows() as f64)
}

/// Sum a slice in a fixed binary tree order.
pub(crate) fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        len => pairwise_sum(&values[..len / 2]) + pairwise_sum(&values[len / 2..]),
    }
}

/// The brute-force index sum behind `(M_σ^e ⊗ M_τ^e)(Λ)`, before normalization:
/// `Σ_{i,j} Π_x Λ^{e_x}_{i_x j_x, i_σ(x) j_τ(x)}`.
///
/// Integer-entry inputs produce exact integer sums. The work is split over the
/// first two indices and reduced pairwise in a fixed order, so the result does not
/// depend on the number of worker threads.
pub fn generalized_star_moment_raw(
    choi: &ChoiMatrix,
    sigma: &Permutation,
    tau: &Permutation,
    word: &ExponentWord,
    budget: u128,
) -> Result<Complex64> {
    let p = word.len();
    if sigma.size() != p || tau.size() != p {
        return Err(Error::Dimension { expected: p, found: if sigma.size() != p { sigma.size() } else { tau.size() } });
    }
    if p == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let n = choi.inner_dim();
    let terms = (n as u128).checked_pow(2 * p as u32).unwrap_or(u128::MAX);
    if terms > budget {
        return Err(Error::Budget { terms, budget });
    }
    let dim = n * n;
    let flat = |m: &CMatrix| -> Vec<Complex64> { (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect() };
    let plain = flat(choi.entries());
    let star = if word.letters().contains(&Exponent::Star) { flat(&choi.entries().adjoint()) } else { Vec::new() };
    let factors: Vec<&[Complex64]> =
        word.letters().iter().map(|&e| if e == Exponent::One { plain.as_slice() } else { star.as_slice() }).collect();

    // Variables 2x and 2x+1 are i_x and j_x; factor x fires once its last variable is set.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); 2 * p];
    for x in 0..p {
        let last = [2 * x, 2 * x + 1, 2 * sigma.apply(x), 2 * tau.apply(x) + 1].into_iter().max().unwrap();
        ready[last].push(x);
    }
    let search = Search { n, dim, sigma: sigma.images(), tau: tau.images(), factors, ready };
    let partials: Vec<Complex64> = (0..dim)
        .into_par_iter()
        .map(|seed| {
            let mut values = vec![0usize; 2 * p];
            values[0] = seed / n;
            values[1] = seed % n;
            let weight = search.fire(0, &values).and_then(|w0| search.fire(1, &values).map(|w1| w0 * w1));
            match weight {
                Some(w) => search.descend(2, w, &mut values),
                None => Complex64::new(0.0, 0.0),
            }
        })
        .collect();
    Ok(pairwise_sum(&partials))
}

struct Search<'a> {
    n: usize,
    dim: usize,
    sigma: &'a [usize],
    tau: &'a [usize],
    factors: Vec<&'a [Complex64]>,
    ready: Vec<Vec<usize>>,
}

impl Search<'_> {
    /// Product of the factors completed by variable `v`, or `None` when it vanishes.
    fn fire(&self, v: usize, values: &[usize]) -> Option<Complex64> {
        let mut w = Complex64::new(1.0, 0.0);
        for &x in &self.ready[v] {
            let row = values[2 * x] * self.n + values[2 * x + 1];
            let col = values[2 * self.sigma[x]] * self.n + values[2 * self.tau[x] + 1];
            let entry = self.factors[x][row * self.dim + col];
            if entry == Complex64::new(0.0, 0.0) {
                return None;
            }
            w *= entry;
        }
        Some(w)
    }

    fn descend(&self, v: usize, weight: Complex64, values: &mut [usize]) -> Complex64 {
        if v == values.len() {
            return weight;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for value in 0..self.n {
            values[v] = value;
            if let Some(w) = self.fire(v, values) {
                total += self.descend(v + 1, weight * w, values);
            }
        }
        total
    }
}

/// `(M_σ^e ⊗ M_τ^e)(Λ)` with the default budget.
pub fn generalized_star_moment(
    choi: &ChoiMatrix,
    sigma: &Permutation,
    tau: &Permutation,
    word: &ExponentWord,
) -> Result<Complex64> {
    let raw = generalized_star_moment_raw(choi, sigma, tau, word, DEFAULT_BUDGET)?;
    Ok(raw / normalization(choi.inner_dim(), sigma, tau))
}

/// `n^{|σ| + |τ|}`.
pub(crate) fn normalization(n: usize, sigma: &Permutation, tau: &Permutation) -> f64 {
    (n as f64).powi((sigma.cycle_count() + tau.cycle_count()) as i32)
}

/// One violation of the multiplicativity identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityFailure {
    pub p: usize,
    pub word: ExponentWord,
    #[serde(with = "partition_literal")]
    pub sigma: Partition,
    /// `(M_σ^e ⊗ M_γ^e)(Λ)`.
    pub left: ComplexValue,
    /// `(M_σ^e ⊗ M_σ^e)(Λ)`.
    pub right: ComplexValue,
}

/// Outcome of [`is_multiplicative`]; the check is truncated at `p_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityReport {
    pub p_max: usize,
    pub verdict: bool,
    pub checked: usize,
    pub failures: Vec<MultiplicativityFailure>,
}

impl MultiplicativityReport {
    pub fn first_failure(&self) -> Option<&MultiplicativityFailure> {
        self.failures.first()
    }

    /// Structured text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "p_max = {}\nverdict = {}\nchecked = {}\nfailures = {}\n",
            self.p_max,
            if self.verdict { "pass" } else { "fail" },
            self.checked,
            self.failures.len()
        );
        for f in &self.failures {
            out.push_str(&format!(
                "failure p={} word={} sigma={} left={},{} right={},{}\n",
                f.p, f.word, f.sigma, f.left.0.re, f.left.0.im, f.right.0.re, f.right.0.im
            ));
        }
        out
    }
}

pub(crate) mod partition_literal {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::partition::Partition;

    pub fn serialize<S: Serializer>(pi: &Partition, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&pi.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Partition, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Compare `raw_left / n^{|σ|+1}` with `raw_right / n^{2|σ|}`, exactly when both raw sums
/// are exact integers.
fn multiplicative_pair_agrees(raw_left: Complex64, raw_right: Complex64, n: usize, blocks: usize, exact: bool, tol: f64) -> bool {
    let scale = (n as f64).powi(blocks as i32 - 1);
    let lifted = raw_left * scale;
    let limit = 2f64.powi(53);
    if exact && lifted.norm() < limit && raw_right.norm() < limit {
        return lifted == raw_right;
    }
    let left = raw_left / (n as f64).powi(blocks as i32 + 1);
    let right = raw_right / (n as f64).powi(2 * blocks as i32);
    (left - right).norm() <= tol * left.norm().max(right.norm()).max(1.0)
}

/// Check `(M_σ^e ⊗ M_γ^e)(Λ) = (M_σ^e ⊗ M_σ^e)(Λ)` for all `p ≤ p_max`, all words, and all
/// `σ ∈ NC_p`.
pub fn is_multiplicative(choi: &ChoiMatrix, p_max: usize, tol: f64) -> Result<MultiplicativityReport> {
    is_multiplicative_with_budget(choi, p_max, tol, DEFAULT_BUDGET)
}

pub fn is_multiplicative_with_budget(choi: &ChoiMatrix, p_max: usize, tol: f64, budget: u128) -> Result<MultiplicativityReport> {
    if p_max == 0 {
        return Err(Error::Invalid("p_max must be at least 1".into()));
    }
    let n = choi.inner_dim();
    let exact = choi.is_integral();
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in 1..=p_max {
        let gamma = Permutation::standard_cycle(p);
        for sigma_part in enumerate_noncrossing(p)? {
            let sigma = Permutation::from_noncrossing(&sigma_part)?;
            for word in ExponentWord::all_of_length(p) {
                let raw_left = generalized_star_moment_raw(choi, &sigma, &gamma, &word, budget)?;
                let raw_right = generalized_star_moment_raw(choi, &sigma, &sigma, &word, budget)?;
                checked += 1;
                let blocks = sigma.cycle_count();
                if !multiplicative_pair_agrees(raw_left, raw_right, n, blocks, exact, tol) {
                    failures.push(MultiplicativityFailure {
                        p,
                        word,
                        sigma: sigma_part.clone(),
                        left: ComplexValue(raw_left / (n as f64).powi(blocks as i32 + 1)),
                        right: ComplexValue(raw_right / (n as f64).powi(2 * blocks as i32)),
                    });
                }
            }
        }
    }
    Ok(MultiplicativityReport { p_max, verdict: failures.is_empty(), checked, failures })
}

/// The *-moments `M^e(Λ) = tr(Λ^{e_1} ⋯ Λ^{e_p})` for all words up to `p_max`.
///
/// Each value is cross-checked against `(M_γ^e ⊗ M_γ^e)(Λ)` when the brute-force sum is
/// small enough; a disagreement is reported as [`Error::Inconsistent`].
pub fn law_moments(choi: &ChoiMatrix, p_max: usize) -> Result<MomentTable> {
    let n = choi.inner_dim();
    let mut table = MomentTable::new(p_max);
    for p in 1..=p_max {
        let gamma = Permutation::standard_cycle(p);
        let check = (n as u128).checked_pow(2 * p as u32).is_some_and(|t| t <= CROSS_CHECK_BUDGET);
        for word in ExponentWord::all_of_length(p) {
            let value = trace_star_moment(choi.entries(), &word)?;
            if check {
                let brute = generalized_star_moment(choi, &gamma, &gamma, &word)?;
                if (brute - value).norm() > DEFAULT_TOLERANCE * value.norm().max(1.0) {
                    return Err(Error::Inconsistent(format!("law moment {word}: trace {value} vs index sum {brute}")));
                }
            }
            table.insert(word, value)?;
        }
    }
    Ok(table)
}

/// Eigenvalue distribution of a self-adjoint `Λ` as atoms with weights `multiplicity / n²`.
/// Eigenvalues closer than `tol` are merged.
pub fn spectral_atoms(choi: &ChoiMatrix, tol: f64) -> Result<AtomicMeasure> {
    let deviation = choi.self_adjoint_deviation();
    if deviation > tol {
        return Err(Error::NotSelfAdjoint(deviation));
    }
    let hermitian = (choi.entries() + choi.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let mut eigen: Vec<f64> = SymmetricEigen::new(hermitian).eigenvalues.iter().copied().collect();
    eigen.sort_by(f64::total_cmp);
    let total = eigen.len() as f64;
    let mut atoms: Vec<(f64, Complex64)> = Vec::new();
    let mut start = 0;
    while start < eigen.len() {
        let mut end = start + 1;
        while end < eigen.len() && eigen[end] - eigen[end - 1] <= tol.max(1e-9) {
            end += 1;
        }
        let cluster = &eigen[start..end];
        let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
        // snap to the nearest integer when the cluster sits on one
        let location = if (mean - mean.round()).abs() <= tol.max(1e-9) { mean.round() } else { mean };
        atoms.push((cluster.len() as f64 / total, Complex64::new(location, 0.0)));
        start = end;
    }
    AtomicMeasure::new(atoms)
}
