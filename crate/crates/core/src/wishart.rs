//! Monte Carlo sampling of block-modified complex Wishart matrices.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{apply_block_modification, CMatrix, LinearBlockMap};
use crate::moments::{pairwise_sum, ComplexValue, MomentTable};
use crate::word::{Exponent, ExponentWord};

/// Parameters of one simulation: `W = GG*/(dm)` with `G` of size `dn × dm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WishartConfig {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub p_max: usize,
    /// Explicit exponent words; all words up to `p_max` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<ExponentWord>>,
}

impl WishartConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d", self.d), ("n", self.n), ("m", self.m), ("trials", self.trials), ("p_max", self.p_max)] {
            if value == 0 {
                return Err(Error::Invalid(format!("{name} must be at least 1")));
            }
        }
        if let Some(words) = &self.words {
            if words.iter().any(ExponentWord::is_empty) {
                return Err(Error::Invalid("exponent words must be nonempty".into()));
            }
        }
        Ok(())
    }

    /// The requested words, shortest first.
    pub fn exponent_words(&self) -> Vec<ExponentWord> {
        match &self.words {
            Some(words) => words.clone(),
            None => ExponentWord::all_up_to(self.p_max).into_iter().skip(1).collect(),
        }
    }
}

/// Mean and standard error of one word's statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordStat {
    pub word: ExponentWord,
    pub mean: ComplexValue,
    pub standard_error: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub entries: Vec<WordStat>,
}

impl SampleStats {
    pub fn get(&self, word: &ExponentWord) -> Option<&WordStat> {
        self.entries.iter().find(|s| &s.word == word)
    }
}

/// The RNG stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Complex matrix stored as real and imaginary parts, so products run on real GEMM.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn from_complex(x: &CMatrix) -> Self {
        Self { re: x.map(|z| z.re), im: x.map(|z| z.im) }
    }

    pub fn to_complex(&self) -> CMatrix {
        self.re.zip_map(&self.im, Complex64::new)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { re: &self.re * &other.re - &self.im * &other.im, im: &self.re * &other.im + &self.im * &other.re }
    }

    pub fn adjoint(&self) -> Self {
        Self { re: self.re.transpose(), im: -self.im.transpose() }
    }

    /// `X X*`, computed with three real products and symmetrized so the result is
    /// Hermitian to the last bit.
    fn gram(&self) -> Self {
        let (a, b) = (&self.re, &self.im);
        let sum = a * a.transpose() + b * b.transpose();
        let re = (&sum + sum.transpose()) * 0.5;
        let cross = b * a.transpose();
        // B Aᵀ − A Bᵀ = cross − crossᵀ
        let im = &cross - cross.transpose();
        Self { re, im }
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.re.trace(), self.im.trace())
    }

    /// `tr(XY)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex64 {
        let n = self.re.nrows();
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.re[(i, j)], self.im[(i, j)]);
                let (c, d) = (other.re[(j, i)], other.im[(j, i)]);
                re += a * c - b * d;
                im += a * d + b * c;
            }
        }
        Complex64::new(re, im)
    }
}

fn ginibre_parts(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> SplitMatrix {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    let mut re = DMatrix::zeros(rows, cols);
    let mut im = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            re[(r, c)] = normal.sample(rng);
            im[(r, c)] = normal.sample(rng);
        }
    }
    SplitMatrix { re, im }
}

/// A `rows × cols` matrix of i.i.d. complex Gaussians with `E|g|² = 1`.
pub fn sample_ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    ginibre_parts(rows, cols, rng).to_complex()
}

fn wishart_parts(config: &WishartConfig, trial: usize) -> SplitMatrix {
    let mut rng = trial_rng(config.seed, trial as u64);
    let g = ginibre_parts(config.d * config.n, config.d * config.m, &mut rng);
    let mut w = g.gram();
    let scale = 1.0 / (config.d * config.m) as f64;
    w.re *= scale;
    w.im *= scale;
    w
}

/// `W = GG*/(dm)` for the given trial.
pub fn sample_wishart(config: &WishartConfig, trial: usize) -> Result<CMatrix> {
    config.validate()?;
    if trial >= config.trials {
        return Err(Error::Invalid(format!("trial {trial} is out of range for {} trials", config.trials)));
    }
    Ok(wishart_parts(config, trial).to_complex())
}

/// Normalized traces `tr(X^{e_1} ⋯ X^{e_p})` for each word.
///
/// Words up to length four reuse the products `X^a X^b`; longer words are multiplied out.
pub fn normalized_star_traces(x: &CMatrix, words: &[ExponentWord]) -> Result<Vec<Complex64>> {
    if !x.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", x.nrows(), x.ncols())));
    }
    let dim = x.nrows() as f64;
    let plain = SplitMatrix::from_complex(x);
    let star = plain.adjoint();
    let hermitian = plain == star;
    let letter = |e: Exponent| if e == Exponent::One || hermitian { &plain } else { &star };
    let needs_pairs = words.iter().any(|w| w.len() >= 3);
    let index = |a: Exponent, b: Exponent| (a == Exponent::Star) as usize * 2 + (b == Exponent::Star) as usize;
    let mut pairs: Vec<Option<SplitMatrix>> = vec![None, None, None, None];
    if needs_pairs {
        let square = plain.mul(&plain);
        if hermitian {
            pairs = vec![Some(square); 4];
        } else {
            pairs[0] = Some(square);
            for (a, b) in [(Exponent::One, Exponent::Star), (Exponent::Star, Exponent::One), (Exponent::Star, Exponent::Star)] {
                pairs[index(a, b)] = Some(letter(a).mul(letter(b)));
            }
        }
    }
    let pair = |a: Exponent, b: Exponent| pairs[index(a, b)].as_ref().expect("pairs were formed");
    words
        .iter()
        .map(|word| {
            let l = word.letters();
            let value = match l.len() {
                0 => return Ok(Complex64::new(1.0, 0.0)),
                1 => letter(l[0]).trace(),
                2 => letter(l[0]).trace_of_product(letter(l[1])),
                3 => letter(l[0]).trace_of_product(pair(l[1], l[2])),
                4 => pair(l[0], l[1]).trace_of_product(pair(l[2], l[3])),
                _ => {
                    let mut product = pair(l[0], l[1]).clone();
                    for &e in &l[2..l.len() - 1] {
                        product = product.mul(letter(e));
                    }
                    product.trace_of_product(letter(l[l.len() - 1]))
                }
            };
            Ok(value / dim)
        })
        .collect()
}

fn summarize(word: ExponentWord, samples: &[Complex64]) -> WordStat {
    let trials = samples.len();
    let mean = pairwise_sum(samples) / trials as f64;
    let standard_error = if trials < 2 {
        0.0
    } else {
        let deviations: Vec<Complex64> =
            samples.iter().map(|z| Complex64::new((z.re - mean.re).powi(2), (z.im - mean.im).powi(2))).collect();
        let variance = pairwise_sum(&deviations) / (trials - 1) as f64;
        variance.re.max(variance.im).sqrt() / (trials as f64).sqrt()
    };
    WordStat { word, mean: ComplexValue(mean), standard_error, trials }
}

/// Sample mean and standard error of `tr((rescale·W̃)^{e_1} ⋯)` over the trials, with
/// `W̃ = (id ⊗ φ)W`.
///
/// Trials run in parallel on independent streams and are reduced in trial order, so
/// the result does not depend on the number of worker threads.
pub fn empirical_star_moments(config: &WishartConfig, map: &LinearBlockMap, rescale: f64) -> Result<SampleStats> {
    config.validate()?;
    if map.inner_dim() != config.n {
        return Err(Error::Dimension { expected: config.n, found: map.inner_dim() });
    }
    let words = config.exponent_words();
    let per_trial: Vec<Vec<Complex64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let w = wishart_parts(config, trial).to_complex();
            let modified = apply_block_modification(&w, map, config.d, config.n)? * Complex64::new(rescale, 0.0);
            normalized_star_traces(&modified, &words)
        })
        .collect::<Result<_>>()?;
    let entries = words
        .into_iter()
        .enumerate()
        .map(|(k, word)| {
            let samples: Vec<Complex64> = per_trial.iter().map(|t| t[k]).collect();
            summarize(word, &samples)
        })
        .collect();
    Ok(SampleStats { entries })
}

/// One line of a convergence sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub d: usize,
    pub word: ExponentWord,
    pub mean: ComplexValue,
    pub standard_error: f64,
    pub exact: ComplexValue,
    pub gap: f64,
}

impl ConvergenceRow {
    /// `gap ≤ max(sigmas·SE, relative·|exact|)`.
    pub fn within(&self, sigmas: f64, relative: f64) -> bool {
        self.gap <= (sigmas * self.standard_error).max(relative * self.exact.0.norm())
    }
}

/// Gap trend of one word across the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTrend {
    pub word: ExponentWord,
    pub gaps: Vec<f64>,
    /// Final gap below the first one.
    pub shrinking: bool,
    /// Each gap no larger than its predecessor.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub trends: Vec<GapTrend>,
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str = "d,word,mean_re,mean_im,se,exact_re,exact_im,gap";

    /// Rows at the largest `d` of the sweep.
    pub fn final_rows(&self) -> impl Iterator<Item = &ConvergenceRow> {
        let last = self.rows.iter().map(|r| r.d).max().unwrap_or(0);
        self.rows.iter().filter(move |r| r.d == last)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.d, r.word, r.mean.0.re, r.mean.0.im, r.standard_error, r.exact.0.re, r.exact.0.im, r.gap
            )?;
        }
        Ok(())
    }

    /// Parse the layout written by [`ConvergenceReport::write_csv`] back into rows.
    pub fn read_csv_rows(text: &str) -> Result<Vec<ConvergenceRow>> {
        let mut lines = text.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err(Error::Invalid("missing convergence CSV header".into()));
        }
        lines
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 8 {
                    return Err(Error::Invalid(format!("expected 8 fields, got {line:?}")));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Invalid(format!("bad number {s:?}: {e}")));
                Ok(ConvergenceRow {
                    d: f[0].parse().map_err(|_| Error::Invalid(format!("bad d {:?}", f[0])))?,
                    word: f[1].parse()?,
                    mean: ComplexValue(Complex64::new(num(f[2])?, num(f[3])?)),
                    standard_error: num(f[4])?,
                    exact: ComplexValue(Complex64::new(num(f[5])?, num(f[6])?)),
                    gap: num(f[7])?,
                })
            })
            .collect()
    }
}

/// Run [`empirical_star_moments`] at each `d` of the sweep, other fields taken from
/// `base`, and compare with the exact limit.
pub fn convergence_report(
    base: &WishartConfig,
    sweep: &[usize],
    map: &LinearBlockMap,
    rescale: f64,
    exact: &MomentTable,
) -> Result<ConvergenceReport> {
    if sweep.is_empty() {
        return Err(Error::Invalid("the d sweep is empty".into()));
    }
    let words = base.exponent_words();
    for word in &words {
        if exact.get(word).is_none() {
            return Err(Error::Invalid(format!("exact limit has no entry for {word}")));
        }
    }
    let mut rows = Vec::new();
    for &d in sweep {
        let config = WishartConfig { d, ..base.clone() };
        let stats = empirical_star_moments(&config, map, rescale)?;
        for stat in stats.entries {
            let target = exact.get(&stat.word).expect("checked above");
            rows.push(ConvergenceRow {
                d,
                gap: (stat.mean.0 - target).norm(),
                word: stat.word,
                mean: stat.mean,
                standard_error: stat.standard_error,
                exact: ComplexValue(target),
            });
        }
    }
    let trends = words
        .into_iter()
        .map(|word| {
            let gaps: Vec<f64> = sweep
                .iter()
                .map(|&d| rows.iter().find(|r| r.d == d && r.word == word).expect("row exists").gap)
                .collect();
            let shrinking = gaps.last() < gaps.first();
            let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
            GapTrend { word, gaps, shrinking, monotone }
        })
        .collect();
    Ok(ConvergenceReport { rows, trends })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::builtin_map;
    use crate::moments::trace_star_moment;

    fn config(d: usize, n: usize, m: usize, trials: usize) -> WishartConfig {
        WishartConfig { d, n, m, trials, seed: 7, p_max: 4, words: None }
    }

    #[test]
    fn ginibre_moments() {
        let mut rng = trial_rng(1, 0);
        let g = sample_ginibre(200, 500, &mut rng);
        let count = (g.nrows() * g.ncols()) as f64;
        let power: f64 = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / count;
        let mean: Complex64 = g.iter().sum::<Complex64>() / count;
        assert!((power - 1.0).abs() < 0.02);
        assert!(mean.norm() < 0.02);
        let again = sample_ginibre(200, 500, &mut trial_rng(1, 0));
        assert_eq!(g, again);
    }

    #[test]
    fn wishart_is_hermitian() {
        let cfg = config(20, 2, 3, 2);
        let w = sample_wishart(&cfg, 1).unwrap();
        assert_eq!(w, w.adjoint());
        let eig = nalgebra::linalg::SymmetricEigen::new(w).eigenvalues;
        assert!(eig.iter().all(|&x| x >= -1e-10));
        let scalar = sample_wishart(&config(1, 1, 1, 1), 0).unwrap();
        assert!(scalar[(0, 0)].re >= 0.0 && scalar[(0, 0)].im == 0.0);
        assert!(sample_wishart(&cfg, 2).is_err());
    }

    #[test]
    fn traces_match_direct_products() {
        let mut rng = trial_rng(3, 0);
        let x = sample_ginibre(6, 6, &mut rng);
        let words = ExponentWord::all_up_to(5);
        let fast = normalized_star_traces(&x, &words).unwrap();
        for (word, value) in words.iter().zip(fast) {
            let direct = trace_star_moment(&x, word).unwrap();
            assert!((value - direct).norm() < 1e-10, "{word}");
        }
    }

    #[test]
    fn single_trial_has_zero_error() {
        let stats = empirical_star_moments(&config(1, 1, 1, 1), &builtin_map("identity", 1).unwrap(), 1.0).unwrap();
        assert!(stats.entries.iter().all(|s| s.standard_error == 0.0 && s.trials == 1));
    }

    #[test]
    fn statistics_do_not_depend_on_thread_count() {
        let cfg = config(5, 2, 2, 6);
        let map = builtin_map("bessel", 2).unwrap();
        let a = empirical_star_moments(&cfg, &map, 2.0).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| empirical_star_moments(&cfg, &map, 2.0).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = empirical_star_moments(&config(2, 2, 1, 1), &builtin_map("identity", 3).unwrap(), 1.0).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 2, found: 3 });
    }

    #[test]
    fn csv_round_trip() {
        let cfg = WishartConfig { words: Some(vec!["1".parse().unwrap(), "1*".parse().unwrap()]), ..config(3, 2, 1, 3) };
        let mut exact = MomentTable::new(2);
        exact.insert("1".parse().unwrap(), Complex64::new(1.0, 0.0)).unwrap();
        exact.insert("1*".parse().unwrap(), Complex64::new(2.0, 0.0)).unwrap();
        let report = convergence_report(&cfg, &[2, 3], &builtin_map("transpose", 2).unwrap(), 1.0, &exact).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let rows = ConvergenceReport::read_csv_rows(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(rows, report.rows);
        assert_eq!(report.trends.len(), 2);
    }
}
