//! Compound free Poisson laws and the limit formulas for block-modified Wishart matrices.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::ChoiMatrix;
use crate::moments::{generalized_star_moment, parse_complex, MomentTable};
use crate::partition::{enumerate_noncrossing, Partition, Permutation};
use crate::word::{Exponent, ExponentWord};

/// Finitely many atoms `Σ c_i δ_{z_i}` with positive weights and distinct locations,
/// kept sorted by location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, Complex64)>", into = "Vec<(f64, Complex64)>")]
pub struct AtomicMeasure {
    atoms: Vec<(f64, Complex64)>,
}

impl AtomicMeasure {
    pub fn new(mut atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        for &(c, z) in &atoms {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Invalid(format!("atom weight {c} is not positive")));
            }
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Invalid(format!("atom location {z} is not finite")));
            }
        }
        for atom in &mut atoms {
            // -0.0 becomes 0.0
            atom.1 = Complex64::new(atom.1.re + 0.0, atom.1.im + 0.0);
        }
        atoms.sort_by(|a, b| a.1.re.total_cmp(&b.1.re).then(a.1.im.total_cmp(&b.1.im)));
        if atoms.windows(2).any(|w| w[0].1 == w[1].1) {
            return Err(Error::Invalid("atom locations must be distinct".into()));
        }
        Ok(Self { atoms })
    }

    /// `c·δ_z`.
    pub fn dirac(weight: f64, location: Complex64) -> Result<Self> {
        Self::new(vec![(weight, location)])
    }

    /// Uniform probability measure on the `n`-th roots of unity.
    pub fn roots_of_unity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        let atoms = (0..n).map(|k| (1.0 / n as f64, root_of_unity(k, n))).collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, Complex64)] {
        &self.atoms
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).sum()
    }

    /// `t·μ`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(c, z)| (c * t, z)).collect())
    }

    /// `Σ_i c_i Π_x z_i^{e_x}` with `z^* = conj(z)`.
    pub fn star_moment(&self, word: &ExponentWord) -> Complex64 {
        self.atoms
            .iter()
            .map(|&(c, z)| {
                word.letters()
                    .iter()
                    .fold(Complex64::new(c, 0.0), |acc, &e| acc * if e == Exponent::One { z } else { z.conj() })
            })
            .sum()
    }

    /// Structured text: one `weight,re,im` line per atom.
    pub fn to_text(&self) -> String {
        self.atoms.iter().map(|(c, z)| format!("{c},{},{}\n", z.re, z.im)).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (weight, location) =
                line.split_once(',').ok_or_else(|| Error::Invalid(format!("expected `weight,re,im`, got {line:?}")))?;
            let weight = weight.trim().parse().map_err(|_| Error::Invalid(format!("bad weight in {line:?}")))?;
            atoms.push((weight, parse_complex(location)?));
        }
        Self::new(atoms)
    }
}

impl TryFrom<Vec<(f64, Complex64)>> for AtomicMeasure {
    type Error = Error;

    fn try_from(atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<AtomicMeasure> for Vec<(f64, Complex64)> {
    fn from(measure: AtomicMeasure) -> Self {
        measure.atoms
    }
}

impl fmt::Display for AtomicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn root_of_unity(k: usize, n: usize) -> Complex64 {
    // exact values at the quarter turns keep integer-valued moments exact
    if (4 * k).is_multiple_of(n) {
        let quarter = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][(4 * k / n) % 4];
        return Complex64::new(quarter.0, quarter.1);
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % n) as f64 / n as f64)
}

/// `Σ c_i δ_{z_i}` for the measure `μ` of `π_μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompoundFreePoissonLaw {
    pub base: AtomicMeasure,
}

impl CompoundFreePoissonLaw {
    pub fn new(base: AtomicMeasure) -> Result<Self> {
        if base.mass() <= 0.0 {
            return Err(Error::Invalid("base measure has no mass".into()));
        }
        Ok(Self { base })
    }
}

/// `Σ_i c_i Π_x z_i^{e_x}`.
pub fn measure_star_moment(mu: &AtomicMeasure, word: &ExponentWord) -> Complex64 {
    mu.star_moment(word)
}

/// Moments of `π_μ` by summing products of cumulants over `NC_p`; the free cumulants
/// are the *-moments of `μ` on each block's subword.
pub fn compound_moments(law: &CompoundFreePoissonLaw, p_max: usize) -> Result<MomentTable> {
    let mut table = MomentTable::new(p_max);
    for p in 1..=p_max {
        let partitions = enumerate_noncrossing(p)?;
        for word in ExponentWord::all_of_length(p) {
            let value = partitions
                .iter()
                .map(|sigma| {
                    sigma.blocks().iter().map(|block| law.base.star_moment(&word.restrict(block))).product::<Complex64>()
                })
                .sum();
            table.insert(word, value)?;
        }
    }
    Ok(table)
}

fn check_parameters(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Invalid(format!("parameters m = {m}, n = {n} must be positive")));
    }
    Ok(())
}

/// `Σ_{σ∈NC_p} (mn)^{|σ|} (M_σ^e ⊗ M_τ(σ)^e)(Λ)` for every word up to `p_max`.
fn noncrossing_sum(
    choi: &ChoiMatrix,
    m: usize,
    p_max: usize,
    second: impl Fn(&Permutation, usize) -> Permutation,
) -> Result<MomentTable> {
    let n = choi.inner_dim();
    check_parameters(m, n)?;
    let mn = (m * n) as f64;
    let mut table = MomentTable::new(p_max);
    for p in 1..=p_max {
        let sigmas: Vec<Permutation> =
            enumerate_noncrossing(p)?.iter().map(Permutation::from_noncrossing).collect::<Result<_>>()?;
        for word in ExponentWord::all_of_length(p) {
            let mut value = Complex64::new(0.0, 0.0);
            for sigma in &sigmas {
                let tau = second(sigma, p);
                value += generalized_star_moment(choi, sigma, &tau, &word)? * mn.powi(sigma.cycle_count() as i32);
            }
            table.insert(word, value)?;
        }
    }
    Ok(table)
}

/// `M_p^e(π_{mnρ}) = Σ_{σ∈NC_p} (mn)^{|σ|} (M_σ^e ⊗ M_σ^e)(Λ)`, with `n` the inner
/// dimension of `Λ`.
pub fn compound_from_choi(choi: &ChoiMatrix, m: usize, p_max: usize) -> Result<MomentTable> {
    noncrossing_sum(choi, m, p_max, |sigma, _| sigma.clone())
}

/// Exact `d → ∞` limit of the *-moments of `mW̃`:
/// `Σ_{σ∈NC_p} (mn)^{|σ|} (M_σ^e ⊗ M_γ^e)(Λ)`. Valid for every `Λ`.
pub fn asymptotic_limit(choi: &ChoiMatrix, m: usize, p_max: usize) -> Result<MomentTable> {
    noncrossing_sum(choi, m, p_max, |_, p| Permutation::standard_cycle(p))
}

/// The free Bessel law `β^n_t = π_{t·η_n}`.
pub fn free_bessel(n: usize, t: f64) -> Result<CompoundFreePoissonLaw> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Invalid(format!("t = {t} must be positive")));
    }
    CompoundFreePoissonLaw::new(AtomicMeasure::roots_of_unity(n)?.scaled(t)?)
}

/// The free Poisson law `π_t = π_{t·δ_1}`.
pub fn marchenko_pastur(t: f64) -> Result<CompoundFreePoissonLaw> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Invalid(format!("t = {t} must be positive")));
    }
    CompoundFreePoissonLaw::new(AtomicMeasure::dirac(t, Complex64::new(1.0, 0.0))?)
}

/// `π_μ` with `μ = (m(n-1)/2)δ_{-1} + (m(n+1)/2)δ_1`, the law of `α₊ − α₋` for free
/// `α± ~ π_{m(n±1)/2}`.
pub fn aubrun_law(n: usize, m: usize) -> Result<CompoundFreePoissonLaw> {
    check_parameters(m, n)?;
    let (m, n) = (m as f64, n as f64);
    let atoms = [(m * (n - 1.0) / 2.0, Complex64::new(-1.0, 0.0)), (m * (n + 1.0) / 2.0, Complex64::new(1.0, 0.0))]
        .into_iter()
        .filter(|a| a.0 > 0.0)
        .collect();
    CompoundFreePoissonLaw::new(AtomicMeasure::new(atoms)?)
}

/// Weight of position `y` in the block sums of [`bessel_limit`]:
/// `[e_y = 1] − [e_{y−1} = *]`, indices cyclic.
fn bessel_weights(word: &ExponentWord) -> Vec<i64> {
    let letters = word.letters();
    let p = letters.len();
    (0..p)
        .map(|y| i64::from(letters[y] == Exponent::One) - i64::from(letters[(y + p - 1) % p] == Exponent::Star))
        .collect()
}

/// Whether every orbit of `γσ⁻¹` carries a weight sum divisible by `n`.
pub(crate) fn bessel_admissible(sigma: &Permutation, weights: &[i64], n: usize) -> bool {
    let gamma = Permutation::standard_cycle(sigma.size());
    let walk = gamma.compose(&sigma.inverse()).expect("same size");
    walk.cycles().iter().all(|orbit| orbit.iter().map(|&y| weights[y]).sum::<i64>().rem_euclid(n as i64) == 0)
}

/// Exact `d → ∞` limit of `M^e(W̃)` for the Bessel block map `A ↦ EA`,
/// `E = diag(1, w, …, w^{n-1})`, `w = e^{2πi/n}`:
/// `Σ_{σ∈NC_p} (n/m)^{p−|σ|}`, over the `σ` for which every orbit `β` of `γσ⁻¹`
/// satisfies `Σ_{y∈β} ([e_y = 1] − [e_{y−1} = *]) ≡ 0 (mod n)`.
///
/// For plain words the condition says every block of the complement of `σ` has size
/// divisible by `n`.
pub fn bessel_limit(n: usize, m: usize, word: &ExponentWord) -> Result<Complex64> {
    check_parameters(m, n)?;
    let p = word.len();
    if p == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let weights = bessel_weights(word);
    let ratio = n as f64 / m as f64;
    let mut total = 0.0;
    for sigma in enumerate_noncrossing(p)? {
        let perm = Permutation::from_noncrossing(&sigma)?;
        if bessel_admissible(&perm, &weights, n) {
            total += ratio.powi((p - perm.cycle_count()) as i32);
        }
    }
    Ok(Complex64::new(total, 0.0))
}

/// [`bessel_limit`] for every word up to `p_max`.
pub fn bessel_limit_table(n: usize, m: usize, p_max: usize) -> Result<MomentTable> {
    let mut table = MomentTable::new(p_max);
    for word in ExponentWord::all_up_to(p_max).into_iter().skip(1) {
        let value = bessel_limit(n, m, &word)?;
        table.insert(word, value)?;
    }
    Ok(table)
}

/// `NC_p(n)`: noncrossing partitions of `p` points whose blocks all have size divisible by `n`.
pub fn noncrossing_with_block_sizes_divisible(p: usize, n: usize) -> Result<Vec<Partition>> {
    Ok(enumerate_noncrossing(p)?.into_iter().filter(|s| s.block_sizes().iter().all(|&b| b % n == 0)).collect())
}
