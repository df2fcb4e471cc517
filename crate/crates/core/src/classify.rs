//! Structure of symmetric partitions in `P_even(2s, 2s)`: symmetric components,
//! unitality modulo scalars, eligibility, closed-form generalized moments, and limit-law
//! prediction.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_poisson::{compound_from_choi, AtomicMeasure};
use crate::maps::{easy_choi, twisted_choi};
use crate::moments::{spectral_atoms, MomentTable, DEFAULT_TOLERANCE};
use crate::partition::{Partition, Permutation};

/// Half-width `s` of a partition in `P(2s, 2s)`.
fn half_width(pi: &Partition) -> Result<usize> {
    if pi.upper_count() != pi.lower_count() || !pi.upper_count().is_multiple_of(2) || pi.upper_count() == 0 {
        return Err(Error::Shape(format!("expected a partition in P(2s,2s) with s ≥ 1, got {pi}")));
    }
    Ok(pi.upper_count() / 2)
}

/// `π = π°`.
pub fn is_symmetric(pi: &Partition) -> Result<bool> {
    half_width(pi)?;
    Ok(pi.middle_symmetry()? == *pi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    SymmetricBlock,
    AsymmetricPair,
}

/// One piece of the finest symmetric decomposition.
///
/// Legs are row positions, `0..2s`. For a symmetric block `r` and `v` count the mirror
/// pairs among its upper and lower legs and `u = w = 0`. For a pair `β ∪ β°`, `β` is the
/// block holding the first leg in reading order and `r, u, v, w` count its upper-left,
/// upper-right, lower-left and lower-right legs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricComponent {
    pub kind: ComponentKind,
    pub upper_legs: Vec<usize>,
    pub lower_legs: Vec<usize>,
    pub r: usize,
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

impl SymmetricComponent {
    /// `(R, V)`: the multipliers of `|σ|` and `|τ|` in the closed-form exponent.
    pub fn weights(&self) -> (usize, usize) {
        match self.kind {
            ComponentKind::SymmetricBlock => (self.r, self.v),
            ComponentKind::AsymmetricPair => (self.r + self.u, self.v + self.w),
        }
    }
}

/// The finest decomposition of a symmetric `π` into symmetric blocks and mirror pairs.
pub fn symmetric_components(pi: &Partition) -> Result<Vec<SymmetricComponent>> {
    let s = half_width(pi)?;
    if !is_symmetric(pi)? {
        return Err(Error::Asymmetric);
    }
    let width = 2 * s;
    let mirror = |x: usize| if x % width < s { x + s } else { x - s };
    let blocks = pi.blocks();
    let labels = pi.labels();
    let mut done = vec![false; blocks.len()];
    let mut out = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        if done[b] {
            continue;
        }
        let partner = labels[mirror(block[0])];
        done[b] = true;
        done[partner] = true;
        let upper = |set: &[usize]| set.iter().copied().filter(|&x| x < width).collect::<Vec<_>>();
        let lower = |set: &[usize]| set.iter().filter(|&&x| x >= width).map(|&x| x - width).collect::<Vec<_>>();
        if partner == b {
            let (up, low) = (upper(block), lower(block));
            out.push(SymmetricComponent {
                kind: ComponentKind::SymmetricBlock,
                r: up.len() / 2,
                u: 0,
                v: low.len() / 2,
                w: 0,
                upper_legs: up,
                lower_legs: low,
            });
        } else {
            let (up, low) = (upper(block), lower(block));
            let count = |legs: &[usize], left: bool| legs.iter().filter(|&&x| (x < s) == left).count();
            let mut legs: Vec<usize> = block.iter().chain(&blocks[partner]).copied().collect();
            legs.sort_unstable();
            out.push(SymmetricComponent {
                kind: ComponentKind::AsymmetricPair,
                r: count(&up, true),
                u: count(&up, false),
                v: count(&low, true),
                w: count(&low, false),
                upper_legs: upper(&legs),
                lower_legs: lower(&legs),
            });
        }
    }
    Ok(out)
}

/// A letter of a permutation word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermLetter {
    Sigma,
    Tau,
    SigmaInv,
    TauInv,
}

/// `λ` as a wedge of permutation products, or the formal `∅` with no blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaDescriptor {
    /// Common coarsening of the orbit partitions of the listed products; the empty
    /// product is the identity.
    Wedge(Vec<Vec<PermLetter>>),
    Empty,
}

impl LambdaDescriptor {
    fn wedge(products: &[&[PermLetter]]) -> Self {
        Self::Wedge(products.iter().map(|p| p.to_vec()).collect())
    }

    /// `|λ|`.
    pub fn block_count(&self, sigma: &Permutation, tau: &Permutation) -> Result<usize> {
        let products = match self {
            Self::Empty => return Ok(0),
            Self::Wedge(products) => products,
        };
        let mut joined: Option<Partition> = None;
        for product in products {
            let mut perm = Permutation::identity(sigma.size());
            for letter in product {
                let factor = match letter {
                    PermLetter::Sigma => sigma.clone(),
                    PermLetter::Tau => tau.clone(),
                    PermLetter::SigmaInv => sigma.inverse(),
                    PermLetter::TauInv => tau.inverse(),
                };
                perm = perm.compose(&factor)?;
            }
            let orbits = perm.orbits();
            joined = Some(match joined {
                None => orbits,
                Some(acc) => acc.common_coarsening(&orbits)?,
            });
        }
        Ok(joined.map_or(0, |j| j.block_count()))
    }
}

impl fmt::Display for LambdaDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let products = match self {
            Self::Empty => return f.write_str("∅"),
            Self::Wedge(products) => products,
        };
        let rendered: Vec<String> = products
            .iter()
            .map(|product| {
                if product.is_empty() {
                    return "1".to_string();
                }
                // collapse repeated letters into powers
                let mut out = String::new();
                let mut t = 0;
                while t < product.len() {
                    let mut run = 1;
                    while t + run < product.len() && product[t + run] == product[t] {
                        run += 1;
                    }
                    let (base, inverse) = match product[t] {
                        PermLetter::Sigma => ("σ", false),
                        PermLetter::Tau => ("τ", false),
                        PermLetter::SigmaInv => ("σ", true),
                        PermLetter::TauInv => ("τ", true),
                    };
                    out.push_str(base);
                    match (inverse, run) {
                        (false, 1) => {}
                        (false, k) => out.push_str(&superscript(k as i64)),
                        (true, k) => out.push_str(&superscript(-(k as i64))),
                    }
                    t += run;
                }
                out
            })
            .collect();
        f.write_str(&rendered.join("∧"))
    }
}

fn superscript(k: i64) -> String {
    k.to_string()
        .chars()
        .map(|c| match c {
            '-' => '⁻',
            '0' => '⁰',
            '1' => '¹',
            '2' => '²',
            '3' => '³',
            '4' => '⁴',
            '5' => '⁵',
            '6' => '⁶',
            '7' => '⁷',
            '8' => '⁸',
            _ => '⁹',
        })
        .collect()
}

/// `λ` for a component together with the exponent data of `N^{|λ| − R|σ| − V|τ|}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLambda {
    pub descriptor: LambdaDescriptor,
    pub blocks: usize,
    pub sigma_weight: usize,
    pub tau_weight: usize,
}

impl ComponentLambda {
    /// `|λ| − R|σ| − V|τ|`.
    pub fn exponent(&self, sigma: &Permutation, tau: &Permutation) -> i64 {
        self.blocks as i64 - (self.sigma_weight * sigma.cycle_count()) as i64 - (self.tau_weight * tau.cycle_count()) as i64
    }
}

use PermLetter::{Sigma as S, Tau as T, TauInv as Ti};

/// Entry of the two-block table, indexed by positivity of `(r, u)` and `(v, w)`, as
/// printed in the literature, with `∅` in four cells. `None` marks the unreachable cell.
pub fn printed_pair_table(ru: (bool, bool), vw: (bool, bool)) -> Option<LambdaDescriptor> {
    use LambdaDescriptor::Empty;
    let w = LambdaDescriptor::wedge;
    Some(match (ru, vw) {
        ((true, true), (true, true)) => w(&[&[S, S], &[S, T], &[S, Ti]]),
        ((true, true), (true, false)) => w(&[&[S, S], &[S, Ti]]),
        ((true, true), (false, true)) => w(&[&[S, S], &[S, T]]),
        ((true, true), (false, false)) => w(&[&[S, S]]),
        ((true, false), (true, true)) => w(&[&[S, T], &[S, Ti]]),
        ((true, false), (true, false)) => w(&[&[S, Ti]]),
        ((true, false), (false, true)) => w(&[&[S, T]]),
        ((true, false), (false, false)) => Empty,
        ((false, true), (true, true)) => w(&[&[T, S], &[T, T]]),
        ((false, true), (true, false)) => w(&[&[T, S]]),
        ((false, true), (false, true)) => w(&[&[Ti, S]]),
        ((false, true), (false, false)) => Empty,
        ((false, false), (true, true)) => w(&[&[T, T]]),
        ((false, false), (true, false)) => Empty,
        ((false, false), (false, true)) => Empty,
        ((false, false), (false, false)) => return None,
    })
}

/// The `λ` entering the closed form. Agrees with [`printed_pair_table`] except in the
/// four `∅` cells: there only one family of constraints `k ↔ l` survives, so the `p`
/// free indices give `|λ| = p` and `λ` is the partition into singletons.
fn pair_lambda(ru: (bool, bool), vw: (bool, bool)) -> Option<LambdaDescriptor> {
    match printed_pair_table(ru, vw)? {
        LambdaDescriptor::Empty => Some(LambdaDescriptor::Wedge(vec![Vec::new()])),
        other => Some(other),
    }
}

/// `λ` and the exponent data for one component at `(σ, τ)`.
pub fn component_lambda(comp: &SymmetricComponent, sigma: &Permutation, tau: &Permutation) -> Result<ComponentLambda> {
    if sigma.size() != tau.size() {
        return Err(Error::Dimension { expected: sigma.size(), found: tau.size() });
    }
    let (sigma_weight, tau_weight) = comp.weights();
    let descriptor = match comp.kind {
        ComponentKind::SymmetricBlock => match (comp.r >= 1, comp.v >= 1) {
            (true, true) => LambdaDescriptor::wedge(&[&[S], &[T]]),
            (true, false) => LambdaDescriptor::wedge(&[&[S]]),
            (false, true) => LambdaDescriptor::wedge(&[&[T]]),
            (false, false) => return Err(Error::Invalid("symmetric block without legs".into())),
        },
        ComponentKind::AsymmetricPair => pair_lambda((comp.r >= 1, comp.u >= 1), (comp.v >= 1, comp.w >= 1))
            .ok_or_else(|| Error::Invalid("component with r = u = v = w = 0".into()))?,
    };
    let blocks = descriptor.block_count(sigma, tau)?;
    Ok(ComponentLambda { descriptor, blocks, sigma_weight, tau_weight })
}

/// Exponent `E` with `(M_σ ⊗ M_τ)(Λ_π) = N^E` for symmetric `π`.
pub fn closed_form_exponent(pi: &Partition, sigma: &Permutation, tau: &Permutation) -> Result<i64> {
    let mut total = 0;
    for comp in symmetric_components(pi)? {
        total += component_lambda(&comp, sigma, tau)?.exponent(sigma, tau);
    }
    Ok(total)
}

/// `(M_σ ⊗ M_τ)(Λ_π)` for symmetric `π` and the plain word, as a product over
/// components of `N^{|λ_t| − R_t|σ| − V_t|τ|}`.
pub fn closed_form_generalized_moment(pi: &Partition, sigma: &Permutation, tau: &Permutation, base_dim: usize) -> Result<f64> {
    let exponent = closed_form_exponent(pi, sigma, tau)?;
    Ok((base_dim as f64).powi(exponent as i32))
}

/// Outcome of the two unitality criteria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unitality {
    pub unital: bool,
    /// The `c` of `φ_π(1) = c·1` when unital.
    pub scalar: Option<f64>,
}

/// Whether `φ_π(1)` is a scalar multiple of `1`.
///
/// Evaluates `φ_π(1)` at base `N` and the criterion `[μ over π] = μ`, with `μ` joining
/// `i` and `i + s` on one row, and fails with [`Error::Inconsistent`] if they disagree.
pub fn is_unital_mod_scalars(pi: &Partition, base_dim: usize) -> Result<Unitality> {
    let s = half_width(pi)?;
    if base_dim < 2 {
        return Err(Error::Invalid("the matrix route needs N ≥ 2".into()));
    }
    let choi = easy_choi(pi, base_dim)?;
    let n = choi.inner_dim();
    let mut image = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                image[b * n + d] += choi.entry(a, b, a, d);
            }
        }
    }
    let c = image[0];
    let matrix_route = (0..n).all(|b| (0..n).all(|d| image[b * n + d] == if b == d { c } else { Complex64::new(0.0, 0.0) }));
    let combinatorial = unital_by_composition(pi, s)?;
    if matrix_route != combinatorial {
        return Err(Error::Inconsistent(format!(
            "unitality of {pi}: matrix route says {matrix_route}, composition route says {combinatorial}"
        )));
    }
    Ok(Unitality { unital: matrix_route, scalar: matrix_route.then_some(c.re) })
}

fn unital_by_composition(pi: &Partition, s: usize) -> Result<bool> {
    let mu = Partition::mirror_pairing(s);
    let (stacked, _) = Partition::vertical_compose(&mu, pi)?;
    Ok(stacked == mu)
}

/// Which of the basic `P_even(2,2)` pieces a component reproduces, read from its legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasicShape {
    /// `ab/ab`.
    Identity,
    /// `ab/ba`.
    Crossing,
    /// One row of `aa/bb`.
    UpperString,
    LowerString,
    /// `aa/aa`.
    Projection,
}

/// Match the component's blocks against the copies of the four basic partitions.
fn basic_shape(pi: &Partition, comp: &SymmetricComponent, s: usize) -> Option<BasicShape> {
    let width = 2 * s;
    let labels = pi.labels();
    let side = |x: usize| (x % width) < s;
    let column = |x: usize| x % s;
    let mirrored = |a: usize, b: usize| a != b && column(a) == column(b) && side(a) != side(b);
    let legs: Vec<usize> = comp.upper_legs.iter().copied().chain(comp.lower_legs.iter().map(|x| x + width)).collect();
    let same_block = |a: usize, b: usize| labels[a] == labels[b];
    match (comp.upper_legs.len(), comp.lower_legs.len()) {
        (2, 0) if same_block(legs[0], legs[1]) && mirrored(legs[0], legs[1]) => Some(BasicShape::UpperString),
        (0, 2) if same_block(legs[0], legs[1]) && mirrored(legs[0], legs[1]) => Some(BasicShape::LowerString),
        (2, 2) => {
            let (u0, u1, l0, l1) = (legs[0], legs[1], legs[2], legs[3]);
            if !mirrored(u0, u1) || !mirrored(l0, l1) {
                return None;
            }
            if same_block(u0, u1) && same_block(u0, l0) && same_block(u0, l1) {
                return Some(BasicShape::Projection);
            }
            if same_block(u0, u1) || same_block(l0, l1) {
                return None;
            }
            let partner = if same_block(u0, l0) { l0 } else if same_block(u0, l1) { l1 } else { return None };
            if side(u0) == side(partner) {
                Some(BasicShape::Identity)
            } else {
                Some(BasicShape::Crossing)
            }
        }
        _ => None,
    }
}

/// The three equivalent eligibility conditions, evaluated separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EligibilityReport {
    /// `φ_π` and `φ_{π*}` are both unital modulo scalars.
    pub unital_both: bool,
    /// Every component has at most two upper and at most two lower legs.
    pub small_components: bool,
    /// Every component is a copy of a piece of `P_even(2,2)`.
    pub basic_copies: bool,
    pub shapes: Vec<Option<BasicShape>>,
    pub verdict: bool,
}

/// Evaluate the three eligibility conditions for a symmetric even `π` and require
/// them to agree.
pub fn easy_case_eligible(pi: &Partition) -> Result<EligibilityReport> {
    let s = half_width(pi)?;
    if !pi.is_even() {
        return Err(Error::OddBlock);
    }
    let components = symmetric_components(pi)?;
    let unital_both = is_unital_mod_scalars(pi, 2)?.unital && is_unital_mod_scalars(&pi.adjoint(), 2)?.unital;
    let small_components = components.iter().all(|c| c.upper_legs.len() <= 2 && c.lower_legs.len() <= 2);
    let shapes: Vec<Option<BasicShape>> = components.iter().map(|c| basic_shape(pi, c, s)).collect();
    let basic_copies = shapes.iter().all(Option::is_some);
    if unital_both != small_components || small_components != basic_copies {
        return Err(Error::Inconsistent(format!(
            "eligibility of {pi}: unital {unital_both}, small components {small_components}, basic copies {basic_copies}"
        )));
    }
    Ok(EligibilityReport { unital_both, small_components, basic_copies, shapes, verdict: unital_both })
}

/// Classification summary of one partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub partition: String,
    pub even: bool,
    pub symmetric: bool,
    pub noncrossing: bool,
    pub components: Vec<SymmetricComponent>,
    pub eligibility: Option<EligibilityReport>,
}

impl ClassificationReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "partition = {}\neven = {}\nsymmetric = {}\nnoncrossing = {}\n",
            self.partition, self.even, self.symmetric, self.noncrossing
        );
        for c in &self.components {
            let kind = match c.kind {
                ComponentKind::SymmetricBlock => "symmetric-block",
                ComponentKind::AsymmetricPair => "asymmetric-pair",
            };
            out.push_str(&format!(
                "component = {kind} upper={:?} lower={:?} r={} u={} v={} w={}\n",
                c.upper_legs, c.lower_legs, c.r, c.u, c.v, c.w
            ));
        }
        if let Some(e) = &self.eligibility {
            out.push_str(&format!(
                "unital_both = {}\nsmall_components = {}\nbasic_copies = {}\neligible = {}\n",
                e.unital_both, e.small_components, e.basic_copies, e.verdict
            ));
        }
        out
    }
}

pub fn classify(pi: &Partition) -> Result<ClassificationReport> {
    half_width(pi)?;
    let symmetric = is_symmetric(pi)?;
    let components = if symmetric { symmetric_components(pi)? } else { Vec::new() };
    let eligibility = if symmetric && pi.is_even() { Some(easy_case_eligible(pi)?) } else { None };
    Ok(ClassificationReport {
        partition: pi.to_string(),
        even: pi.is_even(),
        symmetric,
        noncrossing: pi.is_noncrossing(),
        components,
        eligibility,
    })
}

/// Predicted limit of `mW̃` for an eligible partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub moments: MomentTable,
    /// `mn·ρ` with `ρ = law(Λ_π)`, when `Λ_π` is self-adjoint.
    pub base: Option<AtomicMeasure>,
}

/// `m W̃ ~ π_{mnρ}` for eligible `π` at base `N`, `n = N^s`, evaluated through the
/// Choi matrix. With `twisted`, the twisted Choi matrix is used and the result is
/// required to match the untwisted one.
pub fn predict_limit_law(pi: &Partition, base_dim: usize, m: usize, twisted: bool, p_max: usize) -> Result<Prediction> {
    if !is_symmetric(pi)? {
        return Err(Error::Ineligible(format!("{pi} is not symmetric")));
    }
    if !pi.is_even() {
        return Err(Error::Ineligible(format!("{pi} has odd blocks")));
    }
    if !easy_case_eligible(pi)?.verdict {
        return Err(Error::Ineligible(format!("{pi} has components outside the four basic shapes")));
    }
    let plain = easy_choi(pi, base_dim)?;
    let moments = compound_from_choi(&plain, m, p_max)?;
    let choi = if twisted {
        let bar = twisted_choi(pi, base_dim)?;
        let twisted_moments = compound_from_choi(&bar, m, p_max)?;
        if !twisted_moments.approx_eq(&moments, DEFAULT_TOLERANCE) {
            return Err(Error::Inconsistent(format!("twisted prediction for {pi} differs from the untwisted one")));
        }
        bar
    } else {
        plain
    };
    let mn = (m * choi.inner_dim()) as f64;
    let base = if choi.is_self_adjoint(DEFAULT_TOLERANCE) {
        Some(spectral_atoms(&choi, 1e-8)?.scaled(mn)?)
    } else {
        None
    };
    Ok(Prediction { moments, base })
}
