//! Set partitions between an upper row of `k` points and a lower row of `l` points.
//!
//! Points are addressed in *reading order*: the upper row left to right, then the
//! lower row left to right. A [`Partition`] stores one block id per point, in the
//! canonical labelling where block ids appear in first-occurrence order. Two
//! partitions are equal exactly when their canonical forms are.
//!
//! Crossings are measured in *boundary order*, which walks the rectangle: upper
//! row left to right, then lower row right to left. In that order the identity
//! pairing `ab/ab` is noncrossing and the transposition `ab/ba` crosses.

mod enumerate;
mod permutation;
mod signature;

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use enumerate::{bell_number, catalan_number, enumerate_noncrossing, enumerate_partitions, MAX_POINTS};
pub use permutation::{kreweras, Permutation};
pub use signature::{crossing_count, signature, signature_by_switch_search, SWITCH_SEARCH_LIMIT};

/// A set partition of `upper + lower` points in canonical block-labelled form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    upper: usize,
    lower: usize,
    blocks: Vec<usize>,
}

/// Relabel `values` so that ids are contiguous and appear in first-occurrence order.
fn canonical_labels<T: Eq + Hash>(values: impl IntoIterator<Item = T>) -> Vec<usize> {
    let mut seen: HashMap<T, usize> = HashMap::new();
    values
        .into_iter()
        .map(|v| {
            let next = seen.len();
            *seen.entry(v).or_insert(next)
        })
        .collect()
}

impl Partition {
    /// Build a partition from arbitrary labels in reading order; equal labels share a block.
    pub fn from_labels<T: Eq + Hash + Clone>(upper: usize, lower: usize, labels: &[T]) -> Result<Self> {
        if labels.len() != upper + lower {
            return Err(Error::Dimension { expected: upper + lower, found: labels.len() });
        }
        Ok(Self { upper, lower, blocks: canonical_labels(labels.iter().cloned()) })
    }

    /// Partition of `points.len()` points on a single (lower) row, i.e. an element of `P(0, p)`.
    pub fn one_row<T: Eq + Hash + Clone>(labels: &[T]) -> Self {
        Self { upper: 0, lower: labels.len(), blocks: canonical_labels(labels.iter().cloned()) }
    }

    /// The partition grouping positions that carry equal values.
    pub fn kernel<T: Eq + Hash + Clone>(upper_values: &[T], lower_values: &[T]) -> Self {
        Self {
            upper: upper_values.len(),
            lower: lower_values.len(),
            blocks: canonical_labels(upper_values.iter().chain(lower_values).cloned()),
        }
    }

    /// Build from a list of blocks, each a list of reading-order positions.
    pub fn from_blocks(upper: usize, lower: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let total = upper + lower;
        let mut labels = vec![usize::MAX; total];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Shape("empty block".into()));
            }
            for &x in block {
                if x >= total || labels[x] != usize::MAX {
                    return Err(Error::Shape(format!("position {x} missing or repeated")));
                }
                labels[x] = b;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::Shape("blocks do not cover every point".into()));
        }
        Self::from_labels(upper, lower, &labels)
    }

    /// The one-block partition on `upper + lower` points.
    pub fn one_block(upper: usize, lower: usize) -> Self {
        Self { upper, lower, blocks: vec![0; upper + lower] }
    }

    /// The all-singletons partition.
    pub fn singletons(upper: usize, lower: usize) -> Self {
        Self { upper, lower, blocks: (0..upper + lower).collect() }
    }

    /// The pairing of `P(k, k)` joining upper point `i` to lower point `image[i]`.
    pub fn from_permutation(perm: &Permutation) -> Self {
        let k = perm.size();
        let mut labels = vec![0usize; 2 * k];
        for i in 0..k {
            labels[i] = i;
            labels[k + perm.apply(i)] = i;
        }
        Self::from_labels(k, k, &labels).expect("lengths agree")
    }

    /// The horizontal-string pairing in `P(2s, 2s)`: column `j` is joined to column `j + s`
    /// on each row.
    pub fn horizontal_strings(s: usize) -> Self {
        let mut labels = Vec::with_capacity(4 * s);
        for j in 0..2 * s {
            labels.push(j % s);
        }
        for j in 0..2 * s {
            labels.push(s + j % s);
        }
        Self::from_labels(2 * s, 2 * s, &labels).expect("lengths agree")
    }

    /// The pairing `μ ∈ P(0, 2s)` connecting `{i}` with `{i + s}`.
    pub fn mirror_pairing(s: usize) -> Self {
        let labels: Vec<usize> = (0..2 * s).map(|j| j % s).collect();
        Self::one_row(&labels)
    }

    pub fn upper_count(&self) -> usize {
        self.upper
    }

    pub fn lower_count(&self) -> usize {
        self.lower
    }

    pub fn point_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.iter().max().map_or(0, |&m| m + 1)
    }

    /// Block id of every point in reading order.
    pub fn labels(&self) -> &[usize] {
        &self.blocks
    }

    pub fn upper_labels(&self) -> &[usize] {
        &self.blocks[..self.upper]
    }

    pub fn lower_labels(&self) -> &[usize] {
        &self.blocks[self.upper..]
    }

    /// Blocks as sorted lists of reading-order positions, indexed by block id.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (x, &b) in self.blocks.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.block_count()];
        for &b in &self.blocks {
            sizes[b] += 1;
        }
        sizes
    }

    /// True when every block has even size.
    pub fn is_even(&self) -> bool {
        self.block_sizes().iter().all(|s| s % 2 == 0)
    }

    /// True when every block has exactly two points.
    pub fn is_pairing(&self) -> bool {
        self.block_sizes().iter().all(|&s| s == 2)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.upper != other.upper || self.lower != other.lower {
            return Err(Error::Shape(format!(
                "P({},{}) against P({},{})",
                self.upper, self.lower, other.upper, other.lower
            )));
        }
        Ok(())
    }

    /// Position along the rectangle boundary of the reading-order point `x`.
    pub fn boundary_position(&self, x: usize) -> usize {
        if x < self.upper {
            x
        } else {
            self.upper + (self.lower - 1 - (x - self.upper))
        }
    }

    /// Block labels listed in boundary order.
    pub fn boundary_word(&self) -> Vec<usize> {
        let mut word = vec![0; self.point_count()];
        for (x, &b) in self.blocks.iter().enumerate() {
            word[self.boundary_position(x)] = b;
        }
        word
    }

    /// Blocks as sorted lists of boundary positions.
    pub(crate) fn boundary_blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (pos, b) in self.boundary_word().into_iter().enumerate() {
            out[b].push(pos);
        }
        out
    }

    /// No `x1 < x2 < x3 < x4` in boundary order with `x1, x3` in one block and
    /// `x2, x4` in another.
    pub fn is_noncrossing(&self) -> bool {
        word_is_noncrossing(&self.boundary_word())
    }

    /// `δ_π(upper / lower)`: every block of the partition carries a constant value.
    pub fn delta<T: PartialEq>(&self, upper_values: &[T], lower_values: &[T]) -> Result<bool> {
        if upper_values.len() != self.upper || lower_values.len() != self.lower {
            return Err(Error::Shape(format!(
                "values of shape ({},{}) for P({},{})",
                upper_values.len(),
                lower_values.len(),
                self.upper,
                self.lower
            )));
        }
        Ok(self.delta_unchecked(upper_values.iter().chain(lower_values)))
    }

    /// `δ_π` on a reading-order value sequence of the right length.
    pub(crate) fn delta_unchecked<'a, T: PartialEq + 'a>(&self, values: impl Iterator<Item = &'a T>) -> bool {
        let mut rep: Vec<Option<&T>> = vec![None; self.block_count()];
        for (v, &b) in values.zip(&self.blocks) {
            match rep[b] {
                None => rep[b] = Some(v),
                Some(r) if r != v => return false,
                _ => {}
            }
        }
        true
    }

    /// True when every block of `finer` lies inside a block of `self`.
    ///
    /// This is the order written `self ≤ finer` in the kernel sums of the twisted
    /// maps: `δ_π(i) = 1` exactly when `kernel(i)` is coarser than `π`.
    pub fn is_coarser(&self, finer: &Self) -> Result<bool> {
        self.same_shape(finer)?;
        let mut image = vec![usize::MAX; finer.block_count()];
        for (&fine, &coarse) in finer.blocks.iter().zip(&self.blocks) {
            if image[fine] == usize::MAX {
                image[fine] = coarse;
            } else if image[fine] != coarse {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Finest partition coarser than both: connected components of the union of the
    /// block relations.
    pub fn common_coarsening(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let n = self.point_count();
        let mut uf = UnionFind::new(n);
        for labels in [&self.blocks, &other.blocks] {
            let mut first = vec![usize::MAX; n];
            for (x, &b) in labels.iter().enumerate() {
                if first[b] == usize::MAX {
                    first[b] = x;
                } else {
                    uf.union(first[b], x);
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
        Self::from_labels(self.upper, self.lower, &roots)
    }

    /// Swap the left and right halves of both rows of a partition in `P(2s, 2s')`.
    pub fn middle_symmetry(&self) -> Result<Self> {
        if !self.upper.is_multiple_of(2) || !self.lower.is_multiple_of(2) {
            return Err(Error::Shape(format!("middle symmetry needs even rows, got P({},{})", self.upper, self.lower)));
        }
        let (su, sl) = (self.upper / 2, self.lower / 2);
        let mut labels = Vec::with_capacity(self.point_count());
        for j in 0..self.upper {
            labels.push(self.blocks[(j + su) % self.upper]);
        }
        for j in 0..self.lower {
            labels.push(self.blocks[self.upper + (j + sl) % self.lower]);
        }
        Self::from_labels(self.upper, self.lower, &labels)
    }

    /// `π*`: the upper and lower rows exchanged.
    pub fn adjoint(&self) -> Self {
        let labels: Vec<usize> = self.lower_labels().iter().chain(self.upper_labels()).copied().collect();
        Self::from_labels(self.lower, self.upper, &labels).expect("lengths agree")
    }

    /// Horizontal concatenation `[π σ]`: `self` on the left, `other` on the right.
    pub fn tensor(&self, other: &Self) -> Self {
        let shift = self.block_count();
        let up = self.upper_labels().iter().copied().chain(other.upper_labels().iter().map(|b| b + shift));
        let low = self.lower_labels().iter().copied().chain(other.lower_labels().iter().map(|b| b + shift));
        let labels: Vec<usize> = up.chain(low).collect();
        Self::from_labels(self.upper + other.upper, self.lower + other.lower, &labels).expect("lengths agree")
    }

    /// Vertical composition: `top ∈ P(k, l)` stacked over `bottom ∈ P(l, m)`.
    ///
    /// The lower row of `top` is glued to the upper row of `bottom`. Returns the induced
    /// partition of the outer `k + m` points together with the number of closed loops,
    /// i.e. components made only of glued points.
    pub fn vertical_compose(top: &Self, bottom: &Self) -> Result<(Self, usize)> {
        if top.lower != bottom.upper {
            return Err(Error::Shape(format!(
                "cannot glue P({},{}) on top of P({},{})",
                top.upper, top.lower, bottom.upper, bottom.lower
            )));
        }
        let (k, l, m) = (top.upper, top.lower, bottom.lower);
        // vertices: top upper [0,k), middle [k,k+l), bottom lower [k+l, k+l+m)
        let n = k + l + m;
        let mut uf = UnionFind::new(n);
        let mut join = |labels: &[usize], vertex: &dyn Fn(usize) -> usize| {
            let mut first = HashMap::new();
            for (x, &b) in labels.iter().enumerate() {
                let v = vertex(x);
                match first.get(&b) {
                    Some(&f) => uf.union(f, v),
                    None => {
                        first.insert(b, v);
                    }
                }
            }
        };
        join(&top.blocks, &|x| x);
        join(&bottom.blocks, &|x| k + x);
        let roots: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
        let outer: Vec<usize> = roots[..k].iter().chain(&roots[k + l..]).copied().collect();
        let mut loops: Vec<usize> = roots[k..k + l].iter().filter(|r| !outer.contains(r)).copied().collect();
        loops.sort_unstable();
        loops.dedup();
        Ok((Self::from_labels(k, m, &outer)?, loops.len()))
    }

    /// Letter grid with one row per line, for pretty output.
    pub fn picture(&self) -> String {
        let text = self.to_string();
        let (up, low) = text.split_once('/').unwrap_or(("", ""));
        let spaced = |row: &str| row.chars().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        format!("[ {} ]\n[ {} ]", spaced(up), spaced(low))
    }
}

/// Noncrossing test on a word of block labels in a linear order.
pub(crate) fn word_is_noncrossing(word: &[usize]) -> bool {
    // Scan left to right keeping, per block, first and last occurrence so far.
    // Reusing block b at t after its last occurrence q crosses iff some other block
    // has an occurrence before q and one inside (q, t).
    let blocks = word.iter().max().map_or(0, |&m| m + 1);
    let mut first = vec![usize::MAX; blocks];
    let mut last = vec![usize::MAX; blocks];
    for (t, &b) in word.iter().enumerate() {
        if first[b] == usize::MAX {
            first[b] = t;
        } else {
            let q = last[b];
            let crossed = (0..blocks)
                .any(|c| c != b && first[c] != usize::MAX && first[c] < q && last[c] > q);
            if crossed {
                return false;
            }
        }
        last[b] = t;
    }
    true
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = |b: usize| -> String {
            if b < 26 {
                char::from(b'a' + b as u8).to_string()
            } else {
                format!("[{b}]")
            }
        };
        for &b in self.upper_labels() {
            f.write_str(&letter(b))?;
        }
        f.write_str("/")?;
        for &b in self.lower_labels() {
            f.write_str(&letter(b))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parse `upper/lower` where rows are strings over `a-z` and equal letters share a block.
    fn from_str(text: &str) -> Result<Self> {
        let fail = |reason: &str| Error::Parse { literal: text.to_string(), reason: reason.to_string() };
        let (up, low) = text.split_once('/').ok_or_else(|| fail("expected a '/' between the rows"))?;
        if up.is_empty() && low.is_empty() {
            return Err(fail("both rows are empty"));
        }
        if let Some(c) = up.chars().chain(low.chars()).find(|c| !c.is_ascii_lowercase()) {
            return Err(fail(&format!("unexpected character {c:?}")));
        }
        let letters: Vec<char> = up.chars().chain(low.chars()).collect();
        Self::from_labels(up.len(), low.len(), &letters)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
