use std::fmt;

use super::Partition;
use crate::error::{Error, Result};

/// A permutation of `{0, …, p-1}` stored by its images.
///
/// Composition follows function notation: `(σ·τ)(x) = σ(τ(x))`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &y in &image {
            if y >= image.len() || seen[y] {
                return Err(Error::Invalid(format!("{image:?} is not a bijection")));
            }
            seen[y] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(p: usize) -> Self {
        Self { image: (0..p).collect() }
    }

    /// The standard cycle `γ = (0 → 1 → … → p-1 → 0)`.
    pub fn standard_cycle(p: usize) -> Self {
        Self { image: (0..p).map(|x| (x + 1) % p).collect() }
    }

    /// Embed a noncrossing one-row partition by cycling each block in increasing order.
    pub fn from_noncrossing(sigma: &Partition) -> Result<Self> {
        if sigma.upper_count() != 0 {
            return Err(Error::Shape(format!("expected a one-row partition, got {sigma}")));
        }
        if !sigma.is_noncrossing() {
            return Err(Error::Crossing);
        }
        Ok(Self::cycling_blocks(sigma))
    }

    /// Cycle each block in increasing order without checking noncrossingness.
    pub fn cycling_blocks(sigma: &Partition) -> Self {
        let mut image = vec![0; sigma.point_count()];
        for block in sigma.blocks() {
            for (t, &x) in block.iter().enumerate() {
                image[x] = block[(t + 1) % block.len()];
            }
        }
        Self { image }
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.size() != other.size() {
            return Err(Error::Dimension { expected: self.size(), found: other.size() });
        }
        Ok(Self { image: other.image.iter().map(|&y| self.image[y]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.size()];
        for (x, &y) in self.image.iter().enumerate() {
            image[y] = x;
        }
        Self { image }
    }

    pub fn power(&self, k: u32) -> Self {
        let mut out = Self::identity(self.size());
        for _ in 0..k {
            out = self.compose(&out).expect("same size");
        }
        out
    }

    /// Cycles, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    /// `|σ|`, the number of cycles.
    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// The orbit partition in `P(0, p)`.
    pub fn orbits(&self) -> Partition {
        let mut labels = vec![0; self.size()];
        for (c, cycle) in self.cycles().iter().enumerate() {
            for &x in cycle {
                labels[x] = c;
            }
        }
        Partition::one_row(&labels)
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i32 {
        if (self.size() - self.cycle_count()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Every permutation of `p` points, in lexicographic order of images.
    pub fn all(p: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..p).collect();
        loop {
            out.push(Self { image: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..p).rev().find(|&i| current[i - 1] < current[i]) else {
                return out;
            };
            let j = (i..p).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
            current.swap(i - 1, j);
            current[i..].reverse();
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.image)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycles() {
            let items: Vec<String> = cycle.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", items.join(" "))?;
        }
        Ok(())
    }
}

/// Kreweras complement of a noncrossing partition of `p` points.
///
/// Realized as the orbit partition of `σ⁻¹γ`, which is noncrossing and has
/// `p + 1 - |σ|` blocks.
pub fn kreweras(sigma: &Partition) -> Result<Partition> {
    let perm = Permutation::from_noncrossing(sigma)?;
    let gamma = Permutation::standard_cycle(perm.size());
    Ok(perm.inverse().compose(&gamma)?.orbits())
}
