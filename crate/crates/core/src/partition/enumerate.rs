use std::sync::OnceLock;

use super::Partition;
use crate::error::{Error, Result};

/// Largest number of points accepted by the enumerators.
pub const MAX_POINTS: usize = 16;

/// All partitions of `upper + lower` points, optionally only those with even blocks.
///
/// Output is canonical, duplicate-free, and ordered by restricted growth string.
pub fn enumerate_partitions(upper: usize, lower: usize, even_only: bool) -> Result<Vec<Partition>> {
    let total = upper + lower;
    if total > MAX_POINTS {
        return Err(Error::TooLarge { points: total, limit: MAX_POINTS });
    }
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(total);
    let mut sizes = Vec::new();
    grow(total, even_only, false, &mut labels, &mut sizes, &mut out, upper);
    Ok(out)
}

/// All noncrossing partitions of `p` points on one row, i.e. `NC_p ⊂ P(0, p)`.
///
/// The result for each `p ≤ 12` is computed once and shared.
pub fn enumerate_noncrossing(p: usize) -> Result<Vec<Partition>> {
    if p > MAX_POINTS {
        return Err(Error::TooLarge { points: p, limit: MAX_POINTS });
    }
    const CACHED: usize = 13;
    static CACHE: [OnceLock<Vec<Partition>>; CACHED] = [const { OnceLock::new() }; CACHED];
    if p < CACHED {
        return Ok(CACHE[p].get_or_init(|| noncrossing_uncached(p)).clone());
    }
    Ok(noncrossing_uncached(p))
}

fn noncrossing_uncached(p: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(p);
    let mut sizes = Vec::new();
    grow(p, false, true, &mut labels, &mut sizes, &mut out, 0);
    out
}

/// Extend a restricted growth string one point at a time.
fn grow(
    total: usize,
    even_only: bool,
    noncrossing: bool,
    labels: &mut Vec<usize>,
    sizes: &mut Vec<usize>,
    out: &mut Vec<Partition>,
    upper: usize,
) {
    let t = labels.len();
    if even_only {
        // every odd block needs at least one more point
        let odd = sizes.iter().filter(|&&s| s % 2 == 1).count();
        if odd > total - t {
            return;
        }
    }
    if t == total {
        out.push(Partition { upper, lower: total - upper, blocks: labels.clone() });
        return;
    }
    let fresh = sizes.len();
    for b in 0..=fresh {
        labels.push(b);
        if b == fresh {
            sizes.push(1);
        } else {
            sizes[b] += 1;
        }
        if !noncrossing || super::word_is_noncrossing(labels) {
            grow(total, even_only, noncrossing, labels, sizes, out, upper);
        }
        if b == fresh {
            sizes.pop();
        } else {
            sizes[b] -= 1;
        }
        labels.pop();
    }
}

/// Bell number `B_n`, the number of set partitions of `n` points.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Catalan number `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan_number(n: usize) -> u128 {
    (0..n).fold(1u128, |c, k| c * 2 * (2 * k as u128 + 1) / (k as u128 + 2))
}
