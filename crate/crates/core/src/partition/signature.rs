use std::collections::{HashSet, VecDeque};

use super::{canonical_labels, word_is_noncrossing, Partition};
use crate::error::{Error, Result};

/// Largest number of points accepted by [`signature_by_switch_search`].
pub const SWITCH_SEARCH_LIMIT: usize = 10;

fn chords_cross(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 < b.0 && b.0 < a.1 && a.1 < b.1) || (b.0 < a.0 && a.0 < b.1 && b.1 < a.1)
}

/// Number of crossing pairs of chords of a pairing, in boundary order.
pub fn crossing_count(pairing: &Partition) -> Result<usize> {
    if !pairing.is_pairing() {
        return Err(Error::Invalid(format!("{pairing} is not a pairing")));
    }
    let chords: Vec<(usize, usize)> = pairing.boundary_blocks().iter().map(|b| (b[0], b[1])).collect();
    Ok(count_crossings(&chords))
}

fn count_crossings(chords: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for (t, &a) in chords.iter().enumerate() {
        count += chords[t + 1..].iter().filter(|&&b| chords_cross(a, b)).count();
    }
    count
}

/// Twisting signature `ε(π) ∈ {+1, -1}` of a partition with even blocks.
///
/// Each block is refined into the pairs of consecutive legs (first with second,
/// third with fourth, …) along the boundary; the signature is the crossing parity
/// of that refinement.
pub fn signature(pi: &Partition) -> Result<i32> {
    if !pi.is_even() {
        return Err(Error::OddBlock);
    }
    Ok(word_signature(&pi.boundary_word()))
}

/// Signature of an even boundary word, without validation.
pub(crate) fn word_signature(word: &[usize]) -> i32 {
    let blocks = word.iter().max().map_or(0, |&m| m + 1);
    let mut open = vec![usize::MAX; blocks];
    let mut chords = Vec::with_capacity(word.len() / 2);
    for (pos, &b) in word.iter().enumerate() {
        if open[b] == usize::MAX {
            open[b] = pos;
        } else {
            chords.push((open[b], pos));
            open[b] = usize::MAX;
        }
    }
    if count_crossings(&chords).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Signature by brute force: breadth-first search over adjacent leg switches along
/// the boundary until a noncrossing arrangement appears; the parity of the shortest
/// switch sequence gives the sign.
pub fn signature_by_switch_search(pi: &Partition) -> Result<i32> {
    if !pi.is_even() {
        return Err(Error::OddBlock);
    }
    if pi.point_count() > SWITCH_SEARCH_LIMIT {
        return Err(Error::TooLarge { points: pi.point_count(), limit: SWITCH_SEARCH_LIMIT });
    }
    let start = canonical_labels(pi.boundary_word());
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((word, dist)) = queue.pop_front() {
        if word_is_noncrossing(&word) {
            return Ok(if dist % 2 == 0 { 1 } else { -1 });
        }
        for t in 1..word.len() {
            if word[t - 1] == word[t] {
                continue;
            }
            let mut next = word.clone();
            next.swap(t - 1, t);
            let next = canonical_labels(next);
            if seen.insert(next.clone()) {
                queue.push_back((next, dist + 1));
            }
        }
    }
    unreachable!("a word with all labels grouped together is noncrossing")
}
