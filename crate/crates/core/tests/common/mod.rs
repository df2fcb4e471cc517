#![allow(dead_code)]

use blockwish::partition::enumerate_noncrossing;
use blockwish::{ChoiMatrix, Exponent, ExponentWord, Partition, Permutation};
use num_complex::Complex64;

pub fn lit(s: &str) -> Partition {
    s.parse().unwrap()
}

pub fn word(s: &str) -> ExponentWord {
    s.parse().unwrap()
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The four partitions of `P_even(2,2)`: identity, transpose, trace-unit, diagonal.
pub const BASIC: [&str; 4] = ["ab/ab", "ab/ba", "aa/bb", "aa/aa"];

pub fn nc_perms(p: usize) -> Vec<Permutation> {
    enumerate_noncrossing(p).unwrap().iter().map(|s| Permutation::from_noncrossing(s).unwrap()).collect()
}

/// Odometer over `[n]^len`.
pub fn tuples(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total).map(move |mut k| {
        let mut t = vec![0; len];
        for slot in t.iter_mut().rev() {
            *slot = k % n;
            k /= n;
        }
        t
    })
}

/// Unnormalized `Σ_{i,j} Π_x Λ^{e_x}_{i_x j_x, i_σ(x) j_τ(x)}`, summed term by term with
/// `Λ*_{ab,cd} = conj(Λ_{cd,ab})`.
pub fn naive_raw_moment(choi: &ChoiMatrix, sigma: &Permutation, tau: &Permutation, e: &ExponentWord) -> Complex64 {
    let n = choi.inner_dim();
    let p = e.len();
    let mut total = Complex64::new(0.0, 0.0);
    for i in tuples(n, p) {
        for j in tuples(n, p) {
            let mut term = Complex64::new(1.0, 0.0);
            for x in 0..p {
                let (a, b, c, d) = (i[x], j[x], i[sigma.apply(x)], j[tau.apply(x)]);
                term *= match e.letters()[x] {
                    Exponent::One => choi.entry(a, b, c, d),
                    Exponent::Star => choi.entry(c, d, a, b).conj(),
                };
                if term == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            total += term;
        }
    }
    total
}

pub fn naive_moment(choi: &ChoiMatrix, sigma: &Permutation, tau: &Permutation, e: &ExponentWord) -> Complex64 {
    let n = choi.inner_dim() as f64;
    naive_raw_moment(choi, sigma, tau, e) / n.powi((sigma.cycle_count() + tau.cycle_count()) as i32)
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// `n^k` as an exact float.
pub fn int_pow(n: usize, k: i64) -> f64 {
    assert!(k >= 0, "negative exponent {k}");
    (n as u64).pow(k as u32) as f64
}
