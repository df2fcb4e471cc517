//! Block-modification maps `φ: M_n → M_n`, their Choi matrices, and the easy and
//! twisted maps attached to partitions.
//!
//! Layouts used throughout:
//! - a Choi matrix `Λ` on `C^n ⊗ C^n` has row `(a, b) ↦ a·n + b` and column
//!   `(c, d) ↦ c·n + d`, with `Λ_{ab,cd} = φ(e_ac)_bd`;
//! - [`LinearBlockMap::action`] acts on vectorized matrices where `e_ac ↦ a·n + c`;
//! - a block matrix of size `dn × dn` has row `(i, a) ↦ i·n + a`;
//! - a multi-index `(a_1, …, a_s)` over `N` letters is read big-endian,
//!   `a_1·N^{s-1} + … + a_s`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::partition::{signature, Partition};

pub type CMatrix = DMatrix<Complex64>;

/// Largest `n` accepted when building dense Choi matrices (`n⁴` entries).
pub const MAX_INNER_DIM: usize = 32;

/// Largest number of entries of a dense tensor map.
pub const MAX_TENSOR_ENTRIES: usize = 1 << 24;

/// The Choi matrix `Λ ∈ M_n ⊗ M_n` of a block map.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    n: usize,
    base: Option<(usize, usize)>,
    entries: CMatrix,
}

impl ChoiMatrix {
    pub fn new(n: usize, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != n * n || entries.ncols() != n * n {
            return Err(Error::Dimension { expected: n * n, found: entries.nrows().max(entries.ncols()) });
        }
        Ok(Self { n, base: None, entries })
    }

    /// Attach the `(N, s)` metadata of an easy construction, `n = N^s`.
    pub fn with_base(mut self, base_dim: usize, depth: usize) -> Self {
        self.base = Some((base_dim, depth));
        self
    }

    pub fn inner_dim(&self) -> usize {
        self.n
    }

    /// `(N, s)` when the matrix came from a partition.
    pub fn base(&self) -> Option<(usize, usize)> {
        self.base
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `Λ_{ab,cd}`.
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.entries[(a * self.n + b, c * self.n + d)]
    }

    /// The conjugate transpose `Λ*`.
    pub fn adjoint(&self) -> Self {
        Self { n: self.n, base: self.base, entries: self.entries.adjoint() }
    }

    /// Largest entrywise deviation `|Λ - Λ*|`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        let adj = self.entries.adjoint();
        self.entries.iter().zip(adj.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol
    }

    /// True when every entry is an exact small integer.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() < 1e15)
    }
}

/// A linear map `φ: M_n → M_n` stored by its action on vectorized matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearBlockMap {
    n: usize,
    action: CMatrix,
}

impl LinearBlockMap {
    pub fn new(n: usize, action: CMatrix) -> Result<Self> {
        if action.nrows() != n * n || action.ncols() != n * n {
            return Err(Error::Dimension { expected: n * n, found: action.nrows().max(action.ncols()) });
        }
        Ok(Self { n, action })
    }

    /// Tabulate a map given as a closure on matrices.
    pub fn from_fn(n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let mut action = CMatrix::zeros(n * n, n * n);
        for a in 0..n {
            for c in 0..n {
                let mut unit = CMatrix::zeros(n, n);
                unit[(a, c)] = Complex64::new(1.0, 0.0);
                let image = f(&unit);
                if image.shape() != (n, n) {
                    return Err(Error::Dimension { expected: n, found: image.nrows() });
                }
                for b in 0..n {
                    for d in 0..n {
                        action[(b * n + d, a * n + c)] = image[(b, d)];
                    }
                }
            }
        }
        Ok(Self { n, action })
    }

    pub fn inner_dim(&self) -> usize {
        self.n
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    pub fn apply(&self, matrix: &CMatrix) -> Result<CMatrix> {
        let n = self.n;
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension { expected: n, found: matrix.nrows() });
        }
        let mut out = CMatrix::zeros(n, n);
        for b in 0..n {
            for d in 0..n {
                let row = b * n + d;
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    for c in 0..n {
                        acc += self.action[(row, a * n + c)] * matrix[(a, c)];
                    }
                }
                out[(b, d)] = acc;
            }
        }
        Ok(out)
    }
}

/// `Λ_{ab,cd} = φ(e_ac)_bd`.
pub fn choi_from_map(map: &LinearBlockMap) -> ChoiMatrix {
    let n = map.n;
    let mut entries = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    entries[(a * n + b, c * n + d)] = map.action[(b * n + d, a * n + c)];
                }
            }
        }
    }
    ChoiMatrix { n, base: None, entries }
}

/// Inverse of [`choi_from_map`].
pub fn map_from_choi(choi: &ChoiMatrix) -> LinearBlockMap {
    let n = choi.n;
    let mut action = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    action[(b * n + d, a * n + c)] = choi.entries[(a * n + b, c * n + d)];
                }
            }
        }
    }
    LinearBlockMap { n, action }
}

/// Big-endian digits of `x` in base `base`, exactly `len` of them.
pub(crate) fn digits(mut x: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
    out
}

fn easy_depth(pi: &Partition) -> Result<usize> {
    let (k, l) = (pi.upper_count(), pi.lower_count());
    if k != l || k % 2 != 0 || k == 0 {
        return Err(Error::Shape(format!("expected a partition in P(2s,2s), got P({k},{l})")));
    }
    Ok(k / 2)
}

fn inner_dim_for(base_dim: usize, depth: usize) -> Result<usize> {
    if base_dim == 0 {
        return Err(Error::Invalid("base dimension N must be at least 1".into()));
    }
    let n = (base_dim as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if n > MAX_INNER_DIM as u128 {
        return Err(Error::Invalid(format!("inner dimension N^s = {base_dim}^{depth} exceeds {MAX_INNER_DIM}")));
    }
    Ok(n as usize)
}

/// Fill `Λ` from an entry rule on the index table `((a, c), (b, d))`.
fn choi_from_rule(pi: &Partition, base_dim: usize, rule: impl Fn(&[usize], &[usize]) -> f64) -> Result<ChoiMatrix> {
    let s = easy_depth(pi)?;
    let n = inner_dim_for(base_dim, s)?;
    let multi: Vec<Vec<usize>> = (0..n).map(|x| digits(x, base_dim, s)).collect();
    let mut entries = CMatrix::zeros(n * n, n * n);
    let mut upper = vec![0; 2 * s];
    let mut lower = vec![0; 2 * s];
    for a in 0..n {
        for c in 0..n {
            upper[..s].copy_from_slice(&multi[a]);
            upper[s..].copy_from_slice(&multi[c]);
            for b in 0..n {
                for d in 0..n {
                    lower[..s].copy_from_slice(&multi[b]);
                    lower[s..].copy_from_slice(&multi[d]);
                    let value = rule(&upper, &lower);
                    if value != 0.0 {
                        entries[(a * n + b, c * n + d)] = Complex64::new(value, 0.0);
                    }
                }
            }
        }
    }
    Ok(ChoiMatrix { n, base: Some((base_dim, s)), entries })
}

/// `Λ_π` for `π ∈ P(2s, 2s)`: entry `δ_π(a c / b d)` at row `(a, b)`, column `(c, d)`.
pub fn easy_choi(pi: &Partition, base_dim: usize) -> Result<ChoiMatrix> {
    choi_from_rule(pi, base_dim, |up, low| {
        if pi.delta_unchecked(up.iter().chain(low)) {
            1.0
        } else {
            0.0
        }
    })
}

/// `Λ̄_π` for `π ∈ P_even(2s, 2s)`: entry `ε(ker(a c / b d))` where `δ_π = 1`, else 0.
pub fn twisted_choi(pi: &Partition, base_dim: usize) -> Result<ChoiMatrix> {
    if !pi.is_even() {
        return Err(Error::OddBlock);
    }
    choi_from_rule(pi, base_dim, |up, low| {
        if pi.delta_unchecked(up.iter().chain(low)) {
            let kernel = Partition::kernel(up, low);
            signature(&kernel).expect("a kernel coarser than an even partition is even") as f64
        } else {
            0.0
        }
    })
}

fn tensor_from_rule(pi: &Partition, base_dim: usize, rule: impl Fn(&[usize], &[usize]) -> f64) -> Result<CMatrix> {
    let (k, l) = (pi.upper_count(), pi.lower_count());
    let size = |p: usize| (base_dim as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
    let (cols, rows) = (size(k), size(l));
    if base_dim == 0 || cols.saturating_mul(rows) > MAX_TENSOR_ENTRIES as u128 {
        return Err(Error::Invalid(format!("tensor map of size {rows}x{cols} is too large")));
    }
    let (cols, rows) = (cols as usize, rows as usize);
    let mut out = CMatrix::zeros(rows, cols);
    for col in 0..cols {
        let i = digits(col, base_dim, k);
        for row in 0..rows {
            let j = digits(row, base_dim, l);
            let value = rule(&i, &j);
            if value != 0.0 {
                out[(row, col)] = Complex64::new(value, 0.0);
            }
        }
    }
    Ok(out)
}

/// `T_π: (C^N)^{⊗k} → (C^N)^{⊗l}`, `T_π(e_i) = Σ_j δ_π(i / j) e_j`, as an `N^l × N^k` matrix.
pub fn tensor_map(pi: &Partition, base_dim: usize) -> Result<CMatrix> {
    tensor_from_rule(pi, base_dim, |i, j| if pi.delta_unchecked(i.iter().chain(j)) { 1.0 } else { 0.0 })
}

/// `T̄_π`, with each nonzero term weighted by the signature of the index kernel.
pub fn twisted_tensor_map(pi: &Partition, base_dim: usize) -> Result<CMatrix> {
    if !pi.is_even() {
        return Err(Error::OddBlock);
    }
    tensor_from_rule(pi, base_dim, |i, j| {
        if pi.delta_unchecked(i.iter().chain(j)) {
            signature(&Partition::kernel(i, j)).expect("kernel is even") as f64
        } else {
            0.0
        }
    })
}

/// The named block maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinMap {
    /// `A ↦ A`.
    Identity,
    /// `A ↦ Aᵗ`.
    Transpose,
    /// `A ↦ Tr(A)·1`.
    TraceUnit,
    /// `A ↦ A^δ`, the diagonal part.
    Diagonal,
    /// `A ↦ 2A^δ - Aᵗ`, the twisted crossing.
    TwistedCrossing,
    /// `A ↦ EA` with `E = diag(1, w, w², …)`, `w = exp(2πi/r)`; `r` defaults to `n`.
    Bessel { order: Option<usize> },
}

impl BuiltinMap {
    pub const NAMES: [&'static str; 6] = ["identity", "transpose", "trace-unit", "diagonal", "twisted-crossing", "bessel"];

    /// The partition in `P_even(2,2)` realizing this map, when there is one.
    pub fn partition(self) -> Option<Partition> {
        let literal = match self {
            BuiltinMap::Identity => "ab/ab",
            BuiltinMap::Transpose | BuiltinMap::TwistedCrossing => "ab/ba",
            BuiltinMap::TraceUnit => "aa/bb",
            BuiltinMap::Diagonal => "aa/aa",
            BuiltinMap::Bessel { .. } => return None,
        };
        Some(literal.parse().expect("literal is valid"))
    }

    /// The diagonal of `E` for the Bessel map of inner dimension `n`.
    pub fn bessel_phases(n: usize, order: usize) -> Vec<Complex64> {
        (0..n).map(|a| crate::free_poisson::root_of_unity(a % order, order)).collect()
    }

    pub fn build(self, n: usize) -> Result<LinearBlockMap> {
        if n == 0 {
            return Err(Error::Invalid("inner dimension must be at least 1".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        match self {
            BuiltinMap::Identity => LinearBlockMap::from_fn(n, |a| a.clone()),
            BuiltinMap::Transpose => LinearBlockMap::from_fn(n, |a| a.transpose()),
            BuiltinMap::TraceUnit => LinearBlockMap::from_fn(n, |a| CMatrix::identity(n, n) * a.trace()),
            BuiltinMap::Diagonal => LinearBlockMap::from_fn(n, |a| CMatrix::from_diagonal(&a.diagonal())),
            BuiltinMap::TwistedCrossing => LinearBlockMap::from_fn(n, |a| {
                CMatrix::from_diagonal(&a.diagonal()) * (one * 2.0) - a.transpose()
            }),
            BuiltinMap::Bessel { order } => {
                let order = order.unwrap_or(n);
                if order == 0 || !n.is_multiple_of(order) {
                    return Err(Error::Invalid(format!("bessel order {order} must divide the inner dimension {n}")));
                }
                let e = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(Self::bessel_phases(n, order)));
                LinearBlockMap::from_fn(n, |a| &e * a)
            }
        }
    }
}

impl fmt::Display for BuiltinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinMap::Identity => f.write_str("identity"),
            BuiltinMap::Transpose => f.write_str("transpose"),
            BuiltinMap::TraceUnit => f.write_str("trace-unit"),
            BuiltinMap::Diagonal => f.write_str("diagonal"),
            BuiltinMap::TwistedCrossing => f.write_str("twisted-crossing"),
            BuiltinMap::Bessel { order: None } => f.write_str("bessel"),
            BuiltinMap::Bessel { order: Some(r) } => write!(f, "bessel:{r}"),
        }
    }
}

impl FromStr for BuiltinMap {
    type Err = Error;

    /// Accepts the names in [`BuiltinMap::NAMES`]; the Bessel order may be given as
    /// `bessel:r` or `bessel(r)`.
    fn from_str(name: &str) -> Result<Self> {
        let name = name.trim();
        Ok(match name {
            "identity" => BuiltinMap::Identity,
            "transpose" => BuiltinMap::Transpose,
            "trace-unit" => BuiltinMap::TraceUnit,
            "diagonal" => BuiltinMap::Diagonal,
            "twisted-crossing" => BuiltinMap::TwistedCrossing,
            "bessel" => BuiltinMap::Bessel { order: None },
            _ => {
                let order = name
                    .strip_prefix("bessel:")
                    .or_else(|| name.strip_prefix("bessel(").and_then(|r| r.strip_suffix(')')))
                    .and_then(|r| r.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownMap(name.to_string()))?;
                BuiltinMap::Bessel { order: Some(order) }
            }
        })
    }
}

/// Build a named map of inner dimension `n`.
pub fn builtin_map(name: &str, n: usize) -> Result<LinearBlockMap> {
    name.parse::<BuiltinMap>()?.build(n)
}

/// `W̃ = (id ⊗ φ)W` for a `dn × dn` block matrix `W`.
pub fn apply_block_modification(w: &CMatrix, map: &LinearBlockMap, d: usize, n: usize) -> Result<CMatrix> {
    if map.n != n {
        return Err(Error::Dimension { expected: n, found: map.n });
    }
    if w.shape() != (d * n, d * n) {
        return Err(Error::Dimension { expected: d * n, found: w.nrows() });
    }
    let mut out = CMatrix::zeros(d * n, d * n);
    let mut block = nalgebra::DVector::<Complex64>::zeros(n * n);
    for i in 0..d {
        for j in 0..d {
            for c in 0..n {
                for e in 0..n {
                    block[c * n + e] = w[(i * n + c, j * n + e)];
                }
            }
            let image = &map.action * &block;
            for a in 0..n {
                for b in 0..n {
                    out[(i * n + a, j * n + b)] = image[a * n + b];
                }
            }
        }
    }
    Ok(out)
}

/// Write a matrix as CSV: one line per row, each entry as an `re,im` pair.
pub fn write_matrix_csv(matrix: &CMatrix, mut out: impl Write) -> Result<()> {
    for r in 0..matrix.nrows() {
        let fields: Vec<String> = (0..matrix.ncols()).map(|c| format!("{},{}", matrix[(r, c)].re, matrix[(r, c)].im)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Read the CSV layout written by [`write_matrix_csv`].
pub fn read_matrix_csv(input: impl Read) -> Result<CMatrix> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("bad number {v:?}: {e}"))))
            .collect::<Result<_>>()?;
        if !values.len().is_multiple_of(2) {
            return Err(Error::Invalid("odd number of fields in a CSV row".into()));
        }
        rows.push(values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Invalid("ragged CSV matrix".into()));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

/// Binary dump: `u64` rows and columns, then row-major entries as `f64` pairs, all little-endian.
pub fn write_matrix_binary(matrix: &CMatrix, mut out: impl Write) -> Result<()> {
    out.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
    out.write_all(&(matrix.ncols() as u64).to_le_bytes())?;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            out.write_all(&matrix[(r, c)].re.to_le_bytes())?;
            out.write_all(&matrix[(r, c)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read the layout written by [`write_matrix_binary`].
pub fn read_matrix_binary(mut input: impl Read) -> Result<CMatrix> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut dyn Read| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let rows = u64::from_le_bytes(next(&mut input)?) as usize;
    let cols = u64::from_le_bytes(next(&mut input)?) as usize;
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = f64::from_le_bytes(next(&mut input)?);
        let im = f64::from_le_bytes(next(&mut input)?);
        values.push(Complex64::new(re, im));
    }
    Ok(CMatrix::from_row_slice(rows, cols, &values))
}
