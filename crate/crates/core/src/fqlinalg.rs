//! Square matrices over `F_q`: determinants and minors, the big-cell factorization
//! `g = b u`, unipotent parametrizations, block anti-diagonal representatives and the
//! minor identities for `u w_0`.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::gfq::{Fq, FqField, GfqError};

/// Default bound on the number of elements an enumeration may produce.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error(transparent)]
    Field(#[from] GfqError),
    #[error("matrix is singular")]
    Singular,
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("enumeration of {count} elements exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u64 },
    #[error("zero denominator at y[{k},{i}]")]
    ZeroDenominator { k: usize, i: usize },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatFq {
    n: usize,
    data: Vec<Fq>,
}

impl fmt::Debug for MatFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.raw().to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl MatFq {
    pub fn zero(n: usize) -> MatFq {
        MatFq {
            n,
            data: vec![Fq::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> MatFq {
        let mut m = MatFq::zero(n);
        for i in 0..n {
            m.set(i, i, Fq::ONE);
        }
        m
    }

    pub fn diag(d: &[Fq]) -> MatFq {
        let mut m = MatFq::zero(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fq>]) -> Result<MatFq, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Malformed("rows must form a square matrix".into()));
        }
        Ok(MatFq {
            n,
            data: rows.concat(),
        })
    }

    /// Builds a matrix from integer entries reduced into `field`.
    pub fn from_ints(field: &FqField, rows: &[Vec<i64>]) -> Result<MatFq, LinalgError> {
        let rows: Vec<Vec<Fq>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_int(v)).collect())
            .collect();
        MatFq::from_rows(&rows)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Fq) -> MatFq {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        MatFq { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[Fq] {
        &self.data
    }

    pub fn mul(&self, other: &MatFq, f: &FqField) -> MatFq {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        let n = self.n;
        let mut out = MatFq::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j);
                        out.set(i, j, f.add(cur, f.mul(a, b)));
                    }
                }
            }
        }
        out
    }

    pub fn checked_mul(&self, other: &MatFq, f: &FqField) -> Result<MatFq, LinalgError> {
        if self.n != other.n {
            return Err(LinalgError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self.mul(other, f))
    }

    pub fn transpose(&self) -> MatFq {
        MatFq::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn diagonal(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.n).map(move |i| self.get(i, i))
    }

    pub fn superdiagonal_sum(&self, f: &FqField) -> Fq {
        (1..self.n).fold(Fq::ZERO, |acc, i| f.add(acc, self.get(i - 1, i)))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_unipotent_upper(&self) -> bool {
        (0..self.n).all(|i| {
            self.get(i, i) == Fq::ONE && (0..i).all(|j| self.get(i, j).is_zero())
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Exactly one nonzero entry in every row and column.
    pub fn is_monomial(&self) -> bool {
        let mut seen = vec![false; self.n];
        for i in 0..self.n {
            let nz: Vec<usize> = (0..self.n).filter(|&j| !self.get(i, j).is_zero()).collect();
            if nz.len() != 1 || seen[nz[0]] {
                return false;
            }
            seen[nz[0]] = true;
        }
        true
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self, f: &FqField) -> Fq {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Fq::ONE;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return Fq::ZERO;
            };
            if piv != c {
                for j in 0..n {
                    a.swap(c * n + j, piv * n + j);
                }
                det = f.neg(det);
            }
            let d = a[c * n + c];
            det = f.mul(det, d);
            let inv = f.inv(d).expect("pivot is nonzero");
            for r in c + 1..n {
                let factor = f.mul(a[r * n + c], inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    a[r * n + j] = f.sub(a[r * n + j], f.mul(factor, a[c * n + j]));
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self, f: &FqField) -> Result<MatFq, LinalgError> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = MatFq::identity(n).data;
        for c in 0..n {
            let piv = (c..n).find(|&r| !a[r * n + c].is_zero()).ok_or(LinalgError::Singular)?;
            for j in 0..n {
                a.swap(c * n + j, piv * n + j);
                inv.swap(c * n + j, piv * n + j);
            }
            let d = f.inv(a[c * n + c])?;
            for j in 0..n {
                a[c * n + j] = f.mul(a[c * n + j], d);
                inv[c * n + j] = f.mul(inv[c * n + j], d);
            }
            for r in (0..n).filter(|&r| r != c) {
                let factor = a[r * n + c];
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] = f.sub(a[r * n + j], f.mul(factor, a[c * n + j]));
                    inv[r * n + j] = f.sub(inv[r * n + j], f.mul(factor, inv[c * n + j]));
                }
            }
        }
        Ok(MatFq { n, data: inv })
    }

    /// Determinant by Laplace expansion along the first row.
    pub fn det_cofactor(&self, f: &FqField) -> Fq {
        fn rec(m: &MatFq, f: &FqField) -> Fq {
            match m.n {
                0 => Fq::ONE,
                1 => m.get(0, 0),
                n => {
                    let mut acc = Fq::ZERO;
                    for j in 0..n {
                        let e = m.get(0, j);
                        if e.is_zero() {
                            continue;
                        }
                        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                        let rows: Vec<usize> = (1..n).collect();
                        let term = f.mul(e, rec(&m.submatrix(&rows, &cols), f));
                        acc = if j % 2 == 0 {
                            f.add(acc, term)
                        } else {
                            f.sub(acc, term)
                        };
                    }
                    acc
                }
            }
        }
        rec(self, f)
    }

    /// Submatrix on 0-based row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> MatFq {
        assert_eq!(rows.len(), cols.len());
        MatFq::from_fn(rows.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// `|M_{IJ}|` for 1-based index sets.
    pub fn minor(&self, rows: &[usize], cols: &[usize], f: &FqField) -> Result<Fq, LinalgError> {
        if rows.len() != cols.len() {
            return Err(LinalgError::Malformed("row and column sets differ in size".into()));
        }
        let to0 = |set: &[usize]| -> Result<Vec<usize>, LinalgError> {
            let mut out = Vec::with_capacity(set.len());
            for &i in set {
                if i == 0 || i > self.n {
                    return Err(LinalgError::IndexOutOfRange {
                        index: i,
                        max: self.n,
                    });
                }
                if out.contains(&(i - 1)) {
                    return Err(LinalgError::Malformed(format!("repeated index {i}")));
                }
                out.push(i - 1);
            }
            Ok(out)
        };
        let (r, c) = (to0(rows)?, to0(cols)?);
        Ok(self.submatrix(&r, &c).det(f))
    }

    /// `Delta_i`: the top-left `i x i` minor, with `Delta_0 = 1`.
    pub fn principal_minor(&self, i: usize, f: &FqField) -> Result<Fq, LinalgError> {
        if i > self.n {
            return Err(LinalgError::IndexOutOfRange {
                index: i,
                max: self.n,
            });
        }
        let idx: Vec<usize> = (0..i).collect();
        Ok(self.submatrix(&idx, &idx).det(f))
    }

    /// `Delta_{i,i+1}`: rows `1..i`, columns `1..i-1` and `i+1`.
    pub fn shifted_minor(&self, i: usize, f: &FqField) -> Result<Fq, LinalgError> {
        if i == 0 || i >= self.n {
            return Err(LinalgError::IndexOutOfRange {
                index: i,
                max: self.n.saturating_sub(1),
            });
        }
        let rows: Vec<usize> = (0..i).collect();
        let mut cols: Vec<usize> = (0..i - 1).collect();
        cols.push(i);
        Ok(self.submatrix(&rows, &cols).det(f))
    }

    /// `g = b u` with `b` lower triangular and `u` unit upper triangular, when `g` lies in
    /// the big cell; `None` otherwise.
    pub fn big_cell_factorize(&self, f: &FqField) -> Result<Option<(MatFq, MatFq)>, LinalgError> {
        if self.det(f).is_zero() {
            return Err(LinalgError::Singular);
        }
        let n = self.n;
        let mut b = MatFq::zero(n);
        let mut u = MatFq::identity(n);
        for j in 0..n {
            for i in j..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = f.sub(s, f.mul(b.get(i, k), u.get(k, j)));
                }
                b.set(i, j, s);
            }
            let d = b.get(j, j);
            if d.is_zero() {
                return Ok(None);
            }
            let dinv = f.inv(d)?;
            for i in j + 1..n {
                let mut s = self.get(j, i);
                for k in 0..j {
                    s = f.sub(s, f.mul(b.get(j, k), u.get(k, i)));
                }
                u.set(j, i, f.mul(s, dinv));
            }
        }
        Ok(Some((b, u)))
    }

    /// Diagonal of `b` and superdiagonal of `u` in `g = b u`, without building the factors.
    /// Returns `false` when `g` is off the big cell. `g` is assumed invertible.
    pub fn big_cell_data(&self, f: &FqField, diag: &mut Vec<Fq>, sup: &mut Vec<Fq>) -> bool {
        // Crout elimination on a scratch copy: column j of b, then row j of u.
        let n = self.n;
        let mut a = self.data.clone();
        diag.clear();
        sup.clear();
        for j in 0..n {
            for i in j..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = f.sub(s, f.mul(a[i * n + k], a[k * n + j]));
                }
                a[i * n + j] = s;
            }
            let d = a[j * n + j];
            if d.is_zero() {
                return false;
            }
            diag.push(d);
            let dinv = f.inv(d).expect("nonzero pivot");
            for i in j + 1..n {
                let mut s = a[j * n + i];
                for k in 0..j {
                    s = f.sub(s, f.mul(a[j * n + k], a[k * n + i]));
                }
                a[j * n + i] = f.mul(s, dinv);
            }
            if j + 1 < n {
                sup.push(a[j * n + j + 1]);
            }
        }
        true
    }

    /// Row-major entries as discrete logarithms, `null` for zero, with the field descriptor.
    pub fn to_json(&self, f: &FqField) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .data
            .iter()
            .map(|&x| match f.dlog(x) {
                Some(t) => json!(t),
                None => serde_json::Value::Null,
            })
            .collect();
        json!({
            "field": {"p": f.p(), "k": f.k(), "generator": f.generator().raw()},
            "n": self.n,
            "entries": entries,
        })
    }

    pub fn from_json(f: &FqField, v: &serde_json::Value) -> Result<MatFq, LinalgError> {
        let bad = |s: &str| LinalgError::Malformed(s.to_string());
        let field = v.get("field").ok_or_else(|| bad("missing field"))?;
        if field.get("p").and_then(|x| x.as_u64()) != Some(f.p() as u64)
            || field.get("k").and_then(|x| x.as_u64()) != Some(f.k() as u64)
        {
            return Err(bad("field descriptor does not match"));
        }
        let n = v.get("n").and_then(|x| x.as_u64()).ok_or_else(|| bad("missing n"))? as usize;
        let entries = v
            .get("entries")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing entries"))?;
        if entries.len() != n * n {
            return Err(bad("entry count is not n^2"));
        }
        let data = entries
            .iter()
            .map(|e| match e {
                serde_json::Value::Null => Ok(Fq::ZERO),
                e => e
                    .as_u64()
                    .filter(|&t| t < (f.q() - 1) as u64)
                    .map(|t| f.exp(t as i64))
                    .ok_or_else(|| bad("entry is not a unit index")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatFq { n, data })
    }
}

/// `g_{n_1,...,n_s}(c_1,...,c_s)`: `c_1 I_{n_1}` in the top-right corner descending to
/// `c_s I_{n_s}` in the bottom-left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockAntidiagSpec {
    parts: Vec<usize>,
    coeffs: Vec<Fq>,
}

impl BlockAntidiagSpec {
    pub fn new(parts: Vec<usize>, coeffs: Vec<Fq>) -> Result<Self, LinalgError> {
        if parts.is_empty() || parts.len() != coeffs.len() {
            return Err(LinalgError::Malformed(
                "parts and coefficients must be nonempty and of equal length".into(),
            ));
        }
        if parts.contains(&0) {
            return Err(LinalgError::Malformed("block sizes must be positive".into()));
        }
        if coeffs.iter().any(|c| c.is_zero()) {
            return Err(LinalgError::Malformed("block coefficients must be units".into()));
        }
        Ok(BlockAntidiagSpec { parts, coeffs })
    }

    /// The anti-diagonal matrix with `a_1` in the top-right corner.
    pub fn antidiag(a: &[Fq]) -> Result<Self, LinalgError> {
        BlockAntidiagSpec::new(vec![1; a.len()], a.to_vec())
    }

    /// `g_{n-1,1}(1, a)`.
    pub fn max_right(n: usize, a: Fq) -> Result<Self, LinalgError> {
        if n < 2 {
            return Err(LinalgError::Malformed("n must be at least 2".into()));
        }
        BlockAntidiagSpec::new(vec![n - 1, 1], vec![Fq::ONE, a])
    }

    /// `g_{1,n-1}(a, 1)`.
    pub fn max_left(n: usize, a: Fq) -> Result<Self, LinalgError> {
        if n < 2 {
            return Err(LinalgError::Malformed("n must be at least 2".into()));
        }
        BlockAntidiagSpec::new(vec![1, n - 1], vec![a, Fq::ONE])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn matrix(&self) -> MatFq {
        let n = self.n();
        let mut m = MatFq::zero(n);
        let mut row = 0;
        let mut col_end = n;
        for (&len, &c) in self.parts.iter().zip(&self.coeffs) {
            let col = col_end - len;
            for l in 0..len {
                m.set(row + l, col + l, c);
            }
            row += len;
            col_end = col;
        }
        m
    }

    /// Recovers the spec when `m` is a block anti-diagonal representative.
    pub fn recognize(m: &MatFq) -> Option<BlockAntidiagSpec> {
        if !m.is_monomial() {
            return None;
        }
        let n = m.n();
        let mut parts = Vec::new();
        let mut coeffs = Vec::new();
        let mut row = 0;
        let mut col_end = n;
        while row < n {
            let col = (0..n).find(|&j| !m.get(row, j).is_zero())?;
            if col >= col_end {
                return None;
            }
            let len = col_end - col;
            if row + len > n {
                return None;
            }
            let c = m.get(row, col);
            if (0..len).any(|l| m.get(row + l, col + l) != c) {
                return None;
            }
            parts.push(len);
            coeffs.push(c);
            row += len;
            col_end = col;
        }
        (col_end == 0).then_some(BlockAntidiagSpec { parts, coeffs })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecialMatrix {
    Identity,
    /// Anti-diagonal of ones.
    W0,
    /// `[[0, I_{n-1}], [1, 0]]`.
    W1,
    Diag(Vec<Fq>),
    BlockAntidiag(BlockAntidiagSpec),
}

pub fn mat_special(n: usize, kind: &SpecialMatrix) -> Result<MatFq, LinalgError> {
    let check = |m: usize| {
        if m == n {
            Ok(())
        } else {
            Err(LinalgError::SizeMismatch { left: n, right: m })
        }
    };
    match kind {
        SpecialMatrix::Identity => Ok(MatFq::identity(n)),
        SpecialMatrix::W0 => Ok(BlockAntidiagSpec::antidiag(&vec![Fq::ONE; n])?.matrix()),
        SpecialMatrix::W1 => Ok(BlockAntidiagSpec::max_right(n, Fq::ONE)?.matrix()),
        SpecialMatrix::Diag(d) => {
            check(d.len())?;
            Ok(MatFq::diag(d))
        }
        SpecialMatrix::BlockAntidiag(spec) => {
            check(spec.n())?;
            Ok(spec.matrix())
        }
    }
}

/// Entries `y_{k,i}`, `1 <= i <= k <= n-1`, of `u = prod_k (I + sum_{i<=k} y_{k,i} E_{i,i+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnipotentParam {
    n: usize,
    y: Vec<Fq>,
}

impl UnipotentParam {
    pub fn new(n: usize, y: Vec<Fq>) -> Result<Self, LinalgError> {
        if n == 0 || y.len() != n * (n - 1) / 2 {
            return Err(LinalgError::Malformed(format!(
                "expected {} parameters for n = {n}",
                n * n.saturating_sub(1) / 2
            )));
        }
        Ok(UnipotentParam { n, y })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Fq) -> Self {
        let mut y = Vec::with_capacity(n * (n - 1) / 2);
        for k in 1..n {
            for i in 1..=k {
                y.push(f(k, i));
            }
        }
        UnipotentParam { n, y }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Fq] {
        &self.y
    }

    /// `y_{k,i}` (1-based); `y_{n,i} = 1` and `y_{k,0} = 0` by convention.
    pub fn y(&self, k: usize, i: usize) -> Fq {
        if k == self.n {
            Fq::ONE
        } else if i == 0 {
            Fq::ZERO
        } else {
            debug_assert!(1 <= i && i <= k && k < self.n);
            self.y[(k - 1) * k / 2 + i - 1]
        }
    }

    /// The parameters with `k <= n-2`, describing `u^{(n-1)}`.
    pub fn truncate(&self) -> UnipotentParam {
        let m = self.n - 1;
        UnipotentParam {
            n: m,
            y: self.y[..m * (m - 1) / 2].to_vec(),
        }
    }
}

pub fn unipotent_from_param(param: &UnipotentParam, f: &FqField) -> MatFq {
    unipotent_from_param_sized(param, param.n, f)
}

/// Same product evaluated inside `GL(size)` with `size >= n`.
fn unipotent_from_param_sized(param: &UnipotentParam, size: usize, f: &FqField) -> MatFq {
    let mut u = MatFq::identity(size);
    for k in 1..param.n {
        let mut x = MatFq::identity(size);
        for i in 1..=k {
            x.set(i - 1, i, param.y(k, i));
        }
        u = u.mul(&x, f);
    }
    u
}

/// All of `U_n` in odometer order over the above-diagonal entries, row-major,
/// last position fastest.
#[derive(Clone, Debug)]
pub struct UnipotentEnumerator {
    n: usize,
    q: u32,
    positions: Vec<(usize, usize)>,
    len: u64,
}

pub fn enumerate_unipotent(n: usize, f: &FqField, cap: u64) -> Result<UnipotentEnumerator, LinalgError> {
    let positions: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let count = (f.q() as u128).pow(positions.len() as u32);
    if count > cap as u128 {
        return Err(LinalgError::CapExceeded { count, cap });
    }
    Ok(UnipotentEnumerator {
        n,
        q: f.q(),
        positions,
        len: count as u64,
    })
}

impl UnipotentEnumerator {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `idx`-th element.
    pub fn get(&self, mut idx: u64) -> MatFq {
        let mut u = MatFq::identity(self.n);
        for &(i, j) in self.positions.iter().rev() {
            u.set(i, j, Fq::from_raw((idx % self.q as u64) as u32));
            idx /= self.q as u64;
        }
        u
    }

    pub fn iter(&self) -> impl Iterator<Item = MatFq> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

/// Closed form for `Delta_i(u w_0)`.
pub fn minor_formula_delta(param: &UnipotentParam, i: usize, f: &FqField) -> Result<Fq, LinalgError> {
    let n = param.n;
    if i == 0 || i >= n {
        return Err(LinalgError::IndexOutOfRange { index: i, max: n - 1 });
    }
    let mut acc = if (i * (i - 1) / 2) % 2 == 0 {
        Fq::ONE
    } else {
        f.neg(Fq::ONE)
    };
    for k in i..n {
        for j in k + 1 - i..=k {
            acc = f.mul(acc, param.y(k, j));
        }
    }
    Ok(acc)
}

/// Closed form for `Delta_{i,i+1}(u w_0) / Delta_i(u w_0)`.
pub fn minor_formula_ratio(param: &UnipotentParam, i: usize, f: &FqField) -> Result<Fq, LinalgError> {
    let n = param.n;
    if i == 0 || i >= n {
        return Err(LinalgError::IndexOutOfRange { index: i, max: n - 1 });
    }
    let mut sum = Fq::ZERO;
    for k in i..n {
        let mut term = Fq::ONE;
        for m in k..n {
            let j = m + 1 - i;
            let den = param.y(m, j);
            if den.is_zero() {
                return Err(LinalgError::ZeroDenominator { k: m, i: j });
            }
            term = f.mul(term, f.div(param.y(m + 1, j), den)?);
        }
        sum = f.add(sum, term);
    }
    Ok(sum)
}

/// Checks the rank recursions relating the minors of `u^{(n)} w_0^{(n)}` to those of
/// `u^{(n-1)} w_0^{(n-1)}` (both embedded in `GL(n)`), computed from raw determinants.
/// Returns `(principal recursion holds, shifted-ratio recursion holds)`.
pub fn minor_recursion_check(
    param: &UnipotentParam,
    i: usize,
    f: &FqField,
) -> Result<(bool, bool), LinalgError> {
    let n = param.n;
    if n < 2 || i == 0 || i >= n {
        return Err(LinalgError::IndexOutOfRange { index: i, max: n.saturating_sub(1) });
    }
    let big = unipotent_from_param(param, f).mul(&mat_special(n, &SpecialMatrix::W0)?, f);
    let mut w0_small = MatFq::zero(n);
    for r in 0..n - 1 {
        w0_small.set(r, n - 2 - r, Fq::ONE);
    }
    w0_small.set(n - 1, n - 1, Fq::ONE);
    let small = unipotent_from_param_sized(&param.truncate(), n, f).mul(&w0_small, f);

    let d_big = big.principal_minor(i, f)?;
    let d_small = small.principal_minor(i, f)?;
    let mut factor = Fq::ONE;
    for k in 1..=i {
        factor = f.mul(factor, param.y(n - 1, n - k));
    }
    let principal = d_big == f.mul(factor, d_small);

    let y = |k: usize, j: usize| param.y(k, j);
    let denom = y(n - 1, n - i);
    if denom.is_zero() {
        return Err(LinalgError::ZeroDenominator { k: n - 1, i: n - i });
    }
    if d_big.is_zero() || d_small.is_zero() {
        return Err(LinalgError::Singular);
    }
    let lhs = f.div(big.shifted_minor(i, f)?, d_big)?;
    let small_ratio = f.div(small.shifted_minor(i, f)?, d_small)?;
    let rhs = f.add(
        f.inv(denom)?,
        f.mul(f.div(y(n - 1, n - i - 1), denom)?, small_ratio),
    );
    Ok((principal, lhs == rhs))
}

/// Both sides of the Cauchy-Binet expansion `|(MN)_{IJ}| = sum_K |M_{IK}| |N_{KJ}|`
/// for 1-based index sets.
pub fn cauchy_binet(
    m: &MatFq,
    nn: &MatFq,
    rows: &[usize],
    cols: &[usize],
    f: &FqField,
) -> Result<(Fq, Fq), LinalgError> {
    if m.n() != nn.n() {
        return Err(LinalgError::SizeMismatch {
            left: m.n(),
            right: nn.n(),
        });
    }
    let lhs = m.mul(nn, f).minor(rows, cols, f)?;
    let mut rhs = Fq::ZERO;
    for k in combinations(m.n(), rows.len()) {
        let term = f.mul(m.minor(rows, &k, f)?, nn.minor(&k, cols, f)?);
        rhs = f.add(rhs, term);
    }
    Ok((lhs, rhs))
}

/// All `r`-subsets of `{1..n}` in lexicographic order.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    itertools::Itertools::combinations(1..=n, r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn f3() -> FqField {
        FqField::new(3, 1).unwrap()
    }

    #[test]
    fn block_antidiag_layout() {
        let f = FqField::new(5, 1).unwrap();
        let a: Vec<Fq> = [1, 2, 3].iter().map(|&v| f.from_int(v)).collect();
        let m = BlockAntidiagSpec::antidiag(&a).unwrap().matrix();
        assert_eq!(m, MatFq::from_ints(&f, &[vec![0, 0, 1], vec![0, 2, 0], vec![3, 0, 0]]).unwrap());
        assert_eq!(
            mat_special(2, &SpecialMatrix::W0).unwrap(),
            BlockAntidiagSpec::antidiag(&[Fq::ONE, Fq::ONE]).unwrap().matrix()
        );
        for n in [3, 4] {
            let a = f.from_int(3);
            let mut d = vec![Fq::ONE; n];
            d[n - 1] = a;
            let lhs = MatFq::diag(&d).mul(&mat_special(n, &SpecialMatrix::W1).unwrap(), &f);
            assert_eq!(lhs, BlockAntidiagSpec::max_right(n, a).unwrap().matrix());
        }
        let left = BlockAntidiagSpec::max_left(3, f.from_int(2)).unwrap().matrix();
        assert_eq!(left, MatFq::from_ints(&f, &[vec![0, 0, 2], vec![1, 0, 0], vec![0, 1, 0]]).unwrap());
        assert!(BlockAntidiagSpec::new(vec![1, 2], vec![Fq::ONE]).is_err());
        assert!(BlockAntidiagSpec::new(vec![1, 1], vec![Fq::ONE, Fq::ZERO]).is_err());
    }

    #[test]
    fn recognize_round_trips_all_compositions() {
        let f = f3();
        for n in 1..=4usize {
            for mask in 0..(1u32 << (n - 1)) {
                let mut parts = vec![1usize];
                for b in 0..n - 1 {
                    if mask >> b & 1 == 1 {
                        parts.push(1);
                    } else {
                        *parts.last_mut().unwrap() += 1;
                    }
                }
                let coeffs: Vec<Fq> = (0..parts.len()).map(|i| f.from_int(1 + (i % 2) as i64)).collect();
                let spec = BlockAntidiagSpec::new(parts, coeffs).unwrap();
                assert_eq!(BlockAntidiagSpec::recognize(&spec.matrix()), Some(spec));
            }
        }
        let bad = MatFq::from_ints(&f, &[vec![1, 0], vec![0, 2]]).unwrap();
        assert_eq!(BlockAntidiagSpec::recognize(&bad), None);
        assert!(BlockAntidiagSpec::recognize(&MatFq::identity(1)).is_some());
    }

    #[test]
    fn unipotent_parametrization() {
        let f = FqField::new(7, 1).unwrap();
        let zero = UnipotentParam::from_fn(4, |_, _| Fq::ZERO);
        assert_eq!(unipotent_from_param(&zero, &f), MatFq::identity(4));
        let p = UnipotentParam::from_fn(3, |k, i| f.from_int((2 * k + i) as i64));
        let u = unipotent_from_param(&p, &f);
        assert!(u.is_unipotent_upper());
        assert_eq!(u.get(0, 2), f.mul(p.y(1, 1), p.y(2, 2)));
        assert_eq!(u.get(0, 1), f.add(p.y(1, 1), p.y(2, 1)));
        // Over F_3 the map is not onto U_3: y_{2,2} = 0 forces z_{1,3} = 0. It is injective
        // on y_{2,2} != 0, with image {z_{2,3} != 0}.
        let f = f3();
        let mut seen = HashSet::new();
        let mut seen_units = HashSet::new();
        for vals in 0..27u32 {
            let y = vec![
                Fq::from_raw(vals % 3),
                Fq::from_raw(vals / 3 % 3),
                Fq::from_raw(vals / 9),
            ];
            let u = unipotent_from_param(&UnipotentParam::new(3, y.clone()).unwrap(), &f);
            if !y[2].is_zero() {
                assert!(!u.get(1, 2).is_zero());
                seen_units.insert(u.clone());
            }
            seen.insert(u);
        }
        assert_eq!(seen.len(), 21);
        assert_eq!(seen_units.len(), 18);
        assert!(UnipotentParam::new(3, vec![Fq::ONE]).is_err());
    }

    #[test]
    fn unipotent_enumeration_counts() {
        let f = f3();
        assert_eq!(enumerate_unipotent(2, &f, DEFAULT_CAP).unwrap().iter().count(), 3);
        assert_eq!(enumerate_unipotent(3, &f, DEFAULT_CAP).unwrap().len(), 27);
        let all: HashSet<MatFq> = enumerate_unipotent(4, &f, DEFAULT_CAP).unwrap().iter().collect();
        assert_eq!(all.len(), 729);
        assert!(all.iter().all(|u| u.is_unipotent_upper()));
        assert!(matches!(
            enumerate_unipotent(4, &f, 100),
            Err(LinalgError::CapExceeded { count: 729, cap: 100 })
        ));
        let e = enumerate_unipotent(2, &f, DEFAULT_CAP).unwrap();
        assert_eq!(e.get(2).get(0, 1), Fq::from_raw(2));
    }

    #[test]
    fn determinants_agree_with_cofactor_expansion() {
        let f = FqField::new(5, 1).unwrap();
        let mut state = 12345u64;
        for n in 1..=5 {
            for _ in 0..50 {
                let m = MatFq::from_fn(n, |_, _| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    Fq::from_raw(((state >> 33) % 5) as u32)
                });
                assert_eq!(m.det(&f), m.det_cofactor(&f));
                assert_eq!(m.principal_minor(n, &f).unwrap(), m.det(&f));
                match m.inverse(&f) {
                    Ok(inv) => assert_eq!(m.mul(&inv, &f), MatFq::identity(n)),
                    Err(e) => assert!(m.det(&f).is_zero() && e == LinalgError::Singular),
                }
            }
        }
    }

    #[test]
    fn minors_of_identity() {
        let f = f3();
        let id = MatFq::identity(4);
        for i in 0..=4 {
            assert_eq!(id.principal_minor(i, &f).unwrap(), Fq::ONE);
        }
        for i in 1..4 {
            assert_eq!(id.shifted_minor(i, &f).unwrap(), Fq::ZERO);
        }
        assert!(id.shifted_minor(4, &f).is_err());
        assert!(id.shifted_minor(0, &f).is_err());
        assert!(id.principal_minor(5, &f).is_err());
        let m = MatFq::from_ints(&f, &[vec![1, 2], vec![0, 1]]).unwrap();
        assert_eq!(m.shifted_minor(1, &f).unwrap(), Fq::from_raw(2));
    }

    #[test]
    fn gl2_big_cell_count() {
        let f = f3();
        let mut total = 0;
        let mut factor = 0;
        for code in 0..81u32 {
            let e: Vec<Fq> = (0..4).map(|i| Fq::from_raw(code / 3u32.pow(i) % 3)).collect();
            let g = MatFq::from_rows(&[e[..2].to_vec(), e[2..].to_vec()]).unwrap();
            if g.det(&f).is_zero() {
                assert_eq!(g.big_cell_factorize(&f), Err(LinalgError::Singular));
                continue;
            }
            total += 1;
            if let Some((b, u)) = g.big_cell_factorize(&f).unwrap() {
                factor += 1;
                assert!(b.is_lower_triangular() && u.is_unipotent_upper());
                assert_eq!(b.mul(&u, &f), g);
            }
        }
        assert_eq!((total, factor), (48, 36));
    }

    #[test]
    fn factorization_special_cases() {
        let f = FqField::new(5, 1).unwrap();
        let b = MatFq::from_ints(&f, &[vec![2, 0, 0], vec![1, 3, 0], vec![4, 4, 1]]).unwrap();
        assert_eq!(b.big_cell_factorize(&f).unwrap(), Some((b.clone(), MatFq::identity(3))));
        let w0 = mat_special(2, &SpecialMatrix::W0).unwrap();
        assert_eq!(w0.big_cell_factorize(&f).unwrap(), None);
        let (mut d, mut s) = (Vec::new(), Vec::new());
        assert!(!w0.big_cell_data(&f, &mut d, &mut s));
    }

    #[test]
    fn shifted_minor_ratio_matches_factorization() {
        let f = FqField::new(5, 1).unwrap();
        let mut state = 99u64;
        let mut checked = 0;
        while checked < 300 {
            let g = MatFq::from_fn(4, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                Fq::from_raw(((state >> 33) % 5) as u32)
            });
            let Ok(Some((b, u))) = g.big_cell_factorize(&f) else { continue };
            checked += 1;
            let (mut d, mut s) = (Vec::new(), Vec::new());
            assert!(g.big_cell_data(&f, &mut d, &mut s));
            for i in 1..=4 {
                let di = g.principal_minor(i, &f).unwrap();
                let dp = g.principal_minor(i - 1, &f).unwrap();
                assert_eq!(b.get(i - 1, i - 1), f.div(di, dp).unwrap());
                assert_eq!(d[i - 1], b.get(i - 1, i - 1));
                if i < 4 {
                    let sh = g.shifted_minor(i, &f).unwrap();
                    assert_eq!(u.get(i - 1, i), f.div(sh, di).unwrap());
                    assert_eq!(s[i - 1], u.get(i - 1, i));
                }
            }
        }
    }

    #[test]
    fn minor_formulas_small_cases() {
        let f = FqField::new(5, 1).unwrap();
        let w0 = |n| mat_special(n, &SpecialMatrix::W0).unwrap();
        let p2 = UnipotentParam::new(2, vec![f.from_int(3)]).unwrap();
        assert_eq!(minor_formula_delta(&p2, 1, &f).unwrap(), f.from_int(3));
        for code in 0..125u32 {
            let y: Vec<Fq> = (0..3).map(|i| Fq::from_raw(code / 5u32.pow(i) % 5)).collect();
            let p = UnipotentParam::new(3, y).unwrap();
            let m = unipotent_from_param(&p, &f).mul(&w0(3), &f);
            let expect = f.neg(f.mul(p.y(2, 1), p.y(2, 2)));
            assert_eq!(m.principal_minor(2, &f).unwrap(), expect);
            assert_eq!(minor_formula_delta(&p, 2, &f).unwrap(), expect);
            if p.values().iter().all(|v| !v.is_zero()) {
                let ratio = f.div(m.shifted_minor(1, &f).unwrap(), m.principal_minor(1, &f).unwrap()).unwrap();
                let by_hand = f.div(f.add(p.y(1, 1), p.y(2, 1)), f.mul(p.y(1, 1), p.y(2, 2))).unwrap();
                let literal = f.add(
                    f.div(p.y(2, 1), f.mul(p.y(1, 1), p.y(2, 2))).unwrap(),
                    f.inv(p.y(2, 2)).unwrap(),
                );
                assert_eq!(ratio, by_hand);
                assert_eq!(ratio, literal);
                assert_eq!(minor_formula_ratio(&p, 1, &f).unwrap(), ratio);
            }
        }
        let zero = UnipotentParam::from_fn(3, |_, _| Fq::ZERO);
        assert!(matches!(minor_formula_ratio(&zero, 1, &f), Err(LinalgError::ZeroDenominator { .. })));
    }

    #[test]
    fn cauchy_binet_trivial_cases() {
        let f = FqField::new(5, 1).unwrap();
        let id = MatFq::identity(3);
        let (l, r) = cauchy_binet(&id, &id, &[1, 2], &[1, 2], &f).unwrap();
        assert_eq!((l, r), (Fq::ONE, Fq::ONE));
        let (l, r) = cauchy_binet(&id, &id, &[1, 2], &[1, 3], &f).unwrap();
        assert_eq!((l, r), (Fq::ZERO, Fq::ZERO));
        let m = MatFq::from_ints(&f, &[vec![1, 2, 0], vec![3, 1, 4], vec![0, 2, 2]]).unwrap();
        let nn = MatFq::from_ints(&f, &[vec![2, 0, 1], vec![1, 1, 0], vec![4, 3, 3]]).unwrap();
        let (l, r) = cauchy_binet(&m, &nn, &[1, 2, 3], &[1, 2, 3], &f).unwrap();
        assert_eq!(l, f.mul(m.det(&f), nn.det(&f)));
        assert_eq!(l, r);
        assert!(cauchy_binet(&m, &nn, &[1, 1], &[1, 2], &f).is_err());
        assert!(cauchy_binet(&m, &nn, &[1], &[1, 2], &f).is_err());
        assert!(cauchy_binet(&m, &nn, &[4], &[1], &f).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = FqField::new(3, 2).unwrap();
        let m = MatFq::from_rows(&[
            vec![f.generator(), Fq::ZERO],
            vec![Fq::ONE, f.from_int(2)],
        ])
        .unwrap();
        let v = m.to_json(&f);
        assert_eq!(v["entries"][0], 1);
        assert_eq!(v["entries"][1], serde_json::Value::Null);
        assert_eq!(MatFq::from_json(&f, &v).unwrap(), m);
        let other = FqField::new(5, 1).unwrap();
        assert!(MatFq::from_json(&other, &v).is_err());
    }
}
