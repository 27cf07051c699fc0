//! Finite fields `F_q`, `q = p^k` with `p` an odd prime.
//!
//! Elements are stored as the integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` of their
//! coefficient vector in the polynomial basis `1, x, ..., x^{k-1}`. Multiplication goes
//! through discrete-log tables built once at construction, so `q` is capped at
//! [`MAX_FIELD_ORDER`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfqError {
    #[error("characteristic {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the cap {cap}")]
    OrderTooLarge { p: u64, k: u32, cap: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields (F_{left} vs F_{right})")]
    MixedFields { left: u32, right: u32 },
    #[error("value {0} is not an element of the field")]
    OutOfRange(u32),
}

/// A field element in integer encoding. Arithmetic requires the owning [`FqField`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    /// Wraps a raw encoding without validation. Use [`FqField::element`] for checked input.
    pub const fn from_raw(raw: u32) -> Fq {
        Fq(raw)
    }

    pub const fn raw(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug)]
pub struct FqField {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, low degree first, length `k + 1`. `None` for prime fields.
    modulus: Option<Vec<u32>>,
    generator: Fq,
    exp: Vec<Fq>,
    log: Vec<u32>,
    /// `Tr(x^i)` for `i < k`.
    trace_of_basis: Vec<u32>,
}

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        // Construction is deterministic in (p, k).
        self.p == other.p && self.k == other.k
    }
}

impl Eq for FqField {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Polynomials over F_p, low degree first, used only while building the tables.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = pow_mod(b[db], p - 2, p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bi) in b.iter().enumerate() {
            let t = (c as u64 * bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, modulus, p)
}

fn pow_mod(base: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn digits(mut v: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(v % p);
        v /= p;
    }
    out
}

fn encode(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Monic polynomial of the given degree whose `index`-th place in lexicographic order of
/// `(c_0, c_1, ..., c_{deg-1})` it occupies.
fn monic_from_lex_index(mut index: u64, deg: u32, p: u32) -> Vec<u32> {
    let mut coeffs = vec![0u32; deg as usize + 1];
    for i in (0..deg as usize).rev() {
        coeffs[i] = (index % p as u64) as u32;
        index /= p as u64;
    }
    coeffs[deg as usize] = 1;
    coeffs
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = (f.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d);
        for idx in 0..count {
            let g = monic_from_lex_index(idx, d, p);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FqField {
    /// Builds `F_{p^k}` with the lexicographically smallest irreducible modulus and the
    /// smallest (by encoding) primitive element.
    pub fn new(p: u64, k: u32) -> Result<FqField, GfqError> {
        if p == 2 || !is_prime(p) {
            return Err(GfqError::NotOddPrime(p));
        }
        if k == 0 {
            return Err(GfqError::ZeroDegree);
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if q > MAX_FIELD_ORDER as u128 {
            return Err(GfqError::OrderTooLarge {
                p,
                k,
                cap: MAX_FIELD_ORDER,
            });
        }
        let p = p as u32;
        let q = q as u32;

        let modulus = if k == 1 {
            None
        } else {
            let total = (p as u64).pow(k);
            let found = (0..total)
                .map(|idx| monic_from_lex_index(idx, k, p))
                .find(|f| is_irreducible(f, p))
                .expect("an irreducible polynomial of every degree exists");
            Some(found)
        };

        let mul_raw = |a: u32, b: u32| -> u32 {
            match &modulus {
                None => (a as u64 * b as u64 % p as u64) as u32,
                Some(m) => {
                    let mut da = digits(a, p, k);
                    let mut db = digits(b, p, k);
                    poly_trim(&mut da);
                    poly_trim(&mut db);
                    encode(&poly_mul_mod(&da, &db, m, p), p)
                }
            }
        };
        let pow_raw = |a: u32, mut e: u64| -> u32 {
            let mut acc = 1u32;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_raw(acc, b);
                }
                b = mul_raw(b, b);
                e >>= 1;
            }
            acc
        };

        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| factors.iter().all(|&r| pow_raw(g, order / r) != 1))
            .expect("F_q^x is cyclic");

        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = 1u32;
        for t in 0..q - 1 {
            exp.push(Fq(cur));
            log[cur as usize] = t;
            cur = mul_raw(cur, generator);
        }
        debug_assert_eq!(cur, 1);

        let mut field = FqField {
            p,
            k,
            q,
            modulus,
            generator: Fq(generator),
            exp,
            log,
            trace_of_basis: Vec::new(),
        };
        let mut basis_trace = Vec::with_capacity(k as usize);
        for i in 0..k {
            let x_i = Fq(p.pow(i));
            let mut acc = Fq::ZERO;
            let mut conj = x_i;
            for _ in 0..k {
                acc = field.add(acc, conj);
                conj = field.pow(conj, p as u64);
            }
            debug_assert!(acc.0 < p, "trace must land in the prime field");
            basis_trace.push(acc.0);
        }
        field.trace_of_basis = basis_trace;
        Ok(field)
    }

    /// Convenience constructor returning a shareable handle.
    pub fn shared(p: u64, k: u32) -> Result<Arc<FqField>, GfqError> {
        Self::new(p, k).map(Arc::new)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    pub fn generator(&self) -> Fq {
        self.generator
    }

    /// Validates a raw encoding.
    pub fn element(&self, raw: u32) -> Result<Fq, GfqError> {
        if raw < self.q {
            Ok(Fq(raw))
        } else {
            Err(GfqError::OutOfRange(raw))
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Fq {
        Fq(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq, GfqError> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(GfqError::OutOfRange(encode(coeffs, self.p)));
        }
        Ok(Fq(encode(coeffs, self.p)))
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        digits(a.0, self.p, self.k)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.k == 1 {
            let s = a.0 + b.0;
            return Fq(if s >= self.p { s - self.p } else { s });
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.k {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        Fq(out)
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if self.k == 1 {
            return Fq(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut x = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.k {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            x /= self.p;
        }
        Fq(out)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        let n = self.q - 1;
        let t = self.log[a.0 as usize] + self.log[b.0 as usize];
        self.exp[(if t >= n { t - n } else { t }) as usize]
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, GfqError> {
        match self.dlog(a) {
            None => Err(GfqError::DivisionByZero),
            Some(0) => Ok(Fq::ONE),
            Some(t) => Ok(self.exp[(self.q - 1 - t) as usize]),
        }
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, GfqError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        match self.dlog(a) {
            None => Fq::ZERO,
            Some(t) => self.exp[((t as u64 * (e % (self.q as u64 - 1))) % (self.q as u64 - 1)) as usize],
        }
    }

    /// Exponent `t` with `a = g^t`, or `None` for zero.
    pub fn dlog(&self, a: Fq) -> Option<u32> {
        match self.log.get(a.0 as usize) {
            Some(&t) if t != u32::MAX => Some(t),
            _ => None,
        }
    }

    /// `g^t` for the fixed generator `g`.
    pub fn exp(&self, t: i64) -> Fq {
        self.exp[t.rem_euclid(self.q as i64 - 1) as usize]
    }

    /// Absolute trace to `F_p`, returned as an integer in `0..p`.
    pub fn trace(&self, a: Fq) -> u32 {
        if self.k == 1 {
            return a.0;
        }
        let mut acc = 0u64;
        let mut x = a.0;
        for &t in &self.trace_of_basis {
            acc += (x % self.p) as u64 * t as u64;
            x /= self.p;
        }
        (acc % self.p as u64) as u32
    }

    /// Units in generator order `g^0, g^1, ..., g^{q-2}`.
    pub fn units(&self) -> &[Fq] {
        &self.exp
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q).map(Fq)
    }
}

/// Binary and unary field operations, for callers that dispatch on an operation tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
}

/// An element bundled with its field, for APIs that must reject mixed-field input.
#[derive(Clone, Debug)]
pub struct FqElement {
    field: Arc<FqField>,
    value: Fq,
}

impl PartialEq for FqElement {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.value == other.value
    }
}

impl Eq for FqElement {}

impl FqElement {
    pub fn new(field: Arc<FqField>, value: Fq) -> Result<Self, GfqError> {
        field.element(value.raw())?;
        Ok(FqElement { field, value })
    }

    pub fn value(&self) -> Fq {
        self.value
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    /// Applies `op`; unary operations ignore `rhs`.
    pub fn apply(&self, op: FieldOp, rhs: &FqElement) -> Result<FqElement, GfqError> {
        if *self.field != *rhs.field {
            return Err(GfqError::MixedFields {
                left: self.field.q(),
                right: rhs.field.q(),
            });
        }
        let f = &self.field;
        let (a, b) = (self.value, rhs.value);
        let value = match op {
            FieldOp::Add => f.add(a, b),
            FieldOp::Sub => f.sub(a, b),
            FieldOp::Mul => f.mul(a, b),
            FieldOp::Div => f.div(a, b)?,
            FieldOp::Neg => f.neg(a),
            FieldOp::Inv => f.inv(a)?,
        };
        Ok(FqElement {
            field: Arc::clone(f),
            value,
        })
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.value)
    }
}
