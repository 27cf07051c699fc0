//! Exact arithmetic in `Q(zeta_m)`.
//!
//! A [`CycloNumber`] is the class of a rational polynomial in `zeta_m` modulo the cyclotomic
//! polynomial `Phi_m`, stored in canonical form (degree `< phi(m)`), so equality is plain
//! coefficient equality. Large character sums are accumulated as exponent histograms
//! ([`RootCounts`]) and reduced once.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

/// Largest supported conductor.
pub const MAX_CONDUCTOR: u32 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycloError {
    #[error("conductor must be positive")]
    ZeroConductor,
    #[error("conductor {0} exceeds the cap {MAX_CONDUCTOR}")]
    ConductorTooLarge(u32),
    #[error("operands live in different cyclotomic fields (m = {0} vs m = {1})")]
    MixedRings(u32, u32),
    #[error("value is not rational")]
    NotRational,
    #[error("malformed serialized value: {0}")]
    Malformed(String),
}

#[derive(Debug)]
pub struct CycloRing {
    m: u32,
    /// `Phi_m`, monic, low degree first.
    modulus: Vec<i64>,
    /// Canonical coordinates of `zeta^j` for every `j < m`.
    powers: Vec<Vec<i64>>,
}

fn poly_mul_binomial(poly: &[i64], d: usize) -> Vec<i64> {
    // poly * (x^d - 1)
    let mut out = vec![0i64; poly.len() + d];
    for (i, &c) in poly.iter().enumerate() {
        out[i + d] += c;
        out[i] -= c;
    }
    out
}

fn poly_div_binomial(poly: &[i64], d: usize) -> Vec<i64> {
    // Exact division by (x^d - 1): synthetic division from the top.
    let deg = poly.len() - 1;
    let mut rem = poly.to_vec();
    let mut quot = vec![0i64; deg + 1 - d];
    for i in (d..=deg).rev() {
        let c = rem[i];
        quot[i - d] = c;
        rem[i] = 0;
        rem[i - d] += c;
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division must be exact");
    quot
}

fn mobius(mut n: u32) -> i32 {
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Euler's totient.
pub fn totient(mut n: u32) -> u32 {
    let mut result = n;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            while n % d == 0 {
                n /= d;
            }
            result -= result / d;
        }
        d += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// `Phi_m` with integer coefficients, low degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<i64> {
    // Phi_m = prod_{d | m} (x^d - 1)^{mu(m/d)}; multiply first, then divide exactly.
    let divisors: Vec<u32> = (1..=m).filter(|d| m % d == 0).collect();
    let mut poly = vec![1i64];
    for &d in &divisors {
        if mobius(m / d) == 1 {
            poly = poly_mul_binomial(&poly, d as usize);
        }
    }
    for &d in &divisors {
        if mobius(m / d) == -1 {
            poly = poly_div_binomial(&poly, d as usize);
        }
    }
    poly
}

impl CycloRing {
    pub fn new(m: u32) -> Result<CycloRing, CycloError> {
        if m == 0 {
            return Err(CycloError::ZeroConductor);
        }
        if m > MAX_CONDUCTOR {
            return Err(CycloError::ConductorTooLarge(m));
        }
        let modulus = cyclotomic_polynomial(m);
        let phi = modulus.len() - 1;
        debug_assert_eq!(phi as u32, totient(m));
        // x^j mod Phi_m, built incrementally: x^{j+1} = x * x^j reduced once.
        let mut powers = Vec::with_capacity(m as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..m {
            powers.push(cur.clone());
            let top = cur[phi - 1];
            let mut next = vec![0i64; phi];
            next[1..phi].copy_from_slice(&cur[..(phi - 1)]);
            if top != 0 {
                for i in 0..phi {
                    next[i] -= top * modulus[i];
                }
            }
            cur = next;
        }
        Ok(CycloRing {
            m,
            modulus,
            powers,
        })
    }

    pub fn shared(m: u32) -> Result<Arc<CycloRing>, CycloError> {
        Self::new(m).map(Arc::new)
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    /// `phi(m)`, the dimension over `Q`.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    fn power(&self, j: i64) -> &[i64] {
        &self.powers[j.rem_euclid(self.m as i64) as usize]
    }
}

/// Histogram of root-of-unity exponents with integer multiplicities.
///
/// Merging is exact and associative, so partial sums from different workers can be
/// combined in any order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootCounts {
    counts: Vec<i64>,
}

impl RootCounts {
    pub fn new(m: u32) -> Self {
        RootCounts {
            counts: vec![0; m as usize],
        }
    }

    #[inline]
    pub fn push(&mut self, exponent: u32) {
        self.counts[exponent as usize] += 1;
    }

    #[inline]
    pub fn push_n(&mut self, exponent: u32, mult: i64) {
        self.counts[exponent as usize] += mult;
    }

    pub fn merge(mut self, other: &RootCounts) -> RootCounts {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> i64 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn to_cyclo(&self, ring: &Arc<CycloRing>) -> CycloNumber {
        assert_eq!(self.counts.len(), ring.m as usize, "histogram/ring mismatch");
        let phi = ring.degree();
        let mut acc = vec![0i128; phi];
        for (j, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                for (a, &v) in acc.iter_mut().zip(&ring.powers[j]) {
                    *a += c as i128 * v as i128;
                }
            }
        }
        CycloNumber {
            ring: Arc::clone(ring),
            coeffs: acc
                .into_iter()
                .map(|c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        }
    }
}

/// Rational accumulator over exponent slots, for sums of `x * zeta^e` with general `x`.
#[derive(Clone, Debug)]
pub struct CycloSum {
    ring: Arc<CycloRing>,
    slots: Vec<BigRational>,
}

impl CycloSum {
    pub fn new(ring: &Arc<CycloRing>) -> Self {
        CycloSum {
            ring: Arc::clone(ring),
            slots: vec![BigRational::zero(); ring.m as usize],
        }
    }

    /// Adds `x * zeta^exponent`.
    pub fn add_shifted(&mut self, x: &CycloNumber, exponent: i64) {
        x.ring.assert_same(&self.ring);
        let m = self.ring.m as i64;
        for (i, c) in x.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let slot = (i as i64 + exponent).rem_euclid(m) as usize;
                self.slots[slot] += c;
            }
        }
    }

    pub fn finish(self) -> CycloNumber {
        let phi = self.ring.degree();
        let mut coeffs = vec![BigRational::zero(); phi];
        for (j, c) in self.slots.iter().enumerate() {
            if !c.is_zero() {
                for (a, &v) in coeffs.iter_mut().zip(&self.ring.powers[j]) {
                    if v != 0 {
                        *a += c * BigRational::from_integer(BigInt::from(v));
                    }
                }
            }
        }
        CycloNumber {
            ring: self.ring,
            coeffs,
        }
    }
}

impl CycloRing {
    fn assert_same(&self, other: &CycloRing) {
        assert_eq!(
            self.m, other.m,
            "cyclotomic operands from different rings (m = {} vs m = {})",
            self.m, other.m
        );
    }
}

/// Element of `Q(zeta_m)` in canonical form.
#[derive(Clone, Debug)]
pub struct CycloNumber {
    ring: Arc<CycloRing>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        self.ring.m == other.ring.m && self.coeffs == other.coeffs
    }
}

impl Eq for CycloNumber {}

impl CycloNumber {
    pub fn zero(ring: &Arc<CycloRing>) -> Self {
        CycloNumber {
            ring: Arc::clone(ring),
            coeffs: vec![BigRational::zero(); ring.degree()],
        }
    }

    pub fn one(ring: &Arc<CycloRing>) -> Self {
        Self::root(ring, 0)
    }

    pub fn from_rational(ring: &Arc<CycloRing>, r: BigRational) -> Self {
        let mut z = Self::zero(ring);
        z.coeffs[0] = r;
        z
    }

    /// `zeta_m^j`, with `j` taken mod `m`.
    pub fn from_int(ring: &Arc<CycloRing>, v: i64) -> Self {
        Self::from_rational(ring, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn root(ring: &Arc<CycloRing>, j: i64) -> Self {
        CycloNumber {
            ring: Arc::clone(ring),
            coeffs: ring
                .power(j)
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        }
    }

    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }

    pub fn conductor(&self) -> u32 {
        self.ring.m
    }

    /// Canonical coordinates in the basis `zeta^0, ..., zeta^{phi(m)-1}`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_ring(&self, other: &CycloNumber) -> Result<(), CycloError> {
        if self.ring.m == other.ring.m {
            Ok(())
        } else {
            Err(CycloError::MixedRings(self.ring.m, other.ring.m))
        }
    }

    pub fn checked_add(&self, other: &CycloNumber) -> Result<CycloNumber, CycloError> {
        self.check_ring(other)?;
        Ok(CycloNumber {
            ring: Arc::clone(&self.ring),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &CycloNumber) -> Result<CycloNumber, CycloError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &CycloNumber) -> Result<CycloNumber, CycloError> {
        self.check_ring(other)?;
        let mut sum = CycloSum::new(&self.ring);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let shifted = self.scale_ref(other, a);
            sum.add_shifted(&shifted, i as i64);
        }
        Ok(sum.finish())
    }

    fn scale_ref(&self, x: &CycloNumber, r: &BigRational) -> CycloNumber {
        CycloNumber {
            ring: Arc::clone(&x.ring),
            coeffs: x.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> CycloNumber {
        self.scale_ref(self, r)
    }

    /// Multiplication by `zeta^e`.
    pub fn mul_root(&self, e: i64) -> CycloNumber {
        let mut sum = CycloSum::new(&self.ring);
        sum.add_shifted(self, e);
        sum.finish()
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> CycloNumber {
        let mut sum = CycloSum::new(&self.ring);
        let m = self.ring.m as i64;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut slot = CycloNumber::zero(&self.ring);
                slot.coeffs[0] = c.clone();
                sum.add_shifted(&slot, (m - i as i64) % m);
            }
        }
        sum.finish()
    }

    /// Numerical value `sum_j c_j exp(2 pi i j / m)`.
    pub fn approx(&self) -> (f64, f64) {
        let m = self.ring.m as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN);
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m;
            re += v * theta.cos();
            im += v * theta.sin();
        }
        (re, im)
    }

    /// [`approx`](Self::approx) rounded to `digits` decimal places, with `-0.0` folded to `0.0`.
    pub fn approx_rounded(&self, digits: u32) -> (f64, f64) {
        let scale = 10f64.powi(digits as i32);
        let round = |x: f64| {
            let r = (x * scale).round() / scale;
            if r == 0.0 {
                0.0
            } else {
                r
            }
        };
        let (re, im) = self.approx();
        (round(re), round(im))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// Parses the `{"m", "coeffs", ...}` record written by the `Serialize` impl.
    pub fn from_json(ring: &Arc<CycloRing>, v: &serde_json::Value) -> Result<Self, CycloError> {
        let bad = |s: &str| CycloError::Malformed(s.to_string());
        let m = v.get("m").and_then(|m| m.as_u64()).ok_or_else(|| bad("m"))?;
        if m != ring.m as u64 {
            return Err(CycloError::MixedRings(m as u32, ring.m));
        }
        let coeffs = v
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| bad("coeffs"))?;
        if coeffs.len() != ring.degree() {
            return Err(bad("coefficient count"));
        }
        let parse = |x: &serde_json::Value| -> Result<BigInt, CycloError> {
            match x {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| bad("integer")),
                serde_json::Value::String(s) => s.parse().map_err(|_| bad("integer")),
                _ => Err(bad("integer")),
            }
        };
        let mut out = Vec::with_capacity(coeffs.len());
        for pair in coeffs {
            let pair = pair.as_array().ok_or_else(|| bad("pair"))?;
            if pair.len() != 2 {
                return Err(bad("pair"));
            }
            let den = parse(&pair[1])?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            out.push(BigRational::new(parse(&pair[0])?, den));
        }
        Ok(CycloNumber {
            ring: Arc::clone(ring),
            coeffs: out,
        })
    }
}

fn int_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(x.to_string()),
    }
}

impl Serialize for CycloNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let coeffs: Vec<[serde_json::Value; 2]> = self
            .coeffs
            .iter()
            .map(|c| [int_json(c.numer()), int_json(c.denom())])
            .collect();
        let (re, im) = self.approx_rounded(12);
        let mut s = serializer.serialize_struct("CycloNumber", 3)?;
        s.serialize_field("m", &self.ring.m)?;
        s.serialize_field("coeffs", &coeffs)?;
        s.serialize_field("approx", &[re, im])?;
        s.end()
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match j {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "z^{j}")?,
                _ => write!(f, "{a}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " (z = zeta_{})", self.ring.m)
    }
}

impl Add for &CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: &CycloNumber) -> CycloNumber {
        self.ring.assert_same(&rhs.ring);
        self.checked_add(rhs).expect("same ring")
    }
}

impl AddAssign<&CycloNumber> for CycloNumber {
    fn add_assign(&mut self, rhs: &CycloNumber) {
        self.ring.assert_same(&rhs.ring);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: &CycloNumber) -> CycloNumber {
        self.ring.assert_same(&rhs.ring);
        self.checked_sub(rhs).expect("same ring")
    }
}

impl Mul for &CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: &CycloNumber) -> CycloNumber {
        self.ring.assert_same(&rhs.ring);
        self.checked_mul(rhs).expect("same ring")
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber {
            ring: Arc::clone(&self.ring),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}
