//! The Whittaker vector `psi_n`, the brute-force Whittaker function
//! `Psi(g) = [G:B^-]^{-1} sum_{u in U} psi_n(u g) conj(psi(u))`, Bessel values, the support
//! check over monomial matrices and double coset indices.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rayon::prelude::*;
use thiserror::Error;

use crate::chars::{CharError, Context, PrincipalSeriesParam};
use crate::cyclo::{CycloNumber, RootCounts};
use crate::fqlinalg::{enumerate_unipotent, BlockAntidiagSpec, LinalgError, MatFq};
use crate::gfq::{Fq, FqField, GfqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WhittakerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Field(#[from] GfqError),
    #[error("character tuple has length {got}, matrix has size {expected}")]
    Arity { expected: usize, got: usize },
    #[error("argument must be a unit")]
    NonUnit,
    #[error("incomplete table: missing value at {0}")]
    IncompleteTable(String),
}

impl WhittakerError {
    pub fn is_cap(&self) -> bool {
        matches!(self, WhittakerError::Linalg(LinalgError::CapExceeded { .. }))
    }
}

/// `[G_n : B_n^-] = prod_{i=1}^n (q^i - 1)/(q - 1)`.
pub fn index_g_mod_b(n: usize, q: u32) -> BigInt {
    let q = BigInt::from(q);
    let mut acc = BigInt::one();
    for i in 1..=n as u32 {
        acc *= (Pow::pow(&q, i) - 1u32) / (&q - 1u32);
    }
    acc
}

/// `|U_n| = q^{n(n-1)/2}`.
pub fn unipotent_order(n: usize, q: u32) -> BigInt {
    Pow::pow(BigInt::from(q), (n * n.saturating_sub(1) / 2) as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Bruteforce,
    GtClosedForm,
    GtRecursion,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bruteforce => "bruteforce",
            Method::GtClosedForm => "gt-closed-form",
            Method::GtRecursion => "gt-recursion",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct WhittakerValue {
    pub value: CycloNumber,
    pub chi: Vec<u32>,
    pub g: MatFq,
    pub method: Method,
}

fn check_arity(g: &MatFq, param: &PrincipalSeriesParam) -> Result<(), WhittakerError> {
    if g.n() != param.n() {
        return Err(WhittakerError::Arity {
            expected: g.n(),
            got: param.n(),
        });
    }
    Ok(())
}

/// `psi_n(g) = chi(b) psi(u)` when `g = b u` lies in the big cell, else 0.
pub fn psi_n_eval(g: &MatFq, param: &PrincipalSeriesParam) -> Result<CycloNumber, WhittakerError> {
    check_arity(g, param)?;
    let ctx = param.context();
    let f = ctx.field();
    match g.big_cell_factorize(f)? {
        None => Ok(CycloNumber::zero(ctx.ring())),
        Some((b, u)) => {
            let e = param.torus_exp(b.diagonal()).expect("b is invertible");
            let e = ctx.add_exp(e, ctx.psi_exp(u.superdiagonal_sum(f)));
            Ok(ctx.root(e))
        }
    }
}

/// `psi_n(g)` from minors: `prod chi_i(Delta_i/Delta_{i-1}) psi(sum Delta_{i,i+1}/Delta_i)`.
pub fn psi_n_eval_minors(
    g: &MatFq,
    param: &PrincipalSeriesParam,
) -> Result<CycloNumber, WhittakerError> {
    check_arity(g, param)?;
    let ctx = param.context();
    let f = ctx.field();
    if g.det(f).is_zero() {
        return Err(LinalgError::Singular.into());
    }
    let n = g.n();
    let deltas: Vec<Fq> = (0..=n)
        .map(|i| g.principal_minor(i, f))
        .collect::<Result<_, _>>()?;
    if deltas.iter().any(|d| d.is_zero()) {
        return Ok(CycloNumber::zero(ctx.ring()));
    }
    let mut e = 0;
    let mut s = Fq::ZERO;
    for i in 1..=n {
        let b = f.div(deltas[i], deltas[i - 1]).expect("nonzero minor");
        e = ctx.add_exp(e, param.chi_exp(i, b).expect("unit"));
        if i < n {
            s = f.add(s, f.div(g.shifted_minor(i, f)?, deltas[i]).expect("nonzero minor"));
        }
    }
    Ok(ctx.root(ctx.add_exp(e, ctx.psi_exp(s))))
}

/// The summands of the brute-force sum for a fixed `g`, grouped by the discrete logs of
/// the diagonal of `b` in `u g = b u'` and the exponent of `psi(u') conj(psi(u))`.
/// Evaluating at a character tuple is then a weighted root count.
#[derive(Clone, Debug)]
pub struct SummandTable {
    ctx: Context,
    n: usize,
    terms: u64,
    entries: Vec<(Vec<u32>, u32, i64)>,
}

impl SummandTable {
    pub fn build(g: &MatFq, ctx: &Context, cap: u64) -> Result<SummandTable, WhittakerError> {
        let f: &FqField = ctx.field();
        if g.det(f).is_zero() {
            return Err(LinalgError::Singular.into());
        }
        let units = enumerate_unipotent(g.n(), f, cap)?;
        let grouped = (0..units.len())
            .into_par_iter()
            .fold(
                || (BTreeMap::<(Vec<u32>, u32), i64>::new(), Vec::new(), Vec::new()),
                |(mut acc, mut diag, mut sup), idx| {
                    let u = units.get(idx);
                    let ug = u.mul(g, f);
                    if ug.big_cell_data(f, &mut diag, &mut sup) {
                        let dl: Vec<u32> = diag.iter().map(|&d| f.dlog(d).expect("unit")).collect();
                        let s = sup.iter().fold(Fq::ZERO, |a, &x| f.add(a, x));
                        let e = ctx.add_exp(
                            ctx.psi_exp(s),
                            ctx.neg_exp(ctx.psi_exp(u.superdiagonal_sum(f))),
                        );
                        *acc.entry((dl, e)).or_insert(0) += 1;
                    }
                    (acc, diag, sup)
                },
            )
            .map(|(acc, _, _)| acc)
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        Ok(SummandTable {
            ctx: ctx.clone(),
            n: g.n(),
            terms: units.len(),
            entries: grouped.into_iter().map(|((d, e), c)| (d, e, c)).collect(),
        })
    }

    /// Number of `u` summed over, `|U_n|`.
    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// `[G:B^-] Psi_chi(g)` as a root count.
    pub fn raw_counts(&self, param: &PrincipalSeriesParam) -> Result<RootCounts, WhittakerError> {
        if param.n() != self.n {
            return Err(WhittakerError::Arity {
                expected: self.n,
                got: param.n(),
            });
        }
        let ctx = &self.ctx;
        let q1 = ctx.q() - 1;
        let p = ctx.field().p();
        let js = param.indices();
        let mut counts = RootCounts::new(ctx.m());
        for (dl, e, c) in &self.entries {
            let mut x = *e;
            for (j, t) in js.iter().zip(dl) {
                x = ctx.add_exp(x, (j * t % q1) * p);
            }
            counts.push_n(x, *c);
        }
        Ok(counts)
    }

    /// `Psi_chi(g)`.
    pub fn evaluate(&self, param: &PrincipalSeriesParam) -> Result<CycloNumber, WhittakerError> {
        let raw = self.raw_counts(param)?.to_cyclo(self.ctx.ring());
        let idx = index_g_mod_b(self.n, self.ctx.q());
        Ok(raw.scale(&BigRational::new(BigInt::one(), idx)))
    }
}

/// `Psi_chi(g)` by summing over all of `U_n`.
pub fn whittaker_bruteforce(
    g: &MatFq,
    param: &PrincipalSeriesParam,
    cap: u64,
) -> Result<WhittakerValue, WhittakerError> {
    check_arity(g, param)?;
    let table = SummandTable::build(g, param.context(), cap)?;
    Ok(WhittakerValue {
        value: table.evaluate(param)?,
        chi: param.indices(),
        g: g.clone(),
        method: Method::Bruteforce,
    })
}

/// `[G:B^-] / |U_n|`, the factor turning `Psi` into the Bessel function.
pub fn bessel_factor(n: usize, q: u32) -> BigRational {
    BigRational::new(index_g_mod_b(n, q), unipotent_order(n, q))
}

#[derive(Clone, Debug)]
pub struct BesselValue {
    pub value: CycloNumber,
    /// False when the characters are not pairwise distinct; the value is computed anyway
    /// but the representation need not be irreducible.
    pub distinct: bool,
}

pub fn bessel_value(
    g: &MatFq,
    param: &PrincipalSeriesParam,
    cap: u64,
) -> Result<BesselValue, WhittakerError> {
    let psi = whittaker_bruteforce(g, param, cap)?.value;
    Ok(BesselValue {
        value: psi.scale(&bessel_factor(g.n(), param.context().q())),
        distinct: param.is_distinct(),
    })
}

/// Whether a monomial matrix is one of the block anti-diagonal representatives
/// `g_{n_1,...,n_s}(c_1,...,c_s)`.
pub fn is_admissible(m: &MatFq) -> bool {
    BlockAntidiagSpec::recognize(m).is_some()
}

/// Every monomial matrix `t w` of size `n`, permutations in lexicographic order, torus
/// entries as discrete logs in odometer order.
pub fn monomial_matrices(n: usize, f: &FqField) -> Vec<MatFq> {
    let q1 = (f.q() - 1) as usize;
    let mut out = Vec::new();
    for perm in itertools::Itertools::permutations(0..n, n) {
        for mut code in 0..q1.pow(n as u32) {
            let mut m = MatFq::zero(n);
            for i in (0..n).rev() {
                m.set(i, perm[i], f.units()[code % q1]);
                code /= q1;
            }
            out.push(m);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SupportViolation {
    pub g: MatFq,
    pub chi: Vec<u32>,
    pub value: CycloNumber,
}

#[derive(Clone, Debug, Default)]
pub struct SupportReport {
    pub monomials: usize,
    pub admissible: usize,
    pub evaluations: usize,
    pub violations: Vec<SupportViolation>,
}

/// Evaluates `Psi` at every monomial matrix for every character tuple and records the
/// nonzero values at non-admissible matrices.
pub fn support_check(ctx: &Context, n: usize, cap: u64) -> Result<SupportReport, WhittakerError> {
    let f = ctx.field();
    let params = PrincipalSeriesParam::all(ctx, n);
    let mut report = SupportReport::default();
    for g in monomial_matrices(n, f) {
        report.monomials += 1;
        if is_admissible(&g) {
            report.admissible += 1;
            continue;
        }
        let table = SummandTable::build(&g, ctx, cap)?;
        for param in &params {
            report.evaluations += 1;
            let v = table.evaluate(param)?;
            if !v.is_zero() {
                report.violations.push(SupportViolation {
                    g: g.clone(),
                    chi: param.indices(),
                    value: v,
                });
            }
        }
    }
    Ok(report)
}

/// `ind(g) = |U g U| / |U|`. The left cosets `u g U` inside the double coset are the orbit
/// of `g U` under `U`, whose stabilizer is `{u : g^-1 u g in U}`, so `ind(g) = |U| / |stabilizer|`.
pub fn double_coset_index(g: &MatFq, f: &FqField, cap: u64) -> Result<u64, WhittakerError> {
    let units = enumerate_unipotent(g.n(), f, cap)?;
    let g_inv = g.inverse(f)?;
    let stabilizer = units
        .iter()
        .filter(|u| g_inv.mul(&u.mul(g, f), f).is_unipotent_upper())
        .count() as u64;
    Ok(units.len() / stabilizer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    use crate::fqlinalg::{SpecialMatrix, DEFAULT_CAP};

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn index_values() {
        assert_eq!(index_g_mod_b(1, 7), BigInt::from(1));
        assert_eq!(index_g_mod_b(2, 3), BigInt::from(4));
        assert_eq!(index_g_mod_b(3, 3), BigInt::from(52));
        // |GL(3,3)| / |B^-| = 11232 / (8 * 27).
        assert_eq!(index_g_mod_b(3, 3), BigInt::from(11232 / 216));
        assert_eq!(unipotent_order(3, 5), BigInt::from(125));
    }

    #[test]
    fn psi_n_on_unipotent_and_permutations() {
        let ctx = Context::new(5, 1).unwrap();
        let f = ctx.field();
        let param = PrincipalSeriesParam::new(&ctx, &[1, 3, 2]).unwrap();
        for u in enumerate_unipotent(3, f, DEFAULT_CAP).unwrap().iter() {
            assert_eq!(psi_n_eval(&u, &param).unwrap(), ctx.psi().eval(u.superdiagonal_sum(f)));
        }
        for perm in itertools::Itertools::permutations(0..3usize, 3) {
            let w = MatFq::from_fn(3, |i, j| if perm[i] == j { Fq::ONE } else { Fq::ZERO });
            let v = psi_n_eval(&w, &param).unwrap();
            assert_eq!(v.is_zero(), w != MatFq::identity(3));
        }
        assert!(psi_n_eval(&MatFq::zero(3), &param).is_err());
    }

    #[test]
    fn psi_n_factorization_matches_minor_formula() {
        let ctx = Context::new(5, 1).unwrap();
        let param = PrincipalSeriesParam::new(&ctx, &[0, 1, 3]).unwrap();
        let mut state = 7u64;
        let mut done = 0;
        while done < 1000 {
            let g = MatFq::from_fn(3, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Fq::from_raw(((state >> 33) % 5) as u32)
            });
            if g.det(ctx.field()).is_zero() {
                continue;
            }
            done += 1;
            assert_eq!(psi_n_eval(&g, &param).unwrap(), psi_n_eval_minors(&g, &param).unwrap());
        }
    }

    #[test]
    fn value_at_identity() {
        for (p, n) in [(3, 2), (3, 3), (5, 2)] {
            let ctx = Context::new(p, 1).unwrap();
            for param in PrincipalSeriesParam::all(&ctx, n) {
                let v = whittaker_bruteforce(&MatFq::identity(n), &param, DEFAULT_CAP).unwrap();
                let expect = BigRational::new(unipotent_order(n, ctx.q()), index_g_mod_b(n, ctx.q()));
                assert_eq!(v.value.as_rational(), Some(&expect));
                let j = bessel_value(&MatFq::identity(n), &param, DEFAULT_CAP).unwrap();
                assert_eq!(j.value, CycloNumber::one(ctx.ring()));
                assert_eq!(j.distinct, param.is_distinct());
            }
        }
        let ctx = Context::new(3, 1).unwrap();
        let param = PrincipalSeriesParam::new(&ctx, &[0, 1]).unwrap();
        let v = whittaker_bruteforce(&MatFq::identity(2), &param, DEFAULT_CAP).unwrap();
        assert_eq!(v.value.as_rational(), Some(&rat(3, 4)));
        assert_eq!(v.method, Method::Bruteforce);
    }

    #[test]
    fn bi_equivariance_n2_q3() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        let units: Vec<MatFq> = enumerate_unipotent(2, f, DEFAULT_CAP).unwrap().iter().collect();
        let monos = monomial_matrices(2, f);
        for param in PrincipalSeriesParam::all(&ctx, 2) {
            for g in &monos {
                let base = whittaker_bruteforce(g, &param, DEFAULT_CAP).unwrap().value;
                for u1 in &units {
                    for u2 in &units {
                        let h = u1.mul(g, f).mul(u2, f);
                        let lhs = whittaker_bruteforce(&h, &param, DEFAULT_CAP).unwrap().value;
                        let e = ctx.add_exp(
                            ctx.psi_exp(u1.superdiagonal_sum(f)),
                            ctx.psi_exp(u2.superdiagonal_sum(f)),
                        );
                        assert_eq!(lhs, base.mul_root(e as i64));
                    }
                }
            }
        }
    }

    #[test]
    fn summation_order_independent() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        let g = BlockAntidiagSpec::antidiag(&[Fq::ONE, f.from_int(2), Fq::ONE]).unwrap().matrix();
        let units: Vec<MatFq> = enumerate_unipotent(3, f, DEFAULT_CAP).unwrap().iter().collect();
        let idx = BigRational::new(BigInt::one(), index_g_mod_b(3, 3));
        for param in PrincipalSeriesParam::all(&ctx, 3) {
            let term = |u: &MatFq| {
                let v = psi_n_eval(&u.mul(&g, f), &param).unwrap();
                v.mul_root(-(ctx.psi_exp(u.superdiagonal_sum(f)) as i64))
            };
            let mut fwd = CycloNumber::zero(ctx.ring());
            for u in &units {
                fwd += &term(u);
            }
            let mut rev = CycloNumber::zero(ctx.ring());
            for u in units.iter().rev() {
                rev += &term(u);
            }
            assert_eq!(fwd, rev);
            let table = whittaker_bruteforce(&g, &param, DEFAULT_CAP).unwrap().value;
            assert_eq!(fwd.scale(&idx), table);
        }
    }

    #[test]
    fn values_have_bounded_denominator() {
        let ctx = Context::new(5, 1).unwrap();
        let f = ctx.field();
        let g = BlockAntidiagSpec::antidiag(&[f.from_int(2), f.from_int(3)]).unwrap().matrix();
        let idx = BigRational::from_integer(index_g_mod_b(2, 5));
        for param in PrincipalSeriesParam::all(&ctx, 2) {
            let v = whittaker_bruteforce(&g, &param, DEFAULT_CAP).unwrap().value.scale(&idx);
            assert!(v.coeffs().iter().all(|c| c.is_integer()));
        }
    }

    #[test]
    fn monomial_enumeration_and_admissibility() {
        let f = FqField::new(3, 1).unwrap();
        let m2 = monomial_matrices(2, &f);
        assert_eq!(m2.len(), 8);
        assert_eq!(m2.iter().filter(|m| is_admissible(m)).count(), 2 + 4);
        let m3 = monomial_matrices(3, &f);
        assert_eq!(m3.len(), 48);
        assert!(m3.iter().all(|m| m.is_monomial()));
        assert!(is_admissible(&BlockAntidiagSpec::max_right(3, f.from_int(2)).unwrap().matrix()));
        assert!(!is_admissible(&MatFq::diag(&[Fq::ONE, f.from_int(2)])));
    }

    #[test]
    fn support_n2_q3() {
        let ctx = Context::new(3, 1).unwrap();
        let r = support_check(&ctx, 2, DEFAULT_CAP).unwrap();
        assert_eq!((r.monomials, r.admissible), (8, 6));
        assert!(r.violations.is_empty());
        assert_eq!(r.evaluations, 2 * 4);
    }

    #[test]
    fn double_coset_indices() {
        let f = FqField::new(3, 1).unwrap();
        assert_eq!(double_coset_index(&MatFq::identity(3), &f, DEFAULT_CAP).unwrap(), 1);
        let w0 = crate::fqlinalg::mat_special(2, &SpecialMatrix::W0).unwrap();
        assert_eq!(double_coset_index(&w0, &f, DEFAULT_CAP).unwrap(), 3);
        assert!(double_coset_index(&MatFq::identity(4), &f, 100).unwrap_err().is_cap());
    }

    #[test]
    fn coset_index_matches_full_enumeration() {
        let f = FqField::new(3, 1).unwrap();
        let units: Vec<MatFq> = enumerate_unipotent(3, &f, DEFAULT_CAP).unwrap().iter().collect();
        for g in monomial_matrices(3, &f).iter().step_by(5) {
            let mut coset = HashSet::new();
            for u1 in &units {
                let u1g = u1.mul(g, &f);
                for u2 in &units {
                    coset.insert(u1g.mul(u2, &f));
                }
            }
            let full = coset.len() as u64 / units.len() as u64;
            assert_eq!(double_coset_index(g, &f, DEFAULT_CAP).unwrap(), full);
        }
    }
}
