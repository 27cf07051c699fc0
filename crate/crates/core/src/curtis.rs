//! Curtis homomorphism values on the split torus: closed-form tables, the Fourier
//! inversion oracle built from brute-force Whittaker values, and the unipotent Hecke
//! algebra `e C[G] e` with its Bessel functionals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde_json::json;

use crate::chars::{Context, PrincipalSeriesParam};
use crate::cyclo::{CycloNumber, CycloSum, RootCounts};
use crate::fqlinalg::{enumerate_unipotent, BlockAntidiagSpec, LinalgError, MatFq};
use crate::gfq::{Fq, FqField};
use crate::gtformulas::{enumerate_patterns, pattern_weight, unit_tuples};
use crate::whittaker::{
    bessel_factor, is_admissible, monomial_matrices, unipotent_order, SummandTable, WhittakerError,
};

/// The block anti-diagonal families with closed forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GDescriptor {
    /// `g_{n-1,1}(1, a)`.
    MaxRight(Fq),
    /// `g_{1,n-1}(a, 1)`.
    MaxLeft(Fq),
    /// Anti-diagonal with `a_1` top-right.
    Minimal(Vec<Fq>),
}

impl GDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            GDescriptor::MaxRight(_) => "maxright",
            GDescriptor::MaxLeft(_) => "maxleft",
            GDescriptor::Minimal(_) => "minimal",
        }
    }

    pub fn args(&self) -> Vec<Fq> {
        match self {
            GDescriptor::MaxRight(a) | GDescriptor::MaxLeft(a) => vec![*a],
            GDescriptor::Minimal(a) => a.clone(),
        }
    }

    pub fn matrix(&self, n: usize) -> Result<MatFq, LinalgError> {
        let spec = match self {
            GDescriptor::MaxRight(a) => BlockAntidiagSpec::max_right(n, *a)?,
            GDescriptor::MaxLeft(a) => BlockAntidiagSpec::max_left(n, *a)?,
            GDescriptor::Minimal(a) => {
                if a.len() != n {
                    return Err(LinalgError::SizeMismatch {
                        left: n,
                        right: a.len(),
                    });
                }
                BlockAntidiagSpec::antidiag(a)?
            }
        };
        Ok(spec.matrix())
    }

    /// The determinant every supported torus point must have.
    pub fn required_det(&self, n: usize, f: &FqField) -> Fq {
        let sign = |e: usize| if e % 2 == 0 { Fq::ONE } else { f.neg(Fq::ONE) };
        match self {
            GDescriptor::MaxRight(a) | GDescriptor::MaxLeft(a) => f.mul(sign(n - 1), *a),
            GDescriptor::Minimal(a) => a.iter().fold(sign(n * (n - 1) / 2), |acc, &x| f.mul(acc, x)),
        }
    }

    /// `{"kind": ..., "a": [...]}` with integer field encodings.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": self.kind(),
            "a": self.args().iter().map(|x| x.raw()).collect::<Vec<_>>(),
        })
    }
}

/// Values `f(t)` on the diagonal torus, keyed by the discrete logs of `t`; zero entries
/// are omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurtisTable {
    pub g: GDescriptor,
    pub n: usize,
    pub entries: BTreeMap<Vec<u32>, CycloNumber>,
}

impl CurtisTable {
    fn new(g: GDescriptor, n: usize) -> Self {
        CurtisTable {
            g,
            n,
            entries: BTreeMap::new(),
        }
    }

    fn insert(&mut self, key: Vec<u32>, v: CycloNumber) {
        if !v.is_zero() {
            self.entries.insert(key, v);
        }
    }

    pub fn get(&self, t: &[u32]) -> Option<&CycloNumber> {
        self.entries.get(t)
    }

    /// Torus points where the two tables differ.
    pub fn diff(&self, other: &CurtisTable) -> Vec<Vec<u32>> {
        let mut keys: Vec<&Vec<u32>> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|k| self.entries.get(*k) != other.entries.get(*k))
            .cloned()
            .collect()
    }

    /// Supported points whose determinant differs from the one the family requires.
    pub fn support_violations(&self, f: &FqField) -> Vec<Vec<u32>> {
        let want = self.g.required_det(self.n, f);
        self.entries
            .keys()
            .filter(|k| k.iter().fold(Fq::ONE, |acc, &t| f.mul(acc, f.exp(t as i64))) != want)
            .cloned()
            .collect()
    }

    /// `sum_t f(t) chi(t)`.
    pub fn pair(&self, param: &PrincipalSeriesParam) -> CycloNumber {
        let ctx = param.context();
        let f = ctx.field();
        let mut sum = CycloSum::new(ctx.ring());
        for (k, v) in &self.entries {
            let e = param.torus_exp(k.iter().map(|&t| f.exp(t as i64))).expect("units");
            sum.add_shifted(v, e as i64);
        }
        sum.finish()
    }

    /// `{"g": ..., "n": ..., "entries": [{"t": [...], "value": ...}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(t, v)| json!({"t": t, "value": v.to_json()}))
            .collect();
        json!({"g": self.g.to_json(), "n": self.n, "entries": entries})
    }
}

fn torus_keys(f: &FqField, n: usize) -> impl Iterator<Item = (Vec<u32>, Vec<Fq>)> + '_ {
    unit_tuples(f, n).map(move |t| {
        let k = t.iter().map(|&x| f.dlog(x).expect("unit")).collect();
        (k, t)
    })
}

fn maximal_table(a: Fq, n: usize, ctx: &Context, right: bool) -> Result<CurtisTable, WhittakerError> {
    if a.is_zero() {
        return Err(WhittakerError::NonUnit);
    }
    if n < 2 {
        return Err(WhittakerError::Arity { expected: 2, got: n });
    }
    let f = ctx.field();
    let g = if right {
        GDescriptor::MaxRight(a)
    } else {
        GDescriptor::MaxLeft(a)
    };
    let want = g.required_det(n, f);
    let scale = BigRational::new(BigInt::one(), Pow::pow(BigInt::from(ctx.q()), (n - 1) as u32));
    let mut table = CurtisTable::new(g, n);
    for (key, t) in torus_keys(f, n) {
        if t.iter().fold(Fq::ONE, |acc, &x| f.mul(acc, x)) != want {
            continue;
        }
        let s = if right {
            t.iter().fold(Fq::ZERO, |acc, &x| f.add(acc, f.inv(x).expect("unit")))
        } else {
            f.neg(t.iter().fold(Fq::ZERO, |acc, &x| f.add(acc, x)))
        };
        table.insert(key, ctx.psi().eval(s).scale(&scale));
    }
    Ok(table)
}

/// `f(t) = q^{1-n} psi(Tr t^{-1})` on `det t = (-1)^{n-1} a_n`, for `g_{n-1,1}(1, a_n)`.
pub fn curtis_max_right(a_n: Fq, n: usize, ctx: &Context) -> Result<CurtisTable, WhittakerError> {
    maximal_table(a_n, n, ctx, true)
}

/// `f(t) = q^{1-n} psi(-Tr t)` on `det t = (-1)^{n-1} a_1`, for `g_{1,n-1}(a_1, 1)`.
pub fn curtis_max_left(a_1: Fq, n: usize, ctx: &Context) -> Result<CurtisTable, WhittakerError> {
    maximal_table(a_1, n, ctx, false)
}

/// `f(t) = |U_n|^{-1} sum prod_{j>=2} Q~(row_j; row_{j-1})` over all patterns with top row
/// `a` whose torus point `(d_1, ..., d_n)` is `t`.
pub fn curtis_minimal(a: &[Fq], ctx: &Context, cap: u64) -> Result<CurtisTable, WhittakerError> {
    let n = a.len();
    if a.iter().any(|x| x.is_zero()) {
        return Err(WhittakerError::NonUnit);
    }
    let f = ctx.field();
    let mut fibers: BTreeMap<Vec<u32>, RootCounts> = BTreeMap::new();
    for pattern in enumerate_patterns(n, f, cap)? {
        let (d, e) = pattern_weight(ctx, &pattern, a)?;
        let key = d.iter().map(|&x| f.dlog(x).expect("unit")).collect();
        fibers.entry(key).or_insert_with(|| RootCounts::new(ctx.m())).push(e);
    }
    let scale = BigRational::new(BigInt::one(), unipotent_order(n, ctx.q()));
    let mut table = CurtisTable::new(GDescriptor::Minimal(a.to_vec()), n);
    for (key, counts) in fibers {
        table.insert(key, counts.to_cyclo(ctx.ring()).scale(&scale));
    }
    Ok(table)
}

/// The unique table with `sum_t f(t) chi(t) = ([G:B^-]/|U_n|) Psi_chi(g)` for every
/// character tuple, by inversion over the torus.
pub fn fourier_inversion_oracle(
    g: &GDescriptor,
    n: usize,
    ctx: &Context,
    cap: u64,
) -> Result<CurtisTable, WhittakerError> {
    let f = ctx.field();
    let summands = SummandTable::build(&g.matrix(n)?, ctx, cap)?;
    let params = PrincipalSeriesParam::all(ctx, n);
    let raws: Vec<RootCounts> = params
        .iter()
        .map(|p| summands.raw_counts(p))
        .collect::<Result<_, _>>()?;
    // [G:B^-] Psi = raw, so J = raw / |U_n| and f(t) = sum_chi conj(chi(t)) J / (q-1)^n.
    let denom = unipotent_order(n, ctx.q()) * Pow::pow(BigInt::from(ctx.q() - 1), n as u32);
    let scale = BigRational::new(BigInt::one(), denom);
    let mut table = CurtisTable::new(g.clone(), n);
    for (key, t) in torus_keys(f, n) {
        let mut acc = RootCounts::new(ctx.m());
        for (param, raw) in params.iter().zip(&raws) {
            let shift = ctx.neg_exp(param.torus_exp(t.iter().copied()).expect("units"));
            for (e, &c) in raw.counts().iter().enumerate() {
                if c != 0 {
                    acc.push_n(ctx.add_exp(e as u32, shift), c);
                }
            }
        }
        table.insert(key, acc.to_cyclo(ctx.ring()).scale(&scale));
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeckeError {
    #[error(transparent)]
    Whittaker(#[from] WhittakerError),
    #[error("group of order {order} is too large to convolve (cap {cap})")]
    GroupTooLarge { order: u128, cap: u64 },
    #[error("basis element {0} has a non-rational diagonal coefficient")]
    Degenerate(usize),
    #[error("product does not lie in the span of the basis")]
    NotInSpan,
    #[error("basis index {0} out of range")]
    BadIndex(usize),
}

/// A function on the group with values in `Q(zeta_m)`, stored as integer root counts with
/// a common rational scale.
#[derive(Clone, Debug)]
struct GroupFunction {
    values: HashMap<MatFq, RootCounts>,
}

/// `e C[G] e` with `e = |U|^{-1} sum_u conj(psi(u)) u`, on the basis `e g e` for the
/// admissible block anti-diagonal `g`.
#[derive(Clone, Debug)]
pub struct HeckeAlgebra {
    ctx: Context,
    n: usize,
    basis: Vec<MatFq>,
    /// `structure[i][j]` holds the coordinates of `(e b_i e)(e b_j e)`.
    structure: Vec<Vec<HeckeElement>>,
}

/// Coordinates in the basis of a `HeckeAlgebra`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeElement {
    pub coeffs: BTreeMap<usize, CycloNumber>,
}

impl HeckeElement {
    pub fn basis(i: usize, ring: &std::sync::Arc<crate::cyclo::CycloRing>) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, CycloNumber::one(ring));
        HeckeElement { coeffs }
    }

    fn add_scaled(&mut self, i: usize, c: &CycloNumber) {
        let entry = self.coeffs.remove(&i);
        let v = match entry {
            Some(old) => &old + c,
            None => c.clone(),
        };
        if !v.is_zero() {
            self.coeffs.insert(i, v);
        }
    }
}

impl fmt::Display for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|(i, c)| format!("({c})*b{i}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl HeckeAlgebra {
    /// Builds the algebra and all structure constants by convolution over the group.
    pub fn new(ctx: &Context, n: usize, cap: u64) -> Result<HeckeAlgebra, HeckeError> {
        let f = ctx.field();
        let q = ctx.q() as u128;
        let order: u128 = (0..n as u32).map(|i| q.pow(n as u32) - q.pow(i)).product();
        if order > cap as u128 {
            return Err(HeckeError::GroupTooLarge { order, cap });
        }
        let basis: Vec<MatFq> = monomial_matrices(n, f).into_iter().filter(is_admissible).collect();
        let units: Vec<MatFq> = enumerate_unipotent(n, f, cap)
            .map_err(WhittakerError::from)?
            .iter()
            .collect();
        let funcs: Vec<GroupFunction> = basis.iter().map(|g| idempotent_sandwich(g, &units, ctx)).collect();
        let u2 = Pow::pow(BigInt::from(units.len()), 2u32);
        // Diagonal coefficients (e z e)(z), rational and nonzero.
        let diag: Vec<BigRational> = basis
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let v = funcs[i].values[z].to_cyclo(ctx.ring());
                v.as_rational()
                    .filter(|r| !r.is_zero())
                    .map(|r| r / BigRational::from_integer(u2.clone()))
                    .ok_or(HeckeError::Degenerate(i))
            })
            .collect::<Result<_, _>>()?;
        let mut structure = Vec::with_capacity(basis.len());
        for i in 0..basis.len() {
            let mut row = Vec::with_capacity(basis.len());
            for j in 0..basis.len() {
                row.push(decompose(&convolve_functions(&funcs[i], &funcs[j], f, ctx), &basis, &funcs, &diag, &u2, ctx)?);
            }
            structure.push(row);
        }
        Ok(HeckeAlgebra {
            ctx: ctx.clone(),
            n,
            basis,
            structure,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[MatFq] {
        &self.basis
    }

    pub fn basis_element(&self, i: usize) -> Result<HeckeElement, HeckeError> {
        if i >= self.basis.len() {
            return Err(HeckeError::BadIndex(i));
        }
        Ok(HeckeElement::basis(i, self.ctx.ring()))
    }

    /// The basis element `e I e = e`.
    pub fn unit(&self) -> HeckeElement {
        let i = self
            .basis
            .iter()
            .position(|b| *b == MatFq::identity(self.n))
            .expect("identity is admissible");
        HeckeElement::basis(i, self.ctx.ring())
    }

    pub fn convolve(&self, x: &HeckeElement, y: &HeckeElement) -> Result<HeckeElement, HeckeError> {
        let mut out = HeckeElement {
            coeffs: BTreeMap::new(),
        };
        for (&i, a) in &x.coeffs {
            for (&j, b) in &y.coeffs {
                let row = self.structure.get(i).ok_or(HeckeError::BadIndex(i))?;
                let prod = row.get(j).ok_or(HeckeError::BadIndex(j))?;
                let ab = a * b;
                for (&k, c) in &prod.coeffs {
                    out.add_scaled(k, &(&ab * c));
                }
            }
        }
        Ok(out)
    }

    /// Bessel values `J_chi(g)` at every basis element.
    pub fn bessel_values(&self, param: &PrincipalSeriesParam, cap: u64) -> Result<Vec<CycloNumber>, HeckeError> {
        let factor = bessel_factor(self.n, self.ctx.q());
        self.basis
            .iter()
            .map(|g| {
                let t = SummandTable::build(g, &self.ctx, cap)?;
                Ok(t.evaluate(param)?.scale(&factor))
            })
            .collect()
    }

    /// The functional `e g e -> J_chi(g)`, given precomputed basis values.
    pub fn bessel_functional(&self, x: &HeckeElement, values: &[CycloNumber]) -> CycloNumber {
        let mut acc = CycloNumber::zero(self.ctx.ring());
        for (&i, c) in &x.coeffs {
            acc += &(c * &values[i]);
        }
        acc
    }
}

/// `|U|^2 (e g e)` as a function on the group: `h -> sum_{u_1 g u_2 = h} conj(psi(u_1 u_2))`.
fn idempotent_sandwich(g: &MatFq, units: &[MatFq], ctx: &Context) -> GroupFunction {
    let f = ctx.field();
    let mut values: HashMap<MatFq, RootCounts> = HashMap::new();
    for u1 in units {
        let e1 = ctx.psi_exp(u1.superdiagonal_sum(f));
        let u1g = u1.mul(g, f);
        for u2 in units {
            let e = ctx.neg_exp(ctx.add_exp(e1, ctx.psi_exp(u2.superdiagonal_sum(f))));
            values
                .entry(u1g.mul(u2, f))
                .or_insert_with(|| RootCounts::new(ctx.m()))
                .push(e);
        }
    }
    GroupFunction { values }
}

/// Group-algebra product; scales multiply.
fn convolve_functions(a: &GroupFunction, b: &GroupFunction, f: &FqField, ctx: &Context) -> GroupFunction {
    let mut values: HashMap<MatFq, RootCounts> = HashMap::new();
    for (ga, ca) in &a.values {
        for (gb, cb) in &b.values {
            let entry = values
                .entry(ga.mul(gb, f))
                .or_insert_with(|| RootCounts::new(ctx.m()));
            for (ea, &na) in ca.counts().iter().enumerate() {
                if na == 0 {
                    continue;
                }
                for (eb, &nb) in cb.counts().iter().enumerate() {
                    if nb != 0 {
                        entry.push_n(ctx.add_exp(ea as u32, eb as u32), na * nb);
                    }
                }
            }
        }
    }
    GroupFunction { values }
}

/// Writes `|U|^4 P` (a product of two sandwiches) in the basis `e z e` and checks that
/// nothing is left over.
fn decompose(
    product: &GroupFunction,
    basis: &[MatFq],
    funcs: &[GroupFunction],
    diag: &[BigRational],
    u2: &BigInt,
    ctx: &Context,
) -> Result<HeckeElement, HeckeError> {
    let ring = ctx.ring();
    let u4 = BigRational::from_integer(u2 * u2);
    let u2r = BigRational::from_integer(u2.clone());
    let value = |func: &GroupFunction, h: &MatFq, scale: &BigRational| -> CycloNumber {
        func.values
            .get(h)
            .map(|c| c.to_cyclo(ring).scale(&scale.recip()))
            .unwrap_or_else(|| CycloNumber::zero(ring))
    };
    let mut out = HeckeElement {
        coeffs: BTreeMap::new(),
    };
    for (i, z) in basis.iter().enumerate() {
        let c = value(product, z, &u4).scale(&diag[i].recip());
        out.add_scaled(i, &c);
    }
    let mut support: Vec<&MatFq> = product.values.keys().collect();
    for func in funcs {
        support.extend(func.values.keys());
    }
    for h in support {
        let mut residual = value(product, h, &u4);
        for (&i, c) in &out.coeffs {
            residual = &residual - &(c * &value(&funcs[i], h, &u2r));
        }
        if !residual.is_zero() {
            return Err(HeckeError::NotInSpan);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqlinalg::DEFAULT_CAP;

    #[test]
    fn maximal_tables_have_expected_support() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        for &a in f.units() {
            let r = curtis_max_right(a, 2, &ctx).unwrap();
            assert_eq!(r.entries.len(), 2);
            assert!(r.support_violations(f).is_empty());
            let l = curtis_max_left(a, 2, &ctx).unwrap();
            assert_eq!(l.entries.len(), 2);
            let third = BigRational::new(3.into(), 1.into());
            for v in l.entries.values() {
                let (re, im) = v.scale(&third).approx();
                assert!((re.hypot(im) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn oracle_reconstructs_bessel_values() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        let g = GDescriptor::Minimal(vec![Fq::ONE, f.from_int(2)]);
        let table = fourier_inversion_oracle(&g, 2, &ctx, DEFAULT_CAP).unwrap();
        for param in PrincipalSeriesParam::all(&ctx, 2) {
            let j = crate::whittaker::bessel_value(&g.matrix(2).unwrap(), &param, DEFAULT_CAP).unwrap();
            assert_eq!(table.pair(&param), j.value);
        }
    }

    #[test]
    fn minimal_n2_matches_oracle_q5() {
        let ctx = Context::new(5, 1).unwrap();
        let f = ctx.field();
        for a in unit_tuples(f, 2) {
            let closed = curtis_minimal(&a, &ctx, DEFAULT_CAP).unwrap();
            let oracle = fourier_inversion_oracle(&GDescriptor::Minimal(a.clone()), 2, &ctx, DEFAULT_CAP).unwrap();
            assert_eq!(closed, oracle);
            assert!(closed.support_violations(f).is_empty());
        }
    }

    #[test]
    fn maximal_tables_match_oracle_small() {
        let ctx = Context::new(3, 1).unwrap();
        for &a in ctx.field().units() {
            for n in [2, 3] {
                let r = fourier_inversion_oracle(&GDescriptor::MaxRight(a), n, &ctx, DEFAULT_CAP).unwrap();
                assert_eq!(curtis_max_right(a, n, &ctx).unwrap(), r);
                let l = fourier_inversion_oracle(&GDescriptor::MaxLeft(a), n, &ctx, DEFAULT_CAP).unwrap();
                assert_eq!(curtis_max_left(a, n, &ctx).unwrap(), l);
            }
        }
    }

    #[test]
    fn minimal_n3_differs_from_oracle_at_one_point() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        let ninth = BigRational::new(1.into(), 9.into());
        for a in unit_tuples(f, 3) {
            let closed = curtis_minimal(&a, &ctx, DEFAULT_CAP).unwrap();
            let oracle = fourier_inversion_oracle(&GDescriptor::Minimal(a.clone()), 3, &ctx, DEFAULT_CAP).unwrap();
            let t3 = f.neg(f.div(f.mul(a[0], a[2]), a[1]).unwrap());
            let star: Vec<u32> = [a[1], a[1], t3].iter().map(|&x| f.dlog(x).unwrap()).collect();
            assert_eq!(closed.diff(&oracle), vec![star.clone()]);
            let zero = CycloNumber::zero(ctx.ring());
            let gap = oracle.get(&star).unwrap_or(&zero) - closed.get(&star).unwrap_or(&zero);
            assert_eq!(gap, CycloNumber::one(ctx.ring()).scale(&ninth));
        }
    }

    #[test]
    fn hecke_n2_q3() {
        let ctx = Context::new(3, 1).unwrap();
        let h = HeckeAlgebra::new(&ctx, 2, DEFAULT_CAP).unwrap();
        assert_eq!(h.basis().len(), 6);
        let unit = h.unit();
        for i in 0..h.basis().len() {
            let b = h.basis_element(i).unwrap();
            assert_eq!(h.convolve(&unit, &b).unwrap(), b);
            assert_eq!(h.convolve(&b, &unit).unwrap(), b);
            for j in 0..h.basis().len() {
                let c = h.basis_element(j).unwrap();
                assert_eq!(h.convolve(&b, &c).unwrap(), h.convolve(&c, &b).unwrap());
            }
        }
        for param in PrincipalSeriesParam::all(&ctx, 2).into_iter().filter(|p| p.is_distinct()) {
            let vals = h.bessel_values(&param, DEFAULT_CAP).unwrap();
            for i in 0..h.basis().len() {
                for j in 0..h.basis().len() {
                    let (x, y) = (h.basis_element(i).unwrap(), h.basis_element(j).unwrap());
                    let xy = h.convolve(&x, &y).unwrap();
                    assert_eq!(
                        h.bessel_functional(&xy, &vals),
                        &h.bessel_functional(&x, &vals) * &h.bessel_functional(&y, &vals)
                    );
                }
            }
        }
        assert!(matches!(h.basis_element(99), Err(HeckeError::BadIndex(99))));
        assert!(matches!(HeckeAlgebra::new(&ctx, 3, 1000), Err(HeckeError::GroupTooLarge { .. })));
    }

    #[test]
    fn table_json_shape() {
        let ctx = Context::new(3, 1).unwrap();
        let t = curtis_max_left(Fq::ONE, 2, &ctx).unwrap();
        let v = t.to_json();
        assert_eq!(v["g"]["kind"], "maxleft");
        assert_eq!(v["entries"].as_array().unwrap().len(), 2);
        assert!(v["entries"][0]["value"]["coeffs"].is_array());
    }
}
