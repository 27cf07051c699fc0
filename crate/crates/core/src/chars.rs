//! Additive and multiplicative characters of `F_q` with values in `Q(zeta_m)`, `m = p(q-1)`.
//!
//! Characters are evaluated to exponents of `zeta_m`; `psi(x) = zeta_p^{Tr x}` lifts to
//! exponent `(q-1) Tr(x)` and `chi_j(g^t) = zeta_{q-1}^{jt}` to exponent `p j t`.

use std::sync::Arc;

use thiserror::Error;

use crate::cyclo::{CycloError, CycloNumber, CycloRing};
use crate::fqlinalg::MatFq;
use crate::gfq::{Fq, FqField, GfqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharError {
    #[error(transparent)]
    Field(#[from] GfqError),
    #[error(transparent)]
    Cyclo(#[from] CycloError),
    #[error("matrix is not unipotent upper triangular")]
    NotUnipotent,
    #[error("matrix is not lower triangular with unit diagonal entries")]
    NotBorel,
    #[error("matrix is not an invertible diagonal matrix")]
    NotTorus,
    #[error("character index {index} out of range for q = {q}")]
    BadIndex { index: u32, q: u32 },
    #[error("expected {expected} characters, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("multiplicative character evaluated at zero")]
    ZeroArgument,
}

/// Field together with the value ring `Q(zeta_{p(q-1)})`.
#[derive(Clone, Debug)]
pub struct Context {
    field: Arc<FqField>,
    ring: Arc<CycloRing>,
}

impl Context {
    pub fn new(p: u64, k: u32) -> Result<Context, CharError> {
        let field = FqField::shared(p, k)?;
        Self::from_field(field)
    }

    pub fn from_field(field: Arc<FqField>) -> Result<Context, CharError> {
        let m = field.p() * (field.q() - 1);
        let ring = CycloRing::shared(m)?;
        Ok(Context { field, ring })
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// Conductor `m = p(q-1)`.
    pub fn m(&self) -> u32 {
        self.ring.conductor()
    }

    pub fn psi(&self) -> AddCharacter {
        AddCharacter { ctx: self.clone() }
    }

    pub fn chi(&self, index: u32) -> Result<MultCharacter, CharError> {
        if index >= self.q() - 1 {
            return Err(CharError::BadIndex {
                index,
                q: self.q(),
            });
        }
        Ok(MultCharacter {
            ctx: self.clone(),
            index,
        })
    }

    /// `psi(x)` as an exponent of `zeta_m`.
    #[inline]
    pub fn psi_exp(&self, x: Fq) -> u32 {
        self.field.trace(x) * (self.q() - 1)
    }

    /// `chi_index(x)` as an exponent of `zeta_m`; `None` when `x = 0`.
    #[inline]
    pub fn chi_exp(&self, index: u32, x: Fq) -> Option<u32> {
        let t = self.field.dlog(x)?;
        let q1 = (self.q() - 1) as u64;
        Some(((index as u64 * t as u64 % q1) * self.field.p() as u64) as u32)
    }

    /// Adds exponents mod `m`.
    #[inline]
    pub fn add_exp(&self, a: u32, b: u32) -> u32 {
        let m = self.m();
        let s = a + b;
        if s >= m {
            s - m
        } else {
            s
        }
    }

    #[inline]
    pub fn neg_exp(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.m() - a
        }
    }

    pub fn root(&self, exponent: u32) -> CycloNumber {
        CycloNumber::root(&self.ring, exponent as i64)
    }
}

/// The fixed additive character `psi(x) = zeta_p^{Tr(x)}`.
#[derive(Clone, Debug)]
pub struct AddCharacter {
    ctx: Context,
}

impl AddCharacter {
    /// Name recorded in serialized output.
    pub const CONVENTION: &'static str = "trace-standard";

    pub fn eval(&self, x: Fq) -> CycloNumber {
        self.ctx.root(self.ctx.psi_exp(x))
    }

    pub fn exponent(&self, x: Fq) -> u32 {
        self.ctx.psi_exp(x)
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }
}

#[derive(Clone, Debug)]
pub struct MultCharacter {
    ctx: Context,
    index: u32,
}

impl MultCharacter {
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn eval(&self, x: Fq) -> Result<CycloNumber, CharError> {
        self.exponent(x).map(|e| self.ctx.root(e))
    }

    pub fn exponent(&self, x: Fq) -> Result<u32, CharError> {
        self.ctx
            .chi_exp(self.index, x)
            .ok_or(CharError::ZeroArgument)
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }
}

/// The tuple `(chi_1, ..., chi_n)` parametrizing a principal series, with the fixed `psi`.
#[derive(Clone, Debug)]
pub struct PrincipalSeriesParam {
    chars: Vec<MultCharacter>,
    psi: AddCharacter,
    distinct: bool,
}

impl PrincipalSeriesParam {
    pub fn new(ctx: &Context, indices: &[u32]) -> Result<Self, CharError> {
        let chars = indices
            .iter()
            .map(|&j| ctx.chi(j))
            .collect::<Result<Vec<_>, _>>()?;
        let distinct = indices
            .iter()
            .enumerate()
            .all(|(i, a)| indices[i + 1..].iter().all(|b| a != b));
        Ok(PrincipalSeriesParam {
            chars,
            psi: ctx.psi(),
            distinct,
        })
    }

    /// Every tuple in `{0..q-2}^n`, in lexicographic order.
    pub fn all(ctx: &Context, n: usize) -> Vec<PrincipalSeriesParam> {
        let base = ctx.q() - 1;
        let total = (base as usize).pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut js = vec![0u32; n];
                for slot in js.iter_mut().rev() {
                    *slot = (idx % base as usize) as u32;
                    idx /= base as usize;
                }
                PrincipalSeriesParam::new(ctx, &js).expect("indices in range")
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.chars.len()
    }

    pub fn context(&self) -> &Context {
        &self.psi.ctx
    }

    pub fn psi(&self) -> &AddCharacter {
        &self.psi
    }

    pub fn chars(&self) -> &[MultCharacter] {
        &self.chars
    }

    pub fn indices(&self) -> Vec<u32> {
        self.chars.iter().map(|c| c.index).collect()
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    /// `(chi_1, ..., chi_r)`.
    pub fn truncate(&self, r: usize) -> PrincipalSeriesParam {
        let idx = self.indices();
        PrincipalSeriesParam::new(self.context(), &idx[..r]).expect("valid prefix")
    }

    /// `prod_i chi_i(d_i)` as an exponent; `None` if some `d_i = 0`.
    #[inline]
    pub fn torus_exp(&self, diag: impl IntoIterator<Item = Fq>) -> Option<u32> {
        let ctx = self.context();
        let mut acc = 0u32;
        for (c, d) in self.chars.iter().zip(diag) {
            acc = ctx.add_exp(acc, ctx.chi_exp(c.index, d)?);
        }
        Some(acc)
    }

    /// Exponent of `chi_j(x)` for the `j`-th character (1-based).
    #[inline]
    pub fn chi_exp(&self, j: usize, x: Fq) -> Option<u32> {
        self.context().chi_exp(self.chars[j - 1].index, x)
    }

    /// `{"psi": "trace-standard", "chi": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "psi": AddCharacter::CONVENTION,
            "chi": self.indices(),
        })
    }
}

/// `psi` of the sum of the superdiagonal of a unipotent upper triangular matrix.
pub fn psi_on_unipotent(u: &MatFq, psi: &AddCharacter) -> Result<CycloNumber, CharError> {
    let f = psi.ctx.field();
    if !u.is_unipotent_upper() {
        return Err(CharError::NotUnipotent);
    }
    Ok(psi.eval(u.superdiagonal_sum(f)))
}

/// `prod chi_i(b_ii)` on the lower Borel.
pub fn chi_on_borel(b: &MatFq, param: &PrincipalSeriesParam) -> Result<CycloNumber, CharError> {
    if b.n() != param.n() {
        return Err(CharError::Arity {
            expected: b.n(),
            got: param.n(),
        });
    }
    if !b.is_lower_triangular() {
        return Err(CharError::NotBorel);
    }
    let e = param.torus_exp(b.diagonal()).ok_or(CharError::NotBorel)?;
    Ok(param.context().root(e))
}

/// `chi(t) = prod chi_i(t_ii)` for `t` in the diagonal torus.
pub fn char_dual(param: &PrincipalSeriesParam, t: &MatFq) -> Result<CycloNumber, CharError> {
    if t.n() != param.n() {
        return Err(CharError::Arity {
            expected: t.n(),
            got: param.n(),
        });
    }
    if !t.is_diagonal() {
        return Err(CharError::NotTorus);
    }
    let e = param.torus_exp(t.diagonal()).ok_or(CharError::NotTorus)?;
    Ok(param.context().root(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::RootCounts;

    fn contexts() -> Vec<Context> {
        [(3, 1), (5, 1), (7, 1), (3, 2), (3, 3)]
            .into_iter()
            .map(|(p, k)| Context::new(p, k).unwrap())
            .collect()
    }

    #[test]
    fn psi_is_additive_and_nontrivial() {
        for ctx in contexts() {
            let f = ctx.field();
            let mut sum = RootCounts::new(ctx.m());
            let mut nontrivial = false;
            for x in f.elements() {
                sum.push(ctx.psi_exp(x));
                nontrivial |= ctx.psi_exp(x) != 0;
                for y in f.elements() {
                    assert_eq!(
                        ctx.psi_exp(f.add(x, y)),
                        ctx.add_exp(ctx.psi_exp(x), ctx.psi_exp(y))
                    );
                }
            }
            assert!(nontrivial);
            assert!(sum.to_cyclo(ctx.ring()).is_zero());
        }
    }

    #[test]
    fn chi_is_multiplicative_and_orthogonal() {
        for ctx in contexts() {
            let f = ctx.field();
            for j in 0..ctx.q() - 1 {
                let mut sum = RootCounts::new(ctx.m());
                for &x in f.units() {
                    let ex = ctx.chi_exp(j, x).unwrap();
                    sum.push(ex);
                    if j == 0 {
                        assert_eq!(ex, 0);
                    }
                    for &y in f.units() {
                        assert_eq!(
                            ctx.chi_exp(j, f.mul(x, y)).unwrap(),
                            ctx.add_exp(ex, ctx.chi_exp(j, y).unwrap())
                        );
                    }
                }
                let total = sum.to_cyclo(ctx.ring());
                let expected = if j == 0 {
                    CycloNumber::from_int(ctx.ring(), (ctx.q() - 1) as i64)
                } else {
                    CycloNumber::zero(ctx.ring())
                };
                assert_eq!(total, expected);
            }
            assert_eq!(ctx.chi_exp(1, Fq::ZERO), None);
        }
    }

    #[test]
    fn character_values_have_unit_modulus() {
        let ctx = Context::new(5, 1).unwrap();
        for x in ctx.field().elements() {
            let (re, im) = ctx.psi().eval(x).approx();
            assert!((re.hypot(im) - 1.0).abs() < 1e-9);
        }
        for j in 0..4 {
            for &x in ctx.field().units() {
                let (re, im) = ctx.chi(j).unwrap().eval(x).unwrap().approx();
                assert!((re.hypot(im) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unipotent_and_borel_evaluation() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        let psi = ctx.psi();
        assert_eq!(
            psi_on_unipotent(&MatFq::identity(3), &psi).unwrap(),
            CycloNumber::one(ctx.ring())
        );
        let units: Vec<MatFq> = (0..3)
            .map(|x| MatFq::from_rows(&[vec![Fq::ONE, Fq::from_raw(x)], vec![Fq::ZERO, Fq::ONE]]).unwrap())
            .collect();
        for u1 in &units {
            assert_eq!(psi_on_unipotent(u1, &psi).unwrap(), psi.eval(u1.get(0, 1)));
            for u2 in &units {
                let lhs = psi_on_unipotent(&u1.mul(u2, f), &psi).unwrap();
                let rhs = &psi_on_unipotent(u1, &psi).unwrap() * &psi_on_unipotent(u2, &psi).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        let lower = MatFq::from_rows(&[vec![Fq::ONE, Fq::ZERO], vec![Fq::ONE, Fq::ONE]]).unwrap();
        assert_eq!(psi_on_unipotent(&lower, &psi), Err(CharError::NotUnipotent));

        let g = f.generator();
        let param = PrincipalSeriesParam::new(&ctx, &[1, 1]).unwrap();
        let b = MatFq::diag(&[g, g]);
        // chi_1(g) chi_1(g) = zeta_2^2 = 1.
        assert_eq!(chi_on_borel(&b, &param).unwrap(), CycloNumber::one(ctx.ring()));
        let ctx5 = Context::new(5, 1).unwrap();
        let param5 = PrincipalSeriesParam::new(&ctx5, &[1, 2]).unwrap();
        let g5 = ctx5.field().generator();
        // zeta_4^{1+2} lifted: exponent p * 3 in zeta_20.
        assert_eq!(
            chi_on_borel(&MatFq::diag(&[g5, g5]), &param5).unwrap(),
            CycloNumber::root(ctx5.ring(), 15)
        );
        let trivial = PrincipalSeriesParam::new(&ctx5, &[0, 0]).unwrap();
        let b5 = MatFq::from_rows(&[
            vec![Fq::from_raw(3), Fq::ZERO],
            vec![Fq::from_raw(4), Fq::from_raw(2)],
        ])
        .unwrap();
        assert_eq!(chi_on_borel(&b5, &trivial).unwrap(), CycloNumber::one(ctx5.ring()));
        assert_eq!(chi_on_borel(&MatFq::identity(2), &param5).unwrap(), CycloNumber::one(ctx5.ring()));
        assert_eq!(chi_on_borel(&b5.transpose(), &param5), Err(CharError::NotBorel));
    }

    #[test]
    fn torus_orthogonality_n2_q3() {
        let ctx = Context::new(3, 1).unwrap();
        let f = ctx.field();
        for &a in f.units() {
            for &b in f.units() {
                let t = MatFq::diag(&[a, b]);
                let mut sum = CycloNumber::zero(ctx.ring());
                for param in PrincipalSeriesParam::all(&ctx, 2) {
                    sum += &char_dual(&param, &t).unwrap();
                }
                let expected = if t == MatFq::identity(2) { 4 } else { 0 };
                assert_eq!(sum, CycloNumber::from_int(ctx.ring(), expected));
            }
        }
        let param = PrincipalSeriesParam::new(&ctx, &[1, 0]).unwrap();
        assert_eq!(
            char_dual(&param, &MatFq::diag(&[Fq::ONE, Fq::ZERO])),
            Err(CharError::NotTorus)
        );
    }

    #[test]
    fn distinct_flag() {
        let ctx = Context::new(5, 1).unwrap();
        assert!(PrincipalSeriesParam::new(&ctx, &[0, 1, 2]).unwrap().is_distinct());
        assert!(!PrincipalSeriesParam::new(&ctx, &[0, 1, 0]).unwrap().is_distinct());
        assert!(matches!(
            PrincipalSeriesParam::new(&ctx, &[4]),
            Err(CharError::BadIndex { .. })
        ));
        assert_eq!(PrincipalSeriesParam::all(&ctx, 3).len(), 64);
    }
}
