//! Gelfand-Tsetlin sums for the Whittaker function on maximal and minimal parabolic
//! representatives, the recursion kernels and the rank-lowering recursion steps.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::chars::{Context, PrincipalSeriesParam};
use crate::cyclo::{CycloNumber, CycloSum, RootCounts};
use crate::fqlinalg::LinalgError;
use crate::gfq::{Fq, FqField};
use crate::whittaker::{index_g_mod_b, WhittakerError};

/// The constants `F_n`, `F'_n`, `C_n`, `C'_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtConstants {
    pub f: BigRational,
    pub f_prime: BigRational,
    pub c: BigRational,
    pub c_prime: BigRational,
}

pub fn gt_constants(n: usize, q: u32) -> GtConstants {
    assert!(n >= 2, "constants are defined for n >= 2");
    let qq = BigInt::from(q);
    let f = BigRational::new(BigInt::one(), index_g_mod_b(n, q));
    let f_prime = &f * BigRational::from_integer(Pow::pow(&qq, ((n - 1) * (n - 2) / 2) as u32));
    let c = BigRational::new(&qq - 1u32, Pow::pow(&qq, n as u32) - 1u32);
    let c_prime = &c * BigRational::from_integer(Pow::pow(&qq, (n - 2) as u32));
    GtConstants {
        f,
        f_prime,
        c,
        c_prime,
    }
}

/// A value together with the number of summation points it was computed from.
#[derive(Clone, Debug)]
pub struct GtValue {
    pub value: CycloNumber,
    pub terms: u64,
}

/// All tuples in `(F_q^x)^r`, generator order, last position fastest.
pub fn unit_tuples(f: &FqField, r: usize) -> impl Iterator<Item = Vec<Fq>> + '_ {
    let q1 = (f.q() - 1) as usize;
    let total = q1.pow(r as u32);
    (0..total).map(move |mut code| {
        let mut v = vec![Fq::ZERO; r];
        for slot in v.iter_mut().rev() {
            *slot = f.units()[code % q1];
            code /= q1;
        }
        v
    })
}

fn require_units(xs: &[Fq]) -> Result<(), WhittakerError> {
    if xs.iter().any(|x| x.is_zero()) {
        Err(WhittakerError::NonUnit)
    } else {
        Ok(())
    }
}

fn require_n(param: &PrincipalSeriesParam, min: usize) -> Result<usize, WhittakerError> {
    let n = param.n();
    if n < min {
        return Err(WhittakerError::Arity {
            expected: min,
            got: n,
        });
    }
    Ok(n)
}

fn finish(counts: RootCounts, ctx: &Context, scale: &BigRational, terms: u64) -> GtValue {
    GtValue {
        value: counts.to_cyclo(ctx.ring()).scale(scale),
        terms,
    }
}

/// `(1/(q+1)) sum_y chi_2(-a_1 a_2 / y) psi(-y/a_2 + a_1/y) chi_1(y)`, the value at the
/// anti-diagonal matrix with `a_1` top-right.
pub fn gt_base_n2(a1: Fq, a2: Fq, param: &PrincipalSeriesParam) -> Result<CycloNumber, WhittakerError> {
    if param.n() != 2 {
        return Err(WhittakerError::Arity {
            expected: 2,
            got: param.n(),
        });
    }
    require_units(&[a1, a2])?;
    let ctx = param.context();
    let f = ctx.field();
    let minus_a1a2 = f.neg(f.mul(a1, a2));
    let mut counts = RootCounts::new(ctx.m());
    for &y in f.units() {
        let c2 = param.chi_exp(2, f.div(minus_a1a2, y)?).expect("unit");
        let c1 = param.chi_exp(1, y).expect("unit");
        let s = f.add(f.neg(f.div(y, a2)?), f.div(a1, y)?);
        counts.push(ctx.add_exp(ctx.add_exp(c1, c2), ctx.psi_exp(s)));
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(ctx.q() + 1));
    Ok(counts.to_cyclo(ctx.ring()).scale(&scale))
}

/// Shared body of the two maximal-parabolic closed forms. The chain
/// `y_0 = -1, y_1, ..., y_{n-1}, y_n = a` carries the weight
/// `prod_j chi_j(-y_j / y_{j-1})` and `psi(sign * sum_j ratio_j)`.
fn maximal_sum(
    a: Fq,
    param: &PrincipalSeriesParam,
    right: bool,
) -> Result<GtValue, WhittakerError> {
    let n = require_n(param, 2)?;
    require_units(&[a])?;
    let ctx = param.context();
    let f = ctx.field();
    let minus_one = f.neg(Fq::ONE);
    let mut counts = RootCounts::new(ctx.m());
    let mut terms = 0u64;
    let mut chain = vec![Fq::ZERO; n + 1];
    chain[0] = minus_one;
    chain[n] = a;
    for inner in unit_tuples(f, n - 1) {
        chain[1..n].copy_from_slice(&inner);
        let mut e = 0;
        let mut s = Fq::ZERO;
        for j in 1..=n {
            let ratio = f.div(chain[j], chain[j - 1])?;
            e = ctx.add_exp(e, param.chi_exp(j, f.neg(ratio)).expect("unit"));
            s = if right {
                f.sub(s, f.div(chain[j - 1], chain[j])?)
            } else {
                f.add(s, ratio)
            };
        }
        counts.push(ctx.add_exp(e, ctx.psi_exp(s)));
        terms += 1;
    }
    Ok(finish(counts, ctx, &gt_constants(n, ctx.q()).f_prime, terms))
}

/// Closed form for `Psi(g_{n-1,1}(1, a_n))`: `F'_n` times the sum over
/// `(y_{1,1}, ..., y_{n-1,n-1})` of `prod_j chi_j(-y_{j,j}/y_{j-1,j-1})
/// psi(-sum_j y_{j-1,j-1}/y_{j,j})` with `y_{0,0} = -1`, `y_{n,n} = a_n`.
pub fn gt_maximal_right(a_n: Fq, param: &PrincipalSeriesParam) -> Result<GtValue, WhittakerError> {
    maximal_sum(a_n, param, true)
}

/// Closed form for `Psi(g_{1,n-1}(a_1, 1))`: `F'_n` times the sum over
/// `(y_{1,1}, ..., y_{n-1,1})` of `prod_j chi_j(-y_{j,1}/y_{j-1,1})
/// psi(sum_j y_{j,1}/y_{j-1,1})` with `y_{0,1} = -1`, `y_{n,1} = a_1`.
pub fn gt_maximal_left(a_1: Fq, param: &PrincipalSeriesParam) -> Result<GtValue, WhittakerError> {
    maximal_sum(a_1, param, false)
}

/// A recursion kernel value at level `j`.
#[derive(Clone, Debug)]
pub struct RecursionKernelValue {
    pub value: CycloNumber,
    pub level: usize,
}

/// Exponent of `Q~(upper; lower) = psi(sum_k upper_k/lower_k - sum_k lower_k/upper_{k+1})`
/// for rows of lengths `j` and `j-1`.
pub fn kernel_exp(ctx: &Context, upper: &[Fq], lower: &[Fq]) -> Result<u32, WhittakerError> {
    if upper.len() != lower.len() + 1 {
        return Err(LinalgError::SizeMismatch {
            left: upper.len(),
            right: lower.len() + 1,
        }
        .into());
    }
    require_units(upper)?;
    require_units(lower)?;
    let f = ctx.field();
    let mut s = Fq::ZERO;
    for k in 0..lower.len() {
        s = f.add(s, f.div(upper[k], lower[k])?);
        s = f.sub(s, f.div(lower[k], upper[k + 1])?);
    }
    Ok(ctx.psi_exp(s))
}

/// `Q~` between rows `j` (`upper`) and `j-1` (`lower`).
pub fn gt_kernel(ctx: &Context, upper: &[Fq], lower: &[Fq]) -> Result<RecursionKernelValue, WhittakerError> {
    let e = kernel_exp(ctx, upper, lower)?;
    Ok(RecursionKernelValue {
        value: ctx.root(e),
        level: upper.len(),
    })
}

/// Exponent of `chi_j((-1)^{j-1} prod upper / prod lower)`, the character twist turning
/// `Q~` into `Q`.
pub fn kernel_twist_exp(
    param: &PrincipalSeriesParam,
    upper: &[Fq],
    lower: &[Fq],
) -> Result<u32, WhittakerError> {
    let j = upper.len();
    require_units(upper)?;
    require_units(lower)?;
    let f = param.context().field();
    let mut x = if j % 2 == 1 { Fq::ONE } else { f.neg(Fq::ONE) };
    for &u in upper {
        x = f.mul(x, u);
    }
    for &l in lower {
        x = f.div(x, l)?;
    }
    Ok(param.chi_exp(j, x).expect("unit"))
}

/// The twisted kernel `Q = chi_j((-1)^{j-1} prod upper / prod lower) Q~`.
pub fn gt_kernel_twisted(
    param: &PrincipalSeriesParam,
    upper: &[Fq],
    lower: &[Fq],
) -> Result<RecursionKernelValue, WhittakerError> {
    let ctx = param.context();
    let e = ctx.add_exp(
        kernel_twist_exp(param, upper, lower)?,
        kernel_exp(ctx, upper, lower)?,
    );
    Ok(RecursionKernelValue {
        value: ctx.root(e),
        level: upper.len(),
    })
}

/// Interior entries `y_{j,k}`, `1 <= k <= j <= n-1`, of a Gelfand-Tsetlin pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GtPattern {
    n: usize,
    y: Vec<Fq>,
}

impl GtPattern {
    pub fn new(n: usize, y: Vec<Fq>) -> Result<Self, WhittakerError> {
        if n == 0 || y.len() != n * (n - 1) / 2 {
            return Err(LinalgError::Malformed(format!("pattern for n = {n} needs {} entries", n * n.saturating_sub(1) / 2)).into());
        }
        require_units(&y)?;
        Ok(GtPattern { n, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row `j` (`1 <= j <= n-1`), of length `j`.
    pub fn row(&self, j: usize) -> &[Fq] {
        let start = (j - 1) * j / 2;
        &self.y[start..start + j]
    }

    pub fn entries(&self) -> &[Fq] {
        &self.y
    }
}

/// Every pattern of size `n` with unit entries, rows concatenated in odometer order.
pub fn enumerate_patterns(n: usize, f: &FqField, cap: u64) -> Result<impl Iterator<Item = GtPattern> + '_, WhittakerError> {
    let entries = n * n.saturating_sub(1) / 2;
    let count = ((f.q() - 1) as u128).pow(entries as u32);
    if count > cap as u128 {
        return Err(LinalgError::CapExceeded { count, cap }.into());
    }
    Ok(unit_tuples(f, entries).map(move |y| GtPattern { n, y }))
}

/// `d_j = (-1)^{j-1} y_{j,j} prod_{k<j} y_{j,k}/y_{j-1,k}` for rows `j` and `j-1`.
pub fn pattern_d(f: &FqField, upper: &[Fq], lower: &[Fq]) -> Fq {
    let j = upper.len();
    let mut d = upper[j - 1];
    if j % 2 == 0 {
        d = f.neg(d);
    }
    for k in 0..j - 1 {
        d = f.mul(d, f.div(upper[k], lower[k]).expect("unit"));
    }
    d
}

/// Rows `1..=n` of a pattern with the top boundary row `a`.
fn pattern_rows<'a>(pattern: &'a GtPattern, a: &'a [Fq]) -> Vec<&'a [Fq]> {
    let mut rows: Vec<&[Fq]> = (1..pattern.n()).map(|j| pattern.row(j)).collect();
    rows.push(a);
    rows
}

/// The torus point `(d_1, ..., d_n)` and the exponent of `prod_{j>=2} Q~(row_j; row_{j-1})`
/// attached to a pattern with top row `a`.
pub fn pattern_weight(ctx: &Context, pattern: &GtPattern, a: &[Fq]) -> Result<(Vec<Fq>, u32), WhittakerError> {
    let f = ctx.field();
    let rows = pattern_rows(pattern, a);
    let mut d = Vec::with_capacity(rows.len());
    let mut e = 0;
    d.push(rows[0][0]);
    for j in 1..rows.len() {
        d.push(pattern_d(f, rows[j], rows[j - 1]));
        e = ctx.add_exp(e, kernel_exp(ctx, rows[j], rows[j - 1])?);
    }
    Ok((d, e))
}

/// The resolved minimal-parabolic sum at the anti-diagonal matrix with `a_1` top-right:
/// `F_n sum_patterns prod_j chi_j(d_j) prod_{j>=2} Q~(row_j; row_{j-1})` with `y_{n,k} = a_k`.
pub fn gt_minimal(a: &[Fq], param: &PrincipalSeriesParam, cap: u64) -> Result<GtValue, WhittakerError> {
    let n = require_n(param, 1)?;
    if a.len() != n {
        return Err(WhittakerError::Arity {
            expected: n,
            got: a.len(),
        });
    }
    require_units(a)?;
    let ctx = param.context();
    let f = ctx.field();
    let mut counts = RootCounts::new(ctx.m());
    let mut terms = 0u64;
    for pattern in enumerate_patterns(n, f, cap)? {
        let (d, e) = pattern_weight(ctx, &pattern, a)?;
        let c = param.torus_exp(d).expect("units");
        counts.push(ctx.add_exp(c, e));
        terms += 1;
    }
    let scale = BigRational::new(BigInt::one(), index_g_mod_b(n, ctx.q()));
    Ok(finish(counts, ctx, &scale, terms))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recursion {
    /// `g_{n-1,1}(1, a_n)`.
    MaxRight(Fq),
    /// `g_{1,n-1}(a_1, 1)`.
    MaxLeft(Fq),
    /// Anti-diagonal `(a_1, ..., a_n)`.
    Minimal(Vec<Fq>),
}

/// Values of `Psi` at rank `n-1`, keyed by the argument tuple: `[t]` for the maximal
/// families and `(t_1, ..., t_{n-1})` for the anti-diagonal family.
pub type PsiTable = HashMap<Vec<Fq>, CycloNumber>;

fn lookup<'a>(table: &'a PsiTable, key: &[Fq]) -> Result<&'a CycloNumber, WhittakerError> {
    table
        .get(key)
        .ok_or_else(|| WhittakerError::IncompleteTable(format!("{:?}", key.iter().map(|x| x.raw()).collect::<Vec<_>>())))
}

/// One step of the rank recursion (`n >= 3`), reading rank `n-1` values from `table`,
/// which must hold values for the truncated tuple `(chi_1, ..., chi_{n-1})`.
pub fn gt_recursion_step(
    direction: &Recursion,
    param: &PrincipalSeriesParam,
    table: &PsiTable,
) -> Result<CycloNumber, WhittakerError> {
    let n = require_n(param, 3)?;
    let ctx = param.context();
    let f = ctx.field();
    let consts = gt_constants(n, ctx.q());
    let mut sum = CycloSum::new(ctx.ring());
    match direction {
        Recursion::MaxRight(a) | Recursion::MaxLeft(a) => {
            require_units(&[*a])?;
            let right = matches!(direction, Recursion::MaxRight(_));
            for &t in f.units() {
                let ratio = f.div(*a, t)?;
                let c = param.chi_exp(n, f.neg(ratio)).expect("unit");
                let s = if right { f.neg(f.div(t, *a)?) } else { ratio };
                sum.add_shifted(lookup(table, &[t])?, ctx.add_exp(c, ctx.psi_exp(s)) as i64);
            }
            Ok(sum.finish().scale(&consts.c_prime))
        }
        Recursion::Minimal(a) => {
            if a.len() != n {
                return Err(WhittakerError::Arity {
                    expected: n,
                    got: a.len(),
                });
            }
            require_units(a)?;
            for t in unit_tuples(f, n - 1) {
                let e = ctx.add_exp(kernel_twist_exp(param, a, &t)?, kernel_exp(ctx, a, &t)?);
                sum.add_shifted(lookup(table, &t)?, e as i64);
            }
            Ok(sum.finish().scale(&consts.c))
        }
    }
}

/// Resolves the recursion all the way down to the closed form at rank 2.
pub fn gt_recursive(direction: &Recursion, param: &PrincipalSeriesParam) -> Result<CycloNumber, WhittakerError> {
    let n = require_n(param, 2)?;
    let f = param.context().field();
    if n == 2 {
        return match direction {
            Recursion::MaxRight(a) => gt_base_n2(Fq::ONE, *a, param),
            Recursion::MaxLeft(a) => gt_base_n2(*a, Fq::ONE, param),
            Recursion::Minimal(a) if a.len() == 2 => gt_base_n2(a[0], a[1], param),
            Recursion::Minimal(a) => Err(WhittakerError::Arity {
                expected: 2,
                got: a.len(),
            }),
        };
    }
    let lower = param.truncate(n - 1);
    let mut table = PsiTable::new();
    match direction {
        Recursion::MaxRight(_) | Recursion::MaxLeft(_) => {
            for &t in f.units() {
                let sub = match direction {
                    Recursion::MaxRight(_) => Recursion::MaxRight(t),
                    _ => Recursion::MaxLeft(t),
                };
                table.insert(vec![t], gt_recursive(&sub, &lower)?);
            }
        }
        Recursion::Minimal(_) => {
            for t in unit_tuples(f, n - 1) {
                let v = gt_recursive(&Recursion::Minimal(t.clone()), &lower)?;
                table.insert(t, v);
            }
        }
    }
    gt_recursion_step(direction, param, &table)
}
