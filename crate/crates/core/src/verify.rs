//! Verification suites comparing closed forms against definitional computations.
//! Reports are deterministic for a given configuration: enumeration orders are fixed and
//! sampling uses a seeded ChaCha stream.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::chars::{Context, PrincipalSeriesParam};
use crate::curtis::{
    curtis_max_left, curtis_max_right, curtis_minimal, fourier_inversion_oracle, CurtisTable,
    GDescriptor, HeckeAlgebra, HeckeError,
};
use crate::cyclo::CycloNumber;
use crate::fqlinalg::{
    cauchy_binet, mat_special, minor_formula_delta, minor_formula_ratio, minor_recursion_check,
    unipotent_from_param, BlockAntidiagSpec, MatFq, SpecialMatrix, UnipotentParam,
};
use crate::gfq::{Fq, FqField};
use crate::gtformulas::{
    gt_maximal_left, gt_maximal_right, gt_minimal, gt_recursion_step, gt_recursive, unit_tuples,
    PsiTable, Recursion,
};
use crate::whittaker::{
    double_coset_index, index_g_mod_b, monomial_matrices, support_check, unipotent_order,
    SummandTable, WhittakerError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Whittaker(#[from] WhittakerError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error("suite {suite} needs n >= {min}, got {n}")]
    SizeTooSmall { suite: Suite, min: usize, n: usize },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

impl VerifyError {
    pub fn is_cap(&self) -> bool {
        match self {
            VerifyError::Whittaker(e) => e.is_cap(),
            VerifyError::Hecke(HeckeError::GroupTooLarge { .. }) => true,
            VerifyError::Hecke(HeckeError::Whittaker(e)) => e.is_cap(),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Minors,
    CauchyBinet,
    Support,
    GtVsBruteforce,
    CurtisVsOracle,
    Hecke,
    Ind,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Minors,
        Suite::CauchyBinet,
        Suite::Support,
        Suite::GtVsBruteforce,
        Suite::CurtisVsOracle,
        Suite::Hecke,
        Suite::Ind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Minors => "minors",
            Suite::CauchyBinet => "cauchybinet",
            Suite::Support => "support",
            Suite::GtVsBruteforce => "gt-vs-bruteforce",
            Suite::CurtisVsOracle => "curtis-vs-oracle",
            Suite::Hecke => "hecke",
            Suite::Ind => "ind",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n: usize,
    pub seed: u64,
    /// Number of random cases where a suite samples instead of enumerating.
    pub samples: usize,
    /// Case counts up to this bound are enumerated exhaustively.
    pub exhaustive_limit: usize,
    pub cap: u64,
}

impl VerifyConfig {
    pub fn new(n: usize) -> Self {
        VerifyConfig {
            n,
            seed: 0,
            samples: 200,
            exhaustive_limit: 5000,
            cap: crate::fqlinalg::DEFAULT_CAP,
        }
    }
}

/// Outcome of one named assertion over many cases.
#[derive(Clone, Debug)]
pub struct Assertion {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
    pub counterexample: Option<serde_json::Value>,
}

impl Assertion {
    fn new(name: &str) -> Self {
        Assertion {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            detail: String::new(),
            counterexample: None,
        }
    }

    fn check(&mut self, ok: bool, dump: impl FnOnce() -> serde_json::Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(dump());
            }
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub p: u32,
    pub k: u32,
    pub n: usize,
    pub seed: u64,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(Assertion::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "suite {} p={} k={} n={} seed={}",
            self.suite, self.p, self.k, self.n, self.seed
        );
        for a in &self.assertions {
            let tag = if a.passed() { "PASS" } else { "FAIL" };
            let _ = write!(out, "{tag} {}: {}/{} cases ok", a.name, a.cases - a.failures, a.cases);
            if !a.detail.is_empty() {
                let _ = write!(out, "; {}", a.detail);
            }
            out.push('\n');
            if let Some(c) = &a.counterexample {
                let _ = writeln!(out, "  counterexample {c}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note {n}");
        }
        let passed = self.assertions.iter().filter(|a| a.passed()).count();
        let _ = writeln!(
            out,
            "summary: {passed} passed, {} failed",
            self.assertions.len() - passed
        );
        out
    }
}

fn field_json(f: &FqField) -> serde_json::Value {
    json!({"p": f.p(), "k": f.k()})
}

fn values_dump(
    f: &FqField,
    chi: &[u32],
    g: &MatFq,
    expected: &CycloNumber,
    got: &CycloNumber,
) -> serde_json::Value {
    json!({
        "field": field_json(f),
        "chi": chi,
        "g": g.to_json(f),
        "expected": expected.to_json(),
        "got": got.to_json(),
    })
}

fn random_unit(f: &FqField, rng: &mut ChaCha8Rng) -> Fq {
    f.units()[rng.gen_range(0..f.units().len())]
}

fn random_element(f: &FqField, rng: &mut ChaCha8Rng) -> Fq {
    Fq::from_raw(rng.gen_range(0..f.q()))
}

/// Runs `suite` over `F_{p^k}` and returns its report.
pub fn run_suite(suite: Suite, p: u64, k: u32, cfg: &VerifyConfig) -> Result<Report, VerifyError> {
    let ctx = Context::new(p, k).map_err(WhittakerError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let min = match suite {
        Suite::Minors | Suite::GtVsBruteforce | Suite::CurtisVsOracle | Suite::Hecke | Suite::Ind => 2,
        Suite::CauchyBinet | Suite::Support => 1,
    };
    if cfg.n < min {
        return Err(VerifyError::SizeTooSmall { suite, min, n: cfg.n });
    }
    let mut notes = Vec::new();
    let assertions = match suite {
        Suite::Minors => minors(&ctx, cfg, &mut rng)?,
        Suite::CauchyBinet => cauchybinet(&ctx, cfg, &mut rng)?,
        Suite::Support => support(&ctx, cfg, &mut rng)?,
        Suite::GtVsBruteforce => gt_vs_bruteforce(&ctx, cfg, &mut rng)?,
        Suite::CurtisVsOracle => curtis_vs_oracle(&ctx, cfg, &mut rng, &mut notes)?,
        Suite::Hecke => hecke(&ctx, cfg)?,
        Suite::Ind => ind(&ctx, cfg, &mut rng)?,
    };
    Ok(Report {
        suite,
        p: ctx.field().p(),
        k: ctx.field().k(),
        n: cfg.n,
        seed: cfg.seed,
        assertions,
        notes,
    })
}

/// Unit-valued unipotent parameters: all of them when few enough, else a sample.
fn unit_params(ctx: &Context, n: usize, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> (Vec<UnipotentParam>, bool) {
    let f = ctx.field();
    let len = n * (n - 1) / 2;
    let total = ((f.q() - 1) as u128).pow(len as u32);
    if total <= cfg.exhaustive_limit as u128 {
        let all = unit_tuples(f, len)
            .map(|y| UnipotentParam::new(n, y).expect("shape"))
            .collect();
        (all, true)
    } else {
        let some = (0..cfg.samples)
            .map(|_| UnipotentParam::from_fn(n, |_, _| random_unit(f, rng)))
            .collect();
        (some, false)
    }
}

fn minors(ctx: &Context, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let (params, exhaustive) = unit_params(ctx, n, cfg, rng);
    let w0 = mat_special(n, &SpecialMatrix::W0).map_err(WhittakerError::from)?;
    let mut delta = Assertion::new("principal-minor-product");
    let mut ratio = Assertion::new("shifted-minor-ratio");
    let mut rec_principal = Assertion::new("principal-minor-recursion");
    let mut rec_ratio = Assertion::new("shifted-minor-ratio-recursion");
    for param in &params {
        let m = unipotent_from_param(param, f).mul(&w0, f);
        let dump = |i: usize, a: Fq, b: Fq| {
            json!({
                "field": field_json(f),
                "y": param.values().iter().map(|x| x.raw()).collect::<Vec<_>>(),
                "i": i,
                "determinant": a.raw(),
                "formula": b.raw(),
            })
        };
        for i in 1..n {
            let direct = m.principal_minor(i, f).map_err(WhittakerError::from)?;
            let formula = minor_formula_delta(param, i, f).map_err(WhittakerError::from)?;
            delta.check(direct == formula, || dump(i, direct, formula));
            let shifted = m.shifted_minor(i, f).map_err(WhittakerError::from)?;
            let direct_ratio = f.div(shifted, direct).map_err(WhittakerError::from)?;
            let formula_ratio = minor_formula_ratio(param, i, f).map_err(WhittakerError::from)?;
            ratio.check(direct_ratio == formula_ratio, || dump(i, direct_ratio, formula_ratio));
            let (a, b) = minor_recursion_check(param, i, f).map_err(WhittakerError::from)?;
            rec_principal.check(a, || dump(i, direct, formula));
            rec_ratio.check(b, || dump(i, direct_ratio, formula_ratio));
        }
    }
    let scope = if exhaustive {
        format!("all {} unit parameters", params.len())
    } else {
        format!("{} sampled unit parameters", params.len())
    };
    Ok(vec![
        delta.with_detail(scope.clone()),
        ratio.with_detail(scope.clone()),
        rec_principal.with_detail(scope.clone()),
        rec_ratio.with_detail(scope),
    ])
}

fn random_subset(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..=n).collect();
    for i in 0..r {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut out = idx[..r].to_vec();
    out.sort_unstable();
    out
}

fn cauchybinet(ctx: &Context, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let mut out = Vec::new();
    for r in 1..=n {
        let mut a = Assertion::new(&format!("cauchy-binet-size-{r}"));
        for _ in 0..cfg.samples {
            let m = MatFq::from_fn(n, |_, _| random_element(f, rng));
            let nn = MatFq::from_fn(n, |_, _| random_element(f, rng));
            let rows = random_subset(n, r, rng);
            let cols = random_subset(n, r, rng);
            let (lhs, rhs) = cauchy_binet(&m, &nn, &rows, &cols, f).map_err(WhittakerError::from)?;
            a.check(lhs == rhs, || {
                json!({
                    "field": field_json(f),
                    "m": m.to_json(f),
                    "n": nn.to_json(f),
                    "rows": rows,
                    "cols": cols,
                    "lhs": lhs.raw(),
                    "rhs": rhs.raw(),
                })
            });
        }
        out.push(a.with_detail(format!("{} random instances", cfg.samples)));
    }
    Ok(out)
}

fn support(ctx: &Context, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let report = support_check(ctx, n, cfg.cap)?;
    let mut vanish = Assertion::new("vanishes-off-admissible-monomials");
    for _ in 0..report.evaluations - report.violations.len() {
        vanish.check(true, || json!(null));
    }
    for v in &report.violations {
        let zero = CycloNumber::zero(ctx.ring());
        vanish.check(false, || values_dump(f, &v.chi, &v.g, &zero, &v.value));
    }
    let vanish = vanish.with_detail(format!(
        "{} monomial matrices, {} admissible",
        report.monomials, report.admissible
    ));

    let monomials = monomial_matrices(n, f);
    let units: Vec<MatFq> = crate::fqlinalg::enumerate_unipotent(n, f, cfg.cap)
        .map_err(WhittakerError::from)?
        .iter()
        .collect();
    let params = PrincipalSeriesParam::all(ctx, n);
    let mut equi = Assertion::new("unipotent-bi-equivariance");
    let triples = monomials.len() as u128 * (units.len() as u128).pow(2);
    let exhaustive = triples <= cfg.exhaustive_limit as u128;
    let cases: Vec<(usize, usize, usize)> = if exhaustive {
        let mut v = Vec::new();
        for g in 0..monomials.len() {
            for a in 0..units.len() {
                for b in 0..units.len() {
                    v.push((g, a, b));
                }
            }
        }
        v
    } else {
        (0..cfg.samples)
            .map(|_| {
                (
                    rng.gen_range(0..monomials.len()),
                    rng.gen_range(0..units.len()),
                    rng.gen_range(0..units.len()),
                )
            })
            .collect()
    };
    let mut base_cache: Vec<Option<SummandTable>> = vec![None; monomials.len()];
    for (gi, ai, bi) in cases {
        let g = &monomials[gi];
        if base_cache[gi].is_none() {
            base_cache[gi] = Some(SummandTable::build(g, ctx, cfg.cap)?);
        }
        let base = base_cache[gi].as_ref().expect("filled");
        let (u1, u2) = (&units[ai], &units[bi]);
        let h = u1.mul(g, f).mul(u2, f);
        let moved = SummandTable::build(&h, ctx, cfg.cap)?;
        let shift = ctx.add_exp(
            ctx.psi_exp(u1.superdiagonal_sum(f)),
            ctx.psi_exp(u2.superdiagonal_sum(f)),
        );
        for param in &params {
            let lhs = moved.evaluate(param)?;
            let rhs = base.evaluate(param)?.mul_root(shift as i64);
            equi.check(lhs == rhs, || values_dump(f, &param.indices(), &h, &rhs, &lhs));
        }
    }
    let scope = if exhaustive { "exhaustive" } else { "sampled" };
    Ok(vec![vanish, equi.with_detail(scope)])
}

fn gt_vs_bruteforce(ctx: &Context, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let params = PrincipalSeriesParam::all(ctx, n);
    let mut right = Assertion::new("maximal-right");
    let mut left = Assertion::new("maximal-left");
    let mut duality = Assertion::new("maximal-duality");
    let mut rec_max = Assertion::new("maximal-recursion");
    for &a in f.units() {
        let gr = BlockAntidiagSpec::max_right(n, a).map_err(WhittakerError::from)?.matrix();
        let gl = BlockAntidiagSpec::max_left(n, a).map_err(WhittakerError::from)?.matrix();
        let gl_inv = BlockAntidiagSpec::max_left(n, f.inv(a).map_err(WhittakerError::from)?)
            .map_err(WhittakerError::from)?
            .matrix();
        let tr = SummandTable::build(&gr, ctx, cfg.cap)?;
        let tl = SummandTable::build(&gl, ctx, cfg.cap)?;
        let tl_inv = SummandTable::build(&gl_inv, ctx, cfg.cap)?;
        for param in &params {
            let chi = param.indices();
            let br = tr.evaluate(param)?;
            let cr = gt_maximal_right(a, param)?.value;
            right.check(br == cr, || values_dump(f, &chi, &gr, &br, &cr));
            let bl = tl.evaluate(param)?;
            let cl = gt_maximal_left(a, param)?.value;
            left.check(bl == cl, || values_dump(f, &chi, &gl, &bl, &cl));
            let bd = tl_inv.evaluate(param)?;
            duality.check(bd == br.conj(), || values_dump(f, &chi, &gl_inv, &br.conj(), &bd));
            if n >= 3 {
                let rr = gt_recursive(&Recursion::MaxRight(a), param)?;
                rec_max.check(rr == br, || values_dump(f, &chi, &gr, &br, &rr));
                let rl = gt_recursive(&Recursion::MaxLeft(a), param)?;
                rec_max.check(rl == bl, || values_dump(f, &chi, &gl, &bl, &rl));
            }
        }
    }

    // Anti-diagonal arguments: every (argument, character) pair when few enough.
    let args: Vec<Vec<Fq>> = unit_tuples(f, n).collect();
    let total = args.len() * params.len();
    let exhaustive = total <= cfg.exhaustive_limit;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..args.len()).flat_map(|i| (0..params.len()).map(move |j| (i, j))).collect()
    } else {
        let mut v: Vec<(usize, usize)> = (0..cfg.samples.max(20))
            .map(|_| (rng.gen_range(0..args.len()), rng.gen_range(0..params.len())))
            .collect();
        v.sort_unstable();
        v
    };
    let mut minimal = Assertion::new("minimal");
    let mut rec_min = Assertion::new("minimal-recursion-step");
    let mut tables: Vec<Option<SummandTable>> = vec![None; args.len()];
    let mut lower_tables: std::collections::HashMap<Vec<u32>, PsiTable> = Default::default();
    for (ai, pi) in pairs {
        let a = &args[ai];
        let param = &params[pi];
        let chi = param.indices();
        let g = BlockAntidiagSpec::antidiag(a).map_err(WhittakerError::from)?.matrix();
        if tables[ai].is_none() {
            tables[ai] = Some(SummandTable::build(&g, ctx, cfg.cap)?);
        }
        let brute = tables[ai].as_ref().expect("filled").evaluate(param)?;
        let closed = gt_minimal(a, param, cfg.cap)?.value;
        minimal.check(brute == closed, || values_dump(f, &chi, &g, &brute, &closed));
        if n >= 3 {
            let lower = param.truncate(n - 1);
            let key = lower.indices();
            if !lower_tables.contains_key(&key) {
                let mut t = PsiTable::new();
                for sub in unit_tuples(f, n - 1) {
                    let m = BlockAntidiagSpec::antidiag(&sub).map_err(WhittakerError::from)?.matrix();
                    t.insert(sub, SummandTable::build(&m, ctx, cfg.cap)?.evaluate(&lower)?);
                }
                lower_tables.insert(key.clone(), t);
            }
            let step = gt_recursion_step(&Recursion::Minimal(a.clone()), param, &lower_tables[&key])?;
            rec_min.check(step == brute, || values_dump(f, &chi, &g, &brute, &step));
        }
    }
    let scope = if exhaustive {
        format!("all {total} argument/character pairs")
    } else {
        format!("{} sampled argument/character pairs", cfg.samples.max(20))
    };
    let mut out = vec![right, left, duality];
    if n >= 3 {
        out.push(rec_max);
    }
    out.push(minimal.with_detail(scope.clone()));
    if n >= 3 {
        out.push(rec_min.with_detail(scope));
    }
    Ok(out)
}

fn curtis_vs_oracle(
    ctx: &Context,
    cfg: &VerifyConfig,
    rng: &mut ChaCha8Rng,
    notes: &mut Vec<String>,
) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let table_dump = |closed: &CurtisTable, oracle: &CurtisTable| {
        let diff = closed.diff(oracle);
        let zero = CycloNumber::zero(ctx.ring());
        let first = &diff[0];
        json!({
            "field": field_json(f),
            "g": closed.g.to_json(),
            "differing_points": diff.len(),
            "t": first,
            "expected": oracle.get(first).unwrap_or(&zero).to_json(),
            "got": closed.get(first).unwrap_or(&zero).to_json(),
        })
    };
    let mut right = Assertion::new("maximal-right-table");
    let mut left = Assertion::new("maximal-left-table");
    let mut supp = Assertion::new("determinant-support");
    let mut recon = Assertion::new("oracle-reconstruction");
    let params = PrincipalSeriesParam::all(ctx, n);
    for &a in f.units() {
        let closed = curtis_max_right(a, n, ctx)?;
        let oracle = fourier_inversion_oracle(&GDescriptor::MaxRight(a), n, ctx, cfg.cap)?;
        right.check(closed == oracle, || table_dump(&closed, &oracle));
        supp.check(oracle.support_violations(f).is_empty(), || oracle.to_json());
        let closed = curtis_max_left(a, n, ctx)?;
        let oracle_left = fourier_inversion_oracle(&GDescriptor::MaxLeft(a), n, ctx, cfg.cap)?;
        left.check(closed == oracle_left, || table_dump(&closed, &oracle_left));
        supp.check(oracle_left.support_violations(f).is_empty(), || oracle_left.to_json());
        // Pairing the oracle with every character gives back the Bessel values.
        let g = GDescriptor::MaxRight(a).matrix(n).map_err(WhittakerError::from)?;
        let summands = SummandTable::build(&g, ctx, cfg.cap)?;
        let factor = crate::whittaker::bessel_factor(n, ctx.q());
        for param in &params {
            let j = summands.evaluate(param)?.scale(&factor);
            let paired = oracle.pair(param);
            recon.check(j == paired, || values_dump(f, &param.indices(), &g, &j, &paired));
        }
    }

    let args: Vec<Vec<Fq>> = unit_tuples(f, n).collect();
    let exhaustive = args.len() <= cfg.exhaustive_limit / 10;
    let chosen: Vec<Vec<Fq>> = if exhaustive {
        args
    } else {
        let mut idx: Vec<usize> = (0..cfg.samples.min(args.len()))
            .map(|_| rng.gen_range(0..args.len()))
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| args[i].clone()).collect()
    };
    let mut minimal = Assertion::new("minimal-table-fiber-sum");
    let mut multi_fibers = 0usize;
    for a in &chosen {
        let closed = curtis_minimal(a, ctx, cfg.cap)?;
        let oracle = fourier_inversion_oracle(&GDescriptor::Minimal(a.clone()), n, ctx, cfg.cap)?;
        minimal.check(closed == oracle, || table_dump(&closed, &oracle));
        supp.check(closed.support_violations(f).is_empty(), || closed.to_json());
        supp.check(oracle.support_violations(f).is_empty(), || oracle.to_json());
        multi_fibers += fiber_sizes(ctx, a, cfg.cap)?.into_iter().filter(|&s| s > 1).count();
    }
    notes.push(format!(
        "pattern-to-torus map: {multi_fibers} fibers with more than one pattern over {} arguments{}",
        chosen.len(),
        if multi_fibers > 0 {
            "; a per-pattern table is not well defined there, the fiber sum is used"
        } else {
            "; per-pattern and fiber-sum readings coincide"
        }
    ));
    let scope = if exhaustive { "all arguments" } else { "sampled arguments" };
    Ok(vec![right, left, minimal.with_detail(scope), supp, recon])
}

fn fiber_sizes(ctx: &Context, a: &[Fq], cap: u64) -> Result<Vec<usize>, VerifyError> {
    let f = ctx.field();
    let mut sizes = std::collections::BTreeMap::<Vec<Fq>, usize>::new();
    for pattern in crate::gtformulas::enumerate_patterns(a.len(), f, cap)? {
        let (d, _) = crate::gtformulas::pattern_weight(ctx, &pattern, a)?;
        *sizes.entry(d).or_insert(0) += 1;
    }
    Ok(sizes.into_values().collect())
}

fn hecke(ctx: &Context, cfg: &VerifyConfig) -> Result<Vec<Assertion>, VerifyError> {
    let alg = HeckeAlgebra::new(ctx, cfg.n, cfg.cap)?;
    let size = alg.basis().len();
    let f = ctx.field();
    let mut unit = Assertion::new("unit-element");
    let mut comm = Assertion::new("commutativity");
    let mut mult = Assertion::new("bessel-functional-multiplicative");
    let e = alg.unit();
    let basis: Vec<_> = (0..size).map(|i| alg.basis_element(i)).collect::<Result<_, _>>()?;
    let basis_dump = |i: usize, j: usize| {
        json!({"field": field_json(f), "x": alg.basis()[i].to_json(f), "y": alg.basis()[j].to_json(f)})
    };
    let mut products = vec![Vec::with_capacity(size); size];
    for (i, x) in basis.iter().enumerate() {
        unit.check(alg.convolve(&e, x)? == *x && alg.convolve(x, &e)? == *x, || basis_dump(i, i));
        for (j, y) in basis.iter().enumerate() {
            let xy = alg.convolve(x, y)?;
            comm.check(xy == alg.convolve(y, x)?, || basis_dump(i, j));
            products[i].push(xy);
        }
    }
    let distinct: Vec<_> = PrincipalSeriesParam::all(ctx, cfg.n)
        .into_iter()
        .filter(|p| p.is_distinct())
        .collect();
    for param in &distinct {
        let vals = alg.bessel_values(param, cfg.cap)?;
        for i in 0..size {
            for j in 0..size {
                let lhs = alg.bessel_functional(&products[i][j], &vals);
                let rhs = &vals[i] * &vals[j];
                mult.check(lhs == rhs, || {
                    let mut d = basis_dump(i, j);
                    d["chi"] = json!(param.indices());
                    d["expected"] = rhs.to_json();
                    d["got"] = lhs.to_json();
                    d
                });
            }
        }
    }
    Ok(vec![
        unit.with_detail(format!("basis of {size} elements")),
        comm,
        mult.with_detail(format!("{} distinct character tuples", distinct.len())),
    ])
}

fn ind(ctx: &Context, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>, VerifyError> {
    let f = ctx.field();
    let n = cfg.n;
    let q = BigInt::from(ctx.q());
    let mut identity = Assertion::new("index-identity");
    let v = double_coset_index(&MatFq::identity(n), f, cfg.cap)?;
    identity.check(v == 1, || json!({"field": field_json(f), "index": v}));
    let identity = identity.with_detail(format!("ind = {v}"));

    let want_left = Pow::pow(&q, (n - 1) as u32);
    let mut left = Assertion::new("index-maximal-left");
    let mut seen_left = std::collections::BTreeSet::new();
    for &a in f.units() {
        let g = BlockAntidiagSpec::max_left(n, a).map_err(WhittakerError::from)?.matrix();
        let v = double_coset_index(&g, f, cfg.cap)?;
        seen_left.insert(v);
        left.check(BigInt::from(v) == want_left, || json!({"field": field_json(f), "g": g.to_json(f), "index": v}));
    }
    let left = left.with_detail(format!("ind = {seen_left:?}, expected {want_left}"));

    let want_anti = unipotent_order(n, ctx.q());
    let mut anti = Assertion::new("index-antidiagonal");
    let args: Vec<Vec<Fq>> = unit_tuples(f, n).collect();
    let chosen: Vec<&Vec<Fq>> = if args.len() <= 64 {
        args.iter().collect()
    } else {
        (0..16).map(|_| &args[rng.gen_range(0..args.len())]).collect()
    };
    let mut seen_anti = std::collections::BTreeSet::new();
    for a in chosen {
        let g = BlockAntidiagSpec::antidiag(a).map_err(WhittakerError::from)?.matrix();
        let v = double_coset_index(&g, f, cfg.cap)?;
        seen_anti.insert(v);
        anti.check(BigInt::from(v) == want_anti, || json!({"field": field_json(f), "g": g.to_json(f), "index": v}));
    }
    let anti = anti.with_detail(format!("ind = {seen_anti:?}, expected {want_anti}"));

    let mut norm = Assertion::new("normalization-at-identity");
    let id = MatFq::identity(n);
    let table = SummandTable::build(&id, ctx, cfg.cap)?;
    let psi_id = CycloNumber::from_rational(
        ctx.ring(),
        BigRational::new(unipotent_order(n, ctx.q()), index_g_mod_b(n, ctx.q())),
    );
    let factor = crate::whittaker::bessel_factor(n, ctx.q());
    for param in PrincipalSeriesParam::all(ctx, n) {
        let v = table.evaluate(&param)?;
        norm.check(v == psi_id, || values_dump(f, &param.indices(), &id, &psi_id, &v));
        let j = v.scale(&factor);
        let one = CycloNumber::one(ctx.ring());
        norm.check(j == one, || values_dump(f, &param.indices(), &id, &one, &j));
    }
    Ok(vec![identity, left, anti, norm.with_detail(format!("Psi(I) = {psi_id}, J(I) = 1"))])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::Minors, Suite::CauchyBinet, Suite::Support, Suite::Ind, Suite::Hecke] {
            let r = run_suite(suite, 3, 1, &VerifyConfig::new(2)).unwrap();
            assert!(r.passed(), "{}", r.render());
        }
        let r = run_suite(Suite::GtVsBruteforce, 3, 1, &VerifyConfig::new(2)).unwrap();
        assert!(r.passed(), "{}", r.render());
        let r = run_suite(Suite::CurtisVsOracle, 3, 1, &VerifyConfig::new(2)).unwrap();
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn reports_are_reproducible() {
        let mut cfg = VerifyConfig::new(3);
        cfg.samples = 20;
        cfg.seed = 7;
        let a = run_suite(Suite::CauchyBinet, 5, 1, &cfg).unwrap().render();
        let b = run_suite(Suite::CauchyBinet, 5, 1, &cfg).unwrap().render();
        assert_eq!(a, b);
        cfg.seed = 8;
        assert!(run_suite(Suite::CauchyBinet, 5, 1, &cfg).unwrap().passed());
    }

    #[test]
    fn failing_suite_dumps_counterexample() {
        let r = run_suite(Suite::GtVsBruteforce, 3, 1, &VerifyConfig::new(3)).unwrap();
        let minimal = r.assertions.iter().find(|a| a.name == "minimal").unwrap();
        assert!(!minimal.passed());
        let c = minimal.counterexample.as_ref().unwrap();
        for key in ["field", "chi", "g", "expected", "got"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert!(r.render().contains("FAIL minimal"));
        assert!(r.render().contains("PASS maximal-right"));
    }

    #[test]
    fn rejects_tiny_sizes() {
        assert!(matches!(
            run_suite(Suite::Hecke, 3, 1, &VerifyConfig::new(1)),
            Err(VerifyError::SizeTooSmall { .. })
        ));
    }
}
