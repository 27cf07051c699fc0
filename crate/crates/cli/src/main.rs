//! `gtfq`: tables of Whittaker/Bessel values and Curtis tables over GL(n, F_q), plus the
//! verification suites.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gtfq::chars::{AddCharacter, Context, PrincipalSeriesParam};
use gtfq::curtis::{curtis_max_left, curtis_max_right, curtis_minimal, fourier_inversion_oracle, CurtisTable, GDescriptor};
use gtfq::cyclo::CycloNumber;
use gtfq::fqlinalg::DEFAULT_CAP;
use gtfq::gtformulas::{gt_maximal_left, gt_maximal_right, gt_minimal, gt_recursive, Recursion};
use gtfq::verify::{run_suite, Suite, VerifyConfig, VerifyError};
use gtfq::whittaker::{Method, SummandTable, WhittakerError};

#[derive(Parser, Debug)]
#[command(name = "gtfq", version, about = "Whittaker functions and Curtis tables over GL(n, F_q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Values of the Whittaker function at a block anti-diagonal matrix.
    Whittaker(WhittakerArgs),
    /// Curtis table of a block anti-diagonal matrix.
    Curtis(CurtisArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Odd characteristic.
    #[arg(long)]
    p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Matrix size.
    #[arg(long)]
    n: usize,
    /// Upper bound on enumerated unipotent elements and patterns.
    #[arg(long, env = "GTFQ_CAP", default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Worker threads for enumeration loops (0 picks the machine default).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WhittakerArgs {
    #[command(flatten)]
    common: Common,
    /// `antidiag:a1,..,an`, `minimal:a1,..,an`, `maxright:a` or `maxleft:a`, entries as field encodings.
    #[arg(long)]
    g: String,
    /// Character indices `j1,..,jn`; every tuple when omitted.
    #[arg(long)]
    chi: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Exit 1 when methods disagree.
    #[arg(long)]
    assert_equal: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CurtisArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    g: String,
    /// Also compute the table by Fourier inversion and compare.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of minors, cauchybinet, support, gt-vs-bruteforce, curtis-vs-oracle, hecke, ind.
    suite: String,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cases drawn where a suite samples.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Bruteforce,
    Gt,
    Recursion,
    All,
}

/// Failure modes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Mismatch(String),
    Config(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Config(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl From<WhittakerError> for Failure {
    fn from(e: WhittakerError) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn setup(common: &Common) -> Result<Context, Failure> {
    if common.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global()
            .map_err(config)?;
    }
    if common.n == 0 {
        return Err(Failure::Config("n must be positive".into()));
    }
    Context::new(common.p, common.k).map_err(config)
}

fn parse_ints(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| Failure::Config(format!("bad integer {x:?}"))))
        .collect()
}

fn parse_g(s: &str, ctx: &Context, n: usize) -> Result<GDescriptor, Failure> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Failure::Config(format!("matrix descriptor {s:?} lacks ':'")))?;
    let f = ctx.field();
    let args = parse_ints(rest)?
        .into_iter()
        .map(|raw| {
            let x = f.element(raw).map_err(config)?;
            if x.is_zero() {
                Err(Failure::Config("matrix entries must be nonzero".into()))
            } else {
                Ok(x)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let one = |args: Vec<_>| -> Result<_, Failure> {
        match args.as_slice() {
            [a] => Ok(*a),
            _ => Err(Failure::Config(format!("{kind} takes one entry"))),
        }
    };
    let g = match kind {
        "antidiag" | "minimal" => {
            if args.len() != n {
                return Err(Failure::Config(format!("{kind} needs {n} entries, got {}", args.len())));
            }
            GDescriptor::Minimal(args)
        }
        "maxright" => GDescriptor::MaxRight(one(args)?),
        "maxleft" => GDescriptor::MaxLeft(one(args)?),
        _ => return Err(Failure::Config(format!("unknown matrix kind {kind:?}"))),
    };
    if n < 2 {
        return Err(Failure::Config("block anti-diagonal families need n >= 2".into()));
    }
    Ok(g)
}

fn parse_chi(s: Option<&str>, ctx: &Context, n: usize) -> Result<Vec<PrincipalSeriesParam>, Failure> {
    match s {
        None => Ok(PrincipalSeriesParam::all(ctx, n)),
        Some(s) => {
            let js = parse_ints(s)?;
            if js.len() != n {
                return Err(Failure::Config(format!("--chi needs {n} indices, got {}", js.len())));
            }
            Ok(vec![PrincipalSeriesParam::new(ctx, &js).map_err(config)?])
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_value(v: &CycloNumber) -> String {
    let (re, im) = v.approx_rounded(12);
    format!("{re},{im}")
}

fn gt_value(g: &GDescriptor, param: &PrincipalSeriesParam, cap: u64) -> Result<CycloNumber, WhittakerError> {
    Ok(match g {
        GDescriptor::MaxRight(a) => gt_maximal_right(*a, param)?.value,
        GDescriptor::MaxLeft(a) => gt_maximal_left(*a, param)?.value,
        GDescriptor::Minimal(a) => gt_minimal(a, param, cap)?.value,
    })
}

fn recursion_value(g: &GDescriptor, param: &PrincipalSeriesParam) -> Result<CycloNumber, WhittakerError> {
    let direction = match g {
        GDescriptor::MaxRight(a) => Recursion::MaxRight(*a),
        GDescriptor::MaxLeft(a) => Recursion::MaxLeft(*a),
        GDescriptor::Minimal(a) => Recursion::Minimal(a.clone()),
    };
    gt_recursive(&direction, param)
}

fn cmd_whittaker(args: &WhittakerArgs) -> Result<(), Failure> {
    let ctx = setup(&args.common)?;
    let n = args.common.n;
    let cap = args.common.cap;
    let g = parse_g(&args.g, &ctx, n)?;
    let params = parse_chi(args.chi.as_deref(), &ctx, n)?;
    let methods: Vec<Method> = match args.method {
        MethodArg::Bruteforce => vec![Method::Bruteforce],
        MethodArg::Gt => vec![Method::GtClosedForm],
        MethodArg::Recursion => vec![Method::GtRecursion],
        MethodArg::All => vec![Method::Bruteforce, Method::GtClosedForm, Method::GtRecursion],
    };
    let summands = if methods.contains(&Method::Bruteforce) {
        Some(SummandTable::build(&g.matrix(n).map_err(config)?, &ctx, cap)?)
    } else {
        None
    };
    let mut w = sink(&args.output.out)?;
    if let Format::Csv = args.output.format {
        writeln!(w, "# lossy: float approximations only")?;
        writeln!(w, "n,q,psi,chi,g_kind,g_a,method,re_approx,im_approx{}", if methods.len() > 1 { ",equal" } else { "" })?;
    }
    let mut mismatches = 0usize;
    for param in &params {
        let mut values = Vec::with_capacity(methods.len());
        for &m in &methods {
            let v = match m {
                Method::Bruteforce => summands.as_ref().expect("built").evaluate(param)?,
                Method::GtClosedForm => gt_value(&g, param, cap)?,
                Method::GtRecursion => recursion_value(&g, param)?,
            };
            values.push(v);
        }
        let equal = values.windows(2).all(|w| w[0] == w[1]);
        if !equal {
            mismatches += 1;
        }
        for (m, v) in methods.iter().zip(&values) {
            match args.output.format {
                Format::Json => {
                    let mut rec = json!({
                        "n": n,
                        "q": ctx.q(),
                        "psi": AddCharacter::CONVENTION,
                        "chi": param.indices(),
                        "g": g.to_json(),
                        "method": m.as_str(),
                        "value": v.to_json(),
                    });
                    if methods.len() > 1 {
                        rec["equal"] = json!(equal);
                    }
                    writeln!(w, "{rec}")?;
                }
                Format::Csv => {
                    let chi = param.indices().iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                    let a = g.args().iter().map(|x| x.raw().to_string()).collect::<Vec<_>>().join(" ");
                    write!(
                        w,
                        "{n},{},{},{chi},{},{a},{},{}",
                        ctx.q(),
                        AddCharacter::CONVENTION,
                        g.kind(),
                        m.as_str(),
                        csv_value(v)
                    )?;
                    if methods.len() > 1 {
                        write!(w, ",{equal}")?;
                    }
                    writeln!(w)?;
                }
            }
        }
    }
    w.flush()?;
    if args.assert_equal && mismatches > 0 {
        return Err(Failure::Mismatch(format!("{mismatches} character tuples with disagreeing methods")));
    }
    Ok(())
}

fn write_table(w: &mut dyn Write, format: Format, label: &str, table: &CurtisTable, q: u32) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut rec = table.to_json();
            rec["source"] = json!(label);
            rec["q"] = json!(q);
            rec["psi"] = json!(AddCharacter::CONVENTION);
            writeln!(w, "{rec}")?;
        }
        Format::Csv => {
            for (t, v) in &table.entries {
                let t = t.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                writeln!(w, "{label},{t},{}", csv_value(v))?;
            }
        }
    }
    Ok(())
}

fn cmd_curtis(args: &CurtisArgs) -> Result<(), Failure> {
    let ctx = setup(&args.common)?;
    let n = args.common.n;
    let cap = args.common.cap;
    let g = parse_g(&args.g, &ctx, n)?;
    let closed = match &g {
        GDescriptor::MaxRight(a) => curtis_max_right(*a, n, &ctx)?,
        GDescriptor::MaxLeft(a) => curtis_max_left(*a, n, &ctx)?,
        GDescriptor::Minimal(a) => curtis_minimal(a, &ctx, cap)?,
    };
    let oracle = if args.oracle {
        Some(fourier_inversion_oracle(&g, n, &ctx, cap)?)
    } else {
        None
    };
    let f = ctx.field();
    let mut w = sink(&args.output.out)?;
    if let Format::Csv = args.output.format {
        writeln!(w, "# lossy: float approximations only; torus points as discrete logs")?;
        writeln!(w, "source,t,re_approx,im_approx")?;
    }
    write_table(&mut w, args.output.format, "closed-form", &closed, ctx.q())?;
    if let Some(o) = &oracle {
        write_table(&mut w, args.output.format, "oracle", o, ctx.q())?;
    }
    let violations = closed.support_violations(f);
    let diff = oracle.as_ref().map(|o| closed.diff(o));
    if let Format::Json = args.output.format {
        let mut report = json!({
            "support": {
                "required_det": g.required_det(n, f).raw(),
                "points": closed.entries.len(),
                "violations": violations,
            }
        });
        if let Some(d) = &diff {
            report["equal"] = json!(d.is_empty());
            report["differing_points"] = json!(d);
        }
        writeln!(w, "{report}")?;
    }
    w.flush()?;
    if !violations.is_empty() {
        return Err(Failure::Mismatch("closed-form table has off-determinant support".into()));
    }
    match diff {
        Some(d) if !d.is_empty() => Err(Failure::Mismatch(format!("tables differ at {} torus points", d.len()))),
        _ => Ok(()),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = args.suite.parse()?;
    setup(&args.common)?;
    let cfg = VerifyConfig {
        n: args.common.n,
        seed: args.seed,
        samples: args.samples,
        cap: args.common.cap,
        ..VerifyConfig::new(args.common.n)
    };
    let report = run_suite(suite, args.common.p, args.common.k, &cfg)?;
    let mut out = io::stdout().lock();
    out.write_all(report.render().as_bytes())?;
    out.flush()?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("suite {suite} failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Whittaker(a) => cmd_whittaker(a),
        Command::Curtis(a) => cmd_curtis(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                Failure::Mismatch(m) | Failure::Config(m) | Failure::Cap(m) => m,
            };
            eprintln!("gtfq: {msg}");
            ExitCode::from(e.code())
        }
    }
}
