//! Command-line front end.
//!
//! Every command writes either pretty JSON (certificates) or CSV whose first
//! line is `# config: {...}` with the fully resolved configuration, so reruns
//! with the same arguments are byte-identical. Exit codes: 0 pass, 1 a
//! certificate failed or an anomaly was found, 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::auxiliary::{aux_sign_scan, AuxFunction, AuxParams, DEFAULT_GRID};
use crate::certify::{
    check_gap_bound, check_index_condition, check_polynomial_criterion, check_relaxed_gap_bound,
    check_threshold_criterion, Certificate, ConditionId, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::estimate::{
    extremal_probe, minimize_ratio, Init, Method, OptimizerConfig, StepRule, DEFAULT_SCHEDULE,
};
use crate::inequality::{verify_inequality, TruncatedSequence};
use crate::params::{parse_rational, rational_to_f64, Exponents, Param};
use crate::polynomials::{
    a1_exact, a2_exact, relaxed_threshold_exact, small_gap_threshold_exact,
    theorem1_applicable_exact,
};
use crate::weight_trace::{build_weights, verify_weighted_condition, weighted_condition_margins};
use crate::weights::WeightFamily;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "copson", version, about = "Reversed Copson inequalities for 0 < p < 1")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the sufficient conditions for one (family, L, p) over n ≤ N.
    Certify(CertifyArgs),
    /// Tabulate a1, a2 and the applicable criterion over an (L, p) grid.
    Scan(ScanArgs),
    /// Minimise the ratio functional over truncated sequences.
    Estimate(EstimateArgs),
    /// Evaluate the ratio at the extremal sequences n^(-1/p-eps).
    Probe(ProbeArgs),
    /// Dump the auxiliary weights and the weighted condition margins.
    Weights(WeightsArgs),
    /// Grid sign scan of an auxiliary function on (0, 1].
    Aux(AuxArgs),
    /// Evaluate both sides of the inequality on a sequence read from a file.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// unit, powerdiff:ALPHA, powerkernel:ALPHA or custom:PATH.
    #[arg(long, default_value = "unit")]
    pub family: String,
    /// Exponent for powerdiff / powerkernel given without one.
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl FamilyArgs {
    fn resolve(&self) -> Result<WeightFamily> {
        WeightFamily::from_spec_with_alpha(&self.family, self.alpha)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file (written atomically); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_param)]
    pub p: Param,
    #[arg(long = "L", value_parser = parse_param)]
    pub l: Param,
    /// Also check the relaxed gap bound and the relaxed threshold.
    #[arg(long = "M", value_parser = parse_param)]
    pub m: Option<Param>,
    #[arg(long = "N", default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Also evaluate the weighted form of the index condition.
    #[arg(long)]
    pub weighted: bool,
    /// Restrict to these condition ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub conditions: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PMode {
    /// p over the --p grid.
    Grid,
    /// p at the threshold for each L (L²/4, or the relaxed one with --M).
    Threshold,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// `LO:HI:COUNT` (endpoints included) or a single value.
    #[arg(long = "L", default_value = "1:3:50")]
    pub l: String,
    /// `LO:HI:COUNT` or a single value; points outside (0,1) are skipped.
    #[arg(long, default_value = "0:1/3:51")]
    pub p: String,
    #[arg(long = "M", value_parser = parse_param)]
    pub m: Option<Param>,
    #[arg(long = "p-mode", value_enum, default_value_t = PMode::Grid)]
    pub p_mode: PMode,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Uniform,
    Extremal,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Lbfgs,
    Steepest,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    /// Truncation schedule.
    #[arg(long = "N", value_delimiter = ',', default_values_t = DEFAULT_SCHEDULE)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitKind::Extremal)]
    pub init: InitKind,
    /// ε of the extremal initialisation.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = MethodKind::Lbfgs)]
    pub method: MethodKind,
    /// Fixed step length; backtracking when omitted.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long = "max-iters", default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the achieving sequence of the largest N here (CSV `n,x`).
    #[arg(long = "sequence-out")]
    pub sequence_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001", value_parser = parse_real)]
    pub eps: Vec<f64>,
    #[arg(long = "N", value_delimiter = ',', default_value = "100000")]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long = "L", value_parser = parse_real)]
    pub l: f64,
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuxArgs {
    /// Function id (f, g, u, v, h, h_LMp, u_LMp, v_LMp, ineq_3_1).
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long = "L", value_parser = parse_real)]
    pub l: f64,
    #[arg(long = "M", default_value_t = 0.0, value_parser = parse_real)]
    pub m: f64,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long = "L", value_parser = parse_real)]
    pub l: f64,
    /// Text file with one non-negative decimal per line.
    #[arg(long)]
    pub sequence: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_param(s: &str) -> std::result::Result<Param, String> {
    s.parse::<Param>().map_err(|e| e.to_string())
}

/// Decimal or `num/den`, rounded to the nearest double.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    parse_param(s).map(|p| p.value)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Certify(a) => cmd_certify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Aux(a) => cmd_aux(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(out: &OutArgs, contents: &str) -> Result<()> {
    match &out.out {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn csv_with_header(config: &Value, header: &str) -> String {
    format!("# config: {config}\n{header}\n")
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn path_value(p: &Option<PathBuf>) -> Value {
    p.as_ref()
        .map(|p| Value::from(p.display().to_string()))
        .unwrap_or(Value::Null)
}

fn param_value(p: &Option<Param>) -> Value {
    p.as_ref().map(|p| Value::from(p.text.clone())).unwrap_or(Value::Null)
}

fn exit_code(passed: bool) -> i32 {
    if passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_certify(a: &CertifyArgs) -> Result<i32> {
    let family = a.family.resolve()?;
    let exps = Exponents::new(a.p.value, a.l.value)?;
    let mut wanted: Vec<ConditionId> = if a.conditions.is_empty() {
        let mut ids = vec![
            ConditionId::IndexCondition,
            ConditionId::GapBound,
            ConditionId::PolynomialCriterion,
        ];
        if a.l.value < 1.0 {
            ids.push(ConditionId::ThresholdCriterion);
        }
        if a.m.is_some() {
            ids.push(ConditionId::RelaxedGapBound);
        }
        if a.weighted {
            ids.push(ConditionId::WeightedIndexCondition);
        }
        ids
    } else {
        a.conditions
            .iter()
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<_>>>()?
    };
    wanted.sort();
    wanted.dedup();

    let mut certs: Vec<Certificate> = Vec::with_capacity(wanted.len());
    for id in wanted {
        let cert = match id {
            ConditionId::IndexCondition => check_index_condition(&family, &exps, a.n, a.tol)?,
            ConditionId::GapBound => check_gap_bound(&family, a.l.value, a.n, a.tol)?,
            ConditionId::RelaxedGapBound => {
                let m = a
                    .m
                    .as_ref()
                    .ok_or_else(|| Error::param("COND_1_15 needs --M"))?;
                check_relaxed_gap_bound(&family, a.l.value, m.value, a.n, a.tol)?
            }
            ConditionId::PolynomialCriterion => check_polynomial_criterion(&a.l, &a.p, a.tol)?,
            ConditionId::ThresholdCriterion => {
                check_threshold_criterion(&a.l, a.m.as_ref(), &a.p, a.tol)?
            }
            ConditionId::WeightedIndexCondition => {
                let trace = build_weights(&family, &exps, a.n)?;
                verify_weighted_condition(&family, &exps, &trace, a.n, a.tol)?
            }
        };
        certs.push(cert);
    }
    let passed = certs.iter().all(|c| c.passed);
    let config = json!({
        "command": "certify",
        "family": family.spec_string(),
        "p": a.p.text,
        "L": a.l.text,
        "M": param_value(&a.m),
        "N": a.n,
        "tol": a.tol,
    });
    let doc = json!({
        "config": config,
        "passed": passed,
        "certificates": certs.iter().map(Certificate::to_json_value).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    emit(&a.out, &text)?;
    Ok(exit_code(passed))
}

/// `LO:HI:COUNT` as `COUNT` evenly spaced exact rationals with both ends, or
/// a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<BigRational>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_rational(single)?]),
        [lo, hi, count] => {
            let lo = parse_rational(lo)?;
            let hi = parse_rational(hi)?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad grid count in {spec:?}")))?;
            if count == 0 || hi < lo || (count == 1 && hi != lo) {
                return Err(Error::param(format!("malformed grid {spec:?}")));
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            let step = (&hi - &lo) / BigRational::from_integer((count - 1).into());
            Ok((0..count)
                .map(|i| &lo + &step * BigRational::from_integer(i.into()))
                .collect())
        }
        _ => Err(Error::Parse(format!("grid must be LO:HI:COUNT or a value, got {spec:?}"))),
    }
}

fn scan_row(l: &BigRational, p: &BigRational, m: Option<&Param>) -> String {
    let app = theorem1_applicable_exact(l, p);
    let m_text = m.map(|m| fmt_f64(m.value)).unwrap_or_default();
    format!(
        "{},{},{},{},{},{}\n",
        fmt_f64(rational_to_f64(l)),
        fmt_f64(rational_to_f64(p)),
        m_text,
        fmt_f64(rational_to_f64(&a1_exact(l, p))),
        fmt_f64(rational_to_f64(&a2_exact(l, p))),
        app.branch_label()
    )
}

fn cmd_scan(a: &ScanArgs) -> Result<i32> {
    let ls: Vec<BigRational> = parse_grid(&a.l)?.into_iter().filter(|l| l.is_positive()).collect();
    if ls.is_empty() {
        return Err(Error::param("L grid has no positive point"));
    }
    let in_unit = |p: &BigRational| p.is_positive() && *p < BigRational::one();
    let points: Vec<(BigRational, BigRational)> = match a.p_mode {
        PMode::Grid => {
            let ps: Vec<BigRational> = parse_grid(&a.p)?.into_iter().filter(in_unit).collect();
            if ps.is_empty() {
                return Err(Error::param("p grid has no point inside (0,1)"));
            }
            ls.iter()
                .flat_map(|l| ps.iter().map(move |p| (l.clone(), p.clone())))
                .collect()
        }
        PMode::Threshold => {
            let mut pts = Vec::new();
            for l in &ls {
                // L outside the threshold's domain has no row
                let t = match &a.m {
                    None => small_gap_threshold_exact(l).ok(),
                    Some(m) => relaxed_threshold_exact(l, &m.exact).ok().map(|r| r.0),
                };
                if let Some(t) = t.filter(in_unit) {
                    pts.push((l.clone(), t));
                }
            }
            pts
        }
    };
    let rows: Vec<String> = points
        .par_iter()
        .map(|(l, p)| scan_row(l, p, a.m.as_ref()))
        .collect();
    let config = json!({
        "command": "scan",
        "L": a.l,
        "p": a.p,
        "M": param_value(&a.m),
        "p_mode": match a.p_mode { PMode::Grid => "grid", PMode::Threshold => "threshold" },
    });
    let mut text = csv_with_header(&config, "L,p,M,a1,a2,applicable_branch");
    rows.iter().for_each(|r| text.push_str(r));
    emit(&a.out, &text)?;
    Ok(EXIT_PASS)
}

fn cmd_estimate(a: &EstimateArgs) -> Result<i32> {
    let family = a.family.resolve()?;
    if a.n.is_empty() {
        return Err(Error::param("empty N schedule"));
    }
    let base = OptimizerConfig {
        n: a.n[0],
        max_iters: a.max_iters,
        step_rule: match a.step {
            Some(s) => StepRule::Fixed(s),
            None => StepRule::Backtracking,
        },
        init: match a.init {
            InitKind::Uniform => Init::Uniform,
            InitKind::Extremal => Init::Extremal(a.eps),
            InitKind::Random => Init::Random,
        },
        method: match a.method {
            MethodKind::Lbfgs => Method::Lbfgs(10),
            MethodKind::Steepest => Method::SteepestDescent,
        },
        tol_stationarity: a.tol,
        seed: a.seed,
    };
    let config = json!({
        "command": "estimate",
        "family": family.spec_string(),
        "p": a.p,
        "N": a.n,
        "seed": a.seed,
        "init": format!("{:?}", a.init).to_lowercase(),
        "eps": a.eps,
        "method": format!("{:?}", a.method).to_lowercase(),
        "step": a.step,
        "max_iters": a.max_iters,
        "tol": a.tol,
        "sequence_out": path_value(&a.sequence_out),
        "note": "values are upper bounds on the truncated infimum",
    });
    let mut text = csv_with_header(&config, "N,value,iters,residual");
    let mut last = None;
    for &n in &a.n {
        let est = minimize_ratio(&family, a.p, &base.with_n(n))?;
        writeln!(text, "{n},{},{},{}", fmt_f64(est.value), est.iterations, fmt_f64(est.residual)).ok();
        last = Some((n, est));
    }
    if let (Some(path), Some((n, est))) = (&a.sequence_out, last) {
        let mut seq = csv_with_header(&json!({ "command": "estimate", "N": n, "config": config }), "n,x");
        for (i, x) in est.sequence.iter().enumerate() {
            writeln!(seq, "{},{}", i + 1, fmt_f64(*x)).ok();
        }
        write_atomic(path, &seq)?;
    }
    emit(&a.out, &text)?;
    Ok(EXIT_PASS)
}

fn cmd_probe(a: &ProbeArgs) -> Result<i32> {
    let family = a.family.resolve()?;
    let config = json!({
        "command": "probe",
        "family": family.spec_string(),
        "p": a.p,
        "eps": a.eps,
        "N": a.n,
        "note": "values are upper bounds on the truncated infimum",
    });
    let mut text = csv_with_header(&config, "N,eps,value");
    for &n in &a.n {
        for &eps in &a.eps {
            let v = extremal_probe(&family, a.p, eps, n)?;
            writeln!(text, "{n},{},{}", fmt_f64(eps), fmt_f64(v)).ok();
        }
    }
    emit(&a.out, &text)?;
    Ok(EXIT_PASS)
}

fn cmd_weights(a: &WeightsArgs) -> Result<i32> {
    let family = a.family.resolve()?;
    let exps = Exponents::new(a.p, a.l)?;
    let trace = build_weights(&family, &exps, a.n)?;
    let table = family.table(a.n + 1)?;
    let margins = weighted_condition_margins(&table, &exps, &trace, a.n);
    let cert = verify_weighted_condition(&family, &exps, &trace, a.n, a.tol)?;
    let config = json!({
        "command": "weights",
        "family": family.spec_string(),
        "p": a.p,
        "L": a.l,
        "N": a.n,
        "tol": a.tol,
    });
    let mut text = csv_with_header(&config, "n,w,margin");
    for (i, m) in margins.iter().enumerate() {
        writeln!(text, "{},{},{}", i + 1, fmt_f64(trace.w(i + 1)), fmt_f64(*m)).ok();
    }
    emit(&a.out, &text)?;
    Ok(exit_code(cert.passed))
}

fn cmd_aux(a: &AuxArgs) -> Result<i32> {
    let fun: AuxFunction = a.function.parse()?;
    let params = AuxParams::new(a.l, a.m, a.p);
    let report = aux_sign_scan(fun, &params, a.grid, a.tol)?;
    let config = json!({
        "command": "aux",
        "fn": fun.id(),
        "L": a.l,
        "M": a.m,
        "p": a.p,
        "grid": a.grid,
        "tol": a.tol,
    });
    let mut text = csv_with_header(
        &config,
        "function,L,M,p,grid,min_value,argmin_x,floor,min_margin,certified_regime,anomaly",
    );
    writeln!(
        text,
        "{},{},{},{},{},{},{},{},{},{},{}",
        report.function_id,
        fmt_f64(a.l),
        fmt_f64(a.m),
        fmt_f64(a.p),
        report.grid,
        fmt_f64(report.min_value),
        fmt_f64(report.argmin_x),
        fmt_f64(report.floor),
        fmt_f64(report.min_margin),
        report.certified_regime,
        report.anomaly
    )
    .ok();
    emit(&a.out, &text)?;
    Ok(exit_code(!report.anomaly))
}

fn cmd_eval(a: &EvalArgs) -> Result<i32> {
    let family = a.family.resolve()?;
    let exps = Exponents::new(a.p, a.l)?;
    let x = TruncatedSequence::from_file(&a.sequence)?;
    if x.values().iter().all(|v| v.is_zero()) {
        return Err(Error::InvalidSequence("sequence is identically zero".into()));
    }
    let table = family.table(x.len())?;
    let lhs = table.copson_lhs(x.values(), a.p);
    let power_sum: f64 = x.values().iter().map(|v| v.powf(a.p)).sum();
    let rhs = exps.target_constant() * power_sum;
    let margin = verify_inequality(&family, &x, &exps)?;
    let config = json!({
        "command": "eval",
        "family": family.spec_string(),
        "p": a.p,
        "L": a.l,
        "sequence": a.sequence.display().to_string(),
        "N": x.len(),
        "tol": a.tol,
    });
    let mut text = csv_with_header(&config, "lhs,rhs,ratio,margin");
    writeln!(
        text,
        "{},{},{},{}",
        fmt_f64(lhs),
        fmt_f64(rhs),
        fmt_f64(lhs / power_sum),
        fmt_f64(margin)
    ).ok();
    emit(&a.out, &text)?;
    Ok(exit_code(margin > -a.tol))
}
