//! Command-line front end: problem files in, JSON reports out.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cone::{build_interval_cone, build_interval_cone_odd, Basis, BasisTag, ConeKind, ConeOperator};
use crate::constants::{auto_constants, constants_for_cone, k2_general, k3_gershgorin, rho, univariate_C_with_r, Provenance};
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, rat, Field, Rational};
use crate::rational::{decompose, verify_exact, Verdict};
use crate::solver::{solve, CSetting, SolveResult, SolveStatus, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dualcert", version, about = "Certified lower bounds for weighted sums of squares")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the bound iteration and print the certified bound with its certificate.
    Bound(Args),
    /// Check a bound and certificate exactly.
    Verify(Args),
    /// Emit a rational weighted sum-of-squares decomposition of t − c·1.
    Decompose(Args),
    /// Print the convergence constants of the problem's cone.
    Constants(Args),
}

#[derive(clap::Args, Debug, Clone)]
pub struct Args {
    pub problem: PathBuf,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// `auto`, `none`, or a positive rational.
    #[arg(long = "C")]
    pub c: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Write per-iteration records as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    pub mode: Mode,
    /// Bound to check; overrides the problem file.
    #[arg(long, allow_hyphen_values = true)]
    pub bound: Option<String>,
    /// Comma-separated rationals; overrides the problem file.
    #[arg(long, allow_hyphen_values = true)]
    pub certificate: Option<String>,
    /// Read bound and certificate from a report printed by `bound`.
    #[arg(long)]
    pub from: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Floating-point iteration, exact check of the returned pair.
    Float,
    /// Floating-point iteration with every iterate checked exactly.
    Exact,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            Scalar::Number(v) => crate::field::lift_f64(*v),
            Scalar::Text(s) => parse_scalar(s),
        }
    }
}

/// A rational, or a float such as `1e-7` taken at its binary value.
fn parse_scalar(s: &str) -> Result<Rational> {
    parse_rational(s).or_else(|e| match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => crate::field::lift_f64(v),
        _ => Err(e),
    })
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ConeSpec {
    Builtin(BuiltinCone),
    Custom { custom: PathBuf },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinCone {
    IntervalEven,
    IntervalOdd,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProblemBasis {
    Monomial,
    Chebyshev,
    Custom,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub basis: ProblemBasis,
    #[serde(default)]
    pub degree: Option<usize>,
    pub coeffs: Vec<String>,
    pub cone: ConeSpec,
    #[serde(default)]
    pub r: Option<Scalar>,
    #[serde(default)]
    pub epsilon: Option<Scalar>,
    #[serde(default, rename = "C")]
    pub c: Option<Scalar>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub bound: Option<String>,
    #[serde(default)]
    pub certificate: Option<Vec<String>>,
}

/// A parsed problem: the cone and the polynomial's coefficients.
pub struct Problem {
    pub file: ProblemFile,
    pub cone: ConeOperator,
    pub t: Vec<Rational>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ProblemFile = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file(file, base)
    }

    /// `base` resolves relative custom-cone paths.
    pub fn from_file(file: ProblemFile, base: &Path) -> Result<Self> {
        let cone = match (&file.cone, file.basis) {
            (ConeSpec::Custom { custom }, _) => crate::cone::ConeFile::load(&base.join(custom))?,
            (ConeSpec::Builtin(_), ProblemBasis::Custom) => {
                return Err(Error::InvalidParameter("basis 'custom' needs a custom cone".into()))
            }
            (ConeSpec::Builtin(kind), basis) => {
                let basis = if basis == ProblemBasis::Monomial { Basis::Monomial } else { Basis::Chebyshev };
                let degree = file
                    .degree
                    .ok_or_else(|| Error::InvalidParameter("built-in cones need 'degree'".into()))?;
                match kind {
                    BuiltinCone::IntervalEven => {
                        if degree % 2 != 0 {
                            return Err(Error::InvalidParameter(format!("interval-even needs an even degree, got {degree}")));
                        }
                        build_interval_cone(degree / 2, basis)?
                    }
                    BuiltinCone::IntervalOdd => {
                        if degree % 2 != 1 {
                            return Err(Error::InvalidParameter(format!("interval-odd needs an odd degree, got {degree}")));
                        }
                        build_interval_cone_odd(degree / 2, basis)?
                    }
                }
            }
        };
        if file.coeffs.len() != cone.dim() {
            return Err(Error::DimensionMismatch {
                expected: cone.dim(),
                got: file.coeffs.len(),
            });
        }
        let t = file.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        Ok(Problem { file, cone, t })
    }

    pub fn config(&self, args: &Args) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(r) = &args.r {
            cfg.r = parse_scalar(r)?;
        } else if let Some(r) = &self.file.r {
            cfg.r = r.to_rational()?;
        }
        if let Some(e) = &args.epsilon {
            cfg.epsilon = parse_scalar(e)?.to_f64();
        } else if let Some(e) = &self.file.epsilon {
            cfg.epsilon = e.to_rational()?.to_f64();
        }
        let c_text = match (&args.c, &self.file.c) {
            (Some(c), _) => Some(c.clone()),
            (None, Some(Scalar::Text(s))) => Some(s.clone()),
            (None, Some(Scalar::Number(v))) => Some(format_rational(&crate::field::lift_f64(*v)?)),
            (None, None) => None,
        };
        cfg.c = match c_text.as_deref().map(str::trim) {
            None | Some("auto") => CSetting::Auto,
            Some("none") => CSetting::None,
            Some(v) => CSetting::Value(parse_scalar(v)?),
        };
        if let Some(m) = args.max_iters.or(self.file.max_iters) {
            cfg.max_iters = m;
        }
        cfg.verify_iterates = args.mode == Mode::Exact;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bound and certificate from flags, a previous report, or the problem file, in that order.
    pub fn pair(&self, args: &Args) -> Result<(Rational, Vec<Rational>)> {
        let report: Option<BoundReport> = match &args.from {
            Some(p) => Some(serde_json::from_str(&std::fs::read_to_string(p)?)?),
            None => None,
        };
        let bound = match (&args.bound, &report, &self.file.bound) {
            (Some(b), _, _) => parse_rational(b)?,
            (None, Some(r), _) => parse_rational(&r.bound)?,
            (None, None, Some(b)) => parse_rational(b)?,
            _ => return Err(Error::InvalidParameter("no bound given".into())),
        };
        let cert: Vec<Rational> = match (&args.certificate, &report, &self.file.certificate) {
            (Some(c), _, _) => c.split(',').map(parse_rational).collect::<Result<_>>()?,
            (None, Some(r), _) => r.certificate.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
            (None, None, Some(c)) => c.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
            _ => return Err(Error::InvalidParameter("no certificate given".into())),
        };
        if cert.len() != self.cone.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cone.dim(),
                got: cert.len(),
            });
        }
        Ok((bound, cert))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundReport {
    pub status: String,
    pub bound: String,
    pub bound_decimal: f64,
    pub certificate: Vec<String>,
    pub gap_guarantee: bool,
    pub iterations: usize,
    pub verified: bool,
    pub trace_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BoundReport {
    fn new(res: &SolveResult, trace_path: Option<&Path>, error: Option<String>) -> Self {
        let status = serde_json::to_value(&res.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        BoundReport {
            status,
            bound: format_rational(&res.c),
            bound_decimal: res.c.to_f64(),
            certificate: res.x.iter().map(format_rational).collect(),
            gap_guarantee: res.gap_guarantee,
            iterations: res.iterations,
            verified: res.verified,
            trace_path: trace_path.map(|p| p.display().to_string()),
            error,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotCertified | Error::NotInterior { .. } => EXIT_REJECTED,
        Error::MaxIterations(_) | Error::NumericFailure(_) | Error::SingularHessian => EXIT_PARTIAL,
        _ => EXIT_INPUT,
    }
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Bound(a) => cmd_bound(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Decompose(a) => cmd_decompose(a, out),
        Command::Constants(a) => cmd_constants(a, out),
    }
}

pub fn cmd_bound(args: &Args, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&args.problem)?;
    let cfg = p.config(args)?;
    let (result, error) = match solve(&p.cone, &p.t, &cfg) {
        Ok(res) => (Some(res), None),
        Err(fail) => (fail.partial, Some(fail.error)),
    };
    let Some(res) = result else {
        return Err(error.unwrap_or(Error::NumericFailure("solver returned nothing".into())));
    };
    if let Some(path) = &args.trace {
        std::fs::write(path, res.trace.to_json_lines())?;
    }
    if res.verified && !verify_exact(&p.cone, &p.t, &res.c, &res.x)?.is_certified() {
        return Err(Error::NumericFailure("returned pair failed its final check".into()));
    }
    let partial = matches!(res.status, SolveStatus::MaxIterations | SolveStatus::NumericFailure);
    emit(out, &BoundReport::new(&res, args.trace.as_deref(), error.map(|e| e.to_string())))?;
    Ok(if partial { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn cmd_verify(args: &Args, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&args.problem)?;
    let (c, x) = p.pair(args)?;
    let verdict = verify_exact(&p.cone, &p.t, &c, &x)?;
    let (report, code) = match verdict {
        Verdict::Certified => (VerifyReport { verdict: "certified", reason: None }, EXIT_OK),
        Verdict::Rejected(r) => (
            VerifyReport {
                verdict: "rejected",
                reason: Some(r.to_string()),
            },
            EXIT_REJECTED,
        ),
    };
    emit(out, &report)?;
    Ok(code)
}

pub fn cmd_decompose(args: &Args, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&args.problem)?;
    let (c, x) = p.pair(args)?;
    if let Verdict::Rejected(r) = verify_exact(&p.cone, &p.t, &c, &x)? {
        emit(
            out,
            &VerifyReport {
                verdict: "rejected",
                reason: Some(r.to_string()),
            },
        )?;
        return Ok(EXIT_REJECTED);
    }
    let dec = decompose(&p.cone, &p.t, &c, &x)?;
    if !dec.check(&p.cone)? {
        return Err(Error::NumericFailure("decomposition does not re-expand".into()));
    }
    emit(out, &dec.to_json())?;
    Ok(EXIT_OK)
}

pub fn cmd_constants(args: &Args, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&args.problem)?;
    let cfg = p.config(args)?;
    let op = &p.cone;
    let value = match (&cfg.c, op.kind(), op.basis_tag()) {
        (CSetting::Value(c), _, _) => serde_json::json!({
            "rho_r": format_rational(&rho(&cfg.r)?),
            "C_lower": { "exact": format_rational(c), "approx": c.to_f64() },
            "provenance": Provenance::User,
        }),
        (_, ConeKind::IntervalEven { d }, BasisTag::Chebyshev) => univariate_C_with_r(d, &cfg.r)?.to_json(),
        (_, ConeKind::Custom, _) => {
            // k₁ is not available for custom cones
            let k3 = k3_gershgorin(op);
            serde_json::json!({
                "rho_r": { "exact": format_rational(&rho(&cfg.r)?), "approx": rho(&cfg.r)?.to_f64() },
                "k1": null,
                "k2": { "value": { "approx": k2_general(op) }, "provenance": Provenance::Eigenvalue },
                "k3": { "value": { "exact": format_rational(&k3), "approx": k3.to_f64() }, "provenance": Provenance::Gershgorin },
                "nu": op.nu(),
                "C_lower": null,
            })
        }
        _ => match auto_constants(op, &cfg.r) {
            Some(k) => k.to_json(),
            None => constants_for_cone(op, rat(1, 1), Provenance::ClosedForm, &cfg.r)?.to_json(),
        },
    };
    emit(out, &value)?;
    Ok(EXIT_OK)
}
