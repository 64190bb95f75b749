//! Command-line front end. Every subcommand's arguments double as the JSON
//! run-configuration schema, so `--config run.json` and flags are interchangeable.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::charpoly::{build_pw, build_pw_tilde, isolate_root, psi, RootEnclosure, RootKind, WeightVector};
use crate::construct::{construct, verify_certificate, Certificate, Verdict};
use crate::diagnostics::{local_peak_check, mahler_gap, peaks, GapMultiplier, GrowthBase, MuSequence};
use crate::enclosure::{Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{decimal_approx, fmt_rational, ilog2, parse_rational, qsub, Rational};
use crate::series::{Numerators, Sequence, WeightedSeriesInstance};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Decimal digits in the non-authoritative `approx` renderings.
const APPROX_DIGITS: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "rapidseries", version, about = "Certified computations for weighted reciprocal series")]
struct Cli {
    /// Output document format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Read the command and its parameters from a JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Plain,
}

/// A validated command with its parameters.
#[derive(Subcommand, Debug, Clone, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Isolate the characteristic root of a weight polynomial.
    Roots(RootsArgs),
    /// Enclose a weighted reciprocal series.
    Eval(EvalArgs),
    /// Check the growth and numerator hypotheses on a finite horizon.
    Hypotheses(HypothesesArgs),
    /// Normalized logarithms, peak set, local peaks and Mahler gaps.
    Diagnose(DiagnoseArgs),
    /// Build a sequence whose series hits a rational target, with a certificate.
    Construct(ConstructArgs),
    /// Re-check one or more certificates.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Roots(_) => "roots",
            Command::Eval(_) => "eval",
            Command::Hypotheses(_) => "hypotheses",
            Command::Diagnose(_) => "diagnose",
            Command::Construct(_) => "construct",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    /// `(x-1) sum w_j x^j - W x^{d-1}`, unique positive root.
    Pw,
    /// `(x-1) sum w_j x^j - x^{d-1}`, largest positive root.
    Tilde,
    /// `x^d - x^{d-1} - 1`.
    Psi,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsArgs {
    /// Weights as a comma list, e.g. `1,0,2,1`.
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long, value_enum, default_value_t = PolyKind::Pw)]
    #[serde(default = "default_poly")]
    pub poly: PolyKind,
    /// Degree for `--poly psi` when no weights are given.
    #[arg(long)]
    pub d: Option<usize>,
    /// Target width, `1e-k` or `p/q`.
    #[arg(long, default_value = "1e-12")]
    #[serde(default = "default_root_prec")]
    pub prec: String,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub w: String,
    /// `identity`, `sylvester`, `geometric:B`, `tower:B,K`, `list:a,b,...` or `file:PATH`.
    #[arg(long)]
    pub seq: String,
    /// Numerator sequence, same syntax as `--seq`; all ones when absent.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value = "1e-30")]
    #[serde(default = "default_eval_prec")]
    pub prec: String,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesArgs {
    #[arg(long)]
    pub w: String,
    #[arg(long)]
    pub seq: String,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub eta: String,
    #[arg(long)]
    pub tau: String,
    #[arg(long, default_value_t = 100)]
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierKind {
    Product,
    Lcm,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub w: String,
    #[arg(long)]
    pub seq: String,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value_t = 10)]
    #[serde(default = "default_diag_horizon")]
    pub horizon: usize,
    /// Base of the normalized logarithms: `cw`, `ctilde` or an exact `p/q`.
    #[arg(long, default_value = "cw")]
    #[serde(default = "default_base")]
    pub base: String,
    #[arg(long, value_enum, default_value_t = MultiplierKind::Product)]
    #[serde(default = "default_multiplier")]
    pub multiplier: MultiplierKind,
    /// Local-peak checks: `all` or a single `P,Q`.
    #[arg(long)]
    pub local: Option<String>,
    #[arg(long, default_value = "1e-20")]
    #[serde(default = "default_diag_prec")]
    pub prec: String,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructArgs {
    #[arg(long)]
    pub w: String,
    /// Growth constant `C > 1` as `p/q`.
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: String,
    /// Target sum; the attainable-interval midpoint when absent.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 15)]
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Precision policy of the schedule and selection steps.
    #[arg(long)]
    pub prec: Option<String>,
    /// Also write the bare certificate to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Certificate files, or `-` for standard input.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
}

fn default_poly() -> PolyKind {
    PolyKind::Pw
}
fn default_root_prec() -> String {
    "1e-12".into()
}
fn default_eval_prec() -> String {
    "1e-30".into()
}
fn default_horizon() -> usize {
    100
}
fn default_diag_horizon() -> usize {
    10
}
fn default_base() -> String {
    "cw".into()
}
fn default_multiplier() -> MultiplierKind {
    MultiplierKind::Product
}
fn default_diag_prec() -> String {
    "1e-20".into()
}
fn default_depth() -> usize {
    15
}

/// Loads a run configuration document.
pub fn load_config(path: &Path) -> Result<Command> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Command> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("run configuration: {e}")))
}

/// Parses a sequence specification such as `tower:2,3` or `file:terms.txt`.
pub fn parse_sequence(spec: &str) -> Result<Sequence> {
    let spec = spec.trim();
    let bad = || Error::InvalidParameter(format!("unknown sequence `{spec}`"));
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    match head {
        "identity" => Ok(Sequence::identity()),
        "sylvester" => Ok(Sequence::sylvester()),
        "geometric" => Sequence::geometric(int(rest)?),
        "tower" => {
            let (b, k) = rest.split_once(',').ok_or_else(bad)?;
            Sequence::power_tower(int(b)?, parse_rational(k)?)
        }
        "list" => {
            let terms = rest
                .split(',')
                .map(|t| t.trim().parse::<BigInt>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            Sequence::explicit(terms)
        }
        "file" => Sequence::from_file(Path::new(rest)),
        _ => Err(bad()),
    }
}

fn instance(w: &str, seq: &str, b: Option<&str>) -> Result<WeightedSeriesInstance> {
    let w = WeightVector::parse(w)?;
    let a = Arc::new(parse_sequence(seq)?);
    let b = match b {
        Some(s) => Numerators::Sequence(Arc::new(parse_sequence(s)?)),
        None => Numerators::One,
    };
    Ok(WeightedSeriesInstance::new(a, b, w))
}

/// Exit code for an error value.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::PreconditionViolated(_)
        | Error::MalformedCertificate(_)
        | Error::IndexBeyondHorizon { .. }
        | Error::Io(_) => EXIT_USAGE,
        Error::PrecisionCapExceeded { .. } | Error::FloorUndecidable { .. } | Error::SelectionUndecidable { .. } => {
            EXIT_UNDECIDED
        }
        _ => EXIT_FAILURE,
    }
}

fn q(v: &Rational) -> Value {
    Value::String(fmt_rational(v))
}

fn enclosure_doc(e: &Enclosure) -> Value {
    json!({
        "lo": q(e.lo()),
        "hi": q(e.hi()),
        "width": q(&e.width()),
        "approx": decimal_approx(&e.midpoint(), APPROX_DIGITS),
    })
}

fn root_doc(r: &RootEnclosure) -> Value {
    json!({
        "poly": r.poly().to_string(),
        "kind": r.kind(),
        "lo": q(&r.lo()),
        "hi": q(&r.hi()),
        "width": q(&r.width()),
        "exact": r.is_exact(),
        "approx": decimal_approx(&r.enclosure().midpoint(), APPROX_DIGITS),
    })
}

/// Result of one command: the document body and its exit code.
pub struct Outcome {
    pub exit_code: i32,
    pub result: Value,
}

fn ok(result: Value) -> Result<Outcome> {
    Ok(Outcome {
        exit_code: EXIT_OK,
        result,
    })
}

fn run_roots(a: &RootsArgs) -> Result<Outcome> {
    let prec = Precision::parse(&a.prec)?;
    let root = match a.poly {
        PolyKind::Psi => {
            let d = match (&a.w, a.d) {
                (_, Some(d)) => d,
                (Some(w), None) => WeightVector::parse(w)?.d(),
                (None, None) => return Err(Error::InvalidParameter("psi needs --d or --w".into())),
            };
            psi(d, &prec)?
        }
        kind => {
            let w = WeightVector::parse(
                a.w.as_deref()
                    .ok_or_else(|| Error::InvalidParameter("--w is required".into()))?,
            )?;
            if kind == PolyKind::Pw {
                isolate_root(&build_pw(&w), RootKind::UniquePositive, &prec)?
            } else {
                isolate_root(&build_pw_tilde(&w), RootKind::LargestPositive, &prec)?
            }
        }
    };
    ok(root_doc(&root))
}

fn run_eval(a: &EvalArgs) -> Result<Outcome> {
    let inst = instance(&a.w, &a.seq, a.b.as_deref())?;
    let prec = Precision::parse(&a.prec)?;
    let ev = inst.eval_series(&prec)?;
    ok(json!({
        "w": inst.w().weights(),
        "sequence": a.seq,
        "enclosure": enclosure_doc(&ev.enclosure),
        "terms_used": ev.terms,
    }))
}

fn run_hypotheses(a: &HypothesesArgs) -> Result<Outcome> {
    let inst = instance(&a.w, &a.seq, a.b.as_deref())?;
    let eta = parse_rational(&a.eta)?;
    let tau = parse_rational(&a.tau)?;
    let report = inst.check_hypotheses(&eta, &tau, a.horizon)?;
    Ok(Outcome {
        exit_code: if report.holds() { EXIT_OK } else { EXIT_FAILURE },
        result: json!({
            "holds": report.holds(),
            "violation_count": report.violations.len(),
            "report": report,
        }),
    })
}

fn growth_base(spec: &str, w: &WeightVector) -> Result<GrowthBase> {
    let bits = Precision::from_bits(64);
    match spec {
        "cw" => Ok(GrowthBase::Root(isolate_root(&build_pw(w), RootKind::UniquePositive, &bits)?)),
        "ctilde" => Ok(GrowthBase::Root(isolate_root(
            &build_pw_tilde(w),
            RootKind::LargestPositive,
            &bits,
        )?)),
        other => Ok(GrowthBase::Exact(parse_rational(other)?)),
    }
}

fn run_diagnose(a: &DiagnoseArgs) -> Result<Outcome> {
    let inst = instance(&a.w, &a.seq, a.b.as_deref())?;
    let prec = Precision::parse(&a.prec)?;
    let base = growth_base(&a.base, inst.w())?;
    let seq = Arc::new(inst.a().clone());
    let mus = MuSequence::compute(seq, base, a.horizon, &prec)?;
    let peak_set = peaks(&mus, a.horizon)?;

    let mut locals = Vec::new();
    let d = inst.d();
    let pairs: Vec<(usize, usize)> = match a.local.as_deref() {
        None => Vec::new(),
        Some("all") => (1..a.horizon)
            .flat_map(|p| (p..a.horizon).map(move |q| (p, q)))
            .filter(|&(p, q)| q + 2 >= p + d)
            .collect(),
        Some(pq) => {
            let (p, q) = pq
                .split_once(',')
                .ok_or_else(|| Error::InvalidParameter(format!("bad --local `{pq}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("bad --local `{pq}`")))
            };
            vec![(parse(p)?, parse(q)?)]
        }
    };
    let mut local_failed = false;
    for (p, q_) in pairs {
        let verdict = local_peak_check(&inst, p, q_, &mus)?;
        local_failed |= verdict == crate::diagnostics::LocalPeakVerdict::Fails;
        locals.push(json!({"P": p, "Q": q_, "verdict": verdict}));
    }

    let kind = match a.multiplier {
        MultiplierKind::Product => GapMultiplier::Product,
        MultiplierKind::Lcm => GapMultiplier::Lcm,
    };
    let mut gaps = Vec::new();
    let mut integrality_failed = false;
    for n in d..=a.horizon {
        match mahler_gap(&inst, n, kind, &prec) {
            Ok(r) => {
                integrality_failed |= !r.integrality_ok;
                gaps.push(json!({
                    "N": n,
                    "D_N_bits": r.d_n.bits(),
                    "gap": enclosure_doc(&r.gap),
                    "integrality_ok": r.integrality_ok,
                }));
            }
            Err(e @ Error::NoCertificate(_)) => {
                gaps.push(json!({"N": n, "error": {"kind": e.kind(), "message": e.to_string()}}));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Outcome {
        exit_code: if integrality_failed || local_failed {
            EXIT_FAILURE
        } else {
            EXIT_OK
        },
        result: json!({
            "w": inst.w().weights(),
            "sequence": a.seq,
            "multiplier": kind,
            "mu": mus.values().iter().map(enclosure_doc).collect::<Vec<_>>(),
            "peaks": peak_set,
            "local_peaks": locals,
            "gaps": gaps,
        }),
    })
}

fn run_construct(a: &ConstructArgs) -> Result<Outcome> {
    let w = WeightVector::parse(&a.w)?;
    let c = parse_rational(&a.c)?;
    let x = a.x.as_deref().map(parse_rational).transpose()?;
    let prec = match &a.prec {
        Some(p) => Precision::parse(p)?,
        None => Precision::default(),
    };
    let (series, cert) = construct(&w, &c, x, a.depth, &prec)?;
    if let Some(path) = &a.out {
        std::fs::write(path, cert.to_json() + "\n")?;
    }
    let last = series.ledger.last().expect("ledger is never empty");
    let width = qsub(last.upper.hi(), last.lower.lo());
    ok(json!({
        "summary": {
            "terms": series.terms.len(),
            "M": series.m,
            "first_kept": series.first_kept,
            "target": q(&series.target),
            "final_width_log2_upper": ilog2(&width) + 1,
        },
        "certificate": serde_json::to_value(&cert).expect("certificate serializes"),
    }))
}

/// Reads a bare certificate or a `construct` output document.
fn read_certificate(path: &Path) -> Result<Certificate> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path)?
    };
    if let Ok(cert) = Certificate::from_json(&text) {
        return Ok(cert);
    }
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
    match doc.pointer("/result/certificate") {
        Some(inner) => {
            serde_json::from_value(inner.clone()).map_err(|e| Error::MalformedCertificate(e.to_string()))
        }
        None => Certificate::from_json(&text),
    }
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome> {
    let results: Vec<(String, Result<Verdict>)> = std::thread::scope(|s| {
        let handles: Vec<_> = a
            .paths
            .iter()
            .map(|p| s.spawn(move || (p.display().to_string(), read_certificate(p).and_then(|c| verify_certificate(&c)))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut code = EXIT_OK;
    let mut docs = Vec::new();
    for (path, r) in results {
        let (entry, c) = match r {
            Ok(Verdict::Valid) => (json!({"path": path, "verdict": "valid"}), EXIT_OK),
            Ok(Verdict::Invalid(reason)) => (
                json!({"path": path, "verdict": "invalid", "reason": reason}),
                EXIT_FAILURE,
            ),
            Ok(Verdict::Undecided) => (json!({"path": path, "verdict": "undecided"}), EXIT_UNDECIDED),
            Err(e) => (
                json!({"path": path, "verdict": "error", "error": {"kind": e.kind(), "message": e.to_string()}}),
                exit_code(&e),
            ),
        };
        code = worst(code, c);
        docs.push(entry);
    }
    Ok(Outcome {
        exit_code: code,
        result: json!({ "certificates": docs }),
    })
}

/// Usage errors dominate, then definite failures, then undecided.
fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_USAGE => 3,
        EXIT_FAILURE => 2,
        EXIT_UNDECIDED => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// Executes one command and returns its outcome.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Roots(a) => run_roots(a),
        Command::Eval(a) => run_eval(a),
        Command::Hypotheses(a) => run_hypotheses(a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::Construct(a) => run_construct(a),
        Command::Verify(a) => run_verify(a),
    }
}

/// Renders the output document for a finished command.
pub fn emit_report(command: &str, outcome: &Result<Outcome>, format: Format) -> String {
    let doc = match outcome {
        Ok(o) => json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "status": if o.exit_code == EXIT_OK { "ok" } else { "failed" },
            "exit_code": o.exit_code,
            "result": o.result,
        }),
        Err(e) => json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "status": "error",
            "exit_code": exit_code(e),
            "error": {"kind": e.kind(), "message": e.to_string()},
        }),
    };
    match format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n",
        Format::Plain => {
            let mut out = String::new();
            plain(&doc, "", &mut out);
            out
        }
    }
}

fn plain(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                plain(inner, &p, out);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{path}: []\n"));
            }
            for (i, inner) in items.iter().enumerate() {
                plain(inner, &format!("{path}[{i}]"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path}: {s}\n")),
        other => out.push_str(&format!("{path}: {other}\n")),
    }
}

/// Parses arguments, runs the command and writes the document to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let command = match (&cli.config, cli.command) {
        (Some(path), None) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                let _ = out.write_all(emit_report("config", &Err(e.clone()), cli.format).as_bytes());
                let _ = writeln!(err, "{e}");
                return EXIT_USAGE;
            }
        },
        (None, Some(c)) => c,
        _ => {
            let _ = writeln!(err, "give exactly one of a subcommand or --config");
            return EXIT_USAGE;
        }
    };
    let outcome = execute(&command);
    let _ = out.write_all(emit_report(command.name(), &outcome, cli.format).as_bytes());
    match outcome {
        Ok(o) => o.exit_code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            exit_code(&e)
        }
    }
}
