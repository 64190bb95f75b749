use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::state::repair_shift;
use super::{covering_check, CoveringVerdict, Schedule, TailKind};
use crate::charpoly::{build_pw_tilde, certify_largest_root, WeightVector};
use crate::enclosure::{Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{parse_rational, qcmp, qsub, Rational};

pub const CERTIFICATE_VERSION: u32 = 1;

/// Largest bracket precision a verifier will recompute.
const MAX_LEDGER_BITS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnclosureDoc {
    pub lo: String,
    pub hi: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplacedDoc {
    pub index: usize,
    pub original: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairDoc {
    pub first_kept: usize,
    pub replaced: Vec<ReplacedDoc>,
    pub sum_shift: String,
    pub repaired_target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDoc {
    pub n: usize,
    pub bits: u64,
    pub lower: EnclosureDoc,
    pub upper: EnclosureDoc,
}

/// Self-contained record of a construction that a verifier can recheck
/// without trusting the constructor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub version: u32,
    pub w: Vec<u64>,
    #[serde(rename = "C")]
    pub c: String,
    pub c_tilde: EnclosureDoc,
    pub target: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub covering_horizon: usize,
    pub repair: RepairDoc,
    pub terms: Vec<String>,
    pub brackets: Vec<BracketDoc>,
    pub assumptions: Vec<String>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    /// The name of the first failed check.
    Invalid(String),
    Undecided,
}

fn num(s: &str, what: &str) -> Result<Rational> {
    parse_rational(s).map_err(|_| Error::MalformedCertificate(format!("{what}: cannot parse {s:?}")))
}

fn int(s: &str, what: &str) -> Result<BigInt> {
    s.parse()
        .map_err(|_| Error::MalformedCertificate(format!("{what}: cannot parse {s:?}")))
}

fn enc(doc: &EnclosureDoc, what: &str) -> Result<Enclosure> {
    Enclosure::new(num(&doc.lo, what)?, num(&doc.hi, what)?)
        .map_err(|_| Error::MalformedCertificate(format!("{what}: lo exceeds hi")))
}

/// Rechecks every claim in `cert` with exact arithmetic.
///
/// Checks run in a fixed order and the first failure names the verdict.
/// Budget exhaustion while computing schedule bounds gives `Undecided`.
pub fn verify_certificate(cert: &Certificate) -> Result<Verdict> {
    match verify_inner(cert) {
        Err(Error::FloorUndecidable { .. }) | Err(Error::PrecisionCapExceeded { .. }) => Ok(Verdict::Undecided),
        other => other,
    }
}

fn verify_inner(cert: &Certificate) -> Result<Verdict> {
    let invalid = |s: &str| Ok(Verdict::Invalid(s.to_string()));
    if cert.version != CERTIFICATE_VERSION {
        return Err(Error::MalformedCertificate(format!("unsupported version {}", cert.version)));
    }
    let w = WeightVector::new(cert.w.clone()).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
    let d = w.d();
    let c = num(&cert.c, "C")?;
    let x = num(&cert.target, "target")?;
    let terms: Vec<BigInt> = cert
        .terms
        .iter()
        .map(|t| int(t, "terms"))
        .collect::<Result<_>>()?;
    let shift = num(&cert.repair.sum_shift, "sum_shift")?;
    let repaired = num(&cert.repair.repaired_target, "repaired_target")?;
    let n0 = cert.repair.first_kept;
    if n0 == 0 || n0 > terms.len() || cert.m < d || cert.brackets.is_empty() {
        return Err(Error::MalformedCertificate("inconsistent indices".into()));
    }

    let lo = num(&cert.c_tilde.lo, "c_tilde")?;
    let hi = num(&cert.c_tilde.hi, "c_tilde")?;
    let root = match certify_largest_root(&build_pw_tilde(&w), &lo, &hi) {
        Ok(r) => r,
        Err(_) => return invalid("c-tilde"),
    };
    let s = match Schedule::with_root(w.clone(), c, root, &Precision::default()) {
        Ok(s) => s,
        Err(e) => return Err(Error::MalformedCertificate(e.to_string())),
    };

    if terms.windows(2).any(|p| p[0] >= p[1]) || terms.first().is_some_and(|t| t < &BigInt::from(1)) {
        return invalid("monotonicity");
    }

    // Replaced prefix: a_n = n, and each recorded original sits in its window.
    if cert.repair.replaced.len() != n0 - 1 {
        return invalid("repair-block");
    }
    let mut original = terms.clone();
    for (i, r) in cert.repair.replaced.iter().enumerate() {
        if r.index != i + 1 || terms[i] != BigInt::from(i + 1) {
            return invalid("repair-block");
        }
        original[i] = int(&r.original, "original")?;
    }
    for (i, a) in original.iter().enumerate() {
        let (b, g) = s.bounds(i + 1)?;
        if a < &b || a > &g {
            return invalid("schedule-membership");
        }
    }

    if cert.covering_horizon < terms.len() + d {
        return invalid("covering");
    }
    for n in cert.m..=cert.covering_horizon {
        if covering_check(&s, n)? != CoveringVerdict::Pass {
            return invalid("covering");
        }
    }

    if repair_shift(&w, &original, &terms, n0) != shift {
        return invalid("repair-block");
    }
    let x_rep = &x + &shift;

    let mut records = Vec::with_capacity(cert.brackets.len());
    for b in &cert.brackets {
        if b.n < d || b.n > terms.len() || b.bits == 0 || b.bits > MAX_LEDGER_BITS {
            return invalid("ledger-mismatch");
        }
        let lower = enc(&b.lower, "bracket")?;
        let upper = enc(&b.upper, "bracket")?;
        let prefix = &terms[..b.n];
        let got_lower = s.bracket_at(prefix, TailKind::Gamma, b.bits)?;
        let got_upper = s.bracket_at(prefix, TailKind::Beta, b.bits)?;
        if !lower.contains_enclosure(&got_lower) || !upper.contains_enclosure(&got_upper) {
            return invalid("ledger-mismatch");
        }
        records.push((b.n, lower, upper));
    }
    let start = cert.m.max(n0 + d - 1).max(d);
    if records.first().map(|r| r.0) != Some(start) || records.last().map(|r| r.0) != Some(terms.len()) {
        return invalid("ledger-mismatch");
    }

    for (_, lower, upper) in &records {
        if !(qcmp(lower.hi(), &x_rep).is_le() && qcmp(&x_rep, upper.lo()).is_le()) {
            return invalid("bracket-containment");
        }
    }

    for pair in records.windows(2) {
        let (n_a, lo_a, up_a) = &pair[0];
        let (n_b, lo_b, up_b) = &pair[1];
        let wide_a = qsub(up_a.hi(), lo_a.lo());
        let wide_b = qsub(up_b.hi(), lo_b.lo());
        if n_b <= n_a || qcmp(&wide_b, &wide_a).is_gt() {
            return invalid("bracket-nesting");
        }
    }

    if repaired != x_rep {
        return invalid("repair-block");
    }
    Ok(Verdict::Valid)
}
