//! Integer sequences, the weighted reciprocal series built from them, and
//! exact checks of the polynomial-growth hypotheses.
//!
//! Indices are 1-based. A [`WeightedSeriesInstance`] uses shifted indexing:
//! the n-th term (for `n >= d`) is `y_n / x_n` with
//! `x_n = a_{n-d+1}^{w_0} ... a_n^{w_{d-1}}` and `y_n = b_{n-d+1}`.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::charpoly::WeightVector;
use crate::construct::Schedule;
use crate::enclosure::{Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{floor_int, pow_int, pow_rat, qadd, qcmp, qmul, qnew, qsub, rat, rat_int, Rational};

/// Effectively unbounded horizon for generated sequences.
pub const UNBOUNDED: usize = usize::MAX / 4;

#[derive(Clone, Debug)]
pub enum SequenceKind {
    /// Finite list of terms `a_1, a_2, ...`.
    Explicit(Vec<BigInt>),
    /// `a_n = n`.
    Identity,
    /// `a_n = base^n`.
    Geometric { base: BigInt },
    /// `s_1 = 2`, `s_{k+1} = s_k^2 - s_k + 1`.
    Sylvester,
    /// `a_n = base^floor(k^n)`.
    PowerTower { base: BigInt, k: Rational },
    ScheduleBeta(Arc<Schedule>),
    ScheduleGamma(Arc<Schedule>),
    /// Output of the nested-interval constructor; terms from `first_kept`
    /// onward lie in their schedule windows.
    Constructed {
        terms: Vec<BigInt>,
        schedule: Arc<Schedule>,
        first_kept: usize,
    },
}

/// A lazily materialized, memoized integer sequence.
#[derive(Debug)]
pub struct Sequence {
    kind: SequenceKind,
    horizon: usize,
    memo: Mutex<Vec<BigInt>>,
}

impl Clone for Sequence {
    fn clone(&self) -> Self {
        let memo = self.memo.lock().map(|m| m.clone()).unwrap_or_default();
        Sequence {
            kind: self.kind.clone(),
            horizon: self.horizon,
            memo: Mutex::new(memo),
        }
    }
}

impl Sequence {
    pub fn new(kind: SequenceKind) -> Result<Self> {
        let horizon = match &kind {
            SequenceKind::Explicit(v) => {
                if v.iter().any(|t| !t.is_positive()) {
                    return Err(Error::InvalidParameter("sequence terms must be positive".into()));
                }
                v.len()
            }
            SequenceKind::Constructed { terms, .. } => terms.len(),
            SequenceKind::Geometric { base } if base < &BigInt::from(2) => {
                return Err(Error::InvalidParameter("geometric base must be at least 2".into()))
            }
            SequenceKind::PowerTower { base, k } => {
                if base < &BigInt::from(2) || k <= &Rational::one() {
                    return Err(Error::InvalidParameter(
                        "power tower needs base >= 2 and k > 1".into(),
                    ));
                }
                UNBOUNDED
            }
            _ => UNBOUNDED,
        };
        Ok(Sequence {
            kind,
            horizon,
            memo: Mutex::new(Vec::new()),
        })
    }

    pub fn explicit(terms: Vec<BigInt>) -> Result<Self> {
        Self::new(SequenceKind::Explicit(terms))
    }

    pub fn identity() -> Self {
        Self::new(SequenceKind::Identity).expect("identity is valid")
    }

    pub fn geometric(base: u64) -> Result<Self> {
        Self::new(SequenceKind::Geometric { base: base.into() })
    }

    pub fn sylvester() -> Self {
        Self::new(SequenceKind::Sylvester).expect("sylvester is valid")
    }

    pub fn power_tower(base: u64, k: Rational) -> Result<Self> {
        Self::new(SequenceKind::PowerTower { base: base.into(), k })
    }

    /// Reads newline-delimited decimal integers; blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: BigInt = t.parse().map_err(|_| {
                Error::InvalidParameter(format!("line {}: not an integer: `{t}`", i + 1))
            })?;
            terms.push(v);
        }
        Self::explicit(terms)
    }

    /// Caps the materialization horizon.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = self.horizon.min(horizon);
        self
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `true` when the kind guarantees strict increase.
    pub fn strictly_increasing(&self) -> bool {
        !matches!(self.kind, SequenceKind::Explicit(_))
    }

    /// The term `a_n`, `n >= 1`.
    pub fn term(&self, n: usize) -> Result<BigInt> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequence indices start at 1".into()));
        }
        if n > self.horizon {
            return Err(Error::IndexBeyondHorizon {
                index: n,
                horizon: self.horizon,
            });
        }
        match &self.kind {
            SequenceKind::Explicit(v) => return Ok(v[n - 1].clone()),
            SequenceKind::Constructed { terms, .. } => return Ok(terms[n - 1].clone()),
            SequenceKind::Identity => return Ok(BigInt::from(n)),
            SequenceKind::ScheduleBeta(s) => return s.beta(n),
            SequenceKind::ScheduleGamma(s) => return s.gamma(n),
            _ => {}
        }
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        while memo.len() < n {
            let i = memo.len() + 1;
            let next = match &self.kind {
                SequenceKind::Geometric { base } => match memo.last() {
                    Some(prev) => prev * base,
                    None => base.clone(),
                },
                SequenceKind::Sylvester => match memo.last() {
                    Some(s) => s * s - s + 1,
                    None => BigInt::from(2),
                },
                SequenceKind::PowerTower { base, k } => {
                    let e = floor_int(&pow_rat(k, i as u64));
                    pow_int(base, e.to_u64().ok_or_else(|| {
                        Error::InvalidParameter("power tower exponent too large".into())
                    })?)
                }
                _ => unreachable!(),
            };
            memo.push(next);
        }
        Ok(memo[n - 1].clone())
    }

    /// A bound `rho < 1` with `a_k / a_{k+1} <= rho` for every `k >= from`,
    /// or `None` when the kind cannot certify one.
    pub fn ratio_bound(&self, from: usize) -> Option<Rational> {
        let from = from.max(1);
        match &self.kind {
            SequenceKind::Explicit(_) | SequenceKind::Identity => None,
            SequenceKind::Geometric { base } => Some(Rational::new(BigInt::one(), base.clone())),
            // s_{k+1}/s_k = s_k - 1 + 1/s_k grows with k.
            SequenceKind::Sylvester => {
                let s = self.term(from).ok()?;
                let t = self.term(from + 1).ok()?;
                // gcd(s, s^2 - s + 1) = 1, so the pair is already reduced.
                Some(Rational::new_raw(s, t))
            }
            // floor(k^{n+1}) - floor(k^n) >= floor(k^n (k - 1)), increasing in n.
            SequenceKind::PowerTower { base, k } => {
                let gap = floor_int(&(pow_rat(k, from as u64) * (k - Rational::one())));
                if gap.is_positive() {
                    let g = gap.to_u64()?;
                    Some(Rational::new(BigInt::one(), pow_int(base, g)))
                } else {
                    None
                }
            }
            SequenceKind::ScheduleBeta(s) | SequenceKind::ScheduleGamma(s) => {
                (from >= s.ratio_start()).then(|| rat(1, 2))
            }
            SequenceKind::Constructed {
                schedule,
                first_kept,
                ..
            } => (from >= *first_kept && from >= schedule.window_ratio_start()).then(|| rat(1, 2)),
        }
    }

    /// `true` when `a_k / a_{k+1}` equals [`Self::ratio_bound`] exactly for every `k`.
    fn ratio_is_exact(&self) -> bool {
        matches!(self.kind, SequenceKind::Geometric { .. })
    }

    /// A bound `sigma` with `a_{k+1} / a_k <= sigma` for every `k >= from`.
    pub fn growth_upper(&self, from: usize) -> Option<Rational> {
        let from = from.max(1);
        match &self.kind {
            SequenceKind::Identity => Some(rat(from as i64 + 1, from as i64)),
            SequenceKind::Geometric { base } => Some(rat_int(base.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SequenceKind::Explicit(v) => write!(f, "list[{}]", v.len()),
            SequenceKind::Identity => write!(f, "identity"),
            SequenceKind::Geometric { base } => write!(f, "geometric:{base}"),
            SequenceKind::Sylvester => write!(f, "sylvester"),
            SequenceKind::PowerTower { base, k } => write!(f, "tower:{base},{k}"),
            SequenceKind::ScheduleBeta(_) => write!(f, "schedule-beta"),
            SequenceKind::ScheduleGamma(_) => write!(f, "schedule-gamma"),
            SequenceKind::Constructed { terms, .. } => write!(f, "constructed[{}]", terms.len()),
        }
    }
}

/// The numerators `b_n` of the series.
#[derive(Clone, Debug)]
pub enum Numerators {
    One,
    Sequence(Arc<Sequence>),
}

impl Numerators {
    pub fn term(&self, n: usize) -> Result<BigInt> {
        match self {
            Numerators::One => Ok(BigInt::one()),
            Numerators::Sequence(s) => s.term(n),
        }
    }
}

/// `S = sum_{n >= d} y_n / x_n`.
#[derive(Clone, Debug)]
pub struct WeightedSeriesInstance {
    a: Arc<Sequence>,
    b: Numerators,
    w: WeightVector,
}

/// An enclosure of the full series and the index where summation stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesEvaluation {
    pub enclosure: Enclosure,
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub eta: Rational,
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub tau: Rational,
    pub horizon: usize,
    /// Every index failing either inequality, sorted.
    pub violations: Vec<usize>,
    pub b_violations: Vec<usize>,
    pub growth_violations: Vec<usize>,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl WeightedSeriesInstance {
    pub fn new(a: Arc<Sequence>, b: Numerators, w: WeightVector) -> Self {
        WeightedSeriesInstance { a, b, w }
    }

    pub fn unit(a: Sequence, w: WeightVector) -> Self {
        Self::new(Arc::new(a), Numerators::One, w)
    }

    pub fn a(&self) -> &Sequence {
        &self.a
    }

    pub fn b(&self) -> &Numerators {
        &self.b
    }

    pub fn w(&self) -> &WeightVector {
        &self.w
    }

    pub fn d(&self) -> usize {
        self.w.d()
    }

    fn require_shifted(&self, n: usize) -> Result<()> {
        if n < self.d() {
            return Err(Error::PreconditionViolated(format!(
                "shifted index {n} is below d = {}",
                self.d()
            )));
        }
        Ok(())
    }

    /// `x_n = a_{n-d+1}^{w_0} ... a_n^{w_{d-1}}`.
    pub fn term_xn(&self, n: usize) -> Result<BigInt> {
        self.require_shifted(n)?;
        let d = self.d();
        let mut x = BigInt::one();
        for (j, &wj) in self.w.weights().iter().enumerate() {
            if wj > 0 {
                x *= pow_int(&self.a.term(n + 1 + j - d)?, wj);
            }
        }
        Ok(x)
    }

    /// `y_n = b_{n-d+1}`.
    pub fn term_yn(&self, n: usize) -> Result<BigInt> {
        self.require_shifted(n)?;
        self.b.term(n + 1 - self.d())
    }

    pub fn term(&self, n: usize) -> Result<Rational> {
        Ok(qnew(self.term_yn(n)?, self.term_xn(n)?))
    }

    /// `sum_{n=d}^{N} y_n / x_n`, exactly.
    pub fn partial_sum(&self, n_max: usize) -> Result<Rational> {
        self.require_shifted(n_max)?;
        let mut s = Rational::zero();
        for n in self.d()..=n_max {
            s = qadd(&s, &self.term(n)?);
        }
        Ok(s)
    }

    /// Combined ratio bound for consecutive series terms past `n_max`.
    fn term_ratio(&self, n_max: usize) -> Result<(Rational, bool)> {
        let from = (n_max + 2).saturating_sub(self.d()).max(1);
        let rho = self.a.ratio_bound(from).ok_or_else(|| {
            Error::NoCertificate(format!("sequence {} has no ratio certificate", self.a))
        })?;
        let (sigma, exact_b) = match &self.b {
            Numerators::One => (Rational::one(), true),
            Numerators::Sequence(s) => (
                s.growth_upper(from).ok_or_else(|| {
                    Error::NoCertificate(format!("numerators {s} have no growth certificate"))
                })?,
                false,
            ),
        };
        let q = qmul(&pow_rat(&rho, self.w.sum()), &sigma);
        if qcmp(&q, &Rational::one()).is_ge() {
            return Err(Error::NoCertificate(
                "certified term ratio is not below 1".into(),
            ));
        }
        Ok((q, exact_b && self.a.ratio_is_exact()))
    }

    /// A rational `B >= r_N = sum_{n > N} y_n / x_n`.
    pub fn tail_bound(&self, n_max: usize) -> Result<Rational> {
        Ok(self.tail_enclosure(n_max)?.hi().clone())
    }

    /// Encloses `r_N`: the first tail term below, the geometric majorant above.
    pub fn tail_enclosure(&self, n_max: usize) -> Result<Enclosure> {
        self.require_shifted(n_max)?;
        let (q, exact) = self.term_ratio(n_max)?;
        let first = self.term(n_max + 1)?;
        let upper = qmul(&first, &qsub(&Rational::one(), &q).recip());
        if exact {
            return Ok(Enclosure::point(upper));
        }
        Enclosure::new(first, upper)
    }

    /// Encloses the whole series to width `<= prec.target_width`.
    pub fn eval_series(&self, prec: &Precision) -> Result<SeriesEvaluation> {
        let cap = self.d() + 64 * prec.max_refinements() as usize;
        let half = prec.target_width() / rat(2, 1);
        let mut partial = Rational::zero();
        let mut n = self.d();
        loop {
            partial = qadd(&partial, &self.term(n)?);
            let tail = self.tail_enclosure(n)?;
            if qcmp(&tail.width(), &half).is_le() {
                let exact = Enclosure::new(qadd(&partial, tail.lo()), qadd(&partial, tail.hi()))?;
                let enclosure = if exact.is_point() {
                    exact
                } else {
                    exact.round_outward(prec.bits() + 2)
                };
                return Ok(SeriesEvaluation {
                    enclosure,
                    terms: n,
                });
            }
            n += 1;
            if n > cap {
                return Err(Error::PrecisionCapExceeded {
                    budget: prec.max_refinements(),
                });
            }
        }
    }

    /// Checks `b_n <= n^eta` and `a_n^{w_0} ... a_{n+d-1}^{w_{d-1}} >= n^{1+tau}`
    /// exactly for `1 <= n <= horizon`.
    pub fn check_hypotheses(&self, eta: &Rational, tau: &Rational, horizon: usize) -> Result<HypothesisReport> {
        if !eta.is_positive() || eta >= tau {
            return Err(Error::PreconditionViolated("need 0 < eta < tau".into()));
        }
        let (ep, eq) = exponent_parts(eta)?;
        let growth = tau + Rational::one();
        let (gp, gq) = exponent_parts(&growth)?;
        let mut b_violations = Vec::new();
        let mut growth_violations = Vec::new();
        for n in 1..=horizon {
            let nb = BigInt::from(n);
            if let Numerators::Sequence(b) = &self.b {
                // b^q <= n^p
                if pow_int(&b.term(n)?, eq) > pow_int(&nb, ep) {
                    b_violations.push(n);
                }
            }
            // x_{n+d-1}^q >= n^p
            let x = self.term_xn(n + self.d() - 1)?;
            if pow_int(&x, gq) < pow_int(&nb, gp) {
                growth_violations.push(n);
            }
        }
        let mut violations: Vec<usize> = b_violations.iter().chain(&growth_violations).copied().collect();
        violations.sort_unstable();
        violations.dedup();
        Ok(HypothesisReport {
            eta: eta.clone(),
            tau: tau.clone(),
            horizon,
            violations,
            b_violations,
            growth_violations,
        })
    }
}

fn exponent_parts(q: &Rational) -> Result<(u64, u64)> {
    match (q.numer().to_u64(), q.denom().to_u64()) {
        (Some(p), Some(d)) => Ok((p, d)),
        _ => Err(Error::InvalidParameter(format!("exponent {q} out of range"))),
    }
}

/// The Sylvester number `s_n`.
pub fn sylvester(n: usize) -> Result<BigInt> {
    Sequence::sylvester().term(n)
}
