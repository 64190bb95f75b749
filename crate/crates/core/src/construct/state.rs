use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::certificate::{BracketDoc, Certificate, EnclosureDoc, RepairDoc, ReplacedDoc, CERTIFICATE_VERSION};
use super::{covering_check, Assignment, CoveringVerdict, Schedule, TailKind};
use crate::charpoly::WeightVector;
use crate::enclosure::{Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{ceil_root, dyadic, fmt_rational, pow_int, qcmp, qsub, rat, Rational};
use crate::series::{Sequence, SequenceKind};

/// One ledger entry: enclosures of both bracket endpoints after `n` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketRecord {
    pub n: usize,
    pub bits: u64,
    pub lower: Enclosure,
    pub upper: Enclosure,
}

/// Outcome of comparing a target with a bracket at one precision.
#[allow(clippy::large_enum_variant)]
enum Placement {
    Inside(BracketRecord),
    Outside,
    Straddles,
}

fn place(s: &Schedule, prefix: &[BigInt], x: &Rational, bits: u64) -> Result<Placement> {
    let lower = s.bracket_at(prefix, TailKind::Gamma, bits)?;
    let upper = s.bracket_at(prefix, TailKind::Beta, bits)?;
    if qcmp(lower.hi(), x).is_le() && qcmp(x, upper.lo()).is_le() {
        return Ok(Placement::Inside(BracketRecord {
            n: prefix.len(),
            bits,
            lower,
            upper,
        }));
    }
    if qcmp(x, lower.lo()).is_lt() || qcmp(x, upper.hi()).is_gt() {
        return Ok(Placement::Outside);
    }
    Ok(Placement::Straddles)
}

/// Certifies `x` inside the bracket of `prefix`, doubling precision as needed.
/// `Ok(None)` means `x` is certainly outside.
fn certify(s: &Schedule, prefix: &[BigInt], x: &Rational, prec: &Precision) -> Result<Option<BracketRecord>> {
    let mut bits = s.base_bits(prefix)?;
    for _ in 0..prec.max_refinements() {
        match place(s, prefix, x, bits)? {
            Placement::Inside(r) => return Ok(Some(r)),
            Placement::Outside => return Ok(None),
            Placement::Straddles => bits *= 2,
        }
    }
    Err(Error::SelectionUndecidable { index: prefix.len() })
}

/// Sequential nested-interval selection of terms hitting a target sum.
#[derive(Clone, Debug)]
pub struct ConstructionState {
    schedule: Arc<Schedule>,
    x: Rational,
    prefix: Vec<BigInt>,
    m: usize,
    ledger: Vec<BracketRecord>,
    prec: Precision,
}

impl ConstructionState {
    /// Starts from the all-beta prefix of length `m`; `x` must lie in its bracket.
    pub fn new(schedule: Arc<Schedule>, x: Rational, m: usize, prec: &Precision) -> Result<Self> {
        if m < schedule.d() {
            return Err(Error::PreconditionViolated(format!(
                "initial prefix length {m} is below d = {}",
                schedule.d()
            )));
        }
        let prefix = (1..=m).map(|n| schedule.beta(n)).collect::<Result<Vec<_>>>()?;
        let record = certify(&schedule, &prefix, &x, prec)?.ok_or(Error::TargetOutsideRange)?;
        Ok(ConstructionState {
            schedule,
            x,
            prefix,
            m,
            ledger: vec![record],
            prec: prec.clone(),
        })
    }

    pub fn schedule(&self) -> &Arc<Schedule> {
        &self.schedule
    }

    pub fn target(&self) -> &Rational {
        &self.x
    }

    pub fn prefix(&self) -> &[BigInt] {
        &self.prefix
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ledger(&self) -> &[BracketRecord] {
        &self.ledger
    }

    /// Enclosure of one bracket endpoint for the current prefix.
    pub fn bracket(&self, tail: TailKind) -> Result<Enclosure> {
        self.schedule.bracket(&self.prefix, tail)
    }

    /// Appends the smallest admissible `a_{N+1}` and records the new bracket.
    pub fn construct_next(&mut self) -> Result<BigInt> {
        let s = Arc::clone(&self.schedule);
        let n = self.prefix.len();
        if covering_check(&s, n)? != CoveringVerdict::Pass {
            return Err(Error::CoverageViolated(format!("covering inequality fails at N = {n}")));
        }
        let (beta, gamma) = s.bounds(n + 1)?;
        let d = s.d();
        let w = s.w().clone();

        // Terms containing a_{N+1} with a positive exponent, as (constant, exponent).
        let first = (n + 2).saturating_sub(d).max(1);
        let gamma_tail = Assignment {
            prefix: &self.prefix,
            mid: None,
            tail: TailKind::Gamma,
        };
        let mut varying: Vec<(BigInt, u64)> = Vec::new();
        for t in first..=n + 1 {
            let e = w.get(n + 1 - t);
            if e == 0 {
                continue;
            }
            let mut c = BigInt::one();
            for (j, &wj) in w.weights().iter().enumerate() {
                if wj > 0 && t + j != n + 1 {
                    c *= pow_int(&s.value(&gamma_tail, t + j)?, wj);
                }
            }
            varying.push((c, e));
        }
        let is_varying = |t: usize| t >= first && t <= n + 1 && w.get(n + 1 - t) > 0;

        let mut bits = s.base_bits(&self.prefix)?;
        let mut chosen = None;
        for _ in 0..self.prec.max_refinements() {
            let (k_lo, k_hi) = s.fixed_sum(&gamma_tail, &is_varying, n + 2, bits)?;
            let strict = smallest_below(&varying, &qsub(&self.x, &dyadic(k_hi, bits)), &beta, &gamma);
            let loose = smallest_below(&varying, &qsub(&self.x, &dyadic(k_lo, bits)), &beta, &gamma);
            match (strict, loose) {
                (_, None) => {
                    return Err(Error::CoverageViolated(format!(
                        "target lies below every candidate bracket at index {}",
                        n + 1
                    )))
                }
                (Some(a), Some(b)) if a == b => {
                    chosen = Some(a);
                    break;
                }
                _ => bits *= 2,
            }
        }
        let a = chosen.ok_or(Error::SelectionUndecidable { index: n + 1 })?;
        self.prefix.push(a.clone());
        match certify(&s, &self.prefix, &self.x, &self.prec) {
            Ok(Some(record)) => {
                self.ledger.push(record);
                Ok(a)
            }
            Ok(None) => {
                self.prefix.pop();
                Err(Error::CoverageViolated(format!(
                    "selected a_{} = {a} does not bracket the target",
                    n + 1
                )))
            }
            Err(e) => {
                self.prefix.pop();
                Err(e)
            }
        }
    }
}

/// `sum_i 1 / (c_i a^{e_i}) <= t`, exactly.
fn sum_at_most(varying: &[(BigInt, u64)], a: &BigInt, t: &Rational) -> bool {
    let dens: Vec<BigInt> = varying.iter().map(|(c, e)| c * pow_int(a, *e)).collect();
    let total: BigInt = dens.iter().product();
    let mut num = BigInt::zero();
    for i in 0..dens.len() {
        let mut p = BigInt::one();
        for (j, dj) in dens.iter().enumerate() {
            if i != j {
                p *= dj;
            }
        }
        num += p;
    }
    // num / total <= t.numer / t.denom
    num * t.denom() <= t.numer() * total
}

/// Smallest `a` in `[lo, hi]` with `g(a) <= t`, where `g` is decreasing.
fn smallest_below(varying: &[(BigInt, u64)], t: &Rational, lo: &BigInt, hi: &BigInt) -> Option<BigInt> {
    if varying.is_empty() {
        return (!t.is_negative()).then(|| lo.clone());
    }
    if !t.is_positive() || !sum_at_most(varying, hi, t) {
        return None;
    }
    if sum_at_most(varying, lo, t) {
        return Some(lo.clone());
    }
    if let [(c, e)] = varying {
        // a^e >= 1 / (c t)
        let need = Integer::div_ceil(t.denom(), &(c * t.numer()));
        let a = ceil_root(&need, *e as u32).max(lo.clone());
        return Some(a);
    }
    let (mut bad, mut good) = (lo.clone(), hi.clone());
    while &good - &bad > BigInt::one() {
        let mid: BigInt = (&bad + &good) >> 1;
        if sum_at_most(varying, &mid, t) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// Smallest `M >= d` such that covering passes for every `N` in `[M, horizon]`.
pub fn find_m(s: &Schedule, horizon: usize) -> Result<Option<usize>> {
    let d = s.d();
    if horizon < d {
        return Ok(None);
    }
    let mut m = None;
    for n in (d..=horizon).rev() {
        if covering_check(s, n)? == CoveringVerdict::Pass {
            m = Some(n);
        } else {
            break;
        }
    }
    Ok(m)
}

/// Enclosures of the two endpoints of the bracket for the all-beta prefix of length `m`.
pub fn attainable_interval(s: &Schedule, m: usize, _prec: &Precision) -> Result<(Enclosure, Enclosure)> {
    let prefix = (1..=m).map(|n| s.beta(n)).collect::<Result<Vec<_>>>()?;
    Ok((s.bracket(&prefix, TailKind::Gamma)?, s.bracket(&prefix, TailKind::Beta)?))
}

/// A finished construction, after the initial-block repair.
#[derive(Clone, Debug)]
pub struct ConstructedSeries {
    pub terms: Vec<BigInt>,
    /// First index not replaced by `a_n = n`.
    pub first_kept: usize,
    pub target: Rational,
    pub repaired_target: Rational,
    pub m: usize,
    pub ledger: Vec<BracketRecord>,
    pub schedule: Arc<Schedule>,
}

impl ConstructedSeries {
    pub fn sequence(&self) -> Sequence {
        Sequence::new(SequenceKind::Constructed {
            terms: self.terms.clone(),
            schedule: Arc::clone(&self.schedule),
            first_kept: self.first_kept,
        })
        .expect("constructed terms are positive")
    }
}

/// Smallest `n0` such that `gamma_n < beta_{n+1}` for all `n0 <= n < horizon`
/// and `beta_{n0} > n0 - 1`.
pub(crate) fn repair_index(s: &Schedule, horizon: usize) -> Result<usize> {
    let mut n0 = horizon;
    for n in (1..horizon).rev() {
        if s.gamma(n)? < s.beta(n + 1)? {
            n0 = n;
        } else {
            break;
        }
    }
    while n0 < horizon && s.beta(n0)? <= BigInt::from(n0 - 1) {
        n0 += 1;
    }
    Ok(n0)
}

/// Exact change of the series sum when `a_n` is replaced by `n` for `n < n0`.
pub(crate) fn repair_shift(w: &WeightVector, original: &[BigInt], repaired: &[BigInt], n0: usize) -> Rational {
    let term = |a: &[BigInt], t: usize| {
        let mut x = BigInt::one();
        for (j, &wj) in w.weights().iter().enumerate() {
            x *= pow_int(&a[t + j - 1], wj);
        }
        Rational::new(BigInt::one(), x)
    };
    let mut delta = Rational::zero();
    for t in 1..n0 {
        delta += term(repaired, t) - term(original, t);
    }
    delta
}

/// Builds `a_1..a_depth` whose bracket chain contains `x` (or the attainable
/// midpoint when `x` is `None`), and a certificate for it.
pub fn construct(
    w: &WeightVector,
    c: &Rational,
    x: Option<Rational>,
    depth: usize,
    prec: &Precision,
) -> Result<(ConstructedSeries, Certificate)> {
    let schedule = Arc::new(Schedule::new(w.clone(), c.clone(), prec)?);
    let d = w.d();
    let horizon = depth + d;
    let m = find_m(&schedule, horizon)?
        .ok_or_else(|| Error::CoverageViolated(format!("covering fails at N = {horizon}")))?;
    if m >= depth {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} must exceed the covering start M = {m}"
        )));
    }
    let x = match x {
        Some(x) => x,
        None => {
            let (lower, upper) = attainable_interval(&schedule, m, prec)?;
            (lower.lo() + upper.hi()) / rat(2, 1)
        }
    };
    let mut state = ConstructionState::new(Arc::clone(&schedule), x.clone(), m, prec)?;
    while state.prefix().len() < depth {
        state.construct_next()?;
    }

    let n0 = repair_index(&schedule, horizon)?;
    if n0 + d > depth + 1 {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} is too short for the repair block ending at {n0}"
        )));
    }
    let original = state.prefix().to_vec();
    let mut terms = original.clone();
    for (i, t) in terms.iter_mut().enumerate().take(n0 - 1) {
        *t = BigInt::from(i + 1);
    }
    let shift = repair_shift(w, &original, &terms, n0);
    let repaired_target = &x + &shift;
    let start = m.max(n0 + d - 1).max(d);
    let ledger: Vec<BracketRecord> = if n0 == 1 {
        state.ledger().iter().filter(|r| r.n >= start).cloned().collect()
    } else {
        (start..=depth)
            .map(|n| {
                certify(&schedule, &terms[..n], &repaired_target, prec)?
                    .ok_or_else(|| Error::CoverageViolated(format!("repaired bracket at N = {n} misses the target")))
            })
            .collect::<Result<_>>()?
    };

    let root = schedule.c_tilde().expect("power schedule");
    let doc = |e: &Enclosure| EnclosureDoc {
        lo: fmt_rational(e.lo()),
        hi: fmt_rational(e.hi()),
    };
    let cert = Certificate {
        version: CERTIFICATE_VERSION,
        w: w.weights().to_vec(),
        c: fmt_rational(c),
        c_tilde: doc(&root.enclosure()),
        target: fmt_rational(&x),
        m,
        covering_horizon: horizon,
        repair: RepairDoc {
            first_kept: n0,
            replaced: (1..n0)
                .map(|i| ReplacedDoc {
                    index: i,
                    original: original[i - 1].to_string(),
                })
                .collect(),
            sum_shift: fmt_rational(&shift),
            repaired_target: fmt_rational(&repaired_target),
        },
        terms: terms.iter().map(|t| t.to_string()).collect(),
        brackets: ledger
            .iter()
            .map(|r| BracketDoc {
                n: r.n,
                bits: r.bits,
                lower: doc(&r.lower),
                upper: doc(&r.upper),
            })
            .collect(),
        assumptions: vec![
            format!(
                "the covering inequality was verified exactly for {m} <= N <= {horizon}; for larger N it is taken from the asymptotic argument"
            ),
            format!(
                "terms after index {depth} are any continuation of the nested-interval selection within their schedule windows"
            ),
            "the infinite sum equals repaired_target only in the limit of that continuation; the ledger certifies finite-depth brackets".to_string(),
        ],
    };
    let series = ConstructedSeries {
        terms,
        first_kept: n0,
        target: x,
        repaired_target,
        m,
        ledger,
        schedule,
    };
    Ok((series, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::verify_certificate;
    use crate::construct::Verdict;

    fn wv(w: &[u64]) -> WeightVector {
        WeightVector::new(w.to_vec()).unwrap()
    }

    fn state_for(w: &[u64], c: Rational) -> ConstructionState {
        let prec = Precision::from_bits(64);
        let s = Arc::new(Schedule::new(wv(w), c, &prec).unwrap());
        let m = find_m(&s, 12).unwrap().unwrap();
        let (lower, upper) = attainable_interval(&s, m, &prec).unwrap();
        let x = (lower.lo() + upper.hi()) / rat(2, 1);
        ConstructionState::new(s, x, m, &prec).unwrap()
    }

    #[test]
    fn attainable_interval_is_proper() {
        let prec = Precision::from_bits(64);
        let s = Schedule::new(wv(&[1]), rat(2, 1), &prec).unwrap();
        let (lower, upper) = attainable_interval(&s, 2, &prec).unwrap();
        assert!(upper.lo() > lower.hi());
        let all_beta = rat(1, 16) + rat(1, 512);
        assert!(upper.lo() > &all_beta);
        let mid = (lower.lo() + upper.hi()) / rat(2, 1);
        assert!(lower.hi() < &mid && &mid < upper.lo());
    }

    #[test]
    fn endpoint_targets_pick_window_ends() {
        let mut st = state_for(&[1], rat(2, 1));
        let s = Arc::clone(st.schedule());
        let n = st.prefix().len();
        let upper = st.bracket(TailKind::Beta).unwrap();
        let x = upper.lo().clone();
        st.x = x;
        assert_eq!(st.construct_next().unwrap(), s.beta(n + 1).unwrap());

        let mut st = state_for(&[1, 1], rat(2, 1));
        let s = Arc::clone(st.schedule());
        let n = st.prefix().len();
        let lower = st.bracket(TailKind::Gamma).unwrap();
        st.x = lower.hi().clone();
        assert_eq!(st.construct_next().unwrap(), s.gamma(n + 1).unwrap());
    }

    #[test]
    fn brackets_nest_and_contain_target() {
        let mut st = state_for(&[1, 1], rat(3, 2));
        for _ in 0..5 {
            st.construct_next().unwrap();
        }
        let x = st.target().clone();
        for pair in st.ledger().windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(a.lower.lo() <= b.lower.hi() && b.upper.lo() <= a.upper.hi());
            assert!(b.upper.hi() - b.lower.lo() <= a.upper.hi() - a.lower.lo());
        }
        for r in st.ledger() {
            assert!(r.lower.hi() <= &x && &x <= r.upper.lo());
        }
    }

    #[test]
    fn outside_target_is_rejected() {
        let prec = Precision::from_bits(64);
        let r = construct(&wv(&[1, 1]), &rat(2, 1), Some(rat(1, 2)), 8, &prec);
        assert!(matches!(r, Err(Error::TargetOutsideRange)));
    }

    #[test]
    fn small_construction_round_trip() {
        let prec = Precision::from_bits(64);
        let (series, cert) = construct(&wv(&[1]), &rat(2, 1), None, 8, &prec).unwrap();
        assert_eq!(series.terms.len(), 8);
        assert!(series.terms.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(verify_certificate(&cert).unwrap(), Verdict::Valid);
    }

    #[test]
    fn selection_helper_matches_scan() {
        let varying = vec![(BigInt::from(3), 1u64), (BigInt::from(5), 2u64)];
        let t = rat(1, 40);
        let lo = BigInt::from(1);
        let hi = BigInt::from(100);
        let got = smallest_below(&varying, &t, &lo, &hi).unwrap();
        let scan = (1..=100)
            .map(BigInt::from)
            .find(|a| sum_at_most(&varying, a, &t))
            .unwrap();
        assert_eq!(got, scan);
        let single = vec![(BigInt::from(7), 2u64)];
        let got = smallest_below(&single, &rat(1, 700), &lo, &hi).unwrap();
        assert_eq!(got, BigInt::from(10));
        assert!(smallest_below(&single, &rat(-1, 2), &lo, &hi).is_none());
    }
}
