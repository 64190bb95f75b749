//! Nested-interval construction of sequences whose weighted reciprocal
//! series sums to a prescribed rational.
//!
//! Terms are chosen from per-index windows `J_n = [beta_n, gamma_n]` with
//! `beta_n = floor(C^(c^n + n^2 + 1))` and `gamma_n = floor(C^(c^n + n^2 + n))`,
//! where `c` is the largest positive root of the companion polynomial.
//! Series terms here use unshifted indexing: term `n >= 1` is
//! `1 / (a_n^{w_0} ... a_{n+d-1}^{w_{d-1}})`.

mod certificate;
mod state;

pub use certificate::{verify_certificate, BracketDoc, Certificate, EnclosureDoc, RepairDoc, ReplacedDoc, Verdict, CERTIFICATE_VERSION};
pub use state::{attainable_interval, construct, find_m, BracketRecord, ConstructedSeries, ConstructionState};

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::charpoly::{build_pw_tilde, isolate_root, RootEnclosure, RootKind, WeightVector};
use crate::enclosure::{floor_power, Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{ceil_int, dyadic, pow_int, pow_rat, rat_int, Rational};

fn bitlen(v: u64) -> u64 {
    64 - v.leading_zeros() as u64
}

#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
enum Source {
    Power {
        c: Rational,
        c_tilde: Mutex<RootEnclosure>,
        initial: RootEnclosure,
    },
    Explicit {
        beta: Vec<BigInt>,
        gamma: Vec<BigInt>,
    },
}

/// The `(beta_n, gamma_n)` envelope, memoized.
#[derive(Debug)]
pub struct Schedule {
    w: WeightVector,
    source: Source,
    prec: Precision,
    memo: Mutex<BTreeMap<usize, (BigInt, BigInt)>>,
}

impl Schedule {
    /// Power schedule with base `c > 1`; isolates the companion root itself.
    pub fn new(w: WeightVector, c: Rational, prec: &Precision) -> Result<Self> {
        let root = isolate_root(&build_pw_tilde(&w), RootKind::LargestPositive, &Precision::from_bits(64))?;
        Self::with_root(w, c, root, prec)
    }

    /// Power schedule with a caller-supplied, already certified companion root.
    pub fn with_root(w: WeightVector, c: Rational, root: RootEnclosure, prec: &Precision) -> Result<Self> {
        if c <= Rational::one() {
            return Err(Error::InvalidParameter("C must exceed 1".into()));
        }
        Ok(Schedule {
            w,
            source: Source::Power {
                c,
                c_tilde: Mutex::new(root.clone()),
                initial: root,
            },
            prec: prec.clone(),
            memo: Mutex::new(BTreeMap::new()),
        })
    }

    /// Finite envelope given term by term, for exercising the covering test.
    pub fn explicit(w: WeightVector, beta: Vec<BigInt>, gamma: Vec<BigInt>) -> Result<Self> {
        if beta.len() != gamma.len() {
            return Err(Error::InvalidParameter("beta and gamma lengths differ".into()));
        }
        if beta.iter().zip(&gamma).any(|(b, g)| !b.is_positive() || b > g) {
            return Err(Error::InvalidParameter("need 1 <= beta_n <= gamma_n".into()));
        }
        Ok(Schedule {
            w,
            source: Source::Explicit { beta, gamma },
            prec: Precision::default(),
            memo: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn w(&self) -> &WeightVector {
        &self.w
    }

    pub fn d(&self) -> usize {
        self.w.d()
    }

    pub fn c(&self) -> Option<&Rational> {
        match &self.source {
            Source::Power { c, .. } => Some(c),
            Source::Explicit { .. } => None,
        }
    }

    /// The companion-root enclosure the schedule was created with.
    pub fn c_tilde(&self) -> Option<&RootEnclosure> {
        match &self.source {
            Source::Power { initial, .. } => Some(initial),
            Source::Explicit { .. } => None,
        }
    }

    pub fn precision(&self) -> &Precision {
        &self.prec
    }

    pub fn horizon(&self) -> usize {
        match &self.source {
            Source::Power { .. } => crate::series::UNBOUNDED,
            Source::Explicit { beta, .. } => beta.len(),
        }
    }

    /// Smallest `K` with `C^(2K+1) >= 3`; from there on `beta_{k+1} >= 2 beta_k`
    /// and `gamma_{k+1} >= 2 gamma_k`.
    pub fn ratio_start(&self) -> usize {
        match &self.source {
            Source::Power { c, .. } => {
                let three = rat_int(3);
                let mut k = 1usize;
                while pow_rat(c, 2 * k as u64 + 1) < three {
                    k += 1;
                }
                k
            }
            Source::Explicit { .. } => usize::MAX,
        }
    }

    /// Smallest `K` with `C^(K+2) >= 3`; from there on `beta_{k+1} >= 2 gamma_k`,
    /// so any sequence with terms in their windows at least doubles.
    pub fn window_ratio_start(&self) -> usize {
        match &self.source {
            Source::Power { c, .. } => {
                let three = rat_int(3);
                let mut k = 1usize;
                while pow_rat(c, k as u64 + 2) < three {
                    k += 1;
                }
                k
            }
            Source::Explicit { .. } => usize::MAX,
        }
    }

    pub fn beta(&self, n: usize) -> Result<BigInt> {
        Ok(self.bounds(n)?.0)
    }

    pub fn gamma(&self, n: usize) -> Result<BigInt> {
        Ok(self.bounds(n)?.1)
    }

    /// `(beta_n, gamma_n)`.
    pub fn bounds(&self, n: usize) -> Result<(BigInt, BigInt)> {
        if n == 0 {
            return Err(Error::InvalidParameter("schedule indices start at 1".into()));
        }
        if let Some(v) = self.memo.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
            return Ok(v.clone());
        }
        let v = match &self.source {
            Source::Explicit { beta, gamma } => {
                if n > beta.len() {
                    return Err(Error::IndexBeyondHorizon {
                        index: n,
                        horizon: beta.len(),
                    });
                }
                (beta[n - 1].clone(), gamma[n - 1].clone())
            }
            Source::Power { c, .. } => {
                let nn = n as u64;
                let b = floor_power(c, &mut |bits| self.exponent(n, nn * nn + 1, bits), &self.prec)?;
                let g = floor_power(c, &mut |bits| self.exponent(n, nn * nn + nn, bits), &self.prec)?;
                (b, g)
            }
        };
        self.memo
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(n, v.clone());
        Ok(v)
    }

    /// Encloses `c^n + shift` to width about `2^-bits`.
    fn exponent(&self, n: usize, shift: u64, bits: u64) -> Result<Enclosure> {
        let Source::Power { c_tilde, .. } = &self.source else {
            unreachable!("exponent requested for an explicit schedule")
        };
        let mut guard = c_tilde.lock().unwrap_or_else(|e| e.into_inner());
        let ceil = ceil_int(&guard.hi()).to_u64().unwrap_or(u64::MAX);
        let per_factor = bitlen(ceil.saturating_sub(1)).max(1);
        let need = bits + n as u64 * per_factor + bitlen(n as u64) + 8;
        if !guard.is_exact() && guard.width_bits() < need {
            *guard = guard.refine_to(need);
        }
        let root = guard.enclosure();
        drop(guard);
        let power = root.pow_rounded(n as u64, need);
        Ok(&power + &Enclosure::point(rat_int(shift)))
    }

    /// Value of index `k` when the first `prefix.len()` indices are fixed,
    /// index `prefix.len() + 1` optionally overridden, and the rest follow `tail`.
    fn value(&self, a: &Assignment<'_>, k: usize) -> Result<BigInt> {
        let n = a.prefix.len();
        if k <= n {
            return Ok(a.prefix[k - 1].clone());
        }
        if k == n + 1 {
            if let Some(m) = a.mid {
                return Ok(m.clone());
            }
        }
        match a.tail {
            TailKind::Beta => self.beta(k),
            TailKind::Gamma => self.gamma(k),
        }
    }

    /// Denominator of term `n` under the given assignment.
    fn term_denominator(&self, a: &Assignment<'_>, n: usize) -> Result<BigInt> {
        let mut x = BigInt::one();
        for (j, &wj) in self.w.weights().iter().enumerate() {
            if wj > 0 {
                x *= pow_int(&self.value(a, n + j)?, wj);
            }
        }
        Ok(x)
    }

    /// Fixed-point enclosure, in units of `2^-g`, of the sum of all terms
    /// `n >= 1` not excluded by `skip`. Terms whose indices all lie at or
    /// beyond `tail_start` follow the tail; once such terms are negligible
    /// their remainder is bounded by twice the first omitted all-beta term.
    fn fixed_sum(
        &self,
        a: &Assignment<'_>,
        skip: &dyn Fn(usize) -> bool,
        tail_start: usize,
        g: u64,
    ) -> Result<(BigInt, BigInt)> {
        let scale = BigInt::one() << g;
        let ratio_start = self.ratio_start();
        let first_free = tail_start.max(ratio_start);
        let beta_tail = Assignment {
            prefix: &[],
            mid: None,
            tail: TailKind::Beta,
        };
        let cap = first_free.saturating_add(self.d() + 512);
        let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
        let mut n = 1usize;
        loop {
            if n >= first_free && !skip(n) {
                let xb = self.term_denominator(&beta_tail, n)?;
                let rem = Integer::div_ceil(&scale, &xb);
                if rem <= BigInt::one() {
                    hi += rem * 2;
                    return Ok((lo, hi));
                }
            }
            if n > cap {
                return Err(Error::PrecisionCapExceeded {
                    budget: self.prec.max_refinements(),
                });
            }
            if !skip(n) {
                let x = self.term_denominator(a, n)?;
                let (q, r) = scale.div_rem(&x);
                hi += &q + if r.is_zero() { 0 } else { 1 };
                lo += q;
            }
            n += 1;
        }
    }

    /// Encloses `S(prefix, tail)` using `g` fractional bits.
    pub fn bracket_at(&self, prefix: &[BigInt], tail: TailKind, g: u64) -> Result<Enclosure> {
        let a = Assignment {
            prefix,
            mid: None,
            tail,
        };
        let (lo, hi) = self.fixed_sum(&a, &|_| false, prefix.len() + 1, g)?;
        Enclosure::new(dyadic(lo, g), dyadic(hi, g))
    }

    /// Default working precision for a prefix of length `n`: twice the bit
    /// length of the first term touching the tail, plus guard bits.
    pub fn base_bits(&self, prefix: &[BigInt]) -> Result<u64> {
        let n = prefix.len();
        let d = self.d();
        let first = (n + 2).saturating_sub(d).max(1);
        let a = Assignment {
            prefix,
            mid: None,
            tail: TailKind::Gamma,
        };
        let x = self.term_denominator(&a, first)?;
        Ok(2 * x.bits() + 64)
    }

    /// Enclosure of `S(prefix, tail)` at the default precision.
    pub fn bracket(&self, prefix: &[BigInt], tail: TailKind) -> Result<Enclosure> {
        self.bracket_at(prefix, tail, self.base_bits(prefix)?)
    }
}

/// Which envelope the unchosen terms follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    Beta,
    Gamma,
}

struct Assignment<'a> {
    prefix: &'a [BigInt],
    mid: Option<&'a BigInt>,
    tail: TailKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoveringVerdict {
    Pass,
    Fail,
}

/// Checks the worst-case covering inequality at `n`, exactly.
///
/// With `b = beta_{N+1}`, `b' = beta_{N+2}`, `g = gamma_{N+2}`, `e = w_{d-2}`
/// (zero when `d = 1`) and `f = w_{d-1}`, passes iff
/// `prod_{j<d-1} (beta_{N-d+2+j} / gamma_{N-d+3+j})^{w_j} (b / b')^f b`
/// strictly exceeds `f (b+1)^e g^f / (b^e g^f - (b+1)^e b'^f)` with a positive
/// denominator, and every intermediate mixed term is non-increasing under the
/// switch from `(a, gamma)` to `(a + 1, beta)`.
pub fn covering_check(s: &Schedule, n: usize) -> Result<CoveringVerdict> {
    let d = s.d();
    let w = s.w();
    if n < d {
        return Err(Error::PreconditionViolated(format!("covering needs N >= d = {d}")));
    }
    // Everything is cross-multiplied so no rational is ever reduced.
    let mut lb_num = BigInt::one();
    let mut lb_den = BigInt::one();
    for j in 0..d.saturating_sub(1) {
        let wj = w.get(j);
        if wj > 0 {
            lb_num *= pow_int(&s.beta(n + 2 - d + j)?, wj);
            lb_den *= pow_int(&s.gamma(n + 3 - d + j)?, wj);
        }
    }
    let b = s.beta(n + 1)?;
    let b2 = s.beta(n + 2)?;
    let g2 = s.gamma(n + 2)?;
    let f = w.get(d - 1);
    let e = if d >= 2 { w.get(d - 2) } else { 0 };
    lb_num *= pow_int(&b, f) * &b;
    lb_den *= pow_int(&b2, f);

    let b1 = &b + 1;
    let g2f = pow_int(&g2, f);
    let b1e = pow_int(&b1, e);
    let denom = pow_int(&b, e) * &g2f - &b1e * pow_int(&b2, f);
    if !denom.is_positive() {
        return Ok(CoveringVerdict::Fail);
    }
    // lb_num / lb_den > f (b+1)^e g^f / denom
    if lb_num * denom <= BigInt::from(f) * b1e * g2f * lb_den {
        return Ok(CoveringVerdict::Fail);
    }
    if d >= 3 {
        for m in (n + 4 - d)..=(n + 1) {
            let wm = w.get(n + 1 - m);
            let mut num = pow_int(&b1, wm);
            let mut den = pow_int(&b, wm);
            for k in (n + 2)..=(m + d - 1) {
                let wk = w.get(k - m);
                if wk > 0 {
                    num *= pow_int(&s.beta(k)?, wk);
                    den *= pow_int(&s.gamma(k)?, wk);
                }
            }
            if num > den {
                return Ok(CoveringVerdict::Fail);
            }
        }
    }
    Ok(CoveringVerdict::Pass)
}

/// `(beta_n, gamma_n)`.
pub fn schedule_bounds(s: &Schedule, n: usize) -> Result<(BigInt, BigInt)> {
    s.bounds(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn sched(w: &[u64], c: Rational) -> Schedule {
        Schedule::new(WeightVector::new(w.to_vec()).unwrap(), c, &Precision::from_bits(64)).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let s = sched(&[1], rat(2, 1));
        assert_eq!(s.bounds(1).unwrap(), (BigInt::from(16), BigInt::from(16)));
        assert_eq!(s.bounds(2).unwrap(), (BigInt::from(512), BigInt::from(1024)));
        let t = sched(&[1, 1], rat(3, 2));
        for n in 1..12 {
            let (b, g) = t.bounds(n).unwrap();
            assert!(b <= g && b.is_positive());
        }
    }

    #[test]
    fn golden_schedule_matches_independent_floor() {
        // phi^n = (L_n + F_n sqrt 5) / 2 with Lucas and Fibonacci numbers, so
        // floor(phi^n) = floor((L_n + isqrt(5 F_n^2)) / 2) and beta_n has
        // exactly floor(phi^n) + n^2 + 2 binary digits.
        let s = sched(&[1, 1], rat(2, 1));
        let (mut f0, mut f1) = (BigInt::zero(), BigInt::one());
        let (mut l0, mut l1) = (BigInt::from(2), BigInt::one());
        for n in 1..=14usize {
            let root5f: BigInt = num_integer::Roots::sqrt(&(&f1 * &f1 * 5));
            let phi_floor = (&l1 + root5f).div_floor(&BigInt::from(2));
            let expected_bits = phi_floor.to_u64().unwrap() + (n * n) as u64 + 2;
            assert_eq!(s.beta(n).unwrap().bits(), expected_bits, "n = {n}");
            let next_f = &f0 + &f1;
            f0 = std::mem::replace(&mut f1, next_f);
            let next_l = &l0 + &l1;
            l0 = std::mem::replace(&mut l1, next_l);
        }
    }

    #[test]
    fn covering_examples() {
        let s = sched(&[1], rat(2, 1));
        assert_eq!(covering_check(&s, 1).unwrap(), CoveringVerdict::Fail);
        for n in 2..12 {
            assert_eq!(covering_check(&s, n).unwrap(), CoveringVerdict::Pass, "N = {n}");
        }
        let s = sched(&[1, 1], rat(2, 1));
        let m = find_m(&s, 20).unwrap().expect("covering passes eventually");
        for n in m..=20 {
            assert_eq!(covering_check(&s, n).unwrap(), CoveringVerdict::Pass);
        }
        assert!(matches!(covering_check(&s, 1), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn degenerate_envelope_fails() {
        let beta: Vec<BigInt> = (1..=30u32).map(|n| BigInt::one() << (n * n)).collect();
        for w in [vec![1u64], vec![1, 1]] {
            let wv = WeightVector::new(w).unwrap();
            let s = Schedule::explicit(wv.clone(), beta.clone(), beta.clone()).unwrap();
            for n in wv.d()..20 {
                assert_eq!(covering_check(&s, n).unwrap(), CoveringVerdict::Fail);
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let s = sched(&[1], rat(2, 1));
        let prefix = vec![BigInt::from(16)];
        let up = s.bracket(&prefix, TailKind::Beta).unwrap();
        // 1/16 + 1/512 + 1/2^18 + (remaining tail below 2^-32)
        let oracle = rat(1, 16) + rat(1, 512) + Rational::new(BigInt::one(), BigInt::one() << 18u32);
        assert!(up.lo() > &oracle);
        assert!(up.hi() < &(oracle + Rational::new(BigInt::one(), BigInt::one() << 32u32)));
        assert_eq!(crate::numeric::decimal_approx(up.lo(), 4), "0.0645");
        let down = s.bracket(&prefix, TailKind::Gamma).unwrap();
        assert!(down.hi() <= up.hi());
        let deeper = vec![BigInt::from(16), s.beta(2).unwrap(), s.beta(3).unwrap(), s.beta(4).unwrap()];
        let w0 = up.hi() - down.lo();
        let d_up = s.bracket(&deeper, TailKind::Beta).unwrap();
        let d_down = s.bracket(&deeper, TailKind::Gamma).unwrap();
        assert!(d_up.hi() - d_down.lo() < w0);
    }

    #[test]
    fn ratio_start_examples() {
        assert_eq!(sched(&[1], rat(2, 1)).ratio_start(), 1);
        assert_eq!(sched(&[1], rat(11, 10)).ratio_start(), 6);
    }
}
