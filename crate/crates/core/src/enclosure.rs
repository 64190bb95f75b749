//! Outward-rounded interval arithmetic over exact rationals.
//!
//! Endpoints are exact rationals; every transcendental evaluation returns
//! dyadic endpoints computed with fixed-point integer arithmetic and an
//! explicit error bound, so results are bit-for-bit reproducible.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::{
    bits_for_width, ceil_int, ceil_scaled, dyadic, exact_root, floor_int, floor_scaled, ilog2,
    parse_rational, pow_rat, qadd, qcmp, qmax, qmin, qmul, qsub, rat, rat_int, round_down, round_up, Rational,
};

/// A closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

/// Three-valued outcome of comparing enclosures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Undecided,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if qcmp(&lo, &hi).is_gt() {
            return Err(Error::InvalidParameter(format!(
                "enclosure endpoints out of order: {lo} > {hi}"
            )));
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn point(v: Rational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Self::point(rat_int(v))
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        qsub(&self.hi, &self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        qmul(&qadd(&self.lo, &self.hi), &rat(1, 2))
    }

    pub fn contains(&self, v: &Rational) -> bool {
        qcmp(&self.lo, v).is_le() && qcmp(v, &self.hi).is_le()
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        qcmp(&self.lo, &other.lo).is_le() && qcmp(&other.hi, &self.hi).is_le()
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        qcmp(&self.lo, &other.hi).is_le() && qcmp(&other.lo, &self.hi).is_le()
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: qmin(self.lo.clone(), other.lo.clone()),
            hi: qmax(self.hi.clone(), other.hi.clone()),
        }
    }

    /// Round `lo` down and `hi` up to the grid `2^-bits`.
    pub fn round_outward(&self, bits: u64) -> Enclosure {
        Enclosure {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }

    /// Round outward keeping roughly `sig` significant bits of each endpoint.
    pub fn round_outward_relative(&self, sig: u64) -> Enclosure {
        Enclosure {
            lo: round_relative(&self.lo, sig, false),
            hi: round_relative(&self.hi, sig, true),
        }
    }

    /// Certifies `self > other`.
    pub fn gt(&self, other: &Enclosure) -> Decision {
        if qcmp(&self.lo, &other.hi).is_gt() {
            Decision::True
        } else if qcmp(&self.hi, &other.lo).is_le() {
            Decision::False
        } else {
            Decision::Undecided
        }
    }

    pub fn div(&self, other: &Enclosure) -> Result<Enclosure> {
        if !other.lo.is_positive() && !other.hi.is_negative() {
            return Err(Error::DivisionByIntervalContainingZero);
        }
        let inv = Enclosure {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        Ok(self * &inv)
    }

    /// `self^n` for an enclosure with `lo >= 0`, rounded outward to `2^-bits`
    /// after every multiplication so endpoint sizes stay bounded.
    pub fn pow_rounded(&self, n: u64, bits: u64) -> Enclosure {
        debug_assert!(!self.lo.is_negative());
        let mut result = Enclosure::from_int(1);
        let mut base = self.round_outward(bits);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = (&result * &base).round_outward(bits);
            }
            e >>= 1;
            if e > 0 {
                base = (&base * &base).round_outward(bits);
            }
        }
        result
    }
}

fn round_relative(v: &Rational, sig: u64, up: bool) -> Rational {
    if v.is_zero() || v.denom().is_one() && v.numer().bits() <= sig {
        return v.clone();
    }
    let k = sig as i64 - ilog2(&v.abs());
    if k >= 0 {
        if up {
            round_up(v, k as u64)
        } else {
            round_down(v, k as u64)
        }
    } else {
        let shift = BigInt::one() << (-k) as u64;
        let q = v / rat_int(shift.clone());
        let m = if up { ceil_int(&q) } else { floor_int(&q) };
        rat_int(m * shift)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: qadd(&self.lo, &rhs.lo),
            hi: qadd(&self.hi, &rhs.hi),
        }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: qsub(&self.lo, &rhs.hi),
            hi: qsub(&self.hi, &rhs.lo),
        }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: &Enclosure) -> Enclosure {
        if !self.lo.is_negative() && !rhs.lo.is_negative() {
            return Enclosure {
                lo: qmul(&self.lo, &rhs.lo),
                hi: qmul(&self.hi, &rhs.hi),
            };
        }
        let products = [
            qmul(&self.lo, &rhs.lo),
            qmul(&self.lo, &rhs.hi),
            qmul(&self.hi, &rhs.lo),
            qmul(&self.hi, &rhs.hi),
        ];
        let lo = products.iter().cloned().reduce(qmin).unwrap_or_default();
        let hi = products.iter().cloned().reduce(qmax).unwrap_or_default();
        Enclosure { lo, hi }
    }
}

impl Neg for &Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

/// Target width plus a refinement budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precision {
    target_width: Rational,
    max_refinements: u32,
}

impl Precision {
    pub fn new(target_width: Rational, max_refinements: u32) -> Result<Self> {
        if !target_width.is_positive() {
            return Err(Error::InvalidParameter("target width must be positive".into()));
        }
        if max_refinements == 0 {
            return Err(Error::InvalidParameter("max_refinements must be at least 1".into()));
        }
        Ok(Precision {
            target_width,
            max_refinements,
        })
    }

    /// Target width `2^-bits`.
    pub fn from_bits(bits: u64) -> Self {
        Precision {
            target_width: dyadic(BigInt::one(), bits),
            max_refinements: 16,
        }
    }

    /// Accepts `1e-k` sugar or an exact `p/q`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_rational(s)?, 16)
    }

    pub fn with_max_refinements(mut self, max_refinements: u32) -> Self {
        self.max_refinements = max_refinements.max(1);
        self
    }

    pub fn target_width(&self) -> &Rational {
        &self.target_width
    }

    pub fn max_refinements(&self) -> u32 {
        self.max_refinements
    }

    /// Smallest `k` with `2^-k <= target_width`.
    pub fn bits(&self) -> u64 {
        bits_for_width(&self.target_width)
    }

    pub fn doubled(&self) -> Self {
        Precision {
            target_width: &self.target_width / rat(2, 1),
            max_refinements: self.max_refinements,
        }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::from_bits(64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Negates `x`; `y` is ignored.
    Neg,
}

/// Applies `op` exactly, then rounds outward to the working grid of `prec`.
pub fn arith(op: ArithOp, x: &Enclosure, y: &Enclosure, prec: &Precision) -> Result<Enclosure> {
    let exact = match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x.div(y)?,
        ArithOp::Neg => -x,
    };
    Ok(exact.round_outward(prec.bits()))
}

fn bitlen(v: u64) -> u64 {
    64 - v.leading_zeros() as u64
}

/// `(sum, err)` with `sum <= 2^p atanh(u/v) <= sum + err`, for `0 <= u/v <= 1/3`.
fn atanh_fixed(u: &BigInt, v: &BigInt, p: u64) -> (BigInt, BigInt) {
    debug_assert!(!u.is_negative() && BigInt::from(3) * u <= *v);
    let small = match (u.to_u64(), v.to_u64()) {
        (Some(a), Some(b)) if a < (1 << 31) && b < (1 << 31) => Some((a * a, b * b)),
        _ => None,
    };
    let t2_fixed = if small.is_none() {
        Some(((u * u) << p) / (v * v))
    } else {
        None
    };
    let mut power = (u << p) / v;
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * i + 1);
        power = match (&small, &t2_fixed) {
            (Some((u2, v2)), _) => power * BigInt::from(*u2) / BigInt::from(*v2),
            (None, Some(t2)) => (power * t2) >> p,
            _ => unreachable!(),
        };
        i += 1;
    }
    (sum, BigInt::from(3 * i + 4))
}

/// `(lo, hi)` with `lo <= 2^p ln 2 <= hi`.
fn ln2_fixed(p: u64) -> (BigInt, BigInt) {
    let (s, e) = atanh_fixed(&BigInt::one(), &BigInt::from(3), p);
    let lo: BigInt = &s << 1;
    let hi = (s + e) << 1;
    (lo, hi)
}

/// Dyadic bounds on `ln q` with absolute width below `2^-bits`.
fn ln_bounds(q: &Rational, bits: u64) -> Result<(Rational, Rational)> {
    if !q.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    if q.is_one() {
        return Ok((Rational::zero(), Rational::zero()));
    }
    let k = ilog2(q);
    let kabs = k.unsigned_abs();
    let p = bits + bitlen(kabs + 1) + bitlen(bits + 64) + 8;
    let m = if k >= 0 {
        q / rat_int(BigInt::one() << kabs)
    } else {
        q * rat_int(BigInt::one() << kabs)
    };
    let one_p = BigInt::one() << p;
    let (lnm_lo, lnm_hi) = if m.is_one() {
        (BigInt::zero(), BigInt::zero())
    } else if m.numer().bits() <= 62 && m.denom().bits() <= 62 {
        let u = m.numer() - m.denom();
        let v = m.numer() + m.denom();
        let (s, e) = atanh_fixed(&u, &v, p);
        (&s << 1, (s + e) << 1)
    } else {
        let m_lo = floor_scaled(&m, p);
        let m_hi = ceil_scaled(&m, p);
        let (s_lo, _) = atanh_fixed(&(&m_lo - &one_p), &(&m_lo + &one_p), p);
        let (s_hi, e_hi) = atanh_fixed(&(&m_hi - &one_p), &(&m_hi + &one_p), p);
        (s_lo << 1, (s_hi + e_hi) << 1)
    };
    let (l2_lo, l2_hi) = if k == 0 {
        (BigInt::zero(), BigInt::zero())
    } else {
        ln2_fixed(p)
    };
    let kb = BigInt::from(k);
    let (lo, hi) = if k >= 0 {
        (lnm_lo + &kb * l2_lo, lnm_hi + &kb * l2_hi)
    } else {
        (lnm_lo + &kb * l2_hi, lnm_hi + &kb * l2_lo)
    };
    Ok((
        round_down(&dyadic(lo, p), bits + 4),
        round_up(&dyadic(hi, p), bits + 4),
    ))
}

/// `(sum, err)` with `sum <= 2^p exp(z) <= sum + err` where `z = zf / 2^p <= 1`.
fn exp_fixed(zf: &BigInt, p: u64) -> (BigInt, BigInt) {
    let mut term = BigInt::one() << p;
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !term.is_zero() {
        sum += &term;
        i += 1;
        term = ((term * zf) >> p) / BigInt::from(i);
    }
    (sum, BigInt::from(4 * i + 8))
}

/// Dyadic bounds on `exp y` with absolute width below `2^-bits`.
fn exp_bounds(y: &Rational, bits: u64) -> (Rational, Rational) {
    if y.is_zero() {
        return (Rational::one(), Rational::one());
    }
    if y.is_negative() {
        let (l, h) = exp_bounds(&-y, bits + 2);
        return (round_down(&h.recip(), bits + 2), round_up(&l.recip(), bits + 2));
    }
    // Under-approximation of ln 2, so k never overshoots.
    let ln2_under = Rational::new(
        BigInt::from(6_931_471_805_599_453u64),
        BigInt::from(10_000_000_000_000_000u64),
    );
    let k_est: BigInt = floor_int(&(y / &ln2_under)) - 1;
    let k: u64 = if k_est.is_positive() {
        k_est.to_u64().unwrap_or(u64::MAX)
    } else {
        0
    };
    let base = bits + k;
    let s = (base.sqrt() / 2).max(4);
    let p = base + s + bitlen(base + s + 64) + 16;
    let p2 = p + bitlen(k + 1) + bitlen(p) + 8;
    let (r_lo, r_hi) = if k == 0 {
        (y.clone(), y.clone())
    } else {
        let (l2_lo, l2_hi) = ln2_fixed(p2);
        let kb = rat_int(k);
        (
            y - &kb * dyadic(l2_hi, p2),
            y - &kb * dyadic(l2_lo, p2),
        )
    };
    let r_lo = qmax(r_lo, Rational::zero());
    let scale = rat_int(BigInt::one() << s);
    let z_lo = floor_scaled(&(&r_lo / &scale), p);
    let z_hi = ceil_scaled(&(&r_hi / &scale), p);
    let (mut lo, _) = exp_fixed(&z_lo, p);
    let (s_hi, e_hi) = exp_fixed(&z_hi, p);
    let mut hi = s_hi + e_hi;
    let mask = (BigInt::one() << p) - 1;
    for _ in 0..s {
        lo = (&lo * &lo) >> p;
        let sq = &hi * &hi;
        let carry = (&sq & &mask).is_zero();
        hi = (sq >> p) + if carry { 0 } else { 1 };
    }
    let lo = dyadic(lo << k, p);
    let hi = dyadic(hi << k, p);
    (round_down(&lo, bits + 2), round_up(&hi, bits + 2))
}

fn log2_upper(base: &Rational) -> u64 {
    (ilog2(base) + 1).max(1) as u64
}

/// Exact value of `base^t` when `t` is rational and the power is rational.
fn exact_power(base: &Rational, t: &Rational) -> Option<Rational> {
    let p = t.numer();
    let q = t.denom().to_u32()?;
    let pabs = p.abs().to_u64()?;
    // Keep exact powers to a sane size; larger ones go through enclosures.
    let size = pabs.checked_mul(base.numer().bits() + base.denom().bits())?;
    if size > (1 << 26) {
        return None;
    }
    let mut v = pow_rat(base, pabs);
    if p.is_negative() {
        v = v.recip();
    }
    if q == 1 {
        return Some(v);
    }
    let n = exact_root(v.numer(), q)?;
    let d = exact_root(v.denom(), q)?;
    Some(Rational::new(n, d))
}

/// Bounds on `base^t` for all `t` in the exponent enclosure; rounding adds
/// at most `2^-bits` beyond what the exponent's width forces.
fn pow_bounds(base: &Rational, t: &Enclosure, bits: u64) -> Result<Enclosure> {
    if t.is_point() {
        if let Some(v) = exact_power(base, &t.lo) {
            return Ok(Enclosure::point(v));
        }
    }
    let tmax = qmax(t.lo.abs(), t.hi.abs());
    let tmax_bits = ceil_int(&tmax).bits();
    let mag = if t.hi.is_positive() {
        ceil_int(&t.hi).to_u64().unwrap_or(u64::MAX / 4) * log2_upper(base)
    } else {
        0
    };
    let (l_lo, l_hi) = ln_bounds(base, bits + mag + tmax_bits + 8)?;
    let y_lo = if t.lo.is_negative() { &t.lo * &l_hi } else { &t.lo * &l_lo };
    let y_hi = if t.hi.is_negative() { &t.hi * &l_lo } else { &t.hi * &l_hi };
    let (lo, _) = exp_bounds(&y_lo, bits + 2);
    let (_, hi) = exp_bounds(&y_hi, bits + 2);
    Enclosure::new(lo, hi)
}

/// Encloses `ln v` for every `v` in `x`.
pub fn ln_enclosure(x: &Enclosure, prec: &Precision) -> Result<Enclosure> {
    if !x.lo.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    let mut bits = prec.bits() + 2;
    for _ in 0..prec.max_refinements {
        let (lo, lo_hi) = ln_bounds(&x.lo, bits)?;
        let (hi_lo, hi) = ln_bounds(&x.hi, bits)?;
        if qcmp(&(&lo_hi - &lo), &prec.target_width).is_le() && qcmp(&(&hi - &hi_lo), &prec.target_width).is_le() {
            return Enclosure::new(lo, hi);
        }
        bits *= 2;
    }
    Err(Error::PrecisionCapExceeded {
        budget: prec.max_refinements,
    })
}

/// Encloses `exp v` for every `v` in `x`.
pub fn exp_enclosure(x: &Enclosure, prec: &Precision) -> Result<Enclosure> {
    let mut bits = prec.bits() + 2;
    for _ in 0..prec.max_refinements {
        let (lo, lo_hi) = exp_bounds(&x.lo, bits);
        let (hi_lo, hi) = exp_bounds(&x.hi, bits);
        if qcmp(&(&lo_hi - &lo), &prec.target_width).is_le() && qcmp(&(&hi - &hi_lo), &prec.target_width).is_le() {
            return Enclosure::new(lo, hi);
        }
        bits *= 2;
    }
    Err(Error::PrecisionCapExceeded {
        budget: prec.max_refinements,
    })
}

/// Encloses `base^t` for every `t` in `exponent`; `base > 1`.
pub fn pow_enclosure(base: &Rational, exponent: &Enclosure, prec: &Precision) -> Result<Enclosure> {
    if base <= &Rational::one() {
        return Err(Error::InvalidParameter("power base must exceed 1".into()));
    }
    let point = |t: &Rational, bits| pow_bounds(base, &Enclosure::point(t.clone()), bits);
    let mut bits = prec.bits() + 2;
    for _ in 0..prec.max_refinements {
        let lo = point(&exponent.lo, bits)?;
        let hi = if exponent.is_point() {
            lo.clone()
        } else {
            point(&exponent.hi, bits)?
        };
        if lo.width() <= prec.target_width && hi.width() <= prec.target_width {
            return Enclosure::new(lo.lo, hi.hi);
        }
        bits *= 2;
    }
    Err(Error::PrecisionCapExceeded {
        budget: prec.max_refinements,
    })
}

/// Supplies ever narrower enclosures of an exponent on request.
pub trait ExponentSource {
    /// An enclosure of the exponent, of width at most `2^-bits` when the
    /// source can deliver it.
    fn enclosure(&mut self, bits: u64) -> Result<Enclosure>;
}

impl ExponentSource for Enclosure {
    fn enclosure(&mut self, _bits: u64) -> Result<Enclosure> {
        Ok(self.clone())
    }
}

impl<F> ExponentSource for F
where
    F: FnMut(u64) -> Result<Enclosure>,
{
    fn enclosure(&mut self, bits: u64) -> Result<Enclosure> {
        self(bits)
    }
}

/// The integer `m` with `m <= base^t < m + 1`, refining the exponent until
/// the power's enclosure sits inside one unit interval.
pub fn floor_power(
    base: &Rational,
    exponent: &mut dyn ExponentSource,
    prec: &Precision,
) -> Result<BigInt> {
    if base <= &Rational::one() {
        return Err(Error::InvalidParameter("power base must exceed 1".into()));
    }
    let mut t = exponent.enclosure(8)?;
    for k in 0..prec.max_refinements {
        if t.is_point() {
            if let Some(v) = exact_power(base, &t.lo) {
                return Ok(floor_int(&v));
            }
        }
        let extra = 16u64 << k.min(40);
        let mag = if t.hi.is_positive() {
            ceil_int(&t.hi).to_u64().unwrap_or(u64::MAX / 4) * log2_upper(base)
        } else {
            0
        };
        t = exponent.enclosure(mag + extra + bitlen(log2_upper(base)) + 4)?;
        let v = pow_bounds(base, &t, extra)?;
        let m = floor_int(&v.lo);
        if qcmp(&v.hi, &rat_int(&m + 1)).is_lt() {
            return Ok(m);
        }
    }
    Err(Error::FloorUndecidable {
        budget: prec.max_refinements,
    })
}
