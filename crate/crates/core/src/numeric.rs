//! Exact-rational helpers shared by every module: dyadic rounding, integer
//! roots, parsing and rendering of `p/q` strings.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Greatest common divisor, fast when one side is small or a power of two.
///
/// The binary gcd behind `Ratio::new` is quadratic in the operand size even
/// when one operand is tiny, which dominates once numerators reach millions
/// of bits. Stripping twos and taking one Euclidean step first avoids that.
pub fn gcd_fast(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    let (ta, tb) = (a.trailing_zeros().unwrap_or(0), b.trailing_zeros().unwrap_or(0));
    a >>= ta;
    b >>= tb;
    let twos = ta.min(tb);
    while !b.is_zero() && !b.is_one() {
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        a %= &b;
        std::mem::swap(&mut a, &mut b);
    }
    let g = if b.is_one() { b } else { a };
    g << twos
}

/// `n / d` in lowest terms, reduced with [`gcd_fast`].
pub fn qnew(n: BigInt, d: BigInt) -> Rational {
    assert!(!d.is_zero(), "zero denominator");
    let g = gcd_fast(&n, &d);
    let (mut n, mut d) = if g.is_one() { (n, d) } else { (n / &g, d / &g) };
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    Rational::new_raw(n, d)
}

pub fn qadd(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        return qnew(a.numer() + b.numer(), a.denom().clone());
    }
    qnew(a.numer() * b.denom() + b.numer() * a.denom(), a.denom() * b.denom())
}

pub fn qsub(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        return qnew(a.numer() - b.numer(), a.denom().clone());
    }
    qnew(a.numer() * b.denom() - b.numer() * a.denom(), a.denom() * b.denom())
}

pub fn qmul(a: &Rational, b: &Rational) -> Rational {
    qnew(a.numer() * b.numer(), a.denom() * b.denom())
}

/// `m / 2^k` in lowest terms.
pub fn dyadic(m: BigInt, k: u64) -> Rational {
    if m.is_zero() {
        return Rational::zero();
    }
    let tz = m.trailing_zeros().unwrap_or(0).min(k);
    Rational::new_raw(m >> tz, BigInt::one() << (k - tz))
}

/// `floor(q * 2^k)`.
pub fn floor_scaled(q: &Rational, k: u64) -> BigInt {
    (q.numer() << k).div_floor(q.denom())
}

/// `ceil(q * 2^k)`.
pub fn ceil_scaled(q: &Rational, k: u64) -> BigInt {
    -((-(q.numer() << k)).div_floor(q.denom()))
}

pub fn round_down(q: &Rational, k: u64) -> Rational {
    if q.denom().is_one() {
        return q.clone();
    }
    dyadic(floor_scaled(q, k), k)
}

pub fn round_up(q: &Rational, k: u64) -> Rational {
    if q.denom().is_one() {
        return q.clone();
    }
    dyadic(ceil_scaled(q, k), k)
}

pub fn floor_int(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

pub fn ceil_int(q: &Rational) -> BigInt {
    -((-q.numer()).div_floor(q.denom()))
}

/// `floor(log2 q)` for `q > 0`.
pub fn ilog2(q: &Rational) -> i64 {
    debug_assert!(q.is_positive());
    let num = q.numer();
    let den = q.denom();
    let k = num.bits() as i64 - den.bits() as i64;
    let below = if k >= 0 {
        num < &(den << k as u64)
    } else {
        &(num << (-k) as u64) < den
    };
    if below {
        k - 1
    } else {
        k
    }
}

/// Smallest `k >= 0` with `2^-k <= width`.
pub fn bits_for_width(width: &Rational) -> u64 {
    debug_assert!(width.is_positive());
    let l = ilog2(width);
    // 2^l <= width < 2^(l+1), so 2^-k <= width iff -k <= l.
    if l >= 0 {
        0
    } else {
        (-l) as u64
    }
}

pub fn pow_rat(q: &Rational, e: u64) -> Rational {
    Rational::new_raw(
        num_traits::pow(q.numer().clone(), e as usize),
        num_traits::pow(q.denom().clone(), e as usize),
    )
}

pub fn pow_int(b: &BigInt, e: u64) -> BigInt {
    num_traits::pow(b.clone(), e as usize)
}

/// Exact `n`-th root of a non-negative integer, if it exists.
pub fn exact_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    (pow_int(&r, n as u64) == *x).then_some(r)
}

/// Smallest integer `r >= 0` with `r^n >= x`.
pub fn ceil_root(x: &BigInt, n: u32) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let r = x.nth_root(n);
    if pow_int(&r, n as u64) >= *x {
        r
    } else {
        r + 1
    }
}

/// Parse `p/q`, an integer, a decimal (`0.25`) or scientific sugar (`1e-12`).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(qnew(p, q));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64 - 1;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        rat_int(digits * pow_int(&ten, scale as u64))
    } else {
        qnew(digits, pow_int(&ten, (-scale) as u64))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Exact comparison by cross-multiplication.
///
/// The `Ord` impl on `Ratio` expands continued fractions recursively, which
/// exhausts the stack on operands with tens of thousands of bits.
pub fn qcmp(a: &Rational, b: &Rational) -> std::cmp::Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

pub fn qmin(a: Rational, b: Rational) -> Rational {
    if qcmp(&a, &b).is_le() {
        a
    } else {
        b
    }
}

pub fn qmax(a: Rational, b: Rational) -> Rational {
    if qcmp(&a, &b).is_ge() {
        a
    } else {
        b
    }
}

/// `p/q`, or just `p` for integers.
pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serializes a rational as its `p/q` string.
pub fn serialize_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(q))
}

/// Decimal rendering rounded to `digits` fractional digits. For display only.
pub fn decimal_approx(q: &Rational, digits: usize) -> String {
    let scale = pow_int(&BigInt::from(10), digits as u64);
    let scaled = q * rat_int(scale.clone());
    let rounded = floor_int(&(scaled + rat(1, 2)));
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (int_part, frac_part) = abs.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_accepted_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("2.5e1").unwrap(), rat(25, 1));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn log2_and_width_bits() {
        assert_eq!(ilog2(&rat(1, 1)), 0);
        assert_eq!(ilog2(&rat(3, 1)), 1);
        assert_eq!(ilog2(&rat(1, 3)), -2);
        assert_eq!(ilog2(&rat(1, 4)), -2);
        assert_eq!(bits_for_width(&rat(1, 1024)), 10);
        assert_eq!(bits_for_width(&rat(1, 1000)), 10);
        assert_eq!(bits_for_width(&rat(5, 1)), 0);
    }

    #[test]
    fn dyadic_rounding_brackets_value() {
        let third = rat(1, 3);
        let lo = round_down(&third, 10);
        let hi = round_up(&third, 10);
        assert!(lo <= third && third <= hi);
        assert_eq!(&hi - &lo, rat(1, 1024));
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root(&BigInt::from(128), 2), None);
        assert_eq!(exact_root(&BigInt::from(125), 3), Some(BigInt::from(5)));
        assert_eq!(ceil_root(&BigInt::from(10), 2), BigInt::from(4));
        assert_eq!(ceil_root(&BigInt::from(9), 2), BigInt::from(3));
    }

    #[test]
    fn decimal_display() {
        assert_eq!(decimal_approx(&rat(1, 3), 4), "0.3333");
        assert_eq!(decimal_approx(&rat(-5, 4), 1), "-1.2");
        assert_eq!(decimal_approx(&rat(2, 1), 3), "2.000");
    }
}
