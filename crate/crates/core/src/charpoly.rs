//! Weight vectors, their characteristic polynomials, and certified
//! isolation of the positive roots that govern growth rates.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::enclosure::{Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{dyadic, rat_int, Rational};

/// A tuple `(w_0, ..., w_{d-1})` of non-negative weights with `w_{d-1} >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct WeightVector {
    w: Vec<u64>,
    max: u64,
}

impl WeightVector {
    pub fn new(w: Vec<u64>) -> Result<Self> {
        match w.last() {
            None => Err(Error::InvalidParameter("weight vector must be non-empty".into())),
            Some(0) => Err(Error::InvalidParameter(
                "last weight must be at least 1".into(),
            )),
            Some(_) => {
                let max = *w.iter().max().unwrap_or(&1);
                Ok(WeightVector { w, max })
            }
        }
    }

    /// Parses a comma-separated list such as `1,0,2,1`.
    pub fn parse(s: &str) -> Result<Self> {
        let w = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad weight `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(w)
    }

    pub fn ones(d: usize) -> Result<Self> {
        Self::new(vec![1; d])
    }

    pub fn d(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.w
    }

    pub fn get(&self, j: usize) -> u64 {
        self.w[j]
    }

    /// `W = max_j w_j`.
    pub fn max_weight(&self) -> u64 {
        self.max
    }

    pub fn sum(&self) -> u64 {
        self.w.iter().sum()
    }
}

impl TryFrom<Vec<u64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<u64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<u64> {
    fn from(w: WeightVector) -> Vec<u64> {
        w.w
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.w.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Integer polynomial; `coeffs[j]` is the coefficient of `x^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        &self.coeffs[self.degree()]
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_int(c.clone());
        }
        acc
    }

    pub fn derivative(&self) -> IntPolynomial {
        if self.degree() == 0 {
            return IntPolynomial::from_i64(&[0]);
        }
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * BigInt::from(j))
                .collect(),
        )
    }

    /// `2^(k * deg) * p(m / 2^k)`, an integer with the sign of `p(m / 2^k)`.
    fn scaled_value(&self, m: &BigInt, k: u64) -> BigInt {
        let mut acc = BigInt::zero();
        let mut shift = 0u64;
        for c in self.coeffs.iter().rev() {
            acc = acc * m + (c << shift);
            shift += k;
        }
        acc
    }

    fn sign_at_dyadic(&self, m: &BigInt, k: u64) -> i8 {
        sign(&self.scaled_value(m, k))
    }
}

fn sign(v: &BigInt) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && !(first && j == 0) {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = !mag.is_one() || j == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match j {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{j}")?,
            }
        }
        Ok(())
    }
}

/// `(x - 1) * sum_j w_j x^j - W x^{d-1}`.
pub fn build_pw(w: &WeightVector) -> IntPolynomial {
    weighted_poly(w, w.max_weight())
}

/// `(x - 1) * sum_j w_j x^j - x^{d-1}`.
pub fn build_pw_tilde(w: &WeightVector) -> IntPolynomial {
    weighted_poly(w, 1)
}

fn weighted_poly(w: &WeightVector, top: u64) -> IntPolynomial {
    let d = w.d();
    let mut c = vec![BigInt::zero(); d + 1];
    for (j, &wj) in w.weights().iter().enumerate() {
        c[j + 1] += BigInt::from(wj);
        c[j] -= BigInt::from(wj);
    }
    c[d - 1] -= BigInt::from(top);
    IntPolynomial::from_coeffs(c)
}

pub fn eval_at(p: &IntPolynomial, x: &Rational) -> Rational {
    p.eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    UniquePositive,
    LargestPositive,
}

/// Sturm chain with rational coefficients.
struct Sturm {
    chain: Vec<Vec<Rational>>,
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let q = &r[dr] / lead;
        for i in 0..=db {
            let t = &q * &b[i];
            r[dr - db + i] -= t;
        }
        r.pop();
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    r
}

impl Sturm {
    fn new(p: &IntPolynomial) -> Self {
        let to_rat = |q: &IntPolynomial| q.coeffs.iter().map(|c| rat_int(c.clone())).collect::<Vec<_>>();
        let mut chain = vec![to_rat(p), to_rat(&p.derivative())];
        loop {
            let n = chain.len();
            if chain[n - 1].iter().all(Zero::is_zero) {
                chain.pop();
                break;
            }
            if chain[n - 1].len() == 1 {
                break;
            }
            let r: Vec<Rational> = poly_rem(&chain[n - 2], &chain[n - 1])
                .into_iter()
                .map(|c| -c)
                .collect();
            if r.is_empty() {
                break;
            }
            chain.push(r);
        }
        Sturm { chain }
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for q in &self.chain {
            let mut acc = Rational::zero();
            for c in q.iter().rev() {
                acc = acc * x + c;
            }
            let s = if acc.is_positive() {
                1
            } else if acc.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Distinct roots in `(a, b]`, for `a` not a root.
    fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Certified enclosure of a distinguished positive root.
///
/// Endpoints are dyadic `m / 2^k`. Unless the enclosure is an exact point,
/// the polynomial is negative at `lo` and positive at `hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootEnclosure {
    lo: (BigInt, u64),
    hi: (BigInt, u64),
    poly: Arc<IntPolynomial>,
    kind: RootKind,
}

fn common(a: &(BigInt, u64), b: &(BigInt, u64)) -> (BigInt, BigInt, u64) {
    let k = a.1.max(b.1);
    (&a.0 << (k - a.1), &b.0 << (k - b.1), k)
}

impl RootEnclosure {
    pub fn lo(&self) -> Rational {
        dyadic(self.lo.0.clone(), self.lo.1)
    }

    pub fn hi(&self) -> Rational {
        dyadic(self.hi.0.clone(), self.hi.1)
    }

    pub fn enclosure(&self) -> Enclosure {
        Enclosure::new(self.lo(), self.hi()).expect("ordered root enclosure")
    }

    pub fn width(&self) -> Rational {
        self.hi() - self.lo()
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    /// Number of bits `k` with width `<= 2^-k` (saturating for exact roots).
    pub fn width_bits(&self) -> u64 {
        if self.is_exact() {
            return u64::MAX;
        }
        let (l, h, k) = common(&self.lo, &self.hi);
        let diff = h - l;
        k.saturating_sub(diff.bits().saturating_sub(1)).saturating_sub(if diff.trailing_zeros() == Some(diff.bits() - 1) { 0 } else { 1 })
    }

    /// A nested enclosure of width at most `2^-bits`.
    pub fn refine_to(&self, bits: u64) -> RootEnclosure {
        let mut cur = self.clone();
        while !cur.is_exact() && cur.width_bits() < bits {
            cur = cur.step(bits);
        }
        cur
    }

    /// Refines to the target width of `prec`, honouring its budget of
    /// precision doublings beyond 32 bits.
    pub fn refine(&self, prec: &Precision) -> Result<RootEnclosure> {
        let bits = prec.bits();
        let mut levels = 0u32;
        let mut reach = 32u64;
        while reach < bits {
            reach *= 2;
            levels += 1;
        }
        if levels > prec.max_refinements() {
            return Err(Error::PrecisionCapExceeded {
                budget: prec.max_refinements(),
            });
        }
        Ok(self.refine_to(bits))
    }

    /// One Newton step verified by signs; bisection when Newton does not help.
    fn step(&self, target: u64) -> RootEnclosure {
        let p = &*self.poly;
        let cur_bits = self.width_bits();
        if cur_bits >= 8 {
            let want = target.min(cur_bits.saturating_mul(2)).max(cur_bits + 1);
            let (l, h, k) = common(&self.lo, &self.hi);
            let t = (want + 4).max(k + 1);
            let mid = (&l + &h) << (t - k - 1);
            let pv = p.scaled_value(&mid, t);
            let dv = p.derivative().scaled_value(&mid, t);
            if !dv.is_zero() {
                // y = mid - p/p' on the 2^-t grid.
                let corr = num_integer::Integer::div_floor(&pv, &dv);
                let y = &mid - corr;
                for slack in [0u64, 2, 4, 6] {
                    let delta = BigInt::one() << (4 + slack);
                    let a = (&y - &delta, t);
                    let b = (&y + &delta, t);
                    let sa = p.sign_at_dyadic(&a.0, t);
                    let sb = p.sign_at_dyadic(&b.0, t);
                    if sa == 0 {
                        return self.with_point(a);
                    }
                    if sb == 0 {
                        return self.with_point(b);
                    }
                    if sa < 0 && sb > 0 {
                        let next = self.intersect(a, b);
                        if next.width_bits() > cur_bits {
                            return next;
                        }
                        break;
                    }
                }
            }
        }
        self.bisect()
    }

    fn with_point(&self, x: (BigInt, u64)) -> RootEnclosure {
        RootEnclosure {
            lo: normalize(x.clone()),
            hi: normalize(x),
            poly: self.poly.clone(),
            kind: self.kind,
        }
    }

    fn intersect(&self, a: (BigInt, u64), b: (BigInt, u64)) -> RootEnclosure {
        let (la, aa, _) = common(&self.lo, &a);
        let lo = if aa > la { a } else { self.lo.clone() };
        let (hb, bb, _) = common(&self.hi, &b);
        let hi = if bb < hb { b } else { self.hi.clone() };
        RootEnclosure {
            lo: normalize(lo),
            hi: normalize(hi),
            poly: self.poly.clone(),
            kind: self.kind,
        }
    }

    fn bisect(&self) -> RootEnclosure {
        let (l, h, k) = common(&self.lo, &self.hi);
        let mid = (l + h, k + 1);
        match self.poly.sign_at_dyadic(&mid.0, mid.1) {
            0 => self.with_point(mid),
            s if s < 0 => RootEnclosure {
                lo: normalize(mid),
                ..self.clone()
            },
            _ => RootEnclosure {
                hi: normalize(mid),
                ..self.clone()
            },
        }
    }
}

fn normalize((mut m, mut k): (BigInt, u64)) -> (BigInt, u64) {
    if m.is_zero() {
        return (m, 0);
    }
    let tz = m.trailing_zeros().unwrap_or(0).min(k);
    m >>= tz;
    k -= tz;
    (m, k)
}

/// Isolates the requested positive root of `p` to width `<= prec.target_width`.
pub fn isolate_root(p: &IntPolynomial, kind: RootKind, prec: &Precision) -> Result<RootEnclosure> {
    let d = p.degree();
    if d == 0 || !p.leading().is_positive() {
        return Err(Error::IsolationFailed(
            "polynomial must have positive degree and leading coefficient".into(),
        ));
    }
    let one = Rational::one();
    if !p.eval(&one).is_negative() {
        return Err(Error::IsolationFailed("polynomial must be negative at 1".into()));
    }
    let max_abs = p.coeffs[..d].iter().map(|c| c.abs()).max().unwrap_or_default();
    let bound_int = BigInt::one() + num_integer::Integer::div_ceil(&max_abs, p.leading());
    let bound = rat_int(bound_int.clone());
    let sturm = Sturm::new(p);
    let total = sturm.count(&one, &bound);
    let mut lo = (BigInt::one(), 0u64);
    let mut hi = (bound_int, 0u64);
    match kind {
        RootKind::UniquePositive => {
            if total != 1 {
                return Err(Error::IsolationFailed(format!(
                    "expected exactly one root in (1, {bound}], found {total}"
                )));
            }
        }
        RootKind::LargestPositive => {
            if total == 0 {
                return Err(Error::IsolationFailed("no root above 1".into()));
            }
            // Shrink until (lo, hi] holds exactly one root and none lie above hi.
            loop {
                let lr = dyadic(lo.0.clone(), lo.1);
                let hr = dyadic(hi.0.clone(), hi.1);
                if sturm.count(&lr, &hr) == 1 && !p.eval(&lr).is_zero() {
                    break;
                }
                let (l, h, k) = common(&lo, &hi);
                let mid = normalize((l + h, k + 1));
                let mr = dyadic(mid.0.clone(), mid.1);
                let right = sturm.count(&mr, &hr);
                if right == 0 && p.eval(&mr).is_zero() {
                    let poly = Arc::new(p.clone());
                    return Ok(RootEnclosure { lo: mid.clone(), hi: mid, poly, kind });
                }
                if right >= 1 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let above = sturm.count(&dyadic(hi.0.clone(), hi.1), &bound);
            if above != 0 {
                return Err(Error::IsolationFailed("roots remain above the bracket".into()));
            }
        }
    }
    let lo_sign = p.sign_at_dyadic(&lo.0, lo.1);
    let hi_sign = p.sign_at_dyadic(&hi.0, hi.1);
    let poly = Arc::new(p.clone());
    if hi_sign == 0 {
        return Ok(RootEnclosure { lo: hi.clone(), hi, poly, kind });
    }
    if lo_sign >= 0 || hi_sign <= 0 {
        return Err(Error::IsolationFailed(
            "root of even multiplicity cannot be bracketed by signs".into(),
        ));
    }
    RootEnclosure { lo, hi, poly, kind }.refine(prec)
}

fn as_dyadic(q: &Rational) -> Option<(BigInt, u64)> {
    let den = q.denom();
    let k = den.bits() - 1;
    (den == &(BigInt::one() << k)).then(|| normalize((q.numer().clone(), k)))
}

/// Checks a claimed enclosure `[lo, hi]` of the largest positive root of `p`.
///
/// Both ends must be dyadic with `1 < lo <= hi`. A point must be a root with
/// no root above it; otherwise `p(lo) < 0 < p(hi)` and no root exceeds `hi`.
pub fn certify_largest_root(p: &IntPolynomial, lo: &Rational, hi: &Rational) -> Result<RootEnclosure> {
    let fail = |m: &str| Error::IsolationFailed(m.to_string());
    let (Some(l), Some(h)) = (as_dyadic(lo), as_dyadic(hi)) else {
        return Err(fail("root enclosure endpoints must be dyadic"));
    };
    if p.degree() == 0 || !p.leading().is_positive() {
        return Err(fail("polynomial must have positive degree and leading coefficient"));
    }
    if lo <= &Rational::one() || lo > hi {
        return Err(fail("need 1 < lo <= hi"));
    }
    let d = p.degree();
    let max_abs = p.coeffs[..d].iter().map(|c| c.abs()).max().unwrap_or_default();
    let bound = rat_int(BigInt::one() + num_integer::Integer::div_ceil(&max_abs, p.leading()));
    let sturm = Sturm::new(p);
    let sl = p.sign_at_dyadic(&l.0, l.1);
    let sh = p.sign_at_dyadic(&h.0, h.1);
    if lo == hi {
        if sl != 0 {
            return Err(fail("point enclosure is not a root"));
        }
    } else if sl >= 0 || sh <= 0 {
        return Err(fail("polynomial does not change sign across the enclosure"));
    }
    if hi < &bound && sturm.count(hi, &bound) != 0 {
        return Err(fail("a larger root lies above the enclosure"));
    }
    Ok(RootEnclosure {
        lo: l,
        hi: h,
        poly: Arc::new(p.clone()),
        kind: RootKind::LargestPositive,
    })
}

/// The root of `x^d - x^{d-1} - 1` in `(1, 2]`.
pub fn psi(d: usize, prec: &Precision) -> Result<RootEnclosure> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    isolate_root(
        &build_pw_tilde(&WeightVector::ones(d)?),
        RootKind::LargestPositive,
        prec,
    )
}

/// Decimal rendering of the enclosure midpoint, for display only.
pub fn approx(root: &RootEnclosure, digits: usize) -> String {
    crate::numeric::decimal_approx(&root.enclosure().midpoint(), digits)
}

/// Integer part of `hi`, rounded up: an upper bound on the root.
pub fn ceil_hi(root: &RootEnclosure) -> u64 {
    crate::numeric::ceil_int(&root.hi()).to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{parse_rational, rat};
    use proptest::prelude::*;

    fn wv(w: &[u64]) -> WeightVector {
        WeightVector::new(w.to_vec()).unwrap()
    }

    /// Bisection oracle on exact signs, independent of the Sturm/Newton path.
    fn bisect_oracle(p: &IntPolynomial, mut lo: Rational, mut hi: Rational, steps: u32) -> (Rational, Rational) {
        for _ in 0..steps {
            let mid = (&lo + &hi) / rat(2, 1);
            if p.eval(&mid).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![1, 0]).is_err());
        let w = WeightVector::parse("1,0,2,1").unwrap();
        assert_eq!((w.d(), w.max_weight(), w.sum()), (4, 2, 4));
        assert_eq!(w.to_string(), "(1,0,2,1)");
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, "[1,0,2,1]");
        assert!(serde_json::from_str::<WeightVector>("[1,0]").is_err());
    }

    #[test]
    fn build_examples() {
        assert_eq!(build_pw(&wv(&[1])), IntPolynomial::from_i64(&[-2, 1]));
        assert_eq!(build_pw(&wv(&[1, 1])), IntPolynomial::from_i64(&[-1, -1, 1]));
        // (x-1)(1 + 2x^2 + x^3) - 2x^3 expanded by hand
        assert_eq!(build_pw(&wv(&[1, 0, 2, 1])), IntPolynomial::from_i64(&[-1, 1, -2, -1, 1]));
        assert_eq!(build_pw_tilde(&wv(&[1, 0, 2, 1])), IntPolynomial::from_i64(&[-1, 1, -2, 0, 1]));
        assert_eq!(build_pw_tilde(&wv(&[1, 1, 1])), IntPolynomial::from_i64(&[-1, 0, -1, 1]));
        assert_eq!(build_pw_tilde(&wv(&[1])), IntPolynomial::from_i64(&[-2, 1]));
        assert_eq!(build_pw(&wv(&[1, 0, 2, 1])).to_string(), "x^4 - x^3 - 2x^2 + x - 1");
    }

    #[test]
    fn eval_examples() {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]);
        assert_eq!(eval_at(&p, &rat(2, 1)), rat(1, 1));
        assert_eq!(eval_at(&p, &rat(1, 1)), rat(-1, 1));
        assert_eq!(eval_at(&build_pw(&wv(&[1, 0, 2, 1])), &rat(2, 1)), rat(1, 1));
    }

    #[test]
    fn isolate_examples() {
        let prec = Precision::parse("1e-12").unwrap();
        let phi = isolate_root(&build_pw(&wv(&[1, 1])), RootKind::UniquePositive, &prec).unwrap();
        assert!(phi.width() <= *prec.target_width());
        assert!(!phi.enclosure().contains(&parse_rational("1.6180339887").unwrap()));
        assert!(phi.lo() > parse_rational("1.6180339887").unwrap());
        assert!(phi.hi() < parse_rational("1.6180339888").unwrap());

        let cw = isolate_root(&build_pw(&wv(&[1, 0, 2, 1])), RootKind::UniquePositive, &prec).unwrap();
        assert_eq!(approx(&cw, 3), "1.914");
        let ct = isolate_root(&build_pw_tilde(&wv(&[1, 0, 2, 1])), RootKind::LargestPositive, &prec).unwrap();
        assert_eq!(approx(&ct, 3), "1.345");

        let two = isolate_root(&build_pw(&wv(&[1])), RootKind::UniquePositive, &prec).unwrap();
        assert!(two.is_exact());
        assert_eq!(two.lo(), rat(2, 1));
    }

    #[test]
    fn psi_examples() {
        let prec = Precision::from_bits(50);
        assert_eq!(psi(1, &prec).unwrap().lo(), rat(2, 1));
        let p2 = psi(2, &prec).unwrap();
        // (1 + sqrt 5)/2 lies in [lo, hi] iff (2lo - 1)^2 <= 5 <= (2hi - 1)^2
        let sq = |x: Rational| {
            let y = x * rat(2, 1) - rat(1, 1);
            &y * &y
        };
        assert!(sq(p2.lo()) <= rat(5, 1) && rat(5, 1) <= sq(p2.hi()));
        let p3 = psi(3, &prec).unwrap();
        let cubic = IntPolynomial::from_i64(&[-1, 0, -1, 1]);
        let (olo, ohi) = bisect_oracle(&cubic, rat(1, 1), rat(2, 1), 60);
        assert!(p3.enclosure().intersects(&Enclosure::new(olo, ohi).unwrap()));
        assert_eq!(approx(&p3, 4), "1.4656");
    }

    #[test]
    fn supported_family_only() {
        let prec = Precision::from_bits(20);
        let positive_at_one = IntPolynomial::from_i64(&[1, 0, 1]);
        assert!(matches!(
            isolate_root(&positive_at_one, RootKind::UniquePositive, &prec),
            Err(Error::IsolationFailed(_))
        ));
        let negative_lead = IntPolynomial::from_i64(&[-1, 0, -1]);
        assert!(matches!(
            isolate_root(&negative_lead, RootKind::LargestPositive, &prec),
            Err(Error::IsolationFailed(_))
        ));
    }

    #[test]
    fn largest_root_with_several_positive_roots() {
        // (x - 3/2)(x - 2)(x - 4) scaled: 2x^3 - 15x^2 + 34x - 24, negative at 1.
        let p = IntPolynomial::from_i64(&[-24, 34, -15, 2]);
        let prec = Precision::from_bits(30);
        let r = isolate_root(&p, RootKind::LargestPositive, &prec).unwrap();
        assert!(r.enclosure().contains(&rat(4, 1)));
        assert!(matches!(
            isolate_root(&p, RootKind::UniquePositive, &prec),
            Err(Error::IsolationFailed(_))
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let prec = Precision::from_bits(4096).with_max_refinements(2);
        assert_eq!(
            isolate_root(&build_pw(&wv(&[1, 1])), RootKind::UniquePositive, &prec),
            Err(Error::PrecisionCapExceeded { budget: 2 })
        );
    }

    #[test]
    fn deep_refinement_is_fast_and_nested() {
        let base = psi(2, &Precision::from_bits(40)).unwrap();
        let deep = base.refine_to(200_000);
        assert!(base.enclosure().contains_enclosure(&deep.enclosure()));
        assert!(deep.width_bits() >= 200_000);
    }

    fn weights() -> impl Strategy<Value = WeightVector> {
        (prop::collection::vec(0u64..4, 0..4), 1u64..4).prop_map(|(mut w, last)| {
            w.push(last);
            WeightVector::new(w).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn values_at_one(w in weights()) {
            prop_assert_eq!(eval_at(&build_pw(&w), &rat(1, 1)), rat_int(-(w.max_weight() as i64)));
            prop_assert_eq!(eval_at(&build_pw_tilde(&w), &rat(1, 1)), rat(-1, 1));
        }

        #[test]
        fn enclosure_properties(w in weights()) {
            let prec = Precision::from_bits(24);
            let p = build_pw(&w);
            let r = isolate_root(&p, RootKind::UniquePositive, &prec).unwrap();
            prop_assert!(r.width() <= *prec.target_width());
            prop_assert!(r.lo() > rat(1, 1));
            prop_assert!(eval_at(&p, &r.lo()) <= Rational::zero());
            prop_assert!(eval_at(&p, &r.hi()) >= Rational::zero());
            let max_abs = p.coeffs()[..p.degree()].iter().map(|c| c.abs()).max().unwrap();
            prop_assert!(r.hi() <= rat(1, 1) + Rational::new(max_abs, p.leading().clone()));
            let finer = isolate_root(&p, RootKind::UniquePositive, &Precision::from_bits(48)).unwrap();
            prop_assert!(r.enclosure().contains_enclosure(&finer.enclosure()));
            // c_w >= 2 iff sum 2^j w_j <= 2^{d-1} W
            let s: u64 = w.weights().iter().enumerate().map(|(j, &x)| x << j).sum();
            let pred = s <= (w.max_weight() << (w.d() - 1));
            prop_assert_eq!(pred, r.hi() >= rat(2, 1));
            prop_assert_eq!(pred, eval_at(&p, &rat(2, 1)) <= Rational::zero());
        }

        #[test]
        fn zero_one_weights_agree(bits in prop::collection::vec(0u64..2, 0..5)) {
            let mut w = bits;
            w.push(1);
            let w = WeightVector::new(w).unwrap();
            let prec = Precision::from_bits(30);
            let a = isolate_root(&build_pw(&w), RootKind::UniquePositive, &prec).unwrap();
            let b = isolate_root(&build_pw_tilde(&w), RootKind::LargestPositive, &prec).unwrap();
            prop_assert!(a.enclosure().intersects(&b.enclosure()));
        }
    }
}
