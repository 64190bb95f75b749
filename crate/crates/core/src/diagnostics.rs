//! Finite quantities behind the irrationality argument: the normalized
//! logarithms `mu_n = ln a_n / c^n`, the peak set with `delta_n = 1/n^2`,
//! the local-peak inequality, and the Mahler gap `D_N r_N`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::charpoly::RootEnclosure;
use crate::enclosure::{exp_enclosure, ln_enclosure, Decision, Enclosure, Precision};
use crate::error::{Error, Result};
use crate::numeric::{ceil_int, pow_int, pow_rat, qcmp, qmax, rat, rat_int, Rational};
use crate::series::{Sequence, WeightedSeriesInstance};

/// The base `c` in `mu_n = ln a_n / c^n`: an exact rational or a certified root.
#[derive(Clone, Debug)]
pub enum GrowthBase {
    Exact(Rational),
    Root(RootEnclosure),
}

impl GrowthBase {
    fn lower(&self) -> Rational {
        match self {
            GrowthBase::Exact(c) => c.clone(),
            GrowthBase::Root(r) => r.lo(),
        }
    }

    /// Enclosure of `c^n` with relative error well below `2^-bits`.
    fn power(&self, n: usize, bits: u64) -> Enclosure {
        match self {
            GrowthBase::Exact(c) => Enclosure::point(pow_rat(c, n as u64)),
            GrowthBase::Root(r) => {
                let per = ceil_int(&r.hi()).bits().max(1);
                let need = bits + n as u64 * per + 16;
                let r = if r.is_exact() { r.clone() } else { r.refine_to(need) };
                r.enclosure().pow_rounded(n as u64, need)
            }
        }
    }
}

impl From<Rational> for GrowthBase {
    fn from(c: Rational) -> Self {
        GrowthBase::Exact(c)
    }
}

impl From<RootEnclosure> for GrowthBase {
    fn from(r: RootEnclosure) -> Self {
        GrowthBase::Root(r)
    }
}

/// Encloses `mu_n = ln a_n / c^n`.
pub fn mu(seq: &Sequence, base: &GrowthBase, n: usize, prec: &Precision) -> Result<Enclosure> {
    if qcmp(&base.lower(), &Rational::one()).is_le() {
        return Err(Error::PreconditionViolated("growth base must exceed 1".into()));
    }
    let a = seq.term(n)?;
    let bits = prec.bits();
    let ln = ln_enclosure(&Enclosure::from_int(a), &Precision::from_bits(bits + 8))?;
    let cn = base.power(n, bits + 8);
    Ok(ln.div(&cn)?.round_outward(bits + 4))
}

/// `exp(ln a_n / c^n)`, which tends to the growth constant for double-exponential sequences.
pub fn growth_exponent(seq: &Sequence, base: &GrowthBase, n: usize, prec: &Precision) -> Result<Enclosure> {
    let m = mu(seq, base, n, &Precision::from_bits(prec.bits() + 8))?;
    exp_enclosure(&m, prec).map(|e| e.round_outward(prec.bits() + 4))
}

/// `mu_1, ..., mu_h` together with what is needed to recompute them more precisely.
#[derive(Clone, Debug)]
pub struct MuSequence {
    base: Option<GrowthBase>,
    source: Option<Arc<Sequence>>,
    values: Vec<Enclosure>,
    bits: u64,
}

impl MuSequence {
    pub fn compute(seq: Arc<Sequence>, base: GrowthBase, horizon: usize, prec: &Precision) -> Result<Self> {
        let values = (1..=horizon)
            .map(|n| mu(&seq, &base, n, prec))
            .collect::<Result<Vec<_>>>()?;
        Ok(MuSequence {
            base: Some(base),
            source: Some(seq),
            values,
            bits: prec.bits(),
        })
    }

    /// Values supplied directly; refinement leaves them unchanged.
    pub fn from_values(values: Vec<Enclosure>) -> Self {
        MuSequence {
            base: None,
            source: None,
            values,
            bits: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `mu_n`, 1-indexed.
    pub fn get(&self, n: usize) -> Result<&Enclosure> {
        if n == 0 || n > self.values.len() {
            return Err(Error::IndexBeyondHorizon {
                index: n,
                horizon: self.values.len(),
            });
        }
        Ok(&self.values[n - 1])
    }

    pub fn values(&self) -> &[Enclosure] {
        &self.values
    }

    pub fn base(&self) -> Option<&GrowthBase> {
        self.base.as_ref()
    }

    /// The same values at twice the working precision.
    pub fn refined(&self) -> Result<Self> {
        match (&self.source, &self.base) {
            (Some(seq), Some(base)) => Self::compute(
                Arc::clone(seq),
                base.clone(),
                self.values.len(),
                &Precision::from_bits(self.bits * 2),
            ),
            _ => Ok(self.clone()),
        }
    }

    /// Three-valued `mu_{top} > (1 + 1/m^2) max_{lo <= k <= m} mu_k`.
    fn peak_predicate(&self, lo: usize, m: usize, top: usize) -> Result<Decision> {
        let mut hi_max = self.get(lo)?.clone();
        for k in lo + 1..=m {
            let v = self.get(k)?;
            hi_max = Enclosure::new(qmax(hi_max.lo().clone(), v.lo().clone()), qmax(hi_max.hi().clone(), v.hi().clone()))?;
        }
        let factor = Enclosure::point(Rational::one() + rat(1, (m * m) as i64));
        Ok(self.get(top)?.gt(&(&factor * &hi_max)))
    }
}

/// The certified peak set `{m : mu_{m+1} > (1 + 1/m^2) max_{n <= m} mu_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    /// Indices whose predicate stayed undecided after one precision doubling.
    pub undecided: Vec<usize>,
    pub horizon: usize,
    pub delta: &'static str,
}

pub fn peaks(mus: &MuSequence, horizon: usize) -> Result<PeakSet> {
    if horizon > mus.len() {
        return Err(Error::IndexBeyondHorizon {
            index: horizon,
            horizon: mus.len(),
        });
    }
    let mut indices = Vec::new();
    let mut open = Vec::new();
    for m in 1..horizon {
        match mus.peak_predicate(1, m, m + 1)? {
            Decision::True => indices.push(m),
            Decision::False => {}
            Decision::Undecided => open.push(m),
        }
    }
    let mut undecided = Vec::new();
    if !open.is_empty() {
        let finer = mus.refined()?;
        for m in open {
            match finer.peak_predicate(1, m, m + 1)? {
                Decision::True => indices.push(m),
                Decision::False => {}
                Decision::Undecided => undecided.push(m),
            }
        }
        indices.sort_unstable();
    }
    Ok(PeakSet {
        indices,
        undecided,
        horizon,
        delta: "1/n^2",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalPeakVerdict {
    Holds,
    Fails,
    HypothesisNotMet,
    Undecided,
}

/// Checks `(a_P ... a_Q)^W / x_{Q+1} <= a_{Q+1}^{-1/(Q^2+1)}` at a local peak.
///
/// The peak hypothesis `mu_{Q+1} > (1 + 1/Q^2) max_{P <= k <= Q} mu_k` is
/// certified first. The conclusion is decided by the integer comparison
/// `(a_P ... a_Q)^{W (Q^2+1)} a_{Q+1} <= x_{Q+1}^{Q^2+1}`.
pub fn local_peak_check(inst: &WeightedSeriesInstance, p: usize, q: usize, mus: &MuSequence) -> Result<LocalPeakVerdict> {
    let d = inst.d();
    if p == 0 || q + 2 < p + d || q < p {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= P <= Q and Q >= P + d - 2 (P = {p}, Q = {q}, d = {d})"
        )));
    }
    let mut decision = mus.peak_predicate(p, q, q + 1)?;
    if decision == Decision::Undecided {
        decision = mus.refined()?.peak_predicate(p, q, q + 1)?;
    }
    match decision {
        Decision::False => return Ok(LocalPeakVerdict::HypothesisNotMet),
        Decision::Undecided => return Ok(LocalPeakVerdict::Undecided),
        Decision::True => {}
    }
    let e = (q * q + 1) as u64;
    let w_max = inst.w().max_weight();
    let mut block = BigInt::one();
    for k in p..=q {
        block *= inst.a().term(k)?;
    }
    let lhs = pow_int(&block, w_max * e) * inst.a().term(q + 1)?;
    let rhs = pow_int(&inst.term_xn(q + 1)?, e);
    Ok(if lhs <= rhs {
        LocalPeakVerdict::Holds
    } else {
        LocalPeakVerdict::Fails
    })
}

/// How the Mahler multiplier `D_N` clears the denominators of the first `N` terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMultiplier {
    /// `D_N = prod_{k <= N} a_k^W`.
    #[default]
    Product,
    /// `D_N = lcm(x_d, ..., x_N)`, the smallest multiplier that works.
    Lcm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MahlerGapReport {
    pub n: usize,
    pub multiplier: GapMultiplier,
    pub d_n: BigInt,
    /// Encloses `D_N r_N`.
    pub gap: Enclosure,
    /// Whether `D_N` times the `N`-th partial sum is an integer.
    pub integrality_ok: bool,
}

pub fn mahler_multiplier(inst: &WeightedSeriesInstance, n: usize, kind: GapMultiplier) -> Result<BigInt> {
    match kind {
        GapMultiplier::Product => {
            let w = inst.w().max_weight();
            let mut d = BigInt::one();
            for k in 1..=n {
                d *= pow_int(&inst.a().term(k)?, w);
            }
            Ok(d)
        }
        GapMultiplier::Lcm => {
            let mut d = BigInt::one();
            for k in inst.d()..=n {
                d = d.lcm(&inst.term_xn(k)?);
            }
            Ok(d)
        }
    }
}

/// `D_N`, an enclosure of `D_N r_N`, and the integrality of `D_N S_N`.
pub fn mahler_gap(inst: &WeightedSeriesInstance, n: usize, kind: GapMultiplier, prec: &Precision) -> Result<MahlerGapReport> {
    let tail = inst.tail_enclosure(n)?;
    let d_n = mahler_multiplier(inst, n, kind)?;
    let scale = Enclosure::point(rat_int(d_n.clone()));
    let mut gap = &scale * &tail;
    if !gap.is_point() {
        gap = gap.round_outward_relative(prec.bits() + 8);
    }

    let mut divides = true;
    for k in inst.d()..=n {
        if !(&d_n % inst.term_xn(k)?).is_zero() {
            divides = false;
            break;
        }
    }
    let integrality_ok = divides || (rat_int(d_n.clone()) * inst.partial_sum(n)?).is_integer();
    Ok(MahlerGapReport {
        n,
        multiplier: kind,
        d_n,
        gap,
        integrality_ok,
    })
}

/// Bit length of `D_N`, convenient for reports.
pub fn multiplier_bits(report: &MahlerGapReport) -> u64 {
    report.d_n.bits()
}

/// Upper bound on `|v - target|` over the enclosure.
pub fn distance_upper(e: &Enclosure, target: &Rational) -> Rational {
    let a = (e.lo() - target).abs();
    let b = (e.hi() - target).abs();
    qmax(a, b)
}

/// Number of decimal digits the enclosure determines, for display.
pub fn agreeing_digits(e: &Enclosure) -> usize {
    let w = e.width();
    if w.is_zero() {
        return usize::MAX;
    }
    let mut digits = 0usize;
    let mut scale = w;
    while qcmp(&scale, &Rational::one()).is_lt() && digits < 10_000 {
        scale *= rat(10, 1);
        digits += 1;
    }
    digits.saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::{build_pw, isolate_root, RootKind, WeightVector};
    use crate::numeric::parse_rational;
    use proptest::prelude::*;

    fn wv(w: &[u64]) -> WeightVector {
        WeightVector::new(w.to_vec()).unwrap()
    }

    fn tower(base: u64, k: i64) -> Arc<Sequence> {
        Arc::new(Sequence::power_tower(base, rat(k, 1)).unwrap())
    }

    fn exact(values: impl Iterator<Item = i64>) -> MuSequence {
        MuSequence::from_values(values.map(|v| Enclosure::point(rat(v, 1))).collect())
    }

    #[test]
    fn mu_examples() {
        let prec = Precision::from_bits(80);
        let base = GrowthBase::Exact(rat(2, 1));
        let ln2_lo = parse_rational("0.69314718055994").unwrap();
        let ln2_hi = parse_rational("0.69314718055995").unwrap();
        for n in 1..8 {
            let m = mu(&tower(2, 2), &base, n, &prec).unwrap();
            assert!(m.lo() >= &ln2_lo && m.hi() <= &ln2_hi, "n = {n}: {m}");
        }
        let seq = Sequence::explicit(vec![BigInt::from(2)]).unwrap();
        let m = mu(&seq, &base, 1, &prec).unwrap();
        // (ln 2) / 2 = 0.3465735902799726547...
        assert!(distance_upper(&m, &parse_rational("0.3465735902799726547").unwrap()) < rat(1, 100_000_000_000_000));
        let ones = Sequence::explicit(vec![BigInt::one(); 3]).unwrap();
        assert_eq!(mu(&ones, &base, 2, &prec).unwrap(), Enclosure::point(Rational::zero()));
        assert!(mu(&ones, &GrowthBase::Exact(rat(1, 1)), 1, &prec).is_err());
    }

    #[test]
    fn mu_reconstructs_terms() {
        let prec = Precision::from_bits(64);
        let root = isolate_root(&build_pw(&wv(&[1, 1])), RootKind::UniquePositive, &prec).unwrap();
        let base = GrowthBase::Root(root);
        let seq = tower(2, 2);
        for n in 1..6 {
            let m = mu(&seq, &base, n, &prec).unwrap();
            let cn = base.power(n, 96);
            let back = exp_enclosure(&(&cn * &m), &Precision::from_bits(64)).unwrap();
            assert!(back.contains(&rat_int(seq.term(n).unwrap())), "n = {n}");
        }
    }

    #[test]
    fn peaks_examples() {
        let linear = exact(1..=10);
        assert_eq!(peaks(&linear, 10).unwrap().indices, (2..10).collect::<Vec<_>>());
        let flat = exact(std::iter::repeat_n(5, 10));
        assert!(peaks(&flat, 10).unwrap().indices.is_empty());
        // m = 1 gives mu_2 = 4 against (1 + 1) * 2 = 4, which is not strict.
        let doubling = exact((1..=10).map(|n| 1i64 << n));
        assert_eq!(peaks(&doubling, 10).unwrap().indices, (2..10).collect::<Vec<_>>());
        let tripling = exact((1..=10).map(|n| 3i64.pow(n)));
        assert_eq!(peaks(&tripling, 10).unwrap().indices, (1..10).collect::<Vec<_>>());
        assert!(peaks(&linear, 11).is_err());
    }

    #[test]
    fn overlapping_enclosures_are_undecided() {
        let vals = vec![
            Enclosure::point(rat(1, 1)),
            Enclosure::new(rat(19, 10), rat(21, 10)).unwrap(),
        ];
        let set = peaks(&MuSequence::from_values(vals), 2).unwrap();
        assert!(set.indices.is_empty());
        assert_eq!(set.undecided, vec![1]);
    }

    #[test]
    fn peaks_survive_refinement() {
        let prec = Precision::from_bits(48);
        let root = isolate_root(&build_pw(&wv(&[1, 1])), RootKind::UniquePositive, &prec).unwrap();
        let mus = MuSequence::compute(tower(2, 2), GrowthBase::Root(root), 12, &prec).unwrap();
        let set = peaks(&mus, 12).unwrap();
        assert!(!set.indices.is_empty());
        let finer = mus.refined().unwrap();
        for &m in &set.indices {
            assert_eq!(finer.peak_predicate(1, m, m + 1).unwrap(), Decision::True);
        }
    }

    #[test]
    fn local_peak_examples() {
        let inst = WeightedSeriesInstance::unit(Sequence::power_tower(2, rat(2, 1)).unwrap(), wv(&[1, 1]));
        let prec = Precision::from_bits(64);
        let root = isolate_root(&build_pw(&wv(&[1, 1])), RootKind::UniquePositive, &prec).unwrap();
        let mus = MuSequence::compute(tower(2, 2), GrowthBase::Root(root), 6, &prec).unwrap();
        assert_eq!(local_peak_check(&inst, 1, 3, &mus).unwrap(), LocalPeakVerdict::Holds);
        let flat = exact(std::iter::repeat_n(1, 6));
        assert_eq!(local_peak_check(&inst, 1, 3, &flat).unwrap(), LocalPeakVerdict::HypothesisNotMet);
        let inst3 = WeightedSeriesInstance::unit(Sequence::power_tower(2, rat(2, 1)).unwrap(), wv(&[1, 1, 1]));
        assert!(matches!(
            local_peak_check(&inst3, 3, 3, &mus),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn local_peak_exact_form() {
        // (a_1 a_2 a_3)^{10} a_4 = 2^156 and x_4^{10} = 2^240.
        let a = |n: u32| BigInt::one() << (1u32 << n);
        let lhs = pow_int(&(a(1) * a(2) * a(3)), 10) * a(4);
        let rhs = pow_int(&(a(3) * a(4)), 10);
        assert_eq!((lhs.bits() - 1, rhs.bits() - 1), (156, 240));
    }

    #[test]
    fn mahler_examples() {
        let prec = Precision::from_bits(64);
        let geo = WeightedSeriesInstance::unit(Sequence::geometric(2).unwrap(), wv(&[1]));
        for n in 1..=20 {
            let r = mahler_gap(&geo, n, GapMultiplier::Lcm, &prec).unwrap();
            assert_eq!(r.d_n, BigInt::one() << n);
            assert_eq!(r.gap, Enclosure::point(rat(1, 1)));
            assert!(r.integrality_ok);
            let p = mahler_gap(&geo, n, GapMultiplier::Product, &prec).unwrap();
            assert_eq!(p.d_n, BigInt::one() << (n * (n + 1) / 2));
            assert!(p.integrality_ok);
        }
        let syl = WeightedSeriesInstance::unit(Sequence::sylvester(), wv(&[1]));
        let r = mahler_gap(&syl, 3, GapMultiplier::Product, &prec).unwrap();
        assert_eq!(r.d_n, BigInt::from(42));
        assert!(r.gap.contains(&rat(1, 1)));
        assert!(r.integrality_ok);

        let fast = WeightedSeriesInstance::unit(Sequence::power_tower(2, rat(3, 1)).unwrap(), wv(&[1, 1]));
        let mut prev: Option<Rational> = None;
        for n in 2..=8 {
            let r = mahler_gap(&fast, n, GapMultiplier::Product, &prec).unwrap();
            assert!(r.integrality_ok);
            if let Some(p) = &prev {
                assert!(qcmp(r.gap.hi(), p).is_lt(), "N = {n}");
            }
            prev = Some(r.gap.hi().clone());
        }
        assert!(qcmp(prev.as_ref().unwrap(), &rat(1, 1000)).is_lt());
    }

    #[test]
    fn growth_exponent_examples() {
        let prec = Precision::from_bits(64);
        let two = GrowthBase::Exact(rat(2, 1));
        for n in 1..10 {
            assert!(growth_exponent(&tower(2, 2), &two, n, &prec).unwrap().contains(&rat(2, 1)));
        }
        let g = growth_exponent(&Sequence::identity(), &two, 4, &prec).unwrap();
        // 4^(1/16) = 1.0905077326652576592...
        let oracle = parse_rational("1.0905077326652576592").unwrap();
        assert!(distance_upper(&g, &oracle) < rat(1, 1_000_000_000_000));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn exact_power_identity(b in 2u64..6, k in 2i64..4, n in 1usize..7) {
            let seq = tower(b, k);
            let g = growth_exponent(&seq, &GrowthBase::Exact(rat(k, 1)), n, &Precision::from_bits(48)).unwrap();
            prop_assert!(g.contains(&rat(b as i64, 1)));
        }

        #[test]
        fn product_multiplier_clears_partial_sums(start in 2i64..50, n in 1usize..12) {
            let terms: Vec<BigInt> = (0..14).map(|i| BigInt::from(start) * BigInt::from(3).pow(i as u32) + i).collect();
            let inst = WeightedSeriesInstance::unit(Sequence::explicit(terms).unwrap(), wv(&[1, 2]));
            let n = n.max(2);
            let d = mahler_multiplier(&inst, n, GapMultiplier::Product).unwrap();
            let s = inst.partial_sum(n).unwrap();
            prop_assert!((rat_int(d) * &s).is_integer());
            prop_assert!(!s.is_negative());
        }
    }
}
