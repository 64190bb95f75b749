use num_bigint::BigInt;
use proptest::prelude::*;

use rapidseries::charpoly::WeightVector;
use rapidseries::construct::{attainable_interval, construct, find_m, verify_certificate, Certificate, Schedule, Verdict};
use rapidseries::enclosure::Precision;
use rapidseries::numeric::{fmt_rational, parse_rational, qadd, qcmp, qmul, qsub, rat, Rational};
use rapidseries::Error;

fn build(w: &str, c: &str, depth: usize) -> Certificate {
    let w = WeightVector::parse(w).unwrap();
    construct(&w, &parse_rational(c).unwrap(), None, depth, &Precision::default())
        .unwrap()
        .1
}

fn reason(cert: &Certificate) -> String {
    match verify_certificate(cert).unwrap() {
        Verdict::Invalid(r) => r,
        v => panic!("expected an invalid verdict, got {v:?}"),
    }
}

#[test]
fn untouched_certificate_is_valid_after_round_trip() {
    let cert = build("1,1", "2", 12);
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    assert_eq!(verify_certificate(&back).unwrap(), Verdict::Valid);
}

#[test]
fn term_below_its_window_breaks_schedule_membership() {
    let mut cert = build("1", "2", 12);
    let w = WeightVector::parse("1").unwrap();
    let s = Schedule::new(w, rat(2, 1), &Precision::default()).unwrap();
    let i = cert.terms.len() - 1;
    let (beta, _) = s.bounds(i + 1).unwrap();
    cert.terms[i] = (beta - BigInt::from(1)).to_string();
    assert_eq!(reason(&cert), "schedule-membership");
}

#[test]
fn moved_target_breaks_bracket_containment() {
    let mut cert = build("1,1", "3/2", 12);
    let x = parse_rational(&cert.target).unwrap();
    let shifted = fmt_rational(&qadd(&x, &parse_rational("1e-15").unwrap()));
    cert.target = shifted.clone();
    cert.repair.repaired_target = fmt_rational(&qadd(
        &parse_rational(&shifted).unwrap(),
        &parse_rational(&cert.repair.sum_shift).unwrap(),
    ));
    assert_eq!(reason(&cert), "bracket-containment");
}

#[test]
fn wrong_root_enclosure_is_rejected() {
    let mut cert = build("1,1", "2", 12);
    cert.c_tilde.hi = "2".into();
    cert.c_tilde.lo = "15/8".into();
    assert_eq!(reason(&cert), "c-tilde");
}

#[test]
fn out_of_order_terms_fail_monotonicity() {
    let mut cert = build("1", "2", 12);
    let n = cert.terms.len();
    cert.terms.swap(n - 2, n - 1);
    assert_eq!(reason(&cert), "monotonicity");
}

#[test]
fn shortened_covering_claim_is_rejected() {
    let mut cert = build("1", "2", 12);
    cert.covering_horizon = cert.terms.len();
    assert_eq!(reason(&cert), "covering");
}

#[test]
fn forged_bracket_fails_ledger_recomputation() {
    let mut cert = build("1,1", "2", 12);
    let b = cert.brackets.last_mut().unwrap();
    b.upper.hi = b.upper.lo.clone();
    assert_eq!(reason(&cert), "ledger-mismatch");
}

#[test]
fn unknown_fields_and_versions_are_malformed() {
    let cert = build("1", "2", 12);
    let mut doc: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
    doc["extra"] = serde_json::json!(1);
    assert!(matches!(
        Certificate::from_json(&doc.to_string()),
        Err(Error::MalformedCertificate(_))
    ));
    let mut bumped = cert.clone();
    bumped.version += 1;
    assert!(matches!(verify_certificate(&bumped), Err(Error::MalformedCertificate(_))));
}

#[test]
fn explicit_target_outside_the_interval_is_refused() {
    let w = WeightVector::parse("1").unwrap();
    let err = construct(&w, &rat(2, 1), Some(rat(1, 15)), 12, &Precision::default()).unwrap_err();
    assert_eq!(err, Error::TargetOutsideRange);
}

fn interior_point(w: &str, c: &str, depth: usize, t: &Rational) -> Rational {
    let w = WeightVector::parse(w).unwrap();
    let horizon = depth + w.d();
    let s = Schedule::new(w, parse_rational(c).unwrap(), &Precision::default()).unwrap();
    let m = find_m(&s, horizon).unwrap().unwrap();
    let (lower, upper) = attainable_interval(&s, m, &Precision::default()).unwrap();
    let span = qsub(upper.hi(), lower.lo());
    qadd(lower.lo(), &qmul(&span, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn interior_targets_verify(num in 1i64..99) {
        let x = interior_point("1,1", "2", 12, &rat(num, 100));
        let w = WeightVector::parse("1,1").unwrap();
        let (series, cert) = construct(&w, &rat(2, 1), Some(x.clone()), 12, &Precision::default()).unwrap();
        prop_assert_eq!(verify_certificate(&cert).unwrap(), Verdict::Valid);
        prop_assert!(series.terms.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(series.terms.iter().all(|t| t > &BigInt::from(0)));
        for r in &series.ledger {
            prop_assert!(qcmp(r.lower.hi(), &series.repaired_target).is_le());
            prop_assert!(qcmp(&series.repaired_target, r.upper.lo()).is_le());
        }
    }
}
