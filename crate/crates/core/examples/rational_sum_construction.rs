//! Builds a doubly exponential sequence whose weighted series is pinned to a
//! rational target, then checks the resulting certificate.

use rapidseries::charpoly::WeightVector;
use rapidseries::construct::{construct, verify_certificate};
use rapidseries::enclosure::Precision;
use rapidseries::numeric::{decimal_approx, ilog2, qsub, rat};

fn main() -> rapidseries::Result<()> {
    let w = WeightVector::parse("1,1")?;
    let (series, cert) = construct(&w, &rat(3, 2), None, 15, &Precision::default())?;

    println!("target      {}", decimal_approx(&series.target, 30));
    println!("covering checked from M = {}; terms kept from index {}", series.m, series.first_kept);
    for (i, t) in series.terms.iter().enumerate() {
        println!("a_{:<2} has {:>7} bits", i + 1, t.bits());
    }
    for r in &series.ledger {
        let width = qsub(r.upper.hi(), r.lower.lo());
        println!("bracket at n = {:>2}: width <= 2^{} ({} bits)", r.n, ilog2(&width) + 1, r.bits);
    }
    println!("verifier: {:?}", verify_certificate(&cert)?);
    Ok(())
}
