//! Checks the growth hypothesis `x_n >= n^(1+tau)` and the numerator bound
//! `b_n <= n^eta` on a finite horizon.

use std::sync::Arc;

use rapidseries::charpoly::WeightVector;
use rapidseries::numeric::rat;
use rapidseries::series::{Numerators, Sequence, WeightedSeriesInstance};

fn main() -> rapidseries::Result<()> {
    let (eta, tau) = (rat(1, 4), rat(1, 2));

    let pair = WeightedSeriesInstance::unit(Sequence::identity(), WeightVector::parse("1,1")?);
    let r = pair.check_hypotheses(&eta, &tau, 10_000)?;
    println!("w=(1,1), a_n = n: {} violations up to 10^4", r.violations.len());

    let single = WeightedSeriesInstance::unit(Sequence::identity(), WeightVector::parse("1")?);
    let r = single.check_hypotheses(&eta, &tau, 100)?;
    println!(
        "w=(1), a_n = n: {} violations, first {:?}, last {:?}",
        r.violations.len(),
        r.violations.first(),
        r.violations.last()
    );

    // Numerators growing like n break the eta bound from n = 2 on.
    let b = Numerators::Sequence(Arc::new(Sequence::identity()));
    let with_b = WeightedSeriesInstance::new(Arc::new(Sequence::geometric(2)?), b, WeightVector::parse("1,1")?);
    let r = with_b.check_hypotheses(&eta, &tau, 20)?;
    println!("b_n = n over a_n = 2^n: numerator violations {:?}", r.b_violations);
    Ok(())
}
