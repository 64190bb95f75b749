//! Normalized logarithms, peak indices and the local peak inequality.

use std::sync::Arc;

use rapidseries::charpoly::{build_pw, isolate_root, RootKind, WeightVector};
use rapidseries::diagnostics::{local_peak_check, peaks, GrowthBase, LocalPeakVerdict, MuSequence};
use rapidseries::enclosure::Precision;
use rapidseries::numeric::{decimal_approx, rat};
use rapidseries::series::{Numerators, Sequence, WeightedSeriesInstance};

fn main() -> rapidseries::Result<()> {
    let w = WeightVector::parse("1,1")?;
    let seq = Arc::new(Sequence::power_tower(2, rat(2, 1))?);
    let inst = WeightedSeriesInstance::new(Arc::clone(&seq), Numerators::One, w.clone());
    let c = isolate_root(&build_pw(&w), RootKind::UniquePositive, &Precision::from_bits(64))?;
    let mus = MuSequence::compute(seq, GrowthBase::Root(c), 11, &Precision::from_bits(96))?;

    for (i, m) in mus.values().iter().enumerate() {
        println!("mu_{:<2} ~ {}", i + 1, decimal_approx(&m.midpoint(), 8));
    }
    let set = peaks(&mus, 10)?;
    println!("peaks up to 10: {:?} (undecided {:?})", set.indices, set.undecided);

    let mut tally = [0usize; 4];
    for p in 1..=10 {
        for q in p..=10 {
            let slot = match local_peak_check(&inst, p, q, &mus)? {
                LocalPeakVerdict::Holds => 0,
                LocalPeakVerdict::Fails => 1,
                LocalPeakVerdict::HypothesisNotMet => 2,
                LocalPeakVerdict::Undecided => 3,
            };
            tally[slot] += 1;
        }
    }
    println!(
        "local peaks: {} hold, {} fail, {} without hypothesis, {} undecided",
        tally[0], tally[1], tally[2], tally[3]
    );
    Ok(())
}
