//! Partial sums against certified tails: the Sylvester series telescopes to 1,
//! so the exact tail after N terms is 1/(s_{N+1} - 1).

use num_traits::One;
use rapidseries::charpoly::WeightVector;
use rapidseries::numeric::{ilog2, qsub, Rational};
use rapidseries::series::{sylvester, Sequence, WeightedSeriesInstance};

fn main() -> rapidseries::Result<()> {
    let inst = WeightedSeriesInstance::unit(Sequence::sylvester(), WeightVector::parse("1")?);
    println!("{:>3} {:>14} {:>14} {:>14}", "N", "log2 exact", "log2 lower", "log2 upper");
    for n in 1..=9 {
        let exact = qsub(&Rational::one(), &inst.partial_sum(n)?);
        let oracle = Rational::new(1.into(), sylvester(n + 1)? - 1);
        assert_eq!(exact, oracle);
        let tail = inst.tail_enclosure(n)?;
        assert!(tail.contains(&exact));
        println!("{n:>3} {:>14} {:>14} {:>14}", ilog2(&exact), ilog2(tail.lo()), ilog2(tail.hi()));
    }
    Ok(())
}
