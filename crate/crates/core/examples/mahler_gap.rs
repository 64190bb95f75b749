//! The scaled tail D_N r_N under both multipliers.

use rapidseries::charpoly::WeightVector;
use rapidseries::diagnostics::{mahler_gap, GapMultiplier};
use rapidseries::enclosure::Precision;
use rapidseries::numeric::{decimal_approx, ilog2, rat};
use rapidseries::series::{Sequence, WeightedSeriesInstance};

fn main() -> rapidseries::Result<()> {
    let prec = Precision::from_bits(64);

    // A rational sum: the lcm multiplier pins the gap at exactly 1.
    let geo = WeightedSeriesInstance::unit(Sequence::geometric(2)?, WeightVector::parse("1")?);
    for n in [1, 5, 10, 20] {
        let lcm = mahler_gap(&geo, n, GapMultiplier::Lcm, &prec)?;
        let prod = mahler_gap(&geo, n, GapMultiplier::Product, &prec)?;
        println!(
            "2^n, N = {n:>2}: lcm gap {}, product gap 2^{}",
            decimal_approx(lcm.gap.lo(), 0),
            ilog2(prod.gap.lo())
        );
    }

    // Doubly exponential growth beyond the threshold: the gap collapses.
    let tower = WeightedSeriesInstance::unit(Sequence::power_tower(2, rat(3, 1))?, WeightVector::parse("1,1")?);
    for n in 2..=8 {
        let r = mahler_gap(&tower, n, GapMultiplier::Product, &prec)?;
        println!(
            "2^(3^n), N = {n}: D_N has {:>6} bits, gap <= 2^{:<7} integral: {}",
            r.d_n.bits(),
            ilog2(r.gap.hi()) + 1,
            r.integrality_ok
        );
    }
    Ok(())
}
