//! Encloses weighted reciprocal series to a requested width.

use rapidseries::charpoly::WeightVector;
use rapidseries::enclosure::Precision;
use rapidseries::numeric::decimal_approx;
use rapidseries::series::{Sequence, WeightedSeriesInstance};

fn show(label: &str, inst: &WeightedSeriesInstance, prec: &str) -> rapidseries::Result<()> {
    let ev = inst.eval_series(&Precision::parse(prec)?)?;
    let e = &ev.enclosure;
    println!("{label}: {} after {} terms", decimal_approx(&e.midpoint(), 40), ev.terms);
    println!("    width {}", decimal_approx(&e.width(), 45));
    Ok(())
}

fn main() -> rapidseries::Result<()> {
    let one = WeightVector::parse("1")?;
    let pair = WeightVector::parse("1,1")?;

    show("sum 1/2^n", &WeightedSeriesInstance::unit(Sequence::geometric(2)?, one.clone()), "1e-30")?;
    show("sum 1/(2^(n-1) 2^n)", &WeightedSeriesInstance::unit(Sequence::geometric(2)?, pair), "1e-30")?;
    show("sum 1/s_n (Sylvester)", &WeightedSeriesInstance::unit(Sequence::sylvester(), one.clone()), "1e-100")?;

    let tower = Sequence::power_tower(2, rapidseries::numeric::rat(3, 2))?;
    show("sum 2^-floor(1.5^n)", &WeightedSeriesInstance::unit(tower, one), "1e-20")?;
    Ok(())
}
