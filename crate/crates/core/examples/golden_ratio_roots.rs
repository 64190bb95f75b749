//! Isolates the characteristic roots of a few weight vectors.
//!
//! ```text
//! cargo run --example golden_ratio_roots
//! ```

use rapidseries::charpoly::{approx, build_pw, build_pw_tilde, isolate_root, psi, RootKind, WeightVector};
use rapidseries::enclosure::Precision;

fn main() -> rapidseries::Result<()> {
    let prec = Precision::parse("1e-12")?;

    for w in ["1", "1,1", "1,1,1", "1,0,2,1"] {
        let wv = WeightVector::parse(w)?;
        let c = isolate_root(&build_pw(&wv), RootKind::UniquePositive, &prec)?;
        let ct = isolate_root(&build_pw_tilde(&wv), RootKind::LargestPositive, &prec)?;
        println!("w = ({w})");
        println!("  P_w  = {}", c.poly());
        println!("  c_w  in [{}, {}]  ~ {}", c.lo(), c.hi(), approx(&c, 12));
        println!("  P~_w = {}", ct.poly());
        println!("  c~_w ~ {}{}", approx(&ct, 12), if ct.is_exact() { " (exact)" } else { "" });
    }

    // With all weights one both polynomials reduce to x^d - x^{d-1} - 1.
    for d in 1..=4 {
        println!("psi_{d} ~ {}", approx(&psi(d, &prec)?, 12));
    }
    Ok(())
}
