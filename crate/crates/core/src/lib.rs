//! Certified computations for weighted reciprocal series.
//!
//! Characteristic roots are isolated exactly, series are enclosed between
//! rational bounds, and sequences with a prescribed rational sum are built
//! together with a certificate that an independent checker can replay.

pub mod charpoly;
pub mod cli;
pub mod construct;
pub mod diagnostics;
pub mod enclosure;
pub mod error;
pub mod numeric;
pub mod series;

pub use charpoly::{build_pw, build_pw_tilde, eval_at, isolate_root, psi, IntPolynomial, RootEnclosure, RootKind, WeightVector};
pub use construct::{
    attainable_interval, construct, covering_check, schedule_bounds, verify_certificate, Certificate, ConstructedSeries,
    ConstructionState, CoveringVerdict, Schedule, TailKind, Verdict,
};
pub use diagnostics::{growth_exponent, local_peak_check, mahler_gap, mu, peaks, GapMultiplier, GrowthBase, MuSequence};
pub use enclosure::{floor_power, Enclosure, Precision};
pub use error::{Error, Result};
pub use numeric::Rational;
pub use series::{Numerators, Sequence, WeightedSeriesInstance};
