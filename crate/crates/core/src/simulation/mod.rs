//! Monte Carlo over transition kernels.
//!
//! Every path draws from its own generator, seeded from the master seed and
//! the path index, so aggregates are identical for any worker count.

mod engine;
mod hitting;
mod stats;
mod strip;

pub use engine::{
    path_rng, run_paths, LastSide, PathRecord, RunConfig, SamplingTable, SideObserver, Start, Stop,
    DEFAULT_STEP_CAP,
};
pub use hitting::{discrete_hit_prob, harmonic_hit_prob, hit_before, rate_hit_prob};
pub use stats::{
    exit_distribution, exit_fraction, exit_side_counts, last_side_curve, CurveBin, CurveScore,
    EmpiricalDistribution, SideCurve,
};
pub use strip::{seesaw, strip_seesaw_samples};
