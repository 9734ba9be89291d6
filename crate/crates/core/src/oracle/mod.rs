//! Exact computations used as ground truth: transient laws of the joint
//! environment–walker chain on small tori, exact propagation in one fixed
//! environment path, and the range of the simple random walk.

mod annealed;
mod distribution;
mod quenched;
mod range;

pub use annealed::{
    annealed_exact, annealed_joint, bernoulli_law, evolve_env_law, survival_exact,
    JointDistribution, OracleEnv, OracleOptions,
};
pub use distribution::ExactDistribution;
pub use quenched::{quenched_exact, QuenchedPropagator, LEAK_LIMIT};
pub use range::{srw_range_curve, srw_range_mean};
