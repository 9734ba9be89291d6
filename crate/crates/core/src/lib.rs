//! Random walks in dynamic random environments on the integer lattice.
//!
//! The environment is a `{0,1}`-valued interacting particle system (simple
//! symmetric exclusion or a finite-range spin-flip system) simulated on a
//! finite window. The walker jumps at total rate `α + β` and prefers the
//! right on occupied sites. On top of the kernels sit exact small-system
//! oracles, Monte Carlo estimators of speeds and deviation rates, and the
//! closed-form reference values they are checked against.

pub mod env;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod rng;
pub mod theory;
pub mod walker;

pub use error::{Error, Result};
pub use rng::Seed;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
