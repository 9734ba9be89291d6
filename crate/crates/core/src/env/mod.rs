//! Dynamic random environments on finite windows of the integers.

pub mod history;
pub mod occupancy;
pub mod parallel;
pub mod spinflip;
pub mod sse;

pub use history::EnvHistory;
pub use occupancy::{bernoulli_init, Boundary, Occupancy, Window};
pub use parallel::{parallel_exclusion_step, DiscreteExclusion, PackedRing, Parity};
pub use spinflip::{
    spinflip_evolve, spinflip_schedule, SpinFlipDynamics, SpinFlipSpec, StructureReport,
};
pub use sse::{
    apply_schedule, build_sse_schedule, sse_evolve, Event, EventKind, EventSchedule, SseDynamics,
};
