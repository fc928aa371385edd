//! Path transformations for processes with cyclically exchangeable increments.
//!
//! Paths live on a uniform grid ([`GridPath`]). Cyclic shifts at random,
//! path-dependent times condition the overall minimum: into an interval via the
//! occupation time of the shifted minimum, onto a level via local times, or to
//! zero via the Vervaat transform. [`samplers`] draws the process laws involved,
//! [`exact`] computes finite laws of discrete walks by enumeration, and
//! [`stats`] provides the tests used to check the resulting identities.

pub mod exact;
pub mod path;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod transforms;

pub use path::{
    amplitude, argmin_first, cyclic_shift, maximum, minimum, reflected_process, shifted_min_profile, time_reversal,
    GridPath, Interval, PathError, ReflectedProcess,
};
pub use rng::RngStream;
pub use samplers::{EiParams, Process, SampleError};
pub use stats::{StatsError, TestReport};
pub use transforms::{ShiftResult, TransformError};
