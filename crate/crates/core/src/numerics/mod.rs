//! Generic numerical building blocks for integrator- and quadrature-backed profiles.

pub mod hermite;
pub mod ode;
pub mod quad;

pub use hermite::HermiteTable;
pub use ode::{integrate, OdeOptions, StepRecord, StopReason, Trajectory};
pub use quad::{integrate_adaptive, QuadOptions, QuadResult};
