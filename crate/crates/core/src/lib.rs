//! Numerical laboratory for rotationally symmetric shrinking gradient Ricci
//! solitons in their first-order phase-space form.
//!
//! * [`phase`]: the vector field, its Jacobian, reflection symmetry and regions.
//! * [`equilibria`]: the two saddle equilibria and seeds on their manifolds.
//! * [`integrate`]: adaptive Dormand-Prince integration with events.
//! * [`reconstruct`]: metric profiles, curvatures and soliton residuals.
//! * [`analyze`]: invariant checks, completeness, classification, shooting.
//! * [`cli`]: the command-line front end.

pub mod analyze;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod phase;
pub mod reconstruct;

pub use equilibria::{equilibrium_points, stable_seed, unstable_seed, EquilibriumData, Pole, Seed};
pub use error::{Error, Result};
pub use integrate::{
    integrate, AugmentedState, Crossing, EventKind, EventRecord, EventSpec, IntegrationOptions,
    Sample, Start, Termination, Tolerances, Trajectory,
};
pub use phase::{
    jacobian, phi, reflect, steady_field, x_accel, x_jerk, PhasePoint, Region, SolitonParams,
    TimeDirection, Velocity,
};
