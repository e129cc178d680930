//! Forward and inverse Wasserstein distributionally robust chance-constrained
//! linear programming.
//!
//! The forward side turns a chance-constrained LP plus historical samples into
//! a finite LP through a CVaR approximation over an ℓ1 Wasserstein ball, and
//! solves it with the embedded simplex in [`solver`]. The inverse side takes an
//! observed decision and recovers the ball radius ε that rationalizes it, with
//! two independent engines (feasibility bisection and a KKT mixed-binary
//! program).

pub mod ambiguity;
pub mod dcopf;
pub mod error;
pub mod fixtures;
pub mod forward;
pub mod inverse;
pub mod model;
pub mod solver;

pub use ambiguity::{DiscreteDistribution, SampleSet, WassersteinBall};
pub use dcopf::PowerSystem;
pub use error::{Error, Result};
pub use forward::{FdroInstance, ForwardSolution, KktPoint, Layout, OptimalityVerdict};
pub use inverse::{Engine, RecoveryConfig, RecoveryReport};
pub use model::{CcLinearProgram, Observation};
pub use solver::{LpSolution, LpStatus, MixedBinaryLp, StandardLp, Tolerances};
