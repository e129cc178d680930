//! Library side of the `dro` binary: input resolution and the table harness.

pub mod experiment;
pub mod inputs;

pub use experiment::{run_experiment, ExperimentSpec, GridRow, Roundtrip, Setup, Tables};
pub use inputs::{load_observation, Problem};
