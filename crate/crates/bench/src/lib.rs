//! Shared fixtures for the criterion benches.

use std::path::PathBuf;

use dro_core::dcopf::{generate_samples, load_system, to_cc_lp};
use dro_core::forward::{assemble, solve_forward};
use dro_core::{CcLinearProgram, Observation, SampleSet};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// A shipped system as a chance-constrained LP with `n` seeded samples.
pub fn system(name: &str, n: usize) -> (CcLinearProgram, SampleSet) {
    let sys = load_system(&data(name)).expect("shipped system loads");
    let (model, _) = to_cc_lp(&sys).expect("shipped system converts");
    (model, generate_samples(&sys, n, 42).expect("samples"))
}

/// Forward optimum at `eps`, as an observation for the inverse benches.
pub fn observe(model: &CcLinearProgram, samples: &SampleSet, eps: f64) -> Observation {
    let inst = assemble(model, samples, eps).expect("assemble");
    Observation::new(solve_forward(&inst).expect("forward solve").x)
}
