use std::path::Path;

use anyhow::{bail, Context, Result};
use dro_core::dcopf::{generate_samples, load_system, to_cc_lp};
use dro_core::{CcLinearProgram, Observation, PowerSystem, SampleSet};

/// A chance-constrained LP, plus the power system it came from if any.
pub struct Problem {
    pub model: CcLinearProgram,
    pub system: Option<PowerSystem>,
}

impl Problem {
    pub fn resolve(system: Option<&Path>, model: Option<&Path>) -> Result<Self> {
        match (system, model) {
            (Some(p), None) => {
                let sys = load_system(p).with_context(|| format!("loading system {}", p.display()))?;
                let (model, _) = to_cc_lp(&sys)?;
                Ok(Self { model, system: Some(sys) })
            }
            (None, Some(p)) => {
                let model = CcLinearProgram::load(p).with_context(|| format!("loading model {}", p.display()))?;
                Ok(Self { model, system: None })
            }
            (Some(_), Some(_)) => bail!("pass either --system or --model, not both"),
            (None, None) => bail!("one of --system or --model is required"),
        }
    }

    /// Samples from a CSV file, or generated from the system when none is given.
    pub fn samples(&self, path: Option<&Path>, n_samples: usize, seed: u64) -> Result<SampleSet> {
        let samples = match (path, &self.system) {
            (Some(p), _) => SampleSet::load(p).with_context(|| format!("loading samples {}", p.display()))?,
            (None, Some(sys)) => generate_samples(sys, n_samples, seed)?,
            (None, None) => bail!("--samples is required with --model"),
        };
        if samples.dim() != self.model.m() {
            bail!("samples have dimension {}, the model expects {}", samples.dim(), self.model.m());
        }
        Ok(samples)
    }
}

/// An observation file holds either `{"x0": [...]}` or a forward solution
/// with an `x` field.
pub fn load_observation(path: &Path) -> Result<Observation> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("x0").is_some() {
        return Ok(serde_json::from_value(value)?);
    }
    match value.get("x") {
        Some(x) => Ok(Observation::new(serde_json::from_value(x.clone())?)),
        None => bail!("{} has neither an `x0` nor an `x` field", path.display()),
    }
}
