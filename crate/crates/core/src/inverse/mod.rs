//! Recover the Wasserstein radius from an observed optimal decision.
//!
//! Two engines that share nothing beyond the LP solver and the assembled
//! program:
//!
//! * [`recover_bisection`] brackets the largest radius at which the observed
//!   decision stays feasible and confirms optimality there with one forward
//!   solve;
//! * [`recover_kkt_milp`] maximizes ε over the optimality system with `x`
//!   pinned, complementarity encoded by binaries.

mod bisection;
mod milp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bisection::recover_bisection;
pub use milp::{recover_kkt_milp, recover_relaxed};

use crate::ambiguity::{corner_distances, epsilon_max, SampleSet};
use crate::error::{Error, Result};
use crate::forward::{assemble, solve_forward_with};
use crate::model::{CcLinearProgram, Observation};
use crate::solver::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Bisection,
    KktMilp,
    Both,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Bisection => "bisection",
            Engine::KktMilp => "kkt_milp",
            Engine::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Upper end of the search; must be at least ε^max.
    pub epsilon_bar: f64,
    /// Absolute width of the final bracket.
    pub bisection_tol: f64,
    pub engine: Engine,
    /// Multiplier applied to reference magnitudes when deriving big-M values.
    pub big_m_scale: f64,
    /// Probe at tangent and chord points of the restriction value instead of
    /// plain midpoints when they fall inside the bracket.
    pub accelerate: bool,
    /// Largest number of complementarity pairs the mixed-binary engine accepts.
    pub max_milp_pairs: usize,
    pub node_limit: usize,
    pub tolerances: Tolerances,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            epsilon_bar: 100.0,
            bisection_tol: 1e-6,
            engine: Engine::Bisection,
            big_m_scale: 10.0,
            accelerate: true,
            max_milp_pairs: 400,
            node_limit: crate::solver::DEFAULT_NODE_LIMIT,
            tolerances: Tolerances::default(),
        }
    }
}

/// One probe of an engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub epsilon: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub epsilon_star: f64,
    pub epsilon_bar: f64,
    /// `epsilon_star` hit `epsilon_bar`.
    pub failed: bool,
    pub engine: String,
    pub iterations: usize,
    /// `(bisection, kkt_milp)` when both engines ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_engine: Option<(f64, f64)>,
    /// CVaR row binding in the forward solve at the recovered radius.
    pub binding_at_star: bool,
    pub epsilon_max: f64,
    /// Total slack used by the relaxed engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_slack: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

impl RecoveryReport {
    /// Verdicts that are feasible/optimal must all sit below the infeasible
    /// ones: no interleaving along ε.
    pub fn trace_is_monotone(&self) -> bool {
        let mut pts: Vec<(f64, bool)> = self
            .trace
            .iter()
            .filter_map(|t| match t.verdict.as_str() {
                "feasible" | "optimal" => Some((t.epsilon, true)),
                "infeasible" => Some((t.epsilon, false)),
                _ => None,
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first_bad = pts.iter().position(|p| !p.1).unwrap_or(pts.len());
        pts[first_bad..].iter().all(|p| !p.1)
    }
}

pub(crate) fn check_epsilon_bar(samples: &SampleSet, cfg: &RecoveryConfig) -> Result<f64> {
    let emax = epsilon_max(samples);
    if !(cfg.epsilon_bar >= emax) {
        return Err(Error::Config(format!(
            "epsilon_bar = {} is below epsilon_max = {emax}; raise it to at least epsilon_max",
            cfg.epsilon_bar
        )));
    }
    if !(cfg.bisection_tol > 0.0) {
        return Err(Error::Config("bisection_tol must be positive".into()));
    }
    Ok(emax)
}

/// CVaR binding status of the forward solve at `epsilon`.
pub(crate) fn binding_at(
    model: &CcLinearProgram,
    samples: &SampleSet,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(solve_forward_with(&assemble(model, samples, epsilon)?, tol)?.cvar_binding)
}

/// Run the engine selected in `cfg`.
pub fn recover(
    model: &CcLinearProgram,
    samples: &SampleSet,
    x0: &Observation,
    cfg: &RecoveryConfig,
) -> Result<RecoveryReport> {
    match cfg.engine {
        Engine::Bisection => recover_bisection(model, samples, x0, cfg),
        Engine::KktMilp => recover_kkt_milp(model, samples, x0, cfg),
        Engine::Both => {
            let a = recover_bisection(model, samples, x0, cfg)?;
            let b = recover_kkt_milp(model, samples, x0, cfg)?;
            let mut out = a.clone();
            out.engine = Engine::Both.to_string();
            out.per_engine = Some((a.epsilon_star, b.epsilon_star));
            out.iterations = a.iterations + b.iterations;
            out.trace.extend(b.trace);
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataDrivenReport {
    pub summary: RecoveryReport,
    pub per_period: Vec<RecoveryReport>,
    /// Non-failed estimates differ by more than ten bracket widths: at least
    /// one exactness condition does not hold in every period.
    pub varies: bool,
    pub note: Option<String>,
}

/// One recovery per period on a shared model; the smallest non-failed
/// estimate wins.
pub fn recover_data_driven(
    model: &CcLinearProgram,
    sample_windows: &[SampleSet],
    observations: &[Observation],
    cfg: &RecoveryConfig,
) -> Result<DataDrivenReport> {
    if sample_windows.len() != observations.len() {
        return Err(Error::Dimension(format!(
            "{} sample windows but {} observations",
            sample_windows.len(),
            observations.len()
        )));
    }
    let periods: Vec<Period<'_>> = sample_windows
        .iter()
        .zip(observations)
        .map(|(samples, observation)| Period { model, samples, observation })
        .collect();
    recover_data_driven_periods(&periods, cfg)
}

/// One period of data-driven recovery. Periods may differ in their model,
/// e.g. when loads change over time.
#[derive(Debug, Clone, Copy)]
pub struct Period<'a> {
    pub model: &'a CcLinearProgram,
    pub samples: &'a SampleSet,
    pub observation: &'a Observation,
}

pub fn recover_data_driven_periods(periods: &[Period<'_>], cfg: &RecoveryConfig) -> Result<DataDrivenReport> {
    if periods.is_empty() {
        return Err(Error::EmptyInput("no periods supplied".into()));
    }
    let per_period: Vec<RecoveryReport> =
        periods.par_iter().map(|p| recover(p.model, p.samples, p.observation, cfg)).collect::<Result<_>>()?;
    let ok: Vec<&RecoveryReport> = per_period.iter().filter(|r| !r.failed).collect();
    let (mut summary, varies) = match ok.iter().min_by(|a, b| a.epsilon_star.total_cmp(&b.epsilon_star)) {
        None => (per_period[0].clone(), false),
        Some(best) => {
            let hi = ok.iter().map(|r| r.epsilon_star).fold(f64::MIN, f64::max);
            ((*best).clone(), hi - best.epsilon_star > 10.0 * cfg.bisection_tol)
        }
    };
    if ok.is_empty() {
        summary.failed = true;
        summary.epsilon_star = cfg.epsilon_bar;
    }
    let note = varies.then(|| {
        "per-period estimates differ: at least one exactness condition (binding chance constraint, \
         radius below epsilon_max) does not hold in every period"
            .to_string()
    });
    Ok(DataDrivenReport { summary, per_period, varies, note })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    RecoveryNominal,
    /// The true radius may be at or above ε^max, where every radius yields the
    /// same decision.
    UnsuitableRadius { epsilon_max: f64, epsilon_bar: f64 },
    /// The chance constraint is slack at ε̄, so the decision does not pin ε.
    ChanceConstraintNotBinding { cvar_slack_at_bar: f64 },
    /// Few samples make the worst case degenerate quickly.
    SamplesMayLackRepresentativeness { n_samples: usize, hint: String },
}

/// Scarce-sample threshold: fewer samples than `1/γ` means the empirical CVaR
/// tail holds less than one sample.
pub fn scarce_sample_threshold(gamma: f64) -> usize {
    (1.0 / gamma).ceil() as usize
}

/// Explanations consistent with a report. Failure cannot be attributed to a
/// single cause from the decision alone, so every cause the evidence does not
/// rule out is listed.
pub fn diagnose(
    report: &RecoveryReport,
    samples: &SampleSet,
    model: &CcLinearProgram,
    tol: &Tolerances,
) -> Result<Vec<Finding>> {
    if !report.failed {
        return Ok(vec![Finding::RecoveryNominal]);
    }
    let mut out = Vec::new();
    let c = corner_distances(samples);
    out.push(Finding::UnsuitableRadius { epsilon_max: c.max(), epsilon_bar: report.epsilon_bar });
    let fwd = solve_forward_with(&assemble(model, samples, report.epsilon_bar)?, tol)?;
    if !fwd.cvar_binding {
        out.push(Finding::ChanceConstraintNotBinding { cvar_slack_at_bar: fwd.cvar_slack });
    }
    let threshold = scarce_sample_threshold(model.gamma);
    if samples.len() <= threshold.max(25) {
        out.push(Finding::SamplesMayLackRepresentativeness {
            n_samples: samples.len(),
            hint: format!("{} samples against a tail of mass {}", samples.len(), model.gamma),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
