//! Bracket the largest radius at which the observed decision stays feasible.
//!
//! `g(ε) = min { τ + ε Σλ/γ + Σs/(γN) }` over the family rows with `x = x0`
//! is a minimum of affine functions of ε, so it is concave and nondecreasing.
//! The feasible radii `{g <= 0}` form an interval `[0, ε_root]`, and the radii
//! at which `x0` is optimal form an interval ending at `ε_root`.
//!
//! Two cheap certificates sharpen the bracket. The minimizer at any probe `p`
//! stays feasible for every ε, so `g(ε) <= g(p) + (ε - p)·slope(p)` and the
//! zero of that tangent is a feasible radius. Concavity puts `g` above the
//! chord between `lo` and `hi`, so the chord's zero bounds `ε_root` from above.

use super::{check_epsilon_bar, RecoveryConfig, RecoveryReport, TraceEntry};
use crate::ambiguity::SampleSet;
use crate::error::{Error, Result};
use crate::forward::{assemble, restriction_feasibility, solve_forward_with};
use crate::model::{CcLinearProgram, Observation};

const MAX_PROBES: usize = 200;

#[derive(Debug, Clone, Copy)]
struct Probe {
    eps: f64,
    feasible: bool,
    /// Unscaled restriction value.
    g: f64,
    slope: f64,
}

pub fn recover_bisection(
    model: &CcLinearProgram,
    samples: &SampleSet,
    x0: &Observation,
    cfg: &RecoveryConfig,
) -> Result<RecoveryReport> {
    model.check()?;
    x0.check_against(model)?;
    let emax = check_epsilon_bar(samples, cfg)?;
    let tol = &cfg.tolerances;
    let mut trace = Vec::new();
    let observed: f64 = model.cost.iter().zip(&x0.x0).map(|(a, b)| a * b).sum();
    let not_rationalizable = || Error::NotRationalizable { epsilon_bar: cfg.epsilon_bar };

    // Every probe and every forward solve leaves one trace entry.
    let probe = |eps: f64, trace: &mut Vec<TraceEntry>| -> Result<Probe> {
        let inst = assemble(model, samples, eps)?;
        let (feasible, value, slope) = restriction_feasibility(&inst, &x0.x0, tol)?;
        trace.push(TraceEntry {
            epsilon: eps,
            verdict: if feasible { "feasible" } else { "infeasible" }.into(),
        });
        Ok(Probe { eps, feasible, g: value * inst.cvar_scale(), slope })
    };
    // `width` allows for the objective moving across the bracket: its rate
    // in ε is μ·Σλ/γ to first order.
    let is_optimal_at = |eps: f64, width: f64| -> Result<(bool, bool)> {
        let fwd = solve_forward_with(&assemble(model, samples, eps)?, tol)?;
        let rate = fwd.duals.mu * fwd.lambda.iter().sum::<f64>() / model.gamma;
        let ok = observed <= fwd.objective + 1e-7 * (1.0 + fwd.objective.abs()) + 2.0 * rate * width;
        Ok((ok, fwd.cvar_binding))
    };

    let top = probe(cfg.epsilon_bar, &mut trace)?;
    if top.feasible {
        let (optimal, binding) = is_optimal_at(cfg.epsilon_bar, 0.0)?;
        if !optimal {
            // The optimal value only grows with ε: x0 is beaten everywhere.
            return Err(not_rationalizable());
        }
        trace.push(TraceEntry { epsilon: cfg.epsilon_bar, verdict: "optimal".into() });
        return Ok(RecoveryReport {
            epsilon_star: cfg.epsilon_bar,
            epsilon_bar: cfg.epsilon_bar,
            failed: true,
            engine: "bisection".into(),
            iterations: trace.len(),
            per_engine: None,
            binding_at_star: binding,
            epsilon_max: emax,
            total_slack: None,
            trace,
        });
    }
    let mut lo = probe(0.0, &mut trace)?;
    if !lo.feasible {
        return Err(not_rationalizable());
    }
    let mut hi = top;
    let mut hi_eps = hi.eps;

    let width = cfg.bisection_tol;
    let mut probes = 0usize;
    while hi_eps - lo.eps > width {
        probes += 1;
        if probes > MAX_PROBES {
            return Err(Error::NumericalFailure(format!(
                "bracket [{}, {}] did not close after {MAX_PROBES} probes",
                lo.eps, hi_eps
            )));
        }
        let mut next = 0.5 * (lo.eps + hi_eps);
        if cfg.accelerate {
            if hi.g > lo.g {
                let chord = lo.eps + (-lo.g).max(0.0) * (hi.eps - lo.eps) / (hi.g - lo.g);
                hi_eps = hi_eps.min(chord + 0.25 * width).max(lo.eps);
                if hi_eps - lo.eps <= width {
                    break;
                }
            }
            let tangent = |p: &Probe| (p.slope > 0.0).then(|| p.eps - p.g / p.slope);
            let cand = [tangent(&lo), tangent(&hi)].into_iter().flatten().fold(f64::NAN, f64::max);
            if cand > lo.eps + 0.05 * width && cand < hi_eps {
                next = cand;
            }
        }
        let p = probe(next, &mut trace)?;
        if p.feasible {
            lo = p;
        } else {
            hi = p;
            hi_eps = p.eps;
        }
    }

    let (optimal, binding) = is_optimal_at(lo.eps, hi_eps - lo.eps)?;
    if !optimal {
        return Err(not_rationalizable());
    }
    trace.push(TraceEntry { epsilon: lo.eps, verdict: "optimal".into() });
    let epsilon_star = 0.5 * (lo.eps + hi_eps);
    Ok(RecoveryReport {
        epsilon_star,
        epsilon_bar: cfg.epsilon_bar,
        failed: epsilon_star >= cfg.epsilon_bar,
        engine: "bisection".into(),
        iterations: trace.len(),
        per_engine: None,
        binding_at_star: binding,
        epsilon_max: emax,
        total_slack: None,
        trace,
    })
}
