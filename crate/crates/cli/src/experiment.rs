//! The three recovery tables: radius sweep, line-limit scaling, sample size.
//!
//! Every grid point is forward solve, observe `x`, recover. Points run on the
//! current rayon pool and are sorted back into grid order before emission.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dro_core::ambiguity::epsilon_max;
use dro_core::dcopf::{generate_samples, load_system, to_cc_lp};
use dro_core::forward::{assemble, kkt_residuals, solve_forward_with};
use dro_core::inverse::recover;
use dro_core::{CcLinearProgram, Observation, PowerSystem, RecoveryConfig, SampleSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub system: PathBuf,
    pub seed: u64,
    pub n_samples: usize,
    /// Radius sweep. Rows for ε^max and `0.5·max(1, 2ε^max)` are appended.
    pub eps_true: Vec<f64>,
    pub fmax_multipliers: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    /// True radius for the scaling and sample-size tables.
    pub fixed_eps: f64,
    /// Also try every sample size below `scan_from`, looking for the largest
    /// size at which recovery fails.
    pub scan_from: Option<usize>,
    pub recovery: RecoveryConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            system: PathBuf::from("data/ieee5.json"),
            seed: 42,
            n_samples: 100,
            eps_true: vec![0.0, 0.01, 0.05, 0.1, 0.2],
            fmax_multipliers: vec![0.9, 1.0, 1.1, 3.0, 5.0],
            sample_sizes: vec![100, 75, 50, 25, 15, 10],
            fixed_eps: 0.01,
            scan_from: Some(25),
            recovery: RecoveryConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(!self.eps_true.is_empty(), "eps_true grid is empty");
        anyhow::ensure!(!self.fmax_multipliers.is_empty(), "fmax_multipliers grid is empty");
        anyhow::ensure!(!self.sample_sizes.is_empty(), "sample_sizes grid is empty");
        anyhow::ensure!(self.n_samples > 0, "n_samples must be positive");
        anyhow::ensure!(
            self.sample_sizes.iter().all(|&n| n > 0 && n <= self.n_samples),
            "sample sizes must lie in 1..=n_samples"
        );
        anyhow::ensure!(self.eps_true.iter().all(|e| *e >= 0.0), "radii must be nonnegative");
        anyhow::ensure!(self.fmax_multipliers.iter().all(|m| *m > 0.0), "multipliers must be positive");
        Ok(())
    }
}

/// One line of an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub label: String,
    /// Grid value: radius, multiplier or sample size.
    pub param: f64,
    pub eps_true: f64,
    pub eps_star: Option<f64>,
    pub failed: Option<bool>,
    pub binding: Option<bool>,
    /// Largest optimality-condition residual of the forward solve.
    pub kkt_residual: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub epsilon_max: f64,
    pub radius: Vec<GridRow>,
    pub fmax: Vec<GridRow>,
    pub sample_size: Vec<GridRow>,
    /// Largest scanned sample size at which recovery fails, if any.
    pub scarce_breakpoint: Option<usize>,
}

struct Point {
    label: String,
    param: f64,
    eps_true: f64,
    model: CcLinearProgram,
    samples: SampleSet,
}

/// Result of one forward-then-inverse grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Roundtrip {
    pub eps_star: Option<f64>,
    pub failed: Option<bool>,
    pub binding: Option<bool>,
    pub kkt_residual: Option<f64>,
    pub status: String,
}

/// Forward solve at `eps_true` and recover from the resulting decision.
pub fn roundtrip(model: &CcLinearProgram, samples: &SampleSet, eps_true: f64, cfg: &RecoveryConfig) -> Roundtrip {
    let mut out = Roundtrip { eps_star: None, failed: None, binding: None, kkt_residual: None, status: "ok".into() };
    let inst = match assemble(model, samples, eps_true) {
        Ok(i) => i,
        Err(e) => {
            out.status = format!("forward: {e}");
            return out;
        }
    };
    let fwd = match solve_forward_with(&inst, &cfg.tolerances) {
        Ok(f) => f,
        Err(e) => {
            out.status = format!("forward: {e}");
            return out;
        }
    };
    out.binding = Some(fwd.cvar_binding);
    out.kkt_residual = kkt_residuals(&inst, &fwd.kkt_point()).ok().map(|r| r.max());
    match recover(model, samples, &Observation::new(fwd.x), cfg) {
        Ok(r) => {
            out.eps_star = Some(r.epsilon_star);
            out.failed = Some(r.failed);
        }
        Err(e) => out.status = format!("inverse: {e}"),
    }
    out
}

fn run_points(points: Vec<Point>, cfg: &RecoveryConfig) -> Vec<GridRow> {
    let mut rows: Vec<(usize, GridRow)> = points
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = roundtrip(&p.model, &p.samples, p.eps_true, cfg);
            let row = GridRow {
                label: p.label,
                param: p.param,
                eps_true: p.eps_true,
                eps_star: r.eps_star,
                failed: r.failed,
                binding: r.binding,
                kkt_residual: r.kkt_residual,
                status: r.status,
            };
            (i, row)
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    rows.into_iter().map(|r| r.1).collect()
}

/// System, its chance-constrained LP and the full sample set of a spec.
pub struct Setup {
    pub system: PowerSystem,
    pub model: CcLinearProgram,
    pub samples: SampleSet,
    pub epsilon_max: f64,
}

impl Setup {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let system = load_system(&spec.system).with_context(|| format!("loading {}", spec.system.display()))?;
        let (model, _) = to_cc_lp(&system)?;
        let samples = generate_samples(&system, spec.n_samples, spec.seed)?;
        let epsilon_max = epsilon_max(&samples);
        Ok(Self { system, model, samples, epsilon_max })
    }

    fn point(&self, label: &str, param: f64, eps_true: f64) -> Point {
        Point { label: label.into(), param, eps_true, model: self.model.clone(), samples: self.samples.clone() }
    }
}

/// The radius grid plus rows at ε^max and `0.5·max(1, 2ε^max)`.
pub fn radius_table(spec: &ExperimentSpec, setup: &Setup) -> Vec<GridRow> {
    let emax = setup.epsilon_max;
    let mut pts: Vec<Point> = spec.eps_true.iter().map(|&e| setup.point("grid", e, e)).collect();
    for (label, e) in [("eps_max", emax), ("half_max_two_eps_max", 0.5 * (2.0 * emax).max(1.0))] {
        pts.push(setup.point(label, e, e));
    }
    run_points(pts, &spec.recovery)
}

/// Line limits scaled, samples kept.
pub fn fmax_table(spec: &ExperimentSpec, setup: &Setup) -> Result<Vec<GridRow>> {
    let pts = spec
        .fmax_multipliers
        .iter()
        .map(|&k| -> Result<Point> {
            let (model, _) = to_cc_lp(&setup.system.with_scaled_limits(k))?;
            Ok(Point { model, ..setup.point("grid", k, spec.fixed_eps) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(run_points(pts, &spec.recovery))
}

/// Sample-size grid, then every size below `scan_from`. Returns the rows and
/// the largest scanned size at which recovery fails.
pub fn sample_table(spec: &ExperimentSpec, setup: &Setup) -> Result<(Vec<GridRow>, Option<usize>)> {
    let mut pts = Vec::new();
    let scan = spec.scan_from.map_or(0, |top| top.min(spec.n_samples));
    let sizes = spec.sample_sizes.iter().map(|&n| ("grid", n)).chain((1..scan).rev().map(|n| ("scan", n)));
    for (label, n) in sizes {
        pts.push(Point { samples: setup.samples.prefix(n)?, ..setup.point(label, n as f64, spec.fixed_eps) });
    }
    let rows = run_points(pts, &spec.recovery);
    let breakpoint =
        rows.iter().filter(|r| r.label == "scan" && r.failed == Some(true)).map(|r| r.param as usize).max();
    Ok((rows, breakpoint))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Tables> {
    let setup = Setup::new(spec)?;
    let radius = radius_table(spec, &setup);
    let fmax = fmax_table(spec, &setup)?;
    let (sample_size, scarce_breakpoint) = sample_table(spec, &setup)?;
    Ok(Tables { epsilon_max: setup.epsilon_max, radius, fmax, sample_size, scarce_breakpoint })
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, ToString::to_string)
}

pub fn write_table(path: &Path, param_name: &str, rows: &[GridRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["label", param_name, "eps_true", "eps_star", "failed", "binding", "kkt_residual", "status"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.param.to_string(),
            r.eps_true.to_string(),
            fmt_opt(&r.eps_star),
            fmt_opt(&r.failed),
            fmt_opt(&r.binding),
            fmt_opt(&r.kkt_residual),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `table_radius.csv`, `table_fmax.csv`, `table_samples.csv` and
/// `summary.json` into `dir`.
pub fn write_tables(dir: &Path, t: &Tables) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_table(&dir.join("table_radius.csv"), "eps_true_grid", &t.radius)?;
    write_table(&dir.join("table_fmax.csv"), "fmax_multiplier", &t.fmax)?;
    write_table(&dir.join("table_samples.csv"), "n_samples", &t.sample_size)?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(t)? + "\n")?;
    Ok(())
}
