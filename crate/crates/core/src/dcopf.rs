//! Chance-constrained DC optimal power flow.
//!
//! Decision `z = [x; r]` (dispatch and reserve per generator). The random
//! vector is the line-limit perturbation `Δf` (one coordinate per line), and
//! the flow limits `-f_max - Δf <= Φ(Sx - e) <= f_max + Δf` are rewritten as
//! `±Φ(Sx - e) - Δf <= f_max`.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambiguity::SampleSet;
use crate::error::{Error, Result};
use crate::model::CcLinearProgram;

/// Half-width of the line-limit perturbation, as a fraction of `f_max`.
pub const PERTURBATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSystem {
    pub n_bus: usize,
    pub n_gen: usize,
    pub n_line: usize,
    /// Line × bus, MW per MW of injection.
    pub ptdf: Vec<Vec<f64>>,
    /// Bus of each generator (the 0/1 incidence `S` in compact form).
    pub gen_bus: Vec<usize>,
    pub cost: Vec<f64>,
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub f_max: Vec<f64>,
    pub net_load: Vec<f64>,
    pub gamma: f64,
    pub reserve_fraction: f64,
}

/// Positions of dispatch and reserve in the decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcopfLegend {
    pub n_gen: usize,
    pub n_line: usize,
}

impl DcopfLegend {
    pub fn dispatch(&self, g: usize) -> usize {
        g
    }
    pub fn reserve(&self, g: usize) -> usize {
        self.n_gen + g
    }
    /// Chance row of line `l`: the `-Φ` side first, then the `+Φ` side.
    pub fn chance_row(&self, l: usize, positive: bool) -> usize {
        if positive {
            self.n_line + l
        } else {
            l
        }
    }
}

impl PowerSystem {
    pub fn total_load(&self) -> f64 {
        self.net_load.iter().sum()
    }

    pub fn reserve_requirement(&self) -> f64 {
        self.reserve_fraction * self.total_load()
    }

    pub fn validate(&self) -> Result<()> {
        let schema = |field: &str, message: String| Err(Error::Schema { field: field.into(), message });
        if self.n_bus == 0 || self.n_gen == 0 || self.n_line == 0 {
            return schema("buses/generators/lines", "counts must be positive".into());
        }
        if self.ptdf.len() != self.n_line || self.ptdf.iter().any(|r| r.len() != self.n_bus) {
            return schema("ptdf", format!("expected {} × {}", self.n_line, self.n_bus));
        }
        for (name, v, len) in [
            ("gen_bus", &self.gen_bus.iter().map(|&b| b as f64).collect::<Vec<_>>(), self.n_gen),
            ("cost", &self.cost, self.n_gen),
            ("x_min", &self.x_min, self.n_gen),
            ("x_max", &self.x_max, self.n_gen),
            ("f_max", &self.f_max, self.n_line),
            ("loads", &self.net_load, self.n_bus),
        ] {
            if v.len() != len {
                return schema(name, format!("length {} expected {len}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return schema(name, "non-finite entry".into());
            }
        }
        if let Some(g) = self.gen_bus.iter().position(|&b| b >= self.n_bus) {
            return schema("generators", format!("generator {g} sits on unknown bus {}", self.gen_bus[g]));
        }
        for g in 0..self.n_gen {
            if !(0.0 <= self.x_min[g] && self.x_min[g] <= self.x_max[g]) {
                return schema("generators", format!("generator {g} needs 0 <= x_min <= x_max"));
            }
        }
        if let Some(l) = self.f_max.iter().position(|&f| f <= 0.0) {
            return schema("lines", format!("line {l} has nonpositive f_max"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return schema("gamma", format!("{} outside (0, 1)", self.gamma));
        }
        if !(self.reserve_fraction >= 0.0) {
            return schema("reserve_fraction", "must be nonnegative".into());
        }
        let cap: f64 = self.x_max.iter().sum();
        if cap < self.total_load() + self.reserve_requirement() {
            return schema(
                "generators",
                format!("capacity {cap} below load plus reserve {}", self.total_load() + self.reserve_requirement()),
            );
        }
        Ok(())
    }

    /// Same system with every line limit multiplied by `factor`.
    pub fn with_scaled_limits(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for f in &mut s.f_max {
            *f *= factor;
        }
        s
    }

    /// `Φ S`: line flow per MW of each generator.
    pub fn gen_shift_factors(&self) -> Vec<Vec<f64>> {
        self.ptdf.iter().map(|row| self.gen_bus.iter().map(|&b| row[b]).collect()).collect()
    }

    /// `Φ e`.
    pub fn load_flows(&self) -> Vec<f64> {
        self.ptdf.iter().map(|row| row.iter().zip(&self.net_load).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Map the system onto the abstract chance-constrained LP.
pub fn to_cc_lp(sys: &PowerSystem) -> Result<(CcLinearProgram, DcopfLegend)> {
    sys.validate()?;
    let g = sys.n_gen;
    let nl = sys.n_line;
    let legend = DcopfLegend { n_gen: g, n_line: nl };
    let n = 2 * g;
    let mut cost = sys.cost.clone();
    cost.extend(std::iter::repeat_n(0.0, g));
    let mut a = Vec::new();
    let mut h = Vec::new();
    let total = sys.total_load();
    // power balance as two inequalities
    let mut row = vec![0.0; n];
    row[..g].fill(1.0);
    a.push(row.clone());
    h.push(total);
    a.push(row.iter().map(|v| -v).collect());
    h.push(-total);
    // x_min <= x + r <= x_max
    for k in 0..g {
        let mut up = vec![0.0; n];
        up[legend.dispatch(k)] = 1.0;
        up[legend.reserve(k)] = 1.0;
        a.push(up.clone());
        h.push(sys.x_max[k]);
        a.push(up.iter().map(|v| -v).collect());
        h.push(-sys.x_min[k]);
    }
    // 1ᵀr >= R
    let mut res = vec![0.0; n];
    res[g..].fill(-1.0);
    a.push(res);
    h.push(-sys.reserve_requirement());

    let shift = sys.gen_shift_factors();
    let base = sys.load_flows();
    let mut b = Vec::with_capacity(2 * nl);
    let mut d = Vec::with_capacity(2 * nl);
    let mut d_mat = Vec::with_capacity(2 * nl);
    for positive in [false, true] {
        let sign = if positive { 1.0 } else { -1.0 };
        for l in 0..nl {
            let mut br = vec![0.0; n];
            for k in 0..g {
                br[legend.dispatch(k)] = sign * shift[l][k];
            }
            b.push(br);
            let mut dr = vec![0.0; nl];
            dr[l] = -1.0;
            d_mat.push(dr);
            d.push(sys.f_max[l] + sign * base[l]);
        }
    }
    let model = CcLinearProgram {
        cost,
        a,
        h,
        b,
        d_mat,
        d,
        gamma: sys.gamma,
        variable_lower: Some(vec![0.0; n]),
        variable_upper: None,
    };
    model.check()?;
    Ok((model, legend))
}

/// `Δf_ij ~ U(-0.1 f_max_j, 0.1 f_max_j)`, row by row from one seeded stream,
/// so a smaller set with the same seed is a prefix of a larger one.
pub fn generate_samples(sys: &PowerSystem, n_samples: usize, seed: u64) -> Result<SampleSet> {
    if n_samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let half: Vec<f64> = sys.f_max.iter().map(|f| PERTURBATION_FRACTION * f).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_samples)
        .map(|_| half.iter().map(|&a| rng.gen_range(-a..=a)).collect())
        .collect();
    SampleSet::new(samples, half.iter().map(|a| -a).collect(), half, Some(seed))
}

// ---- JSON schema ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineSpec {
    pub from: usize,
    pub to: usize,
    pub f_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reactance: Option<f64>,
    /// Direct PTDF row, overriding the reactance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ptdf: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub bus: usize,
    pub cost: f64,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub provenance: String,
    /// Bus labels; their count fixes the bus count.
    pub buses: Vec<String>,
    #[serde(default)]
    pub slack_bus: usize,
    pub lines: Vec<LineSpec>,
    pub generators: Vec<GeneratorSpec>,
    /// Net load per bus, MW.
    pub loads: Vec<f64>,
    pub gamma: f64,
    pub reserve_fraction: f64,
}

impl SystemFile {
    pub fn into_system(self) -> Result<PowerSystem> {
        let nb = self.buses.len();
        let schema = |field: &str, message: String| Error::Schema { field: field.into(), message };
        if nb == 0 {
            return Err(schema("buses", "no buses".into()));
        }
        if self.slack_bus >= nb {
            return Err(schema("slack_bus", format!("{} out of range", self.slack_bus)));
        }
        let need_reactance = self.lines.iter().any(|l| l.ptdf.is_none());
        let computed = if need_reactance { Some(ptdf_from_reactances(nb, self.slack_bus, &self.lines)?) } else { None };
        let ptdf = self
            .lines
            .iter()
            .enumerate()
            .map(|(k, l)| match &l.ptdf {
                Some(row) => Ok(row.clone()),
                None => Ok(computed.as_ref().expect("computed when any line lacks a row")[k].clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        let sys = PowerSystem {
            n_bus: nb,
            n_gen: self.generators.len(),
            n_line: self.lines.len(),
            ptdf,
            gen_bus: self.generators.iter().map(|g| g.bus).collect(),
            cost: self.generators.iter().map(|g| g.cost).collect(),
            x_min: self.generators.iter().map(|g| g.x_min).collect(),
            x_max: self.generators.iter().map(|g| g.x_max).collect(),
            f_max: self.lines.iter().map(|l| l.f_max).collect(),
            net_load: self.loads,
            gamma: self.gamma,
            reserve_fraction: self.reserve_fraction,
        };
        sys.validate()?;
        Ok(sys)
    }
}

/// Injection shift factors `B_f · B_bus⁻¹` with the slack bus column zero.
pub fn ptdf_from_reactances(n_bus: usize, slack: usize, lines: &[LineSpec]) -> Result<Vec<Vec<f64>>> {
    let schema = |message: String| Error::Schema { field: "lines".into(), message };
    let mut bbus = DMatrix::<f64>::zeros(n_bus, n_bus);
    for (k, l) in lines.iter().enumerate() {
        let x = l.reactance.ok_or_else(|| schema(format!("line {k} needs a reactance or a ptdf row")))?;
        if !(x > 0.0) || l.from >= n_bus || l.to >= n_bus || l.from == l.to {
            return Err(schema(format!("line {k} is malformed")));
        }
        let y = 1.0 / x;
        bbus[(l.from, l.from)] += y;
        bbus[(l.to, l.to)] += y;
        bbus[(l.from, l.to)] -= y;
        bbus[(l.to, l.from)] -= y;
    }
    let keep: Vec<usize> = (0..n_bus).filter(|&b| b != slack).collect();
    let reduced = DMatrix::from_fn(keep.len(), keep.len(), |i, j| bbus[(keep[i], keep[j])]);
    let inv = reduced.try_inverse().ok_or_else(|| schema("network is disconnected".into()))?;
    let mut out = Vec::with_capacity(lines.len());
    for l in lines {
        let y = 1.0 / l.reactance.unwrap_or(1.0);
        let mut row = vec![0.0; n_bus];
        for (jj, &b) in keep.iter().enumerate() {
            let theta = |bus: usize| keep.iter().position(|&k| k == bus).map_or(0.0, |ii| inv[(ii, jj)]);
            row[b] = y * (theta(l.from) - theta(l.to));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn load_system(path: &Path) -> Result<PowerSystem> {
    let text = std::fs::read_to_string(path)?;
    let file: SystemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema { field: format!("line {} column {}", e.line(), e.column()), message: e.to_string() })?;
    file.into_system()
}
