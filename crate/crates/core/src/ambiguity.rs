//! Empirical distributions, ℓ1 Wasserstein distances and the critical radius.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{solve_lp, StandardLp};

/// Historical realizations of the random vector plus its box support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    samples: Vec<Vec<f64>>,
    lower_bound: Vec<f64>,
    upper_bound: Vec<f64>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct BoundsSidecar {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

impl SampleSet {
    pub fn new(
        samples: Vec<Vec<f64>>,
        lower_bound: Vec<f64>,
        upper_bound: Vec<f64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("sample set has no rows".into()));
        }
        let m = lower_bound.len();
        if m == 0 || upper_bound.len() != m {
            return Err(Error::Dimension(format!(
                "support bounds have lengths {} and {}",
                m,
                upper_bound.len()
            )));
        }
        for j in 0..m {
            let (lo, hi) = (lower_bound[j], upper_bound[j]);
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Invalid(format!("degenerate support [{lo}, {hi}] in coordinate {j}")));
            }
        }
        for (i, row) in samples.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!("sample {i} has {} coordinates, expected {m}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(lower_bound[j]..=upper_bound[j]).contains(&v) {
                    return Err(Error::Invalid(format!("sample {i} coordinate {j} = {v} outside the support")));
                }
            }
        }
        Ok(Self { samples, lower_bound, upper_bound, seed })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn lower_bound(&self) -> &[f64] {
        &self.lower_bound
    }

    pub fn upper_bound(&self) -> &[f64] {
        &self.upper_bound
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lower_bound.len()
    }

    /// First `n` samples, same support.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::new(
            self.samples[..n.min(self.len())].to_vec(),
            self.lower_bound.clone(),
            self.upper_bound.clone(),
            self.seed,
        )
    }

    /// Write `xi_1..xi_m` CSV plus the bounds sidecar next to it
    /// (`<stem>.bounds.json`).
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record((1..=self.dim()).map(|j| format!("xi_{j}")))?;
        for row in &self.samples {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        let side = BoundsSidecar {
            lower: self.lower_bound.clone(),
            upper: self.upper_bound.clone(),
            seed: self.seed,
        };
        std::fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let side: BoundsSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path))?)?;
        let mut r = csv::Reader::from_path(csv_path)?;
        let header = r.headers()?.clone();
        if header.len() != side.lower.len() {
            return Err(Error::Schema {
                field: "xi header".into(),
                message: format!("{} columns but bounds have {}", header.len(), side.lower.len()),
            });
        }
        let mut samples = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Schema { field: format!("row {}", i + 1), message: e.to_string() })?;
            samples.push(row);
        }
        Self::new(samples, side.lower, side.upper, side.seed)
    }
}

/// `foo.csv` -> `foo.bounds.json`.
pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("bounds.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput("distribution has no atoms".into()));
        }
        let m = atoms[0].0.len();
        if atoms.iter().any(|(x, _)| x.len() != m) {
            return Err(Error::Dimension("atoms of different dimension".into()));
        }
        if atoms.iter().any(|(_, w)| !(*w >= 0.0)) {
            return Err(Error::Invalid("negative or NaN weight".into()));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("weights sum to {total}")));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        Self { atoms: vec![(point, 1.0)] }
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinBall {
    pub center: DiscreteDistribution,
    pub radius: f64,
}

impl WassersteinBall {
    pub fn new(center: DiscreteDistribution, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Invalid(format!("radius {radius} must be nonnegative")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, q: &DiscreteDistribution) -> Result<bool> {
        Ok(wasserstein_discrete(&self.center, q)? <= self.radius + 1e-9)
    }
}

/// Uniform weights over the samples; duplicates stay separate atoms.
pub fn empirical_from_samples(s: &SampleSet) -> DiscreteDistribution {
    let w = 1.0 / s.len() as f64;
    DiscreteDistribution { atoms: s.samples().iter().map(|x| (x.clone(), w)).collect() }
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Distance to a point mass: every plan ships all mass to `point`.
pub fn wasserstein_to_dirac(p: &DiscreteDistribution, point: &[f64]) -> f64 {
    p.atoms.iter().map(|(x, w)| w * l1(x, point)).sum()
}

/// Optimal transport cost under the ℓ1 ground metric, via the transport LP.
pub fn wasserstein_discrete(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension(format!("dimensions {} and {}", p.dim(), q.dim())));
    }
    let (a, b) = (p.atoms.len(), q.atoms.len());
    let cost: Vec<f64> = p
        .atoms
        .iter()
        .flat_map(|(x, _)| q.atoms.iter().map(move |(y, _)| l1(x, y)))
        .collect();
    let mut lp = StandardLp::new(cost);
    for i in 0..a {
        let row: Vec<(usize, f64)> = (0..b).map(|j| (i * b + j, 1.0)).collect();
        lp.add_eq(&row, p.atoms[i].1);
    }
    // the last column marginal follows from the others
    for j in 0..b.saturating_sub(1) {
        let row: Vec<(usize, f64)> = (0..a).map(|i| (i * b + j, 1.0)).collect();
        lp.add_eq(&row, q.atoms[j].1);
    }
    lp.bounds = vec![(0.0, f64::INFINITY); a * b];
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::NumericalFailure(format!("transport LP ended {:?}", sol.status)));
    }
    Ok(sol.objective_value.max(0.0))
}

/// Distances from the empirical distribution to the two support corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerDistances {
    pub to_upper: f64,
    pub to_lower: f64,
}

impl CornerDistances {
    pub fn max(&self) -> f64 {
        self.to_upper.max(self.to_lower)
    }
}

pub fn corner_distances(s: &SampleSet) -> CornerDistances {
    let p = empirical_from_samples(s);
    CornerDistances {
        to_upper: wasserstein_to_dirac(&p, s.upper_bound()),
        to_lower: wasserstein_to_dirac(&p, s.lower_bound()),
    }
}

/// Radius beyond which recovery cannot distinguish radii: the larger of the
/// distances to the all-upper and all-lower support corners.
pub fn epsilon_max(s: &SampleSet) -> f64 {
    corner_distances(s).max()
}
