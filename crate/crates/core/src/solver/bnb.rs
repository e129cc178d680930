//! Depth-first branch-and-bound over binary variables.

use serde::{Deserialize, Serialize};

use super::{solve_lp_with, LpSolution, LpStatus, StandardLp, Tolerances};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct MixedBinaryLp {
    pub base: StandardLp,
    pub binary_indices: Vec<usize>,
    /// One constant per complementarity pair; kept for auditing the encoding.
    pub big_m_values: Vec<f64>,
}

impl MixedBinaryLp {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let n = self.base.num_vars();
        if let Some(&j) = self.binary_indices.iter().find(|&&j| j >= n) {
            return Err(Error::Invalid(format!("binary index {j} out of range {n}")));
        }
        if self.big_m_values.iter().any(|&m| m.is_nan() || m <= 0.0) {
            return Err(Error::Invalid("big-M values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedBinarySolution {
    pub solution: LpSolution,
    /// Value of each entry of `binary_indices`, empty unless optimal.
    pub binaries: Vec<u8>,
    pub nodes: usize,
}

pub fn solve_mixed_binary(p: &MixedBinaryLp) -> Result<MixedBinarySolution> {
    solve_mixed_binary_with(p, &Tolerances::default(), DEFAULT_NODE_LIMIT)
}

pub fn solve_mixed_binary_with(
    p: &MixedBinaryLp,
    tol: &Tolerances,
    node_limit: usize,
) -> Result<MixedBinarySolution> {
    p.validate()?;
    let mut root = p.base.clone();
    for &j in &p.binary_indices {
        let (l, u) = root.bounds[j];
        root.bounds[j] = (l.max(0.0), u.min(1.0));
    }
    let mut incumbent: Option<LpSolution> = None;
    let mut stack: Vec<Vec<(f64, f64)>> = vec![root.bounds.clone()];
    let mut nodes = 0usize;
    let mut lp = root;
    while let Some(bounds) = stack.pop() {
        nodes += 1;
        if nodes > node_limit {
            return Err(Error::NodeLimitExceeded(node_limit));
        }
        if bounds.iter().any(|&(l, u)| l > u) {
            continue;
        }
        lp.bounds = bounds;
        let sol = solve_lp_with(&lp, tol)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(MixedBinarySolution {
                    solution: LpSolution::empty(LpStatus::Unbounded, 0),
                    binaries: Vec::new(),
                    nodes,
                })
            }
            LpStatus::Optimal => {}
        }
        if let Some(inc) = &incumbent {
            let cutoff = inc.objective_value - tol.gap * (1.0 + inc.objective_value.abs());
            if sol.objective_value >= cutoff {
                continue;
            }
        }
        let frac = p
            .binary_indices
            .iter()
            .map(|&j| (j, (sol.primal[j] - sol.primal[j].round()).abs()))
            .filter(|&(_, f)| f > tol.integrality)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match frac {
            None => incumbent = Some(sol),
            Some((j, _)) => {
                let v = sol.primal[j];
                let mut down = lp.bounds.clone();
                down[j].1 = 0.0;
                let mut up = lp.bounds.clone();
                up[j].0 = 1.0;
                // explore the nearer side first
                if v >= 0.5 {
                    stack.push(down);
                    stack.push(up);
                } else {
                    stack.push(up);
                    stack.push(down);
                }
            }
        }
    }
    Ok(match incumbent {
        Some(sol) => {
            let binaries = p.binary_indices.iter().map(|&j| (sol.primal[j] > 0.5) as u8).collect();
            MixedBinarySolution { solution: sol, binaries, nodes }
        }
        None => MixedBinarySolution {
            solution: LpSolution::empty(LpStatus::Infeasible, 0),
            binaries: Vec::new(),
            nodes,
        },
    })
}
