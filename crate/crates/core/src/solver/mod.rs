//! Embedded LP and small mixed-binary solver.
//!
//! [`solve_lp`] is a bounded primal simplex that works directly on rows
//! `lo <= a·z <= hi` (inequalities, equalities and variable bounds alike) and
//! keeps an explicit inverse of the working-row matrix. It is built for the
//! tall, sparse, very degenerate programs produced by the forward
//! reformulation: a few hundred columns against tens of thousands of rows.

mod bnb;
mod simplex;
mod sparse;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use bnb::{solve_mixed_binary, solve_mixed_binary_with, MixedBinaryLp, MixedBinarySolution, DEFAULT_NODE_LIMIT};
pub use sparse::SparseRows;

use crate::error::{Error, Result};

/// Numerical tolerances shared by every solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Primal feasibility, absolute per row after row scaling.
    pub feasibility: f64,
    /// Reduced-cost threshold for pricing.
    pub optimality: f64,
    /// Smallest accepted pivot magnitude.
    pub pivot: f64,
    /// Distance from {0, 1} accepted as integral.
    pub integrality: f64,
    /// Relative duality / incumbent gap.
    pub gap: f64,
    /// Slack below which a row counts as binding.
    pub binding: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-8,
            optimality: 1e-9,
            pivot: 1e-9,
            integrality: 1e-6,
            gap: 1e-8,
            binding: 1e-7,
        }
    }
}

/// `min cᵀz  s.t.  G z <= g,  E z = e,  lb <= z <= ub`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub objective: Vec<f64>,
    pub ineq_matrix: SparseRows,
    pub ineq_rhs: Vec<f64>,
    pub eq_matrix: SparseRows,
    pub eq_rhs: Vec<f64>,
    /// Per-variable `(lower, upper)`; infinite entries are unbounded.
    pub bounds: Vec<(f64, f64)>,
}

impl StandardLp {
    /// Free variables, no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            ineq_matrix: SparseRows::new(n),
            ineq_rhs: Vec::new(),
            eq_matrix: SparseRows::new(n),
            eq_rhs: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_ineq(&mut self, row: &[(usize, f64)], rhs: f64) {
        self.ineq_matrix.push_row(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_eq(&mut self, row: &[(usize, f64)], rhs: f64) {
        self.eq_matrix.push_row(row);
        self.eq_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.ineq_matrix.ncols() != n || self.eq_matrix.ncols() != n {
            return bad("constraint matrix column count differs from objective length".into());
        }
        if self.ineq_matrix.nrows() != self.ineq_rhs.len() {
            return bad("inequality rows and right-hand side differ in length".into());
        }
        if self.eq_matrix.nrows() != self.eq_rhs.len() {
            return bad("equality rows and right-hand side differ in length".into());
        }
        if self.bounds.len() != n {
            return bad("bounds length differs from objective length".into());
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.ineq_rhs)
            .chain(&self.eq_rhs)
            .chain(self.ineq_matrix.values())
            .chain(self.eq_matrix.values())
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite coefficient".into());
        }
        for (i, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return bad(format!("bad bounds ({l}, {u}) on variable {i}"));
            }
        }
        Ok(())
    }

    /// Plain-text dump: inequalities, then equalities, then bounds, one item
    /// per line with fixed-point coefficients.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars());
        let _ = write!(out, "obj");
        for v in &self.objective {
            let _ = write!(out, " {v:.12}");
        }
        out.push('\n');
        for (r, rhs) in self.ineq_rhs.iter().enumerate() {
            let _ = write!(out, "le");
            for (j, v) in self.ineq_matrix.row(r) {
                let _ = write!(out, " {j}:{v:.12}");
            }
            let _ = writeln!(out, " <= {rhs:.12}");
        }
        for (r, rhs) in self.eq_rhs.iter().enumerate() {
            let _ = write!(out, "eq");
            for (j, v) in self.eq_matrix.row(r) {
                let _ = write!(out, " {j}:{v:.12}");
            }
            let _ = writeln!(out, " = {rhs:.12}");
        }
        for (j, (l, u)) in self.bounds.iter().enumerate() {
            let _ = writeln!(out, "bound {j} {l:.12} {u:.12}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Primal-dual result.
///
/// Sign convention: stationarity reads
/// `c + Gᵀ dual_ineq + Eᵀ dual_eq - reduced_costs = 0`, with `dual_ineq >= 0`,
/// and `reduced_costs[j]` nonnegative when `z_j` sits at its lower bound and
/// nonpositive at its upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual_ineq: Vec<f64>,
    pub dual_eq: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub(crate) fn empty(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            primal: Vec::new(),
            dual_ineq: Vec::new(),
            dual_eq: Vec::new(),
            reduced_costs: Vec::new(),
            objective_value: match status {
                LpStatus::Infeasible => f64::INFINITY,
                _ => f64::NEG_INFINITY,
            },
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Lagrangian dual objective for the given problem.
    pub fn dual_objective(&self, lp: &StandardLp) -> f64 {
        let mut v = -dot(&self.dual_ineq, &lp.ineq_rhs) - dot(&self.dual_eq, &lp.eq_rhs);
        for (j, &(l, u)) in lp.bounds.iter().enumerate() {
            let rc = self.reduced_costs[j];
            if rc > 0.0 && l.is_finite() {
                v += rc * l;
            } else if rc < 0.0 && u.is_finite() {
                v += rc * u;
            }
        }
        v
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve an LP with default tolerances.
pub fn solve_lp(lp: &StandardLp) -> Result<LpSolution> {
    solve_lp_with(lp, &Tolerances::default())
}

pub fn solve_lp_with(lp: &StandardLp, tol: &Tolerances) -> Result<LpSolution> {
    lp.validate()?;
    simplex::solve(lp, tol)
}
