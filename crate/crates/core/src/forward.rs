//! Finite convex reformulation of the Wasserstein DRO chance constraint, its
//! solution, KKT data and residuals.
//!
//! Variables, in order: `x` (n), `τ` (1), `λ` (m), `s` (N·m, sample-major).
//! Rows, all of the form `g·z <= rhs`:
//!
//! 1. ordinary rows `A x <= h`, with finite variable bounds folded in;
//! 2. the CVaR row `τ + (ε/γ) Σ λ_j + 1/(γN) Σ s_ij <= 0`;
//! 3. three families `f` over `(i, k, j)`, `k = 0..=N_cc`:
//!    `a_kj ξ_f + b_k - λ_j dist_f - s_ij <= 0` where `ξ_f` is the sample,
//!    the upper support bound or the lower support bound, `dist_f` its ℓ1
//!    distance from the sample, and for `k >= 1`
//!    `a_kj = D[k-1][j]`, `b_k = ((B x - d)_{k-1} - τ) / m`, while the `k = 0`
//!    row has `a = 0`, `b = 0`;
//! 4. sign rows `-λ_j <= 0`.

use serde::{Deserialize, Serialize};

use crate::ambiguity::SampleSet;
use crate::error::{Error, Result};
use crate::model::{CcLinearProgram, Observation};
use crate::solver::{solve_lp_with, LpStatus, StandardLp, Tolerances};

/// Index map of the assembled program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub m: usize,
    pub n_samples: usize,
    pub n_cc: usize,
    /// Ordinary rows after folding variable bounds.
    pub n_oc: usize,
}

impl Layout {
    pub fn x(&self, j: usize) -> usize {
        j
    }
    pub fn tau(&self) -> usize {
        self.n
    }
    pub fn lambda(&self, j: usize) -> usize {
        self.n + 1 + j
    }
    pub fn s(&self, i: usize, j: usize) -> usize {
        self.n + 1 + self.m + i * self.m + j
    }
    pub fn num_vars(&self) -> usize {
        self.n + 1 + self.m + self.n_samples * self.m
    }

    pub fn ordinary_row(&self, r: usize) -> usize {
        r
    }
    pub fn cvar_row(&self) -> usize {
        self.n_oc
    }
    /// Rows per family.
    pub fn family_len(&self) -> usize {
        self.n_samples * (self.n_cc + 1) * self.m
    }
    /// Row of family `f` (0: sample, 1: upper corner, 2: lower corner).
    pub fn family_row(&self, f: usize, i: usize, k: usize, j: usize) -> usize {
        self.n_oc + 1 + f * self.family_len() + (i * (self.n_cc + 1) + k) * self.m + j
    }
    pub fn sign_row(&self, j: usize) -> usize {
        self.n_oc + 1 + 3 * self.family_len() + j
    }
    pub fn num_rows(&self) -> usize {
        self.n_oc + 1 + 3 * self.family_len() + self.m
    }
}

/// A model, its samples and a radius, ready to be solved.
#[derive(Debug, Clone)]
pub struct FdroInstance {
    pub model: CcLinearProgram,
    pub samples: SampleSet,
    pub epsilon: f64,
    pub layout: Layout,
    folded_a: Vec<Vec<f64>>,
    folded_h: Vec<f64>,
}

pub fn assemble(model: &CcLinearProgram, samples: &SampleSet, epsilon: f64) -> Result<FdroInstance> {
    model.check()?;
    if samples.dim() != model.m() {
        return Err(Error::Dimension(format!(
            "model has m = {} random coordinates, samples have {}",
            model.m(),
            samples.dim()
        )));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Invalid(format!("radius {epsilon} must be finite and nonnegative")));
    }
    let (folded_a, folded_h) = model.folded_rows();
    let layout = Layout {
        n: model.n(),
        m: model.m(),
        n_samples: samples.len(),
        n_cc: model.n_cc(),
        n_oc: folded_a.len(),
    };
    Ok(FdroInstance { model: model.clone(), samples: samples.clone(), epsilon, layout, folded_a, folded_h })
}

/// Coefficients of one family row, split into the part on `x` and the rest.
struct FamilyRow {
    /// `B_k / m` (empty for k = 0).
    x_coef: Vec<(usize, f64)>,
    tau: f64,
    lambda: f64,
    rhs: f64,
}

impl FdroInstance {
    pub fn folded_a(&self) -> &[Vec<f64>] {
        &self.folded_a
    }

    pub fn folded_h(&self) -> &[f64] {
        &self.folded_h
    }

    fn corner(&self, f: usize, i: usize, j: usize) -> (f64, f64) {
        let xi = self.samples.samples()[i][j];
        match f {
            0 => (xi, 0.0),
            1 => {
                let u = self.samples.upper_bound()[j];
                (u, (u - xi).abs())
            }
            _ => {
                let l = self.samples.lower_bound()[j];
                (l, (xi - l).abs())
            }
        }
    }

    fn family(&self, f: usize, i: usize, k: usize, j: usize) -> FamilyRow {
        let (xi, dist) = self.corner(f, i, j);
        if k == 0 {
            return FamilyRow { x_coef: Vec::new(), tau: 0.0, lambda: -dist, rhs: 0.0 };
        }
        let m = self.layout.m as f64;
        let row = k - 1;
        let x_coef = self.model.b[row]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(c, v)| (c, v / m))
            .collect();
        FamilyRow { x_coef, tau: -1.0 / m, lambda: -dist, rhs: self.model.d[row] / m - self.model.d_mat[row][j] * xi }
    }

    fn cvar_coefs(&self) -> (f64, f64) {
        let g = self.model.gamma;
        (self.epsilon / g, 1.0 / (g * self.layout.n_samples as f64))
    }

    /// The full program in the documented row order. No variable bounds.
    pub fn to_standard_lp(&self) -> StandardLp {
        let l = self.layout;
        let mut cost = vec![0.0; l.num_vars()];
        cost[..l.n].copy_from_slice(&self.model.cost);
        let mut lp = StandardLp::new(cost);
        for (row, &h) in self.folded_a.iter().zip(&self.folded_h) {
            let e: Vec<(usize, f64)> = row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(c, v)| (c, *v)).collect();
            lp.add_ineq(&e, h);
        }
        let (lam, sc) = self.cvar_coefs();
        let mut cv = vec![(l.tau(), 1.0)];
        cv.extend((0..l.m).map(|j| (l.lambda(j), lam)));
        for i in 0..l.n_samples {
            cv.extend((0..l.m).map(|j| (l.s(i, j), sc)));
        }
        lp.add_ineq(&cv, 0.0);
        let mut buf = Vec::new();
        for f in 0..3 {
            for i in 0..l.n_samples {
                for k in 0..=l.n_cc {
                    for j in 0..l.m {
                        let fr = self.family(f, i, k, j);
                        buf.clear();
                        buf.extend(fr.x_coef.iter().copied());
                        buf.push((l.tau(), fr.tau));
                        buf.push((l.lambda(j), fr.lambda));
                        buf.push((l.s(i, j), -1.0));
                        lp.add_ineq(&buf, fr.rhs);
                    }
                }
            }
        }
        for j in 0..l.m {
            lp.add_ineq(&[(l.lambda(j), -1.0)], 0.0);
        }
        lp
    }

    /// With `x` fixed to `x0`: minimize the CVaR row's left side over
    /// `(τ, λ, s)` subject to the family and sign rows. Variables are
    /// `[τ, λ, s]`; rows keep the family-then-sign order.
    pub fn restriction_lp(&self, x0: &[f64]) -> StandardLp {
        let l = self.layout;
        let off = l.n;
        let (lam, sc) = self.cvar_coefs();
        let mut cost = vec![0.0; l.num_vars() - off];
        cost[0] = 1.0;
        for j in 0..l.m {
            cost[l.lambda(j) - off] = lam;
        }
        for c in cost.iter_mut().skip(1 + l.m) {
            *c = sc;
        }
        let mut lp = StandardLp::new(cost);
        let bx: Vec<f64> = self.model.b.iter().map(|r| r.iter().zip(x0).map(|(a, b)| a * b).sum()).collect();
        let m = l.m as f64;
        for f in 0..3 {
            for i in 0..l.n_samples {
                for k in 0..=l.n_cc {
                    for j in 0..l.m {
                        let fr = self.family(f, i, k, j);
                        let shift = if k == 0 { 0.0 } else { bx[k - 1] / m };
                        lp.add_ineq(
                            &[(0, fr.tau), (l.lambda(j) - off, fr.lambda), (l.s(i, j) - off, -1.0)],
                            fr.rhs - shift,
                        );
                    }
                }
            }
        }
        for j in 0..l.m {
            lp.add_ineq(&[(l.lambda(j) - off, -1.0)], 0.0);
        }
        lp
    }

    /// Largest violation of the ordinary rows at `x0`, scaled per row.
    pub fn ordinary_violation(&self, x0: &[f64]) -> f64 {
        self.folded_a
            .iter()
            .zip(&self.folded_h)
            .map(|(row, h)| {
                let s = row.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
                (row.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>() - h) / s
            })
            .fold(0.0f64, f64::max)
    }

    /// Scale used for the CVaR row (its largest coefficient).
    pub fn cvar_scale(&self) -> f64 {
        let (lam, sc) = self.cvar_coefs();
        1.0f64.max(lam).max(sc)
    }
}

/// Multipliers of the assembled program, split by row block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    /// Ordinary rows (after folding).
    pub theta: Vec<f64>,
    /// CVaR row.
    pub mu: f64,
    /// Families 1..3, each indexed `(i * (N_cc + 1) + k) * m + j`.
    pub phi: [Vec<f64>; 3],
    /// λ sign rows.
    pub eta: Vec<f64>,
}

impl Duals {
    pub fn zeros(l: &Layout) -> Self {
        Self {
            theta: vec![0.0; l.n_oc],
            mu: 0.0,
            phi: [vec![0.0; l.family_len()], vec![0.0; l.family_len()], vec![0.0; l.family_len()]],
            eta: vec![0.0; l.m],
        }
    }

    fn to_row_vector(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.push(self.mu);
        for f in &self.phi {
            v.extend_from_slice(f);
        }
        v.extend_from_slice(&self.eta);
        v
    }

    fn from_row_vector(l: &Layout, v: &[f64]) -> Self {
        let fl = l.family_len();
        let p0 = l.n_oc + 1;
        Self {
            theta: v[..l.n_oc].to_vec(),
            mu: v[l.n_oc],
            phi: [v[p0..p0 + fl].to_vec(), v[p0 + fl..p0 + 2 * fl].to_vec(), v[p0 + 2 * fl..p0 + 3 * fl].to_vec()],
            eta: v[p0 + 3 * fl..].to_vec(),
        }
    }
}

/// A full primal-dual candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktPoint {
    pub x: Vec<f64>,
    pub tau: f64,
    pub lambda: Vec<f64>,
    /// Sample-major, `s[i * m + j]`.
    pub s: Vec<f64>,
    pub duals: Duals,
    pub epsilon: f64,
}

impl KktPoint {
    fn primal_vector(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.push(self.tau);
        z.extend_from_slice(&self.lambda);
        z.extend_from_slice(&self.s);
        z
    }
}

/// Max-abs residual per block of the optimality system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity_x: f64,
    pub stationarity_tau: f64,
    pub stationarity_lambda: f64,
    pub stationarity_s: f64,
    pub complementarity_ordinary: f64,
    pub complementarity_cvar: f64,
    pub complementarity_families: [f64; 3],
    pub complementarity_sign: f64,
    pub primal_feasibility: f64,
    pub dual_feasibility: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        [
            self.stationarity_x,
            self.stationarity_tau,
            self.stationarity_lambda,
            self.stationarity_s,
            self.complementarity_ordinary,
            self.complementarity_cvar,
            self.complementarity_families[0],
            self.complementarity_families[1],
            self.complementarity_families[2],
            self.complementarity_sign,
            self.primal_feasibility,
            self.dual_feasibility,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Residuals of the Lagrangian system `c + Gᵀ(θ, μ, φ, η) = 0` of the
/// assembled program, with complementarity and feasibility measured on rows
/// scaled by their largest coefficient.
pub fn kkt_residuals(inst: &FdroInstance, point: &KktPoint) -> Result<KktResiduals> {
    let l = inst.layout;
    let z = point.primal_vector();
    if z.len() != l.num_vars() || point.duals.to_row_vector().len() != l.num_rows() {
        return Err(Error::Dimension("KKT point does not match the layout".into()));
    }
    let mut at = inst.clone();
    at.epsilon = point.epsilon;
    let lp = at.to_standard_lp();
    let y = point.duals.to_row_vector();
    let mut grad = lp.objective.clone();
    lp.ineq_matrix.add_transpose_mul(&y, &mut grad);
    let amax = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let g = &lp.ineq_matrix;
    let mut comp = vec![0.0; l.num_rows()];
    let mut primal = 0.0f64;
    for r in 0..l.num_rows() {
        let s = g.row(r).fold(0.0f64, |a, (_, v)| a.max(v.abs())).max(1e-300);
        let slack = (lp.ineq_rhs[r] - g.row_dot(r, &z)) / s;
        primal = primal.max(-slack);
        comp[r] = (y[r] * s * slack).abs();
    }
    let fl = l.family_len();
    let p0 = l.n_oc + 1;
    Ok(KktResiduals {
        stationarity_x: amax(&grad[..l.n]),
        stationarity_tau: grad[l.tau()].abs(),
        stationarity_lambda: amax(&grad[l.lambda(0)..l.lambda(0) + l.m]),
        stationarity_s: amax(&grad[l.s(0, 0)..]),
        complementarity_ordinary: amax(&comp[..l.n_oc]),
        complementarity_cvar: comp[l.n_oc],
        complementarity_families: [
            amax(&comp[p0..p0 + fl]),
            amax(&comp[p0 + fl..p0 + 2 * fl]),
            amax(&comp[p0 + 2 * fl..p0 + 3 * fl]),
        ],
        complementarity_sign: amax(&comp[p0 + 3 * fl..]),
        primal_feasibility: primal.max(0.0),
        dual_feasibility: y.iter().fold(0.0f64, |a, v| a.max(-v)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardSolution {
    pub epsilon: f64,
    pub layout: Layout,
    pub x: Vec<f64>,
    pub tau: f64,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub duals: Duals,
    pub objective: f64,
    /// The CVaR row cannot be made slack at `x`: see `cvar_slack`.
    pub cvar_binding: bool,
    /// `0 - min lhs` of the CVaR row over `(τ, λ, s)` with `x` held at the
    /// optimum, scaled by the row's largest coefficient. The auxiliaries are
    /// free, so the row's slack at the returned point alone says nothing.
    pub cvar_slack: f64,
    pub iterations: usize,
}

impl ForwardSolution {
    pub fn kkt_point(&self) -> KktPoint {
        KktPoint {
            x: self.x.clone(),
            tau: self.tau,
            lambda: self.lambda.clone(),
            s: self.s.clone(),
            duals: self.duals.clone(),
            epsilon: self.epsilon,
        }
    }
}

pub fn solve_forward(inst: &FdroInstance) -> Result<ForwardSolution> {
    solve_forward_with(inst, &Tolerances::default())
}

pub fn solve_forward_with(inst: &FdroInstance, tol: &Tolerances) -> Result<ForwardSolution> {
    let lp = inst.to_standard_lp();
    let sol = solve_lp_with(&lp, tol)?;
    match sol.status {
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::Optimal => {}
    }
    let l = inst.layout;
    let z = &sol.primal;
    let x = &z[..l.n];
    let slack_sol = solve_lp_with(&inst.restriction_lp(x), tol)?;
    let cvar_slack = if slack_sol.is_optimal() {
        (-slack_sol.objective_value / inst.cvar_scale()).max(0.0)
    } else {
        -lp.ineq_matrix.row_dot(l.cvar_row(), z) / inst.cvar_scale()
    };
    Ok(ForwardSolution {
        epsilon: inst.epsilon,
        layout: l,
        x: x.to_vec(),
        tau: z[l.tau()],
        lambda: z[l.lambda(0)..l.lambda(0) + l.m].to_vec(),
        s: z[l.s(0, 0)..].to_vec(),
        duals: Duals::from_row_vector(&l, &sol.dual_ineq),
        objective: sol.objective_value,
        cvar_binding: cvar_slack <= tol.binding,
        cvar_slack,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityVerdict {
    Optimal,
    FeasibleOnly,
    Infeasible,
}

/// Evidence behind an [`OptimalityVerdict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub verdict: OptimalityVerdict,
    /// Minimum CVaR left side with `x = x0`, scaled like the CVaR row.
    pub restriction_value: f64,
    /// `Σ λ_j / γ` at that minimum: the rate at which the left side grows with ε.
    pub restriction_slope: f64,
    pub observed_objective: f64,
    pub forward_objective: Option<f64>,
}

/// Is `x0` feasible for the program at this radius (ordinary rows and the
/// CVaR row with `x` pinned)? Does not solve the free forward problem.
pub fn restriction_feasibility(
    inst: &FdroInstance,
    x0: &[f64],
    tol: &Tolerances,
) -> Result<(bool, f64, f64)> {
    if inst.ordinary_violation(x0) > tol.feasibility {
        return Ok((false, f64::INFINITY, 0.0));
    }
    let lp = inst.restriction_lp(x0);
    let sol = solve_lp_with(&lp, tol)?;
    if !sol.is_optimal() {
        return Err(Error::NumericalFailure(format!("restriction LP ended {:?}", sol.status)));
    }
    let l = inst.layout;
    let value = sol.objective_value / inst.cvar_scale();
    let slope = sol.primal[1..1 + l.m].iter().sum::<f64>() / inst.model.gamma;
    Ok((value <= tol.feasibility, value, slope))
}

pub fn is_observation_optimal(
    model: &CcLinearProgram,
    samples: &SampleSet,
    epsilon: f64,
    x0: &Observation,
) -> Result<OptimalityCertificate> {
    is_observation_optimal_with(model, samples, epsilon, x0, &Tolerances::default())
}

pub fn is_observation_optimal_with(
    model: &CcLinearProgram,
    samples: &SampleSet,
    epsilon: f64,
    x0: &Observation,
    tol: &Tolerances,
) -> Result<OptimalityCertificate> {
    x0.check_against(model)?;
    let inst = assemble(model, samples, epsilon)?;
    let observed_objective: f64 = model.cost.iter().zip(&x0.x0).map(|(a, b)| a * b).sum();
    let (feasible, restriction_value, restriction_slope) = restriction_feasibility(&inst, &x0.x0, tol)?;
    if !feasible {
        return Ok(OptimalityCertificate {
            verdict: OptimalityVerdict::Infeasible,
            restriction_value,
            restriction_slope,
            observed_objective,
            forward_objective: None,
        });
    }
    let fwd = solve_forward_with(&inst, tol)?;
    let optimal = observed_objective <= fwd.objective + 1e-7 * (1.0 + fwd.objective.abs());
    Ok(OptimalityCertificate {
        verdict: if optimal { OptimalityVerdict::Optimal } else { OptimalityVerdict::FeasibleOnly },
        restriction_value,
        restriction_slope,
        observed_objective,
        forward_objective: Some(fwd.objective),
    })
}
