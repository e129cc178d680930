//! Maximize ε over the optimality conditions of the assembled program with
//! `x` pinned to the observation.
//!
//! Everything is read off the assembled rows: the CVaR row is the only row
//! whose coefficients move with ε, ordinary rows are those without any
//! auxiliary variable, and every other row gets a complementarity pair.
//!
//! With `x` fixed the only product left in the conditions is `μ·ε`. For
//! `μ > 0` all multipliers are divided by μ (with `q = 1/μ` on the cost),
//! which makes stationarity linear. Multiplying the auxiliary stationarity by
//! the auxiliary variables and using complementarity turns "the CVaR row is
//! tight" into the linear equation `Σ ỹ_r β_r = 0`, where `β_r` is the row's
//! right side minus its `x` part. For `μ = 0` the remaining conditions ask
//! for the largest radius at which `x0` is still feasible.
//!
//! Summed over all pairs, complementarity reads
//! `Σ ỹ_r β_r + κ0·w + ε·t = 0` with `t = δ·w >= 0`, so the one product left
//! is `ε·t`. It gets a variable `v` with the envelope `lo·t <= v <= hi·t` on an
//! interval of ε, and the search branches on that interval as well as on the
//! binaries. By weak duality an interval lying wholly above or below the
//! radius where the pinned minimum crosses zero has an infeasible relaxation,
//! which is what keeps the tree small.

use super::{binding_at, check_epsilon_bar, RecoveryConfig, RecoveryReport, TraceEntry};
use crate::ambiguity::SampleSet;
use crate::error::{Error, Result};
use crate::forward::assemble;
use crate::model::{CcLinearProgram, Observation};
use crate::solver::{solve_lp_with, solve_mixed_binary_with, LpStatus, MixedBinaryLp, StandardLp, Tolerances};

/// Fraction of a big-M a slack may reach before the encoding is deemed tight.
const AUDIT_FRACTION: f64 = 0.99;

/// The assembled program split around the pinned `x`.
struct Pinned {
    n: usize,
    cost: Vec<f64>,
    /// CVaR coefficients on the auxiliary columns: `kappa0 + eps * delta`.
    kappa0: Vec<f64>,
    delta: Vec<f64>,
    /// Rows without auxiliary variables: x part and slack at `x0`.
    ordinary: Vec<(Vec<(usize, f64)>, f64)>,
    /// Rows with auxiliary variables: x part, auxiliary part, `β`.
    comp: Vec<CompRow>,
    num_w: usize,
}

struct CompRow {
    x_part: Vec<(usize, f64)>,
    w_part: Vec<(usize, f64)>,
    beta: f64,
}

impl Pinned {
    fn build(model: &CcLinearProgram, samples: &SampleSet, x0: &[f64]) -> Result<Self> {
        let lp0 = assemble(model, samples, 0.0)?.to_standard_lp();
        let lp1 = assemble(model, samples, 1.0)?.to_standard_lp();
        let n = model.n();
        let nv = lp0.num_vars();
        let num_w = nv - n;
        let rows = lp0.ineq_matrix.nrows();
        let moving: Vec<usize> = (0..rows)
            .filter(|&r| {
                let a: Vec<_> = lp0.ineq_matrix.row(r).collect();
                let b: Vec<_> = lp1.ineq_matrix.row(r).collect();
                a != b
            })
            .collect();
        let &[cvar] = moving.as_slice() else {
            return Err(Error::Invalid(format!("expected one radius-dependent row, found {}", moving.len())));
        };
        let mut kappa0 = vec![0.0; num_w];
        let mut delta = vec![0.0; num_w];
        for (c, v) in lp0.ineq_matrix.row(cvar) {
            kappa0[c - n] = v;
        }
        for (c, v) in lp1.ineq_matrix.row(cvar) {
            delta[c - n] = v - kappa0[c - n];
        }
        let mut ordinary = Vec::new();
        let mut comp = Vec::new();
        for r in (0..rows).filter(|&r| r != cvar) {
            let (x_part, w_part): (Vec<_>, Vec<_>) = lp0.ineq_matrix.row(r).partition(|&(c, _)| c < n);
            let beta = lp0.ineq_rhs[r] - x_part.iter().map(|&(c, v)| v * x0[c]).sum::<f64>();
            if w_part.is_empty() {
                ordinary.push((x_part, beta));
            } else {
                let w_part = w_part.into_iter().map(|(c, v)| (c - n, v)).collect();
                comp.push(CompRow { x_part, w_part, beta });
            }
        }
        Ok(Self { n, cost: lp0.objective[..n].to_vec(), kappa0, delta, ordinary, comp, num_w })
    }

    fn row_scale(row: &[(usize, f64)]) -> f64 {
        row.iter().fold(1.0f64, |a, &(_, v)| a.max(v.abs()))
    }

    fn ordinary_violated(&self, tol: &Tolerances) -> bool {
        self.ordinary.iter().any(|(row, beta)| *beta < -tol.feasibility * Self::row_scale(row))
    }

    fn active_ordinary(&self, tol: &Tolerances) -> Vec<usize> {
        (0..self.ordinary.len())
            .filter(|&r| self.ordinary[r].1 <= tol.feasibility.sqrt() * Self::row_scale(&self.ordinary[r].0))
            .collect()
    }

    /// `min κ(ε)·w` over the auxiliary rows.
    fn pinned_lp(&self, eps: f64) -> StandardLp {
        let obj = self.kappa0.iter().zip(&self.delta).map(|(a, d)| a + eps * d).collect();
        let mut lp = StandardLp::new(obj);
        for r in &self.comp {
            lp.add_ineq(&r.w_part, r.beta);
        }
        lp
    }

    /// Exact multiplier bounds. A column whose row coefficients are all
    /// nonpositive has `Σ ỹ_r |G_rc| = κ_c(ε)`, which caps every `ỹ_r` on it.
    fn dual_bounds(&self, eps_bar: f64) -> Vec<Option<f64>> {
        let mut one_signed = vec![true; self.num_w];
        for r in &self.comp {
            for &(c, v) in &r.w_part {
                if v > 0.0 {
                    one_signed[c] = false;
                }
            }
        }
        self.comp
            .iter()
            .map(|r| {
                r.w_part
                    .iter()
                    .filter(|&&(c, v)| v < 0.0 && one_signed[c])
                    .map(|&(c, v)| (self.kappa0[c] + self.delta[c].max(0.0) * eps_bar) / -v)
                    .filter(|b| b.is_finite() && *b >= 0.0)
                    .reduce(f64::min)
            })
            .collect()
    }
}

struct Reference {
    slack_m: Vec<f64>,
    /// Minimum of the pinned LP at ε̄, unscaled.
    value_at_bar: f64,
    iterations: usize,
}

fn reference(p: &Pinned, cfg: &RecoveryConfig) -> Result<Reference> {
    let mut mag = vec![0.0f64; p.comp.len()];
    let mut value_at_bar = f64::NAN;
    let mut iterations = 0;
    for eps in [0.0, cfg.epsilon_bar] {
        let lp = p.pinned_lp(eps);
        let sol = solve_lp_with(&lp, &cfg.tolerances)?;
        iterations += 1;
        if !sol.is_optimal() {
            return Err(Error::NumericalFailure(format!("pinned reference LP at {eps} ended {:?}", sol.status)));
        }
        for (m, r) in mag.iter_mut().zip(&p.comp) {
            let g: f64 = r.w_part.iter().map(|&(c, v)| v * sol.primal[c]).sum();
            *m = m.max((r.beta - g).abs());
        }
        value_at_bar = sol.objective_value;
    }
    let slack_m = mag.iter().map(|m| cfg.big_m_scale * m.max(1.0)).collect();
    Ok(Reference { slack_m, value_at_bar, iterations })
}

/// Column layout of the mixed-binary program.
struct Cols {
    eps: usize,
    theta: Vec<usize>,
    y: usize,
    w: usize,
    b: usize,
    /// Stands in for `ε·t`.
    v: usize,
    /// Relaxation slacks: `(x-stationarity ±, binding ±)`.
    slack: Option<usize>,
    /// Complementarity violation per unit of each `theta` (relaxed only).
    theta_price: Vec<f64>,
    total: usize,
}

struct Built {
    mip: MixedBinaryLp,
    cols: Cols,
}

/// `with_x`: keep the x-stationarity block (`μ > 0`). `relax`: noise weight.
fn build_mip(
    p: &Pinned,
    cfg: &RecoveryConfig,
    refs: &Reference,
    active: &[usize],
    with_x: bool,
    relax: Option<f64>,
) -> Built {
    let nc = p.comp.len();
    let eps = 0;
    let mut next = 1;
    let q = with_x.then(|| {
        next += 1;
        next - 1
    });
    let theta: Vec<usize> = if with_x {
        let t = (next..next + active.len()).collect();
        next += active.len();
        t
    } else {
        Vec::new()
    };
    let y = next;
    let w = y + nc;
    let b = w + p.num_w;
    let v = b + nc;
    let mut total = v + 1;
    let slack = relax.map(|_| {
        let s = total;
        total += 2 * p.n + 2;
        s
    });
    let theta_price = match relax {
        Some(_) => active.iter().map(|&r| p.ordinary[r].1.abs()).collect(),
        None => vec![0.0; theta.len()],
    };
    let cols = Cols { eps, theta, y, w, b, v, slack, theta_price, total };

    let mut obj = vec![0.0; total];
    obj[eps] = -1.0;
    let mut lp = StandardLp::new(obj);
    lp.bounds[eps] = (0.0, cfg.epsilon_bar);
    if let Some(q) = q {
        lp.bounds[q] = (0.0, f64::INFINITY);
    }
    for &t in &cols.theta {
        lp.bounds[t] = (0.0, f64::INFINITY);
    }
    let ub = p.dual_bounds(cfg.epsilon_bar);
    let mut big_m = Vec::with_capacity(2 * nc);
    let mut dual_m = Vec::with_capacity(nc);
    for (r, u) in ub.iter().enumerate() {
        // No exact cap available: fall back to a scaled reference value.
        let u = u.unwrap_or(cfg.big_m_scale * refs.slack_m[r].max(1.0));
        lp.bounds[y + r] = (0.0, u);
        lp.bounds[b + r] = (0.0, 1.0);
        dual_m.push(u);
    }
    if let (Some(s), Some(wt)) = (slack, relax) {
        for k in 0..2 * p.n + 2 {
            lp.bounds[s + k] = (0.0, f64::INFINITY);
            lp.objective[s + k] = wt;
        }
        // Ordinary rows may carry a multiplier at a price proportional to
        // their slack: a relaxed complementarity.
        for (&t, &price) in cols.theta.iter().zip(&cols.theta_price) {
            lp.objective[t] = wt * price;
        }
    }

    if let Some(q) = q {
        for c in 0..p.n {
            let mut row: Vec<(usize, f64)> = vec![(q, p.cost[c])];
            for (&t, &r) in cols.theta.iter().zip(active) {
                if let Some(&(_, v)) = p.ordinary[r].0.iter().find(|e| e.0 == c) {
                    row.push((t, v));
                }
            }
            for (r, cr) in p.comp.iter().enumerate() {
                if let Some(&(_, v)) = cr.x_part.iter().find(|e| e.0 == c) {
                    row.push((y + r, v));
                }
            }
            if let Some(s) = slack {
                row.push((s + 2 * c, 1.0));
                row.push((s + 2 * c + 1, -1.0));
            }
            lp.add_eq(&row, 0.0);
        }
    }
    let mut cols_w: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_w];
    for (r, cr) in p.comp.iter().enumerate() {
        for &(c, v) in &cr.w_part {
            cols_w[c].push((y + r, v));
        }
    }
    for (c, mut row) in cols_w.into_iter().enumerate() {
        if p.delta[c] != 0.0 {
            row.push((eps, p.delta[c]));
        }
        lp.add_eq(&row, -p.kappa0[c]);
    }
    let mut bind: Vec<(usize, f64)> = p.comp.iter().enumerate().map(|(r, cr)| (y + r, cr.beta)).collect();
    if let Some(s) = slack {
        bind.push((s + 2 * p.n, 1.0));
        bind.push((s + 2 * p.n + 1, -1.0));
    }
    lp.add_eq(&bind, 0.0);

    for (r, cr) in p.comp.iter().enumerate() {
        let wrow: Vec<(usize, f64)> = cr.w_part.iter().map(|&(c, v)| (w + c, v)).collect();
        lp.add_ineq(&wrow, cr.beta);
        lp.add_ineq(&[(y + r, 1.0), (b + r, -dual_m[r])], 0.0);
        let m = refs.slack_m[r];
        let mut srow: Vec<(usize, f64)> = cr.w_part.iter().map(|&(c, v)| (w + c, -v)).collect();
        srow.push((b + r, m));
        lp.add_ineq(&srow, m - cr.beta);
        big_m.push(m);
    }
    // Summed complementarity, exact once every pair is settled.
    let mut agg: Vec<(usize, f64)> = p.comp.iter().enumerate().map(|(r, cr)| (y + r, cr.beta)).collect();
    agg.extend((0..p.num_w).filter(|&c| p.kappa0[c] != 0.0).map(|c| (w + c, p.kappa0[c])));
    agg.push((v, 1.0));
    lp.add_eq(&agg, 0.0);
    lp.bounds[v] = (0.0, f64::INFINITY);
    lp.add_ineq(&envelope_row(p, &cols, cfg.epsilon_bar, true), 0.0);

    big_m.extend(dual_m);
    let mip = MixedBinaryLp { base: lp, binary_indices: (b..b + nc).collect(), big_m_values: big_m };
    Built { mip, cols }
}

/// `v - hi·t <= 0` when `upper`, else `lo·t - v <= 0`.
fn envelope_row(p: &Pinned, cols: &Cols, at: f64, upper: bool) -> Vec<(usize, f64)> {
    let sign = if upper { -1.0 } else { 1.0 };
    let mut row: Vec<(usize, f64)> =
        (0..p.num_w).filter(|&c| p.delta[c] != 0.0).map(|c| (cols.w + c, sign * at * p.delta[c])).collect();
    row.push((cols.v, -sign));
    row
}

struct MipOutcome {
    eps: f64,
    slack_total: f64,
    nodes: usize,
}

/// Post-solve audit: no slack may sit at its big-M.
fn audit(p: &Pinned, cols: &Cols, refs: &Reference, z: &[f64]) -> Result<()> {
    for (r, cr) in p.comp.iter().enumerate() {
        let g: f64 = cr.w_part.iter().map(|&(c, v)| v * z[cols.w + c]).sum();
        let slack = cr.beta - g;
        if slack > AUDIT_FRACTION * refs.slack_m[r] {
            return Err(Error::BigMTooTight(format!(
                "slack of complementarity row {r} is {slack}, big-M is {}; raise big_m_scale",
                refs.slack_m[r]
            )));
        }
    }
    Ok(())
}

fn outcome(p: &Pinned, built: &Built, refs: &Reference, z: &[f64], nodes: usize, eps_bar: f64) -> Result<MipOutcome> {
    let cols = &built.cols;
    audit(p, cols, refs, z)?;
    let mut slack_total = cols.slack.map_or(0.0, |s| z[s..cols.total].iter().sum::<f64>());
    slack_total += cols.theta.iter().zip(&cols.theta_price).map(|(&t, w)| z[t] * w).sum::<f64>();
    Ok(MipOutcome { eps: z[cols.eps].clamp(0.0, eps_bar), slack_total, nodes })
}

/// The relaxation restricted to `lo <= ε <= hi` with the tighter envelope.
fn interval_lp(p: &Pinned, built: &Built, lo: f64, hi: f64) -> StandardLp {
    let mut lp = built.mip.base.clone();
    lp.bounds[built.cols.eps] = (lo, hi);
    lp.add_ineq(&envelope_row(p, &built.cols, lo, false), 0.0);
    lp.add_ineq(&envelope_row(p, &built.cols, hi, true), 0.0);
    lp
}

/// Settle every pair the way the relaxed point leans and solve what is left.
/// Any feasible point of that LP satisfies the full conditions.
fn fix_pattern(p: &Pinned, built: &Built, refs: &Reference, z: &[f64], tol: &Tolerances) -> Result<Option<Vec<f64>>> {
    let cols = &built.cols;
    let mut lp = built.mip.base.clone();
    for (r, cr) in p.comp.iter().enumerate() {
        let g: f64 = cr.w_part.iter().map(|&(c, v)| v * z[cols.w + c]).sum();
        let slack = (cr.beta - g).max(0.0) / refs.slack_m[r];
        let dual = z[cols.y + r] / built.mip.big_m_values[p.comp.len() + r];
        let side = if dual >= slack { 1.0 } else { 0.0 };
        lp.bounds[cols.b + r] = (side, side);
    }
    let sol = solve_lp_with(&lp, tol)?;
    Ok(sol.is_optimal().then_some(sol.primal))
}

/// Best-first search over intervals of ε. Each node solves one relaxation
/// and one pattern LP; an interval narrower than `width` that still beats
/// the incumbent goes to the binary branch-and-bound.
fn solve_mip(p: &Pinned, cfg: &RecoveryConfig, built: &Built, refs: &Reference) -> Result<Option<MipOutcome>> {
    let tol = &cfg.tolerances;
    let width = 0.1 * cfg.bisection_tol;
    let obj = |z: &[f64]| built.mip.base.objective.iter().zip(z).map(|(c, v)| c * v).sum::<f64>();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut open: Vec<(f64, f64, f64)> = vec![(f64::NEG_INFINITY, 0.0, cfg.epsilon_bar)];
    let mut nodes = 0;
    let beats = |bound: f64, best: &Option<(f64, Vec<f64>)>| best.as_ref().is_none_or(|(o, _)| bound < o - width);
    while let Some(i) = (0..open.len()).min_by(|&a, &b| open[a].0.total_cmp(&open[b].0)) {
        let (bound, lo, hi) = open.swap_remove(i);
        if !beats(bound, &best) {
            break;
        }
        nodes += 1;
        if nodes > cfg.node_limit {
            return Err(Error::NodeLimitExceeded(cfg.node_limit));
        }
        let lp = interval_lp(p, built, lo, hi);
        let sol = solve_lp_with(&lp, tol)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => {}
        }
        if !beats(sol.objective_value, &best) {
            continue;
        }
        if let Some(z) = fix_pattern(p, built, refs, &sol.primal, tol)? {
            let o = obj(&z);
            if best.as_ref().is_none_or(|(b, _)| o < *b) {
                best = Some((o, z));
            }
        }
        if !beats(sol.objective_value, &best) {
            continue;
        }
        if hi - lo > width {
            let mid = 0.5 * (lo + hi);
            open.push((sol.objective_value, lo, mid));
            open.push((sol.objective_value, mid, hi));
            continue;
        }
        let mip = MixedBinaryLp { base: lp, ..built.mip.clone() };
        let out = solve_mixed_binary_with(&mip, tol, cfg.node_limit)?;
        nodes += out.nodes;
        if out.solution.status == LpStatus::Optimal {
            let o = out.solution.objective_value;
            if best.as_ref().is_none_or(|(b, _)| o < *b) {
                best = Some((o, out.solution.primal));
            }
        }
    }
    best.map(|(_, z)| outcome(p, built, refs, &z, nodes, cfg.epsilon_bar)).transpose()
}

/// Can `c + Σ θ_r a_r = 0` hold with `θ >= 0` on the rows tight at `x0`?
fn stationary_without_chance(p: &Pinned, active: &[usize], tol: &Tolerances) -> Result<bool> {
    let mut lp = StandardLp::new(vec![0.0; active.len()]);
    for b in lp.bounds.iter_mut() {
        *b = (0.0, f64::INFINITY);
    }
    for c in 0..p.n {
        let row: Vec<(usize, f64)> = active
            .iter()
            .enumerate()
            .filter_map(|(k, &r)| p.ordinary[r].0.iter().find(|e| e.0 == c).map(|&(_, v)| (k, v)))
            .collect();
        if row.is_empty() {
            if p.cost[c].abs() > tol.feasibility {
                return Ok(false);
            }
            continue;
        }
        lp.add_eq(&row, -p.cost[c]);
    }
    Ok(solve_lp_with(&lp, tol)?.status == LpStatus::Optimal)
}

fn prepare(
    model: &CcLinearProgram,
    samples: &SampleSet,
    x0: &Observation,
    cfg: &RecoveryConfig,
) -> Result<(Pinned, f64)> {
    model.check()?;
    x0.check_against(model)?;
    let emax = check_epsilon_bar(samples, cfg)?;
    let p = Pinned::build(model, samples, &x0.x0)?;
    if p.comp.len() > cfg.max_milp_pairs {
        return Err(Error::Config(format!(
            "{} complementarity pairs exceed max_milp_pairs = {}; use the bisection engine",
            p.comp.len(),
            cfg.max_milp_pairs
        )));
    }
    Ok((p, emax))
}

struct Ctx<'a> {
    model: &'a CcLinearProgram,
    samples: &'a SampleSet,
    cfg: &'a RecoveryConfig,
    emax: f64,
}

impl Ctx<'_> {
    fn report(
        &self,
        engine: &str,
        epsilon_star: f64,
        iterations: usize,
        total_slack: Option<f64>,
        trace: Vec<TraceEntry>,
    ) -> Result<RecoveryReport> {
        let cfg = self.cfg;
        Ok(RecoveryReport {
            epsilon_star,
            epsilon_bar: cfg.epsilon_bar,
            failed: epsilon_star >= cfg.epsilon_bar * (1.0 - 1e-9),
            engine: engine.into(),
            iterations,
            per_engine: None,
            binding_at_star: binding_at(self.model, self.samples, epsilon_star, &cfg.tolerances)?,
            epsilon_max: self.emax,
            total_slack,
            trace,
        })
    }
}

pub fn recover_kkt_milp(
    model: &CcLinearProgram,
    samples: &SampleSet,
    x0: &Observation,
    cfg: &RecoveryConfig,
) -> Result<RecoveryReport> {
    let (p, emax) = prepare(model, samples, x0, cfg)?;
    let ctx = Ctx { model, samples, cfg, emax };
    let tol = &cfg.tolerances;
    let not_rationalizable = Error::NotRationalizable { epsilon_bar: cfg.epsilon_bar };
    if p.ordinary_violated(tol) {
        return Err(not_rationalizable);
    }
    let active = p.active_ordinary(tol);
    let refs = reference(&p, cfg)?;
    let mut iterations = refs.iterations;
    let mut trace = Vec::new();

    if stationary_without_chance(&p, &active, tol)? {
        // Zero CVaR multiplier: x0 is optimal wherever it is feasible.
        let scale = 1.0f64.max(p.kappa0.iter().zip(&p.delta).map(|(a, d)| a + cfg.epsilon_bar * d).fold(0.0, f64::max));
        if refs.value_at_bar / scale <= tol.feasibility {
            trace.push(TraceEntry { epsilon: cfg.epsilon_bar, verdict: "optimal".into() });
            return ctx.report("kkt_milp", cfg.epsilon_bar, iterations, None, trace);
        }
        let built = build_mip(&p, cfg, &refs, &active, false, None);
        if let Some(out) = solve_mip(&p, cfg, &built, &refs)? {
            iterations += out.nodes;
            trace.push(TraceEntry { epsilon: out.eps, verdict: "optimal".into() });
            return ctx.report("kkt_milp", out.eps, iterations, None, trace);
        }
    }
    let built = build_mip(&p, cfg, &refs, &active, true, None);
    match solve_mip(&p, cfg, &built, &refs)? {
        Some(out) => {
            iterations += out.nodes;
            trace.push(TraceEntry { epsilon: out.eps, verdict: "optimal".into() });
            ctx.report("kkt_milp", out.eps, iterations, None, trace)
        }
        None => Err(not_rationalizable),
    }
}

/// Noise-tolerant variant: slacks on the x-stationarity rows and on the
/// binding equation, and a multiplier allowed on every ordinary row at a
/// price proportional to that row's slack. Objective
/// `(ε̄ - ε) + noise_weight · total slack`.
pub fn recover_relaxed(
    model: &CcLinearProgram,
    samples: &SampleSet,
    x0: &Observation,
    cfg: &RecoveryConfig,
    noise_weight: f64,
) -> Result<RecoveryReport> {
    if !(noise_weight > 0.0) {
        return Err(Error::Config("noise_weight must be positive".into()));
    }
    let (p, emax) = prepare(model, samples, x0, cfg)?;
    let tol = &cfg.tolerances;
    let refs = reference(&p, cfg)?;
    let active = p.active_ordinary(tol);
    if stationary_without_chance(&p, &active, tol)? && !p.ordinary_violated(tol) {
        // Exact multipliers exist without the chance constraint.
        return recover_kkt_milp(model, samples, x0, cfg);
    }
    let all: Vec<usize> = (0..p.ordinary.len()).collect();
    let built = build_mip(&p, cfg, &refs, &all, true, Some(noise_weight));
    match solve_mip(&p, cfg, &built, &refs)? {
        Some(out) => {
            let trace = vec![TraceEntry { epsilon: out.eps, verdict: "relaxed".into() }];
            let ctx = Ctx { model, samples, cfg, emax };
            ctx.report("relaxed", out.eps, refs.iterations + out.nodes, Some(out.slack_total), trace)
        }
        None => Err(Error::NotRationalizable { epsilon_bar: cfg.epsilon_bar }),
    }
}
