//! Bounded primal simplex over rows `lo <= a·z <= hi` with free `z`.
//!
//! A vertex is described by `n` working rows held at one of their bounds.
//! Free directions that are not yet pinned by a real row are covered by
//! artificial rows `z_j = 0`; these leave the working set as soon as their
//! multiplier is nonzero and never come back. Phase 1 minimizes the sum of
//! row infeasibilities with a long-step ratio test, phase 2 uses Dantzig
//! pricing with a Harris ratio test, falling back to Bland's rule after a long
//! degenerate run.

use super::{LpSolution, LpStatus, StandardLp, Tolerances};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Artificial(usize),
    Lower(usize),
    Upper(usize),
    Fixed(usize),
}

impl Slot {
    /// Ordering key for Bland's rule.
    fn key(self, n: usize) -> usize {
        match self {
            Slot::Artificial(j) => j,
            Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) => n + r,
        }
    }
}

/// Scaled rows in both row- and column-compressed form.
struct Rows {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    scale: Vec<f64>,
    /// Number of inequality and equality rows; bound rows follow.
    n_ineq: usize,
    n_eq: usize,
    /// Bound row of each variable, if it has a finite bound.
    bound_row: Vec<usize>,
}

impl Rows {
    fn build(lp: &StandardLp) -> Self {
        let n = lp.num_vars();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut scale = Vec::new();
        let mut push = |entries: Vec<(usize, f64)>, l: f64, h: f64| {
            let s = entries.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            let s = if s > 0.0 { s } else { 1.0 };
            for (j, v) in entries {
                cols.push(j);
                vals.push(v / s);
            }
            row_ptr.push(cols.len());
            lo.push(l / s);
            hi.push(h / s);
            scale.push(s);
        };
        for (r, &rhs) in lp.ineq_rhs.iter().enumerate() {
            push(lp.ineq_matrix.row(r).collect(), f64::NEG_INFINITY, rhs);
        }
        for (r, &rhs) in lp.eq_rhs.iter().enumerate() {
            push(lp.eq_matrix.row(r).collect(), rhs, rhs);
        }
        let mut bound_row = vec![NONE; n];
        let base = lp.ineq_rhs.len() + lp.eq_rhs.len();
        let mut next = base;
        for (j, &(l, u)) in lp.bounds.iter().enumerate() {
            if l.is_finite() || u.is_finite() {
                push(vec![(j, 1.0)], l, u);
                bound_row[j] = next;
                next += 1;
            }
        }
        let m = lo.len();
        let mut count = vec![0usize; n + 1];
        for &j in &cols {
            count[j + 1] += 1;
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let col_ptr = count.clone();
        let mut fill = count;
        let mut col_rows = vec![0; cols.len()];
        let mut col_vals = vec![0.0; cols.len()];
        for r in 0..m {
            for k in row_ptr[r]..row_ptr[r + 1] {
                let j = cols[k];
                col_rows[fill[j]] = r;
                col_vals[fill[j]] = vals[k];
                fill[j] += 1;
            }
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
            col_ptr,
            col_rows,
            col_vals,
            lo,
            hi,
            scale,
            n_ineq: lp.ineq_rhs.len(),
            n_eq: lp.eq_rhs.len(),
            bound_row,
        }
    }

    fn m(&self) -> usize {
        self.lo.len()
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    fn row_dot(&self, r: usize, z: &[f64]) -> f64 {
        self.row(r).map(|(j, v)| v * z[j]).sum()
    }
}

struct Simplex<'a> {
    rows: Rows,
    cost: Vec<f64>,
    tol: &'a Tolerances,
    n: usize,
    /// Inverse of the working matrix, `binv[i * n + p]` = (M⁻¹)[i][p].
    binv: Vec<f64>,
    work: Vec<Slot>,
    pos_of: Vec<usize>,
    z: Vec<f64>,
    act: Vec<f64>,
    // scratch
    alpha: Vec<f64>,
    touched: Vec<usize>,
    mark: Vec<bool>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

enum Step {
    Pivot { t: f64, row: usize, slot: Slot },
    Flip { t: f64 },
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(lp: &StandardLp, tol: &'a Tolerances) -> Self {
        let rows = Rows::build(lp);
        let n = rows.n;
        let m = rows.m();
        let mut binv = vec![0.0; n * n];
        for i in 0..n {
            binv[i * n + i] = 1.0;
        }
        Self {
            cost: lp.objective.clone(),
            tol,
            n,
            binv,
            work: (0..n).map(Slot::Artificial).collect(),
            pos_of: vec![NONE; m],
            z: vec![0.0; n],
            act: vec![0.0; m],
            alpha: vec![0.0; m],
            touched: Vec::new(),
            mark: vec![false; m],
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
            rows,
        }
    }

    fn slot_value(&self, s: Slot) -> f64 {
        match s {
            Slot::Artificial(_) => 0.0,
            Slot::Lower(r) | Slot::Fixed(r) => self.rows.lo[r],
            Slot::Upper(r) => self.rows.hi[r],
        }
    }

    fn slot_entries(&self, s: Slot) -> Vec<(usize, f64)> {
        match s {
            Slot::Artificial(j) => vec![(j, 1.0)],
            Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) => self.rows.row(r).collect(),
        }
    }

    /// Rebuild `M⁻¹` from scratch with Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        // sparse rows of M and of the identity, eliminated together
        let mut a: Vec<Vec<(usize, f64)>> = self.work.iter().map(|&s| self.slot_entries(s)).collect();
        let mut inv: Vec<Vec<(usize, f64)>> = (0..n).map(|p| vec![(p, 1.0)]).collect();
        // column -> rows holding a nonzero in that column (lazy, may be stale)
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, row) in a.iter().enumerate() {
            for &(j, _) in row {
                col_rows[j].push(p);
            }
        }
        let mut done = vec![false; n];
        let mut pivot_row_of_col = vec![NONE; n];
        // eliminate columns in order of increasing count
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&j| (col_rows[j].len(), j));
        let mut dense = vec![NONE; n];
        let mut dense_inv = vec![NONE; n];
        for &j in &order {
            let mut best = NONE;
            let mut best_val = 0.0f64;
            col_rows[j].sort_unstable();
            col_rows[j].dedup();
            for &p in &col_rows[j] {
                if done[p] {
                    continue;
                }
                if let Some(&(_, v)) = a[p].iter().find(|(c, _)| *c == j) {
                    let rank = v.abs() / (1.0 + a[p].len() as f64).sqrt();
                    if v.abs() > 1e-11 && rank > best_val {
                        best_val = rank;
                        best = p;
                    }
                }
            }
            if best == NONE {
                return Err(Error::NumericalFailure("singular working matrix".into()));
            }
            let piv = a[best].iter().find(|(c, _)| *c == j).unwrap().1;
            for e in a[best].iter_mut() {
                e.1 /= piv;
            }
            for e in inv[best].iter_mut() {
                e.1 /= piv;
            }
            done[best] = true;
            pivot_row_of_col[j] = best;
            let prow = a[best].clone();
            let pinv = inv[best].clone();
            let targets: Vec<usize> = col_rows[j].iter().copied().filter(|&p| p != best).collect();
            for p in targets {
                let f = match a[p].iter().find(|(c, _)| *c == j) {
                    Some(&(_, v)) => v,
                    None => continue,
                };
                if f == 0.0 {
                    continue;
                }
                axpy_sparse(&mut a[p], &prow, -f, &mut dense, Some(&mut col_rows), p);
                a[p].retain(|&(c, v)| c != j && v.abs() > 1e-14);
                axpy_sparse(&mut inv[p], &pinv, -f, &mut dense_inv, None, p);
            }
        }
        // row p of the eliminated system now reads z_{col(p)} = inv[p]·b
        let mut binv = vec![0.0; n * n];
        for j in 0..n {
            let p = pivot_row_of_col[j];
            for &(q, v) in &inv[p] {
                binv[j * n + q] = v;
            }
        }
        self.binv = binv;
        self.since_refactor = 0;
        Ok(())
    }

    fn recompute_primal(&mut self) {
        let n = self.n;
        let b: Vec<f64> = self.work.iter().map(|&s| self.slot_value(s)).collect();
        let mut z = self.apply_binv(&b);
        for _ in 0..2 {
            let res: Vec<f64> = self
                .work
                .iter()
                .enumerate()
                .map(|(p, &s)| {
                    let av: f64 = match s {
                        Slot::Artificial(j) => z[j],
                        Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) => self.rows.row_dot(r, &z),
                    };
                    b[p] - av
                })
                .collect();
            if res.iter().all(|v| v.abs() < 1e-15) {
                break;
            }
            let dz = self.apply_binv(&res);
            for i in 0..n {
                z[i] += dz[i];
            }
        }
        self.z = z;
        for r in 0..self.rows.m() {
            self.act[r] = self.rows.row_dot(r, &self.z);
        }
        for &s in &self.work {
            if let Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) = s {
                self.act[r] = self.slot_value(s);
            }
        }
    }

    /// `M⁻¹ b`.
    fn apply_binv(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.binv[i * n..(i + 1) * n];
            *o = row.iter().zip(b).map(|(x, y)| x * y).sum();
        }
        out
    }

    /// `gᵀ M⁻¹`.
    fn price(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (i, &gi) in g.iter().enumerate() {
            if gi != 0.0 {
                let row = &self.binv[i * n..(i + 1) * n];
                for (yp, &b) in y.iter_mut().zip(row) {
                    *yp += gi * b;
                }
            }
        }
        y
    }

    /// Gradient of the sum of infeasibilities over non-working rows.
    fn infeasibility_gradient(&self) -> Option<Vec<f64>> {
        let ftol = self.tol.feasibility;
        let mut g = vec![0.0; self.n];
        let mut any = false;
        for r in 0..self.rows.m() {
            if self.pos_of[r] != NONE {
                continue;
            }
            let a = self.act[r];
            let sign = if a < self.rows.lo[r] - ftol {
                -1.0
            } else if a > self.rows.hi[r] + ftol {
                1.0
            } else {
                continue;
            };
            any = true;
            for (j, v) in self.rows.row(r) {
                g[j] += sign * v;
            }
        }
        any.then_some(g)
    }

    /// Pick the working position to release; returns `(position, direction sign, |c·d|)`.
    fn choose_leaving(&self, y: &[f64], dtol: f64) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (p, &s) in self.work.iter().enumerate() {
            let yp = y[p];
            let (score, sign) = match s {
                Slot::Artificial(_) if yp.abs() > dtol => (yp.abs(), -yp.signum()),
                Slot::Lower(_) if yp < -dtol => (-yp, 1.0),
                Slot::Upper(_) if yp > dtol => (yp, -1.0),
                _ => continue,
            };
            let better = match best {
                None => true,
                Some((bp, _, bs)) => {
                    if self.bland {
                        s.key(self.n) < self.work[bp].key(self.n)
                    } else {
                        score > bs
                    }
                }
            };
            if better {
                best = Some((p, sign, score));
            }
        }
        best
    }

    fn direction(&self, p: usize, sign: f64) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| sign * self.binv[i * n + p]).collect()
    }

    /// `alpha = A d`, recording touched rows.
    fn row_rates(&mut self, d: &[f64]) {
        for &r in &self.touched {
            self.alpha[r] = 0.0;
            self.mark[r] = false;
        }
        self.touched.clear();
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let drop = 1e-14 * dmax.max(1.0);
        for (j, &dj) in d.iter().enumerate() {
            if dj.abs() <= drop {
                continue;
            }
            for k in self.rows.col_ptr[j]..self.rows.col_ptr[j + 1] {
                let r = self.rows.col_rows[k];
                if !self.mark[r] {
                    self.mark[r] = true;
                    self.touched.push(r);
                }
                self.alpha[r] += self.rows.col_vals[k] * dj;
            }
        }
    }

    fn flip_length(&self, p: usize) -> Option<f64> {
        match self.work[p] {
            Slot::Lower(r) | Slot::Upper(r) if self.rows.lo[r].is_finite() && self.rows.hi[r].is_finite() => {
                Some(self.rows.hi[r] - self.rows.lo[r])
            }
            _ => None,
        }
    }

    fn entering_slot(&self, r: usize, upper: bool) -> Slot {
        if self.rows.lo[r] == self.rows.hi[r] {
            Slot::Fixed(r)
        } else if upper {
            Slot::Upper(r)
        } else {
            Slot::Lower(r)
        }
    }

    fn ratio_phase2(&self, p: usize) -> Step {
        let ptol = self.tol.pivot;
        let delta = 0.5 * self.tol.feasibility;
        let flip = self.flip_length(p);
        if self.bland {
            let mut best: Option<(f64, usize, bool)> = None;
            for &r in &self.touched {
                let a = self.alpha[r];
                if self.pos_of[r] != NONE || a.abs() <= ptol {
                    continue;
                }
                let (t, upper) = if a > 0.0 {
                    ((self.rows.hi[r] - self.act[r]) / a, true)
                } else {
                    ((self.rows.lo[r] - self.act[r]) / a, false)
                };
                if !t.is_finite() {
                    continue;
                }
                let t = t.max(0.0);
                let better = match best {
                    None => true,
                    Some((bt, br, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && r < br),
                };
                if better {
                    best = Some((t, r, upper));
                }
            }
            return match (best, flip) {
                (Some((t, _, _)), Some(f)) if f <= t => Step::Flip { t: f },
                (None, Some(f)) => Step::Flip { t: f },
                (Some((t, r, upper)), _) => Step::Pivot { t, row: r, slot: self.entering_slot(r, upper) },
                (None, None) => Step::Unbounded,
            };
        }
        // Harris pass 1: largest step keeping every row within `delta`
        let mut tmax = f64::INFINITY;
        for &r in &self.touched {
            let a = self.alpha[r];
            if self.pos_of[r] != NONE || a.abs() <= ptol {
                continue;
            }
            let t = if a > 0.0 {
                (self.rows.hi[r] - self.act[r] + delta) / a
            } else {
                (self.rows.lo[r] - self.act[r] - delta) / a
            };
            if t < tmax {
                tmax = t;
            }
        }
        if let Some(f) = flip {
            tmax = tmax.min(f + delta);
        }
        if tmax == f64::INFINITY {
            return Step::Unbounded;
        }
        // pass 2: among rows blocking before tmax, the largest pivot
        let mut best: Option<(f64, f64, usize, bool)> = None;
        for &r in &self.touched {
            let a = self.alpha[r];
            if self.pos_of[r] != NONE || a.abs() <= ptol {
                continue;
            }
            let (t, upper) = if a > 0.0 {
                ((self.rows.hi[r] - self.act[r]) / a, true)
            } else {
                ((self.rows.lo[r] - self.act[r]) / a, false)
            };
            if t <= tmax && best.is_none_or(|(_, ba, _, _)| a.abs() > ba) {
                best = Some((t, a.abs(), r, upper));
            }
        }
        match (best, flip) {
            (_, Some(f)) if f <= tmax && best.is_none_or(|(t, _, _, _)| f <= t) => Step::Flip { t: f },
            (Some((t, _, r, upper)), _) => Step::Pivot { t: t.max(0.0), row: r, slot: self.entering_slot(r, upper) },
            (None, Some(f)) => Step::Flip { t: f },
            (None, None) => Step::Unbounded,
        }
    }

    /// Long-step ratio test on the piecewise-linear sum of infeasibilities.
    fn ratio_phase1(&self, p: usize, slope0: f64) -> Step {
        let ftol = self.tol.feasibility;
        let ptol = self.tol.pivot;
        // (t, |alpha|, row, enters at upper); row NONE marks a bound flip
        let mut bps: Vec<(f64, f64, usize, bool)> = Vec::new();
        for &r in &self.touched {
            let a = self.alpha[r];
            if self.pos_of[r] != NONE || a.abs() <= 1e-12 {
                continue;
            }
            let (lo, hi, x) = (self.rows.lo[r], self.rows.hi[r], self.act[r]);
            if a > 0.0 {
                if x < lo - ftol {
                    bps.push(((lo - x) / a, a, r, false));
                    if hi.is_finite() {
                        bps.push(((hi - x) / a, a, r, true));
                    }
                } else if x <= hi + ftol && hi.is_finite() {
                    bps.push((((hi - x) / a).max(0.0), a, r, true));
                }
            } else if x > hi + ftol {
                bps.push(((hi - x) / a, -a, r, true));
                if lo.is_finite() {
                    bps.push(((lo - x) / a, -a, r, false));
                }
            } else if x >= lo - ftol && lo.is_finite() {
                bps.push((((lo - x) / a).max(0.0), -a, r, false));
            }
        }
        if let Some(f) = self.flip_length(p) {
            bps.push((f, 1.0, NONE, false));
        }
        if bps.is_empty() {
            return Step::Unbounded;
        }
        bps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let mut slope = slope0;
        let mut stop = bps.len() - 1;
        for (k, bp) in bps.iter().enumerate() {
            slope += bp.1;
            if slope >= -1e-12 * slope0.abs() {
                stop = k;
                break;
            }
        }
        let t_stop = bps[stop].0;
        let window = t_stop - 1e-9 * t_stop.abs().max(1.0);
        let mut pick = NONE;
        for k in (0..=stop).rev() {
            if bps[k].0 < window && pick != NONE {
                break;
            }
            if bps[k].1 > ptol && (pick == NONE || bps[k].1 > bps[pick].1) {
                pick = k;
            }
        }
        if pick == NONE {
            pick = (0..=stop).max_by(|&a, &b| bps[a].1.total_cmp(&bps[b].1)).unwrap();
        }
        let (t, _, r, upper) = bps[pick];
        let t = t.max(0.0);
        if r == NONE {
            Step::Flip { t }
        } else {
            Step::Pivot { t, row: r, slot: self.entering_slot(r, upper) }
        }
    }

    fn pivot(&mut self, p: usize, q: usize, slot: Slot) -> Result<()> {
        let n = self.n;
        let mut u = vec![0.0; n];
        for (i, v) in self.rows.row(q) {
            let row = &self.binv[i * n..(i + 1) * n];
            for (uj, &b) in u.iter_mut().zip(row) {
                *uj += v * b;
            }
        }
        let up = u[p];
        if up.abs() < 1e-13 {
            return Err(Error::NumericalFailure("vanishing pivot".into()));
        }
        let unz: Vec<(usize, f64)> =
            u.iter().enumerate().filter(|&(j, v)| j != p && *v != 0.0).map(|(j, &v)| (j, v)).collect();
        for i in 0..n {
            let cip = self.binv[i * n + p];
            if cip == 0.0 {
                continue;
            }
            let f = cip / up;
            let row = &mut self.binv[i * n..(i + 1) * n];
            for &(j, uj) in &unz {
                row[j] -= f * uj;
            }
            row[p] = f;
        }
        if let Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) = self.work[p] {
            self.pos_of[r] = NONE;
        }
        self.work[p] = slot;
        self.pos_of[q] = p;
        self.act[q] = self.slot_value(slot);
        self.since_refactor += 1;
        Ok(())
    }

    fn run(&mut self) -> Result<LpStatus> {
        let m = self.rows.m();
        let max_iter = 50 * (m + self.n) + 10_000;
        let bland_after = 3 * (self.rows.n_ineq + self.rows.n_eq).max(1);
        let cmax = self.cost.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut clean = false;
        let mut retries = 0;
        loop {
            self.iterations += 1;
            if self.iterations > max_iter {
                return Err(Error::NumericalFailure(format!("iteration limit {max_iter} reached")));
            }
            if self.since_refactor >= 200 {
                self.refactor()?;
                self.recompute_primal();
            } else if self.iterations % 40 == 0 {
                self.recompute_primal();
            }
            let g = self.infeasibility_gradient();
            let phase1 = g.is_some();
            let y = match &g {
                Some(g) => self.price(g),
                None => self.price(&self.cost),
            };
            let scale = match &g {
                Some(g) => g.iter().fold(1.0f64, |a, v| a.max(v.abs())),
                None => cmax.max(1.0),
            };
            let dtol = self.tol.optimality * scale;
            let Some((p, sign, score)) = self.choose_leaving(&y, dtol) else {
                if !clean {
                    self.refactor()?;
                    self.recompute_primal();
                    clean = true;
                    continue;
                }
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };
            let d = self.direction(p, sign);
            self.row_rates(&d);
            let step = if phase1 { self.ratio_phase1(p, -score) } else { self.ratio_phase2(p) };
            let t = match step {
                Step::Unbounded => {
                    if phase1 || !clean {
                        // drift suspected; rebuild and retry a few times
                        retries += 1;
                        if retries > 5 {
                            return Err(Error::NumericalFailure("no blocking row in phase 1".into()));
                        }
                        self.refactor()?;
                        self.recompute_primal();
                        clean = true;
                        continue;
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip { t } | Step::Pivot { t, .. } => t,
            };
            clean = false;
            if t > 0.0 {
                for (zi, di) in self.z.iter_mut().zip(&d) {
                    *zi += t * di;
                }
                for &r in &self.touched {
                    self.act[r] += t * self.alpha[r];
                }
            }
            match step {
                Step::Flip { .. } => {
                    let s = self.work[p];
                    self.work[p] = match s {
                        Slot::Lower(r) => Slot::Upper(r),
                        Slot::Upper(r) => Slot::Lower(r),
                        other => other,
                    };
                    if let Slot::Lower(r) | Slot::Upper(r) = self.work[p] {
                        self.act[r] = self.slot_value(self.work[p]);
                    }
                }
                Step::Pivot { row, slot, .. } => self.pivot(p, row, slot)?,
                Step::Unbounded => unreachable!(),
            }
            if t * score <= 1e-12 * scale {
                self.degenerate_run += 1;
                if self.degenerate_run > bland_after {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
        }
    }

    fn extract(&self, lp: &StandardLp) -> LpSolution {
        let n = self.n;
        let mut y = self.price(&self.cost);
        // one refinement step on Mᵀ y = c
        let mut res = self.cost.clone();
        for (p, &s) in self.work.iter().enumerate() {
            for (j, v) in self.slot_entries(s) {
                res[j] -= y[p] * v;
            }
        }
        let dy = self.price(&res);
        for p in 0..n {
            y[p] += dy[p];
        }
        let mut dual_ineq = vec![0.0; self.rows.n_ineq];
        let mut dual_eq = vec![0.0; self.rows.n_eq];
        let mut reduced_costs = vec![0.0; n];
        let eq_base = self.rows.n_ineq;
        let bound_base = eq_base + self.rows.n_eq;
        for (p, &s) in self.work.iter().enumerate() {
            let r = match s {
                Slot::Artificial(_) => continue,
                Slot::Lower(r) | Slot::Upper(r) | Slot::Fixed(r) => r,
            };
            let v = y[p] / self.rows.scale[r];
            if r < eq_base {
                dual_ineq[r] = (-v).max(0.0);
            } else if r < bound_base {
                dual_eq[r - eq_base] = -v;
            }
        }
        for j in 0..n {
            let r = self.rows.bound_row[j];
            if r != NONE && self.pos_of[r] != NONE {
                reduced_costs[j] = y[self.pos_of[r]] / self.rows.scale[r];
            }
        }
        let objective_value = super::dot(&lp.objective, &self.z);
        LpSolution {
            status: LpStatus::Optimal,
            primal: self.z.clone(),
            dual_ineq,
            dual_eq,
            reduced_costs,
            objective_value,
            iterations: self.iterations,
        }
    }
}

/// Sparse `x += f * y` for rows stored as unsorted `(col, value)` lists.
/// `where_` is an all-`NONE` scratch array and is left that way.
fn axpy_sparse(
    x: &mut Vec<(usize, f64)>,
    y: &[(usize, f64)],
    f: f64,
    where_: &mut [usize],
    mut col_rows: Option<&mut Vec<Vec<usize>>>,
    row_id: usize,
) {
    for (k, &(c, _)) in x.iter().enumerate() {
        where_[c] = k;
    }
    for &(c, v) in y {
        let k = where_[c];
        if k == NONE {
            where_[c] = x.len();
            x.push((c, f * v));
            if let Some(cr) = col_rows.as_deref_mut() {
                cr[c].push(row_id);
            }
        } else {
            x[k].1 += f * v;
        }
    }
    for &(c, _) in x.iter() {
        where_[c] = NONE;
    }
}

pub(super) fn solve(lp: &StandardLp, tol: &Tolerances) -> Result<LpSolution> {
    let mut s = Simplex::new(lp, tol);
    let status = s.run()?;
    Ok(match status {
        LpStatus::Optimal => s.extract(lp),
        other => LpSolution::empty(other, s.iterations),
    })
}
