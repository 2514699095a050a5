//! Dense bounded-variable simplex.
//!
//! Rows are stored as `A x - s = 0` with one slack per row; the slack
//! carries the row bounds. The tableau holds `B^-1 [A -I]`, so for every
//! row `x_B(i) = -sum_j T[i][j] x_j` over nonbasic `j`. Structural and
//! slack columns share one index space: `0..n` structural, `n..n+m` slacks.
//!
//! Cold starts run the primal method with a composite phase 1 (sum of
//! infeasibilities). Bound changes keep the basis dual feasible, so
//! branch-and-bound reoptimises with the dual method.

use std::time::Instant;

use log::{debug, warn};

/// Internal primal feasibility tolerance (rows are scaled to max |a| = 1).
const PTOL: f64 = 1e-10;
/// Reduced-cost tolerance on the scaled objective.
const DTOL: f64 = 1e-10;
/// Smallest tableau entry accepted as a pivot.
const PIV_TOL: f64 = 1e-7;
/// Entries below this are flushed to zero after a pivot.
const DROP_TOL: f64 = 1e-13;
/// Relative row residual above which the tableau is rebuilt.
const RESIDUAL_TOL: f64 = 1e-7;
/// Pivots below this mark the tableau as needing refactorisation.
const UNSTABLE_PIV: f64 = 1e-5;
/// Non-improving iterations before switching to Bland's rule.
const STALL_LIMIT: usize = 60;
/// Iterations between recomputing values and reduced costs from scratch.
const REFRESH_EVERY: usize = 100;

const NONBASIC: usize = usize::MAX;

/// An LP in row-bounded form, produced by presolve.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl LpData {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration budget exhausted even after refactorisation.
    Stalled,
    /// The deadline passed mid-solve.
    TimedOut,
}

enum DualOutcome {
    Done(LpOutcome),
    NeedPrimal,
}

enum Step {
    Flip,
    Pivot { row: usize, theta: f64, to_upper: bool },
    Unbounded,
}

pub(crate) struct Simplex {
    m: usize,
    n: usize,
    nc: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    row_of: Vec<usize>,
    at_upper: Vec<bool>,
    rows: Vec<Vec<(usize, f64)>>,
    raw_cost: Vec<f64>,
    /// Scaled costs without dual-simplex cost shifts.
    base_cost: Vec<f64>,
    shifted: bool,
    /// Set by small pivots; cleared by refactorisation.
    unstable: bool,
    row_scale: Vec<f64>,
    since_refresh: usize,
    pub iterations: usize,
    pub deadline: Option<Instant>,
}

impl Simplex {
    pub fn new(lp: &LpData) -> Self {
        let n = lp.num_cols();
        let m = lp.rows.len();
        let nc = n + m;

        let cmax = lp.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let obj_scale = if cmax > 0.0 { 1.0 / cmax } else { 1.0 };

        let mut rows = Vec::with_capacity(m);
        let mut row_scale = Vec::with_capacity(m);
        let mut lo = lp.lower.clone();
        let mut up = lp.upper.clone();
        lo.reserve(m);
        up.reserve(m);
        for (i, row) in lp.rows.iter().enumerate() {
            let amax = row.iter().fold(0.0f64, |a, t| a.max(t.1.abs()));
            let s = if amax > 0.0 { 1.0 / amax } else { 1.0 };
            rows.push(row.iter().map(|&(j, a)| (j, a * s)).collect::<Vec<_>>());
            row_scale.push(s);
            lo.push(lp.row_lower[i] * s);
            up.push(lp.row_upper[i] * s);
        }

        let mut cost: Vec<f64> = lp.cost.iter().map(|c| c * obj_scale).collect();
        cost.resize(nc, 0.0);

        let mut x = vec![0.0; nc];
        let mut at_upper = vec![false; nc];
        for j in 0..n {
            let (l, u) = (lo[j], up[j]);
            if l.is_finite() && (cost[j] >= 0.0 || !u.is_finite()) {
                x[j] = l;
            } else if u.is_finite() {
                x[j] = u;
                at_upper[j] = true;
            } else {
                x[j] = 0.0;
            }
        }

        let mut s = Self {
            m,
            n,
            nc,
            t: vec![0.0; m * nc],
            d: cost.clone(),
            base_cost: cost.clone(),
            shifted: false,
            unstable: false,
            cost,
            lo,
            up,
            x,
            head: (n..nc).collect(),
            row_of: vec![NONBASIC; nc],
            at_upper,
            rows,
            raw_cost: lp.cost.clone(),
            row_scale,
            since_refresh: 0,
            iterations: 0,
            deadline: None,
        };
        for i in 0..m {
            s.row_of[n + i] = i;
            s.t[i * nc + n + i] = 1.0;
            for &(j, a) in &s.rows[i] {
                s.t[i * nc + j] = -a;
            }
        }
        s.refresh_values();
        s
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    /// Structural values.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Objective in the caller's (unscaled) units, without constant.
    pub fn objective(&self) -> f64 {
        self.raw_cost
            .iter()
            .zip(&self.x[..self.n])
            .map(|(c, x)| c * x)
            .sum()
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.up[j])
    }

    /// Changes the bounds of structural column `j`. A nonbasic column is
    /// placed on the side its reduced cost prefers, keeping the basis dual
    /// feasible.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        debug_assert!(j < self.n);
        self.lo[j] = lower;
        self.up[j] = upper;
        if self.row_of[j] != NONBASIC {
            return;
        }
        if self.d[j] < -DTOL && upper.is_finite() {
            self.at_upper[j] = true;
        } else if self.d[j] > DTOL && lower.is_finite() {
            self.at_upper[j] = false;
        }
        let target = if self.at_upper[j] {
            if upper.is_finite() {
                upper
            } else {
                self.at_upper[j] = false;
                if lower.is_finite() {
                    lower
                } else {
                    0.0
                }
            }
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            self.at_upper[j] = true;
            upper
        } else {
            0.0
        };
        let delta = target - self.x[j];
        if delta != 0.0 {
            self.x[j] = target;
            for i in 0..self.m {
                let a = self.t[i * self.nc + j];
                if a != 0.0 {
                    self.x[self.head[i]] -= a * delta;
                }
            }
        }
    }

    /// Solves from the current basis: dual simplex when the basis is dual
    /// feasible, primal otherwise. Falls back to a refactorised primal run
    /// if the iteration budget runs out.
    pub fn solve(&mut self) -> LpOutcome {
        let budget = 50 * (self.m + self.n) + 5000;
        let mut rebuilt = false;
        for attempt in 0..4 {
            let outcome = match self.dual(budget) {
                DualOutcome::Done(LpOutcome::Optimal) if self.shifted => {
                    self.unshift();
                    self.primal(budget)
                }
                DualOutcome::Done(o) => o,
                DualOutcome::NeedPrimal => {
                    if self.shifted {
                        self.unshift();
                    }
                    self.primal(budget)
                }
            };
            match outcome {
                LpOutcome::Optimal | LpOutcome::Infeasible
                    if (self.unstable && !rebuilt) || self.residual_error() > RESIDUAL_TOL =>
                {
                    rebuilt = true;
                    debug!("simplex: refactorising before accepting {outcome:?} (attempt {attempt})");
                    if !self.refactor() {
                        self.reset_to_slack_basis();
                    }
                }
                LpOutcome::Optimal => {
                    self.refresh_values();
                    self.refresh_duals();
                    if self.max_primal_infeasibility() <= 10.0 * PTOL && self.dual_feasible(10.0 * DTOL) {
                        return LpOutcome::Optimal;
                    }
                    debug!("simplex: optimality lost after refresh (attempt {attempt})");
                }
                LpOutcome::Stalled => {
                    warn!("simplex: iteration budget exhausted, refactorising");
                    if self.shifted {
                        self.unshift();
                    }
                    if !self.refactor() {
                        self.reset_to_slack_basis();
                    }
                }
                other => return other,
            }
        }
        LpOutcome::Stalled
    }

    // ---- primal ------------------------------------------------------

    fn primal(&mut self, max_iter: usize) -> LpOutcome {
        let mut bland = false;
        let mut stall = 0usize;
        let mut best = f64::INFINITY;
        let mut was_phase1 = true;
        let mut w = vec![0.0; self.nc];
        let start = self.iterations;

        loop {
            if self.iterations - start > max_iter {
                return LpOutcome::Stalled;
            }
            if self.past_deadline() {
                return LpOutcome::TimedOut;
            }
            self.maybe_refresh();

            let infeas = self.compute_phase1_prices(&mut w);
            let phase1 = infeas > 0.0;
            if phase1 != was_phase1 {
                was_phase1 = phase1;
                best = f64::INFINITY;
                stall = 0;
                bland = false;
            }
            let progress = if phase1 { infeas } else { self.internal_objective() };
            if progress < best - 1e-12 * (1.0 + best.abs().min(1e12)) {
                best = progress;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            let prices: &[f64] = if phase1 { &w } else { &self.d };
            let Some((q, dir)) = self.choose_entering(prices, bland) else {
                return if phase1 {
                    LpOutcome::Infeasible
                } else {
                    LpOutcome::Optimal
                };
            };

            match self.primal_ratio(q, dir, bland) {
                Step::Unbounded => {
                    if phase1 {
                        // Cannot happen for exact arithmetic; treat as noise.
                        bland = true;
                        self.refresh_values();
                        continue;
                    }
                    return LpOutcome::Unbounded;
                }
                Step::Flip => {
                    let range = self.up[q] - self.lo[q];
                    self.move_nonbasic(q, dir * range);
                    self.at_upper[q] = dir > 0.0;
                    self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                }
                Step::Pivot { row, theta, to_upper } => {
                    self.move_nonbasic(q, dir * theta);
                    let leaving = self.head[row];
                    self.pivot(row, q);
                    self.at_upper[leaving] = to_upper;
                    self.x[leaving] = if to_upper { self.up[leaving] } else { self.lo[leaving] };
                }
            }
            self.iterations += 1;
            self.since_refresh += 1;
        }
    }

    /// Fills `w` with phase-1 reduced costs and returns the total
    /// infeasibility of the basic variables (0 when primal feasible).
    fn compute_phase1_prices(&self, w: &mut [f64]) -> f64 {
        let mut total = 0.0;
        let mut touched = false;
        for i in 0..self.m {
            let b = self.head[i];
            let xb = self.x[b];
            let sign = if xb < self.lo[b] - PTOL {
                total += self.lo[b] - xb;
                1.0
            } else if xb > self.up[b] + PTOL {
                total += xb - self.up[b];
                -1.0
            } else {
                continue;
            };
            if !touched {
                w.iter_mut().for_each(|v| *v = 0.0);
                touched = true;
            }
            let row = &self.t[i * self.nc..(i + 1) * self.nc];
            for (wj, &a) in w.iter_mut().zip(row) {
                if a != 0.0 {
                    *wj += sign * a;
                }
            }
        }
        total
    }

    fn can_move(&self, j: usize) -> (bool, bool) {
        if self.row_of[j] != NONBASIC || self.up[j] - self.lo[j] <= 1e-12 {
            return (false, false);
        }
        if !self.lo[j].is_finite() && !self.up[j].is_finite() {
            return (true, true);
        }
        if self.at_upper[j] {
            (false, true)
        } else {
            (true, false)
        }
    }

    fn choose_entering(&self, prices: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            let dj = prices[j];
            if dj.abs() <= DTOL {
                continue;
            }
            let (inc, dec) = self.can_move(j);
            let dir = if inc && dj < -DTOL {
                1.0
            } else if dec && dj > DTOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_limit(&self, b: usize, rate: f64, relax: f64) -> (f64, bool) {
        let xb = self.x[b];
        let (l, u) = (self.lo[b], self.up[b]);
        if rate > 0.0 {
            if xb < l - PTOL {
                ((l - xb) / rate, false)
            } else if xb > u + PTOL || !u.is_finite() {
                (f64::INFINITY, true)
            } else {
                ((u + relax - xb).max(0.0) / rate, true)
            }
        } else if xb > u + PTOL {
            ((xb - u) / -rate, true)
        } else if xb < l - PTOL || !l.is_finite() {
            (f64::INFINITY, false)
        } else {
            ((xb - l + relax).max(0.0) / -rate, false)
        }
    }

    fn primal_ratio(&self, q: usize, dir: f64, bland: bool) -> Step {
        let range = self.up[q] - self.lo[q];
        let nc = self.nc;
        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for i in 0..self.m {
                let a = self.t[i * nc + q];
                if a.abs() < PIV_TOL {
                    continue;
                }
                let (lim, to_upper) = self.ratio_limit(self.head[i], -a * dir, 0.0);
                if !lim.is_finite() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((r, l, _)) => lim < l - 1e-12 || (lim <= l + 1e-12 && self.head[i] < self.head[r]),
                };
                if better {
                    best = Some((i, lim, to_upper));
                }
            }
            return match best {
                Some((_, lim, _)) if range <= lim => Step::Flip,
                Some((row, theta, to_upper)) => Step::Pivot { row, theta, to_upper },
                None if range.is_finite() => Step::Flip,
                None => Step::Unbounded,
            };
        }

        // Harris two-pass: a relaxed bound picks the step window, then the
        // largest pivot inside the window wins.
        let mut window = f64::INFINITY;
        for i in 0..self.m {
            let a = self.t[i * nc + q];
            if a.abs() < PIV_TOL {
                continue;
            }
            let (lim, _) = self.ratio_limit(self.head[i], -a * dir, PTOL);
            window = window.min(lim);
        }
        if range <= window {
            return if range.is_finite() { Step::Flip } else { Step::Unbounded };
        }
        let mut choice: Option<(usize, f64, bool, f64)> = None;
        for i in 0..self.m {
            let a = self.t[i * nc + q];
            if a.abs() < PIV_TOL {
                continue;
            }
            let (lim, to_upper) = self.ratio_limit(self.head[i], -a * dir, 0.0);
            if lim <= window && choice.is_none_or(|c| a.abs() > c.3) {
                choice = Some((i, lim, to_upper, a.abs()));
            }
        }
        match choice {
            Some((row, theta, to_upper, _)) => Step::Pivot { row, theta, to_upper },
            None => Step::Unbounded,
        }
    }

    // ---- dual --------------------------------------------------------

    /// Moves boxed nonbasic columns with wrong-signed reduced costs to
    /// their other bound. Other offenders get their cost shifted when
    /// `shift` is set; otherwise the repair fails.
    fn repair_dual(&mut self, tol: f64, shift: bool) -> bool {
        let mut flips = Vec::new();
        let mut shifts = Vec::new();
        for j in 0..self.nc {
            if self.row_of[j] != NONBASIC || self.up[j] - self.lo[j] <= 1e-12 {
                continue;
            }
            let dj = self.d[j];
            let wrong = if self.at_upper[j] { dj > tol } else { dj < -tol };
            if !wrong {
                continue;
            }
            if self.lo[j].is_finite() && self.up[j].is_finite() {
                flips.push(j);
            } else if shift {
                shifts.push(j);
            } else {
                return false;
            }
        }
        for j in shifts {
            self.cost[j] -= self.d[j];
            self.d[j] = 0.0;
            self.shifted = true;
        }
        for j in flips {
            let to_upper = !self.at_upper[j];
            let target = if to_upper { self.up[j] } else { self.lo[j] };
            self.move_nonbasic(j, target - self.x[j]);
            self.x[j] = target;
            self.at_upper[j] = to_upper;
        }
        true
    }

    fn dual(&mut self, max_iter: usize) -> DualOutcome {
        if !self.repair_dual(DTOL, false) {
            return DualOutcome::NeedPrimal;
        }
        let mut bland = false;
        let mut stall = 0usize;
        let mut best = f64::NEG_INFINITY;
        let start = self.iterations;

        loop {
            if self.iterations - start > max_iter {
                return DualOutcome::Done(LpOutcome::Stalled);
            }
            if self.past_deadline() {
                return DualOutcome::Done(LpOutcome::TimedOut);
            }
            if self.since_refresh >= REFRESH_EVERY {
                self.refresh_values();
                self.refresh_duals();
                self.repair_dual(DTOL, true);
            }
            let obj = self.internal_objective();
            if obj > best + 1e-12 * (1.0 + best.abs().min(1e12)) {
                best = obj;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            // Leaving row.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.head[i];
                let xb = self.x[b];
                let viol = if xb < self.lo[b] - PTOL {
                    self.lo[b] - xb
                } else if xb > self.up[b] + PTOL {
                    xb - self.up[b]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((r, v)) if bland => b < self.head[r] || (b == self.head[r] && viol > v),
                    Some((_, v)) => viol > v,
                };
                if better {
                    leave = Some((i, viol));
                }
            }
            let Some((r, _)) = leave else {
                return DualOutcome::Done(LpOutcome::Optimal);
            };
            let p = self.head[r];
            let increase = self.x[p] < self.lo[p];
            let target = if increase { self.lo[p] } else { self.up[p] };

            // Entering column.
            let nc = self.nc;
            let row = &self.t[r * nc..(r + 1) * nc];
            let eligible = |j: usize| -> Option<f64> {
                let a = row[j];
                if a.abs() < PIV_TOL {
                    return None;
                }
                let (inc, dec) = self.can_move(j);
                // x_p changes by -a per unit increase of x_j.
                let dir = if increase {
                    if inc && a < 0.0 {
                        1.0
                    } else if dec && a > 0.0 {
                        -1.0
                    } else {
                        return None;
                    }
                } else if inc && a > 0.0 {
                    1.0
                } else if dec && a < 0.0 {
                    -1.0
                } else {
                    return None;
                };
                Some(dir)
            };

            let mut q_choice: Option<usize> = None;
            if bland {
                let mut best_ratio = f64::INFINITY;
                for j in 0..nc {
                    if let Some(dir) = eligible(j) {
                        let ratio = (self.d[j] * dir).max(0.0) / row[j].abs();
                        let tie = q_choice.is_some_and(|b| ratio <= best_ratio && row[j].abs() > row[b].abs());
                        if ratio < best_ratio - 1e-15 || tie {
                            best_ratio = best_ratio.min(ratio);
                            q_choice = Some(j);
                        }
                    }
                }
            } else {
                let mut window = f64::INFINITY;
                for j in 0..nc {
                    if let Some(dir) = eligible(j) {
                        let ratio = ((self.d[j] * dir).max(0.0) + DTOL) / row[j].abs();
                        window = window.min(ratio);
                    }
                }
                let mut best_a = 0.0;
                for j in 0..nc {
                    if let Some(dir) = eligible(j) {
                        let ratio = (self.d[j] * dir).max(0.0) / row[j].abs();
                        if ratio <= window && row[j].abs() > best_a {
                            best_a = row[j].abs();
                            q_choice = Some(j);
                        }
                    }
                }
            }
            let Some(q) = q_choice else {
                return DualOutcome::Done(LpOutcome::Infeasible);
            };

            let delta = (self.x[p] - target) / self.t[r * nc + q];
            self.move_nonbasic(q, delta);
            self.pivot(r, q);
            self.at_upper[p] = !increase;
            self.x[p] = target;
            self.iterations += 1;
            self.since_refresh += 1;
        }
    }

    fn dual_feasible(&self, tol: f64) -> bool {
        (0..self.nc).all(|j| {
            if self.row_of[j] != NONBASIC || self.up[j] - self.lo[j] <= 1e-12 {
                return true;
            }
            let dj = self.d[j];
            let free = !self.lo[j].is_finite() && !self.up[j].is_finite();
            if free {
                dj.abs() <= tol
            } else if self.at_upper[j] {
                dj <= tol
            } else {
                dj >= -tol
            }
        })
    }

    // ---- shared machinery -------------------------------------------

    /// Moves nonbasic `q` by `delta` and updates every basic value.
    fn move_nonbasic(&mut self, q: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        let nc = self.nc;
        for i in 0..self.m {
            let a = self.t[i * nc + q];
            if a != 0.0 {
                self.x[self.head[i]] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.nc;
        let piv = self.t[r * nc + q];
        debug_assert!(piv.abs() >= PIV_TOL * 0.5, "tiny pivot {piv}");
        let inv = 1.0 / piv;
        if piv.abs() < UNSTABLE_PIV {
            self.unstable = true;
        }
        let mut nz: Vec<usize> = Vec::with_capacity(64);
        {
            let prow = &mut self.t[r * nc..(r + 1) * nc];
            for (j, v) in prow.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            prow[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f == 0.0 {
                return;
            }
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        };
        before.chunks_exact_mut(nc).for_each(eliminate);
        after.chunks_exact_mut(nc).for_each(eliminate);
        {
            let f = self.d[q];
            if f != 0.0 {
                for &j in &nz {
                    self.d[j] -= f * prow[j];
                }
                self.d[q] = 0.0;
            }
        }
        let leaving = self.head[r];
        self.row_of[leaving] = NONBASIC;
        self.row_of[q] = r;
        self.head[r] = q;
    }

    fn unshift(&mut self) {
        self.cost.copy_from_slice(&self.base_cost);
        self.shifted = false;
        self.refresh_duals();
    }

    fn past_deadline(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn internal_objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&b| (self.lo[b] - self.x[b]).max(self.x[b] - self.up[b]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn maybe_refresh(&mut self) {
        if self.since_refresh >= REFRESH_EVERY {
            self.refresh_values();
            self.refresh_duals();
        }
    }

    fn refresh_values(&mut self) {
        let nonbasic: Vec<(usize, f64)> = (0..self.nc)
            .filter(|&j| self.row_of[j] == NONBASIC && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for i in 0..self.m {
            let row = &self.t[i * self.nc..(i + 1) * self.nc];
            let v: f64 = nonbasic.iter().map(|&(j, xj)| row[j] * xj).sum();
            self.x[self.head[i]] = -v;
        }
        self.since_refresh = 0;
    }

    fn refresh_duals(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.head[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.nc..(i + 1) * self.nc];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                if a != 0.0 {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.head {
            self.d[b] = 0.0;
        }
        self.since_refresh = 0;
    }

    /// Rebuilds the tableau for the current basis from the original rows
    /// by Gauss-Jordan elimination. Returns false if the basis is singular.
    fn refactor(&mut self) -> bool {
        let (m, n, nc) = (self.m, self.n, self.nc);
        let mut t = vec![0.0; m * nc];
        for i in 0..m {
            for &(j, a) in &self.rows[i] {
                t[i * nc + j] = a;
            }
            t[i * nc + n + i] = -1.0;
        }
        let basics: Vec<usize> = self.head.clone();
        let mut assigned = vec![false; m];
        let mut new_head = vec![NONBASIC; m];
        for &q in &basics {
            let mut best = None;
            let mut best_abs = PIV_TOL;
            for i in 0..m {
                if !assigned[i] && t[i * nc + q].abs() > best_abs {
                    best_abs = t[i * nc + q].abs();
                    best = Some(i);
                }
            }
            let Some(r) = best else {
                return false;
            };
            assigned[r] = true;
            new_head[r] = q;
            let inv = 1.0 / t[r * nc + q];
            let mut nz = Vec::new();
            for j in 0..nc {
                let v = &mut t[r * nc + j];
                if *v != 0.0 {
                    *v *= inv;
                    nz.push(j);
                }
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = t[i * nc + q];
                if f == 0.0 {
                    continue;
                }
                for &j in &nz {
                    let v = t[r * nc + j];
                    t[i * nc + j] -= f * v;
                }
                t[i * nc + q] = 0.0;
            }
        }
        self.t = t;
        self.head = new_head;
        for j in 0..nc {
            self.row_of[j] = NONBASIC;
        }
        for (i, &b) in self.head.iter().enumerate() {
            self.row_of[b] = i;
        }
        self.refresh_values();
        self.refresh_duals();
        self.unstable = false;
        true
    }

    /// Largest mismatch between the slack values and the row activities
    /// recomputed from the original rows.
    fn residual_error(&self) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
                (act - self.x[self.n + i]).abs() / (1.0 + act.abs())
            })
            .fold(0.0, f64::max)
    }

    fn reset_to_slack_basis(&mut self) {
        let (m, n, nc) = (self.m, self.n, self.nc);
        self.t.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            self.t[i * nc + n + i] = 1.0;
            for &(j, a) in &self.rows[i] {
                self.t[i * nc + j] = -a;
            }
        }
        self.head = (n..nc).collect();
        self.row_of = vec![NONBASIC; nc];
        for i in 0..m {
            self.row_of[n + i] = i;
        }
        for j in 0..n {
            let (l, u) = (self.lo[j], self.up[j]);
            if l.is_finite() && (self.cost[j] >= 0.0 || !u.is_finite()) {
                self.x[j] = l;
                self.at_upper[j] = false;
            } else if u.is_finite() {
                self.x[j] = u;
                self.at_upper[j] = true;
            } else {
                self.x[j] = 0.0;
                self.at_upper[j] = false;
            }
        }
        self.refresh_values();
        self.refresh_duals();
        self.unstable = false;
    }

    /// Row activities in the caller's units (for diagnostics).
    #[allow(dead_code)]
    pub fn row_activity(&self, i: usize) -> f64 {
        self.x[self.n + i] / self.row_scale[i]
    }
}
