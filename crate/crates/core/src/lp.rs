//! Single-objective linear programs over node-local relaxations: a dense
//! bounded-variable revised simplex with a two-phase start.
//!
//! The solver works on the slack formulation `Ax + s = b` where each slack
//! carries the bounds implied by its row sense. Phase 1 minimizes the sum of
//! artificial variables added on rows whose slack basis is infeasible; phase 2
//! minimizes the actual objective. The basis inverse is kept dense and
//! refactorized periodically. Dantzig pricing with a switch to Bland's rule
//! after a streak of degenerate pivots guards against cycling.

use thiserror::Error;

pub const FEAS_TOL: f64 = 1e-7;
pub const OBJ_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 100;
const REFACTOR_EVERY: usize = 64;

/// Constraint sense for LP rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: LpSense,
    pub rhs: f64,
}

/// A linear program: minimize `objective . x` subject to rows and bounds.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Per-variable (lo, hi); fixings are expressed as lo == hi.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// One dual multiplier per input row (simplex multipliers of the slack
    /// formulation), valid when status is Optimal.
    pub row_duals: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("iteration limit exhausted ({0} pivots): numerical failure")]
    IterationLimit(usize),
    #[error("problem is unbounded; box-bounded models cannot reach this")]
    Unbounded,
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable pinned at zero.
    FreeZero,
}

struct Tableau {
    num_rows: usize,
    /// structural + slack + artificial column count
    num_cols: usize,
    cols: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    values: Vec<f64>,
    pivots_since_refactor: usize,
}

impl Tableau {
    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lo[j],
            VarState::AtUpper => self.hi[j],
            VarState::FreeZero => 0.0,
            VarState::Basic(_) => unreachable!("basic variable queried as nonbasic"),
        }
    }

    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.num_rows;
        // Gauss-Jordan on [B | I]
        let mut work: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row = vec![0.0; 2 * m];
                for (k, &bj) in self.basis.iter().enumerate() {
                    row[k] = self.cols[bj][i];
                }
                row[m + i] = 1.0;
                row
            })
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| {
                    work[a][col]
                        .abs()
                        .partial_cmp(&work[b][col].abs())
                        .unwrap()
                })
                .unwrap();
            if work[piv][col].abs() < 1e-12 {
                return Err(LpError::Malformed("singular basis".into()));
            }
            work.swap(col, piv);
            let d = work[col][col];
            for v in work[col].iter_mut() {
                *v /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = work[r][col];
                    if f != 0.0 {
                        for c in 0..2 * m {
                            work[r][c] -= f * work[col][c];
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                self.binv[i][k] = work[i][m + k];
            }
        }
        self.pivots_since_refactor = 0;
        self.recompute_values();
        Ok(())
    }

    fn recompute_values(&mut self) {
        let m = self.num_rows;
        let mut resid = self.rhs.clone();
        for j in 0..self.num_cols {
            if let VarState::Basic(_) = self.state[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for i in 0..m {
                    resid[i] -= self.cols[j][i] * v;
                }
            }
        }
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i][k] * resid[k];
            }
            self.values[i] = acc;
        }
    }

    /// y = B^-1 * column(j)
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.num_rows;
        let col = self.column(j);
        let mut y = vec![0.0; m];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i][k] * col[k];
            }
            *yi = acc;
        }
        y
    }

    /// pi = c_B^T B^-1 for the given full cost vector
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.num_rows;
        let mut pi = vec![0.0; m];
        for (k, pik) in pi.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..m {
                acc += cost[self.basis[i]] * self.binv[i][k];
            }
            *pik = acc;
        }
        pi
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], pi: &[f64]) -> f64 {
        let col = self.column(j);
        let mut d = cost[j];
        for i in 0..self.num_rows {
            d -= pi[i] * col[i];
        }
        d
    }

    fn pivot(&mut self, entering: usize, leaving_row: usize, y: &[f64]) -> Result<(), LpError> {
        let m = self.num_rows;
        let yr = y[leaving_row];
        if yr.abs() < PIVOT_TOL {
            return Err(LpError::Malformed("pivot element below tolerance".into()));
        }
        let mut pivot_row = std::mem::take(&mut self.binv[leaving_row]);
        for v in pivot_row.iter_mut() {
            *v /= yr;
        }
        for i in 0..m {
            if i != leaving_row {
                let f = y[i];
                if f != 0.0 {
                    for k in 0..m {
                        self.binv[i][k] -= f * pivot_row[k];
                    }
                }
            }
        }
        self.binv[leaving_row] = pivot_row;
        self.basis[leaving_row] = entering;
        self.pivots_since_refactor += 1;
        Ok(())
    }
}

/// Solve a linear program. `Optimal` carries a primal-feasible, objective-
/// optimal point with row duals; `Infeasible` reports an empty feasible set.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.objective.len();
    if lp.bounds.len() != n {
        return Err(LpError::Malformed("bounds length mismatch".into()));
    }
    for (lo, hi) in &lp.bounds {
        if lo > hi {
            return Err(LpError::Malformed(format!("bound lo {lo} > hi {hi}")));
        }
        if !lo.is_finite() && !hi.is_finite() && (lo.is_nan() || hi.is_nan()) {
            return Err(LpError::Malformed("NaN bound".into()));
        }
    }
    for row in &lp.rows {
        if row.coeffs.len() != n {
            return Err(LpError::Malformed("row length mismatch".into()));
        }
    }

    let m = lp.rows.len();
    if m == 0 {
        return solve_unconstrained(lp);
    }

    // slack formulation: structural | slack | artificial
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n + 2 * m);
    for j in 0..n {
        cols.push(lp.rows.iter().map(|r| r.coeffs[j]).collect());
    }
    let mut lo: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    let mut hi: Vec<f64> = lp.bounds.iter().map(|b| b.1).collect();
    for (i, row) in lp.rows.iter().enumerate() {
        let mut c = vec![0.0; m];
        c[i] = 1.0;
        cols.push(c);
        match row.sense {
            LpSense::Le => {
                lo.push(0.0);
                hi.push(f64::INFINITY);
            }
            LpSense::Ge => {
                lo.push(f64::NEG_INFINITY);
                hi.push(0.0);
            }
            LpSense::Eq => {
                lo.push(0.0);
                hi.push(0.0);
            }
        }
    }

    // nonbasic start for structurals: finite bound nearest zero
    let mut state: Vec<VarState> = (0..n)
        .map(|j| start_state(lo[j], hi[j]))
        .collect();

    // residuals decide which rows need an artificial
    let mut resid: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    for j in 0..n {
        let v = match state[j] {
            VarState::AtLower => lo[j],
            VarState::AtUpper => hi[j],
            VarState::FreeZero => 0.0,
            VarState::Basic(_) => unreachable!(),
        };
        if v != 0.0 {
            for i in 0..m {
                resid[i] -= cols[j][i] * v;
            }
        }
    }

    // slack states are positional (indices n..n+m); rows whose slack basis is
    // bound-infeasible get an artificial appended after every slack column
    let mut basis: Vec<usize> = vec![usize::MAX; m];
    let mut art_rows: Vec<(usize, f64)> = Vec::new();
    for i in 0..m {
        let slack = n + i;
        let fits = resid[i] >= lo[slack] - FEAS_TOL && resid[i] <= hi[slack] + FEAS_TOL;
        if fits {
            state.push(VarState::Basic(i));
            basis[i] = slack;
        } else {
            // clamp slack at its nearest bound and cover the rest with an
            // artificial of matching sign
            let (snap, sstate) = if resid[i] < lo[slack] {
                (lo[slack], VarState::AtLower)
            } else {
                (hi[slack], VarState::AtUpper)
            };
            state.push(sstate);
            art_rows.push((i, resid[i] - snap));
        }
    }
    let num_art = art_rows.len();
    for (k, &(i, leftover)) in art_rows.iter().enumerate() {
        let mut c = vec![0.0; m];
        c[i] = if leftover >= 0.0 { 1.0 } else { -1.0 };
        cols.push(c);
        lo.push(0.0);
        hi.push(f64::INFINITY);
        state.push(VarState::Basic(i));
        basis[i] = n + m + k;
    }
    let num_cols = n + m + num_art;

    let mut tab = Tableau {
        num_rows: m,
        num_cols,

        cols,
        lo,
        hi,
        rhs: lp.rows.iter().map(|r| r.rhs).collect(),
        state,
        basis,
        binv: (0..m)
            .map(|i| {
                let mut r = vec![0.0; m];
                r[i] = 1.0;
                r
            })
            .collect(),
        values: vec![0.0; m],
        pivots_since_refactor: 0,
    };
    tab.refactorize()?;

    let iteration_cap = 2000 + 200 * (n + m);

    if num_art > 0 {
        let mut phase1_cost = vec![0.0; num_cols];
        for c in phase1_cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        run_simplex(&mut tab, &phase1_cost, iteration_cap)?;
        let art_sum: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= n + m)
            .map(|i| tab.values[i].max(0.0))
            .sum();
        if art_sum > FEAS_TOL * 10.0 {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective_value: 0.0,
                row_duals: vec![0.0; m],
            });
        }
        // freeze artificials at zero for phase 2
        for j in n + m..num_cols {
            tab.lo[j] = 0.0;
            tab.hi[j] = 0.0;
        }
    }

    let mut phase2_cost = vec![0.0; num_cols];
    phase2_cost[..n].copy_from_slice(&lp.objective);
    run_simplex(&mut tab, &phase2_cost, iteration_cap)?;

    // a residual basic artificial at a nonzero level means phase 1 lied
    for i in 0..m {
        if tab.basis[i] >= n + m && tab.values[i].abs() > FEAS_TOL * 10.0 {
            return Err(LpError::IterationLimit(0));
        }
    }

    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = match tab.state[j] {
            VarState::Basic(i) => tab.values[i],
            VarState::AtLower => tab.lo[j],
            VarState::AtUpper => tab.hi[j],
            VarState::FreeZero => 0.0,
        };
    }
    let objective_value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let row_duals = tab.duals(&phase2_cost);
    Ok(LpSolution { status: LpStatus::Optimal, x, objective_value, row_duals })
}

fn start_state(lo: f64, hi: f64) -> VarState {
    if lo.is_finite() {
        if hi.is_finite() && hi.abs() < lo.abs() {
            VarState::AtUpper
        } else {
            VarState::AtLower
        }
    } else if hi.is_finite() {
        VarState::AtUpper
    } else {
        VarState::FreeZero
    }
}

fn solve_unconstrained(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.objective.len();
    let mut x = vec![0.0; n];
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        let c = lp.objective[j];
        x[j] = if c > 0.0 {
            if lo.is_finite() {
                lo
            } else {
                return Err(LpError::Unbounded);
            }
        } else if c < 0.0 {
            if hi.is_finite() {
                hi
            } else {
                return Err(LpError::Unbounded);
            }
        } else if lo.is_finite() {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        };
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status: LpStatus::Optimal, x, objective_value, row_duals: vec![] })
}

fn run_simplex(tab: &mut Tableau, cost: &[f64], iteration_cap: usize) -> Result<(), LpError> {
    let mut iterations = 0usize;
    let mut degenerate_streak = 0usize;
    let mut bland = false;

    loop {
        iterations += 1;
        if iterations > iteration_cap {
            return Err(LpError::IterationLimit(iterations));
        }
        if tab.pivots_since_refactor >= REFACTOR_EVERY {
            tab.refactorize()?;
        }

        let pi = tab.duals(cost);

        // entering variable: nonbasic with an improving direction
        let mut entering: Option<(usize, f64, bool)> = None; // (var, |d|, increasing)
        for j in 0..tab.num_cols {
            let improving = match tab.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower | VarState::AtUpper | VarState::FreeZero => {
                    if tab.lo[j] == tab.hi[j] {
                        continue; // fixed
                    }
                    let d = tab.reduced_cost(j, cost, &pi);
                    match tab.state[j] {
                        VarState::AtLower => (d < -COST_TOL).then_some((d.abs(), true)),
                        VarState::AtUpper => (d > COST_TOL).then_some((d.abs(), false)),
                        VarState::FreeZero => {
                            if d < -COST_TOL {
                                Some((d.abs(), true))
                            } else if d > COST_TOL {
                                Some((d.abs(), false))
                            } else {
                                None
                            }
                        }
                        VarState::Basic(_) => unreachable!(),
                    }
                }
            };
            if let Some((score, increasing)) = improving {
                let better = match &entering {
                    None => true,
                    Some((jbest, best, _)) => {
                        if bland {
                            j < *jbest
                        } else {
                            score > *best
                        }
                    }
                };
                if better {
                    entering = Some((j, score, increasing));
                }
                if bland {
                    break;
                }
            }
        }

        let Some((q, _, increasing)) = entering else {
            return Ok(()); // optimal
        };

        let y = tab.ftran(q);
        let dir = if increasing { 1.0 } else { -1.0 };

        // ratio test: smallest step that drives a basic variable to a bound,
        // or a bound flip of the entering variable itself
        let own_range = tab.hi[q] - tab.lo[q]; // may be infinite
        let mut best_step = own_range;
        let mut leaving: Option<(usize, bool)> = None; // (row, leaves_at_upper)

        for i in 0..tab.num_rows {
            let rate = -dir * y[i]; // d(value_i)/d(step)
            let b = tab.basis[i];
            if rate < -PIVOT_TOL {
                if tab.lo[b].is_finite() {
                    let step = (tab.values[i] - tab.lo[b]) / -rate;
                    if step < best_step - 1e-12
                        || (step < best_step + 1e-12
                            && leaving.map_or(true, |(r, _)| y[i].abs() > y[r].abs()))
                    {
                        best_step = step.max(0.0);
                        leaving = Some((i, false));
                    }
                }
            } else if rate > PIVOT_TOL && tab.hi[b].is_finite() {
                let step = (tab.hi[b] - tab.values[i]) / rate;
                if step < best_step - 1e-12
                    || (step < best_step + 1e-12
                        && leaving.map_or(true, |(r, _)| y[i].abs() > y[r].abs()))
                {
                    best_step = step.max(0.0);
                    leaving = Some((i, true));
                }
            }
        }

        if best_step.is_infinite() {
            return Err(LpError::Unbounded);
        }

        if best_step <= 1e-11 {
            degenerate_streak += 1;
            if degenerate_streak >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }

        match leaving {
            None => {
                // bound flip of the entering variable
                tab.state[q] = if increasing { VarState::AtUpper } else { VarState::AtLower };
                for i in 0..tab.num_rows {
                    tab.values[i] -= dir * y[i] * best_step;
                }
            }
            Some((row, at_upper)) => {
                let b = tab.basis[row];
                let entering_value = if increasing {
                    tab.nonbasic_value(q) + best_step
                } else {
                    tab.nonbasic_value(q) - best_step
                };
                for i in 0..tab.num_rows {
                    tab.values[i] -= dir * y[i] * best_step;
                }
                tab.state[b] = if at_upper { VarState::AtUpper } else { VarState::AtLower };
                tab.pivot(q, row, &y)?;
                tab.state[q] = VarState::Basic(row);
                tab.values[row] = entering_value;
            }
        }
    }
}

/// A feasible point of a zero-objective program, if one exists.
pub fn feasibility_witness(lp: &LinearProgram) -> Result<Option<Vec<f64>>, LpError> {
    debug_assert!(lp.objective.iter().all(|c| *c == 0.0));
    let sol = solve(lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.x),
        LpStatus::Infeasible => None,
    })
}
