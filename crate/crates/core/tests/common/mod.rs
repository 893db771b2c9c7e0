//! Shared test support: an exact rational-arithmetic simplex used as the
//! reference for the floating-point engine, plus small helpers.
//!
//! The reference solver is a dense two-phase tableau simplex over
//! `BigRational` with Bland's rule throughout, so it terminates and is exact.
//! It stays independent of the production engine: different algorithm,
//! different number type, no shared code.

#![allow(dead_code)]

use mobb::lp::{LinearProgram, LpSense};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct RefSolution {
    pub status: RefStatus,
    pub value: BigRational,
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite coefficient")
}

/// Exact reference solve of a bounded-variable program with finite bounds.
/// Bounds become explicit rows; all variables are shifted to be nonnegative.
pub fn reference_solve(lp: &LinearProgram) -> RefSolution {
    let n = lp.objective.len();
    // substitute x_j = lo_j + y_j with y_j in [0, hi_j - lo_j]
    let lo: Vec<BigRational> = lp.bounds.iter().map(|b| rat(b.0)).collect();
    let span: Vec<BigRational> = lp.bounds.iter().map(|b| rat(b.1) - rat(b.0)).collect();

    // rows over y: sum a_j y_j {sense} b - sum a_j lo_j, plus y_j <= span_j
    let mut rows: Vec<(Vec<BigRational>, LpSense, BigRational)> = Vec::new();
    for row in &lp.rows {
        let coeffs: Vec<BigRational> = row.coeffs.iter().map(|c| rat(*c)).collect();
        let shift: BigRational = coeffs.iter().zip(&lo).map(|(a, l)| a * l).sum();
        rows.push((coeffs, row.sense, rat(row.rhs) - shift));
    }
    for j in 0..n {
        let mut coeffs = vec![BigRational::zero(); n];
        coeffs[j] = BigRational::one();
        rows.push((coeffs, LpSense::Le, span[j].clone()));
    }

    let objective: Vec<BigRational> = lp.objective.iter().map(|c| rat(*c)).collect();
    let constant: BigRational = objective.iter().zip(&lo).map(|(c, l)| c * l).sum();

    match tableau_simplex(&objective, &rows) {
        None => RefSolution { status: RefStatus::Infeasible, value: BigRational::zero() },
        Some(value) => RefSolution { status: RefStatus::Optimal, value: value + constant },
    }
}

/// Minimize `c . y` over `rows`, y >= 0. Returns None when infeasible.
/// Box rows keep the program bounded, so unboundedness cannot occur.
fn tableau_simplex(
    objective: &[BigRational],
    rows: &[(Vec<BigRational>, LpSense, BigRational)],
) -> Option<BigRational> {
    let n = objective.len();
    let m = rows.len();

    // columns: y (n) | slack/surplus (one per inequality) | artificial
    let mut num_cols = n;
    let mut slack_col: Vec<Option<usize>> = Vec::with_capacity(m);
    for (_, sense, _) in rows {
        match sense {
            LpSense::Le | LpSense::Ge => {
                slack_col.push(Some(num_cols));
                num_cols += 1;
            }
            LpSense::Eq => slack_col.push(None),
        }
    }
    let art_base = num_cols;

    // normalize rhs >= 0 after slack insertion, then add artificials where
    // the slack cannot serve as the initial basic variable
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut num_art = 0usize;
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        let mut row = vec![BigRational::zero(); num_cols];
        row[..n].clone_from_slice(coeffs);
        if let Some(sc) = slack_col[i] {
            row[sc] = match sense {
                LpSense::Le => BigRational::one(),
                LpSense::Ge => -BigRational::one(),
                LpSense::Eq => unreachable!(),
            };
        }
        let mut rhs = rhs.clone();
        if rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
        }
        // slack usable as basis iff its coefficient is +1 after normalization
        let basis_var = slack_col[i].filter(|&sc| row[sc].is_one());
        match basis_var {
            Some(sc) => basis.push(sc),
            None => {
                basis.push(art_base + num_art);
                num_art += 1;
            }
        }
        row.push(rhs); // rhs stored as the last entry for now
        tab.push(row);
    }
    // widen rows with artificial columns
    for (i, row) in tab.iter_mut().enumerate() {
        let rhs = row.pop().unwrap();
        row.resize(art_base + num_art, BigRational::zero());
        if basis[i] >= art_base {
            let col = basis[i];
            row[col] = BigRational::one();
        }
        row.push(rhs);
    }
    let total_cols = art_base + num_art;

    // phase 1: minimize the artificial sum
    if num_art > 0 {
        let mut cost = vec![BigRational::zero(); total_cols];
        for c in cost.iter_mut().take(total_cols).skip(art_base) {
            *c = BigRational::one();
        }
        let value = run_bland(&mut tab, &mut basis, &cost, total_cols);
        if value.is_positive() {
            return None;
        }
        // pivot stray artificials out where possible; redundant rows keep
        // them basic at zero, which phase 2 cannot disturb
        for i in 0..m {
            if basis[i] >= art_base {
                if let Some(j) = (0..art_base).find(|&j| !tab[i][j].is_zero()) {
                    pivot(&mut tab, &mut basis, i, j, total_cols);
                }
            }
        }
    }

    // phase 2
    let mut cost = vec![BigRational::zero(); total_cols];
    cost[..n].clone_from_slice(objective);
    // forbid artificials from re-entering by pricing them out
    Some(run_bland_restricted(&mut tab, &mut basis, &cost, art_base, total_cols))
}

fn run_bland(
    tab: &mut [Vec<BigRational>],
    basis: &mut [usize],
    cost: &[BigRational],
    total_cols: usize,
) -> BigRational {
    run_bland_restricted(tab, basis, cost, total_cols, total_cols)
}

/// Bland-rule simplex over the tableau; only columns below `enter_limit`
/// may enter the basis.
fn run_bland_restricted(
    tab: &mut [Vec<BigRational>],
    basis: &mut [usize],
    cost: &[BigRational],
    enter_limit: usize,
    total_cols: usize,
) -> BigRational {
    let m = tab.len();
    loop {
        // reduced costs: c_j - c_B . column_j
        let mut entering: Option<usize> = None;
        for j in 0..enter_limit {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j].clone();
            for i in 0..m {
                if !tab[i][j].is_zero() {
                    d -= cost[basis[i]].clone() * tab[i][j].clone();
                }
            }
            if d.is_negative() {
                entering = Some(j);
                break; // Bland: smallest improving index
            }
        }
        let Some(q) = entering else {
            let mut value = BigRational::zero();
            for i in 0..m {
                value += cost[basis[i]].clone() * tab[i][total_cols].clone();
            }
            return value;
        };

        // ratio test, ties to the smallest basis variable index
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if tab[i][q].is_positive() {
                let ratio = tab[i][total_cols].clone() / tab[i][q].clone();
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let r = leave.expect("box rows keep the reference program bounded");
        pivot(tab, basis, r, q, total_cols);
    }
}

fn pivot(
    tab: &mut [Vec<BigRational>],
    basis: &mut [usize],
    row: usize,
    col: usize,
    total_cols: usize,
) {
    let d = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v /= d.clone();
    }
    for i in 0..tab.len() {
        if i != row && !tab[i][col].is_zero() {
            let f = tab[i][col].clone();
            for j in 0..=total_cols {
                let delta = f.clone() * tab[row][j].clone();
                tab[i][j] -= delta;
            }
        }
    }
    basis[row] = col;
}

/// Deterministic xorshift for test-local randomness without extra deps.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }

    pub fn range_usize(&mut self, lo: usize, hi: usize) -> usize {
        self.range_i64(lo as i64, hi as i64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// Sorted image vectors of a front, for set comparison.
pub fn sorted_images(front: &mobb::UpperBoundSet) -> Vec<mobb::ObjectivePoint> {
    let mut v = front.images();
    v.sort();
    v
}

pub fn oracle_front_images(inst: &mobb::MoilpInstance) -> Vec<mobb::ObjectivePoint> {
    let mut v: Vec<mobb::ObjectivePoint> = mobb::oracle::brute_force_front(inst)
        .unwrap()
        .into_iter()
        .map(|s| s.image)
        .collect();
    v.sort();
    v
}
