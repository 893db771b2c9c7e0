//! Variable fixing at node creation: constraint-inspection rules, feasibility
//! probes, and weighted-sum dominance probes, with witness caching and the
//! bound-improvement trigger.

use crate::branching::ObMode;
use crate::geometry::{self, ObjectivePoint};
use crate::instance::{MoilpInstance, RowSense};
use crate::local_upper::{shift_for_integer, LocalUpperBoundSet};
use crate::lower_bound::{LbsError, LowerBoundSet, NodeRelaxation};
use crate::lp::{self, LpStatus, OBJ_TOL};
use crate::upper_bound::FeasibleSolution;

const WITNESS_TOL: f64 = 1e-6;

/// Probing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbingMode {
    None,
    /// feasibility probes plus inspection fixing
    Vf,
    /// weighted-sum probes allowing fixing by dominance
    Vfd,
}

/// Most recent feasible probe solutions per target value, reused to skip
/// probes whose feasibility is already witnessed.
#[derive(Debug, Clone, Default)]
pub struct WitnessCache {
    pub last0: Option<Vec<f64>>,
    pub last1: Option<Vec<f64>>,
}

impl WitnessCache {
    fn get(&self, v: u8) -> Option<&Vec<f64>> {
        if v == 0 {
            self.last0.as_ref()
        } else {
            self.last1.as_ref()
        }
    }

    fn set(&mut self, v: u8, x: Vec<f64>) {
        if v == 0 {
            self.last0 = Some(x);
        } else {
            self.last1 = Some(x);
        }
    }
}

/// Fixings produced for one subproblem.
#[derive(Debug, Clone, Default)]
pub struct FixationResult {
    pub fixed_to_0: Vec<usize>,
    pub fixed_to_1: Vec<usize>,
    pub node_infeasible: bool,
    pub new_integer_solution: Option<FeasibleSolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Feasible,
    Infeasible,
    Dominated,
}

/// Probe only when the objective-branching constraints improved on the
/// parent; forced at the root and at every node without objective branching.
pub fn should_probe(
    slub: &ObjectivePoint,
    parent_slub: &ObjectivePoint,
    at_root: bool,
    ob_mode: ObMode,
) -> bool {
    at_root || ob_mode == ObMode::Nob || geometry::dominates(slub, parent_slub)
}

struct IntRow {
    coeffs: Vec<i64>,
    sense: RowSense,
    rhs: i64,
}

fn integer_rows(
    inst: &MoilpInstance,
    slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
    cuts: &[crate::cuts::CoverCut],
) -> Vec<IntRow> {
    let mut rows: Vec<IntRow> = inst
        .rows
        .iter()
        .map(|r| IntRow { coeffs: r.coeffs.clone(), sense: r.sense, rhs: r.rhs })
        .collect();
    for k in 0..inst.num_objectives {
        if slub.values()[k] < objective_box.values()[k] {
            rows.push(IntRow {
                coeffs: inst.objectives[k].clone(),
                sense: RowSense::Le,
                rhs: slub.values()[k],
            });
        }
    }
    for cut in cuts {
        let mut coeffs = vec![0i64; inst.num_vars];
        for &j in &cut.indices {
            coeffs[j] = 1;
        }
        rows.push(IntRow { coeffs, sense: RowSense::Le, rhs: cut.rhs });
    }
    rows
}

enum InspectionStep {
    Fix(usize, u8),
    Infeasible,
    Done,
}

/// One scan over the rows with exact minimum/maximum-activity arguments.
fn inspection_scan(rows: &[IntRow], fixed: &[Option<u8>]) -> InspectionStep {
    for row in rows {
        let le_like = matches!(row.sense, RowSense::Le | RowSense::Eq);
        let ge_like = matches!(row.sense, RowSense::Ge | RowSense::Eq);
        if le_like {
            // minimum activity: fixed-to-1 contributions plus negative free
            // coefficients at value 1
            let mut min_base: i64 = 0;
            for (j, &a) in row.coeffs.iter().enumerate() {
                match fixed[j] {
                    Some(1) => min_base += a,
                    None if a < 0 => min_base += a,
                    _ => {}
                }
            }
            if min_base > row.rhs {
                return InspectionStep::Infeasible;
            }
            for (j, &a) in row.coeffs.iter().enumerate() {
                if fixed[j].is_some() || a == 0 {
                    continue;
                }
                let present = if a < 0 { a } else { 0 };
                if min_base - present + a > row.rhs {
                    return InspectionStep::Fix(j, 0);
                }
                if min_base - present > row.rhs {
                    return InspectionStep::Fix(j, 1);
                }
            }
        }
        if ge_like {
            // maximum activity: fixed-to-1 contributions plus positive free
            // coefficients at value 1
            let mut max_base: i64 = 0;
            for (j, &a) in row.coeffs.iter().enumerate() {
                match fixed[j] {
                    Some(1) => max_base += a,
                    None if a > 0 => max_base += a,
                    _ => {}
                }
            }
            if max_base < row.rhs {
                return InspectionStep::Infeasible;
            }
            for (j, &a) in row.coeffs.iter().enumerate() {
                if fixed[j].is_some() || a == 0 {
                    continue;
                }
                let present = if a > 0 { a } else { 0 };
                if max_base - present + a < row.rhs {
                    return InspectionStep::Fix(j, 0);
                }
                if max_base - present < row.rhs {
                    return InspectionStep::Fix(j, 1);
                }
            }
        }
    }
    InspectionStep::Done
}

/// Fix variables by constraint inspection, looping to a fixed point.
/// Returns false on contradiction.
fn inspection_fix(
    rows: &[IntRow],
    fixed: &mut [Option<u8>],
    result: &mut FixationResult,
) -> bool {
    loop {
        match inspection_scan(rows, fixed) {
            InspectionStep::Done => return true,
            InspectionStep::Infeasible => {
                result.node_infeasible = true;
                return false;
            }
            InspectionStep::Fix(j, v) => {
                fixed[j] = Some(v);
                if v == 0 {
                    result.fixed_to_0.push(j);
                } else {
                    result.fixed_to_1.push(j);
                }
            }
        }
    }
}

fn witness_valid(relax: &NodeRelaxation, w: &[f64], var: usize, value: u8) -> bool {
    if w.len() != relax.num_vars() {
        return false;
    }
    if (w[var] - value as f64).abs() > WITNESS_TOL {
        return false;
    }
    for (j, &(lo, hi)) in relax.bounds.iter().enumerate() {
        if w[j] < lo - WITNESS_TOL || w[j] > hi + WITNESS_TOL {
            return false;
        }
    }
    for row in &relax.rows {
        let lhs: f64 = row.coeffs.iter().zip(w).map(|(a, x)| a * x).sum();
        let ok = match row.sense {
            lp::LpSense::Le => lhs <= row.rhs + WITNESS_TOL,
            lp::LpSense::Ge => lhs >= row.rhs - WITNESS_TOL,
            lp::LpSense::Eq => (lhs - row.rhs).abs() <= WITNESS_TOL,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Everything a probing pass needs besides the relaxation itself.
pub struct ProbeContext<'a> {
    pub inst: &'a MoilpInstance,
    /// subproblem bound as produced by objective branching, before clamping
    /// against ancestors; the dominance test filters bounds against it
    pub raw_slub: &'a ObjectivePoint,
    pub lub_set: &'a LocalUpperBoundSet,
    /// parent bound set, for extreme-point witness skips
    pub lbs: Option<&'a LowerBoundSet>,
    /// normalized weighted-sum direction, present under Vfd
    pub lambda: Option<&'a [f64]>,
}

/// Probe a single (variable, value) pair. Skips the LP when a cached witness
/// or an extreme-point pre-image already proves feasibility.
pub fn probe_variable(
    relax: &NodeRelaxation,
    var: usize,
    value: u8,
    mode: ProbingMode,
    cache: &mut WitnessCache,
    ctx: &ProbeContext,
    lp_count: &mut usize,
) -> Result<ProbeOutcome, LbsError> {
    if let Some(w) = cache.get(value) {
        if witness_valid(relax, w, var, value) {
            return Ok(ProbeOutcome::Feasible);
        }
    }
    if let Some(lbs) = ctx.lbs {
        for ep in &lbs.extreme_points {
            if witness_valid(relax, &ep.preimage, var, value) {
                return Ok(ProbeOutcome::Feasible);
            }
        }
    }

    let n = relax.num_vars();
    match mode {
        ProbingMode::None => Ok(ProbeOutcome::Feasible),
        ProbingMode::Vf => {
            let lp = relax.lp_with_fixing(vec![0.0; n], var, value);
            *lp_count += 1;
            let sol = lp::solve(&lp).map_err(LbsError::Lp)?;
            if sol.status == LpStatus::Infeasible {
                Ok(ProbeOutcome::Infeasible)
            } else {
                cache.set(value, sol.x);
                Ok(ProbeOutcome::Feasible)
            }
        }
        ProbingMode::Vfd => {
            let lambda = ctx.lambda.expect("Vfd probing needs weights");
            let objective: Vec<f64> = (0..n)
                .map(|j| {
                    (0..ctx.inst.num_objectives)
                        .map(|k| lambda[k] * ctx.inst.objectives[k][j] as f64)
                        .sum()
                })
                .collect();
            let lp = relax.lp_with_fixing(objective, var, value);
            *lp_count += 1;
            let sol = lp::solve(&lp).map_err(LbsError::Lp)?;
            if sol.status == LpStatus::Infeasible {
                return Ok(ProbeOutcome::Infeasible);
            }
            let z_star = sol.objective_value;
            let survivor = ctx.lub_set.lubs().iter().any(|u| {
                let s = shift_for_integer(u);
                if !geometry::weakly_dominates(&s, ctx.raw_slub) {
                    return false;
                }
                let ws: f64 = lambda
                    .iter()
                    .zip(s.values())
                    .map(|(l, v)| l * *v as f64)
                    .sum();
                ws >= z_star - OBJ_TOL
            });
            if survivor {
                cache.set(value, sol.x);
                Ok(ProbeOutcome::Feasible)
            } else {
                Ok(ProbeOutcome::Dominated)
            }
        }
    }
}

/// Full probing pass for one subproblem: inspection fixing to a fixed point,
/// then one probe per free variable and value. Fixings take effect
/// immediately; when everything ends up fixed, the unique completion is
/// verified against the original constraints and returned for insertion.
#[allow(clippy::too_many_arguments)]
pub fn probe_node(
    inst: &MoilpInstance,
    fixed: &mut Vec<Option<u8>>,
    slub: &ObjectivePoint,
    raw_slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
    cuts: &[crate::cuts::CoverCut],
    mode: ProbingMode,
    lambda: Option<&[f64]>,
    lub_set: &LocalUpperBoundSet,
    lbs: Option<&LowerBoundSet>,
) -> Result<(FixationResult, usize), LbsError> {
    let mut result = FixationResult::default();
    let mut lp_count = 0usize;

    let rows = integer_rows(inst, slub, objective_box, cuts);
    if !inspection_fix(&rows, fixed, &mut result) {
        return Ok((result, lp_count));
    }

    if fixed.iter().any(|f| f.is_none()) {
        let mut relax = NodeRelaxation::new(inst, fixed, slub, objective_box, cuts);
        let mut cache = WitnessCache::default();
        let ctx = ProbeContext { inst, raw_slub, lub_set, lbs, lambda };

        for i in 0..inst.num_vars {
            if fixed[i].is_some() {
                continue;
            }
            let out0 = probe_variable(&relax, i, 0, mode, &mut cache, &ctx, &mut lp_count)?;
            let out1 = probe_variable(&relax, i, 1, mode, &mut cache, &ctx, &mut lp_count)?;
            let fail0 = out0 != ProbeOutcome::Feasible;
            let fail1 = out1 != ProbeOutcome::Feasible;
            match (fail0, fail1) {
                (true, true) => {
                    result.node_infeasible = true;
                    return Ok((result, lp_count));
                }
                (true, false) => {
                    fixed[i] = Some(1);
                    relax.bounds[i] = (1.0, 1.0);
                    result.fixed_to_1.push(i);
                }
                (false, true) => {
                    fixed[i] = Some(0);
                    relax.bounds[i] = (0.0, 0.0);
                    result.fixed_to_0.push(i);
                }
                (false, false) => {}
            }
        }
    }

    if fixed.iter().all(|f| f.is_some()) {
        let x: Vec<u8> = fixed.iter().map(|f| f.unwrap()).collect();
        if inst.is_feasible(&x) {
            result.new_integer_solution =
                Some(FeasibleSolution { image: inst.image(&x), preimage: x });
        } else {
            result.node_infeasible = true;
        }
    }
    Ok((result, lp_count))
}
