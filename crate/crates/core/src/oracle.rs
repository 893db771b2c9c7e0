//! Independent brute-force references used by tests: exhaustive
//! nondominated-set enumeration and grid-based local-upper-bound computation.
//!
//! Everything here runs on exact integer arithmetic and is kept independent
//! of the solver path it validates. With the `parallel` feature the mask scan
//! fans out over rayon; results are identical either way.

use crate::geometry::{self, ObjectivePoint};
use crate::instance::{MoilpInstance, RowSense};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_MAX_N: usize = 20;
pub const DEFAULT_MAX_GRID: i64 = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {n} variables, oracle limit is {limit}")]
    TooManyVariables { n: usize, limit: usize },
    #[error("grid box extent {extent} exceeds oracle limit {limit}")]
    GridTooLarge { extent: i64, limit: i64 },
}

/// A feasible binary solution and its exact image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub image: ObjectivePoint,
    pub preimage: Vec<u8>,
}


fn eval_mask(inst: &MoilpInstance, mask: u64) -> Option<OracleSolution> {
    let n = inst.num_vars;
    let mut x = vec![0u8; n];
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = ((mask >> i) & 1) as u8;
    }
    for row in &inst.rows {
        let lhs: i64 = row
            .coeffs
            .iter()
            .zip(&x)
            .map(|(a, xi)| a * *xi as i64)
            .sum();
        let ok = match row.sense {
            RowSense::Le => lhs <= row.rhs,
            RowSense::Ge => lhs >= row.rhs,
            RowSense::Eq => lhs == row.rhs,
        };
        if !ok {
            return None;
        }
    }
    Some(OracleSolution { image: inst.image(&x), preimage: x })
}

fn front_from_feasible(feasible: Vec<OracleSolution>) -> Vec<OracleSolution> {
    let images: Vec<ObjectivePoint> = feasible.iter().map(|s| s.image.clone()).collect();
    let front_images = geometry::pareto_filter(&images);
    // one representative pre-image per front point: first in mask order
    front_images
        .into_iter()
        .map(|img| {
            feasible
                .iter()
                .find(|s| s.image == img)
                .expect("front image must come from a feasible solution")
                .clone()
        })
        .collect()
}

/// Enumerate all 2^n binary vectors, keep the exactly-feasible ones, and
/// Pareto-filter their images. One representative pre-image per front point.
pub fn brute_force_front(inst: &MoilpInstance) -> Result<Vec<OracleSolution>, OracleError> {
    brute_force_front_limited(inst, DEFAULT_MAX_N)
}

pub fn brute_force_front_limited(
    inst: &MoilpInstance,
    max_n: usize,
) -> Result<Vec<OracleSolution>, OracleError> {
    if inst.num_vars > max_n {
        return Err(OracleError::TooManyVariables { n: inst.num_vars, limit: max_n });
    }
    let total: u64 = 1u64 << inst.num_vars;
    #[cfg(feature = "parallel")]
    let feasible: Vec<OracleSolution> = (0..total)
        .into_par_iter()
        .filter_map(|mask| eval_mask(inst, mask))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let feasible: Vec<OracleSolution> = (0..total).filter_map(|mask| eval_mask(inst, mask)).collect();
    Ok(front_from_feasible(feasible))
}

/// Always-sequential variant of [`brute_force_front`]; the benches compare
/// the two paths.
pub fn brute_force_front_seq(
    inst: &MoilpInstance,
    max_n: usize,
) -> Result<Vec<OracleSolution>, OracleError> {
    if inst.num_vars > max_n {
        return Err(OracleError::TooManyVariables { n: inst.num_vars, limit: max_n });
    }
    let total: u64 = 1u64 << inst.num_vars;
    let feasible: Vec<OracleSolution> = (0..total).filter_map(|mask| eval_mask(inst, mask)).collect();
    Ok(front_from_feasible(feasible))
}

/// All feasible binary solutions (not Pareto-filtered), in mask order.
pub fn enumerate_feasible(
    inst: &MoilpInstance,
    max_n: usize,
) -> Result<Vec<OracleSolution>, OracleError> {
    if inst.num_vars > max_n {
        return Err(OracleError::TooManyVariables { n: inst.num_vars, limit: max_n });
    }
    let total: u64 = 1u64 << inst.num_vars;
    Ok((0..total).filter_map(|mask| eval_mask(inst, mask)).collect())
}

/// Definitional local upper bounds on the integer grid.
///
/// A grid point g of the box survives iff no u in `points` is strictly below
/// it in every component; the local upper bounds are the maximal survivors.
pub fn grid_lubs(
    points: &[ObjectivePoint],
    grid_box: &ObjectivePoint,
) -> Result<Vec<ObjectivePoint>, OracleError> {
    grid_lubs_limited(points, grid_box, DEFAULT_MAX_GRID)
}

pub fn grid_lubs_limited(
    points: &[ObjectivePoint],
    grid_box: &ObjectivePoint,
    max_grid: i64,
) -> Result<Vec<ObjectivePoint>, OracleError> {
    let p = grid_box.dim();
    for &m in grid_box.values() {
        if m > max_grid {
            return Err(OracleError::GridTooLarge { extent: m, limit: max_grid });
        }
    }

    let mut survivors: Vec<ObjectivePoint> = Vec::new();
    let mut cursor = vec![0i64; p];
    'outer: loop {
        let g = ObjectivePoint::new(cursor.clone());
        let covered = points.iter().any(|u| geometry::strictly_dominates(u, &g));
        if !covered {
            survivors.push(g);
        }
        for k in 0..p {
            if cursor[k] < grid_box.values()[k] {
                cursor[k] += 1;
                continue 'outer;
            }
            cursor[k] = 0;
        }
        break;
    }

    // maximal survivors: not dominated by another survivor in the reversed order
    let flipped: Vec<ObjectivePoint> = survivors
        .iter()
        .map(|s| ObjectivePoint::new(s.values().iter().map(|v| -v).collect()))
        .collect();
    let maximal = geometry::pareto_filter(&flipped);
    let mut out: Vec<ObjectivePoint> = maximal
        .into_iter()
        .map(|s| ObjectivePoint::new(s.values().iter().map(|v| -v).collect()))
        .collect();
    out.sort();
    Ok(out)
}
