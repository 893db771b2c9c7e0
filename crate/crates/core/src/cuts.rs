//! Cover inequalities derived from objective-branching constraints at
//! fractional extreme points, with a simple coefficient-sum lifting test.
//!
//! An objective bounded by `C_k x <= s_k` with nonnegative coefficients is a
//! knapsack row. At a fractional extreme point whose support exceeds the
//! bound, the support indices cannot all be one, giving the cover inequality
//! `sum_{j in J} x_j <= |J| - 1`. A candidate index g lifts an existing cut
//! when any rhs+1 coefficients of the enlarged index set already violate the
//! bound.

use crate::geometry::ObjectivePoint;
use crate::instance::MoilpInstance;
use crate::lower_bound::LowerBoundSet;

const FRAC_TOL: f64 = 1e-6;

/// `sum_{j in indices} x_j <= rhs` with `rhs = |indices| - 1` at generation
/// (lifting grows `indices` while keeping `rhs`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCut {
    /// sorted variable indices
    pub indices: Vec<usize>,
    pub rhs: i64,
}

impl CoverCut {
    pub fn satisfied_by(&self, x: &[u8]) -> bool {
        let total: i64 = self.indices.iter().map(|&j| x[j] as i64).sum();
        total <= self.rhs
    }
}

/// Objectives eligible for cover generation: bounded by a non-vacuous SLUB
/// component and in knapsack form (every coefficient nonnegative).
fn eligible_objectives(
    inst: &MoilpInstance,
    slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
) -> Vec<usize> {
    (0..inst.num_objectives)
        .filter(|&k| {
            slub.values()[k] < objective_box.values()[k]
                && inst.objectives[k].iter().all(|c| *c >= 0)
        })
        .collect()
}

/// Generate cover cuts from the in-region fractional extreme points of the
/// lower bound set. Identical index sets are emitted once.
pub fn generate(
    inst: &MoilpInstance,
    lbs: &LowerBoundSet,
    slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
) -> Vec<CoverCut> {
    let eligible = eligible_objectives(inst, slub, objective_box);
    if eligible.is_empty() {
        return Vec::new();
    }
    let mut cuts: Vec<CoverCut> = Vec::new();
    for ep in &lbs.extreme_points {
        let in_region = ep
            .image
            .iter()
            .zip(slub.values())
            .all(|(y, s)| *y <= *s as f64 + FRAC_TOL);
        if !in_region {
            continue;
        }
        let mut support: Vec<usize> = Vec::new();
        let mut fractional = false;
        for (j, &v) in ep.preimage.iter().enumerate() {
            if v > FRAC_TOL {
                support.push(j);
                if v < 1.0 - FRAC_TOL {
                    fractional = true;
                }
            }
        }
        if !fractional || support.is_empty() {
            continue;
        }
        let rhs = support.len() as i64 - 1;
        let violated = {
            let total: f64 = support.iter().map(|&j| ep.preimage[j]).sum();
            total > rhs as f64 + 1e-7
        };
        if !violated {
            continue;
        }
        let bound_exceeded = eligible.iter().any(|&k| {
            let sum: i64 = support.iter().map(|&j| inst.objectives[k][j]).sum();
            sum > slub.values()[k]
        });
        if !bound_exceeded {
            continue;
        }
        let cut = CoverCut { indices: support, rhs };
        if !cuts.contains(&cut) {
            cuts.push(cut);
        }
    }
    cuts
}

/// Lift a cut with candidate index `g`: succeeds iff for some eligible
/// objective the sum of the (rhs + 1) smallest coefficients over the enlarged
/// index set still exceeds the SLUB bound, so any rhs + 1 members violate it.
pub fn lift(
    cut: &CoverCut,
    g: usize,
    inst: &MoilpInstance,
    slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
) -> Option<CoverCut> {
    debug_assert!(!cut.indices.contains(&g));
    let eligible = eligible_objectives(inst, slub, objective_box);
    let take = (cut.rhs + 1) as usize;
    let ok = eligible.iter().any(|&k| {
        let mut coeffs: Vec<i64> = cut
            .indices
            .iter()
            .chain(std::iter::once(&g))
            .map(|&j| inst.objectives[k][j])
            .collect();
        coeffs.sort_unstable();
        coeffs.iter().take(take).sum::<i64>() > slub.values()[k]
    });
    if !ok {
        return None;
    }
    let mut indices = cut.indices.clone();
    indices.push(g);
    indices.sort_unstable();
    Some(CoverCut { indices, rhs: cut.rhs })
}

/// Full per-node pipeline: generate, then greedily lift each cut with the
/// free variables that are fractional in some in-region extreme point, tried
/// in ascending index order.
pub fn generate_with_lifting(
    inst: &MoilpInstance,
    lbs: &LowerBoundSet,
    slub: &ObjectivePoint,
    objective_box: &ObjectivePoint,
    fixed: &[Option<u8>],
) -> Vec<CoverCut> {
    let mut cuts = generate(inst, lbs, slub, objective_box);
    if cuts.is_empty() {
        return cuts;
    }
    let mut candidates: Vec<usize> = Vec::new();
    for ep in &lbs.extreme_points {
        let in_region = ep
            .image
            .iter()
            .zip(slub.values())
            .all(|(y, s)| *y <= *s as f64 + FRAC_TOL);
        if !in_region {
            continue;
        }
        for (j, &v) in ep.preimage.iter().enumerate() {
            if fixed[j].is_none() && v > FRAC_TOL && v < 1.0 - FRAC_TOL && !candidates.contains(&j)
            {
                candidates.push(j);
            }
        }
    }
    candidates.sort_unstable();
    for cut in cuts.iter_mut() {
        for &g in &candidates {
            if cut.indices.contains(&g) {
                continue;
            }
            if let Some(lifted) = lift(cut, g, inst, slub, objective_box) {
                *cut = lifted;
            }
        }
    }
    cuts.dedup();
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ConstraintRow, MoilpInstance, RowSense};
    use crate::lower_bound::{ExtremePoint, LbsStatus};

    fn pt(v: &[i64]) -> ObjectivePoint {
        ObjectivePoint::new(v.to_vec())
    }

    /// Instance with explicit minimization objectives (no negation).
    fn plain_instance(objectives: Vec<Vec<i64>>, rows: Vec<ConstraintRow>) -> MoilpInstance {
        let n = objectives[0].len();
        let p = objectives.len();
        MoilpInstance {
            num_objectives: p,
            num_vars: n,
            objectives,
            maximize: vec![false; p],
            rows,
            labels: vec![None; n],
        }
    }

    fn lbs_with(points: Vec<ExtremePoint>) -> LowerBoundSet {
        LowerBoundSet {
            status: LbsStatus::General,
            extreme_points: points,
            facets: vec![],
            lp_count: 0,
        }
    }

    #[test]
    fn integral_preimage_yields_no_cut() {
        let inst = plain_instance(vec![vec![3, 4, 5], vec![1, 1, 1]], vec![]);
        let lbs = lbs_with(vec![ExtremePoint {
            image: vec![7.0, 2.0],
            preimage: vec![1.0, 1.0, 0.0],
        }]);
        let cuts = generate(&inst, &lbs, &pt(&[9, 2]), &pt(&[13, 4]));
        assert!(cuts.is_empty());
    }

    #[test]
    fn arithmetic_example_emits_cut() {
        // objective coefficients (3,4,5), bound 9, preimage (1,1,0.5):
        // support sums to 12 > 9 and violation 2.5 > 2 -> cut x1+x2+x3 <= 2
        let inst = plain_instance(vec![vec![3, 4, 5], vec![0, 0, 0]], vec![]);
        let lbs = lbs_with(vec![ExtremePoint {
            image: vec![9.0, 0.0],
            preimage: vec![1.0, 1.0, 0.5],
        }]);
        let cuts = generate(&inst, &lbs, &pt(&[9, 3]), &pt(&[13, 4]));
        assert_eq!(cuts, vec![CoverCut { indices: vec![0, 1, 2], rhs: 2 }]);

        // bound 13 is not exceeded (12 <= 13): no cut
        let cuts = generate(&inst, &lbs, &pt(&[13, 3]), &pt(&[14, 4]));
        assert!(cuts.is_empty());
    }

    #[test]
    fn lift_examples() {
        let inst = plain_instance(vec![vec![3, 4, 5, 6], vec![0, 0, 0, 0]], vec![]);
        let cut = CoverCut { indices: vec![0, 1, 2], rhs: 2 };
        // three smallest of {3,4,5,6} sum to 12 > 9: lift accepted
        let lifted = lift(&cut, 3, &inst, &pt(&[9, 3]), &pt(&[19, 4])).unwrap();
        assert_eq!(lifted, CoverCut { indices: vec![0, 1, 2, 3], rhs: 2 });

        // candidate coefficient 0: three smallest {0,3,4} sum to 7 <= 9
        let inst = plain_instance(vec![vec![3, 4, 5, 0], vec![0, 0, 0, 0]], vec![]);
        assert!(lift(&cut, 3, &inst, &pt(&[9, 3]), &pt(&[13, 4])).is_none());
    }

    #[test]
    fn lifted_cut_safe_on_enumeration() {
        // 6-variable instance; check the lifted cut against every feasible
        // binary point inside the SLUB region
        let inst = plain_instance(
            vec![vec![4, 5, 6, 7, 3, 8], vec![1, 1, 1, 1, 1, 1]],
            vec![ConstraintRow {
                coeffs: vec![2, 3, 2, 4, 1, 3],
                sense: RowSense::Le,
                rhs: 9,
            }],
        );
        let slub = pt(&[12, 4]);
        let bx = inst.objective_box();
        let cut = CoverCut { indices: vec![0, 1, 2], rhs: 2 };
        let lifted = lift(&cut, 5, &inst, &slub, &bx);
        let lifted = lifted.expect("coefficients {4,5,6,8}: three smallest sum 15 > 12");
        for sol in crate::oracle::enumerate_feasible(&inst, 20).unwrap() {
            let in_region = sol
                .image
                .values()
                .iter()
                .zip(slub.values())
                .all(|(z, s)| z <= s);
            if in_region {
                assert!(
                    lifted.satisfied_by(&sol.preimage),
                    "lifted cut removes in-region point {:?}",
                    sol.preimage
                );
            }
        }
    }

    #[test]
    fn negated_objectives_are_ineligible() {
        // stored-negated maximization column: all coefficients <= 0; the
        // second objective is unbounded (box-valued SLUB component)
        let inst = plain_instance(vec![vec![-3, -4, -5], vec![2, 2, 2]], vec![]);
        let lbs = lbs_with(vec![ExtremePoint {
            image: vec![-9.0, 3.0],
            preimage: vec![1.0, 1.0, 0.5],
        }]);
        let cuts = generate(&inst, &lbs, &pt(&[-2, 7]), &pt(&[1, 7]));
        assert!(cuts.is_empty());
    }
}
