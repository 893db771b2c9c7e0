//! Objective-space subproblem construction from the partially dominated
//! lower bound set: full objective branching via pairwise merging, cone
//! bounding, or none.

use crate::geometry::{self, ObjectivePoint};
use crate::local_upper::{shift_for_integer, LocalUpperBoundSet};
use crate::lower_bound::LowerBoundSet;
use serde::{Deserialize, Serialize};

/// Objective-branching strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObMode {
    /// no objective branching: subproblems carry the whole box
    Nob,
    /// cone bounding: one subproblem bounded by the nadir of the dominated
    /// local upper bounds
    Cb,
    /// full objective branching: one subproblem per merged super local upper
    /// bound
    Fob,
}

/// A super local upper bound: the subproblem constraint is `z(x) <= bound`
/// componentwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slub {
    pub bound: ObjectivePoint,
}

/// Shifted local upper bounds covered by the lower bound set, sorted. An
/// empty result signals fathoming by dominance.
pub fn dominated_lubs(lbs: &LowerBoundSet, lub_set: &LocalUpperBoundSet) -> Vec<ObjectivePoint> {
    let mut out: Vec<ObjectivePoint> = lub_set
        .lubs()
        .iter()
        .map(shift_for_integer)
        .filter(|shifted| lbs.covers(shifted))
        .collect();
    out.sort();
    out
}

/// Merge dominated bounds into super local upper bounds: while some pair's
/// ideal point is covered by the lower bound set, replace the pair by its
/// nadir. Pairs are scanned in index order over the working list, the merged
/// point is appended at the end, and the scan restarts after every merge.
pub fn fob_merge(dominated: &[ObjectivePoint], lbs: &LowerBoundSet) -> Vec<Slub> {
    assert!(!dominated.is_empty(), "objective branching needs a nonempty dominated set");
    let mut work: Vec<ObjectivePoint> = dominated.to_vec();
    'merge: loop {
        for i in 0..work.len() {
            for j in i + 1..work.len() {
                let ideal = work[i].componentwise_min(&work[j]);
                if lbs.covers(&ideal) {
                    let nadir = work[i].componentwise_max(&work[j]);
                    work.remove(j);
                    work.remove(i);
                    work.push(nadir);
                    continue 'merge;
                }
            }
        }
        break;
    }
    work.into_iter().map(|bound| Slub { bound }).collect()
}

/// Single bound at the nadir of the dominated local upper bounds; no
/// objective-space split.
pub fn cone_bound(dominated: &[ObjectivePoint]) -> Slub {
    Slub { bound: geometry::nadir_point(dominated) }
}
