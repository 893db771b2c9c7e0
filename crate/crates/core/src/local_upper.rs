//! Incremental maintenance of the set of local upper bounds describing the
//! unexplored region, plus the integer shift used by dominance tests and
//! objective branching.
//!
//! A point g of the box belongs to the (closed) unexplored region iff no
//! incumbent image is strictly below it in every component. The local upper
//! bounds are the maximal such points. Insertion therefore removes exactly
//! the bounds strictly above the new point and replaces each with its p
//! single-component projections, filtered for redundancy.

use crate::geometry::{self, ObjectivePoint};
use thiserror::Error;

/// One local upper bound. Components are finite; "unbounded" components are
/// realized as the per-instance box value, which exceeds any attainable
/// objective value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalUpperBound(pub ObjectivePoint);

#[derive(Debug, Error)]
pub enum LubError {
    #[error("point {point} outside box {bound}")]
    OutsideBox { point: ObjectivePoint, bound: ObjectivePoint },
}

/// The set N(U) of maximal corner points of the unexplored region.
#[derive(Debug, Clone)]
pub struct LocalUpperBoundSet {
    lubs: Vec<ObjectivePoint>,
    bounding_box: ObjectivePoint,
}

impl LocalUpperBoundSet {
    /// Singleton set at the box corner (empty incumbent set).
    pub fn init(bounding_box: ObjectivePoint) -> Self {
        LocalUpperBoundSet { lubs: vec![bounding_box.clone()], bounding_box }
    }

    pub fn bounding_box(&self) -> &ObjectivePoint {
        &self.bounding_box
    }

    pub fn lubs(&self) -> &[ObjectivePoint] {
        &self.lubs
    }

    /// Sorted copy, for deterministic downstream iteration.
    pub fn sorted_lubs(&self) -> Vec<ObjectivePoint> {
        let mut v = self.lubs.clone();
        v.sort();
        v
    }

    /// Update after inserting a feasible image `z` into the incumbent set.
    pub fn update_with_point(&mut self, z: &ObjectivePoint) -> Result<(), LubError> {
        if z.dim() != self.bounding_box.dim()
            || z.values()
                .iter()
                .zip(self.bounding_box.values())
                .any(|(v, m)| v > m)
        {
            return Err(LubError::OutsideBox {
                point: z.clone(),
                bound: self.bounding_box.clone(),
            });
        }
        let p = z.dim();
        let (removed, mut survivors): (Vec<ObjectivePoint>, Vec<ObjectivePoint>) = self
            .lubs
            .drain(..)
            .partition(|u| geometry::strictly_dominates(z, u));

        let mut candidates: Vec<ObjectivePoint> = Vec::with_capacity(removed.len() * p);
        for u in &removed {
            for k in 0..p {
                let mut v = u.values().to_vec();
                v[k] = z.values()[k];
                candidates.push(ObjectivePoint::new(v));
            }
        }
        // drop candidates whose cone is contained in a survivor's or another
        // candidate's cone
        candidates.sort();
        candidates.dedup();
        let keep: Vec<ObjectivePoint> = candidates
            .iter()
            .filter(|c| {
                !survivors.iter().any(|s| geometry::weakly_dominates(c, s))
                    && !candidates
                        .iter()
                        .any(|other| *other != **c && geometry::weakly_dominates(c, other))
            })
            .cloned()
            .collect();
        survivors.extend(keep);
        self.lubs = survivors;
        Ok(())
    }
}

/// Shift a local upper bound for integer-valued objectives: every component
/// decremented by one, so `z <= shifted(u)` is exactly `z` strictly inside
/// the cone of `u`.
pub fn shift_for_integer(u: &ObjectivePoint) -> ObjectivePoint {
    ObjectivePoint::new(u.values().iter().map(|v| v - 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid_lubs;

    fn pt(v: &[i64]) -> ObjectivePoint {
        ObjectivePoint::new(v.to_vec())
    }

    #[test]
    fn init_examples() {
        assert_eq!(
            LocalUpperBoundSet::init(pt(&[10, 10])).sorted_lubs(),
            vec![pt(&[10, 10])]
        );
        assert_eq!(
            LocalUpperBoundSet::init(pt(&[7, 8, 9])).sorted_lubs(),
            vec![pt(&[7, 8, 9])]
        );
        assert_eq!(
            LocalUpperBoundSet::init(pt(&[5, 5, 5, 5])).sorted_lubs(),
            vec![pt(&[5, 5, 5, 5])]
        );
    }

    #[test]
    fn update_examples_match_grid_oracle() {
        let mut set = LocalUpperBoundSet::init(pt(&[10, 10]));
        set.update_with_point(&pt(&[3, 4])).unwrap();
        let expected = grid_lubs(&[pt(&[3, 4])], &pt(&[10, 10])).unwrap();
        assert_eq!(set.sorted_lubs(), expected);
        assert_eq!(set.sorted_lubs(), vec![pt(&[3, 10]), pt(&[10, 4])]);

        let mut set = LocalUpperBoundSet::init(pt(&[7, 8, 9]));
        set.update_with_point(&pt(&[3, 4, 5])).unwrap();
        assert_eq!(
            set.sorted_lubs(),
            vec![pt(&[3, 8, 9]), pt(&[7, 4, 9]), pt(&[7, 8, 5])]
        );

        // inserting a point already weakly dominated leaves the set unchanged
        let mut set = LocalUpperBoundSet::init(pt(&[10, 10]));
        set.update_with_point(&pt(&[3, 4])).unwrap();
        set.update_with_point(&pt(&[5, 5])).unwrap();
        let expected = grid_lubs(&[pt(&[3, 4]), pt(&[5, 5])], &pt(&[10, 10])).unwrap();
        assert_eq!(set.sorted_lubs(), expected);
        assert_eq!(set.sorted_lubs(), vec![pt(&[3, 10]), pt(&[10, 4])]);
    }

    #[test]
    fn shared_coordinate_update() {
        // z shares a coordinate with a bound: that bound must survive
        let mut set = LocalUpperBoundSet::init(pt(&[10, 10]));
        set.update_with_point(&pt(&[4, 3])).unwrap();
        assert_eq!(set.sorted_lubs(), vec![pt(&[4, 10]), pt(&[10, 3])]);
        set.update_with_point(&pt(&[2, 3])).unwrap();
        let expected = grid_lubs(&[pt(&[4, 3]), pt(&[2, 3])], &pt(&[10, 10])).unwrap();
        assert_eq!(set.sorted_lubs(), expected);
        assert_eq!(set.sorted_lubs(), vec![pt(&[2, 10]), pt(&[10, 3])]);
    }

    #[test]
    fn outside_box_rejected() {
        let mut set = LocalUpperBoundSet::init(pt(&[5, 5]));
        assert!(set.update_with_point(&pt(&[6, 0])).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_for_integer(&pt(&[3, 10])), pt(&[2, 9]));
        assert_eq!(shift_for_integer(&pt(&[10, 4])), pt(&[9, 3]));
        assert_eq!(shift_for_integer(&pt(&[5, 5, 5])), pt(&[4, 4, 4]));
    }

    #[test]
    fn minimality_after_updates() {
        let mut set = LocalUpperBoundSet::init(pt(&[12, 12, 12]));
        for z in [
            pt(&[3, 7, 9]),
            pt(&[5, 5, 5]),
            pt(&[9, 2, 8]),
            pt(&[1, 11, 4]),
            pt(&[6, 6, 2]),
        ] {
            set.update_with_point(&z).unwrap();
            for a in set.lubs() {
                for b in set.lubs() {
                    if a != b {
                        assert!(
                            !geometry::weakly_dominates(a, b),
                            "minimality violated: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }
}
