//! Dominance comparisons, Pareto filtering, and ideal/nadir computation over
//! points in objective space.
//!
//! All objective values are exact integers. Contexts that need an "unbounded"
//! component (local upper bounds) realize it as a finite per-instance bounding
//! value, so no floating-point sentinel is ever stored.

use serde::{Deserialize, Serialize};

/// A point in objective space: one exact integer value per objective.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectivePoint(pub Vec<i64>);

impl ObjectivePoint {
    pub fn new(values: Vec<i64>) -> Self {
        ObjectivePoint(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise minimum of two points.
    pub fn componentwise_min(&self, other: &ObjectivePoint) -> ObjectivePoint {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        ObjectivePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    /// Componentwise maximum of two points.
    pub fn componentwise_max(&self, other: &ObjectivePoint) -> ObjectivePoint {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        ObjectivePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }
}

impl std::fmt::Display for ObjectivePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `a` weakly dominates `b`: a_k <= b_k for all k.
pub fn weakly_dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    a.0.iter().zip(&b.0).all(|(x, y)| x <= y)
}

/// `a` dominates `b`: weakly dominates and differs in at least one component.
pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    weakly_dominates(a, b) && a != b
}

/// `a` strictly dominates `b`: a_k < b_k in every component.
pub fn strictly_dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    a.0.iter().zip(&b.0).all(|(x, y)| x < y)
}

/// Keep exactly the points not dominated by any other input point.
/// Duplicates collapse to one representative.
pub fn pareto_filter(points: &[ObjectivePoint]) -> Vec<ObjectivePoint> {
    let mut kept: Vec<ObjectivePoint> = Vec::new();
    for p in points {
        if kept.iter().any(|q| weakly_dominates(q, p)) {
            continue;
        }
        kept.retain(|q| !dominates(p, q));
        kept.push(p.clone());
    }
    kept
}

/// Componentwise minimum over a nonempty set of points.
pub fn ideal_point(points: &[ObjectivePoint]) -> ObjectivePoint {
    assert!(!points.is_empty(), "ideal_point of empty set");
    points
        .iter()
        .skip(1)
        .fold(points[0].clone(), |acc, p| acc.componentwise_min(p))
}

/// Componentwise maximum over a nonempty set of points.
pub fn nadir_point(points: &[ObjectivePoint]) -> ObjectivePoint {
    assert!(!points.is_empty(), "nadir_point of empty set");
    points
        .iter()
        .skip(1)
        .fold(points[0].clone(), |acc, p| acc.componentwise_max(p))
}
