//! The incumbent set of mutually nondominated feasible points with their
//! binary pre-images.

use crate::geometry::{self, ObjectivePoint};
use crate::instance::MoilpInstance;
use serde::{Deserialize, Serialize};

/// A feasible solution: exact image plus the binary pre-image it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleSolution {
    pub image: ObjectivePoint,
    pub preimage: Vec<u8>,
}

/// Outcome of an insertion attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeReport {
    pub accepted: bool,
    pub removed: Vec<ObjectivePoint>,
}

/// Incumbent set. Flat storage with linear-scan dominance checks; one
/// pre-image is kept per nondominated image.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct UpperBoundSet {
    solutions: Vec<FeasibleSolution>,
}

impl UpperBoundSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn solutions(&self) -> &[FeasibleSolution] {
        &self.solutions
    }

    pub fn images(&self) -> Vec<ObjectivePoint> {
        self.solutions.iter().map(|s| s.image.clone()).collect()
    }

    /// True iff some incumbent image weakly dominates `point`.
    pub fn weakly_dominated(&self, point: &ObjectivePoint) -> bool {
        self.solutions
            .iter()
            .any(|s| geometry::weakly_dominates(&s.image, point))
    }

    /// Accepts iff no existing image weakly dominates the candidate; on
    /// acceptance, removes (and reports) every image the candidate dominates.
    pub fn insert(&mut self, sol: FeasibleSolution) -> ChangeReport {
        if self.weakly_dominated(&sol.image) {
            return ChangeReport { accepted: false, removed: Vec::new() };
        }
        let mut removed = Vec::new();
        self.solutions.retain(|s| {
            if geometry::dominates(&sol.image, &s.image) {
                removed.push(s.image.clone());
                false
            } else {
                true
            }
        });
        self.solutions.push(sol);
        ChangeReport { accepted: true, removed }
    }

    /// Rows sorted lexicographically by sign-restored objective vector:
    /// p objective columns then n binary columns.
    pub fn report_rows(&self, inst: &MoilpInstance) -> Vec<(Vec<i64>, Vec<u8>)> {
        let mut rows: Vec<(Vec<i64>, Vec<u8>)> = self
            .solutions
            .iter()
            .map(|s| (inst.restore_signs(&s.image), s.preimage.clone()))
            .collect();
        rows.sort();
        rows
    }

    /// CSV serialization: one row per point, objective values then variables.
    pub fn to_csv(&self, inst: &MoilpInstance) -> String {
        let mut out = String::new();
        for k in 0..inst.num_objectives {
            out.push_str(&format!("z{}{}", k + 1, ","));
        }
        for i in 0..inst.num_vars {
            out.push_str(&format!("x{}", i + 1));
            if i + 1 < inst.num_vars {
                out.push(',');
            }
        }
        out.push('\n');
        for (obj, x) in self.report_rows(inst) {
            let mut fields: Vec<String> = obj.iter().map(|v| v.to_string()).collect();
            fields.extend(x.iter().map(|v| v.to_string()));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON serialization of the sorted front.
    pub fn to_json(&self, inst: &MoilpInstance) -> String {
        #[derive(Serialize)]
        struct JsonPoint {
            objectives: Vec<i64>,
            variables: Vec<u8>,
        }
        let rows: Vec<JsonPoint> = self
            .report_rows(inst)
            .into_iter()
            .map(|(objectives, variables)| JsonPoint { objectives, variables })
            .collect();
        serde_json::to_string_pretty(&rows).expect("front serialization cannot fail")
    }
}
