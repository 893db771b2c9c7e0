//! Instance model, the generic text format, and builders/generators for the
//! knapsack and facility-location problem classes.
//!
//! All internal logic is pure minimization: maximization objectives are
//! negated at construction and flagged so reported values can be restored.

use crate::geometry::ObjectivePoint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constraint row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    fn token(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        }
    }
}

/// One linear constraint row over the binary variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub coeffs: Vec<i64>,
    pub sense: RowSense,
    pub rhs: i64,
}

/// A multi-objective 0-1 integer linear program in minimization form.
///
/// `maximize[k]` records that objective k was negated at ingest; reports
/// restore the sign. `labels[i]` optionally tags variable roles (the CFLP
/// branching rule consumes the "facility" tag).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoilpInstance {
    pub num_objectives: usize,
    pub num_vars: usize,
    pub objectives: Vec<Vec<i64>>,
    pub maximize: Vec<bool>,
    pub rows: Vec<ConstraintRow>,
    pub labels: Vec<Option<String>>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl MoilpInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.num_objectives < 2 {
            return Err(InstanceError::Invalid("need at least 2 objectives".into()));
        }
        if self.num_vars == 0 {
            return Err(InstanceError::Invalid("need at least 1 variable".into()));
        }
        if self.objectives.len() != self.num_objectives
            || self.maximize.len() != self.num_objectives
        {
            return Err(InstanceError::Invalid("objective count mismatch".into()));
        }
        for c in &self.objectives {
            if c.len() != self.num_vars {
                return Err(InstanceError::Invalid("objective length mismatch".into()));
            }
        }
        for r in &self.rows {
            if r.coeffs.len() != self.num_vars {
                return Err(InstanceError::Invalid("row length mismatch".into()));
            }
        }
        if self.labels.len() != self.num_vars {
            return Err(InstanceError::Invalid("label vector length mismatch".into()));
        }
        Ok(())
    }

    /// Image of a binary vector under the (minimization-form) objectives.
    pub fn image(&self, x: &[u8]) -> ObjectivePoint {
        assert_eq!(x.len(), self.num_vars);
        ObjectivePoint::new(
            self.objectives
                .iter()
                .map(|c| c.iter().zip(x).map(|(ci, xi)| ci * *xi as i64).sum())
                .collect(),
        )
    }

    /// Exact feasibility of a binary vector against every row.
    pub fn is_feasible(&self, x: &[u8]) -> bool {
        assert_eq!(x.len(), self.num_vars);
        self.rows.iter().all(|r| {
            let lhs: i64 = r.coeffs.iter().zip(x).map(|(a, xi)| a * *xi as i64).sum();
            match r.sense {
                RowSense::Le => lhs <= r.rhs,
                RowSense::Ge => lhs >= r.rhs,
                RowSense::Eq => lhs == r.rhs,
            }
        })
    }

    /// Per-objective bounding values M_k = 1 + sum of positive coefficients.
    /// Strictly exceeds any attainable objective value.
    pub fn objective_box(&self) -> ObjectivePoint {
        ObjectivePoint::new(
            self.objectives
                .iter()
                .map(|c| 1 + c.iter().map(|v| (*v).max(0)).sum::<i64>())
                .collect(),
        )
    }

    /// Restore reporting sign on a minimization-form image.
    pub fn restore_signs(&self, image: &ObjectivePoint) -> Vec<i64> {
        image
            .values()
            .iter()
            .zip(&self.maximize)
            .map(|(v, m)| if *m { -v } else { *v })
            .collect()
    }

    /// Variable indices tagged "facility".
    pub fn facility_vars(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_deref() == Some("facility"))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Multi-objective knapsack: one capacity row, `p` value objectives.
///
/// `values[k][i]` is the utility of item i in objective k; utilities are
/// maximized, so they are stored negated with the restore flag set.
pub fn build_kp(
    weights: &[i64],
    capacity: i64,
    values: &[Vec<i64>],
) -> Result<MoilpInstance, InstanceError> {
    if weights.iter().any(|w| *w <= 0) {
        return Err(InstanceError::Invalid("knapsack weights must be positive".into()));
    }
    if capacity <= 0 {
        return Err(InstanceError::Invalid("knapsack capacity must be positive".into()));
    }
    let n = weights.len();
    let p = values.len();
    let inst = MoilpInstance {
        num_objectives: p,
        num_vars: n,
        objectives: values
            .iter()
            .map(|row| row.iter().map(|v| -v).collect())
            .collect(),
        maximize: vec![true; p],
        rows: vec![ConstraintRow {
            coeffs: weights.to_vec(),
            sense: RowSense::Le,
            rhs: capacity,
        }],
        labels: vec![None; n],
    };
    inst.validate()?;
    Ok(inst)
}

/// Uncapacitated facility location: `l` locations, `r` customers.
///
/// Variables are y_1..y_l (facility, tagged) then x_11..x_rl (customer-major).
/// `assign_costs[k][i][j]`, `open_costs[k][j]`; all objectives minimized.
pub fn build_uflp(
    num_locations: usize,
    num_customers: usize,
    assign_costs: &[Vec<Vec<i64>>],
    open_costs: &[Vec<i64>],
) -> Result<MoilpInstance, InstanceError> {
    let (l, r) = (num_locations, num_customers);
    let p = assign_costs.len();
    let n = l + r * l;
    let xvar = |i: usize, j: usize| l + i * l + j;

    let mut objectives = Vec::with_capacity(p);
    for k in 0..p {
        let mut c = vec![0i64; n];
        for (j, cj) in c.iter_mut().enumerate().take(l) {
            *cj = open_costs[k][j];
        }
        for i in 0..r {
            for j in 0..l {
                c[xvar(i, j)] = assign_costs[k][i][j];
            }
        }
        objectives.push(c);
    }

    let mut rows = Vec::new();
    for i in 0..r {
        let mut coeffs = vec![0i64; n];
        for j in 0..l {
            coeffs[xvar(i, j)] = 1;
        }
        rows.push(ConstraintRow { coeffs, sense: RowSense::Eq, rhs: 1 });
    }
    for i in 0..r {
        for j in 0..l {
            let mut coeffs = vec![0i64; n];
            coeffs[xvar(i, j)] = 1;
            coeffs[j] = -1;
            rows.push(ConstraintRow { coeffs, sense: RowSense::Le, rhs: 0 });
        }
    }

    let mut labels = vec![None; n];
    for label in labels.iter_mut().take(l) {
        *label = Some("facility".to_string());
    }

    let inst = MoilpInstance {
        num_objectives: p,
        num_vars: n,
        objectives,
        maximize: vec![false; p],
        rows,
        labels,
    };
    inst.validate()?;
    Ok(inst)
}

/// Capacitated facility location with optional customers.
///
/// Variables: y_1..y_l (facility), x_11..x_rl, z_1..z_r. Objectives:
/// assignment cost (min), opening cost (min), demand served (max, negated).
pub fn build_cflp(
    num_locations: usize,
    num_customers: usize,
    assign_costs: &[Vec<i64>],
    open_costs: &[i64],
    demands: &[i64],
    capacities: &[i64],
) -> Result<MoilpInstance, InstanceError> {
    let (l, r) = (num_locations, num_customers);
    if demands.iter().any(|d| *d <= 0) || capacities.iter().any(|t| *t < 0) {
        return Err(InstanceError::Invalid(
            "demands must be positive and capacities nonnegative".into(),
        ));
    }
    let n = l + r * l + r;
    let xvar = |i: usize, j: usize| l + i * l + j;
    let zvar = |i: usize| l + r * l + i;

    let mut obj_assign = vec![0i64; n];
    let mut obj_open = vec![0i64; n];
    let mut obj_demand = vec![0i64; n];
    for i in 0..r {
        for j in 0..l {
            obj_assign[xvar(i, j)] = assign_costs[i][j];
        }
    }
    for j in 0..l {
        obj_open[j] = open_costs[j];
    }
    for i in 0..r {
        obj_demand[zvar(i)] = -demands[i];
    }

    let mut rows = Vec::new();
    for i in 0..r {
        let mut coeffs = vec![0i64; n];
        for j in 0..l {
            coeffs[xvar(i, j)] = 1;
        }
        coeffs[zvar(i)] = -1;
        rows.push(ConstraintRow { coeffs, sense: RowSense::Eq, rhs: 0 });
    }
    for i in 0..r {
        for j in 0..l {
            let mut coeffs = vec![0i64; n];
            coeffs[xvar(i, j)] = 1;
            coeffs[j] = -1;
            rows.push(ConstraintRow { coeffs, sense: RowSense::Le, rhs: 0 });
        }
    }
    for j in 0..l {
        let mut coeffs = vec![0i64; n];
        for i in 0..r {
            coeffs[xvar(i, j)] = demands[i];
        }
        coeffs[j] = -capacities[j];
        rows.push(ConstraintRow { coeffs, sense: RowSense::Le, rhs: 0 });
    }

    let mut labels = vec![None; n];
    for label in labels.iter_mut().take(l) {
        *label = Some("facility".to_string());
    }

    let inst = MoilpInstance {
        num_objectives: 3,
        num_vars: n,
        objectives: vec![obj_assign, obj_open, obj_demand],
        maximize: vec![false, false, true],
        rows,
        labels,
    };
    inst.validate()?;
    Ok(inst)
}

/// Write the generic text format:
/// line 1 `p n m`; p objective lines `min|max c_1 .. c_n` (max rows carry the
/// original, un-negated coefficients); m rows `<sense> <rhs> a_1 .. a_n`;
/// optional `tags idx:label ...` line; `#` starts a comment.
pub fn write_generic(inst: &MoilpInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {}\n",
        inst.num_objectives, inst.num_vars, inst.rows.len()
    ));
    for (k, c) in inst.objectives.iter().enumerate() {
        let word = if inst.maximize[k] { "max" } else { "min" };
        out.push_str(word);
        for v in c {
            let shown = if inst.maximize[k] { -v } else { *v };
            out.push_str(&format!(" {shown}"));
        }
        out.push('\n');
    }
    for r in &inst.rows {
        out.push_str(&format!("{} {}", r.sense.token(), r.rhs));
        for a in &r.coeffs {
            out.push_str(&format!(" {a}"));
        }
        out.push('\n');
    }
    if inst.labels.iter().any(|l| l.is_some()) {
        out.push_str("tags");
        for (i, l) in inst.labels.iter().enumerate() {
            if let Some(tag) = l {
                out.push_str(&format!(" {i}:{tag}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Parse the generic text format. `parse_generic(write_generic(i)) == i`.
pub fn parse_generic(text: &str) -> Result<MoilpInstance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or(InstanceError::Parse { line: 1, message: "missing header line".into() })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(InstanceError::Parse {
            line: hline,
            message: "header must be `p n m`".into(),
        });
    }
    let parse_count = |s: &str, what: &str, line: usize| -> Result<usize, InstanceError> {
        s.parse::<usize>().map_err(|_| InstanceError::Parse {
            line,
            message: format!("non-integer {what} `{s}`"),
        })
    };
    let p = parse_count(head[0], "objective count", hline)?;
    let n = parse_count(head[1], "variable count", hline)?;
    let m = parse_count(head[2], "row count", hline)?;

    let parse_ints = |tokens: &[&str], line: usize| -> Result<Vec<i64>, InstanceError> {
        tokens
            .iter()
            .map(|t| {
                t.parse::<i64>().map_err(|_| InstanceError::Parse {
                    line,
                    message: format!("non-integer token `{t}`"),
                })
            })
            .collect()
    };

    let mut objectives = Vec::with_capacity(p);
    let mut maximize = Vec::with_capacity(p);
    for k in 0..p {
        let (line, text) = lines.next().ok_or(InstanceError::Parse {
            line: hline,
            message: format!("missing objective line {} of {p}", k + 1),
        })?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let is_max = match tokens.first().copied() {
            Some("min") => false,
            Some("max") => true,
            _ => {
                return Err(InstanceError::Parse {
                    line,
                    message: "objective line must start with `min` or `max`".into(),
                })
            }
        };
        let coeffs = parse_ints(&tokens[1..], line)?;
        if coeffs.len() != n {
            return Err(InstanceError::Parse {
                line,
                message: format!("expected {n} objective coefficients, got {}", coeffs.len()),
            });
        }
        objectives.push(if is_max { coeffs.iter().map(|v| -v).collect() } else { coeffs });
        maximize.push(is_max);
    }

    let mut rows = Vec::with_capacity(m);
    for idx in 0..m {
        let (line, text) = lines.next().ok_or(InstanceError::Parse {
            line: hline,
            message: format!("missing constraint row {} of {m}", idx + 1),
        })?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let sense = match tokens.first().copied() {
            Some("<=") => RowSense::Le,
            Some(">=") => RowSense::Ge,
            Some("=") => RowSense::Eq,
            other => {
                return Err(InstanceError::Parse {
                    line,
                    message: format!("unknown row sense `{}`", other.unwrap_or("")),
                })
            }
        };
        if tokens.len() < 2 {
            return Err(InstanceError::Parse { line, message: "row missing rhs".into() });
        }
        let rhs = parse_ints(&tokens[1..2], line)?[0];
        let coeffs = parse_ints(&tokens[2..], line)?;
        if coeffs.len() != n {
            return Err(InstanceError::Parse {
                line,
                message: format!("expected {n} row coefficients, got {}", coeffs.len()),
            });
        }
        rows.push(ConstraintRow { coeffs, sense, rhs });
    }

    let mut labels = vec![None; n];
    if let Some((line, text)) = lines.next() {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.first().copied() != Some("tags") {
            return Err(InstanceError::Parse {
                line,
                message: format!("unexpected trailing line `{text}`"),
            });
        }
        for t in &tokens[1..] {
            let (idx, tag) = t.split_once(':').ok_or(InstanceError::Parse {
                line,
                message: format!("tag entry `{t}` must be `index:label`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| InstanceError::Parse {
                line,
                message: format!("non-integer tag index `{idx}`"),
            })?;
            if idx >= n {
                return Err(InstanceError::Parse {
                    line,
                    message: format!("tag index {idx} out of range (n = {n})"),
                });
            }
            labels[idx] = Some(tag.to_string());
        }
    }

    let inst = MoilpInstance { num_objectives: p, num_vars: n, objectives, maximize, rows, labels };
    inst.validate()?;
    Ok(inst)
}

/// Supported random-instance classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemClass {
    Kp,
    Uflp,
    Cflp,
}

impl std::str::FromStr for ProblemClass {
    type Err = InstanceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kp" => Ok(ProblemClass::Kp),
            "uflp" => Ok(ProblemClass::Uflp),
            "cflp" => Ok(ProblemClass::Cflp),
            other => Err(InstanceError::Invalid(format!("unsupported class `{other}`"))),
        }
    }
}

/// Size descriptor for the generators: KP takes a variable count, the
/// facility problems take (locations, customers).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassSize {
    Vars(usize),
    Facility { locations: usize, customers: usize },
}

/// Deterministic random instance per (class, p, size, seed).
pub fn generate_random(
    class: ProblemClass,
    p: usize,
    size: ClassSize,
    seed: u64,
) -> Result<MoilpInstance, InstanceError> {
    let tag = match class {
        ProblemClass::Kp => 1u64,
        ProblemClass::Uflp => 2,
        ProblemClass::Cflp => 3,
    };
    let (s1, s2) = match size {
        ClassSize::Vars(n) => (n as u64, 0),
        ClassSize::Facility { locations, customers } => (locations as u64, customers as u64),
    };
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (tag << 56) ^ ((p as u64) << 48) ^ (s1 << 32) ^ (s2 << 16));

    match class {
        ProblemClass::Kp => {
            let n = match size {
                ClassSize::Vars(n) => n,
                _ => return Err(InstanceError::Invalid("KP size must be a variable count".into())),
            };
            let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(10..=100)).collect();
            let values: Vec<Vec<i64>> = (0..p)
                .map(|_| (0..n).map(|_| rng.gen_range(10..=100)).collect())
                .collect();
            let total: i64 = weights.iter().sum();
            let capacity = (total + 1) / 2;
            build_kp(&weights, capacity, &values)
        }
        ProblemClass::Uflp => {
            let (l, r) = match size {
                ClassSize::Facility { locations, customers } => (locations, customers),
                _ => return Err(InstanceError::Invalid("UFLP size must be (l, r)".into())),
            };
            let assign: Vec<Vec<Vec<i64>>> = (0..p)
                .map(|_| {
                    (0..r)
                        .map(|_| (0..l).map(|_| rng.gen_range(1..=100)).collect())
                        .collect()
                })
                .collect();
            let open: Vec<Vec<i64>> = (0..p)
                .map(|_| (0..l).map(|_| rng.gen_range(1..=100)).collect())
                .collect();
            build_uflp(l, r, &assign, &open)
        }
        ProblemClass::Cflp => {
            let (l, r) = match size {
                ClassSize::Facility { locations, customers } => (locations, customers),
                _ => return Err(InstanceError::Invalid("CFLP size must be (l, r)".into())),
            };
            let assign: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..l).map(|_| rng.gen_range(1..=100)).collect())
                .collect();
            let open: Vec<i64> = (0..l).map(|_| rng.gen_range(1..=100)).collect();
            let demands: Vec<i64> = (0..r).map(|_| rng.gen_range(5..=20)).collect();
            let total: i64 = demands.iter().sum();
            // ~60% of total demand servable across all facilities
            let per = (total * 6 / 10 + l as i64 - 1) / l as i64;
            let capacities = vec![per.max(1); l];
            build_cflp(l, r, &assign, &open, &demands, &capacities)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kp_tiny_feasible_sets() {
        let inst = build_kp(&[2], 1, &[vec![5], vec![7]]).unwrap();
        assert!(inst.is_feasible(&[0]));
        assert!(!inst.is_feasible(&[1]));

        let inst = build_kp(&[2, 3], 4, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert!(inst.is_feasible(&[0, 0]));
        assert!(inst.is_feasible(&[1, 0]));
        assert!(inst.is_feasible(&[0, 1]));
        assert!(!inst.is_feasible(&[1, 1]));
    }

    #[test]
    fn kp_rejects_bad_weights() {
        assert!(build_kp(&[0], 1, &[vec![1], vec![1]]).is_err());
        assert!(build_kp(&[2], 0, &[vec![1], vec![1]]).is_err());
    }

    #[test]
    fn uflp_single_location() {
        // l=1: every customer goes to facility 1 when open.
        let assign = vec![vec![vec![3], vec![4]], vec![vec![1], vec![2]]];
        let open = vec![vec![10], vec![20]];
        let inst = build_uflp(1, 2, &assign, &open).unwrap();
        assert_eq!(inst.num_vars, 1 + 2);
        let x = [1u8, 1, 1]; // y_1, x_11, x_21
        assert!(inst.is_feasible(&x));
        assert_eq!(inst.image(&x).values(), &[3 + 4 + 10, 1 + 2 + 20]);
        assert_eq!(inst.facility_vars(), vec![0]);
    }

    #[test]
    fn uflp_var_count() {
        let p = 3;
        let (l, r) = (2, 3);
        let assign: Vec<Vec<Vec<i64>>> = vec![vec![vec![1; l]; r]; p];
        let open: Vec<Vec<i64>> = vec![vec![1; l]; p];
        let inst = build_uflp(l, r, &assign, &open).unwrap();
        assert_eq!(inst.num_vars, l + r * l);
    }

    #[test]
    fn cflp_sign_restoration_and_zero_capacity() {
        let inst = build_cflp(1, 2, &[vec![5], vec![6]], &[9], &[7, 8], &[0]).unwrap();
        // all-closed solution is feasible
        let x = vec![0u8; inst.num_vars];
        assert!(inst.is_feasible(&x));
        // capacities 0: serving any customer is infeasible
        let mut served = vec![0u8; inst.num_vars];
        served[0] = 1; // open y_1
        served[1] = 1; // x_11
        served[3] = 1; // z_1
        assert!(!inst.is_feasible(&served));
        // objective 3 reports as a (positive) maximum
        let mut img = inst.image(&x);
        assert_eq!(inst.restore_signs(&img), vec![0, 0, 0]);
        img = ObjectivePoint::new(vec![5, 9, -7]);
        assert_eq!(inst.restore_signs(&img), vec![5, 9, 7]);
    }

    #[test]
    fn parse_minimal_and_errors() {
        let text = "2 1 1\nmin 3\nmax 4\n<= 5 2\n";
        let inst = parse_generic(text).unwrap();
        assert_eq!(inst.num_vars, 1);
        assert_eq!(inst.objectives[1], vec![-4]);
        assert!(inst.maximize[1]);

        let err = parse_generic("2 1 1\nmin 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("objective line"), "{msg}");

        let err = parse_generic("2 1 1\nmin 3\nmax 4\n<= 5 x\n").unwrap_err();
        assert!(err.to_string().contains("non-integer"), "{err}");

        let err = parse_generic("2 1 1\nmin 3\nmax 4\n<= 5 2\ntags 9:facility\n").unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn generator_determinism_and_capacity_rule() {
        let a = generate_random(ProblemClass::Kp, 3, ClassSize::Vars(10), 1).unwrap();
        let b = generate_random(ProblemClass::Kp, 3, ClassSize::Vars(10), 1).unwrap();
        assert_eq!(a, b);
        let c = generate_random(ProblemClass::Kp, 3, ClassSize::Vars(10), 2).unwrap();
        assert_ne!(a, c);

        let w: i64 = a.rows[0].coeffs.iter().sum();
        assert_eq!(a.rows[0].rhs, (w + 1) / 2);
    }

    #[test]
    fn generator_distinct_across_seeds() {
        for cls in [ProblemClass::Uflp, ProblemClass::Cflp] {
            let size = ClassSize::Facility { locations: 2, customers: 3 };
            for s in 0..10u64 {
                let a = generate_random(cls, 3, size, s).unwrap();
                let b = generate_random(cls, 3, size, s + 1).unwrap();
                assert_ne!(a, b, "seeds {s} and {} collide", s + 1);
            }
        }
    }
}
