//! Linear-relaxation lower bound sets via a Benson-type outer approximation:
//! extreme points with pre-images plus the facet description of L + R^p_>=.
//!
//! The outer polyhedron starts from the per-objective minima and the
//! per-objective bounding values, both obtained from single-objective solves.
//! Unverified vertices are checked with the uniform-slack program
//! `min t : Cx <= v + t e`; a vertex within tolerance is confirmed (its
//! optimal pre-image recorded), otherwise the dual multipliers of the
//! objective rows yield a supporting hyperplane that cuts the vertex off.
//! Vertices are maintained by incremental halfspace clipping, with edges
//! recognized through rank-(p-1) shared active sets.

use crate::cuts::CoverCut;
use crate::geometry::ObjectivePoint;
use crate::instance::{MoilpInstance, RowSense};
use crate::lp::{self, LinearProgram, LpRow, LpSense, LpStatus};
use thiserror::Error;

pub const BENSON_TOL: f64 = 1e-6;
pub const COVER_TOL: f64 = 1e-6;
const GEOM_TOL: f64 = 1e-9;
const ACTIVE_TOL: f64 = 1e-7;
const MAX_FACETS: usize = 4000;

#[derive(Debug, Error)]
pub enum LbsError {
    #[error(transparent)]
    Lp(#[from] lp::LpError),
    #[error("outer approximation failed to converge within {0} facets")]
    NoConvergence(usize),
}

/// The LP relaxation of one search node: instance rows, variable fixings as
/// collapsed bounds, objective-branching rows, and inherited cover cuts.
#[derive(Debug, Clone)]
pub struct NodeRelaxation {
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
    /// Set when the fixings themselves are contradictory.
    pub contradictory: bool,
}

impl NodeRelaxation {
    /// Assemble the node relaxation. SLUB rows are added only for components
    /// strictly below the objective box (box-valued components are vacuous).
    pub fn new(
        inst: &MoilpInstance,
        fixed: &[Option<u8>],
        slub: &ObjectivePoint,
        objective_box: &ObjectivePoint,
        cuts: &[CoverCut],
    ) -> Self {
        let n = inst.num_vars;
        let mut rows: Vec<LpRow> = inst
            .rows
            .iter()
            .map(|r| LpRow {
                coeffs: r.coeffs.iter().map(|v| *v as f64).collect(),
                sense: match r.sense {
                    RowSense::Le => LpSense::Le,
                    RowSense::Ge => LpSense::Ge,
                    RowSense::Eq => LpSense::Eq,
                },
                rhs: r.rhs as f64,
            })
            .collect();
        for k in 0..inst.num_objectives {
            let s = slub.values()[k];
            if s < objective_box.values()[k] {
                rows.push(LpRow {
                    coeffs: inst.objectives[k].iter().map(|v| *v as f64).collect(),
                    sense: LpSense::Le,
                    rhs: s as f64,
                });
            }
        }
        for cut in cuts {
            let mut coeffs = vec![0.0; n];
            for &j in &cut.indices {
                coeffs[j] = 1.0;
            }
            rows.push(LpRow { coeffs, sense: LpSense::Le, rhs: cut.rhs as f64 });
        }
        let bounds: Vec<(f64, f64)> = fixed
            .iter()
            .map(|f| match f {
                None => (0.0, 1.0),
                Some(0) => (0.0, 0.0),
                Some(_) => (1.0, 1.0),
            })
            .collect();
        NodeRelaxation { rows, bounds, contradictory: false }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    /// LP over this relaxation with the given objective.
    pub fn lp_with_objective(&self, objective: Vec<f64>) -> LinearProgram {
        LinearProgram { objective, rows: self.rows.clone(), bounds: self.bounds.clone() }
    }

    /// Same, with one extra variable fixing layered on top.
    pub fn lp_with_fixing(&self, objective: Vec<f64>, var: usize, value: u8) -> LinearProgram {
        let mut lp = self.lp_with_objective(objective);
        lp.bounds[var] = (value as f64, value as f64);
        lp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbsStatus {
    Infeasible,
    Singleton,
    General,
}

/// An extreme point of the relaxation frontier with its LP pre-image.
#[derive(Debug, Clone)]
pub struct ExtremePoint {
    pub image: Vec<f64>,
    pub preimage: Vec<f64>,
}

/// One inequality `normal . y >= rhs` of the L + R^p_>= description; normals
/// are componentwise nonnegative.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LowerBoundSet {
    pub status: LbsStatus,
    pub extreme_points: Vec<ExtremePoint>,
    pub facets: Vec<Facet>,
    /// Single-objective LPs solved while computing this set.
    pub lp_count: usize,
}

impl LowerBoundSet {
    fn infeasible(lp_count: usize) -> Self {
        LowerBoundSet {
            status: LbsStatus::Infeasible,
            extreme_points: Vec::new(),
            facets: Vec::new(),
            lp_count,
        }
    }

    /// True iff `u` satisfies every facet inequality within tolerance, i.e.
    /// `u` lies in the polyhedron L + R^p_>=.
    pub fn covers(&self, u: &ObjectivePoint) -> bool {
        debug_assert!(self.status != LbsStatus::Infeasible);
        self.covers_f64(&u.values().iter().map(|v| *v as f64).collect::<Vec<_>>())
    }

    pub fn covers_f64(&self, y: &[f64]) -> bool {
        self.facets.iter().all(|f| {
            let lhs: f64 = f.normal.iter().zip(y).map(|(w, v)| w * v).sum();
            lhs >= f.rhs - COVER_TOL
        })
    }

    /// Extreme point minimizing `weights . image`, with that value.
    pub fn min_weighted_sum(&self, weights: &[f64]) -> (&ExtremePoint, f64) {
        assert!(
            self.status != LbsStatus::Infeasible,
            "weighted sum of infeasible bound set"
        );
        let mut best: Option<(&ExtremePoint, f64)> = None;
        for ep in &self.extreme_points {
            let v: f64 = weights.iter().zip(&ep.image).map(|(w, y)| w * y).sum();
            if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                best = Some((ep, v));
            }
        }
        best.expect("non-infeasible bound set has extreme points")
    }
}

struct Halfspace {
    normal: Vec<f64>,
    rhs: f64,
    /// part of the reported facet description (upper box halfspaces are not)
    reported: bool,
}

struct Vertex {
    point: Vec<f64>,
    active: Vec<u32>,
    confirmed: bool,
}

fn eval(h: &Halfspace, y: &[f64]) -> f64 {
    h.normal.iter().zip(y).map(|(w, v)| w * v).sum::<f64>() - h.rhs
}

fn active_set(halfspaces: &[Halfspace], y: &[f64]) -> Vec<u32> {
    halfspaces
        .iter()
        .enumerate()
        .filter(|(_, h)| eval(h, y).abs() <= ACTIVE_TOL * (1.0 + h.rhs.abs()))
        .map(|(i, _)| i as u32)
        .collect()
}

/// Rank of the set of normals indexed by `idx`, via Gaussian elimination.
fn normal_rank(halfspaces: &[Halfspace], idx: &[u32], p: usize) -> usize {
    let mut rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| halfspaces[i as usize].normal.clone())
        .collect();
    let mut rank = 0;
    for col in 0..p {
        let Some(pivot) = (rank..rows.len()).max_by(|&a, &b| {
            rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap()
        }) else {
            break;
        };
        if rows[pivot][col].abs() < GEOM_TOL {
            continue;
        }
        rows.swap(rank, pivot);
        let d = rows[rank][col];
        for c in 0..p {
            rows[rank][c] /= d;
        }
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][col];
                if f != 0.0 {
                    for c in 0..p {
                        rows[r][c] -= f * rows[rank][c];
                    }
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Compute the lower bound set of a node relaxation.
pub fn compute(
    relax: &NodeRelaxation,
    objectives: &[Vec<i64>],
    objective_box: &ObjectivePoint,
) -> Result<LowerBoundSet, LbsError> {
    let p = objectives.len();
    let n = relax.num_vars();
    let mut lp_count = 0usize;

    if relax.contradictory {
        return Ok(LowerBoundSet::infeasible(lp_count));
    }

    // per-objective minima; the first solve decides feasibility
    let mut minima = vec![0.0f64; p];
    for k in 0..p {
        let obj: Vec<f64> = objectives[k].iter().map(|v| *v as f64).collect();
        let sol = lp::solve(&relax.lp_with_objective(obj))?;
        lp_count += 1;
        if sol.status == LpStatus::Infeasible {
            return Ok(LowerBoundSet::infeasible(lp_count));
        }
        minima[k] = sol.objective_value;
    }

    let box_vals: Vec<f64> = objective_box.values().iter().map(|v| *v as f64).collect();
    let mut halfspaces: Vec<Halfspace> = Vec::new();
    for k in 0..p {
        let mut normal = vec![0.0; p];
        normal[k] = 1.0;
        halfspaces.push(Halfspace { normal, rhs: minima[k], reported: true });
    }
    for k in 0..p {
        let mut normal = vec![0.0; p];
        normal[k] = -1.0;
        halfspaces.push(Halfspace { normal, rhs: -box_vals[k], reported: false });
    }

    // initial vertices: the 2^p corners of the [minima, box] product
    let mut vertices: Vec<Vertex> = Vec::new();
    for mask in 0..(1u32 << p) {
        let point: Vec<f64> = (0..p)
            .map(|k| if mask & (1 << k) != 0 { box_vals[k] } else { minima[k] })
            .collect();
        let mut active: Vec<u32> = (0..p)
            .map(|k| if mask & (1 << k) != 0 { (p + k) as u32 } else { k as u32 })
            .collect();
        active.sort_unstable();
        vertices.push(Vertex { point, active, confirmed: false });
    }

    let t_span: f64 = 1.0 + (0..p).map(|k| (box_vals[k] - minima[k]).abs()).sum::<f64>();
    let mut records: Vec<ExtremePoint> = Vec::new();

    loop {
        let Some(vi) = vertices.iter().position(|v| !v.confirmed) else {
            break;
        };
        if halfspaces.len() > MAX_FACETS {
            return Err(LbsError::NoConvergence(MAX_FACETS));
        }

        let vpoint = vertices[vi].point.clone();

        // a vertex weakly above a recorded frontier point cannot be a new
        // extreme point: confirm it without an LP
        if records
            .iter()
            .any(|r| r.image.iter().zip(&vpoint).all(|(y, v)| *y <= v + 1e-9))
        {
            vertices[vi].confirmed = true;
            continue;
        }

        // uniform-slack verification LP: min t, Cx - t e <= v
        let mut lp_rows = relax.rows.clone();
        for row in lp_rows.iter_mut() {
            row.coeffs.push(0.0);
        }
        for k in 0..p {
            let mut coeffs: Vec<f64> = objectives[k].iter().map(|v| *v as f64).collect();
            coeffs.push(-1.0);
            lp_rows.push(LpRow { coeffs, sense: LpSense::Le, rhs: vpoint[k] });
        }
        let mut objective = vec![0.0; n];
        objective.push(1.0);
        let mut bounds = relax.bounds.clone();
        bounds.push((-t_span, t_span));
        let sol = lp::solve(&LinearProgram { objective, rows: lp_rows, bounds })?;
        lp_count += 1;
        debug_assert_eq!(sol.status, LpStatus::Optimal, "slack program cannot be infeasible");

        let t_star = sol.objective_value;
        if t_star <= BENSON_TOL {
            let preimage: Vec<f64> = sol.x[..n].to_vec();
            let image: Vec<f64> = objectives
                .iter()
                .map(|c| c.iter().zip(&preimage).map(|(ci, xi)| *ci as f64 * xi).sum())
                .collect();
            vertices[vi].confirmed = true;
            records.push(ExtremePoint { image, preimage });
            continue;
        }

        // supporting hyperplane from the duals of the objective rows
        let base = relax.rows.len();
        let mut w: Vec<f64> = (0..p).map(|k| (-sol.row_duals[base + k]).max(0.0)).collect();
        let total: f64 = w.iter().sum();
        if total <= 1e-9 {
            // tolerance artifact: no improving direction, accept the vertex
            vertices[vi].confirmed = true;
            continue;
        }
        for wk in w.iter_mut() {
            *wk /= total;
        }
        let beta: f64 =
            w.iter().zip(&vpoint).map(|(wk, vk)| wk * vk).sum::<f64>() + t_star / total;

        let facet = Halfspace { normal: w, rhs: beta, reported: true };
        if eval(&facet, &vpoint) >= -GEOM_TOL {
            // the hyperplane fails to cut its vertex; accept to avoid cycling
            vertices[vi].confirmed = true;
            continue;
        }

        // clip the outer polyhedron by the new halfspace
        let fid = halfspaces.len() as u32;
        halfspaces.push(facet);

        let mut kept: Vec<Vertex> = Vec::new();
        let mut cut: Vec<Vertex> = Vec::new();
        for mut v in vertices.drain(..) {
            let val = eval(&halfspaces[fid as usize], &v.point);
            if val >= -GEOM_TOL {
                if val.abs() <= ACTIVE_TOL * (1.0 + halfspaces[fid as usize].rhs.abs()) {
                    v.active.push(fid);
                    v.active.sort_unstable();
                }
                kept.push(v);
            } else {
                cut.push(v);
            }
        }

        let mut fresh: Vec<Vertex> = Vec::new();
        for kv in &kept {
            for cv in &cut {
                let common = sorted_intersection(&kv.active, &cv.active);
                if common.len() < p - 1 || normal_rank(&halfspaces, &common, p) < p - 1 {
                    continue;
                }
                let fk = eval(&halfspaces[fid as usize], &kv.point);
                let fc = eval(&halfspaces[fid as usize], &cv.point);
                let denom = fk - fc;
                if denom.abs() < GEOM_TOL {
                    continue;
                }
                let t = fk / denom;
                let point: Vec<f64> = kv
                    .point
                    .iter()
                    .zip(&cv.point)
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                if fresh
                    .iter()
                    .chain(kept.iter())
                    .any(|u| linf_close(&u.point, &point))
                {
                    continue;
                }
                let active = active_set(&halfspaces, &point);
                fresh.push(Vertex { point, active, confirmed: false });
            }
        }
        if std::env::var("LBS_DEBUG").is_ok() && halfspaces.len() % 10 == 0 {
            eprintln!("facets={} vertices={} (kept {} cut {} fresh {}) records={}",
                halfspaces.len(), kept.len() + fresh.len(), kept.len(), cut.len(), fresh.len(), records.len());
        }
        kept.extend(fresh);
        vertices = kept;
    }

    // Pareto-filter (weak) the recorded images with deterministic order
    records.sort_by(|a, b| {
        a.image
            .partial_cmp(&b.image)
            .unwrap()
            .then_with(|| a.preimage.partial_cmp(&b.preimage).unwrap())
    });
    let mut extreme_points: Vec<ExtremePoint> = Vec::new();
    for r in records {
        if extreme_points
            .iter()
            .any(|q| weakly_dominates_f64(&q.image, &r.image))
        {
            continue;
        }
        extreme_points.retain(|q| !weakly_dominates_f64(&r.image, &q.image));
        extreme_points.push(r);
    }
    extreme_points.sort_by(|a, b| a.image.partial_cmp(&b.image).unwrap());

    let facets: Vec<Facet> = halfspaces
        .into_iter()
        .filter(|h| h.reported)
        .map(|h| Facet { normal: h.normal, rhs: h.rhs })
        .collect();

    let status =
        if extreme_points.len() == 1 { LbsStatus::Singleton } else { LbsStatus::General };
    Ok(LowerBoundSet { status, extreme_points, facets, lp_count })
}

fn linf_close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-7)
}

fn weakly_dominates_f64(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= y + 1e-9)
}

/// Integrality of a pre-image: every coordinate within `tol` of {0, 1}.
pub fn integral_preimage(preimage: &[f64], tol: f64) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(preimage.len());
    for &v in preimage {
        if v.abs() <= tol {
            out.push(0);
        } else if (v - 1.0).abs() <= tol {
            out.push(1);
        } else {
            return None;
        }
    }
    Some(out)
}
