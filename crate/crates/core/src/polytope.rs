//! Vertex-representation polytopes in node space.
//!
//! Everything lives on a scaled simplex: coordinates are nonnegative and sum
//! to the player's total. Membership, redundancy pruning, and intersection
//! tests all reduce to small linear programs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Rel};

/// Global numerical tolerance for feasibility residuals and comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Nonnegative allocation vector with a declared total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceVector {
    values: Vec<f64>,
    total: f64,
}

impl ResourceVector {
    /// Builds a vector whose total is its coordinate sum. Entries within
    /// tolerance below zero are clamped; anything lower is rejected.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if *v < -DEFAULT_TOLERANCE {
                return Err(Error::NegativeEntry { index: index + 1, value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total = values.iter().sum();
        Ok(Self { values, total })
    }

    /// Builds a vector against a declared total, checked within `tol`.
    pub fn with_total(values: Vec<f64>, total: f64, tol: f64) -> Result<Self> {
        let v = Self::new(values)?;
        if (v.total - total).abs() > tol {
            return Err(Error::TotalMismatch { a: v.total, b: total });
        }
        Ok(Self { values: v.values, total })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Scaled one-hot vector: all mass at node `i` (0-indexed).
    pub fn concentrated(n: usize, i: usize, total: f64) -> Self {
        let mut values = vec![0.0; n];
        values[i] = total;
        Self { values, total }
    }
}

/// Convex polytope given by its vertices; all vertices share one total.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    total: f64,
    dim: usize,
}

/// Componentwise lower bounds `x >= bounds`, an unbounded-above box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSet {
    pub bounds: Vec<f64>,
}

/// Metadata emitted next to CSV dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeMeta {
    pub total: f64,
    pub n: usize,
    pub vertex_count: usize,
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

impl Polytope {
    /// Builds a polytope from a nonempty vertex list. Vertices are sorted
    /// lexicographically; totals must agree within the global tolerance
    /// (scaled by the mass) and entries must be nonnegative.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Precondition("polytope needs at least one vertex".into()));
        };
        let dim = first.len();
        let total: f64 = first.iter().sum();
        let tol = DEFAULT_TOLERANCE * total.abs().max(1.0);
        let mut cleaned = Vec::with_capacity(vertices.len());
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            let sum: f64 = v.iter().sum();
            if (sum - total).abs() > tol {
                return Err(Error::TotalMismatch { a: sum, b: total });
            }
            let mut row = v.clone();
            for (index, x) in row.iter_mut().enumerate() {
                if *x < -tol {
                    return Err(Error::NegativeEntry { index: index + 1, value: *x });
                }
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            cleaned.push(row);
        }
        cleaned.sort_by(|a, b| lex_cmp(a, b));
        cleaned.dedup();
        Ok(Self { vertices: cleaned, total, dim })
    }

    pub fn from_point(point: &ResourceVector) -> Self {
        Self {
            vertices: vec![point.values().to_vec()],
            total: point.total(),
            dim: point.len(),
        }
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metadata(&self) -> PolytopeMeta {
        PolytopeMeta {
            total: self.total,
            n: self.dim,
            vertex_count: self.vertices.len(),
        }
    }

    /// One vertex per row, plain comma-separated values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Membership: is `point` a convex combination of the vertices?
    /// Errors when totals differ beyond `tol` (comparing sets of different
    /// mass is meaningless).
    pub fn contains(&self, point: &[f64], tol: f64) -> Result<bool> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        let sum: f64 = point.iter().sum();
        let scale = self.total.abs().max(1.0);
        if (sum - self.total).abs() > tol.max(DEFAULT_TOLERANCE) * scale {
            return Err(Error::TotalMismatch { a: sum, b: self.total });
        }
        Ok(in_hull(&self.vertices, point, tol))
    }

    pub fn contains_vector(&self, point: &ResourceVector, tol: f64) -> Result<bool> {
        self.contains(point.values(), tol)
    }

    /// Minimal vertex set with the same convex hull.
    ///
    /// Exact duplicates were removed at construction; here every point that
    /// lies in the hull of the remaining ones is dropped via an LP test per
    /// candidate. Two passes keep the work proportional to the output size.
    pub fn pruned(&self) -> Polytope {
        let kept = prune_vertices(self.vertices.clone());
        Polytope {
            vertices: kept,
            total: self.total,
            dim: self.dim,
        }
    }

    /// Mutual membership of vertex sets, the saturation test for cascades.
    pub fn same_hull(&self, other: &Polytope, tol: f64) -> bool {
        self.vertices
            .iter()
            .all(|v| in_hull(&other.vertices, v, tol))
            && other
                .vertices
                .iter()
                .all(|v| in_hull(&self.vertices, v, tol))
    }
}

impl LowerBoundSet {
    pub fn new(bounds: Vec<f64>) -> Self {
        Self { bounds }
    }

    pub fn slack(&self, total: f64) -> f64 {
        total - self.bounds.iter().sum::<f64>()
    }

    /// Vertex form of `{x >= bounds, sum x = total}`: a translated simplex
    /// with the excess mass concentrated on one coordinate per vertex.
    /// `None` when the bounds already exceed the total.
    pub fn to_simplex_polytope(&self, total: f64, tol: f64) -> Option<Polytope> {
        let slack = self.slack(total);
        if slack < -tol {
            return None;
        }
        let slack = slack.max(0.0);
        let n = self.bounds.len();
        let mut vertices = Vec::with_capacity(n);
        if slack <= tol {
            vertices.push(self.bounds.clone());
        } else {
            for i in 0..n {
                let mut v = self.bounds.clone();
                v[i] += slack;
                vertices.push(v);
            }
        }
        Some(Polytope::new(vertices).expect("translated simplex is always valid"))
    }
}

fn in_hull(vertices: &[Vec<f64>], point: &[f64], tol: f64) -> bool {
    debug_assert!(!vertices.is_empty());
    let dim = point.len();
    let m = vertices.len();
    if m == 1 {
        return vertices[0]
            .iter()
            .zip(point)
            .all(|(a, b)| (a - b).abs() <= tol.max(DEFAULT_TOLERANCE));
    }
    let mut lp = LinearProgram::new(m);
    for i in 0..dim {
        let row: Vec<f64> = vertices.iter().map(|v| v[i]).collect();
        lp.add_row(row, Rel::Eq, point[i]);
    }
    lp.add_row(vec![1.0; m], Rel::Eq, 1.0);
    lp.feasibility_residual()
        .map(|r| r <= tol.max(DEFAULT_TOLERANCE) * (dim as f64).max(1.0))
        .unwrap_or(false)
}

/// Two-pass redundancy elimination over a lexicographically sorted,
/// deduplicated list. Pass one grows a candidate hull; pass two removes the
/// early points that later ones swallowed.
pub(crate) fn prune_vertices(mut vertices: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    vertices.sort_by(|a, b| lex_cmp(a, b));
    vertices.dedup();
    if vertices.len() <= 2 {
        return vertices;
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for v in vertices {
        if kept.is_empty() || !in_hull(&kept, &v, DEFAULT_TOLERANCE) {
            kept.push(v);
        }
    }
    let mut i = 0;
    while i < kept.len() && kept.len() > 1 {
        let mut others = Vec::with_capacity(kept.len() - 1);
        others.extend_from_slice(&kept[..i]);
        others.extend_from_slice(&kept[i + 1..]);
        if in_hull(&others, &kept[i], DEFAULT_TOLERANCE) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept.sort_by(|a, b| lex_cmp(a, b));
    kept
}

/// Feasibility certificate for `lp_feasible`-style queries. Either a witness
/// assignment or an infeasibility verdict.
pub fn lp_feasible(lp: &LinearProgram, tol: f64) -> Result<Option<Vec<f64>>> {
    lp.feasible(tol)
}

/// Is `p` intersected with `{x >= lb}` nonempty? Returns a witness point.
/// Vertices already satisfying the bounds are preferred witnesses; interior
/// witnesses come from the feasibility LP.
pub fn intersect_lower_bounds_nonempty(
    p: &Polytope,
    lb: &LowerBoundSet,
    tol: f64,
) -> Result<Option<Vec<f64>>> {
    if lb.bounds.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: lb.bounds.len() });
    }
    for v in p.vertices() {
        if v.iter().zip(&lb.bounds).all(|(x, b)| *x >= b - tol) {
            return Ok(Some(v.clone()));
        }
    }
    let m = p.vertex_count();
    let mut lp = LinearProgram::new(m);
    for i in 0..p.dim() {
        let row: Vec<f64> = p.vertices().iter().map(|v| v[i]).collect();
        lp.add_row(row, Rel::Ge, lb.bounds[i]);
    }
    lp.add_row(vec![1.0; m], Rel::Eq, 1.0);
    match lp.feasible(tol)? {
        None => Ok(None),
        Some(weights) => Ok(Some(combine(p.vertices(), &weights))),
    }
}

/// Maximizes the minimum componentwise surplus `min_i (x_i - lb_i)` over `p`.
/// Returns the optimum and the achieving point; the intersection with the
/// bounds is nonempty iff the optimum is at least `-tol`.
pub fn max_min_surplus(p: &Polytope, lb: &LowerBoundSet) -> Result<(f64, Vec<f64>)> {
    if lb.bounds.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: lb.bounds.len() });
    }
    let m = p.vertex_count();
    // Variables: m hull weights, then the surplus split into s+ and s-.
    let mut lp = LinearProgram::new(m + 2);
    let mut objective = vec![0.0; m + 2];
    objective[m] = -1.0;
    objective[m + 1] = 1.0;
    lp.minimize(objective);
    for i in 0..p.dim() {
        let mut row: Vec<f64> = p.vertices().iter().map(|v| v[i]).collect();
        row.push(-1.0);
        row.push(1.0);
        lp.add_row(row, Rel::Ge, lb.bounds[i]);
    }
    let mut simplex_row = vec![1.0; m];
    simplex_row.extend([0.0, 0.0]);
    lp.add_row(simplex_row, Rel::Eq, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { solution, .. } => {
            let surplus = solution[m] - solution[m + 1];
            let witness = combine(p.vertices(), &solution[..m]);
            Ok((surplus, witness))
        }
        LpOutcome::Infeasible => Err(Error::Inconsistent(
            "surplus program is always feasible over a nonempty polytope".into(),
        )),
        LpOutcome::Unbounded => Err(Error::IllPosed("unbounded surplus".into())),
    }
}

/// Intersects a vertex polytope with `{x >= lb}` and returns the vertex form,
/// or `None` when the intersection is empty.
///
/// Each active bound is applied as one halfspace clip: surviving vertices are
/// kept and every crossing edge contributes its intersection point. Edges are
/// recognized by a supporting-functional LP over the current vertex set.
pub fn clip_to_lower_bounds(
    p: &Polytope,
    lb: &LowerBoundSet,
    tol: f64,
) -> Result<Option<Polytope>> {
    if lb.bounds.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: lb.bounds.len() });
    }
    let mut current = prune_vertices(p.vertices().to_vec());
    for (coord, &bound) in lb.bounds.iter().enumerate() {
        if bound <= tol {
            continue;
        }
        let inside: Vec<Vec<f64>> = current
            .iter()
            .filter(|v| v[coord] >= bound - tol)
            .cloned()
            .collect();
        if inside.is_empty() {
            return Ok(None);
        }
        if inside.len() == current.len() {
            continue;
        }
        let mut next = inside.clone();
        for (a, va) in current.iter().enumerate() {
            if va[coord] < bound - tol {
                continue;
            }
            for (b, vb) in current.iter().enumerate() {
                if a == b || vb[coord] >= bound - tol {
                    continue;
                }
                if !is_edge(&current, a, b) {
                    continue;
                }
                let t = (bound - va[coord]) / (vb[coord] - va[coord]);
                if !(0.0..=1.0).contains(&t) {
                    continue;
                }
                let crossing: Vec<f64> = va
                    .iter()
                    .zip(vb)
                    .map(|(x, y)| x + t * (y - x))
                    .collect();
                next.push(crossing);
            }
        }
        current = prune_vertices(next);
    }
    Ok(Some(Polytope::new(current)?))
}

/// Supporting-functional edge test: `[a, b]` is an edge of the hull iff some
/// linear functional is maximized exactly on those two vertices.
fn is_edge(vertices: &[Vec<f64>], a: usize, b: usize) -> bool {
    let m = vertices.len();
    if m <= 2 {
        return true;
    }
    let dim = vertices[0].len();
    // Variables: c split into positive/negative parts, then d likewise.
    let nv = 2 * dim + 2;
    let mut lp = LinearProgram::new(nv);
    let row_for = |v: &[f64], rhs_sign: f64| -> Vec<f64> {
        let mut row = Vec::with_capacity(nv);
        for &x in v {
            row.push(x);
        }
        for &x in v {
            row.push(-x);
        }
        row.push(-1.0 * rhs_sign);
        row.push(1.0 * rhs_sign);
        row
    };
    lp.add_row(row_for(&vertices[a], 1.0), Rel::Eq, 0.0);
    lp.add_row(row_for(&vertices[b], 1.0), Rel::Eq, 0.0);
    for (k, v) in vertices.iter().enumerate() {
        if k == a || k == b {
            continue;
        }
        lp.add_row(row_for(v, 1.0), Rel::Le, -1.0);
    }
    matches!(lp.feasible(DEFAULT_TOLERANCE), Ok(Some(_)))
}

fn combine(vertices: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let dim = vertices[0].len();
    let mut out = vec![0.0; dim];
    for (v, &w) in vertices.iter().zip(weights) {
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
    }
    for x in out.iter_mut() {
        if *x < 0.0 && *x > -DEFAULT_TOLERANCE {
            *x = 0.0;
        }
    }
    out
}
