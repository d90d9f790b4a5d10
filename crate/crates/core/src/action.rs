//! Admissible transition matrices and their extreme-point structure.
//!
//! An admissible action is column-stochastic, nonnegative, and supported on
//! the graph's edges. The extreme actions are the 0/1-valued ones: exactly
//! one chosen out-edge per column. Every admissible action is a convex
//! combination of extreme actions, with weights given in closed form by the
//! product of the action's entries over each extreme action's active edges.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::lp::{LinearProgram, Rel};
use crate::polytope::{ResourceVector, DEFAULT_TOLERANCE};

/// Default cap on the number of enumerated extreme actions.
pub const DEFAULT_EXTREME_CAP: usize = 1_000_000;

/// Column-stochastic, adjacency-masked matrix stored row-major:
/// `entry(i, j)` is the fraction of node `j`'s mass sent to node `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.n + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Applies the action: `y_i = sum_j entry(i, j) * x_j`.
    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for i in 0..self.n {
                    out[i] += self.entries[i * self.n + j] * xj;
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &ResourceVector) -> Result<ResourceVector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        ResourceVector::with_total(self.apply_slice(x.values()), x.total(), 1e-6)
    }

    /// Checks column sums, nonnegativity, and the adjacency mask within `tol`.
    pub fn is_admissible(&self, g: &DirectedGraph, tol: f64) -> bool {
        if g.node_count() != self.n {
            return false;
        }
        for j in 0..self.n {
            let mut sum = 0.0;
            for i in 0..self.n {
                let v = self.entry(i, j);
                if v < -tol {
                    return false;
                }
                if v > tol && !g.has_edge(j, i) {
                    return false;
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol.max(f64::EPSILON * self.n as f64) {
                return false;
            }
        }
        true
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(m: TransitionMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        TransitionMatrix::from_rows(rows).map_err(|e| e.to_string())
    }
}

/// All 0/1 admissible actions of a graph, in lexicographic order of the
/// per-column target choices.
#[derive(Debug, Clone)]
pub struct ExtremeActionSet {
    graph: DirectedGraph,
    /// `targets[l][j]` is the destination node of column `j` under action `l`.
    targets: Vec<Vec<usize>>,
}

/// Convex weights over an extreme action set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCoefficients {
    pub weights: Vec<f64>,
}

impl ExtremeActionSet {
    pub fn enumerate(g: &DirectedGraph) -> Result<Self> {
        Self::enumerate_with_cap(g, DEFAULT_EXTREME_CAP)
    }

    pub fn enumerate_with_cap(g: &DirectedGraph, cap: usize) -> Result<Self> {
        let n = g.node_count();
        let mut count: u128 = 1;
        for j in 0..n {
            let d = g.out_neighbors(j).len();
            if d == 0 {
                return Err(Error::NoAdmissibleAction { node: j + 1 });
            }
            count *= d as u128;
        }
        if count > cap as u128 {
            return Err(Error::CapacityExceeded {
                what: "extreme action set".into(),
                needed: count.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let count = count as usize;
        let mut targets = Vec::with_capacity(count);
        let mut choice = vec![0usize; n];
        loop {
            targets.push(
                (0..n)
                    .map(|j| g.out_neighbors(j)[choice[j]])
                    .collect::<Vec<usize>>(),
            );
            // Odometer: rightmost column advances fastest.
            let mut j = n;
            loop {
                if j == 0 {
                    choice.clear();
                    break;
                }
                j -= 1;
                choice[j] += 1;
                if choice[j] < g.out_neighbors(j).len() {
                    break;
                }
                choice[j] = 0;
            }
            if choice.is_empty() {
                break;
            }
        }
        debug_assert_eq!(targets.len(), count);
        Ok(Self { graph: g.clone(), targets })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Per-column destinations of action `l` (0-indexed nodes).
    pub fn action_targets(&self, l: usize) -> &[usize] {
        &self.targets[l]
    }

    /// Compact wire form of action `l`: 1-indexed target per column.
    pub fn compact(&self, l: usize) -> Vec<usize> {
        self.targets[l].iter().map(|&i| i + 1).collect()
    }

    pub fn matrix(&self, l: usize) -> TransitionMatrix {
        let n = self.graph.node_count();
        let mut m = TransitionMatrix::zero(n);
        for (j, &i) in self.targets[l].iter().enumerate() {
            m.set_entry(i, j, 1.0);
        }
        m
    }

    /// Applies extreme action `l` to `x` without materializing the matrix.
    pub fn apply_into(&self, l: usize, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, &i) in self.targets[l].iter().enumerate() {
            out[i] += x[j];
        }
    }

    /// Closed-form convex decomposition: the weight of extreme action `l`
    /// is the product of `k`'s entries over `l`'s active edges.
    pub fn decompose(&self, k: &TransitionMatrix, tol: f64) -> Result<ConvexCoefficients> {
        if !k.is_admissible(&self.graph, tol.max(DEFAULT_TOLERANCE)) {
            return Err(Error::Inadmissible {
                reason: "decompose requires an admissible matrix".into(),
            });
        }
        let weights = self
            .targets
            .iter()
            .map(|action| {
                action
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| k.entry(i, j))
                    .product()
            })
            .collect();
        Ok(ConvexCoefficients { weights })
    }

    /// Recombines weights into a matrix: the convex combination of extremes.
    pub fn recombine(&self, coeffs: &ConvexCoefficients) -> Result<TransitionMatrix> {
        if coeffs.weights.len() != self.targets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.targets.len(),
                got: coeffs.weights.len(),
            });
        }
        let n = self.graph.node_count();
        let mut m = TransitionMatrix::zero(n);
        for (action, &w) in self.targets.iter().zip(&coeffs.weights) {
            if w != 0.0 {
                for (j, &i) in action.iter().enumerate() {
                    m.set_entry(i, j, m.entry(i, j) + w);
                }
            }
        }
        Ok(m)
    }

    /// Samples an admissible matrix by drawing flat-simplex weights over the
    /// extreme actions and recombining. Admissible by construction.
    pub fn sample_admissible<R: Rng>(&self, rng: &mut R) -> TransitionMatrix {
        let mut weights: Vec<f64> = (0..self.targets.len())
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        self.recombine(&ConvexCoefficients { weights })
            .expect("weights match the set by construction")
    }
}

impl ConvexCoefficients {
    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Finds an admissible action mapping `x_from` to `x_to` as a transportation
/// feasibility problem over edge flows. Columns that carry no mass get the
/// self-loop when present, otherwise the lexicographically-first out-edge.
pub fn synth_action(
    x_from: &ResourceVector,
    x_to: &ResourceVector,
    g: &DirectedGraph,
) -> Result<TransitionMatrix> {
    let n = g.node_count();
    if x_from.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x_from.len() });
    }
    if x_to.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x_to.len() });
    }
    let scale = x_from.total().abs().max(1.0);
    if (x_from.total() - x_to.total()).abs() > DEFAULT_TOLERANCE * scale {
        return Err(Error::TotalMismatch { a: x_from.total(), b: x_to.total() });
    }
    let flows = edge_flows_between(x_from.values(), x_to.values(), g)?;
    Ok(matrix_from_flows(x_from.values(), &flows, g))
}

/// Solves the flow system `sum_i f_(j,i) = supply_j`, `sum_j f_(j,i) =
/// demand_i`, `f >= 0` over the graph's edges. Infeasibility is exactly
/// one-step unreachability.
pub(crate) fn edge_flows_between(
    supply: &[f64],
    demand: &[f64],
    g: &DirectedGraph,
) -> Result<Vec<f64>> {
    let edges = g.edges();
    let n = g.node_count();
    let mut lp = LinearProgram::new(edges.len());
    for j in 0..n {
        let row: Vec<f64> = edges
            .iter()
            .map(|&(from, _)| if from == j { 1.0 } else { 0.0 })
            .collect();
        lp.add_row(row, Rel::Eq, supply[j]);
    }
    for i in 0..n {
        let row: Vec<f64> = edges
            .iter()
            .map(|&(_, to)| if to == i { 1.0 } else { 0.0 })
            .collect();
        lp.add_row(row, Rel::Eq, demand[i]);
    }
    let scale = supply.iter().sum::<f64>().abs().max(1.0);
    match lp.feasible(DEFAULT_TOLERANCE * scale)? {
        Some(flows) => Ok(flows),
        None => {
            let residual = lp.feasibility_residual()?;
            Err(Error::NotReachable {
                certificate: format!(
                    "no admissible one-step flow; minimal constraint violation {residual:.3e}"
                ),
            })
        }
    }
}

pub(crate) fn matrix_from_flows(
    supply: &[f64],
    flows: &[f64],
    g: &DirectedGraph,
) -> TransitionMatrix {
    let n = g.node_count();
    let mut m = TransitionMatrix::zero(n);
    let scale = supply.iter().sum::<f64>().abs().max(1.0);
    for j in 0..n {
        if supply[j] > DEFAULT_TOLERANCE * scale {
            let mut colsum = 0.0;
            for (e, &(from, to)) in g.edges().iter().enumerate() {
                if from == j {
                    let v = flows[e].max(0.0);
                    m.set_entry(to, j, v);
                    colsum += v;
                }
            }
            // Renormalize the column so it sums to exactly one.
            if colsum > 0.0 {
                for i in 0..n {
                    let v = m.entry(i, j);
                    if v != 0.0 {
                        m.set_entry(i, j, v / colsum);
                    }
                }
            } else {
                canonical_column(&mut m, g, j);
            }
        } else {
            canonical_column(&mut m, g, j);
        }
    }
    m
}

fn canonical_column(m: &mut TransitionMatrix, g: &DirectedGraph, j: usize) {
    let target = if g.has_self_loop(j) {
        j
    } else {
        g.out_neighbors(j)[0]
    };
    m.set_entry(target, j, 1.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_with_self_loops, DirectedGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_node() -> DirectedGraph {
        DirectedGraph::new(2, &[(1, 1), (1, 2), (2, 2)]).unwrap()
    }

    #[test]
    fn cardinality_matches_degree_product() {
        let ext = ExtremeActionSet::enumerate(&cycle_with_self_loops(3)).unwrap();
        assert_eq!(ext.len(), 8);

        let single = DirectedGraph::new(1, &[(1, 1)]).unwrap();
        let ext = ExtremeActionSet::enumerate(&single).unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext.matrix(0), TransitionMatrix::identity(1));

        let ext = ExtremeActionSet::enumerate(&two_node()).unwrap();
        assert_eq!(ext.len(), 2);
        assert_eq!(ext.matrix(0), TransitionMatrix::identity(2));
        let mover = ext.matrix(1);
        assert_eq!(mover.entry(1, 0), 1.0);
        assert_eq!(mover.entry(1, 1), 1.0);
    }

    #[test]
    fn enumeration_requires_out_edges() {
        let g = DirectedGraph::new(2, &[(1, 2), (1, 1)]).unwrap();
        assert!(matches!(
            ExtremeActionSet::enumerate(&g),
            Err(Error::NoAdmissibleAction { node: 2 })
        ));
    }

    #[test]
    fn enumeration_cap_is_loud() {
        let g = cycle_with_self_loops(4);
        assert!(matches!(
            ExtremeActionSet::enumerate_with_cap(&g, 15),
            Err(Error::CapacityExceeded { needed: 16, cap: 15, .. })
        ));
    }

    #[test]
    fn extreme_actions_are_admissible_exactly() {
        let g = cycle_with_self_loops(3);
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        for l in 0..ext.len() {
            assert!(ext.matrix(l).is_admissible(&g, 0.0));
        }
    }

    #[test]
    fn admissibility_checks() {
        let g = two_node();
        assert!(TransitionMatrix::identity(2).is_admissible(&g, 1e-9));
        let short = TransitionMatrix::from_rows(vec![vec![0.4, 0.0], vec![0.5, 1.0]]).unwrap();
        assert!(!short.is_admissible(&g, 1e-9));
        let k = TransitionMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.5, 1.0]]).unwrap();
        assert!(k.is_admissible(&g, 1e-9));
        // Mass on a missing edge (2 -> 1).
        let bad = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(!bad.is_admissible(&g, 1e-9));
    }

    #[test]
    fn decompose_identity() {
        let g = cycle_with_self_loops(3);
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        let coeffs = ext.decompose(&TransitionMatrix::identity(3), 1e-9).unwrap();
        let identity_index = (0..ext.len())
            .find(|&l| ext.matrix(l) == TransitionMatrix::identity(3))
            .unwrap();
        for (l, &w) in coeffs.weights.iter().enumerate() {
            let expected = if l == identity_index { 1.0 } else { 0.0 };
            assert!((w - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_half_mover() {
        let g = two_node();
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        let k = TransitionMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.5, 1.0]]).unwrap();
        let coeffs = ext.decompose(&k, 1e-9).unwrap();
        assert_eq!(coeffs.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn decompose_recombines() {
        let g = cycle_with_self_loops(3);
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = ext.sample_admissible(&mut rng);
            let coeffs = ext.decompose(&k, 1e-9).unwrap();
            assert!((coeffs.sum() - 1.0).abs() < 1e-9);
            let back = ext.recombine(&coeffs).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((back.entry(i, j) - k.entry(i, j)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn decompose_rejects_inadmissible() {
        let g = two_node();
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        let bad = TransitionMatrix::from_rows(vec![vec![0.4, 0.0], vec![0.5, 1.0]]).unwrap();
        assert!(matches!(
            ext.decompose(&bad, 1e-9),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn synth_identity_when_stationary() {
        let g = cycle_with_self_loops(3);
        let x = ResourceVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let k = synth_action(&x, &x, &g).unwrap();
        assert!(k.is_admissible(&g, 1e-9));
        let moved = k.apply(&x).unwrap();
        for i in 0..3 {
            assert!((moved.get(i) - x.get(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn synth_shift_example() {
        let g = cycle_with_self_loops(3);
        let from = ResourceVector::new(vec![2.0, 1.0, 0.0]).unwrap();
        let to = ResourceVector::new(vec![1.0, 2.0, 0.0]).unwrap();
        let k = synth_action(&from, &to, &g).unwrap();
        assert!((k.entry(0, 0) - 0.5).abs() < 1e-9);
        assert!((k.entry(1, 0) - 0.5).abs() < 1e-9);
        assert!((k.entry(1, 1) - 1.0).abs() < 1e-9);
        assert!((k.entry(2, 2) - 1.0).abs() < 1e-9);
        let moved = k.apply(&from).unwrap();
        for i in 0..3 {
            assert!((moved.get(i) - to.get(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn synth_rejects_unreachable() {
        let g = cycle_with_self_loops(3);
        let from = ResourceVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let to = ResourceVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            synth_action(&from, &to, &g),
            Err(Error::NotReachable { .. })
        ));
    }

    #[test]
    fn sampled_matrices_are_admissible() {
        let g = cycle_with_self_loops(4);
        let ext = ExtremeActionSet::enumerate(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            assert!(ext.sample_admissible(&mut rng).is_admissible(&g, 1e-9));
        }
    }

    #[test]
    fn matrix_serde_round_trip() {
        let k = TransitionMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.5, 1.0]]).unwrap();
        let text = serde_json::to_string(&k).unwrap();
        assert_eq!(text, "[[0.5,0.0],[0.5,1.0]]");
        let back: TransitionMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn compact_form_is_one_indexed() {
        let ext = ExtremeActionSet::enumerate(&two_node()).unwrap();
        assert_eq!(ext.compact(0), vec![1, 2]);
        assert_eq!(ext.compact(1), vec![2, 2]);
    }
}
