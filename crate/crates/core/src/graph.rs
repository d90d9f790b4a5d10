//! Directed-graph environment model.
//!
//! Nodes are 1-indexed in every external format and 0-indexed internally.
//! An edge `(j, i)` means resource may move from `j` to `i` in one step.
//! Self-loops are ordinary edges: a node without one cannot retain resource.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Immutable directed graph with adjacency lookups precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    node_count: usize,
    /// Sorted, 0-indexed `(from, to)` pairs.
    edges: Vec<(usize, usize)>,
    /// `out[j]` lists the targets of node `j`, sorted.
    out: Vec<Vec<usize>>,
    /// `ins[i]` lists the in-neighbors of node `i`, sorted.
    ins: Vec<Vec<usize>>,
}

/// Out-degrees and in-neighbor lists of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub out_degrees: Vec<usize>,
    /// 0-indexed in-neighbor lists; `i` appears in its own list iff the
    /// self-loop `(i, i)` exists.
    pub in_neighbors: Vec<Vec<usize>>,
    pub d_plus_min: usize,
    pub d_plus_max: usize,
}

/// Wire form: `{"n": 3, "edges": [[1,2],[2,3],...]}` with 1-indexed pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    /// Builds a graph from 1-indexed edge pairs. Rejects out-of-range
    /// endpoints and duplicate edges.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Precondition("node_count must be positive".into()));
        }
        let mut seen = vec![false; node_count * node_count];
        let mut zero_indexed = Vec::with_capacity(edges.len());
        for &(from, to) in edges {
            for node in [from, to] {
                if node == 0 || node > node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            let (j, i) = (from - 1, to - 1);
            if seen[j * node_count + i] {
                return Err(Error::DuplicateEdge { from, to });
            }
            seen[j * node_count + i] = true;
            zero_indexed.push((j, i));
        }
        zero_indexed.sort_unstable();
        let mut out = vec![Vec::new(); node_count];
        let mut ins = vec![Vec::new(); node_count];
        for &(j, i) in &zero_indexed {
            out[j].push(i);
            ins[i].push(j);
        }
        for list in ins.iter_mut() {
            list.sort_unstable();
        }
        Ok(Self {
            node_count,
            edges: zero_indexed,
            out,
            ins,
        })
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        Self::new(json.n, &json.edges)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.node_count,
            edges: self.edges.iter().map(|&(j, i)| (j + 1, i + 1)).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// 0-indexed `(from, to)` pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `true` iff the 0-indexed edge `(from, to)` exists.
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out[from].binary_search(&to).is_ok()
    }

    /// Adjacency entry in the `[A]_{ij} = 1 iff (j, i) in E` convention:
    /// row `i` is the destination, column `j` the source.
    pub fn adjacency(&self, i: usize, j: usize) -> bool {
        self.has_edge(j, i)
    }

    pub fn out_neighbors(&self, j: usize) -> &[usize] {
        &self.out[j]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.ins[i]
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.has_edge(i, i)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let out_degrees: Vec<usize> = self.out.iter().map(Vec::len).collect();
        let d_plus_min = out_degrees.iter().copied().min().unwrap_or(0);
        let d_plus_max = out_degrees.iter().copied().max().unwrap_or(0);
        DegreeProfile {
            out_degrees,
            in_neighbors: self.ins.clone(),
            d_plus_min,
            d_plus_max,
        }
    }

    /// BFS distances along directed edges from `start` (0-indexed).
    /// Unreachable nodes get `None`.
    pub fn distances_from(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(j) = queue.pop_front() {
            let d = dist[j].unwrap();
            for &i in &self.out[j] {
                if dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(i);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.node_count == 1 {
            return true;
        }
        let forward = self.distances_from(0);
        if forward.iter().any(Option::is_none) {
            return false;
        }
        // Reverse reachability of node 0 via in-neighbor BFS.
        let mut seen = vec![false; self.node_count];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for &j in &self.ins[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Maximum over ordered pairs of the shortest directed-path length.
    /// Errors when the graph is not strongly connected.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for start in 0..self.node_count {
            for dist in self.distances_from(start) {
                match dist {
                    Some(d) => best = best.max(d),
                    None => return Err(Error::NotStronglyConnected),
                }
            }
        }
        Ok(best)
    }

    /// First hop of a shortest path from `from` toward `goal`, ties broken
    /// by lowest node index. `None` when `goal` is unreachable.
    pub fn next_hop_toward(&self, from: usize, goal: usize) -> Option<usize> {
        if from == goal {
            return Some(if self.has_self_loop(from) {
                from
            } else {
                *self.out[from].first()?
            });
        }
        let dist_to_goal = self.reverse_distances_to(goal);
        let here = dist_to_goal[from]?;
        self.out[from]
            .iter()
            .copied()
            .find(|&next| dist_to_goal[next] == Some(here - 1))
    }

    /// BFS distances *to* `goal` along directed edges.
    pub fn reverse_distances_to(&self, goal: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        dist[goal] = Some(0);
        let mut queue = VecDeque::from([goal]);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].unwrap();
            for &j in &self.ins[i] {
                if dist[j].is_none() {
                    dist[j] = Some(d + 1);
                    queue.push_back(j);
                }
            }
        }
        dist
    }
}

/// Directed cycle `1 -> 2 -> ... -> n -> 1` with a self-loop at every node.
pub fn cycle_with_self_loops(n: usize) -> DirectedGraph {
    let mut edges = Vec::with_capacity(2 * n);
    for v in 1..=n {
        edges.push((v, v));
        edges.push((v, v % n + 1));
    }
    DirectedGraph::new(n, &edges).expect("cycle construction is always valid")
}

/// Complete digraph with self-loops on `n` nodes.
pub fn complete_with_self_loops(n: usize) -> DirectedGraph {
    let mut edges = Vec::with_capacity(n * n);
    for j in 1..=n {
        for i in 1..=n {
            edges.push((j, i));
        }
    }
    DirectedGraph::new(n, &edges).expect("complete construction is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_cycle_adjacency() {
        let g = DirectedGraph::new(3, &[(1, 2), (2, 3), (3, 1), (1, 1), (2, 2), (3, 3)]).unwrap();
        assert!(g.adjacency(1, 0));
        assert!(g.adjacency(2, 1));
        assert!(g.adjacency(0, 2));
        for i in 0..3 {
            assert!(g.adjacency(i, i));
        }
        assert!(!g.adjacency(0, 1));
    }

    #[test]
    fn single_node_self_loop() {
        let g = DirectedGraph::new(1, &[(1, 1)]).unwrap();
        assert!(g.adjacency(0, 0));
        assert_eq!(g.diameter().unwrap(), 0);
        let prof = g.degree_profile();
        assert_eq!(prof.out_degrees, vec![1]);
        assert_eq!(prof.in_neighbors, vec![vec![0]]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            DirectedGraph::new(2, &[(1, 3)]),
            Err(Error::NodeOutOfRange { node: 3, .. })
        ));
        assert!(matches!(
            DirectedGraph::new(2, &[(1, 2), (1, 2)]),
            Err(Error::DuplicateEdge { from: 1, to: 2 })
        ));
        assert!(matches!(
            DirectedGraph::new(2, &[(0, 1)]),
            Err(Error::NodeOutOfRange { node: 0, .. })
        ));
    }

    #[test]
    fn strong_connectivity() {
        let cycle = cycle_with_self_loops(3);
        assert!(cycle.is_strongly_connected());
        let dead_end = DirectedGraph::new(2, &[(1, 2), (1, 1), (2, 2)]).unwrap();
        assert!(!dead_end.is_strongly_connected());
        assert!(matches!(
            dead_end.diameter(),
            Err(Error::NotStronglyConnected)
        ));
    }

    #[test]
    fn cycle_diameters() {
        assert_eq!(cycle_with_self_loops(3).diameter().unwrap(), 2);
        assert_eq!(cycle_with_self_loops(4).diameter().unwrap(), 3);
    }

    #[test]
    fn degree_profile_cycle() {
        let g = cycle_with_self_loops(3);
        let prof = g.degree_profile();
        assert_eq!(prof.out_degrees, vec![2, 2, 2]);
        assert_eq!(prof.in_neighbors[0], vec![0, 2]);
        assert_eq!(prof.d_plus_min, 2);
        assert_eq!(prof.d_plus_max, 2);
    }

    #[test]
    fn degree_profile_two_node() {
        let g = DirectedGraph::new(2, &[(1, 1), (1, 2), (2, 2)]).unwrap();
        let prof = g.degree_profile();
        assert_eq!(prof.out_degrees, vec![2, 1]);
    }

    #[test]
    fn edge_count_matches_degree_sum() {
        for g in [cycle_with_self_loops(4), complete_with_self_loops(3)] {
            let prof = g.degree_profile();
            assert_eq!(prof.out_degrees.iter().sum::<usize>(), g.edges().len());
        }
    }

    #[test]
    fn json_round_trip() {
        let g = cycle_with_self_loops(3);
        let json = g.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let parsed: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(DirectedGraph::from_json(&parsed).unwrap(), g);
    }

    #[test]
    fn next_hop_shortest_path() {
        let g = cycle_with_self_loops(4);
        assert_eq!(g.next_hop_toward(0, 2), Some(1));
        assert_eq!(g.next_hop_toward(2, 2), Some(2));
    }

    /// Strong connectivity agrees with a transitive-closure oracle on a
    /// pseudo-random sweep of edge subsets over four nodes.
    #[test]
    fn connectivity_matches_transitive_closure() {
        let n = 4usize;
        let all_edges: Vec<(usize, usize)> = (1..=n)
            .flat_map(|j| (1..=n).map(move |i| (j, i)))
            .collect();
        let total = 1u32 << all_edges.len();
        let mut mask = 1u32;
        for _ in 0..500 {
            let subset: Vec<(usize, usize)> = all_edges
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> *k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let g = DirectedGraph::new(n, &subset).unwrap();
            let mut reach = vec![vec![false; n]; n];
            for v in 0..n {
                reach[v][v] = true;
            }
            for &(j, i) in g.edges() {
                reach[j][i] = true;
            }
            for k in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        if reach[a][k] && reach[k][b] {
                            reach[a][b] = true;
                        }
                    }
                }
            }
            let oracle = (0..n).all(|a| (0..n).all(|b| reach[a][b]));
            assert_eq!(g.is_strongly_connected(), oracle, "edges {subset:?}");
            mask = (mask.wrapping_mul(2654435761).wrapping_add(12345)) % total;
        }
    }
}
