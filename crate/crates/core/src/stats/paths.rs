//! Breadth-first shortest paths and Brandes dependency accumulation.

use std::collections::VecDeque;

use crate::graph::Graph;

/// All-pairs unweighted shortest-path lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `None` when `j` is unreachable from `i`.
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.dist[i * self.n + j];
        (d != Self::UNREACHABLE).then_some(d)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }
}

/// BFS from every node.
pub fn all_pairs_shortest_paths(g: &Graph) -> DistanceMatrix {
    let n = g.node_count();
    let mut dist = vec![DistanceMatrix::UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for v in g.neighbors(u) {
                if row[v] == DistanceMatrix::UNREACHABLE {
                    row[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix { n, dist }
}

/// Per-node path aggregates gathered in one BFS/Brandes sweep.
#[derive(Debug, Clone)]
pub(crate) struct PathSummary {
    /// Sum of finite distances from each node.
    pub reach_sum: Vec<u64>,
    /// Number of other nodes reachable from each node.
    pub reach_count: Vec<usize>,
    /// Betweenness with each unordered source/target pair counted once.
    pub betweenness: Vec<f64>,
}

impl PathSummary {
    pub fn compute(g: &Graph) -> Self {
        let n = g.node_count();
        let mut reach_sum = vec![0u64; n];
        let mut reach_count = vec![0usize; n];
        let mut btw = vec![0.0f64; n];

        let mut dist = vec![u32::MAX; n];
        let mut sigma = vec![0.0f64; n];
        let mut delta = vec![0.0f64; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::with_capacity(n);

        for s in 0..n {
            dist.fill(u32::MAX);
            sigma.fill(0.0);
            delta.fill(0.0);
            order.clear();

            dist[s] = 0;
            sigma[s] = 1.0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for v in g.neighbors(u) {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                    if dist[v] == dist[u] + 1 {
                        sigma[v] += sigma[u];
                    }
                }
            }

            reach_count[s] = order.len() - 1;
            reach_sum[s] = order.iter().map(|&v| dist[v] as u64).sum();

            // predecessors of w are neighbours one level closer to s
            for &w in order.iter().rev() {
                if w == s {
                    continue;
                }
                let coeff = (1.0 + delta[w]) / sigma[w];
                for v in g.neighbors(w) {
                    if dist[v] != u32::MAX && dist[v] + 1 == dist[w] {
                        delta[v] += sigma[v] * coeff;
                    }
                }
                btw[w] += delta[w];
            }
        }
        for b in &mut btw {
            *b /= 2.0;
        }
        PathSummary {
            reach_sum,
            reach_count,
            betweenness: btw,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apsp_basic() {
        let d = all_pairs_shortest_paths(&Graph::complete(3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), Some(u32::from(i != j)));
            }
        }
        let d = all_pairs_shortest_paths(&Graph::path(3));
        assert_eq!(d.get(0, 2), Some(2));
        let d = all_pairs_shortest_paths(&Graph::empty(2));
        assert_eq!(d.get(0, 1), None);
        assert_eq!(d.row(0)[1], DistanceMatrix::UNREACHABLE);
    }

    #[test]
    fn brandes_path3() {
        let s = PathSummary::compute(&Graph::path(3));
        assert_eq!(s.betweenness, vec![0.0, 1.0, 0.0]);
        assert_eq!(s.reach_sum, vec![3, 2, 3]);
    }

    #[test]
    fn brandes_splits_parallel_geodesics() {
        // 4-cycle: each pair of opposite nodes has two geodesics
        let s = PathSummary::compute(&Graph::cycle(4));
        assert_eq!(s.betweenness, vec![0.5; 4]);
    }
}
