//! Simple undirected graphs over dense node indices.
//!
//! Adjacency is stored as one bit row per node, which keeps edge queries O(1)
//! and makes common-neighbour counts a handful of popcounts for the sizes
//! this crate targets (tens to a few thousand nodes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Simple undirected graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    edges: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_list())
            .finish()
    }
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Graph {
            n,
            words,
            bits: vec![0; words * n],
            edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge_unchecked(i, j);
            }
        }
        g
    }

    /// Star with centre `0`.
    pub fn star(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for j in 1..n {
            g.add_edge_unchecked(0, j);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 1..n {
            g.add_edge_unchecked(i - 1, i);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::path(n);
        if n > 2 {
            g.add_edge_unchecked(n - 1, 0);
        }
        g
    }

    /// Builds a graph from unordered pairs. Duplicates (in either orientation)
    /// collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange { node: i.max(j), n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !g.has_edge(i, j) {
                g.add_edge_unchecked(i, j);
            }
        }
        Ok(g)
    }

    /// Builds a graph from the strict upper triangle encoded as bits of
    /// `code`, pairs enumerated row-major (`(0,1), (0,2), .., (n-2,n-1)`).
    /// Used for exhaustive enumeration of small graphs.
    pub fn from_code(n: usize, code: u64) -> Self {
        let mut g = Graph::empty(n);
        let mut bit = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if code >> bit & 1 == 1 {
                    g.add_edge_unchecked(i, j);
                }
                bit += 1;
            }
        }
        g
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Number of unordered node pairs, `n(n-1)/2`.
    #[inline]
    pub fn dyad_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    fn flip_bit(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / WORD] ^= 1 << (j % WORD);
    }

    fn add_edge_unchecked(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && !self.has_edge(i, j));
        self.flip_bit(i, j);
        self.flip_bit(j, i);
        self.edges += 1;
    }

    /// Flips dyad `{i, j}` and returns whether the edge is present afterwards.
    ///
    /// Panics on `i == j`; callers own the no-self-loop invariant.
    pub fn toggle(&mut self, i: usize, j: usize) -> bool {
        assert_ne!(i, j, "self-loop toggle");
        let present = self.has_edge(i, j);
        self.flip_bit(i, j);
        self.flip_bit(j, i);
        if present {
            self.edges -= 1;
        } else {
            self.edges += 1;
        }
        !present
    }

    /// Sets dyad `{i, j}` present.
    pub fn insert(&mut self, i: usize, j: usize) {
        if !self.has_edge(i, j) {
            self.toggle(i, j);
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// `|N(i) ∩ N(j)|`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Neighbours of `i` in increasing order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD + b)
            })
        })
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edges);
        for i in 0..self.n {
            out.extend(self.neighbors(i).filter(|&j| j > i).map(|j| (i, j)));
        }
        out
    }

    /// Induced subgraph on `members`, relabelled `0..members.len()` in the
    /// order given.
    pub fn extract_block(&self, members: &[usize]) -> Result<Graph> {
        if members.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if let Some(&bad) = members.iter().find(|&&m| m >= self.n) {
            return Err(Error::NodeOutOfRange {
                node: bad,
                n: self.n,
            });
        }
        let mut seen = vec![false; self.n];
        for &m in members {
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::DuplicateMember(m));
            }
        }
        let mut sub = Graph::empty(members.len());
        for (a, &u) in members.iter().enumerate() {
            for (b, &v) in members.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    sub.add_edge_unchecked(a, b);
                }
            }
        }
        Ok(sub)
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut comp = vec![s];
            label[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for v in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Node-relabelled copy: node `i` of `self` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let mut g = Graph::empty(self.n);
        for (i, j) in self.edge_list() {
            g.add_edge_unchecked(perm[i], perm[j]);
        }
        g
    }
}

/// Two-mode graph: `left` nodes (people) tied only to `right` nodes (places).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new<I>(n_left: usize, n_right: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (l, r) in edges {
            if l >= n_left {
                return Err(Error::NodeOutOfRange { node: l, n: n_left });
            }
            if r >= n_right {
                return Err(Error::NodeOutOfRange {
                    node: r,
                    n: n_right,
                });
            }
            list.push((l, r));
        }
        list.sort_unstable();
        list.dedup();
        Ok(BipartiteGraph {
            n_left,
            n_right,
            edges: list,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// One-mode projection onto the left nodes: `i ~ j` iff they share at
    /// least one right neighbour. Co-visit multiplicity is discarded.
    pub fn project_one_mode(&self) -> Result<Graph> {
        if self.n_left == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut visitors: Vec<Vec<usize>> = vec![Vec::new(); self.n_right];
        for &(l, r) in &self.edges {
            visitors[r].push(l);
        }
        let mut g = Graph::empty(self.n_left);
        for group in &visitors {
            for (a, &u) in group.iter().enumerate() {
                for &v in &group[a + 1..] {
                    g.insert(u, v);
                }
            }
        }
        Ok(g)
    }
}

/// Assignment of nodes to `k` blocks (neighbourhoods).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    assignment: Vec<usize>,
    k: usize,
}

impl Membership {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "block count must be at least 1".into(),
            ));
        }
        if let Some(&bad) = assignment.iter().find(|&&z| z >= k) {
            return Err(Error::InvalidParameter(format!(
                "block label {bad} out of range for k = {k}"
            )));
        }
        Ok(Membership { assignment, k })
    }

    pub fn block_count(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Members of each block, ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &z) in self.assignment.iter().enumerate() {
            out[z].push(i);
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &z in &self.assignment {
            out[z] += 1;
        }
        out
    }

    pub fn occupied_blocks(&self) -> usize {
        self.block_sizes().iter().filter(|&&s| s > 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_dedups_and_symmetrises() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(2), 0);

        let g = Graph::from_edges(4, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(1, 0) && g.has_edge(0, 1));
    }

    #[test]
    fn build_rejects_bad_pairs() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(Error::NodeOutOfRange { node: 2, n: 2 })
        ));
    }

    #[test]
    fn extract_block_cases() {
        let k3 = Graph::complete(3);
        let sub = k3.extract_block(&[0, 1]).unwrap();
        assert_eq!(sub, Graph::complete(2));

        let c4 = Graph::cycle(4);
        let sub = c4.extract_block(&[0, 2]).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 0);

        assert_eq!(c4.extract_block(&[0, 1, 2, 3]).unwrap(), c4);
        assert!(matches!(c4.extract_block(&[]), Err(Error::EmptyBlock)));
    }

    #[test]
    fn extract_block_keeps_input_order() {
        let p = Graph::path(3);
        let sub = p.extract_block(&[2, 0, 1]).unwrap();
        // old 2 -> 0, old 0 -> 1, old 1 -> 2
        assert_eq!(sub.edge_list(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn projection_cases() {
        let b = BipartiteGraph::new(2, 1, [(0, 0), (1, 0)]).unwrap();
        assert!(b.project_one_mode().unwrap().has_edge(0, 1));

        let b = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(b.project_one_mode().unwrap().edge_count(), 0);

        let b = BipartiteGraph::new(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        assert_eq!(
            b.project_one_mode().unwrap().edge_list(),
            vec![(0, 1), (1, 2)]
        );
    }

    #[test]
    fn wide_rows_work() {
        let mut g = Graph::empty(130);
        g.toggle(0, 129);
        g.toggle(64, 129);
        assert_eq!(g.neighbors(129).collect::<Vec<_>>(), vec![0, 64]);
        assert_eq!(g.common_neighbors(0, 64), 1);
        assert!(!g.toggle(129, 0));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn components_split() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2], vec![3, 4]]);
    }
}
