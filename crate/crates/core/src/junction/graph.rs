//! Undirected graphs, moralization, triangulation and orderings.

use std::collections::BTreeSet;

use crate::model::BayesNet;
use crate::scalar::Probability;

/// Simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl UGraph {
    pub fn new(n: usize) -> Self {
        UGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = UGraph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Adds `a - b`; self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|nb| nb.len()).sum::<usize>() / 2
    }

    pub fn is_complete(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }
}

/// Skeleton plus an edge between every two parents of a common child.
pub fn moralize<T: Probability>(net: &BayesNet<T>) -> UGraph {
    let mut g = UGraph::new(net.len());
    for v in 0..net.len() {
        let pa = net.parents(v);
        for (i, &p) in pa.iter().enumerate() {
            g.add_edge(p, v);
            for &q in &pa[i + 1..] {
                g.add_edge(p, q);
            }
        }
    }
    g
}

/// Triangulates `g` by eliminating `alpha` from last to first, joining the
/// earlier neighbours of each eliminated vertex.
pub fn fill_in(g: &UGraph, alpha: &[usize]) -> UGraph {
    assert!(
        is_permutation(alpha, g.len()),
        "ordering is not a permutation"
    );
    let pos = positions(alpha);
    let mut h = g.clone();
    for &v in alpha.iter().rev() {
        let earlier: Vec<usize> = h
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] < pos[v])
            .collect();
        for (i, &a) in earlier.iter().enumerate() {
            for &b in &earlier[i + 1..] {
                h.add_edge(a, b);
            }
        }
    }
    h
}

pub(crate) fn is_permutation(alpha: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    alpha.len() == n
        && alpha
            .iter()
            .all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

pub(crate) fn positions(alpha: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; alpha.len()];
    for (i, &v) in alpha.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Greedy min-fill elimination among the vertices `eligible` allows,
/// lowest id on ties. Returns `alpha`, the reverse of the elimination
/// sequence.
fn min_fill(g: &UGraph, eligible: impl Fn(usize, &[bool]) -> bool) -> Vec<usize> {
    let n = g.len();
    let mut h = g.clone();
    let mut gone = vec![false; n];
    let mut eliminated = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !gone[v] && eligible(v, &gone))
            .min_by_key(|&v| (fill_count(&h, v), v))
            .expect("some vertex is eligible");
        let nb: Vec<usize> = h.neighbors(v).iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                h.add_edge(a, b);
            }
        }
        for &u in &nb {
            h.adj[u].remove(&v);
        }
        h.adj[v].clear();
        gone[v] = true;
        eliminated.push(v);
    }
    eliminated.reverse();
    eliminated
}

fn fill_count(h: &UGraph, v: usize) -> usize {
    let nb: Vec<usize> = h.neighbors(v).iter().copied().collect();
    nb.iter()
        .enumerate()
        .map(|(i, &a)| nb[i + 1..].iter().filter(|&&b| !h.has_edge(a, b)).count())
        .sum()
}

/// Min-fill ordering of an arbitrary graph.
pub fn choose_ordering(g: &UGraph) -> Vec<usize> {
    min_fill(g, |_, _| true)
}

/// Min-fill ordering restricted so that every variable is eliminated after
/// all its children. The resulting `alpha` lists parents before children.
pub fn choose_dag_ordering<T: Probability>(net: &BayesNet<T>, g: &UGraph) -> Vec<usize> {
    min_fill(g, |v, gone| net.children(v).iter().all(|&c| gone[c]))
}

/// Maximum-cardinality search followed by a perfect-elimination check.
pub fn is_chordal(g: &UGraph) -> bool {
    let n = g.len();
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unvisited vertex");
        visited[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    let pos = positions(&order);
    order.iter().all(|&v| {
        let earlier: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] < pos[v])
            .collect();
        match earlier.iter().max_by_key(|&&u| pos[u]) {
            None => true,
            Some(&last) => earlier.iter().all(|&u| u == last || g.has_edge(u, last)),
        }
    })
}

/// Size of the largest clique the ordering produces.
pub fn induced_width(g: &UGraph, alpha: &[usize]) -> usize {
    let h = fill_in(g, alpha);
    let pos = positions(alpha);
    alpha
        .iter()
        .map(|&v| 1 + h.neighbors(v).iter().filter(|&&u| pos[u] < pos[v]).count())
        .max()
        .unwrap_or(0)
}
