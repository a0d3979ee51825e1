//! Preorder numbering of a rerooted tree from two Euler tours.

use crate::engine::{find_roots, list_rank, suffix_sums, Engine, RoundStats};
use crate::error::{Error, Result};
use crate::model::BayesNet;
use crate::scalar::Probability;

use super::require_forest;

/// A total order on one tree component, parents before children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    order: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl Ordering {
    /// Variables of the component in preorder.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Preorder number of `v`, or `None` outside the component.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.position[v]
    }

    pub fn root(&self) -> usize {
        self.order[0]
    }
}

/// Directed arcs of an Euler tour over an undirected tree.
struct Tour {
    offsets: Vec<usize>,
    heads: Vec<(usize, usize)>,
    successor: Vec<Option<usize>>,
}

impl Tour {
    /// The tour visits each vertex's neighbours in list order and ends on
    /// the arc entering `root` from its last neighbour.
    fn new(adj: &[Vec<usize>], root: usize) -> Tour {
        let mut offsets = Vec::with_capacity(adj.len());
        let mut heads = Vec::new();
        for (u, nb) in adj.iter().enumerate() {
            offsets.push(heads.len());
            heads.extend(nb.iter().map(|&v| (u, v)));
        }
        let successor = heads
            .iter()
            .map(|&(u, v)| {
                let k = adj[v]
                    .iter()
                    .position(|&x| x == u)
                    .expect("symmetric adjacency")
                    + 1;
                if v == root && k == adj[v].len() {
                    None
                } else {
                    Some(offsets[v] + k % adj[v].len())
                }
            })
            .collect();
        Tour {
            offsets,
            heads,
            successor,
        }
    }

    fn arc(&self, adj: &[Vec<usize>], u: usize, v: usize) -> usize {
        self.offsets[u] + adj[u].iter().position(|&x| x == v).expect("arc exists")
    }
}

/// Preorder of the component containing `root`, treating arcs as
/// undirected and `root` as the new root. Ties among siblings go to the
/// lower index.
pub fn preorder<T: Probability>(
    net: &BayesNet<T>,
    root: usize,
    engine: &Engine,
) -> Result<(Ordering, RoundStats)> {
    require_forest(net, "preorder")?;
    if root >= net.len() {
        return Err(Error::InvalidEvidence(format!(
            "unknown variable {}",
            root + 1
        )));
    }
    let n = net.len();
    let parent: Vec<Option<usize>> = (0..n).map(|v| net.parents(v).first().copied()).collect();
    let (tops, mut stats) = find_roots(&parent, engine)?;
    let members: Vec<usize> = (0..n).filter(|&v| tops[v] == tops[root]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in members.iter().enumerate() {
        local[v] = i;
    }
    let m = members.len();
    let r = local[root];
    let mut position = vec![None; n];
    if m == 1 {
        position[root] = Some(0);
        return Ok((
            Ordering {
                order: vec![root],
                position,
            },
            stats,
        ));
    }
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| net.neighbors(v).into_iter().map(|u| local[u]).collect())
        .collect();
    let arcs = 2 * (m - 1);

    // First tour: an arc precedes its reverse exactly when it points away
    // from the root.
    let tour = Tour::new(&adj, r);
    let (rank, s) = list_rank(&tour.successor, engine)?;
    stats.absorb(&s);
    let pos = |a: usize| arcs - 1 - rank[a];
    let mut up = vec![None; m];
    for (a, &(u, v)) in tour.heads.iter().enumerate() {
        if pos(a) < pos(tour.arc(&adj, v, u)) {
            up[v] = Some(u);
        }
    }

    // Second tour with each vertex's parent listed first, so the tour is a
    // depth-first traversal; count the downward arcs still ahead.
    let ordered: Vec<Vec<usize>> = (0..m)
        .map(|v| {
            let mut nb: Vec<usize> = up[v].into_iter().collect();
            nb.extend(adj[v].iter().copied().filter(|&u| Some(u) != up[v]));
            nb
        })
        .collect();
    let tour = Tour::new(&ordered, r);
    let weights: Vec<u64> = tour
        .heads
        .iter()
        .map(|&(u, v)| (up[v] == Some(u)) as u64)
        .collect();
    let (ahead, s) = suffix_sums(&tour.successor, &weights, engine)?;
    stats.absorb(&s);
    let mut order = vec![0; m];
    order[0] = root;
    position[root] = Some(0);
    for v in (0..m).filter(|&v| v != r) {
        let a = tour.arc(&ordered, up[v].expect("non-root has a parent"), v);
        let k = (m - 1) - ahead[a] as usize + 1;
        order[k] = members[v];
        position[members[v]] = Some(k);
    }
    Ok((Ordering { order, position }, stats))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn chain_rerooted_at_its_leaf() {
        let (ord, _) = preorder(&net_a(), 2, &Engine::sequential()).unwrap();
        assert_eq!(ord.order(), &[2, 1, 0]);
        assert_eq!(ord.position(0), Some(2));
    }

    #[test]
    fn star_lists_siblings_ascending() {
        let (ord, _) = preorder(&star(), 0, &Engine::parallel()).unwrap();
        assert_eq!(ord.order(), &[0, 1, 2, 3]);
        let (ord, _) = preorder(&star(), 2, &Engine::parallel()).unwrap();
        assert_eq!(ord.order(), &[2, 0, 1, 3]);
    }

    #[test]
    fn other_components_are_unnumbered() {
        let net = BayesNet::from_tables(
            vec![2; 3],
            vec![vec![], vec![], vec![0]],
            vec![vec![0.5; 2], vec![0.5; 2], vec![0.5; 4]],
        )
        .unwrap();
        let (ord, _) = preorder(&net, 2, &Engine::sequential()).unwrap();
        assert_eq!(ord.order(), &[2, 0]);
        assert_eq!(ord.position(1), None);
    }
}
