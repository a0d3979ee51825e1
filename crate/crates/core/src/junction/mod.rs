//! Inference on multiply-connected networks through a directed clique
//! tree.
//!
//! The moral graph is triangulated under an ordering that lists parents
//! before children, cliques are read off the elimination sets, and the
//! resulting tree of cliques and separators is handed to the tree
//! algorithms as a network over compound variables.

mod build;
mod graph;
mod separators;

pub use build::build_cluster_polytree;
pub use graph::{
    choose_dag_ordering, choose_ordering, fill_in, induced_width, is_chordal, moralize, UGraph,
};
pub use separators::separator_marginals;

use crate::cluster::{self, ClusterKind, ClusterPolytree};
use crate::engine::{Engine, RoundStats};
use crate::error::Result;
use crate::model::{BayesNet, Evidence, Marginals};
use crate::scalar::Probability;

/// Clique tree with the ordering and triangulation it came from.
#[derive(Debug, Clone)]
pub struct JunctionTree<T> {
    pub ordering: Vec<usize>,
    pub triangulated: UGraph,
    pub tree: ClusterPolytree<T>,
}

/// Moralizes, orders, triangulates and builds the clique tree.
pub fn junction_tree<T: Probability>(net: &BayesNet<T>) -> Result<JunctionTree<T>> {
    let moral = moralize(net);
    let ordering = choose_dag_ordering(net, &moral);
    let triangulated = fill_in(&moral, &ordering);
    let tree = build_cluster_polytree(net, &triangulated, &ordering)?;
    Ok(JunctionTree {
        ordering,
        triangulated,
        tree,
    })
}

/// Posterior marginals of any network given point evidence.
pub fn junction_posteriors<T: Probability>(
    net: &BayesNet<T>,
    evidence: &Evidence,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    evidence.check(net)?;
    let jt = junction_tree(net)?;
    cluster::posteriors(&jt.tree, net, evidence, engine)
}

/// Whether every clique's overlap with all earlier cliques lies inside its
/// parent clique, and every separator is exactly the overlap of the two
/// cliques it joins.
pub fn running_intersection_holds<T: Probability>(tree: &ClusterPolytree<T>) -> bool {
    let nodes = tree.clusters();
    let mut seen: Vec<usize> = Vec::new();
    for (k, node) in nodes.iter().enumerate() {
        match node.kind {
            ClusterKind::Separator => {
                let Some(p) = tree.parent(k) else {
                    return false;
                };
                let kids = tree.children(k);
                if nodes[p].kind != ClusterKind::Clique || kids.len() != 1 {
                    return false;
                }
                let c = kids[0];
                let overlap: Vec<usize> = nodes[c]
                    .vars
                    .iter()
                    .copied()
                    .filter(|v| nodes[p].vars.contains(v))
                    .collect();
                if nodes[c].kind != ClusterKind::Clique || overlap != node.vars {
                    return false;
                }
            }
            ClusterKind::Clique => {
                let earlier: Vec<usize> = node
                    .vars
                    .iter()
                    .copied()
                    .filter(|v| seen.contains(v))
                    .collect();
                let inside_parent = match tree.parent(k).and_then(|s| tree.parent(s)) {
                    Some(pc) => earlier.iter().all(|v| nodes[pc].vars.contains(v)),
                    None => earlier.is_empty(),
                };
                if !inside_parent {
                    return false;
                }
                seen.extend(&node.vars);
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::topology_class;
    use crate::oracle;
    use crate::scalar::max_abs_diff;

    fn diamond() -> BayesNet<f64> {
        BayesNet::from_tables(
            vec![2; 4],
            vec![vec![], vec![0], vec![0], vec![1, 2]],
            vec![
                vec![0.6, 0.4],
                vec![0.7, 0.3, 0.2, 0.8],
                vec![0.9, 0.1, 0.4, 0.6],
                vec![0.99, 0.01, 0.3, 0.7, 0.2, 0.8, 0.05, 0.95],
            ],
        )
        .unwrap()
    }

    fn assert_matches_oracle(net: &BayesNet<f64>, ev: &Evidence) {
        for e in [Engine::sequential().audited(), Engine::parallel()] {
            let (m, _) = junction_posteriors(net, ev, &e).unwrap();
            for (a, b) in m.iter().zip(&oracle::posteriors(net, ev).unwrap()) {
                assert!(max_abs_diff(a, b) < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn diamond_has_two_triangles() {
        let jt = junction_tree(&diamond()).unwrap();
        let vars: Vec<Vec<usize>> = jt.tree.clusters().iter().map(|s| s.vars.clone()).collect();
        assert_eq!(vars, vec![vec![0, 1, 2], vec![1, 2], vec![1, 2, 3]]);
        assert_eq!(jt.tree.width(), 3);
        assert_eq!(jt.tree.separator_size(), 2);
        assert!(running_intersection_holds(&jt.tree));
        assert!(is_chordal(&jt.triangulated));
        assert!(topology_class(jt.tree.network()).is_ok());
    }

    #[test]
    fn diamond_posteriors() {
        let net = diamond();
        assert_matches_oracle(&net, &Evidence::new(vec![(3, 1)]));
        assert_matches_oracle(&net, &Evidence::new(vec![(3, 0), (1, 1)]));
        assert_matches_oracle(&net, &Evidence::empty());
    }

    #[test]
    fn chain_cliques_are_edges() {
        let net = crate::tree::fixtures::chain(5);
        let jt = junction_tree(&net).unwrap();
        let cliques: Vec<Vec<usize>> = jt
            .tree
            .clusters()
            .iter()
            .filter(|s| s.kind == ClusterKind::Clique)
            .map(|s| s.vars.clone())
            .collect();
        assert_eq!(
            cliques,
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4]]
        );
        assert_eq!(jt.tree.separator_size(), 1);
    }

    /// The ordering that would put the child 3 of {1, 2} ahead of its
    /// parent in an unconstrained elimination.
    #[test]
    fn unconstrained_order_pitfall_is_avoided() {
        let net = BayesNet::from_tables(
            vec![2; 4],
            vec![vec![], vec![0], vec![1], vec![0, 1]],
            vec![
                vec![0.3, 0.7],
                vec![0.6, 0.4, 0.1, 0.9],
                vec![0.5, 0.5, 0.8, 0.2],
                vec![0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.2, 0.8],
            ],
        )
        .unwrap();
        assert_matches_oracle(&net, &Evidence::new(vec![(2, 1), (3, 0)]));
    }

    #[test]
    fn incompatible_ordering_is_rejected() {
        let net = diamond();
        let g = moralize(&net);
        let alpha = [3, 2, 1, 0];
        let h = fill_in(&g, &alpha);
        assert!(matches!(
            build_cluster_polytree(&net, &h, &alpha),
            Err(crate::Error::IncompatibleOrdering(_))
        ));
        assert!(build_cluster_polytree(&net, &g, &[0, 1, 2, 3]).is_ok());
    }

    #[test]
    fn non_chordal_input_is_rejected() {
        // 4-cycle skeleton without its chord
        let net = BayesNet::from_tables(
            vec![2; 4],
            vec![vec![], vec![0], vec![0], vec![1, 2]],
            vec![vec![0.5; 2], vec![0.5; 4], vec![0.5; 4], vec![0.5; 8]],
        )
        .unwrap();
        let g = UGraph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert!(matches!(
            build_cluster_polytree(&net, &g, &[0, 1, 2, 3]),
            Err(crate::Error::NotChordal(_))
        ));
    }
}
