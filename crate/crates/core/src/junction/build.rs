//! Clique tree construction from a triangulated moral graph.

use crate::cluster::{check_table_size, states_of, Cluster, ClusterKind, ClusterPolytree};
use crate::error::{Error, Result};
use crate::model::BayesNet;
use crate::scalar::Probability;

use super::graph::{is_permutation, positions, UGraph};

/// Builds the directed clique tree of `net` from the triangulation
/// `filled` of its moral graph under `alpha`.
///
/// `alpha` must list parents before children and `filled` must make every
/// variable's earlier neighbourhood complete. Cliques are the maximal
/// elimination sets, ordered by their earliest variable; each non-root
/// clique hangs below a separator holding its intersection with its parent
/// clique. A clique's table is the product of the tables of the variables
/// it introduces, conditioned on its separator.
pub fn build_cluster_polytree<T: Probability>(
    net: &BayesNet<T>,
    filled: &UGraph,
    alpha: &[usize],
) -> Result<ClusterPolytree<T>> {
    let n = net.len();
    if filled.len() != n || !is_permutation(alpha, n) {
        return Err(Error::IncompatibleOrdering(
            "ordering is not a permutation of the variables".into(),
        ));
    }
    let pos = positions(alpha);
    if let Some((p, c)) = net.edges().into_iter().find(|&(p, c)| pos[p] > pos[c]) {
        return Err(Error::IncompatibleOrdering(format!(
            "parent {} comes after child {}",
            p + 1,
            c + 1
        )));
    }

    // Elimination set of v: v with its earlier neighbours.
    let mut elim: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut set: Vec<usize> = filled
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] < pos[v])
            .collect();
        if !filled.is_complete(&set) {
            return Err(Error::NotChordal(format!(
                "earlier neighbours of variable {} are not pairwise adjacent",
                v + 1
            )));
        }
        if let Some(p) = net.parents(v).iter().find(|p| !set.contains(p)) {
            return Err(Error::NotChordal(format!(
                "parent {} of variable {} is not adjacent to it",
                p + 1,
                v + 1
            )));
        }
        set.push(v);
        set.sort_unstable();
        elim.push(set);
    }
    let up: Vec<Option<usize>> = (0..n)
        .map(|v| {
            elim[v]
                .iter()
                .copied()
                .filter(|&u| u != v)
                .max_by_key(|&u| pos[u])
        })
        .collect();

    // A set contained in a child's set joins that child's clique.
    let mut rep: Vec<usize> = (0..n).collect();
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, u) in up.iter().enumerate() {
        if let Some(u) = *u {
            kids[u].push(v);
        }
    }
    for &v in alpha.iter().rev() {
        if let Some(&c) = kids[v]
            .iter()
            .filter(|&&c| elim[c].len() == elim[v].len() + 1)
            .min()
        {
            rep[v] = rep[c];
        }
    }
    // Earliest member of each clique; cliques ordered by it.
    let mut top_of = vec![usize::MAX; n];
    for &v in alpha.iter().rev() {
        top_of[rep[v]] = v;
    }
    let mut tops: Vec<usize> = (0..n).filter(|&v| rep[v] == v).map(|v| top_of[v]).collect();
    tops.sort_by_key(|&t| pos[t]);

    let mut clusters = Vec::new();
    let mut parent = Vec::new();
    let mut clique_id = vec![usize::MAX; n];
    let mut separator_vars = Vec::new();
    for &top in &tops {
        let r = rep[top];
        let sep: Vec<usize> = elim[top].iter().copied().filter(|&u| u != top).collect();
        let above = up[top].map(|u| clique_id[rep[u]]);
        match above {
            Some(k) => {
                clusters.push(Cluster {
                    kind: ClusterKind::Separator,
                    vars: sep.clone(),
                });
                parent.push(Some(k));
                parent.push(Some(clusters.len() - 1));
            }
            None => parent.push(None),
        }
        clique_id[r] = clusters.len();
        clusters.push(Cluster {
            kind: ClusterKind::Clique,
            vars: elim[r].clone(),
        });
        separator_vars.push(sep);
    }

    let ranges = net.ranges();
    let mut entries = Vec::with_capacity(clusters.len());
    let mut cliques_seen = 0;
    for k in 0..clusters.len() {
        let node = &clusters[k];
        let parent_node = parent[k].map(|p| &clusters[p]);
        let table = match node.kind {
            ClusterKind::Separator => {
                let p = parent_node.expect("separator has a parent clique");
                selection_table(&node.vars, &p.vars, ranges)?
            }
            ClusterKind::Clique => {
                let sep = &separator_vars[cliques_seen];
                cliques_seen += 1;
                let residual: Vec<usize> = node
                    .vars
                    .iter()
                    .copied()
                    .filter(|v| !sep.contains(v))
                    .collect();
                clique_table(net, &node.vars, sep, &residual)?
            }
        };
        entries.push(table);
    }
    let tree = ClusterPolytree::assemble(clusters, parent, entries, ranges)?;
    for (k, cpt) in tree.network().cpts().iter().enumerate() {
        if let Some(sum) = cpt
            .row_sums()
            .iter()
            .map(|s| s.as_f64())
            .find(|s| (s - 1.0).abs() > T::normalization_tol())
        {
            return Err(Error::Shape(format!(
                "cluster {} table has a row summing to {sum}",
                k + 1
            )));
        }
    }
    Ok(tree)
}

/// Deterministic table of `child` (a subset of `parent`) given `parent`.
fn selection_table<T: Probability>(
    child: &[usize],
    parent: &[usize],
    ranges: &[usize],
) -> Result<Vec<T>> {
    let cr = states_of(child, ranges)?;
    let pr = states_of(parent, ranges)?;
    check_table_size(cr.size(), pr.size())?;
    let at: Vec<usize> = child
        .iter()
        .map(|v| parent.iter().position(|u| u == v).expect("subset"))
        .collect();
    let mut entries = vec![T::zero(); cr.size() * pr.size()];
    let mut digits = vec![0; parent.len()];
    let mut sub = vec![0; child.len()];
    for y in 0..pr.size() {
        let mut idx = y;
        pr.decode_into(&mut idx, &mut digits);
        for (d, &k) in sub.iter_mut().zip(&at) {
            *d = digits[k];
        }
        entries[y * cr.size() + cr.encode(&sub)] = T::one();
    }
    Ok(entries)
}

/// `Pr(clique | separator)` as the product of the introduced variables'
/// tables, zero where the clique state disagrees with the separator.
fn clique_table<T: Probability>(
    net: &BayesNet<T>,
    vars: &[usize],
    sep: &[usize],
    residual: &[usize],
) -> Result<Vec<T>> {
    let ranges = net.ranges();
    let kr = states_of(vars, ranges)?;
    let sr = states_of(sep, ranges)?;
    check_table_size(kr.size(), sr.size())?;
    let at = |v: &usize| vars.iter().position(|u| u == v).expect("member");
    let sep_at: Vec<usize> = sep.iter().map(at).collect();
    let factors: Vec<(usize, Vec<usize>)> = residual
        .iter()
        .map(|&v| (at(&v), net.parents(v).iter().map(at).collect()))
        .collect();
    let rows = kr.size();
    let mut entries = vec![T::zero(); rows * sr.size()];
    let mut digits = vec![0; vars.len()];
    let mut sub = vec![0; sep.len()];
    let mut cond = Vec::new();
    for x in 0..rows {
        let mut idx = x;
        kr.decode_into(&mut idx, &mut digits);
        for (d, &k) in sub.iter_mut().zip(&sep_at) {
            *d = digits[k];
        }
        let mut p = T::one();
        for (&v, (child_at, parent_at)) in residual.iter().zip(&factors) {
            let cpt = net.cpt(v);
            cond.clear();
            cond.extend(parent_at.iter().map(|&k| digits[k]));
            p = p * cpt
                .entry(digits[*child_at], cpt.radix().encode(&cond))
                .clone();
        }
        entries[sr.encode(&sub) * rows + x] = p;
    }
    Ok(entries)
}
