//! Directed trees of variable clusters.
//!
//! A cluster polytree is itself a Bayesian network with one compound
//! variable per cluster, so the tree algorithms run on it unchanged.
//! Clique clusters alternate with separator clusters holding the
//! variables two adjacent cliques share.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, RoundStats};
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::model::{BayesNet, Cpt, Evidence, Finding, Marginals};
use crate::scalar::Probability;
use crate::tree::tree_posteriors_findings;

/// Largest state count of a single cluster.
pub const MAX_CLUSTER_STATES: usize = 1 << 24;
/// Largest entry count of a single cluster table.
pub const MAX_TABLE_ENTRIES: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    Clique,
    Separator,
}

/// A cluster of original variables, listed ascending. Its compound states
/// use the mixed radix of those variables, first variable most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub kind: ClusterKind,
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPolytree<T> {
    clusters: Vec<Cluster>,
    radices: Vec<MixedRadix>,
    network: BayesNet<T>,
}

pub(crate) fn states_of(vars: &[usize], ranges: &[usize]) -> Result<MixedRadix> {
    let mut size = 1usize;
    for &v in vars {
        size = size
            .checked_mul(ranges[v])
            .filter(|&s| s <= MAX_CLUSTER_STATES)
            .ok_or_else(|| {
                Error::Intractable(format!(
                    "cluster of {} variables exceeds {MAX_CLUSTER_STATES} states",
                    vars.len()
                ))
            })?;
    }
    Ok(MixedRadix::new(vars.iter().map(|&v| ranges[v]).collect()))
}

pub(crate) fn check_table_size(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(e) if e <= MAX_TABLE_ENTRIES => Ok(()),
        _ => Err(Error::Intractable(format!(
            "cluster table exceeds {MAX_TABLE_ENTRIES} entries"
        ))),
    }
}

/// For each variable of `sub`, its position in `sup`.
fn positions_in(sub: &[usize], sup: &[usize]) -> Vec<usize> {
    sub.iter()
        .map(|v| sup.iter().position(|u| u == v).expect("subset"))
        .collect()
}

/// Joint of a variable and its parents, `Pr(v | pa) * prod Pr(p)`, over
/// the family listed ascending. Exact when the parents are independent.
pub(crate) fn family_joint<T: Probability>(
    net: &BayesNet<T>,
    marginals: &[Vec<T>],
    child: usize,
) -> Result<(Vec<usize>, Vec<T>)> {
    let cpt = net.cpt(child);
    let mut vars = cpt.conditioners().to_vec();
    vars.push(child);
    vars.sort_unstable();
    let radix = states_of(&vars, net.ranges())?;
    let child_at = positions_in(&[child], &vars)[0];
    let cond_at = positions_in(cpt.conditioners(), &vars);
    let mut digits = vec![0; vars.len()];
    let mut cond = vec![0; cond_at.len()];
    let mut joint = Vec::with_capacity(radix.size());
    for s in 0..radix.size() {
        let mut idx = s;
        radix.decode_into(&mut idx, &mut digits);
        for (c, &k) in cond.iter_mut().zip(&cond_at) {
            *c = digits[k];
        }
        let mut p = cpt
            .entry(digits[child_at], cpt.radix().encode(&cond))
            .clone();
        for (&k, &pv) in cond_at.iter().zip(cpt.conditioners()) {
            p = p * marginals[pv][digits[k]].clone();
        }
        joint.push(p);
    }
    Ok((vars, joint))
}

/// Sums a distribution over `vars` down to one over `onto` (a subset).
pub(crate) fn project<T: Probability>(
    vars: &[usize],
    radix: &MixedRadix,
    dist: &[T],
    onto: &[usize],
    onto_radix: &MixedRadix,
) -> Vec<T> {
    let at = positions_in(onto, vars);
    let mut out = vec![T::zero(); onto_radix.size()];
    let mut digits = vec![0; vars.len()];
    let mut sub = vec![0; onto.len()];
    for (s, p) in dist.iter().enumerate() {
        let mut idx = s;
        radix.decode_into(&mut idx, &mut digits);
        for (d, &k) in sub.iter_mut().zip(&at) {
            *d = digits[k];
        }
        let t = onto_radix.encode(&sub);
        out[t] = out[t].clone() + p.clone();
    }
    out
}

impl<T: Probability> ClusterPolytree<T> {
    /// Assembles a tree from clusters listed parents-first and the flat
    /// entries of each cluster's table given its parent.
    pub(crate) fn assemble(
        clusters: Vec<Cluster>,
        parent: Vec<Option<usize>>,
        entries: Vec<Vec<T>>,
        ranges: &[usize],
    ) -> Result<Self> {
        let radices = clusters
            .iter()
            .map(|s| states_of(&s.vars, ranges))
            .collect::<Result<Vec<_>>>()?;
        let sizes: Vec<usize> = radices.iter().map(|r| r.size()).collect();
        let cpts = entries
            .into_iter()
            .enumerate()
            .map(|(k, e)| {
                let (cond, cond_ranges) = match parent[k] {
                    Some(p) => (vec![p], vec![sizes[p]]),
                    None => (vec![], vec![]),
                };
                Cpt::new(k, sizes[k], cond, cond_ranges, e)
            })
            .collect::<Result<Vec<_>>>()?;
        let network = BayesNet::new(sizes, cpts)?;
        Ok(ClusterPolytree {
            clusters,
            radices,
            network,
        })
    }

    /// Builds a tree from cluster joints. `links` joins two clusters
    /// through a separator on the listed variables. Each component is
    /// rooted at its lowest cluster and renumbered breadth-first; tables
    /// follow from the joints by Bayes' rule.
    pub(crate) fn from_marginals(
        ranges: &[usize],
        clusters: Vec<Vec<usize>>,
        joints: Vec<Vec<T>>,
        links: &[(usize, usize, Vec<usize>)],
    ) -> Result<Self> {
        let c = clusters.len();
        let mut nodes: Vec<Cluster> = clusters
            .into_iter()
            .map(|vars| Cluster {
                kind: ClusterKind::Clique,
                vars,
            })
            .collect();
        let mut adj = vec![Vec::new(); c + links.len()];
        for (i, (a, b, sep)) in links.iter().enumerate() {
            nodes.push(Cluster {
                kind: ClusterKind::Separator,
                vars: sep.clone(),
            });
            adj[*a].push(c + i);
            adj[*b].push(c + i);
            adj[c + i].extend([*a, *b]);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let radices = nodes
            .iter()
            .map(|s| states_of(&s.vars, ranges))
            .collect::<Result<Vec<_>>>()?;
        let mut joints: Vec<Vec<T>> = joints;
        for (i, (a, _, sep)) in links.iter().enumerate() {
            let j = project(
                &nodes[*a].vars,
                &radices[*a],
                &joints[*a],
                sep,
                &radices[c + i],
            );
            joints.push(j);
        }

        let total = nodes.len();
        let mut new_id = vec![usize::MAX; total];
        let mut old_of = Vec::with_capacity(total);
        let mut parent_old = vec![None; total];
        for start in 0..c {
            if new_id[start] != usize::MAX {
                continue;
            }
            new_id[start] = old_of.len();
            old_of.push(start);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if new_id[w] == usize::MAX {
                        new_id[w] = old_of.len();
                        old_of.push(w);
                        parent_old[w] = Some(u);
                        queue.push_back(w);
                    }
                }
            }
        }
        if old_of.len() != total {
            return Err(Error::Shape("separator not attached to a cluster".into()));
        }

        let mut clusters = Vec::with_capacity(total);
        let mut parent = Vec::with_capacity(total);
        let mut entries = Vec::with_capacity(total);
        for &old in &old_of {
            clusters.push(nodes[old].clone());
            parent.push(parent_old[old].map(|p| new_id[p]));
            entries.push(match parent_old[old] {
                None => joints[old].clone(),
                Some(p) => {
                    check_table_size(radices[old].size(), radices[p].size())?;
                    conditional_from_joints(
                        (&nodes[old].vars, &radices[old], &joints[old]),
                        (&nodes[p].vars, &radices[p], &joints[p]),
                    )
                }
            });
        }
        Self::assemble(clusters, parent, entries, ranges)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.network.parents(k).first().copied()
    }

    pub fn children(&self, k: usize) -> &[usize] {
        self.network.children(k)
    }

    /// The tree as a network over compound variables.
    pub fn network(&self) -> &BayesNet<T> {
        &self.network
    }

    pub fn states(&self, k: usize) -> &MixedRadix {
        &self.radices[k]
    }

    /// Largest clique size.
    pub fn width(&self) -> usize {
        self.max_size(ClusterKind::Clique)
    }

    /// Largest separator size.
    pub fn separator_size(&self) -> usize {
        self.max_size(ClusterKind::Separator)
    }

    fn max_size(&self, kind: ClusterKind) -> usize {
        self.clusters
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.vars.len())
            .max()
            .unwrap_or(0)
    }

    /// Lowest-indexed cluster containing `v`.
    pub fn containing(&self, v: usize) -> Option<usize> {
        self.clusters.iter().position(|s| s.vars.contains(&v))
    }

    /// Distribution of cluster `k` summed down to `v`.
    pub fn project_to(&self, k: usize, dist: &[T], v: usize, range: usize) -> Vec<T> {
        let onto = MixedRadix::new(vec![range]);
        project(&self.clusters[k].vars, &self.radices[k], dist, &[v], &onto)
    }

    /// Point evidence translated into cluster findings. Findings landing
    /// on the same cluster are merged.
    pub fn findings(&self, evidence: &Evidence) -> Result<Vec<Finding>> {
        let mut out: Vec<Finding> = Vec::new();
        for &(v, a) in evidence.items() {
            let k = self.containing(v).ok_or_else(|| {
                Error::InvalidEvidence(format!("variable {} is in no cluster", v + 1))
            })?;
            let at = positions_in(&[v], &self.clusters[k].vars)[0];
            let radix = &self.radices[k];
            let idx = match out.iter().position(|f| f.variable == k) {
                Some(i) => i,
                None => {
                    out.push(Finding {
                        variable: k,
                        allowed: vec![true; radix.size()],
                    });
                    out.len() - 1
                }
            };
            for (s, ok) in out[idx].allowed.iter_mut().enumerate() {
                *ok = *ok && radix.decode(s)[at] == a;
            }
        }
        Ok(out)
    }
}

/// Table of a child cluster given its parent from their joints. The
/// child's variables must contain the parent's or be contained in them.
fn conditional_from_joints<T: Probability>(
    child: (&[usize], &MixedRadix, &[T]),
    parent: (&[usize], &MixedRadix, &[T]),
) -> Vec<T> {
    let (cv, cr, cj) = child;
    let (pv, pr, pj) = parent;
    let rows = cr.size();
    let shared: Vec<(usize, usize)> = cv
        .iter()
        .enumerate()
        .filter_map(|(i, v)| pv.iter().position(|u| u == v).map(|j| (i, j)))
        .collect();
    let child_within = shared.len() == cv.len();
    let mut entries = vec![T::zero(); rows * pr.size()];
    for y in 0..pr.size() {
        let yd = pr.decode(y);
        let row = &mut entries[y * rows..(y + 1) * rows];
        if !child_within && pj[y].is_zero() {
            row.iter_mut().for_each(|e| *e = T::uniform(rows));
            continue;
        }
        for (x, e) in row.iter_mut().enumerate() {
            let xd = cr.decode(x);
            if shared.iter().all(|&(i, j)| xd[i] == yd[j]) {
                *e = if child_within {
                    T::one()
                } else {
                    cj[x].clone() / pj[y].clone()
                };
            }
        }
    }
    entries
}

/// Posterior marginals of the original variables, computed on `tree` and
/// projected from each variable's lowest-indexed cluster.
pub fn posteriors<T: Probability>(
    tree: &ClusterPolytree<T>,
    net: &BayesNet<T>,
    evidence: &Evidence,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    evidence.check(net)?;
    let findings = tree.findings(evidence)?;
    let (post, stats) = tree_posteriors_findings(tree.network(), &findings, engine)?;
    let out = (0..net.len())
        .map(|v| {
            let k = tree.containing(v).ok_or_else(|| {
                Error::InvalidEvidence(format!("variable {} is in no cluster", v + 1))
            })?;
            Ok(tree.project_to(k, &post[k], v, net.range(v)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, stats))
}
