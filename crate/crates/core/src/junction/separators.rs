//! Marginals of a clique tree computed over its separators only.
//!
//! Each separator is first rewritten in terms of the separator above its
//! parent clique. The resulting network of separators is solved by pointer
//! jumping, and every clique then needs one local step against its own
//! separator.

use std::marker::PhantomData;

use crate::cluster::{ClusterKind, ClusterPolytree};
use crate::engine::{run_single, Engine, RoundProgram, RoundStats, Step};
use crate::error::Result;
use crate::model::{BayesNet, Cpt, Marginals};
use crate::scalar::Probability;
use crate::tree::{tree_marginals, NodeCell};

/// Rewrites each selected cluster through its parent's table.
struct ComposeSelected<T> {
    selected: Vec<bool>,
    _scalar: PhantomData<T>,
}

impl<T: Probability> RoundProgram for ComposeSelected<T> {
    type Cell = NodeCell<T>;

    fn is_active(&self, k: usize, _: &[NodeCell<T>]) -> bool {
        self.selected[k]
    }

    fn step(&self, _: usize, k: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        let p = snap[k].cpt.conditioners()[0];
        let (cpt, work) = snap[k].cpt.compose_through(&snap[p].cpt);
        let done = cpt.is_marginal();
        Ok(Step::write(k, NodeCell { cpt, done }, work))
    }
}

/// Marginal of every cluster, computed by jumping over separators.
pub fn separator_marginals<T: Probability>(
    tree: &ClusterPolytree<T>,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    let net = tree.network();
    let m = tree.len();
    let is_sep: Vec<bool> = tree
        .clusters()
        .iter()
        .map(|s| s.kind == ClusterKind::Separator)
        .collect();
    let cells: Vec<NodeCell<T>> = net
        .cpts()
        .iter()
        .map(|cpt| NodeCell {
            cpt: cpt.clone(),
            done: cpt.is_marginal(),
        })
        .collect();
    let selected = |want_sep: bool| ComposeSelected {
        selected: (0..m)
            .map(|k| is_sep[k] == want_sep && tree.parent(k).is_some())
            .collect(),
        _scalar: PhantomData,
    };
    let (cells, mut stats) = run_single(cells, &selected(true), engine)?;

    let seps: Vec<usize> = (0..m).filter(|&k| is_sep[k]).collect();
    let mut local = vec![usize::MAX; m];
    for (i, &k) in seps.iter().enumerate() {
        local[k] = i;
    }
    let sep_cpts = seps
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let cpt = &cells[k].cpt;
            let cond: Vec<usize> = cpt.conditioners().iter().map(|&s| local[s]).collect();
            Cpt::new(
                i,
                cpt.child_range(),
                cond,
                cpt.conditioner_ranges().to_vec(),
                cpt.entries().to_vec(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let sep_net = BayesNet::new(seps.iter().map(|&k| net.range(k)).collect(), sep_cpts)?;
    let (sep_marginals, s) = tree_marginals(&sep_net, engine)?;
    stats.absorb(&s);

    let mut cells = cells;
    for (&k, marg) in seps.iter().zip(sep_marginals) {
        cells[k] = NodeCell {
            cpt: Cpt::marginal(k, marg),
            done: true,
        };
    }
    let (cells, s) = run_single(cells, &selected(false), engine)?;
    stats.absorb(&s);
    Ok((
        cells.into_iter().map(|c| c.cpt.into_entries()).collect(),
        stats,
    ))
}
