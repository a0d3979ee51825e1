//! Logarithmic-round inference on trees and forests.
//!
//! Marginals come from repeatedly rewriting each variable's table in terms
//! of its grandparent. Evidence is handled by rerooting the tree at the
//! observed variable, reversing arcs in one round, and cutting the
//! observed variable off from its children.

mod evidence;
mod order;

pub use evidence::{absorb_finding, reverse_arcs, tree_posteriors, tree_posteriors_findings};
pub use order::{preorder, Ordering};

use std::marker::PhantomData;

use crate::engine::{run_observed, Engine, RoundProgram, RoundStats, Step};
use crate::error::{Error, Result};
use crate::model::{audit_intermediate, BayesNet, Cpt, Marginals};
use crate::scalar::Probability;

/// Per-variable state carried between rounds.
#[derive(Debug, Clone)]
pub(crate) struct NodeCell<T> {
    pub cpt: Cpt<T>,
    pub done: bool,
}

pub(crate) fn cells_of<T: Probability>(net: &BayesNet<T>) -> Vec<NodeCell<T>> {
    net.cpts()
        .iter()
        .map(|cpt| NodeCell {
            cpt: cpt.clone(),
            done: cpt.is_marginal(),
        })
        .collect()
}

pub(crate) fn net_from_cells<T: Probability>(
    ranges: &[usize],
    cells: &[NodeCell<T>],
) -> Result<BayesNet<T>> {
    let mut net = BayesNet::new(
        ranges.to_vec(),
        cells.iter().map(|c| c.cpt.clone()).collect(),
    )?;
    net.set_done_flags(cells.iter().map(|c| c.done).collect());
    Ok(net)
}

pub(crate) fn audit_cells<T: Probability>(ranges: &[usize], cells: &[NodeCell<T>]) -> Result<()> {
    audit_intermediate(&net_from_cells(ranges, cells)?)
}

pub(crate) fn require_forest<T: Probability>(
    net: &BayesNet<T>,
    algorithm: &'static str,
) -> Result<()> {
    match (0..net.len()).find(|&v| net.parents(v).len() > 1) {
        None => Ok(()),
        Some(v) => Err(Error::TopologyMismatch {
            algorithm,
            required: "tree or forest",
            found: format!("variable {} has {} parents", v + 1, net.parents(v).len()),
        }),
    }
}

struct GrandparentJump<T>(PhantomData<T>);

impl<T: Probability> RoundProgram for GrandparentJump<T> {
    type Cell = NodeCell<T>;

    fn is_active(&self, v: usize, cells: &[NodeCell<T>]) -> bool {
        !cells[v].done
    }

    fn step(&self, _: usize, v: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        let me = &snap[v];
        let p = me.cpt.conditioners()[0];
        let (cpt, work) = me.cpt.compose_through(&snap[p].cpt);
        let cell = NodeCell {
            cpt,
            done: snap[p].done,
        };
        Ok(Step::write(v, cell, work))
    }
}

/// Marginal of every variable of a tree or forest.
pub fn tree_marginals<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    let (m, stats, _) = tree_marginals_traced(net, engine)?;
    Ok((m, stats))
}

/// Like [`tree_marginals`], also returning the done flags after every
/// round (entry 0 is the initial state).
pub fn tree_marginals_traced<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats, Vec<Vec<bool>>)> {
    require_forest(net, "tree")?;
    let cells = cells_of(net);
    let mut trace = vec![cells.iter().map(|c| c.done).collect::<Vec<_>>()];
    let (cells, stats) = run_observed(
        cells,
        &GrandparentJump(PhantomData),
        engine,
        |_, cells: &[NodeCell<T>]| {
            trace.push(cells.iter().map(|c| c.done).collect());
            if engine.audit {
                audit_cells(net.ranges(), cells)?;
            }
            Ok(())
        },
    )?;
    let marginals = cells.into_iter().map(|c| c.cpt.into_entries()).collect();
    Ok((marginals, stats, trace))
}
