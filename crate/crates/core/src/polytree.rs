//! Logarithmic-round marginals on polytrees, and polytree evidence via a
//! family cluster tree.
//!
//! Each round has two snapshot-isolated phases. First every variable sums
//! out its finished parents against their marginals. Then every variable
//! left with a single conditioner rewrites itself through that
//! conditioner's table, inheriting the conditioner's own parents.

use std::marker::PhantomData;

use crate::cluster::{self, ClusterPolytree};
use crate::engine::{run_observed, Engine, RoundProgram, RoundStats, Step};
use crate::error::{Error, Result};
use crate::model::{skeleton_is_forest, BayesNet, Evidence, Marginals};
use crate::scalar::Probability;
use crate::tree::{audit_cells, cells_of, NodeCell};

/// Runtime ceiling on the conditioner count of any intermediate table.
pub const MAX_CONDITIONERS: usize = 12;

struct AbsorbAndJump<T>(PhantomData<T>);

impl<T: Probability> AbsorbAndJump<T> {
    fn absorb(v: usize, snap: &[NodeCell<T>]) -> Step<NodeCell<T>> {
        let cpt = &snap[v].cpt;
        let finished: Vec<(usize, &[T])> = cpt
            .conditioners()
            .iter()
            .filter(|&&c| snap[c].done)
            .map(|&c| (c, snap[c].cpt.entries()))
            .collect();
        if finished.is_empty() {
            return Step::idle();
        }
        let (cpt, work) = cpt.absorb_conditioners(&finished);
        let done = cpt.is_marginal();
        Step::write(v, NodeCell { cpt, done }, work)
    }

    fn jump(v: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        let me = &snap[v];
        if me.done || me.cpt.conditioners().len() != 1 {
            return Ok(Step::idle());
        }
        let p = me.cpt.conditioners()[0];
        let (cpt, work) = me.cpt.compose_through(&snap[p].cpt);
        if cpt.conditioners().len() > MAX_CONDITIONERS {
            return Err(Error::ConditionerCap {
                variable: v,
                count: cpt.conditioners().len(),
                cap: MAX_CONDITIONERS,
            });
        }
        let done = cpt.is_marginal();
        Ok(Step::write(v, NodeCell { cpt, done }, work))
    }
}

impl<T: Probability> RoundProgram for AbsorbAndJump<T> {
    type Cell = NodeCell<T>;

    fn phases(&self) -> usize {
        2
    }

    fn is_active(&self, v: usize, cells: &[NodeCell<T>]) -> bool {
        !cells[v].done
    }

    fn step(&self, phase: usize, v: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        match phase {
            0 => Ok(Self::absorb(v, snap)),
            _ => Self::jump(v, snap),
        }
    }
}

/// Counts of finished variables (`roots`), single-conditioner variables
/// (`trees`) and multi-conditioner variables (`polys`) among a variable and
/// its current ancestors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AncestryCounts {
    pub roots: usize,
    pub trees: usize,
    pub polys: usize,
}

impl AncestryCounts {
    pub fn active(&self) -> usize {
        self.trees + self.polys
    }

    pub fn total(&self) -> usize {
        self.roots + self.trees + self.polys
    }
}

/// Ancestral-subnetwork counts of every variable after every round. Entry 0
/// is the initial network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AncestryTrace {
    pub rounds: Vec<Vec<AncestryCounts>>,
    /// Largest conditioner set in the network after each round.
    pub widest: Vec<usize>,
}

impl AncestryTrace {
    fn record<T: Probability>(&mut self, cells: &[NodeCell<T>]) {
        let n = cells.len();
        let mut counts = Vec::with_capacity(n);
        let mut seen = vec![usize::MAX; n];
        for v in 0..n {
            let mut c = AncestryCounts::default();
            let mut stack = vec![v];
            seen[v] = v;
            while let Some(u) = stack.pop() {
                let conds = cells[u].cpt.conditioners();
                match conds.len() {
                    0 => c.roots += 1,
                    1 => c.trees += 1,
                    _ => c.polys += 1,
                }
                for &p in conds {
                    if seen[p] != v {
                        seen[p] = v;
                        stack.push(p);
                    }
                }
            }
            counts.push(c);
        }
        self.rounds.push(counts);
        self.widest.push(
            cells
                .iter()
                .map(|c| c.cpt.conditioners().len())
                .max()
                .unwrap_or(0),
        );
    }

    /// First `(round, variable)` where the multi-conditioner count exceeds
    /// the finished count.
    pub fn poly_excess(&self) -> Option<(usize, usize)> {
        self.rounds.iter().enumerate().find_map(|(t, counts)| {
            counts
                .iter()
                .position(|c| c.polys > c.roots)
                .map(|v| (t, v))
        })
    }

    /// First `(round, variable)` whose active count exceeds half, rounded
    /// up, of its whole ancestral subnetwork one round earlier.
    pub fn halving_violation(&self) -> Option<(usize, usize)> {
        self.find(|prev, now| now.active() > prev.total().div_ceil(2))
    }

    /// Like [`Self::halving_violation`] but against the previous active
    /// count rather than the previous total.
    pub fn strict_halving_violation(&self) -> Option<(usize, usize)> {
        self.find(|prev, now| now.active() > prev.active().div_ceil(2))
    }

    fn find(
        &self,
        bad: impl Fn(&AncestryCounts, &AncestryCounts) -> bool,
    ) -> Option<(usize, usize)> {
        self.rounds.windows(2).enumerate().find_map(|(t, w)| {
            w[1].iter()
                .zip(&w[0])
                .position(|(now, prev)| bad(prev, now))
                .map(|v| (t + 1, v))
        })
    }
}

fn require_polyforest<T: Probability>(net: &BayesNet<T>, algorithm: &'static str) -> Result<()> {
    if skeleton_is_forest(net) {
        Ok(())
    } else {
        Err(Error::TopologyMismatch {
            algorithm,
            required: "polytree",
            found: "the skeleton has a cycle".into(),
        })
    }
}

/// Marginal of every variable of a polytree (or polyforest).
pub fn polytree_marginals<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    run_marginals(net, engine, None)
}

/// Like [`polytree_marginals`], also recording ancestral-subnetwork counts
/// after every round.
pub fn polytree_marginals_traced<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats, AncestryTrace)> {
    let mut trace = AncestryTrace::default();
    let (m, stats) = run_marginals(net, engine, Some(&mut trace))?;
    Ok((m, stats, trace))
}

fn run_marginals<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
    mut trace: Option<&mut AncestryTrace>,
) -> Result<(Marginals<T>, RoundStats)> {
    require_polyforest(net, "polytree")?;
    let cells = cells_of(net);
    if let Some(t) = trace.as_deref_mut() {
        t.record(&cells);
    }
    let (cells, stats) = run_observed(
        cells,
        &AbsorbAndJump(PhantomData),
        engine,
        |_, cells: &[NodeCell<T>]| {
            if let Some(t) = trace.as_deref_mut() {
                t.record(cells);
            }
            if engine.audit {
                audit_cells(net.ranges(), cells)?;
            }
            Ok(())
        },
    )?;
    let marginals = cells.into_iter().map(|c| c.cpt.into_entries()).collect();
    Ok((marginals, stats))
}

/// Posterior marginals of a polytree given point evidence, computed on the
/// tree of family clusters.
pub fn polytree_posteriors<T: Probability>(
    net: &BayesNet<T>,
    evidence: &Evidence,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    evidence.check(net)?;
    let (tree, mut stats) = family_cluster_tree(net, engine)?;
    let (post, s) = cluster::posteriors(&tree, net, evidence, engine)?;
    stats.absorb(&s);
    Ok((post, stats))
}

/// Cluster tree with one cluster per variable and its parents, linked
/// through single-variable separators.
pub fn family_cluster_tree<T: Probability>(
    net: &BayesNet<T>,
    engine: &Engine,
) -> Result<(ClusterPolytree<T>, RoundStats)> {
    require_polyforest(net, "polytree")?;
    let (marginals, stats) = polytree_marginals(net, engine)?;
    let n = net.len();
    let mut clusters = Vec::new();
    let mut joints = Vec::new();
    let mut family_of = vec![None; n];
    for (v, slot) in family_of.iter_mut().enumerate() {
        if !net.parents(v).is_empty() || net.children(v).is_empty() {
            let (vars, joint) = cluster::family_joint(net, &marginals, v)?;
            *slot = Some(clusters.len());
            clusters.push(vars);
            joints.push(joint);
        }
    }
    // Every cluster holding v, chained through a separator on v.
    let mut links = Vec::new();
    for v in 0..n {
        let holders: Vec<usize> = family_of[v]
            .into_iter()
            .chain(net.children(v).iter().filter_map(|&c| family_of[c]))
            .collect();
        for pair in holders.windows(2) {
            links.push((pair[0], pair[1], vec![v]));
        }
    }
    let tree = ClusterPolytree::from_marginals(net.ranges(), clusters, joints, &links)?;
    Ok((tree, stats))
}
