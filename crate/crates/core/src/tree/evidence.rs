//! Rerooting, evidence absorption, and the posterior driver for trees.

use crate::engine::{run_single, Engine, RoundProgram, RoundStats, Step};
use crate::error::{Error, Result};
use crate::model::{BayesNet, Cpt, Evidence, Finding, Marginals};
use crate::scalar::{Probability, IMPOSSIBLE_TOL};

use super::{
    audit_cells, cells_of, net_from_cells, preorder, require_forest, tree_marginals, NodeCell,
    Ordering,
};

struct Reverse<'a, T> {
    parent: Vec<Option<usize>>,
    ordering: &'a Ordering,
    marginals: &'a [Vec<T>],
}

impl<T: Probability> Reverse<'_, T> {
    /// Whether the arc into `v` points against the ordering.
    fn flips(&self, v: usize) -> Option<usize> {
        let p = self.parent[v]?;
        match (self.ordering.position(p), self.ordering.position(v)) {
            (Some(a), Some(b)) if a > b => Some(p),
            _ => None,
        }
    }
}

impl<T: Probability> RoundProgram for Reverse<'_, T> {
    type Cell = NodeCell<T>;

    fn is_active(&self, v: usize, _: &[NodeCell<T>]) -> bool {
        self.flips(v).is_some()
    }

    fn step(&self, _: usize, v: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        let mut step = Step::idle();
        let Some(p) = self.flips(v) else {
            return Ok(step);
        };
        let (cpt, work) = snap[v].cpt.reversed(&self.marginals[p]);
        step.writes.push((p, NodeCell { cpt, done: false }));
        step.work += work;
        if v == self.ordering.root() {
            let cpt = Cpt::marginal(v, self.marginals[v].clone());
            step.writes.push((v, NodeCell { cpt, done: false }));
        }
        Ok(step)
    }
}

/// Reverses, in one round, every arc of the component whose direction
/// disagrees with `ordering`. `marginals` must be the current marginals.
pub fn reverse_arcs<T: Probability>(
    net: &BayesNet<T>,
    ordering: &Ordering,
    marginals: &[Vec<T>],
    engine: &Engine,
) -> Result<(BayesNet<T>, RoundStats)> {
    require_forest(net, "reverse")?;
    if marginals.len() != net.len()
        || marginals
            .iter()
            .zip(net.ranges())
            .any(|(m, &r)| m.len() != r)
    {
        return Err(Error::MissingMarginals(
            "arc reversal needs one marginal per variable".into(),
        ));
    }
    let program = Reverse {
        parent: (0..net.len())
            .map(|v| net.parents(v).first().copied())
            .collect(),
        ordering,
        marginals,
    };
    let (cells, stats) = run_single(cells_of(net), &program, engine)?;
    if engine.audit {
        audit_cells(net.ranges(), &cells)?;
    }
    Ok((net_from_cells(net.ranges(), &cells)?, stats))
}

struct Absorb<T> {
    variable: usize,
    /// `Some(a)` for a point finding, which also cuts the outgoing arcs.
    point: Option<usize>,
    root_table: Cpt<T>,
}

impl<T: Probability> RoundProgram for Absorb<T> {
    type Cell = NodeCell<T>;

    fn is_active(&self, v: usize, cells: &[NodeCell<T>]) -> bool {
        v == self.variable
            || (self.point.is_some() && cells[v].cpt.conditioners().contains(&self.variable))
    }

    fn step(&self, _: usize, v: usize, snap: &[NodeCell<T>]) -> Result<Step<NodeCell<T>>> {
        if v == self.variable {
            let cell = NodeCell {
                cpt: self.root_table.clone(),
                done: false,
            };
            return Ok(Step::write(v, cell, 0));
        }
        let cpt = snap[v].cpt.slice(self.variable, self.point.expect("point"));
        let work = cpt.entries().len() as u64;
        Ok(Step::write(v, NodeCell { cpt, done: false }, work))
    }
}

/// Conditions a parentless variable on a finding in one round.
///
/// A point finding turns the variable into a point mass and its children
/// into tables sliced at the observed value. A set finding only restricts
/// and renormalizes the variable's own table.
pub fn absorb_finding<T: Probability>(
    net: &BayesNet<T>,
    finding: &Finding,
    engine: &Engine,
) -> Result<(BayesNet<T>, RoundStats)> {
    let v = finding.variable;
    if v >= net.len() || finding.allowed.len() != net.range(v) {
        return Err(Error::InvalidEvidence(format!(
            "finding does not match variable {}",
            v + 1
        )));
    }
    let cpt = net.cpt(v);
    if !cpt.is_marginal() {
        return Err(Error::InvalidEvidence(format!(
            "variable {} must be parentless to absorb a finding",
            v + 1
        )));
    }
    let impossible = || {
        Error::ImpossibleEvidence(format!(
            "finding on variable {} has probability zero",
            v + 1
        ))
    };
    let point = finding.as_point();
    let root_table = match point {
        Some(a) => {
            if cpt.entries()[a].as_f64() <= IMPOSSIBLE_TOL {
                return Err(impossible());
            }
            Cpt::point_mass(v, net.range(v), a)
        }
        None => cpt.restricted(&finding.allowed).ok_or_else(impossible)?,
    };
    let program = Absorb {
        variable: v,
        point,
        root_table,
    };
    let (cells, stats) = run_single(cells_of(net), &program, engine)?;
    if engine.audit {
        audit_cells(net.ranges(), &cells)?;
    }
    Ok((net_from_cells(net.ranges(), &cells)?, stats))
}

/// Posterior marginals of a tree or forest given point evidence.
pub fn tree_posteriors<T: Probability>(
    net: &BayesNet<T>,
    evidence: &Evidence,
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    evidence.check(net)?;
    tree_posteriors_findings(net, &evidence.findings(net), engine)
}

/// Posterior marginals given findings processed in order. Each finding
/// costs one marginal pass, one rerooting and one absorption round.
pub fn tree_posteriors_findings<T: Probability>(
    net: &BayesNet<T>,
    findings: &[Finding],
    engine: &Engine,
) -> Result<(Marginals<T>, RoundStats)> {
    require_forest(net, "tree")?;
    let mut current = net.clone();
    let mut stats = RoundStats::default();
    for finding in findings {
        let (marginals, s) = tree_marginals(&current, engine)?;
        stats.absorb(&s);
        let (ordering, s) = preorder(&current, finding.variable, engine)?;
        stats.absorb(&s);
        let (rerooted, s) = reverse_arcs(&current, &ordering, &marginals, engine)?;
        stats.absorb(&s);
        let (absorbed, s) = absorb_finding(&rerooted, finding, engine)?;
        stats.absorb(&s);
        current = absorbed;
    }
    let (marginals, s) = tree_marginals(&current, engine)?;
    stats.absorb(&s);
    Ok((marginals, stats))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::oracle;
    use crate::scalar::max_abs_diff;

    fn engines() -> [Engine; 2] {
        [Engine::sequential().audited(), Engine::parallel().audited()]
    }

    #[test]
    fn reroot_at_middle_of_chain() {
        let net = net_a();
        let e = Engine::sequential().audited();
        let (m, _) = tree_marginals(&net, &e).unwrap();
        let (ord, _) = preorder(&net, 1, &e).unwrap();
        let (rerooted, stats) = reverse_arcs(&net, &ord, &m, &e).unwrap();
        assert_eq!(stats.rounds, 1);
        assert!(rerooted.parents(1).is_empty());
        assert_eq!(rerooted.parents(0), &[1]);
        assert!((rerooted.cpt(0).entry(1, 1) - 0.84).abs() < 1e-12);
        assert!(oracle::joints_equal(&net, &rerooted, 1e-12).unwrap());
    }

    #[test]
    fn evidence_at_root() {
        for e in engines() {
            let ev = Evidence::new(vec![(0, 1)]);
            let (m, _) = tree_posteriors(&net_a(), &ev, &e).unwrap();
            assert!((m[1][1] - 0.7).abs() < 1e-12);
            assert_eq!(m[0], vec![0.0, 1.0]);
        }
    }

    #[test]
    fn evidence_in_middle() {
        let ev = Evidence::new(vec![(1, 1)]);
        let (m, _) = tree_posteriors(&net_a(), &ev, &Engine::parallel()).unwrap();
        assert!((m[0][1] - 0.84).abs() < 1e-12);
        assert!((m[2][1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn multiple_findings_match_oracle() {
        let net = star();
        let ev = Evidence::new(vec![(3, 0), (1, 1)]);
        let exact = oracle::posteriors(&net, &ev).unwrap();
        for e in engines() {
            let (m, _) = tree_posteriors(&net, &ev, &e).unwrap();
            for (a, b) in m.iter().zip(&exact) {
                assert!(max_abs_diff(a, b) < 1e-12);
            }
        }
    }

    #[test]
    fn impossible_evidence_is_reported() {
        let net = BayesNet::from_tables(
            vec![2, 2],
            vec![vec![], vec![0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0, 0.5, 0.5]],
        )
        .unwrap();
        let ev = Evidence::new(vec![(1, 1)]);
        assert!(matches!(
            tree_posteriors(&net, &ev, &Engine::sequential()),
            Err(Error::ImpossibleEvidence(_))
        ));
    }

    #[test]
    fn set_finding_restricts_root() {
        let net = BayesNet::from_tables(
            vec![3, 2],
            vec![vec![], vec![0]],
            vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.5, 0.5, 0.0, 1.0]],
        )
        .unwrap();
        let f = Finding {
            variable: 0,
            allowed: vec![false, true, true],
        };
        let (m, _): (Marginals<f64>, _) =
            tree_posteriors_findings(&net, &[f], &Engine::sequential()).unwrap();
        assert!((m[0][1] - 0.375).abs() < 1e-12);
        assert!((m[1][1] - (0.375 * 0.5 + 0.625)).abs() < 1e-12);
    }
}
