use std::fmt;

use serde::{Deserialize, Serialize};

use super::cpt::Cpt;
use crate::error::{Error, Result};
use crate::scalar::Probability;

/// Per-variable distributions, indexed by variable.
pub type Marginals<T> = Vec<Vec<T>>;

/// A discrete Bayesian network.
///
/// Variables are `0..n` internally. Each variable owns exactly one CPT whose
/// conditioner list is that variable's current parent list; children are
/// derived from the parent lists and kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet<T = f64> {
    ranges: Vec<usize>,
    cpts: Vec<Cpt<T>>,
    children: Vec<Vec<usize>>,
    done: Vec<bool>,
}

impl<T: Probability> BayesNet<T> {
    /// Builds a network from per-variable ranges and CPTs. Only shape is
    /// checked here; see [`crate::model::validate`] for semantic checks.
    pub fn new(ranges: Vec<usize>, cpts: Vec<Cpt<T>>) -> Result<Self> {
        let n = ranges.len();
        if cpts.len() != n {
            return Err(Error::Shape(format!(
                "{} variables but {} cpts",
                n,
                cpts.len()
            )));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            if cpt.child() != v {
                return Err(Error::Shape(format!(
                    "cpt at position {} belongs to variable {}",
                    v + 1,
                    cpt.child() + 1
                )));
            }
            if cpt.child_range() != ranges[v] {
                return Err(Error::Shape(format!(
                    "cpt for variable {} has child range {}, variable has {}",
                    v + 1,
                    cpt.child_range(),
                    ranges[v]
                )));
            }
            for (&c, &rc) in cpt.conditioners().iter().zip(cpt.conditioner_ranges()) {
                if c >= n {
                    return Err(Error::Shape(format!(
                        "variable {} has unknown parent {}",
                        v + 1,
                        c + 1
                    )));
                }
                if rc != ranges[c] {
                    return Err(Error::Shape(format!(
                        "cpt for variable {} gives parent {} range {}, expected {}",
                        v + 1,
                        c + 1,
                        rc,
                        ranges[c]
                    )));
                }
            }
        }
        let mut net = BayesNet {
            ranges,
            cpts,
            children: vec![Vec::new(); n],
            done: vec![false; n],
        };
        net.rebuild_children();
        Ok(net)
    }

    /// Convenience constructor from parent lists and flat entry vectors.
    pub fn from_tables(
        ranges: Vec<usize>,
        parents: Vec<Vec<usize>>,
        entries: Vec<Vec<T>>,
    ) -> Result<Self> {
        if parents.len() != ranges.len() || entries.len() != ranges.len() {
            return Err(Error::Shape(
                "ranges, parents and entries differ in length".into(),
            ));
        }
        let cpts = parents
            .into_iter()
            .zip(entries)
            .enumerate()
            .map(|(v, (pa, e))| {
                for &p in &pa {
                    if p >= ranges.len() {
                        return Err(Error::Shape(format!(
                            "variable {} has unknown parent {}",
                            v + 1,
                            p + 1
                        )));
                    }
                }
                let pr = pa.iter().map(|&p| ranges[p]).collect();
                Cpt::new(v, ranges[v], pa, pr, e)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ranges, cpts)
    }

    pub(crate) fn rebuild_children(&mut self) {
        for c in &mut self.children {
            c.clear();
        }
        for (v, cpt) in self.cpts.iter().enumerate() {
            for &p in cpt.conditioners() {
                self.children[p].push(v);
            }
        }
        for c in &mut self.children {
            c.sort_unstable();
            c.dedup();
        }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn ranges(&self) -> &[usize] {
        &self.ranges
    }

    pub fn range(&self, v: usize) -> usize {
        self.ranges[v]
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        self.cpts[v].conditioners()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn cpt(&self, v: usize) -> &Cpt<T> {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[Cpt<T>] {
        &self.cpts
    }

    pub fn is_done(&self, v: usize) -> bool {
        self.done[v]
    }

    pub fn done_flags(&self) -> &[bool] {
        &self.done
    }

    /// Replaces a CPT; the variable's parent list follows its conditioners.
    pub fn set_cpt(&mut self, cpt: Cpt<T>) {
        let v = cpt.child();
        self.cpts[v] = cpt;
        self.rebuild_children();
    }

    pub(crate) fn set_done_flags(&mut self, done: Vec<bool>) {
        assert_eq!(done.len(), self.len());
        self.done = done;
    }

    #[cfg(test)]
    pub(crate) fn cpts_mut(&mut self) -> &mut [Cpt<T>] {
        &mut self.cpts
    }

    /// Skeleton edges `(parent, child)` in child order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for v in 0..self.len() {
            for &p in self.parents(v) {
                edges.push((p, v));
            }
        }
        edges
    }

    /// Undirected neighbours, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut nb: Vec<usize> = self
            .parents(v)
            .iter()
            .chain(self.children(v))
            .copied()
            .collect();
        nb.sort_unstable();
        nb.dedup();
        nb
    }

    /// Same network over a different numeric type.
    pub fn map_scalar<U: Probability>(&self, f: impl Fn(&T) -> U) -> BayesNet<U> {
        BayesNet {
            ranges: self.ranges.clone(),
            cpts: self.cpts.iter().map(|c| c.map_scalar(&f)).collect(),
            children: self.children.clone(),
            done: self.done.clone(),
        }
    }

    /// Rescales every CPT row to sum exactly to one.
    pub fn normalize(&mut self) {
        for cpt in &mut self.cpts {
            cpt.normalize_rows();
        }
    }
}

/// Role of a variable given its current parent list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    Parentless,
    SingleParent,
    MultiParent,
}

impl NodeRole {
    pub fn from_parent_count(count: usize) -> Self {
        match count {
            0 => NodeRole::Parentless,
            1 => NodeRole::SingleParent,
            _ => NodeRole::MultiParent,
        }
    }
}

pub fn classify<T: Probability>(net: &BayesNet<T>) -> Vec<NodeRole> {
    (0..net.len())
        .map(|v| NodeRole::from_parent_count(net.parents(v).len()))
        .collect()
}

/// Most specific structural class of a connected network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyClass {
    Chain,
    Tree,
    Polytree,
    MultiplyConnected,
}

impl fmt::Display for TopologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TopologyClass::Chain => "chain",
            TopologyClass::Tree => "tree",
            TopologyClass::Polytree => "polytree",
            TopologyClass::MultiplyConnected => "multiply-connected",
        };
        f.write_str(s)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// True when the undirected skeleton has no cycle.
pub fn skeleton_is_forest<T: Probability>(net: &BayesNet<T>) -> bool {
    let mut sets = DisjointSets::new(net.len());
    net.edges().into_iter().all(|(p, c)| sets.union(p, c))
}

pub fn is_connected<T: Probability>(net: &BayesNet<T>) -> bool {
    let mut sets = DisjointSets::new(net.len());
    for (p, c) in net.edges() {
        sets.union(p, c);
    }
    (0..net.len()).all(|v| sets.find(v) == sets.find(0))
}

pub fn topology_class<T: Probability>(net: &BayesNet<T>) -> Result<TopologyClass> {
    if !is_connected(net) {
        return Err(Error::Disconnected);
    }
    if !skeleton_is_forest(net) {
        return Ok(TopologyClass::MultiplyConnected);
    }
    let single_parent = (0..net.len()).all(|v| net.parents(v).len() <= 1);
    if !single_parent {
        return Ok(TopologyClass::Polytree);
    }
    if (0..net.len()).all(|v| net.children(v).len() <= 1) {
        Ok(TopologyClass::Chain)
    } else {
        Ok(TopologyClass::Tree)
    }
}

/// Ordered point findings `(variable, value)`, both zero-based.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    items: Vec<(usize, usize)>,
}

impl Evidence {
    pub fn new(items: Vec<(usize, usize)>) -> Self {
        Evidence { items }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn items(&self) -> &[(usize, usize)] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn value_of(&self, v: usize) -> Option<usize> {
        self.items.iter().find(|(e, _)| *e == v).map(|&(_, a)| a)
    }

    /// Distinct variables, each value within range.
    pub fn check<T: Probability>(&self, net: &BayesNet<T>) -> Result<()> {
        for (k, &(v, a)) in self.items.iter().enumerate() {
            if v >= net.len() {
                return Err(Error::InvalidEvidence(format!(
                    "unknown variable {}",
                    v + 1
                )));
            }
            if a >= net.range(v) {
                return Err(Error::InvalidEvidence(format!(
                    "value {} out of range for variable {} (range {})",
                    a + 1,
                    v + 1,
                    net.range(v)
                )));
            }
            if self.items[..k].iter().any(|&(u, _)| u == v) {
                return Err(Error::InvalidEvidence(format!(
                    "variable {} instantiated twice",
                    v + 1
                )));
            }
        }
        Ok(())
    }
}

/// A set-valued finding: `variable` is known to lie in `allowed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub variable: usize,
    pub allowed: Vec<bool>,
}

impl Finding {
    pub fn point(variable: usize, range: usize, value: usize) -> Self {
        Finding {
            variable,
            allowed: (0..range).map(|a| a == value).collect(),
        }
    }

    /// The single allowed value, if the finding is a point.
    pub fn as_point(&self) -> Option<usize> {
        let mut it = self.allowed.iter().enumerate().filter(|(_, &ok)| ok);
        match (it.next(), it.next()) {
            (Some((a, _)), None) => Some(a),
            _ => None,
        }
    }
}

impl Evidence {
    pub fn findings<T: Probability>(&self, net: &BayesNet<T>) -> Vec<Finding> {
        self.items
            .iter()
            .map(|&(v, a)| Finding::point(v, net.range(v), a))
            .collect()
    }
}
