//! One-call query front end with algorithm selection and a serializable
//! result.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, RoundStats};
use crate::error::{Error, Result};
use crate::junction::{junction_tree, running_intersection_holds};
use crate::model::{skeleton_is_forest, topology_class, BayesNet, Evidence, TopologyClass};
use crate::scalar::{self, Probability};
use crate::{cluster, oracle, polytree, tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Auto,
    Tree,
    Polytree,
    Junction,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Auto,
        Algorithm::Tree,
        Algorithm::Polytree,
        Algorithm::Junction,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Tree => "tree",
            Algorithm::Polytree => "polytree",
            Algorithm::Junction => "junction",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Most specific algorithm that applies to `net`. Disconnected
    /// networks are judged by their skeleton.
    pub fn select<T: Probability>(net: &BayesNet<T>) -> Algorithm {
        if (0..net.len()).all(|v| net.parents(v).len() <= 1) {
            Algorithm::Tree
        } else if skeleton_is_forest(net) {
            Algorithm::Polytree
        } else {
            Algorithm::Junction
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

/// Posterior distributions with the statistics of the run that produced
/// them. Variable ids are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub variables: BTreeMap<usize, Vec<f64>>,
    pub stats: RoundStats,
    pub algo: Algorithm,
    /// `None` for disconnected networks.
    pub topology: Option<TopologyClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separator_size: Option<usize>,
    /// Variables in the order used for triangulation, one-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    /// Clique variable sets, one-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cliques: Option<Vec<Vec<usize>>>,
}

/// Runs `algo` (resolving `Auto`) and packages the posteriors.
pub fn run_query<T: Probability>(
    net: &BayesNet<T>,
    evidence: &Evidence,
    algo: Algorithm,
    engine: &Engine,
) -> Result<QueryResult> {
    evidence.check(net)?;
    let algo = match algo {
        Algorithm::Auto => Algorithm::select(net),
        a => a,
    };
    let topology = match topology_class(net) {
        Ok(t) => Some(t),
        Err(Error::Disconnected) => None,
        Err(e) => return Err(e),
    };
    let mut result = QueryResult {
        variables: BTreeMap::new(),
        stats: RoundStats::default(),
        algo,
        topology,
        width: None,
        separator_size: None,
        ordering: None,
        cliques: None,
    };
    let (post, stats) = match algo {
        Algorithm::Tree => tree::tree_posteriors(net, evidence, engine)?,
        Algorithm::Polytree => polytree::polytree_posteriors(net, evidence, engine)?,
        Algorithm::Junction => {
            let jt = junction_tree(net)?;
            debug_assert!(running_intersection_holds(&jt.tree));
            result.width = Some(jt.tree.width());
            result.separator_size = Some(jt.tree.separator_size());
            result.ordering = Some(jt.ordering.iter().map(|v| v + 1).collect());
            result.cliques = Some(
                jt.tree
                    .clusters()
                    .iter()
                    .filter(|s| s.kind == cluster::ClusterKind::Clique)
                    .map(|s| s.vars.iter().map(|v| v + 1).collect())
                    .collect(),
            );
            cluster::posteriors(&jt.tree, net, evidence, engine)?
        }
        Algorithm::Oracle => (oracle::posteriors(net, evidence)?, RoundStats::default()),
        Algorithm::Auto => unreachable!("resolved above"),
    };
    result.stats = stats;
    for (v, dist) in post.iter().enumerate() {
        let total = scalar::sum(dist).as_f64();
        if (total - 1.0).abs() > T::normalization_tol() {
            return Err(Error::Shape(format!(
                "posterior of variable {} sums to {total}",
                v + 1
            )));
        }
        result
            .variables
            .insert(v + 1, dist.iter().map(|p| p.as_f64()).collect());
    }
    Ok(result)
}
