use std::fmt;

use super::net::BayesNet;
use crate::error::{Error, Result};
use crate::scalar::Probability;

/// Default cap on parent-set size enforced at load time.
pub const DEFAULT_MAX_PARENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Require every ancestor to carry a smaller index than its descendants.
    pub index_order: bool,
    pub max_parents: Option<usize>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            index_order: true,
            max_parents: Some(DEFAULT_MAX_PARENTS),
        }
    }
}

impl ValidationOptions {
    /// Checks that hold for every intermediate network an algorithm
    /// produces, including rerooted trees whose arcs no longer follow the
    /// index order.
    pub fn structural() -> Self {
        ValidationOptions {
            index_order: false,
            max_parents: None,
        }
    }
}

/// One failed structural or numerical requirement. Ids are zero-based;
/// `Display` prints them one-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SelfLoop {
        variable: usize,
    },
    DuplicateParent {
        variable: usize,
        parent: usize,
    },
    ParentChildMismatch {
        parent: usize,
        child: usize,
    },
    Cycle {
        variables: Vec<usize>,
    },
    IndexOrder {
        parent: usize,
        child: usize,
    },
    EntryOutOfRange {
        variable: usize,
        index: usize,
        value: f64,
    },
    Normalization {
        variable: usize,
        config: usize,
        sum: f64,
    },
    TooManyParents {
        variable: usize,
        count: usize,
        cap: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { variable } => write!(f, "self loop at variable {}", variable + 1),
            Violation::DuplicateParent { variable, parent } => write!(
                f,
                "variable {} lists parent {} twice",
                variable + 1,
                parent + 1
            ),
            Violation::ParentChildMismatch { parent, child } => write!(
                f,
                "parent/child inconsistency between {} and {}",
                parent + 1,
                child + 1
            ),
            Violation::Cycle { variables } => {
                let ids: Vec<String> = variables.iter().map(|v| (v + 1).to_string()).collect();
                write!(f, "directed cycle through variables {}", ids.join(", "))
            }
            Violation::IndexOrder { parent, child } => write!(
                f,
                "topological index order: parent {} of variable {} has a larger index",
                parent + 1,
                child + 1
            ),
            Violation::EntryOutOfRange {
                variable,
                index,
                value,
            } => write!(
                f,
                "entry out of [0,1]: variable {}, entry {}, value {}",
                variable + 1,
                index,
                value
            ),
            Violation::Normalization {
                variable,
                config,
                sum,
            } => write!(
                f,
                "normalization: variable {}, config {}, row sum {}",
                variable + 1,
                config,
                sum
            ),
            Violation::TooManyParents {
                variable,
                count,
                cap,
            } => write!(
                f,
                "variable {} has {} parents (cap {})",
                variable + 1,
                count,
                cap
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A variable with a single value.
    DegenerateRange { variable: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateRange { variable } => {
                write!(f, "variable {} has range 1", variable + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

pub fn validate<T: Probability>(net: &BayesNet<T>) -> ValidationReport {
    validate_with(net, &ValidationOptions::default())
}

pub fn validate_with<T: Probability>(
    net: &BayesNet<T>,
    opts: &ValidationOptions,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = net.len();
    let tol = T::normalization_tol();
    for v in 0..n {
        if net.range(v) == 1 {
            report
                .warnings
                .push(Warning::DegenerateRange { variable: v });
        }
        let parents = net.parents(v);
        for (k, &p) in parents.iter().enumerate() {
            if p == v {
                report.violations.push(Violation::SelfLoop { variable: v });
            }
            if parents[..k].contains(&p) {
                report.violations.push(Violation::DuplicateParent {
                    variable: v,
                    parent: p,
                });
            }
            if !net.children(p).contains(&v) {
                report.violations.push(Violation::ParentChildMismatch {
                    parent: p,
                    child: v,
                });
            }
            if opts.index_order && p > v {
                report.violations.push(Violation::IndexOrder {
                    parent: p,
                    child: v,
                });
            }
        }
        for &c in net.children(v) {
            if !net.parents(c).contains(&v) {
                report.violations.push(Violation::ParentChildMismatch {
                    parent: v,
                    child: c,
                });
            }
        }
        if let Some(cap) = opts.max_parents {
            if parents.len() > cap {
                report.violations.push(Violation::TooManyParents {
                    variable: v,
                    count: parents.len(),
                    cap,
                });
            }
        }
        let cpt = net.cpt(v);
        for (index, x) in cpt.entries().iter().enumerate() {
            let value = x.as_f64();
            if !(-tol..=1.0 + tol).contains(&value) {
                report.violations.push(Violation::EntryOutOfRange {
                    variable: v,
                    index,
                    value,
                });
            }
        }
        for (config, total) in cpt.row_sums().iter().enumerate() {
            let sum = total.as_f64();
            if (sum - 1.0).abs() > tol || sum.is_nan() {
                report.violations.push(Violation::Normalization {
                    variable: v,
                    config,
                    sum,
                });
            }
        }
    }
    if let Some(cycle) = find_cycle(net) {
        report
            .violations
            .push(Violation::Cycle { variables: cycle });
    }
    report
}

/// Check applied between rounds when an [`crate::Engine`] is audited.
pub fn audit_intermediate<T: Probability>(net: &BayesNet<T>) -> Result<()> {
    let report = validate_with(net, &ValidationOptions::structural());
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    Ok(())
}

/// Returns the variables on one directed cycle, if any.
fn find_cycle<T: Probability>(net: &BayesNet<T>) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Closed,
    }
    let n = net.len();
    let mut mark = vec![Mark::New; n];
    let mut stack_path = Vec::new();
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        // iterative DFS over child edges: (node, next child position)
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        stack_path.push(start);
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            let children = net.children(v);
            if *k < children.len() {
                let c = children[*k];
                *k += 1;
                match mark[c] {
                    Mark::New => {
                        mark[c] = Mark::Open;
                        stack_path.push(c);
                        stack.push((c, 0));
                    }
                    Mark::Open => {
                        let from = stack_path.iter().position(|&x| x == c).unwrap();
                        return Some(stack_path[from..].to_vec());
                    }
                    Mark::Closed => {}
                }
            } else {
                mark[v] = Mark::Closed;
                stack_path.pop();
                stack.pop();
            }
        }
    }
    None
}
