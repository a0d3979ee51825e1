//! Exact inference for discrete Bayesian networks by logarithmic-depth,
//! round-synchronous parallel algorithms.

pub mod cluster;
pub mod engine;
pub mod error;
pub mod generate;
pub mod index;
pub mod junction;
pub mod model;
pub mod oracle;
pub mod polytree;
pub mod query;
pub mod scalar;
pub mod tree;

pub use engine::{Engine, Execution, RoundStats};
pub use error::{Error, Result};
pub use model::{BayesNet, Cpt, Evidence, Finding, Marginals, NodeRole, TopologyClass};
pub use query::{run_query, Algorithm, QueryResult};
pub use scalar::Probability;

pub use num_rational::BigRational;

/// Double-precision network, the default for file-based work.
pub type Network = BayesNet<f64>;
/// Single-precision network.
pub type Network32 = BayesNet<f32>;
/// Network with exact rational arithmetic.
pub type ExactNetwork = BayesNet<BigRational>;
