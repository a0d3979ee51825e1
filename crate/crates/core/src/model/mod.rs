//! Network representation, validation, node roles and the PHN file format.

mod cpt;
mod net;
pub mod phn;
mod validate;

pub use cpt::Cpt;
pub use net::{
    classify, is_connected, skeleton_is_forest, topology_class, BayesNet, Evidence, Finding,
    Marginals, NodeRole, TopologyClass,
};
pub use validate::{
    audit_intermediate, validate, validate_with, ValidationOptions, ValidationReport, Violation,
    Warning, DEFAULT_MAX_PARENTS,
};
