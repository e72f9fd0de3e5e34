use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("domain has no interior quadrature cells")]
    EmptyDomain,

    #[error("basis element {element} is not finite at node {node}")]
    Evaluation { element: String, node: C64 },

    #[error("degenerate basis: every pivot fell below the drop tolerance")]
    DegenerateBasis,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("expected {expected} branches at {at}, found {} ({found:?})", found.len())]
    BranchCount {
        at: C64,
        expected: usize,
        found: Vec<C64>,
    },

    #[error("{at} lies within {distance:e} of the critical value {critical}")]
    NearCritical { at: C64, critical: C64, distance: f64 },

    #[error("{at} lies on or next to the singular locus: {reason}")]
    SingularLocus { at: C64, reason: String },

    #[error("ratio denominator vanishes at {at} (|g0| = {magnitude:e})")]
    DivisionDegeneracy { at: C64, magnitude: f64 },

    #[error("every sample was excluded; nothing to report")]
    NoSamples,
}
