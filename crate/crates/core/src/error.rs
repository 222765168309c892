use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value type invariant does not hold (weights, coordinates, counts).
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The expected belief of a law differs from the prior, so the
    /// state-conditional tilts do not normalize.
    #[error("prior inconsistency: barycenter {barycenter} differs from prior {prior}")]
    PriorInconsistency { barycenter: String, prior: String },

    /// An enumeration would exceed its configured size bound.
    #[error("resource bound exceeded: {what} needs {needed} entries, bound is {bound}")]
    ResourceLimit { what: String, needed: u128, bound: u128 },

    /// A caller-supplied artifact failed verification.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
