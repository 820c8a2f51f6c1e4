//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Expression text could not be parsed.
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    /// An identifier outside the supported vocabulary appeared in an expression.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    /// A sub-expression could not be evaluated over the reals.
    #[error("evaluation error in `{fragment}` (bytes {}..{}): {reason}", span.0, span.1)]
    Eval {
        span: (usize, usize),
        fragment: String,
        reason: String,
    },

    /// `builtin` was asked for a name that is not registered.
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),

    /// The series window hit `max_terms_per_axis` before the tail bound
    /// dropped below the requested tolerance.
    #[error(
        "truncation failure: tail bound {tail_bound:e} > tolerance {tail_tol:e} \
         after {terms} terms per axis"
    )]
    Truncation {
        terms: usize,
        tail_bound: f64,
        tail_tol: f64,
    },

    /// The integrand failed at a lattice point visited by the series.
    #[error("function evaluation failed at lattice point (t, s) = ({t}, {s}): {source}")]
    Lattice {
        t: f64,
        s: f64,
        #[source]
        source: Box<Error>,
    },

    /// Weighted-boundedness moments are only implemented up to N1 = 8.
    #[error("unsupported weight order N1 = {0} (maximum 8)")]
    UnsupportedWeightOrder(u32),

    /// Table-2 point recovery did not reproduce the validation rows.
    #[error("point recovery failed: {0}")]
    Recovery(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at_lattice(t: f64, s: f64, source: Error) -> Self {
        Error::Lattice {
            t,
            s,
            source: Box::new(source),
        }
    }
}
