//! Decision procedures and constructive remetrization for finite families of
//! self-maps.
//!
//! Given a finite point set `X` and maps `f_1, ..., f_k : X -> X` presented as
//! index tables, this crate decides whether the family has an attractor (every
//! infinite composition chain collapses to a single point, and distinct limit
//! points have eventually disjoint composition images), and when it does,
//! synthesizes a bounded complete metric `d` together with a comparison
//! function `phi` under which every `f_i` is a `phi`-contraction. All metric
//! values are exact rationals; every intermediate construction ships with an
//! executable property suite.
//!
//! The main pipeline lives in [`remetrize`]; the decision procedure in
//! [`monoid`]; single-map and common-fixed-point specializations plus the
//! unbounded extension in [`converse`].

pub mod chainmetric;
pub mod converse;
pub mod cover;
pub mod instance;
pub mod monoid;
pub mod ratio;
pub mod remetrize;
pub mod render;
pub mod report;
pub mod words;

pub use chainmetric::{MetricMatrix, WeightSequence};
pub use instance::{AffineInstance, FiniteInstance, Instance};
pub use monoid::MonoidAutomaton;
pub use ratio::Rat;
pub use remetrize::{ComparisonFunction, RemetrizationCertificate, ScaleSequence};
pub use report::{Check, SuiteReport};
pub use words::{Letter, PeriodicWord, Word};

use thiserror::Error;

/// Errors across parsing, validation, decision gates and verification.
#[derive(Debug, Error)]
pub enum Error {
    /// A document failed to parse; `path` locates the offending element.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    /// A structurally valid document violated an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A precondition of the requested operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The family does not have an attractor; carries the lasso witness when
    /// condition a) fails.
    #[error("family has no attractor{}", .lasso.as_ref().map(|w| format!(" (lasso witness {w})")).unwrap_or_default())]
    NoAttractor { lasso: Option<String> },

    /// A configurable resource budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// An internal consistency check failed; carries the counterexample.
    #[error("internal verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
