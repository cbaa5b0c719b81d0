use thiserror::Error;

use crate::family::Violation;
use crate::monoid::MonoidKind;
use crate::relation::VarSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("monoid kind mismatch: {0} vs {1}")]
    KindMismatch(MonoidKind, MonoidKind),

    #[error("invalid {kind} value `{text}`")]
    InvalidValue { kind: MonoidKind, text: String },

    #[error("zero annotation is not allowed here")]
    ZeroAnnotation,

    #[error("variables {missing} are not contained in {domain}")]
    Domain { missing: VarSet, domain: VarSet },

    #[error("assignment over {found} does not match relation domain {expected}")]
    AssignmentDomain { expected: VarSet, found: VarSet },

    #[error("no relation given for context {0}")]
    MissingContext(VarSet),

    #[error("more than one relation given for context {0}")]
    DuplicateContext(VarSet),

    #[error("context {0} is contained in another context and is not maximal")]
    NonMaximalContext(VarSet),

    #[error("context set mismatch")]
    ContextSetMismatch,

    #[error("{0} is not a member of the context set")]
    NotAContext(VarSet),

    #[error("local consistency violated: {0}")]
    Inconsistent(Box<Violation>),

    #[error("not a chordless-cycle context set: {0}")]
    NotChordless(String),

    #[error("family is not simply cyclic: {0}")]
    NotSimplyCyclic(String),

    #[error("edge {0} lies on no directed cycle")]
    UncoveredEdge(String),

    #[error("family is not realisable over {0}")]
    Unrealisable(MonoidKind),

    #[error("{0} is derivable, so no counterexample exists")]
    Derivable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
