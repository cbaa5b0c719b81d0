//! Contextual families of monoid-annotated relations.
//!
//! A contextual K-family assigns a K-relation to every maximal context of a
//! context set so that any two agree on their shared variables. This crate
//! checks local and global consistency, decides whether a Boolean family
//! is the support of a family over N or Q (and builds one), and decides
//! entailment of unary functional dependencies under local consistency.

pub mod error;
pub mod family;
pub mod fdlogic;
pub(crate) mod lp;
pub mod monoid;
pub mod realisability;
pub mod relation;
pub mod samples;

pub use error::{Error, Result};
pub use family::{violations, ContextSet, ContextualFamily, GlobalVerdict, Violation};
pub use fdlogic::{Fd, RuleSet};
pub use monoid::{MonoidKind, MonoidValue};
pub use relation::{Assignment, KRelation, Value, VarSet, Variable};
