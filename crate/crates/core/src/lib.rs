//! Aggregation on logically interdependent issues.
//!
//! A domain `X` is a set of feasible evaluations over `m` issues. This crate
//! decides whether `X` admits non-dictatorial aggregators, whether it is a
//! uniformly possibility domain, and the complexity of the multi-sorted
//! conservative constraint satisfaction problem built from `X`.

pub mod algebra;
pub mod blockedness;
pub mod classify;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod mcsp;
pub mod search;

pub use algebra::{AggregatorTuple, NamedOp, OperationTable, RestrictionClass, VerifiedAggregator};
pub use domain::{parse_domain, Domain, Limits, ValidationReport};
pub use error::{Error, Result};
