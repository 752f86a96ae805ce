//! Strategic voting decision models for plurality elections with poll information.
//!
//! A voter sees a poll (expected vote counts per candidate), knows her own
//! utilities, and casts a single vote. This crate implements the decision
//! models that map `(utilities, poll)` to a vote, fits them per voter with
//! brute-force grid search and k-fold cross-validation, and generates
//! synthetic datasets to test the whole pipeline.
//!
//! Candidates are always indexed from the voter's perspective: `q1` is the
//! most preferred candidate, `q2` the next, and so on.

pub mod cli;
pub mod data;
pub mod error;
pub mod fitting;
pub mod model;
pub mod pivot;
pub mod report;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{decide, Candidate, Family, ModelSpec, Poll, Round, Utilities};
