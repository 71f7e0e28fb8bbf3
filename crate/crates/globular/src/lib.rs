//! Combinatorics of free strict n-categories at desk scale.
//!
//! This crate implements finite truncated globular sets, pasting trees and
//! their globular realizations, the free strict n-category monad (unit and
//! multiplication computed by inductive factorization), multitensors (lax
//! monoidal structures) with the substitution tensor product and the Γ
//! construction, collections and operads over the free-category monad with
//! the bar construction, and categories enriched in a multitensor, together
//! with the conversions between operad algebras and enriched categories.
//!
//! Everything is finite: functors are exposed as bounded enumerations and
//! every categorical law is checkable by exhaustive instance search. The
//! `suites` module packages those searches as reports; the `examples/`
//! directory of the crate shows each capability end to end.

pub mod error;
pub mod glob;
pub mod tree;
pub mod freecat;
pub mod multitensor;
pub mod operad;
pub mod enrich;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
