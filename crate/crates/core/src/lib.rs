//! Exact computation of invariant approximate subgroups over finite groups.
//!
//! Given a uniform family of commensurable approximate subgroups in a finite
//! ambient group, this crate constructs the invariant approximate subgroups
//! `H` and `H'` together with machine-checkable certificates for every
//! quantitative step, and cross-checks its exact minimizations against a
//! structure-free brute-force oracle on small instances.
//!
//! Module map:
//! - [`group`]: finite groups, subsets, automorphisms (the trusted kernel)
//! - [`covering`]: exact covering numbers and packing indices with certificates
//! - [`approx`]: approximate subgroups, commensurability, validated families
//! - [`pipeline`]: the invariant-set construction itself
//! - [`oracle`]: independent naive recomputation and the lemma battery
//! - [`io`]: JSON instance/report formats shared with the CLI

pub mod approx;
mod bits;
pub mod covering;
pub mod error;
pub mod group;
pub mod io;
pub mod oracle;
pub mod pipeline;

pub use error::{Error, Result};
