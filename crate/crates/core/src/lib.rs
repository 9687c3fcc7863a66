//! Offline-to-online conversion of resilient bi-criteria approximation
//! algorithms for combinatorial multi-armed bandits.
//!
//! The crate is organised bottom-up:
//!
//! - [`setfn`]: ground sets, arm subsets, deterministic set functions and the
//!   two noise wrappers (bounded perturbation and stochastic feedback).
//! - [`offline`]: the greedy bi-criteria algorithms (submodular cover,
//!   submodular-cost submodular cover, fair submodular maximization) and
//!   their resilience certificates.
//! - [`online`]: the explore-then-exploit agent that answers an offline
//!   algorithm's oracle queries with empirical means and then commits.
//! - [`eval`]: brute-force optima, regret and constraint-violation
//!   accounting, reference bounds and analysis witnesses.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod gen;
pub mod offline;
pub mod online;
pub mod rng;
pub mod setfn;

pub use error::{Error, Result};
pub use setfn::{ArmSet, SetFunction};
