//! Tools for discrete factor graphs with strictly positive factors.
//!
//! The crate is organized around one pipeline:
//!
//! * [`model`] — variables, assignments, factors, Markov blankets, and the
//!   subset closure of a scope family.
//! * [`oracle`] — exact queries against a fully enumerated joint table
//!   (marginals, conditionals, divergences, entropies). Guarded by an
//!   enumeration cap so nothing exponential is built by accident.
//! * [`canonical`] — the canonical parameterization: factors built from
//!   alternating sums of log-probabilities of default-completed assignments,
//!   in both the full-instantiation and conditioned-on-blanket forms.
//! * [`sampling`] — deterministic exact and Gibbs samplers plus a dataset
//!   type with cached count tables and plug-in probability estimates.
//! * [`params`] — parameter learning for a known structure from data, the
//!   estimate-clipping rule, sample-size calculators, and a clipped
//!   maximum-likelihood baseline for Bayesian networks.
//! * [`structure`] — blanket discovery by conditional-entropy minimization
//!   and structure learning over bounded-size candidate scopes.
//! * [`generate`] — seeded model families (chain, grid, star, random) used
//!   by the harness and the test suite.
//! * [`io`] — plain-text formats for graphs, learned models, and samples.
//!
//! All probabilities are handled in natural-log space unless a function says
//! otherwise, and every table is laid out row-major with the last scope
//! variable varying fastest.

pub mod canonical;
pub mod error;
pub mod generate;
pub mod io;
pub mod local;
pub mod model;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod structure;

pub use error::{FgError, Result};
pub use model::{Assignment, Factor, FactorGraph, VariableSpec};
pub use oracle::JointTable;
