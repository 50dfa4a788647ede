//! Size-adjusted comparison of graph-level network statistics.
//!
//! Statistics such as centralization, transitivity or density drift with
//! network size even when graphs come from one generative model. This crate
//! standardizes each observed statistic against a reference distribution
//! simulated, at the observed size, from a mixture of models fitted to a
//! random subset of the observed networks, and measures how comparable the
//! resulting values are across sizes.
//!
//! Layout:
//! - [`graph`]: graph types, block extraction, one-mode projection
//! - [`io`]: edge-list text format and collections
//! - [`stats`]: the nine graph-level statistics
//! - [`generators`]: Bernoulli, offset, Markov ERGM and hierarchical samplers
//! - [`fitting`]: estimators for the mixture component families
//! - [`adjust`]: reference simulation and z-score standardization
//! - [`compare`]: Kolmogorov–Smirnov, k-sample Anderson–Darling, correlation
//! - [`experiments`]: scripted simulation studies

pub mod adjust;
pub mod compare;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod generators;
pub mod graph;
pub mod io;
mod par;
pub mod report;
pub mod rng;
pub mod stats;
pub mod svg;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Graph, Membership};
pub use stats::{StatisticKind, StatisticValue};
