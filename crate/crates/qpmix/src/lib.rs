//! Structure learning for mixed (conditional Gaussian) graphical models
//! from data with many more variables than observations.
//!
//! The pipeline estimates, for every admissible variable pair, the
//! *non-rejection rate*: the probability that an exact conditional
//! independence test of the pair, given a uniformly drawn conditioning set
//! of a small fixed size q, fails to reject. Pairs with low rates are kept
//! as edges of the inferred graph. Limited-order conditioning keeps every
//! test inside a marginal model of q + 2 variables, where sample-size
//! requirements are mild even when the full variable count dwarfs n.
//!
//! The crate also ships the machinery to evaluate the approach end to end:
//! a synthetic-model generator over random regular marked graphs
//! ([`model::build_model`]), an exact-vs-asymptotic Type-I error harness
//! and a precision-recall accuracy harness ([`experiments`]).
//!
//! The `examples/` directory walks through each capability; the `qpmix`
//! binary exposes the same operations as subcommands.

pub mod citest;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod infer;
pub mod io_util;
pub mod levels;
pub mod linalg;
pub mod model;
pub mod nrr;
pub mod sample;
pub mod seed;
pub mod special;
pub mod stats;

pub use citest::{ci_test, CiOutcome, TestKind, TestResult};
pub use data::MixedDataset;
pub use error::{Error, Result};
pub use graph::{Mark, MarkedGraph};
pub use model::{build_model, CGModel, CanonicalParams};
pub use nrr::{average_nrr, nrr_matrix, nrr_pair, NrrMatrix, NrrOptions};
pub use sample::sample_dataset;
