//! Regime tagging of dynamical-system time series from the persistent
//! homology of sliding-window point clouds.
//!
//! The pipeline runs `sim`/ingest -> [`embed`] -> [`ph`] -> [`features`] ->
//! [`cluster`]; [`pipeline`] wires the stages together and writes the CSV
//! artifacts described in [`io`].

// `!(a < b)` checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod embed;
pub mod error;
pub mod features;
pub mod io;
pub mod ph;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
