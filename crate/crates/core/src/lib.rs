//! Antenna subarray selection for single-source DOA estimation with a
//! switched uniform linear array.
//!
//! Modules, bottom-up:
//!
//! - [`layout`]: selection vectors, enumeration, layout alignment and the
//!   reduced candidate set
//! - [`signal`]: steering vectors, snapshots, SNR and array diversity
//! - [`beam`]: beampattern sidelobes, PSL, CRLB and the threshold-region MSE
//! - [`estimator`]: two-level grid maximum-likelihood DOA search
//! - [`selector`]: exhaustive, greedy, PSL-constrained and ULA selection
//! - [`neural`]: MLP imitation of the greedy selector
//! - [`sim`]: Monte Carlo MSE sweeps and sequential measurements
//! - [`cli`]: command-line front end

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod layout;
pub mod neural;
pub mod selector;
pub mod signal;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
