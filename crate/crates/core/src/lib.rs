//! Core algorithms for multi-label non-intrusive load monitoring.
//!
//! An aggregate power signal is cut into windows; a restricted Boltzmann
//! machine with a visible layer for the window, a hidden layer, and one
//! binary label unit per appliance is trained with contrastive divergence
//! and queried with mean-field inference to decide which appliances were
//! ON. An exhaustive combinatorial-optimization baseline and the usual
//! multi-label / energy metrics sit alongside.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, CSV
//! ingestion and the command line live in the `nilm` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Test oracles spell out index loops.
#![cfg_attr(test, allow(clippy::needless_range_loop))]

extern crate alloc;

pub mod baselines;
pub mod data;
mod error;
pub mod metrics;
pub mod numerics;
pub mod rbm;

pub use error::{Error, Result};
pub use numerics::{Matrix, Rng};
pub use rbm::{MfResult, RbmParameters, TrainConfig};
