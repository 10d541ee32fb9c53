// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ctrw_engine;
pub mod error;
pub mod levy_measure;
pub mod mpp;
pub mod rng;
pub mod series_sampler;
pub mod stats;

pub use error::{Error, Result};
