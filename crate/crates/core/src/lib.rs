#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod estimator;
pub mod quad;
pub mod scalogram;
pub mod sim;
pub mod weights;
pub mod wavelet;

pub use error::{Error, Result};
