//! Temporal recurrent networks for online action detection.
//!
//! A TRN cell classifies the current frame of a feature stream while
//! anticipating the next few frames and feeding that anticipation back
//! into the classifier. The crate also provides the comparison baselines,
//! training with chopped windows and Adam, per-frame AP / calibrated AP
//! evaluation, a synthetic stream generator and a command-line front end.

mod binio;
pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
