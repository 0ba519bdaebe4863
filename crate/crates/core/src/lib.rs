//! Core algorithms for predicting the direction of the next trading day's
//! open from the current day's OHLC bar.
//!
//! The crate is `no_std` and needs only `alloc`. Everything that touches the
//! filesystem, threads or the command line lives in the `trendcast` crate.
//!
//! Pipeline, in order:
//!
//! 1. [`ohlc`]: validated bars and series, log-return volatility.
//! 2. [`indicators`]: SMA, EMA, true range and the Donchian, Bollinger and
//!    Keltner channels.
//! 3. [`features`]: the 16-column per-day feature row and genre masks.
//! 4. [`labeling`]: the four next-day-open rise/fall targets.
//! 5. [`dataset`]: binding, chronological split, static and rolling evaluation.
//! 6. [`learners`]: seven classifier families behind one fit/predict contract.
//! 7. [`metrics`]: confusion matrix, accuracy and MCC.
//! 8. [`explain`]: exact and sampled interventional Shapley values.
//!
//! [`synth`] produces deterministic synthetic series for tests and demos.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod explain;
pub mod features;
pub mod indicators;
pub mod labeling;
pub mod learners;
pub mod metrics;
pub mod ohlc;
pub mod synth;

pub use error::{Error, Result};
