//! File formats, configuration, grid runner, reports and charts around
//! [`trendcast_core`].

pub mod chart;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod model_io;
pub mod output;
pub mod report;
pub mod runner;

pub use trendcast_core as core;
