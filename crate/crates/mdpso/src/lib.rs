//! Experiment runner for `mdpso-core`: data and config files, output
//! formats, the `run`/`stats`/`selftest` commands and a brute-force QP
//! oracle used to check the SVR solver.

pub use mdpso_core as core;

pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod qp_oracle;
pub mod run;
pub mod selftest;
pub mod stats_cmd;
pub mod synth;

pub use error::{Error, Result};
