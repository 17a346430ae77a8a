//! Experiment harness for multireg: phase-transition grids, greedy weight
//! tuning, statistical-dimension sweeps, RIP probes, and CSV / SVG output.

pub mod config;
pub mod error;
pub mod greedy;
pub mod logistic;
pub mod manifest;
pub mod output;
pub mod phase;
pub mod rip;
pub mod sweep;

pub use error::{ExpError, Result};
