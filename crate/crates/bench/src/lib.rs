//! Experiment driver for the weight-balanced trees in `wbtree`.
//!
//! The `wbtree-bench` binary is a thin CLI over [`experiment::run`].

pub mod experiment;
pub mod ops;
pub mod output;
pub mod par;
pub mod variant;
