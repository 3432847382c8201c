//! Bayesian proportional hazards regression with a gamma-process prior on
//! the cumulative baseline hazard and a reversible-jump sampler over the
//! time partition.
//!
//! The model family is piecewise exponential: the study window (0, s_max]
//! carries a partition 0 = s_0 < s_1 < ... < s_{J+1} = s_max, each interval
//! an increment h_j of the cumulative baseline hazard, and subjects
//! contribute through h(t) exp(x'beta). Three variants share the machinery:
//! GP-RJ moves the partition by birth/death of splits at observed event
//! times, GP-EQ fixes an equal-width partition, GP-UQ fixes the partition at
//! the distinct event times.

pub mod commands;
pub mod comparison;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod likelihood;
pub mod math;
pub mod priors;
pub mod rjmcmc;
pub mod samples;
pub mod simulate;

pub use error::{Error, Result};
