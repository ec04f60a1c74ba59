//! Experiment harness for the narrowing optimizers: config resolution,
//! seeded runs, rate sweeps, comparisons and report writers.

// Negated float comparisons are used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod verify;
