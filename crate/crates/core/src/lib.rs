// Negated float comparisons are used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod blin;
pub mod blin_mos;
pub mod budget;
pub mod cube;
pub mod error;
pub mod objectives;
pub mod random_search;
pub mod rates;
pub mod rng;
pub mod schedule;
pub mod stats;
pub mod trace;
