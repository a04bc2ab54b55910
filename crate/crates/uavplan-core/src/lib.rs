//! Planning core for coded UAV task offloading.
//!
//! Phase one reserves UAV types per charging station under weather risk.
//! Phase two assigns local and offloaded coded copies per demand and
//! shortfall path. Both are solved exactly as extensive-form integer programs.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

extern crate alloc;

pub mod cdc;
pub mod cost;
pub mod error;
pub mod evaluator;
pub mod milp;
pub mod physics;
pub mod planner;
pub mod scenario;

pub use error::{Error, Result};
