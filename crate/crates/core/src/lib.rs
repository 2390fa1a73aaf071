//! Day-ahead market simulator with non-convex generator costs.
//!
//! A market case is cleared by a unit-commitment MILP, priced by fixed
//! configuration pricing or approximate convex hull pricing, and settled at
//! true costs. An iterated learning game lets generators pick between
//! economic bids, self-commitment and self-scheduling.

pub mod analytics;
pub mod error;
pub mod learning;
pub mod market_data;
pub mod pricing;
pub mod settlement;
pub mod strategy;
pub mod uc;

pub use error::{Error, Result};
