//! Online object-category learning: interval-based categories, similarity-driven action
//! selection, and merge/split generalization under reward feedback.

pub mod error;
pub mod features;
pub mod harness;
pub mod knowledge;
pub mod scenarios;

pub use error::{Error, Result};
