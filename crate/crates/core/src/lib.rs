pub mod cocycle;
pub mod error;
pub mod generators;
pub mod graph;
pub mod hash;
pub mod numeric;
pub mod runner;
pub mod seed;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
