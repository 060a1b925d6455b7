pub mod agent;
pub mod allocator;
pub mod error;
pub mod goods;
pub mod harness;
pub mod market;
pub mod predictors;
pub mod seq;

pub use error::{Result, TacError};
