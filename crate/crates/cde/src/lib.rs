//! Conditional density estimation by boosting.
//!
//! The label range is cut into bins whose frequencies are as even as
//! possible. For each interior breakpoint `b_j` a score `f(x, j)` is boosted
//! with decision stumps so that `1/(1 + e^{-f})` estimates `P(y >= b_j | x)`.
//! Scores are monotonized across breakpoints at prediction time, giving a
//! valid piecewise-uniform density.
//!
//! ```
//! use boostcde::{train, LabeledExample, TrainConfig};
//!
//! let data: Vec<LabeledExample> = (0..100)
//!     .map(|i| LabeledExample::new(vec![Some((i % 2) as f64)], (i % 2) as f64 * 50.0 + (i % 7) as f64))
//!     .collect();
//! let config = TrainConfig { k: 8, rounds: 20, ..Default::default() };
//! let model = train(&data, &config).unwrap();
//! let high = model.expected_value(&[Some(1.0)]).unwrap();
//! let low = model.expected_value(&[Some(0.0)]).unwrap();
//! assert!(high > low);
//! ```

pub mod breakpoints;
pub mod data;
pub mod error;
pub mod model;
pub mod stump;

pub use breakpoints::{compute_breakpoints, neg_entropy, Breakpoints};
pub use data::{feature_count, read_csv, write_csv, Feature, LabeledExample};
pub use error::{CdeError, Result};
pub use model::{
    cdf_from, expected_from, monotonize, sample_from, train, train_with_trace, BinProbabilities,
    CdeModel, TrainConfig, TrainTrace, MODEL_VERSION,
};
pub use stump::{best_stump, block_loss, block_value, Stump, StumpFit};
