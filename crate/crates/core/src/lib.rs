//! Multi-task neural networks for Parkinson's severity prediction from voice
//! features: dataset loading, preprocessing, a small dense-network engine, the
//! five studied architectures and the experiment harness.

pub mod architectures;
pub mod checkpoint;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod preprocess;

pub use error::{Error, Result};
