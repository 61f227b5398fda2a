//! Hyperspectral pansharpening with a multi-branch spatial-spectral fusion
//! network, built on a small self-contained tensor and autodiff core.

pub mod config;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod parallel;
pub mod seed;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
