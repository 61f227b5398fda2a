//! Loss, optimizer, learning-rate schedule and the training loop.

mod adam;
mod fit;
mod loss;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, OptimizerState};
pub use fit::{
    compute_gradients, Gradients, fit, load_training_checkpoint, training_checkpoint, EpochRecord, FitOptions,
    Resumed, StepRecord, TrainReport, TrainState, LOG_HEADER,
};
pub use loss::{fusion_loss, LossTerms, SAM_LOSS_EPS};

use crate::error::{usage_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub sam_weight: f64,
    pub seed: u64,
    /// Save a checkpoint every this many epochs; 0 keeps only the final one.
    pub checkpoint_interval: usize,
    /// Random flips and rotations (plus cropping when `crop_size` is set).
    pub augment: bool,
    /// High-resolution crop side used by augmentation.
    pub crop_size: Option<usize>,
    /// Validate every this many epochs.
    pub eval_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 4,
            epochs: 600,
            lr0: 1e-4,
            sam_weight: 0.1,
            seed: 0,
            checkpoint_interval: 50,
            augment: true,
            crop_size: None,
            eval_interval: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1".into());
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return fail(format!("lr0 must be positive, got {}", self.lr0));
        }
        if !(self.sam_weight.is_finite() && self.sam_weight >= 0.0) {
            return fail(format!("sam_weight must be >= 0, got {}", self.sam_weight));
        }
        if self.eval_interval == 0 {
            return fail("eval_interval must be >= 1".into());
        }
        Ok(())
    }
}

/// Per-epoch cosine annealing from `lr0` towards zero.
pub fn cosine_lr(epoch: usize, total_epochs: usize, lr0: f64) -> Result<f64> {
    if epoch >= total_epochs {
        return Err(usage_err!("epoch {epoch} outside schedule of {total_epochs}"));
    }
    Ok(lr0 * (1.0 + (PI * epoch as f64 / total_epochs as f64).cos()) / 2.0)
}

#[cfg(test)]
mod tests;
