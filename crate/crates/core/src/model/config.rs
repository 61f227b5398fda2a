use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every width and depth the network leaves numeric.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Hyperspectral bands `M`.
    pub bands: usize,
    /// Multispectral bands `M_m`.
    pub msi_bands: usize,
    /// Spatial ratio `s` between the HR and LR grids.
    pub scale: usize,
    /// Feature width `Cf` carried through every branch.
    pub base_channels: usize,
    pub depth_q: usize,
    pub depth_k: usize,
    pub depth_v: usize,
    pub depth_z: usize,
    /// DFABs stacked inside each residual group.
    pub dfabs_per_group: usize,
    /// Channels added by each dense layer of a DFAB.
    pub growth: usize,
    /// Convolution groups used by the grouped residual groups.
    pub groups: usize,
    /// Attention reduction `r`; projected width is `Cf / r`.
    pub reduction: usize,
    /// Largest side of a square attention tile on the HR grid.
    pub attention_tile: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            bands: 16,
            msi_bands: 4,
            scale: 4,
            base_channels: 32,
            depth_q: 4,
            depth_k: 4,
            depth_v: 6,
            depth_z: 6,
            dfabs_per_group: 2,
            growth: 16,
            groups: 4,
            reduction: 2,
            attention_tile: 64,
        }
    }
}

impl ModelConfig {
    /// Small configuration used for overfitting runs and tests.
    pub fn toy(bands: usize, msi_bands: usize, scale: usize) -> Self {
        Self {
            bands,
            msi_bands,
            scale,
            base_channels: 16,
            dfabs_per_group: 1,
            growth: 8,
            groups: 2,
            ..Self::default()
        }
    }

    /// Projected attention width `d = Cf / r`.
    pub fn attention_dim(&self) -> usize {
        self.base_channels / self.reduction.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.bands == 0 || self.msi_bands == 0 {
            return fail("band counts must be positive".into());
        }
        if self.scale == 0 {
            return fail("scale must be >= 1".into());
        }
        if self.base_channels == 0 || self.growth == 0 {
            return fail("channel widths must be positive".into());
        }
        if self.groups == 0 || !self.base_channels.is_multiple_of(self.groups) {
            return fail(format!(
                "base channels {} not divisible by groups {}",
                self.base_channels, self.groups
            ));
        }
        if !self.growth.is_multiple_of(self.groups) {
            return fail(format!("growth {} not divisible by groups {}", self.growth, self.groups));
        }
        if self.reduction == 0 || !self.base_channels.is_multiple_of(self.reduction) {
            return fail(format!(
                "reduction {} must divide base channels {}",
                self.reduction, self.base_channels
            ));
        }
        if [self.depth_q, self.depth_k, self.depth_v, self.depth_z, self.dfabs_per_group].contains(&0) {
            return fail("branch depths and DFABs per group must be >= 1".into());
        }
        if self.attention_tile == 0 {
            return fail("attention tile must be >= 1".into());
        }
        Ok(())
    }
}
