//! The fusion network: DFAB blocks, residual groups, the four Q/K/V/Z
//! branches, attention-gated fusion and the reconstruction head.

pub mod checkpoint;
pub mod complexity;
mod config;
mod layers;
mod net;
mod params;
mod ssawb;

pub use checkpoint::{
    checkpoint_stem, load_checkpoint, save_checkpoint, Checkpoint, CheckpointManifest, TensorEntry,
};
pub use complexity::{flops_estimate, shape_plan, symbolic_param_count, ShapePlan};
pub use config::ModelConfig;
pub use layers::{
    Branch, BranchOutput, Conv, ConvSpec, Dfab, ResidualGroup, DFAB_DENSE_LAYERS, DFAB_RESIDUAL_SCALE,
};
pub use net::{ActivationDump, ForwardOutput, S3RNet, BRANCH_NAMES};
pub use params::{Bound, InitScheme, ParamId, ParamStore, LEAKY_SLOPE};
pub use ssawb::{Ssawb, SsawbOutput};

use rand::Rng;

/// Standalone blocks for tests and tooling that exercise a single layer
/// outside a full network.
pub mod blocks {
    use super::layers::Builder;
    use super::*;
    use crate::tensor::Element;

    pub fn dfab<T: Element, R: Rng>(
        store: &mut ParamStore<T>,
        rng: &mut R,
        init: InitScheme,
        channels: usize,
        growth: usize,
        groups: usize,
    ) -> Dfab {
        let mut b = Builder { store, rng, init };
        Dfab::build(&mut b, "dfab", channels, growth, groups)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn residual_group<T: Element, R: Rng>(
        store: &mut ParamStore<T>,
        rng: &mut R,
        init: InitScheme,
        name: &str,
        channels: usize,
        growth: usize,
        blocks: usize,
        groups: usize,
    ) -> ResidualGroup {
        let mut b = Builder { store, rng, init };
        ResidualGroup::build(&mut b, name, channels, growth, blocks, groups)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn branch<T: Element, R: Rng>(
        store: &mut ParamStore<T>,
        rng: &mut R,
        init: InitScheme,
        in_channels: usize,
        channels: usize,
        growth: usize,
        depth: usize,
        groups: usize,
    ) -> Branch {
        let mut b = Builder { store, rng, init };
        Branch::build(&mut b, "branch", in_channels, channels, growth, depth, 1, groups)
    }

    pub fn ssawb<T: Element, R: Rng>(
        store: &mut ParamStore<T>,
        rng: &mut R,
        channels: usize,
        dim: usize,
        scale: usize,
        tile: usize,
    ) -> Ssawb {
        let mut b = Builder { store, rng, init: InitScheme::Kaiming };
        Ssawb::build(&mut b, channels, dim, scale, tile)
    }
}

#[cfg(test)]
mod tests;
