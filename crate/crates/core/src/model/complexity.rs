//! Parameter and FLOP accounting straight from a [`ModelConfig`], without
//! building or allocating the network.

use serde::Serialize;

use super::config::ModelConfig;
use super::layers::{ConvSpec, DFAB_DENSE_LAYERS};
use super::ssawb::tile_spans;
use crate::error::{dim_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Grid {
    Lr,
    Hr,
}

fn residual_groups(out: &mut Vec<(ConvSpec, Grid)>, c: &ModelConfig, depth: usize, groups: usize, grid: Grid) {
    let cf = c.base_channels;
    for _ in 0..depth {
        for _ in 0..c.dfabs_per_group {
            for j in 0..DFAB_DENSE_LAYERS {
                out.push((ConvSpec::new(cf + j * c.growth, c.growth, 1, groups), grid));
            }
            out.push((ConvSpec::new(cf + DFAB_DENSE_LAYERS * c.growth, cf, 1, groups), grid));
        }
        out.push((ConvSpec::new(cf, cf, 3, groups), grid));
    }
}

fn conv_inventory(c: &ModelConfig) -> Vec<(ConvSpec, Grid)> {
    let cf = c.base_channels;
    let d = c.attention_dim();
    let mut out = Vec::new();
    let branches = [
        (c.bands, c.depth_q, c.groups, Grid::Lr),
        (c.msi_bands, c.depth_k, 1, Grid::Hr),
        (c.bands + c.msi_bands, c.depth_v, 1, Grid::Lr),
        (c.bands + c.msi_bands, c.depth_z, 1, Grid::Hr),
    ];
    for (cin, depth, groups, grid) in branches {
        out.push((ConvSpec::new(cin, cf, 3, 1), grid));
        residual_groups(&mut out, c, depth, groups, grid);
    }
    for _ in 0..4 {
        out.push((ConvSpec::new(cf, d, 1, 1), Grid::Hr));
    }
    out.push((ConvSpec::new(d, d, 1, 1), Grid::Hr));
    out.push((ConvSpec::new(4 * d, 4 * d, 1, 1), Grid::Hr));
    out.push((ConvSpec::new(d, cf, 1, 1), Grid::Hr));
    out.push((ConvSpec::new(cf, c.bands, 3, 1), Grid::Hr));
    out
}

/// Trainable scalars of the network described by `config`.
pub fn symbolic_param_count(config: &ModelConfig) -> usize {
    conv_inventory(config).iter().map(|(s, _)| s.param_count()).sum()
}

/// Tensor shapes flowing through one forward pass, all NCHW.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShapePlan {
    pub x_h: [usize; 4],
    pub x_m: [usize; 4],
    pub f_q: [usize; 4],
    pub f_k: [usize; 4],
    pub f_v: [usize; 4],
    pub f_z: [usize; 4],
    /// Projected token maps on the HR grid.
    pub tokens: [usize; 4],
    pub attention_tiles: usize,
    pub largest_tile_tokens: usize,
    pub fused: [usize; 4],
    pub output: [usize; 4],
}

/// Propagate shapes for inputs `x_h = (N, M, H, W)` and `x_m = (N, M_m, sH, sW)`.
pub fn shape_plan(config: &ModelConfig, x_h: [usize; 4], x_m: [usize; 4]) -> Result<ShapePlan> {
    config.validate()?;
    let c = config;
    let [n, m, h, w] = x_h;
    if m != c.bands || x_m[1] != c.msi_bands || x_m[0] != n {
        return Err(dim_err!("input shapes {x_h:?} / {x_m:?} do not match the config bands"));
    }
    if x_m[2] != h * c.scale || x_m[3] != w * c.scale {
        return Err(dim_err!("scale mismatch: {x_h:?} vs {x_m:?} at scale {}", c.scale));
    }
    let (hh, hw) = (x_m[2], x_m[3]);
    let cf = c.base_channels;
    let rows = tile_spans(hh, c.attention_tile);
    let cols = tile_spans(hw, c.attention_tile);
    Ok(ShapePlan {
        x_h,
        x_m,
        f_q: [n, cf, h, w],
        f_k: [n, cf, hh, hw],
        f_v: [n, cf, h, w],
        f_z: [n, cf, hh, hw],
        tokens: [n, c.attention_dim(), hh, hw],
        attention_tiles: rows.len() * cols.len(),
        largest_tile_tokens: rows[0].1 * cols[0].1,
        fused: [n, cf, hh, hw],
        output: [n, c.bands, hh, hw],
    })
}

/// Forward FLOPs counted as 2·MACs over convolutions and attention matmuls.
/// Elementwise ops, resampling and softmax are not counted.
pub fn flops_estimate(config: &ModelConfig, x_h: [usize; 4], x_m: [usize; 4]) -> Result<u64> {
    let plan = shape_plan(config, x_h, x_m)?;
    let n = x_h[0] as u64;
    let (h, w) = (x_h[2], x_h[3]);
    let (hh, hw) = (x_m[2], x_m[3]);
    let mut macs: u64 = conv_inventory(config)
        .iter()
        .map(|(s, grid)| match grid {
            Grid::Lr => s.macs(h, w),
            Grid::Hr => s.macs(hh, hw),
        })
        .sum();
    let d = plan.tokens[1] as u64;
    for (_, rh) in tile_spans(hh, config.attention_tile) {
        for (_, cw) in tile_spans(hw, config.attention_tile) {
            let t = (rh * cw) as u64;
            // Q·Kᵀ and A·V
            macs += 2 * t * t * d;
        }
    }
    Ok(2 * n * macs)
}
