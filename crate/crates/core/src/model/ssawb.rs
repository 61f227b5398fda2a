//! Spatial-spectral attention weight block.
//!
//! The four branch features are projected to `d = Cf/r` channels on the HR
//! grid (Q and V are bilinearly upsampled first). Spatial positions act as
//! tokens with `d` features each. Cross-attention refines Z:
//!
//! ```text
//! Z' = Conv1x1(softmax(Q·Kᵀ/√d)·V) + Z
//! W  = sigmoid(Conv1x1_adapt(Cat(Q, K, V, Z')))        // 4d channels
//! F  = W₁⊙Q + W₂⊙K + W₃⊙V + W₄⊙Z'                      // W split channelwise
//! ```
//!
//! and a final 1×1 conv restores `Cf` channels. The gates are independent
//! sigmoids, so a position's four weights need not sum to one.

use rand::Rng;

use super::layers::{Builder, Conv, ConvSpec};
use crate::error::{dim_err, Result};
use crate::tensor::{Element, Graph, Var};
use super::params::Bound;

#[derive(Clone, Debug)]
pub struct Ssawb {
    pub proj_q: Conv,
    pub proj_k: Conv,
    pub proj_v: Conv,
    pub proj_z: Conv,
    pub attn_out: Conv,
    pub adapt: Conv,
    pub restore: Conv,
    pub dim: usize,
    pub scale: usize,
    pub tile: usize,
}

/// Intermediate handles of one SSAWB pass.
#[derive(Clone, Debug)]
pub struct SsawbOutput {
    /// `(N, Cf, H, W)` output after channel restoration.
    pub fused: Var,
    /// Weighted sum before the restoring conv, `(N, d, H, W)`.
    pub weighted: Var,
    /// Sigmoid gates `(N, 4d, H, W)`.
    pub gates: Var,
    pub q: Var,
    pub k: Var,
    pub v: Var,
    pub z: Var,
    pub z_prime: Var,
    /// Row-stochastic attention matrices, one per tile, `(N, T, T)`.
    pub attention: Vec<Var>,
}

impl Ssawb {
    pub(crate) fn build<T: Element, R: Rng>(
        b: &mut Builder<'_, T, R>,
        channels: usize,
        dim: usize,
        scale: usize,
        tile: usize,
    ) -> Self {
        let proj = |b: &mut Builder<'_, T, R>, n: &str| {
            b.conv(&format!("ssawb.proj_{n}"), ConvSpec::new(channels, dim, 1, 1), false)
        };
        let proj_q = proj(b, "q");
        let proj_k = proj(b, "k");
        let proj_v = proj(b, "v");
        let proj_z = proj(b, "z");
        let attn_out = b.conv("ssawb.attn_out", ConvSpec::new(dim, dim, 1, 1), false);
        let adapt = b.conv("ssawb.adapt", ConvSpec::new(4 * dim, 4 * dim, 1, 1), false);
        let restore = b.conv("ssawb.restore", ConvSpec::new(dim, channels, 1, 1), false);
        Self { proj_q, proj_k, proj_v, proj_z, attn_out, adapt, restore, dim, scale, tile }
    }

    /// `f_q`, `f_v` on the LR grid; `f_k`, `f_z` on the HR grid.
    pub fn forward<T: Element>(
        &self,
        g: &mut Graph<T>,
        p: &Bound,
        f_q: Var,
        f_k: Var,
        f_v: Var,
        f_z: Var,
    ) -> Result<SsawbOutput> {
        let up_q = g.upsample(f_q, self.scale)?;
        let up_v = g.upsample(f_v, self.scale)?;
        let q = self.proj_q.forward(g, p, up_q)?;
        let k = self.proj_k.forward(g, p, f_k)?;
        let v = self.proj_v.forward(g, p, up_v)?;
        let z = self.proj_z.forward(g, p, f_z)?;
        let grid = g.shape(q).to_vec();
        for t in [k, v, z] {
            assert_eq!(g.shape(t), grid.as_slice(), "token grids misaligned after upsampling");
        }

        let (context, attention) = self.tiled_attention(g, q, k, v)?;
        let refined = self.attn_out.forward(g, p, context)?;
        let z_prime = g.add(refined, z)?;

        let stacked = g.concat(&[q, k, v, z_prime], 1)?;
        let logits = self.adapt.forward(g, p, stacked)?;
        let gates = g.sigmoid(logits)?;
        let mut weighted = None;
        for (i, feat) in [q, k, v, z_prime].into_iter().enumerate() {
            let w = g.narrow(gates, 1, i * self.dim, self.dim)?;
            let term = g.mul(w, feat)?;
            weighted = Some(match weighted {
                None => term,
                Some(acc) => g.add(acc, term)?,
            });
        }
        let weighted = weighted.expect("four terms");
        let fused = self.restore.forward(g, p, weighted)?;
        Ok(SsawbOutput { fused, weighted, gates, q, k, v, z, z_prime, attention })
    }

    /// Scaled dot-product attention over spatial tokens, computed
    /// independently on square tiles of at most `tile × tile` positions.
    fn tiled_attention<T: Element>(
        &self,
        g: &mut Graph<T>,
        q: Var,
        k: Var,
        v: Var,
    ) -> Result<(Var, Vec<Var>)> {
        let s = g.shape(q).to_vec();
        if s.len() != 4 {
            return Err(dim_err!("attention expects NCHW features, got {s:?}"));
        }
        let (h, w) = (s[2], s[3]);
        let rows = tile_spans(h, self.tile);
        let cols = tile_spans(w, self.tile);
        let mut attention = Vec::new();
        let mut row_bands = Vec::with_capacity(rows.len());
        for &(r0, rh) in &rows {
            let mut tiles = Vec::with_capacity(cols.len());
            for &(c0, cw) in &cols {
                let crop = |g: &mut Graph<T>, x: Var| -> Result<Var> {
                    if rows.len() == 1 && cols.len() == 1 {
                        return Ok(x);
                    }
                    let x = g.narrow(x, 2, r0, rh)?;
                    g.narrow(x, 3, c0, cw)
                };
                let (qt, kt, vt) = (crop(g, q)?, crop(g, k)?, crop(g, v)?);
                let (out, attn) = self.attend(g, qt, kt, vt)?;
                attention.push(attn);
                tiles.push(out);
            }
            row_bands.push(if tiles.len() == 1 { tiles[0] } else { g.concat(&tiles, 3)? });
        }
        let context = if row_bands.len() == 1 { row_bands[0] } else { g.concat(&row_bands, 2)? };
        Ok((context, attention))
    }

    fn attend<T: Element>(&self, g: &mut Graph<T>, q: Var, k: Var, v: Var) -> Result<(Var, Var)> {
        let s = g.shape(q).to_vec();
        let (n, d, h, w) = (s[0], s[1], s[2], s[3]);
        let tokens = h * w;
        let q_flat = g.reshape(q, &[n, d, tokens])?;
        let q_tok = g.transpose(q_flat)?; // (n, T, d)
        let k_flat = g.reshape(k, &[n, d, tokens])?; // already Kᵀ
        let scores = g.matmul(q_tok, k_flat)?;
        let scaled = g.scale(scores, 1.0 / (d as f64).sqrt())?;
        let attn = g.softmax(scaled, 2)?;
        let v_flat = g.reshape(v, &[n, d, tokens])?;
        let v_tok = g.transpose(v_flat)?; // (n, T, d)
        let out_tok = g.matmul(attn, v_tok)?;
        let out_flat = g.transpose(out_tok)?; // (n, d, T)
        let out = g.reshape(out_flat, &[n, d, h, w])?;
        Ok((out, attn))
    }

    pub fn param_count(&self) -> usize {
        [&self.proj_q, &self.proj_k, &self.proj_v, &self.proj_z, &self.attn_out, &self.adapt, &self.restore]
            .iter()
            .map(|c| c.spec.param_count())
            .sum()
    }
}

/// `(start, len)` spans covering `extent` in pieces no longer than `tile`.
pub(crate) fn tile_spans(extent: usize, tile: usize) -> Vec<(usize, usize)> {
    let count = extent.div_ceil(tile.max(1));
    (0..count)
        .map(|i| {
            let start = i * tile;
            (start, tile.min(extent - start))
        })
        .collect()
}
