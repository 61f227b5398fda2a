use rand::Rng;

use super::params::{kaiming_uniform, Bound, InitScheme, ParamId, ParamStore, LEAKY_SLOPE};
use crate::error::{dim_err, Result};
use crate::tensor::{Element, Graph, Tensor, Var};

/// Scale applied to the fused DFAB output before the residual add.
pub const DFAB_RESIDUAL_SCALE: f64 = 0.2;

/// Dense layers inside one DFAB (a fifth convolution fuses them).
pub const DFAB_DENSE_LAYERS: usize = 4;

pub(crate) struct Builder<'a, T, R> {
    pub store: &'a mut ParamStore<T>,
    pub rng: &'a mut R,
    pub init: InitScheme,
}

impl<T: Element, R: Rng> Builder<'_, T, R> {
    pub fn conv(&mut self, name: &str, spec: ConvSpec, zero: bool) -> Conv {
        let shape = [spec.out_channels, spec.in_channels / spec.groups, spec.kernel, spec.kernel];
        let w = if zero { Tensor::zeros(&shape) } else { kaiming_uniform(&shape, self.rng) };
        let weight = self.store.add(format!("{name}.weight"), w);
        let bias = self.store.add(format!("{name}.bias"), Tensor::zeros(&[spec.out_channels]));
        Conv { weight, bias, spec }
    }

    fn zero_residual(&self) -> bool {
        self.init == InitScheme::ZeroResidual
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub groups: usize,
}

impl ConvSpec {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, groups: usize) -> Self {
        Self { in_channels, out_channels, kernel, groups }
    }

    pub fn param_count(&self) -> usize {
        self.out_channels * (self.in_channels / self.groups) * self.kernel * self.kernel
            + self.out_channels
    }

    /// Multiply-accumulates over an `h×w` output grid for a batch of one.
    pub fn macs(&self, h: usize, w: usize) -> u64 {
        (self.out_channels * (self.in_channels / self.groups) * self.kernel * self.kernel * h * w) as u64
    }
}

/// Stride-1 "same" convolution with bias.
#[derive(Clone, Debug)]
pub struct Conv {
    pub weight: ParamId,
    pub bias: ParamId,
    pub spec: ConvSpec,
}

impl Conv {
    pub fn forward<T: Element>(&self, g: &mut Graph<T>, p: &Bound, x: Var) -> Result<Var> {
        g.conv2d(x, p[self.weight], Some(p[self.bias]), 1, self.spec.kernel / 2, self.spec.groups)
    }
}

/// Dense feature aggregation block: four densely connected 1×1 conv +
/// LeakyReLU layers, a fusing 1×1 conv back to the input width, and a
/// 0.2-scaled residual connection.
#[derive(Clone, Debug)]
pub struct Dfab {
    pub dense: Vec<Conv>,
    pub fuse: Conv,
    pub channels: usize,
}

impl Dfab {
    pub(crate) fn build<T: Element, R: Rng>(
        b: &mut Builder<'_, T, R>,
        name: &str,
        channels: usize,
        growth: usize,
        groups: usize,
    ) -> Self {
        let dense = (0..DFAB_DENSE_LAYERS)
            .map(|j| {
                let spec = ConvSpec::new(channels + j * growth, growth, 1, groups);
                b.conv(&format!("{name}.dense{}", j + 1), spec, false)
            })
            .collect();
        let spec = ConvSpec::new(channels + DFAB_DENSE_LAYERS * growth, channels, 1, groups);
        let zero = b.zero_residual();
        let fuse = b.conv(&format!("{name}.fuse"), spec, zero);
        Self { dense, fuse, channels }
    }

    pub fn forward<T: Element>(&self, g: &mut Graph<T>, p: &Bound, x: Var) -> Result<Var> {
        if g.shape(x).get(1) != Some(&self.channels) {
            return Err(dim_err!("DFAB expects {} channels, got {:?}", self.channels, g.shape(x)));
        }
        let mut feats = vec![x];
        for conv in &self.dense {
            let input = if feats.len() == 1 { x } else { g.concat(&feats, 1)? };
            let y = conv.forward(g, p, input)?;
            feats.push(g.leaky_relu(y, LEAKY_SLOPE)?);
        }
        let all = g.concat(&feats, 1)?;
        let fused = self.fuse.forward(g, p, all)?;
        let scaled = g.scale(fused, DFAB_RESIDUAL_SCALE)?;
        g.add(scaled, x)
    }

    pub fn param_count(&self) -> usize {
        self.dense.iter().map(|c| c.spec.param_count()).sum::<usize>() + self.fuse.spec.param_count()
    }
}

/// Stack of DFABs closed by a 3×3 conv, wrapped in a group-wide residual
/// connection. With `groups > 1` every convolution is grouped (the GRG
/// variant).
#[derive(Clone, Debug)]
pub struct ResidualGroup {
    pub blocks: Vec<Dfab>,
    pub tail: Conv,
    pub groups: usize,
}

impl ResidualGroup {
    pub(crate) fn build<T: Element, R: Rng>(
        b: &mut Builder<'_, T, R>,
        name: &str,
        channels: usize,
        growth: usize,
        blocks: usize,
        groups: usize,
    ) -> Self {
        let dfabs = (0..blocks)
            .map(|i| Dfab::build(b, &format!("{name}.dfab{i}"), channels, growth, groups))
            .collect();
        let zero = b.zero_residual();
        let tail = b.conv(&format!("{name}.tail"), ConvSpec::new(channels, channels, 3, groups), zero);
        Self { blocks: dfabs, tail, groups }
    }

    pub fn forward<T: Element>(&self, g: &mut Graph<T>, p: &Bound, x: Var) -> Result<Var> {
        let mut h = x;
        for block in &self.blocks {
            h = block.forward(g, p, h)?;
        }
        let t = self.tail.forward(g, p, h)?;
        g.add(t, x)
    }

    pub fn param_count(&self) -> usize {
        self.blocks.iter().map(Dfab::param_count).sum::<usize>() + self.tail.spec.param_count()
    }
}

/// One feature-extraction branch: a 3×3 transition conv with LeakyReLU into
/// `Cf` channels followed by a chain of residual groups.
#[derive(Clone, Debug)]
pub struct Branch {
    pub name: String,
    pub transition: Conv,
    pub groups: Vec<ResidualGroup>,
}

/// Output of a branch, with each residual group's activation.
#[derive(Clone, Debug)]
pub struct BranchOutput {
    pub output: Var,
    pub group_outputs: Vec<Var>,
}

impl Branch {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build<T: Element, R: Rng>(
        b: &mut Builder<'_, T, R>,
        name: &str,
        in_channels: usize,
        channels: usize,
        growth: usize,
        depth: usize,
        blocks: usize,
        groups: usize,
    ) -> Self {
        let transition =
            b.conv(&format!("{name}.transition"), ConvSpec::new(in_channels, channels, 3, 1), false);
        let rgs = (0..depth)
            .map(|i| ResidualGroup::build(b, &format!("{name}.rg{i}"), channels, growth, blocks, groups))
            .collect();
        Self { name: name.to_string(), transition, groups: rgs }
    }

    pub fn forward<T: Element>(&self, g: &mut Graph<T>, p: &Bound, x: Var) -> Result<BranchOutput> {
        let t = self.transition.forward(g, p, x)?;
        let mut h = g.leaky_relu(t, LEAKY_SLOPE)?;
        let mut group_outputs = Vec::with_capacity(self.groups.len());
        for rg in &self.groups {
            h = rg.forward(g, p, h)?;
            group_outputs.push(h);
        }
        Ok(BranchOutput { output: h, group_outputs })
    }

    pub fn param_count(&self) -> usize {
        self.transition.spec.param_count()
            + self.groups.iter().map(ResidualGroup::param_count).sum::<usize>()
    }
}
