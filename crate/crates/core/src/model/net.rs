use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::layers::{Branch, BranchOutput, Builder, Conv, ConvSpec};
use super::params::{Bound, InitScheme, ParamStore};
use super::ssawb::{Ssawb, SsawbOutput};
use crate::error::{dim_err, Result};
use crate::tensor::{Element, Graph, Tensor, Var};

/// The full fusion network. Layer structs hold only parameter ids; values
/// live in `params` so one structure can be bound into any graph.
#[derive(Clone, Debug)]
pub struct S3RNet<T> {
    config: ModelConfig,
    params: ParamStore<T>,
    pub q: Branch,
    pub k: Branch,
    pub v: Branch,
    pub z: Branch,
    pub ssawb: Ssawb,
    pub head: Conv,
}

/// Graph handles for everything produced by one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    pub output: Var,
    pub branches: [BranchOutput; 4],
    pub ssawb: SsawbOutput,
}

/// Detached intermediate activations of one inference pass.
#[derive(Clone, Debug)]
pub struct ActivationDump<T> {
    pub output: Tensor<T>,
    /// SSAWB output after channel restoration, `(N, Cf, sH, sW)`.
    pub fused: Tensor<T>,
    /// Gated sum before restoration, `(N, d, sH, sW)`.
    pub weighted: Tensor<T>,
    pub gates: Tensor<T>,
    /// `(label, tensor)` for every residual group output, e.g. `q.rg0`.
    pub groups: Vec<(String, Tensor<T>)>,
    /// Final output of each branch, labelled `q`, `k`, `v`, `z`.
    pub branches: Vec<(String, Tensor<T>)>,
}

pub const BRANCH_NAMES: [&str; 4] = ["q", "k", "v", "z"];

impl<T: Element> S3RNet<T> {
    pub fn new(config: ModelConfig, init: InitScheme, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = Builder { store: &mut store, rng: &mut rng, init };
        let c = &config;
        let (cf, gr, n) = (c.base_channels, c.growth, c.dfabs_per_group);
        let q = Branch::build(&mut b, "q", c.bands, cf, gr, c.depth_q, n, c.groups);
        let k = Branch::build(&mut b, "k", c.msi_bands, cf, gr, c.depth_k, n, 1);
        let v = Branch::build(&mut b, "v", c.bands + c.msi_bands, cf, gr, c.depth_v, n, 1);
        let z = Branch::build(&mut b, "z", c.bands + c.msi_bands, cf, gr, c.depth_z, n, 1);
        let ssawb = Ssawb::build(&mut b, cf, c.attention_dim(), c.scale, c.attention_tile);
        let head = b.conv("head", ConvSpec::new(cf, c.bands, 3, 1), false);
        Ok(Self { config, params: store, q, k, v, z, ssawb, head })
    }

    /// Rebuild the structure for `config` and adopt `params`, which must
    /// match it name for name and shape for shape.
    pub fn from_params(config: ModelConfig, params: ParamStore<T>) -> Result<Self> {
        let mut net = Self::new(config, InitScheme::ZeroResidual, 0)?;
        if net.params.len() != params.len() {
            return Err(dim_err!(
                "expected {} parameter tensors, got {}",
                net.params.len(),
                params.len()
            ));
        }
        for ((want, have), (got, t)) in net.params.iter().zip(params.iter()) {
            if want != got || have.shape() != t.shape() {
                return Err(dim_err!(
                    "parameter mismatch: expected {want} {:?}, got {got} {:?}",
                    have.shape(),
                    t.shape()
                ));
            }
        }
        net.params = params;
        Ok(net)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.scalar_count()
    }

    pub fn cast<U: Element>(&self) -> S3RNet<U> {
        S3RNet {
            config: self.config.clone(),
            params: self.params.cast(),
            q: self.q.clone(),
            k: self.k.clone(),
            v: self.v.clone(),
            z: self.z.clone(),
            ssawb: self.ssawb.clone(),
            head: self.head.clone(),
        }
    }

    pub fn branches(&self) -> [&Branch; 4] {
        [&self.q, &self.k, &self.v, &self.z]
    }

    fn check_inputs(&self, xh: &[usize], xm: &[usize]) -> Result<()> {
        let c = &self.config;
        if xh.len() != 4 || xm.len() != 4 {
            return Err(dim_err!("inputs must be NCHW, got {xh:?} and {xm:?}"));
        }
        if xh[1] != c.bands {
            return Err(dim_err!("LR input has {} bands, config expects {}", xh[1], c.bands));
        }
        if xm[1] != c.msi_bands {
            return Err(dim_err!("HR input has {} bands, config expects {}", xm[1], c.msi_bands));
        }
        if xh[0] != xm[0] {
            return Err(dim_err!("batch sizes differ: {} vs {}", xh[0], xm[0]));
        }
        if xm[2] != xh[2] * c.scale || xm[3] != xh[3] * c.scale {
            return Err(dim_err!(
                "scale mismatch: {}x{} LR and {}x{} HR at scale {}",
                xh[2],
                xh[3],
                xm[2],
                xm[3],
                c.scale
            ));
        }
        Ok(())
    }

    /// Record a forward pass into `g`. `x_h` is `(N, M, H, W)`, `x_m` is
    /// `(N, M_m, sH, sW)`.
    pub fn forward(&self, g: &mut Graph<T>, p: &Bound, x_h: Var, x_m: Var) -> Result<ForwardOutput> {
        self.check_inputs(g.shape(x_h), g.shape(x_m))?;
        let s = self.config.scale;
        let x_m_down = g.downsample(x_m, s)?;
        let x_h_up = g.upsample(x_h, s)?;
        let v_in = g.concat(&[x_m_down, x_h], 1)?;
        let z_in = g.concat(&[x_h_up, x_m], 1)?;

        let fq = self.q.forward(g, p, x_h)?;
        let fk = self.k.forward(g, p, x_m)?;
        let fv = self.v.forward(g, p, v_in)?;
        let fz = self.z.forward(g, p, z_in)?;
        let ssawb = self.ssawb.forward(g, p, fq.output, fk.output, fv.output, fz.output)?;
        let output = self.head.forward(g, p, ssawb.fused)?;
        Ok(ForwardOutput { output, branches: [fq, fk, fv, fz], ssawb })
    }

    pub fn infer(&self, x_h: &Tensor<T>, x_m: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = Graph::new();
        let p = self.params.bind(&mut g, false);
        let (xh, xm) = (g.input(x_h.clone()), g.input(x_m.clone()));
        let out = self.forward(&mut g, &p, xh, xm)?;
        Ok(g.value(out.output).clone())
    }

    pub fn infer_with_activations(&self, x_h: &Tensor<T>, x_m: &Tensor<T>) -> Result<ActivationDump<T>> {
        let mut g = Graph::new();
        let p = self.params.bind(&mut g, false);
        let (xh, xm) = (g.input(x_h.clone()), g.input(x_m.clone()));
        let out = self.forward(&mut g, &p, xh, xm)?;
        let mut groups = Vec::new();
        let mut branches = Vec::new();
        for (name, b) in BRANCH_NAMES.iter().zip(&out.branches) {
            for (i, v) in b.group_outputs.iter().enumerate() {
                groups.push((format!("{name}.rg{i}"), g.value(*v).clone()));
            }
            branches.push((name.to_string(), g.value(b.output).clone()));
        }
        Ok(ActivationDump {
            output: g.value(out.output).clone(),
            fused: g.value(out.ssawb.fused).clone(),
            weighted: g.value(out.ssawb.weighted).clone(),
            gates: g.value(out.ssawb.gates).clone(),
            groups,
            branches,
        })
    }
}
