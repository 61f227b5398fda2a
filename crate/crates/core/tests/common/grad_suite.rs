//! The gradient-check suite shared by the gradcheck and acceptance targets.

use super::*;
use s3rnet::model::{blocks, Bound, InitScheme, ModelConfig, ParamStore, S3RNet};
use s3rnet::tensor::{Graph, Tensor, Var};
use s3rnet::train::fusion_loss;
use s3rnet::Result;

pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const OP_TOL: f64 = 1e-4;
pub const NETWORK_TOL: f64 = 1e-3;
const FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub seed: u64,
    pub err: f64,
    pub tol: f64,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.err < self.tol
    }
}

pub fn assert_all(outcomes: &[Outcome]) {
    for o in outcomes {
        assert!(o.ok(), "{} seed {}: max rel err {:e} >= {:e}", o.name, o.seed, o.err, o.tol);
    }
}

fn check_op<F>(out: &mut Vec<Outcome>, name: &str, shapes: &[&[usize]], f: F)
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var> + Copy,
{
    for seed in SEEDS {
        let mut r = rng(seed);
        let inputs: Vec<Tensor<f64>> = shapes.iter().map(|s| uniform(s, -1.0, 1.0, &mut r)).collect();
        let wrapped = |g: &mut Graph<f64>, v: &[Var]| {
            let y = f(g, v)?;
            if g.value(y).numel() == 1 { Ok(y) } else { weighted_sum(g, y, seed) }
        };
        let err = gradcheck(wrapped, &inputs, &all_elements(&inputs), FLOOR);
        out.push(Outcome { name: name.into(), seed, err, tol: OP_TOL });
    }
}

pub fn conv_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "conv2d", &[&[2, 3, 5, 5], &[4, 3, 3, 3], &[4]], |g, v| g.conv2d(v[0], v[1], Some(v[2]), 1, 1, 1));
    check_op(&mut o, "conv2d stride 2", &[&[1, 2, 5, 5], &[3, 2, 3, 3]], |g, v| g.conv2d(v[0], v[1], None, 2, 1, 1));
    check_op(&mut o, "conv2d grouped", &[&[1, 4, 4, 4], &[6, 2, 1, 1], &[6]], |g, v| {
        g.conv2d(v[0], v[1], Some(v[2]), 1, 0, 2)
    });
    o
}

pub fn matrix_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "matmul", &[&[2, 3, 4], &[2, 4, 5]], |g, v| g.matmul(v[0], v[1]));
    check_op(&mut o, "transpose", &[&[2, 3, 4]], |g, v| g.transpose(v[0]));
    check_op(&mut o, "reshape", &[&[2, 3, 4]], |g, v| g.reshape(v[0], &[6, 4]));
    o
}

pub fn activation_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "softmax", &[&[2, 5, 3]], |g, v| g.softmax(v[0], 1));
    check_op(&mut o, "softmax last axis", &[&[3, 6]], |g, v| g.softmax(v[0], 1));
    check_op(&mut o, "sigmoid", &[&[2, 7]], |g, v| g.sigmoid(v[0]));
    check_op(&mut o, "leaky_relu", &[&[2, 7]], |g, v| g.leaky_relu(v[0], 0.2));
    o
}

pub fn structural_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "concat", &[&[1, 2, 3, 3], &[1, 3, 3, 3]], |g, v| g.concat(&[v[0], v[1]], 1));
    check_op(&mut o, "narrow", &[&[1, 5, 3, 4]], |g, v| g.narrow(v[0], 3, 1, 2));
    check_op(&mut o, "add", &[&[2, 3], &[2, 3]], |g, v| g.add(v[0], v[1]));
    check_op(&mut o, "mul", &[&[2, 3], &[2, 3]], |g, v| g.mul(v[0], v[1]));
    check_op(&mut o, "scale", &[&[2, 3]], |g, v| g.scale(v[0], -0.7));
    check_op(&mut o, "sum", &[&[2, 3]], |g, v| g.sum(v[0]));
    o
}

pub fn resampling_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "upsample", &[&[1, 2, 3, 4]], |g, v| g.upsample(v[0], 2));
    check_op(&mut o, "upsample x4", &[&[1, 1, 2, 2]], |g, v| g.upsample(v[0], 4));
    check_op(&mut o, "downsample", &[&[1, 2, 6, 4]], |g, v| g.downsample(v[0], 2));
    o
}

pub fn loss_ops() -> Vec<Outcome> {
    let mut o = Vec::new();
    check_op(&mut o, "mean_abs_diff", &[&[2, 3, 2, 2], &[2, 3, 2, 2]], |g, v| g.mean_abs_diff(v[0], v[1]));
    check_op(&mut o, "spectral_angle", &[&[2, 4, 2, 3], &[2, 4, 2, 3]], |g, v| g.spectral_angle(v[0], v[1], 1e-8));
    check_op(&mut o, "fusion_loss", &[&[1, 5, 3, 3], &[1, 5, 3, 3]], |g, v| Ok(fusion_loss(g, v[0], v[1], 0.1)?.total));
    o
}

/// `x` followed by every tensor of `store`.
fn with_params(x: Vec<Tensor<f64>>, store: &ParamStore<f64>) -> Vec<Tensor<f64>> {
    x.into_iter().chain(store.iter().map(|(_, t)| t.clone())).collect()
}

pub fn dfab_block() -> Vec<Outcome> {
    let mut out = Vec::new();
    for seed in SEEDS {
        let mut r = rng(seed);
        let mut store = ParamStore::<f64>::new();
        let block = blocks::dfab(&mut store, &mut r, InitScheme::Kaiming, 4, 2, 2);
        let inputs = with_params(vec![uniform(&[1, 4, 3, 3], -1.0, 1.0, &mut r)], &store);
        let f = |g: &mut Graph<f64>, v: &[Var]| {
            let p = Bound::from_vars(v[1..].to_vec());
            let y = block.forward(g, &p, v[0])?;
            weighted_sum(g, y, seed)
        };
        let err = gradcheck(f, &inputs, &all_elements(&inputs), FLOOR);
        out.push(Outcome { name: "DFAB".into(), seed, err, tol: OP_TOL });
    }
    out
}

pub fn ssawb_block() -> Vec<Outcome> {
    let mut out = Vec::new();
    for seed in SEEDS {
        let mut r = rng(seed);
        let mut store = ParamStore::<f64>::new();
        // tile 3 on a 4×4 grid exercises uneven tiling
        let block = blocks::ssawb(&mut store, &mut r, 4, 2, 2, 3);
        let inputs = with_params(
            vec![
                uniform(&[1, 4, 2, 2], -1.0, 1.0, &mut r),
                uniform(&[1, 4, 4, 4], -1.0, 1.0, &mut r),
                uniform(&[1, 4, 2, 2], -1.0, 1.0, &mut r),
                uniform(&[1, 4, 4, 4], -1.0, 1.0, &mut r),
            ],
            &store,
        );
        let f = |g: &mut Graph<f64>, v: &[Var]| {
            let p = Bound::from_vars(v[4..].to_vec());
            let o = block.forward(g, &p, v[0], v[1], v[2], v[3])?;
            weighted_sum(g, o.fused, seed)
        };
        let err = gradcheck(f, &inputs, &all_elements(&inputs), FLOOR);
        out.push(Outcome { name: "SSAWB".into(), seed, err, tol: OP_TOL });
    }
    out
}

/// Fusion loss of the whole network at 8×8 / 32×32 with `Cf = 16`, probed
/// on a random 1% of the parameters.
pub fn full_network() -> Vec<Outcome> {
    let cfg = ModelConfig {
        depth_q: 1,
        depth_k: 1,
        depth_v: 1,
        depth_z: 1,
        attention_tile: 16,
        ..ModelConfig::toy(8, 4, 4)
    };
    let mut out = Vec::new();
    for seed in SEEDS {
        let net = S3RNet::<f64>::new(cfg.clone(), InitScheme::Kaiming, seed).unwrap();
        let mut r = rng(seed + 100);
        let data = vec![
            uniform(&[1, 8, 8, 8], 0.0, 1.0, &mut r),
            uniform(&[1, 4, 32, 32], 0.0, 1.0, &mut r),
            uniform(&[1, 8, 32, 32], 0.0, 1.0, &mut r),
        ];
        let inputs = with_params(data, net.params());
        let params_only: Vec<_> = all_elements(&inputs).into_iter().filter(|(i, _)| *i >= 3).collect();
        let k = params_only.len().div_ceil(100);
        let probe: Vec<_> = (0..k).map(|_| params_only[r.random_range(0..params_only.len())]).collect();
        let f = |g: &mut Graph<f64>, v: &[Var]| {
            let p = Bound::from_vars(v[3..].to_vec());
            let o = net.forward(g, &p, v[0], v[1])?;
            Ok(fusion_loss(g, o.output, v[2], 0.1)?.total)
        };
        let err = gradcheck(f, &inputs, &probe, FLOOR);
        out.push(Outcome { name: format!("network ({k} params)"), seed, err, tol: NETWORK_TOL });
    }
    out
}

pub fn everything() -> Vec<Outcome> {
    [conv_ops(), matrix_ops(), activation_ops(), structural_ops(), resampling_ops(), loss_ops(), dfab_block(), ssawb_block(), full_network()]
        .concat()
}
