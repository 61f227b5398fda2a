#![allow(dead_code)]

pub mod grad_suite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3rnet::tensor::{Graph, Tensor, Var};
use s3rnet::Result;

pub const STEP: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(shape: &[usize], lo: f64, hi: f64, r: &mut ChaCha8Rng) -> Tensor<f64> {
    Tensor::rand_uniform(shape, lo, hi, r)
}

/// `|a − n| / max(|a|, |n|, floor)`.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Central-difference check of `f(inputs)` (a scalar) against reverse-mode
/// gradients for every element listed in `probe` as `(input, flat index)`.
/// Returns the worst relative error.
pub fn gradcheck<F>(f: F, inputs: &[Tensor<f64>], probe: &[(usize, usize)], floor: f64) -> f64
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    let eval = |xs: &[Tensor<f64>]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = xs.iter().map(|t| g.param(t.clone())).collect();
        let out = f(&mut g, &vars).unwrap();
        g.value(out).item().unwrap()
    };
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let out = f(&mut g, &vars).unwrap();
    g.backward(out).unwrap();
    let grads: Vec<Tensor<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(v, t)| g.grad(*v).unwrap_or_else(|| Tensor::zeros(t.shape())))
        .collect();

    let mut worst: f64 = 0.0;
    let mut xs = inputs.to_vec();
    for &(i, j) in probe {
        let orig = xs[i].data()[j];
        xs[i].data_mut()[j] = orig + STEP;
        let up = eval(&xs);
        xs[i].data_mut()[j] = orig - STEP;
        let down = eval(&xs);
        xs[i].data_mut()[j] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        worst = worst.max(rel_err(grads[i].data()[j], numeric, floor));
    }
    worst
}

/// Every element of every input.
pub fn all_elements(inputs: &[Tensor<f64>]) -> Vec<(usize, usize)> {
    inputs
        .iter()
        .enumerate()
        .flat_map(|(i, t)| (0..t.numel()).map(move |j| (i, j)))
        .collect()
}

/// A random `fraction` of elements (at least one per call).
pub fn sample_elements(inputs: &[Tensor<f64>], fraction: f64, r: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let all = all_elements(inputs);
    let k = ((all.len() as f64 * fraction).ceil() as usize).max(1);
    (0..k).map(|_| all[r.random_range(0..all.len())]).collect()
}

/// Reduce any tensor to a scalar through a fixed random weighting so that
/// every output element carries a distinct cotangent.
pub fn weighted_sum(g: &mut Graph<f64>, x: Var, seed: u64) -> Result<Var> {
    let w = uniform(g.shape(x), -1.0, 1.0, &mut rng(seed ^ 0xabcdef));
    let w = g.input(w);
    let y = g.mul(x, w)?;
    g.sum(y)
}
