use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::tensor::{Graph, Tensor};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bits(t: &Tensor<f32>) -> Vec<u32> {
    t.data().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn zero_residual_dfab_and_groups_are_identities() {
    let mut r = rng(3);
    let x = Tensor::<f32>::rand_uniform(&[2, 8, 5, 4], -1.0, 1.0, &mut r);
    for groups in [1, 2, 4] {
        let mut store = ParamStore::new();
        let dfab = blocks::dfab(&mut store, &mut r, InitScheme::ZeroResidual, 8, 4, groups);
        let rg = blocks::residual_group(&mut store, &mut r, InitScheme::ZeroResidual, "rg", 8, 4, 3, groups);
        let mut g = Graph::new();
        let p = store.bind(&mut g, false);
        let xv = g.input(x.clone());
        let a = dfab.forward(&mut g, &p, xv).unwrap();
        let b = rg.forward(&mut g, &p, xv).unwrap();
        assert_eq!(bits(g.value(a)), bits(&x));
        assert_eq!(bits(g.value(b)), bits(&x));
    }
}

#[test]
fn zero_residual_branch_reduces_to_transition() {
    let mut r = rng(4);
    let mut store = ParamStore::new();
    let br = blocks::branch(&mut store, &mut r, InitScheme::ZeroResidual, 3, 8, 4, 4, 2);
    let x = Tensor::<f32>::rand_uniform(&[1, 3, 6, 6], -1.0, 1.0, &mut r);
    let mut g = Graph::new();
    let p = store.bind(&mut g, false);
    let xv = g.input(x);
    let out = br.forward(&mut g, &p, xv).unwrap();
    let t = br.transition.forward(&mut g, &p, xv).unwrap();
    let t = g.leaky_relu(t, LEAKY_SLOPE).unwrap();
    assert_eq!(bits(g.value(out.output)), bits(g.value(t)));
    assert_eq!(out.group_outputs.len(), 4);
}

#[test]
fn dfab_channel_mismatch_is_dimension_error() {
    let mut r = rng(5);
    let mut store = ParamStore::<f32>::new();
    let dfab = blocks::dfab(&mut store, &mut r, InitScheme::Kaiming, 8, 4, 1);
    let mut g = Graph::new();
    let p = store.bind(&mut g, false);
    let xv = g.input(Tensor::zeros(&[1, 6, 2, 2]));
    assert!(matches!(dfab.forward(&mut g, &p, xv), Err(crate::Error::Dimension(_))));
}

/// Dense weight equivalent to a grouped weight: block-diagonal over groups.
fn expand_grouped(w: &Tensor<f32>, groups: usize) -> Tensor<f32> {
    let s = w.shape();
    let (cout, cin_g, k) = (s[0], s[1], s[2] * s[3]);
    let cout_g = cout / groups;
    let mut out = Tensor::zeros(&[cout, cin_g * groups, s[2], s[3]]);
    for o in 0..cout {
        let grp = o / cout_g;
        for i in 0..cin_g {
            let src = (o * cin_g + i) * k;
            let dst = (o * cin_g * groups + grp * cin_g + i) * k;
            out.data_mut()[dst..dst + k].copy_from_slice(&w.data()[src..src + k]);
        }
    }
    out
}

#[test]
fn grouped_residual_group_matches_block_diagonal_dense_group() {
    let mut r = rng(6);
    let mut grouped = ParamStore::<f32>::new();
    let grg = blocks::residual_group(&mut grouped, &mut r, InitScheme::Kaiming, "g", 8, 4, 2, 2);
    let mut dense = ParamStore::<f32>::new();
    let rg = blocks::residual_group(&mut dense, &mut r, InitScheme::Kaiming, "g", 8, 4, 2, 1);
    let ids: Vec<_> = grouped.ids().collect();
    for id in ids {
        let t = grouped.get(id);
        let expanded = if t.ndim() == 4 { expand_grouped(t, 2) } else { t.clone() };
        dense.set(id, expanded).unwrap();
    }
    let x = Tensor::<f32>::rand_uniform(&[1, 8, 5, 5], -1.0, 1.0, &mut r);
    let run = |store: &ParamStore<f32>, group: &ResidualGroup| {
        let mut g = Graph::new();
        let p = store.bind(&mut g, false);
        let xv = g.input(x.clone());
        let y = group.forward(&mut g, &p, xv).unwrap();
        g.value(y).clone()
    };
    let a = run(&grouped, &grg);
    let b = run(&dense, &rg);
    assert!(a.max_abs_diff(&b) < 1e-5, "{}", a.max_abs_diff(&b));
}

#[test]
fn grouped_one_equals_plain_under_shared_weights() {
    let mut store = ParamStore::<f32>::new();
    let a = blocks::residual_group(&mut store, &mut rng(7), InitScheme::Kaiming, "a", 8, 4, 2, 1);
    let mut other = ParamStore::<f32>::new();
    let b = blocks::residual_group(&mut other, &mut rng(7), InitScheme::Kaiming, "a", 8, 4, 2, 1);
    assert_eq!(store, other);
    let x = Tensor::<f32>::rand_uniform(&[1, 8, 4, 4], -1.0, 1.0, &mut rng(8));
    let mut g = Graph::new();
    let p = store.bind(&mut g, false);
    let xv = g.input(x);
    let ya = a.forward(&mut g, &p, xv).unwrap();
    let yb = b.forward(&mut g, &p, xv).unwrap();
    assert_eq!(bits(g.value(ya)), bits(g.value(yb)));
}

#[test]
fn ssawb_gates_and_attention_rows() {
    let mut r = rng(9);
    let mut store = ParamStore::<f32>::new();
    let block = blocks::ssawb(&mut store, &mut r, 8, 4, 2, 4);
    let lr = Tensor::<f32>::rand_uniform(&[1, 8, 3, 3], -1.0, 1.0, &mut r);
    let hr = Tensor::<f32>::rand_uniform(&[1, 8, 6, 6], -1.0, 1.0, &mut r);
    let mut g = Graph::new();
    let p = store.bind(&mut g, false);
    let (l, h) = (g.input(lr), g.input(hr));
    let out = block.forward(&mut g, &p, l, h, l, h).unwrap();
    assert_eq!(g.shape(out.fused), &[1, 8, 6, 6]);
    // a 6×6 grid in tiles of side 4 gives 2×2 tiles
    assert_eq!(out.attention.len(), 4);
    for a in &out.attention {
        let t = g.value(*a);
        let n = t.shape()[2];
        for row in t.data().chunks(n) {
            let s: f64 = row.iter().map(|&v| v as f64).sum();
            assert!((s - 1.0).abs() < 1e-6);
        }
    }
    assert!(g.value(out.gates).data().iter().all(|&w| w > 0.0 && w < 1.0));
}

#[test]
fn ssawb_zero_adapt_gives_half_gates() {
    let mut r = rng(10);
    let mut store = ParamStore::<f32>::new();
    let block = blocks::ssawb(&mut store, &mut r, 8, 4, 1, 64);
    store.set(block.adapt.weight, Tensor::zeros(&[16, 16, 1, 1])).unwrap();
    let x = Tensor::<f32>::rand_uniform(&[1, 8, 4, 4], -1.0, 1.0, &mut r);
    let mut g = Graph::new();
    let p = store.bind(&mut g, false);
    let xv = g.input(x);
    let out = block.forward(&mut g, &p, xv, xv, xv, xv).unwrap();
    assert!(g.value(out.gates).data().iter().all(|&w| w == 0.5));
    let mut expect = g.value(out.q).clone();
    for v in [out.k, out.v, out.z_prime] {
        for (e, x) in expect.data_mut().iter_mut().zip(g.value(v).data()) {
            *e += x;
        }
    }
    let expect = expect.map(|v| 0.5 * v);
    assert!(g.value(out.weighted).max_abs_diff(&expect) < 1e-6);
}

#[test]
fn network_shape_law_and_determinism() {
    let cfg = ModelConfig { depth_q: 1, depth_k: 1, depth_v: 1, depth_z: 1, ..ModelConfig::toy(16, 4, 4) };
    let net = S3RNet::<f32>::new(cfg, InitScheme::Kaiming, 11).unwrap();
    let mut r = rng(12);
    let xh = Tensor::rand_uniform(&[1, 16, 8, 8], 0.0, 1.0, &mut r);
    let xm = Tensor::rand_uniform(&[1, 4, 32, 32], 0.0, 1.0, &mut r);
    let a = net.infer(&xh, &xm).unwrap();
    let b = net.infer(&xh, &xm).unwrap();
    assert_eq!(a.shape(), &[1, 16, 32, 32]);
    assert_eq!(bits(&a), bits(&b));
    assert!(a.is_finite());

    let dump = net.infer_with_activations(&xh, &xm).unwrap();
    assert_eq!(dump.branches[0].1.shape(), &[1, 16, 8, 8]);
    assert_eq!(dump.branches[1].1.shape(), &[1, 16, 32, 32]);
    assert_eq!(dump.branches[2].1.shape(), &[1, 16, 8, 8]);
    assert_eq!(dump.branches[3].1.shape(), &[1, 16, 32, 32]);
    assert_eq!(dump.groups.len(), 4);

    let bad = Tensor::zeros(&[1, 4, 24, 24]);
    assert!(matches!(net.infer(&xh, &bad), Err(crate::Error::Dimension(_))));
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let cfg = ModelConfig { depth_q: 1, depth_k: 1, depth_v: 1, depth_z: 1, ..ModelConfig::toy(8, 4, 2) };
    let net = S3RNet::<f32>::new(cfg, InitScheme::Kaiming, 13).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ck = Checkpoint::from_model(&net, serde_json::json!({"epoch": 3}));
    let stem = save_checkpoint(dir.path().join("ck"), &ck).unwrap();
    let back = load_checkpoint(stem.with_extension("json")).unwrap();
    assert_eq!(back, ck);
    let restored = back.to_model().unwrap();
    assert_eq!(restored.params(), net.params());

    let bin = dir.path().join("ck.bin");
    let mut blob = std::fs::read(&bin).unwrap();
    blob[10] ^= 1;
    std::fs::write(&bin, blob).unwrap();
    assert!(matches!(load_checkpoint(&stem), Err(crate::Error::Format { .. })));
}
