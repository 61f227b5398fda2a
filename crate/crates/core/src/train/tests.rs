use super::*;
use crate::data::{generate_dataset, DatasetSpec, FusionSample};
use crate::model::{InitScheme, ModelConfig, S3RNet};

fn tiny() -> (ModelConfig, Vec<FusionSample>) {
    let spec = DatasetSpec { scenes: 3, size: 8, bands: 6, msi_bands: 3, scale: 2, endmembers: 3, seed: 5 };
    let scenes = generate_dataset(&spec).unwrap().into_iter().map(|s| s.sample).collect();
    let cfg = ModelConfig {
        depth_q: 1,
        depth_k: 1,
        depth_v: 1,
        depth_z: 1,
        base_channels: 8,
        growth: 4,
        ..ModelConfig::toy(6, 3, 2)
    };
    (cfg, scenes)
}

fn train_cfg() -> TrainConfig {
    TrainConfig { batch_size: 2, epochs: 6, lr0: 2e-3, seed: 9, checkpoint_interval: 2, ..TrainConfig::default() }
}

#[test]
fn cosine_schedule_endpoints() {
    assert_eq!(cosine_lr(0, 10, 0.5).unwrap(), 0.5);
    assert!((cosine_lr(5, 10, 0.5).unwrap() - 0.25).abs() < 1e-15);
    let lrs: Vec<f64> = (0..50).map(|e| cosine_lr(e, 50, 1.0).unwrap()).collect();
    assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    assert!(matches!(cosine_lr(10, 10, 0.5), Err(crate::Error::Usage(_))));
}

#[test]
fn config_validation() {
    assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
    assert!(TrainConfig { lr0: 0.0, ..TrainConfig::default() }.validate().is_err());
    assert!(TrainConfig { sam_weight: -0.1, ..TrainConfig::default() }.validate().is_err());
    let parsed: Result<TrainConfig, _> = serde_json::from_str(r#"{"epochs": 3, "bogus": 1}"#);
    assert!(parsed.is_err());
}

#[test]
fn empty_dataset_is_usage_error() {
    let (cfg, _) = tiny();
    let mut net = S3RNet::new(cfg, InitScheme::Kaiming, 1).unwrap();
    let err = fit(&mut net, &[], &[], &train_cfg(), FitOptions::default()).unwrap_err();
    assert!(matches!(err, crate::Error::Usage(_)));
}

#[test]
fn log_lr_column_follows_schedule_and_runs_repeat() {
    let (cfg, scenes) = tiny();
    let tc = train_cfg();
    let run = || {
        let mut net = S3RNet::new(cfg.clone(), InitScheme::Kaiming, 1).unwrap();
        let rep = fit(&mut net, &scenes, &scenes[..1], &tc, FitOptions::default()).unwrap();
        (net, rep)
    };
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(a.params(), b.params());
    assert_eq!(ra.epochs, rb.epochs);
    for r in &ra.epochs {
        assert_eq!(r.lr, cosine_lr(r.epoch, tc.epochs, tc.lr0).unwrap());
        assert!(r.val_psnr.is_some());
    }
    // 3 scenes at batch 2: two batches per epoch
    assert_eq!(ra.steps.len(), 12);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let (cfg, scenes) = tiny();
    let tc = train_cfg();
    let dir = tempfile::tempdir().unwrap();

    let mut full = S3RNet::new(cfg.clone(), InitScheme::Kaiming, 1).unwrap();
    let whole = fit(&mut full, &scenes, &[], &tc, FitOptions::default()).unwrap();

    let mut part = S3RNet::new(cfg, InitScheme::Kaiming, 1).unwrap();
    let opts = FitOptions { out_dir: Some(dir.path().to_path_buf()), stop_before_epoch: Some(2), ..Default::default() };
    let first = fit(&mut part, &scenes, &[], &tc, opts).unwrap();
    let resumed = load_training_checkpoint(dir.path().join("ckpt_last")).unwrap();
    assert_eq!(resumed.state.next_epoch, 2);
    assert_eq!(resumed.train, tc);
    let mut model = resumed.model;
    let opts = FitOptions { out_dir: Some(dir.path().to_path_buf()), resume: Some(resumed.state), ..Default::default() };
    let second = fit(&mut model, &scenes, &[], &tc, opts).unwrap();

    let joined: Vec<f64> = first.steps.iter().chain(&second.steps).map(|s| s.loss).collect();
    let straight: Vec<f64> = whole.steps.iter().map(|s| s.loss).collect();
    assert_eq!(joined, straight);
    assert_eq!(model.params(), full.params());

    let log = std::fs::read_to_string(dir.path().join("train_log.csv")).unwrap();
    assert_eq!(log.lines().next(), Some(LOG_HEADER));
    assert_eq!(log.lines().count(), 1 + tc.epochs);
}

#[test]
fn non_finite_loss_names_the_batch() {
    let (cfg, mut scenes) = tiny();
    scenes.truncate(1);
    scenes[0].xh.data_mut()[0] = f32::INFINITY;
    let mut net = S3RNet::new(cfg, InitScheme::Kaiming, 1).unwrap();
    let tc = TrainConfig { augment: false, ..train_cfg() };
    match fit(&mut net, &scenes, &[], &tc, FitOptions::default()) {
        Err(crate::Error::Diverged { epoch: 0, batch: 0, .. }) => {}
        other => panic!("{other:?}"),
    }
}
