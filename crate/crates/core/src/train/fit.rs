use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, OptimizerState};
use super::loss::fusion_loss;
use super::{cosine_lr, TrainConfig};
use crate::data::{Augmentation, FusionSample, HsiCube};
use crate::error::{usage_err, Error, Result};
use crate::metrics::{evaluate, format_db, QualityMetrics};
use crate::model::{load_checkpoint, save_checkpoint, Checkpoint, S3RNet};
use crate::seed::mix_seed;
use crate::tensor::{Element, Graph, Tensor};

pub const LOG_HEADER: &str = "epoch,lr,train_loss,val_psnr,val_sam";
const ADAM_M: &str = "adam.m/";
const ADAM_V: &str = "adam.v/";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Mean total loss over the epoch's batches.
    pub train_loss: f64,
    /// Mean L1 term over the epoch's batches.
    pub train_l1: f64,
    pub val_psnr: Option<f64>,
    pub val_sam: Option<f64>,
}

impl EpochRecord {
    fn csv_row(&self) -> String {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
        format!(
            "{},{:e},{:.9e},{},{}",
            self.epoch,
            self.lr,
            self.train_loss,
            opt(self.val_psnr, format_db),
            opt(self.val_sam, |v| format!("{v:.6}")),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
    pub l1: f64,
}

/// Everything needed to continue a run besides the model weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub next_epoch: usize,
    pub optimizer: OptimizerState,
}

#[derive(Clone, Debug, Default)]
pub struct FitOptions {
    /// Receives `train_log.csv` and checkpoints when set.
    pub out_dir: Option<PathBuf>,
    pub resume: Option<TrainState>,
    /// Embedded in checkpoint metadata.
    pub config_hash: String,
    /// Stop before this epoch even if the schedule runs longer.
    pub stop_before_epoch: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub steps: Vec<StepRecord>,
    pub state: TrainState,
}

/// One entry per parameter, `None` where the loss does not reach it.
pub type Gradients = Vec<Option<Tensor<f32>>>;

/// One forward/backward pass over a stacked batch. Returns
/// `(loss, l1, gradients)`.
pub fn compute_gradients(model: &S3RNet<f32>, batch: &[&FusionSample], sam_weight: f64) -> Result<(f64, f64, Gradients)> {
    let stack = |f: fn(&FusionSample) -> &HsiCube| HsiCube::stack::<f32>(&batch.iter().map(|s| f(s)).collect::<Vec<_>>());
    let (xh, xm, y) = (stack(|s| &s.xh)?, stack(|s| &s.xm)?, stack(|s| &s.y)?);
    let mut g = Graph::new();
    let p = model.params().bind(&mut g, true);
    let (xh, xm, y) = (g.input(xh), g.input(xm), g.input(y));
    let out = model.forward(&mut g, &p, xh, xm)?;
    let terms = fusion_loss(&mut g, out.output, y, sam_weight)?;
    let loss = g.value(terms.total).item().expect("scalar").as_f64();
    let l1 = g.value(terms.l1).item().expect("scalar").as_f64();
    g.backward(terms.total)?;
    let grads = p.vars().iter().map(|v| g.grad(*v)).collect();
    Ok((loss, l1, grads))
}

/// A fresh log starts with `# config_hash=...` when a hash is known, then
/// the column header.
fn open_log(dir: &Path, resuming: bool, config_hash: &str) -> Result<fs::File> {
    fs::create_dir_all(dir)?;
    let path = dir.join("train_log.csv");
    let fresh = !resuming || !path.exists();
    let mut file = OpenOptions::new().create(true).append(resuming).write(true).truncate(!resuming).open(&path)?;
    if fresh {
        if !config_hash.is_empty() {
            writeln!(file, "# config_hash={config_hash}")?;
        }
        writeln!(file, "{LOG_HEADER}")?;
    }
    Ok(file)
}

/// Train `model` in place on `train`, validating on `val` every
/// `eval_interval` epochs.
pub fn fit(
    model: &mut S3RNet<f32>,
    train: &[FusionSample],
    val: &[FusionSample],
    cfg: &TrainConfig,
    opts: FitOptions,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(usage_err!("training set is empty"));
    }
    let scale = model.config().scale;
    for s in train.iter().chain(val) {
        if s.scale()? != scale {
            return Err(usage_err!("sample scale {} does not match model scale {scale}", s.scale()?));
        }
    }
    let resuming = opts.resume.is_some();
    let mut state = match opts.resume {
        Some(s) => s,
        None => TrainState { next_epoch: 0, optimizer: OptimizerState::new(model.params()) },
    };
    let mut log = opts.out_dir.as_deref().map(|d| open_log(d, resuming, &opts.config_hash)).transpose()?;
    let end = opts.stop_before_epoch.map_or(cfg.epochs, |e| e.min(cfg.epochs));
    let mut epochs = Vec::new();
    let mut steps = Vec::new();

    while state.next_epoch < end {
        let epoch = state.next_epoch;
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, epoch as u64));
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng);
        let mut samples = Vec::with_capacity(order.len());
        for &i in &order {
            let s = &train[i];
            samples.push(if cfg.augment {
                let aug = Augmentation::draw(s.xh.height(), s.xh.width(), scale, cfg.crop_size, &mut rng)?;
                aug.apply(s)?
            } else {
                s.clone()
            });
        }

        let (mut loss_sum, mut l1_sum, mut batches) = (0.0, 0.0, 0usize);
        for (b, chunk) in samples.chunks(cfg.batch_size).enumerate() {
            let refs: Vec<&FusionSample> = chunk.iter().collect();
            let diverged = |detail: String| Error::Diverged { epoch, batch: b, detail };
            let (loss, l1, grads) = match compute_gradients(model, &refs, cfg.sam_weight) {
                Err(Error::NonFinite { op }) => return Err(diverged(format!("{op} produced a non-finite value"))),
                other => other?,
            };
            if !loss.is_finite() {
                return Err(diverged(format!("loss = {loss}")));
            }
            adam_step(model.params_mut(), &grads, &mut state.optimizer, lr)?;
            steps.push(StepRecord { epoch, batch: b, loss, l1 });
            loss_sum += loss;
            l1_sum += l1;
            batches += 1;
        }

        let (val_psnr, val_sam) = if !val.is_empty() && (epoch + 1) % cfg.eval_interval == 0 {
            let m = QualityMetrics::mean(&evaluate(model, val)?).expect("non-empty");
            (Some(m.psnr_db), Some(m.sam_deg))
        } else {
            (None, None)
        };
        let record = EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / batches as f64,
            train_l1: l1_sum / batches as f64,
            val_psnr,
            val_sam,
        };
        log::info!("{}", record.csv_row());
        if let Some(f) = log.as_mut() {
            writeln!(f, "{}", record.csv_row())?;
        }
        epochs.push(record);
        state.next_epoch = epoch + 1;

        if let Some(dir) = opts.out_dir.as_deref() {
            let due = cfg.checkpoint_interval > 0 && state.next_epoch % cfg.checkpoint_interval == 0;
            if due || state.next_epoch == cfg.epochs {
                let ck = training_checkpoint(model, &state, cfg, &opts.config_hash);
                save_checkpoint(dir.join(format!("ckpt_epoch{:05}", state.next_epoch)), &ck)?;
                save_checkpoint(dir.join("ckpt_last"), &ck)?;
            }
        }
    }
    Ok(TrainReport { epochs, steps, state })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingMeta {
    next_epoch: usize,
    adam_step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    train: TrainConfig,
    config_hash: String,
}

/// Weights, optimizer moments and schedule position in one checkpoint.
pub fn training_checkpoint(model: &S3RNet<f32>, state: &TrainState, cfg: &TrainConfig, config_hash: &str) -> Checkpoint {
    let o = &state.optimizer;
    let meta = TrainingMeta {
        next_epoch: state.next_epoch,
        adam_step: o.step,
        beta1: o.beta1,
        beta2: o.beta2,
        eps: o.eps,
        train: cfg.clone(),
        config_hash: config_hash.to_string(),
    };
    let mut ck = Checkpoint::from_model(model, serde_json::to_value(meta).expect("plain struct"));
    let names: Vec<&str> = model.params().iter().map(|(n, _)| n).collect();
    ck.push_section(ADAM_M, names.iter().copied().zip(&o.m));
    ck.push_section(ADAM_V, names.iter().copied().zip(&o.v));
    ck
}

/// A resumable run restored from disk.
pub struct Resumed {
    pub model: S3RNet<f32>,
    pub state: TrainState,
    pub train: TrainConfig,
    pub config_hash: String,
}

pub fn load_training_checkpoint(path: impl AsRef<Path>) -> Result<Resumed> {
    let ck = load_checkpoint(path)?;
    let meta: TrainingMeta = serde_json::from_value(ck.metadata.clone())
        .map_err(|e| usage_err!("checkpoint carries no training state: {e}"))?;
    let model = ck.to_model()?;
    let collect = |prefix: &str| -> Vec<Tensor<f32>> { ck.section(prefix).into_iter().map(|(_, t)| t.clone()).collect() };
    let optimizer = OptimizerState {
        beta1: meta.beta1,
        beta2: meta.beta2,
        eps: meta.eps,
        step: meta.adam_step,
        m: collect(ADAM_M),
        v: collect(ADAM_V),
    };
    Ok(Resumed {
        model,
        state: TrainState { next_epoch: meta.next_epoch, optimizer },
        train: meta.train,
        config_hash: meta.config_hash,
    })
}
