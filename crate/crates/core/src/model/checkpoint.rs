//! Checkpoints are a pair of files sharing a stem: `<stem>.json` holds the
//! model config, a tensor table (name, shape, byte offset) and free-form
//! metadata; `<stem>.bin` holds every tensor as little-endian f32,
//! concatenated in table order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::net::S3RNet;
use super::params::ParamStore;
use crate::data::sha256_hex;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const CHECKPOINT_FORMAT: &str = "s3rnet-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const PARAM_PREFIX: &str = "param/";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: u64,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub format: String,
    pub version: u32,
    pub model: ModelConfig,
    pub tensors: Vec<TensorEntry>,
    pub blob_sha256: String,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

/// In-memory checkpoint: model config, named tensors and metadata.
/// Network parameters are stored under [`PARAM_PREFIX`]; other sections
/// (optimizer moments, for instance) use their own prefixes.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub tensors: Vec<(String, Tensor<f32>)>,
    pub metadata: serde_json::Value,
}

impl Checkpoint {
    pub fn from_model(net: &S3RNet<f32>, metadata: serde_json::Value) -> Self {
        let tensors = net
            .params()
            .iter()
            .map(|(name, t)| (format!("{PARAM_PREFIX}{name}"), t.clone()))
            .collect();
        Self { model: net.config().clone(), tensors, metadata }
    }

    /// Tensors whose name starts with `prefix`, with the prefix removed.
    pub fn section(&self, prefix: &str) -> Vec<(&str, &Tensor<f32>)> {
        self.tensors
            .iter()
            .filter_map(|(n, t)| n.strip_prefix(prefix).map(|rest| (rest, t)))
            .collect()
    }

    pub fn push_section<'a>(&mut self, prefix: &str, tensors: impl IntoIterator<Item = (&'a str, &'a Tensor<f32>)>) {
        for (name, t) in tensors {
            self.tensors.push((format!("{prefix}{name}"), t.clone()));
        }
    }

    pub fn to_model(&self) -> Result<S3RNet<f32>> {
        let mut store = ParamStore::new();
        for (name, t) in self.section(PARAM_PREFIX) {
            store.add(name, t.clone());
        }
        S3RNet::from_params(self.model.clone(), store)
    }
}

/// Strip a trailing `.json` or `.bin` so either file or the bare stem can be
/// passed around.
pub fn checkpoint_stem(path: impl AsRef<Path>) -> PathBuf {
    let p = path.as_ref();
    match p.extension().and_then(|e| e.to_str()) {
        Some("json" | "bin") => p.with_extension(""),
        _ => p.to_path_buf(),
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn save_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<PathBuf> {
    let stem = checkpoint_stem(path);
    let mut blob = Vec::new();
    let mut entries = Vec::with_capacity(ckpt.tensors.len());
    for (name, t) in &ckpt.tensors {
        let offset = blob.len() as u64;
        for v in t.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
        entries.push(TensorEntry {
            name: name.clone(),
            shape: t.shape().to_vec(),
            offset,
            bytes: blob.len() as u64 - offset,
        });
    }
    let manifest = CheckpointManifest {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        model: ckpt.model.clone(),
        tensors: entries,
        blob_sha256: sha256_hex(&blob),
        metadata: ckpt.metadata.clone(),
    };
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(with_suffix(&stem, ".bin"), &blob)?;
    fs::write(with_suffix(&stem, ".json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(stem)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let stem = checkpoint_stem(path);
    let manifest: CheckpointManifest = serde_json::from_slice(&fs::read(with_suffix(&stem, ".json"))?)?;
    if manifest.format != CHECKPOINT_FORMAT || manifest.version != CHECKPOINT_VERSION {
        return Err(Error::Format {
            offset: 0,
            message: format!("unsupported checkpoint {} v{}", manifest.format, manifest.version),
        });
    }
    let blob = fs::read(with_suffix(&stem, ".bin"))?;
    if sha256_hex(&blob) != manifest.blob_sha256 {
        return Err(Error::Format { offset: 0, message: "checkpoint blob hash mismatch".into() });
    }
    let mut tensors = Vec::with_capacity(manifest.tensors.len());
    for e in &manifest.tensors {
        let numel: usize = e.shape.iter().product();
        let (start, end) = (e.offset as usize, e.offset as usize + numel * 4);
        if e.bytes as usize != numel * 4 || end > blob.len() {
            return Err(Error::Format {
                offset: e.offset,
                message: format!("tensor {} declares {} bytes for shape {:?}", e.name, e.bytes, e.shape),
            });
        }
        let data = blob[start..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        tensors.push((e.name.clone(), Tensor::new(&e.shape, data)?));
    }
    Ok(Checkpoint { model: manifest.model, tensors, metadata: manifest.metadata })
}
