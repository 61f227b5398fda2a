//! Scene directories: `scene_<id>/{y.hsc, xh.hsc, xm.hsc, meta.json}` plus a
//! `manifest.json` at the dataset root.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::io::{encode_cube, load_cube};
use super::{
    generate_synthetic_hsi, spatial_degrade, spectral_degrade, DegradationConfig, FusionSample,
    SyntheticSceneSpec,
};
use crate::error::{usage_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub scenes: usize,
    /// High-resolution side length.
    pub size: usize,
    pub bands: usize,
    pub msi_bands: usize,
    pub scale: usize,
    pub endmembers: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self { scenes: 4, size: 64, bands: 16, msi_bands: 4, scale: 4, endmembers: 4, seed: 0 }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scenes == 0 {
            return Err(Error::Config("dataset needs at least one scene".into()));
        }
        if self.scale == 0 || !self.size.is_multiple_of(self.scale) {
            return Err(Error::Config(format!(
                "scale {} does not divide image size {}",
                self.scale, self.size
            )));
        }
        if self.msi_bands == 0 || self.msi_bands > self.bands {
            return Err(Error::Config(format!(
                "msi bands {} must be in 1..={}",
                self.msi_bands, self.bands
            )));
        }
        Ok(())
    }

    pub fn degradation(&self) -> Result<DegradationConfig> {
        DegradationConfig::new(self.bands, self.msi_bands, self.scale)
    }

    /// Seed for scene `id`, decorrelated from neighbouring ids.
    pub fn scene_seed(&self, id: usize) -> u64 {
        let mut z = self.seed.wrapping_add((id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub id: usize,
    pub seed: u64,
    pub sample: FusionSample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    pub id: usize,
    pub seed: u64,
    pub scale: usize,
    pub y_dims: [usize; 3],
    pub xh_dims: [usize; 3],
    pub xm_dims: [usize; 3],
    pub y_sha256: String,
    pub xh_sha256: String,
    pub xm_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config_hash: String,
    pub spec: DatasetSpec,
    pub scenes: Vec<SceneMeta>,
}

/// Synthesize a target, then derive its two observations.
pub fn simulate_scene(spec: &DatasetSpec, id: usize) -> Result<Scene> {
    let seed = spec.scene_seed(id);
    let scene_spec = SyntheticSceneSpec { num_endmembers: spec.endmembers, seed, ..Default::default() };
    let y = generate_synthetic_hsi(&scene_spec, spec.size, spec.size, spec.bands)?;
    let cfg = spec.degradation()?;
    let xh = spatial_degrade(&y, &cfg)?;
    let xm = spectral_degrade(&y, &cfg)?;
    Ok(Scene { id, seed, sample: FusionSample { xh, xm, y } })
}

pub fn generate_dataset(spec: &DatasetSpec) -> Result<Vec<Scene>> {
    spec.validate()?;
    (0..spec.scenes).map(|id| simulate_scene(spec, id)).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn scene_dir(root: &Path, id: usize) -> PathBuf {
    root.join(format!("scene_{id:04}"))
}

pub fn save_dataset(
    root: impl AsRef<Path>,
    spec: &DatasetSpec,
    scenes: &[Scene],
    config_hash: &str,
) -> Result<DatasetManifest> {
    let root = root.as_ref();
    fs::create_dir_all(root)?;
    let mut metas = Vec::with_capacity(scenes.len());
    for scene in scenes {
        let dir = scene_dir(root, scene.id);
        fs::create_dir_all(&dir)?;
        let s = &scene.sample;
        let (y, xh, xm) = (encode_cube(&s.y)?, encode_cube(&s.xh)?, encode_cube(&s.xm)?);
        fs::write(dir.join("y.hsc"), &y)?;
        fs::write(dir.join("xh.hsc"), &xh)?;
        fs::write(dir.join("xm.hsc"), &xm)?;
        let dims = |c: &super::HsiCube| [c.height(), c.width(), c.bands()];
        let meta = SceneMeta {
            id: scene.id,
            seed: scene.seed,
            scale: s.scale()?,
            y_dims: dims(&s.y),
            xh_dims: dims(&s.xh),
            xm_dims: dims(&s.xm),
            y_sha256: sha256_hex(&y),
            xh_sha256: sha256_hex(&xh),
            xm_sha256: sha256_hex(&xm),
        };
        fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
        metas.push(meta);
    }
    let manifest =
        DatasetManifest { config_hash: config_hash.to_string(), spec: spec.clone(), scenes: metas };
    fs::write(root.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Load every `scene_*` directory under `root`, ordered by id.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Vec<Scene>> {
    let root = root.as_ref();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("scene_"))
        })
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(usage_err!("no scene_* directories under {}", root.display()));
    }
    dirs.iter()
        .map(|dir| {
            let meta: SceneMeta = serde_json::from_slice(&fs::read(dir.join("meta.json"))?)?;
            let sample = FusionSample {
                y: load_cube(dir.join("y.hsc"))?,
                xh: load_cube(dir.join("xh.hsc"))?,
                xm: load_cube(dir.join("xm.hsc"))?,
            };
            sample.scale()?;
            Ok(Scene { id: meta.id, seed: meta.seed, sample })
        })
        .collect()
}
