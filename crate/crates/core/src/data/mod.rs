//! Hyperspectral cubes: synthetic scenes, the observation model, noise,
//! augmentation and file I/O.

mod augment;
mod cube;
mod dataset;
mod degrade;
pub mod io;
mod noise;
mod synth;

pub use augment::{augment, crop, flip_cols, flip_rows, rotate90, Augmentation, CropWindow, FusionSample};
pub use cube::HsiCube;
pub use dataset::{
    generate_dataset, load_dataset, save_dataset, sha256_hex, simulate_scene, DatasetManifest,
    DatasetSpec, Scene, SceneMeta,
};
pub use degrade::{
    apply_spectral_response, build_spectral_response, spatial_degrade, spectral_degrade,
    DegradationConfig, SpectralResponse,
};
pub use io::{load_cube, save_cube};
pub use noise::{add_awgn, measured_snr_db, signal_power};
pub use synth::{generate_scene, generate_synthetic_hsi, SyntheticScene, SyntheticSceneSpec};
