//! Browser bindings. Each exported call simulates one scene from a seed and
//! hands back plain arrays for the page to draw.

use s3rnet::data::{add_awgn, measured_snr_db, simulate_scene, DatasetSpec, FusionSample, HsiCube};
use s3rnet::metrics::{bicubic_baseline, energy_distribution, QualityMetrics};
use s3rnet::model::{InitScheme, ModelConfig, S3RNet};
use wasm_bindgen::prelude::*;

fn js(e: s3rnet::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn scene(size: usize, bands: usize, msi_bands: usize, scale: usize, seed: u64) -> s3rnet::Result<FusionSample> {
    let spec = DatasetSpec { scenes: 1, size, bands, msi_bands, scale, endmembers: 4, seed };
    spec.validate()?;
    Ok(simulate_scene(&spec, 0)?.sample)
}

/// False-colour RGBA from three bands spread over the spectrum, scaled by
/// the cube maximum and clamped.
pub fn to_rgba(cube: &HsiCube) -> Vec<u8> {
    let (h, w, m) = cube.dims();
    let picks = [(m - 1) * 4 / 5, (m - 1) / 2, (m - 1) / 5];
    let peak = cube.max_value().max(f32::MIN_POSITIVE);
    let mut out = Vec::with_capacity(h * w * 4);
    for r in 0..h {
        for c in 0..w {
            for &b in &picks {
                out.push(((cube.get(r, c, b) / peak).clamp(0.0, 1.0) * 255.0).round() as u8);
            }
            out.push(255);
        }
    }
    out
}

#[wasm_bindgen]
pub struct Preview {
    side: usize,
    low_side: usize,
    target: Vec<u8>,
    low: Vec<u8>,
    multi: Vec<u8>,
}

#[wasm_bindgen]
impl Preview {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }
    #[wasm_bindgen(getter)]
    pub fn low_side(&self) -> usize {
        self.low_side
    }
    /// RGBA of the HR target `Y`.
    pub fn target(&self) -> Vec<u8> {
        self.target.clone()
    }
    /// RGBA of the LR hyperspectral observation.
    pub fn low(&self) -> Vec<u8> {
        self.low.clone()
    }
    /// RGBA of the HR multispectral observation.
    pub fn multi(&self) -> Vec<u8> {
        self.multi.clone()
    }
}

pub fn preview(size: usize, bands: usize, msi_bands: usize, scale: usize, seed: u64) -> s3rnet::Result<Preview> {
    let s = scene(size, bands, msi_bands, scale, seed)?;
    Ok(Preview {
        side: size,
        low_side: s.xh.height(),
        target: to_rgba(&s.y),
        low: to_rgba(&s.xh),
        multi: to_rgba(&s.xm),
    })
}

/// Simulate a scene and show `Y`, `X_h` and `X_m` side by side.
#[wasm_bindgen]
pub fn degradation_preview(size: usize, bands: usize, msi_bands: usize, scale: usize, seed: u64) -> Result<Preview, JsError> {
    preview(size, bands, msi_bands, scale, seed).map_err(js)
}

#[wasm_bindgen]
#[derive(Clone, Copy, Debug)]
pub struct NoiseReport {
    pub measured_snr_db: f64,
    pub clean_psnr: f64,
    pub clean_sam: f64,
    pub noisy_psnr: f64,
    pub noisy_sam: f64,
    pub noisy_rmse: f64,
    pub noisy_ergas: f64,
}

/// Bicubic reconstructions from clean and noisy `X_h`, both scored against `Y`.
pub fn noise_report(
    size: usize,
    bands: usize,
    msi_bands: usize,
    scale: usize,
    seed: u64,
    snr_db: f64,
) -> s3rnet::Result<NoiseReport> {
    let s = scene(size, bands, msi_bands, scale, seed)?;
    let noisy = add_awgn(&s.xh, snr_db, seed ^ 0x5eed)?;
    let clean = QualityMetrics::compute(&bicubic_baseline(&s.xh, scale)?, &s.y, scale)?;
    let dirty = QualityMetrics::compute(&bicubic_baseline(&noisy, scale)?, &s.y, scale)?;
    Ok(NoiseReport {
        measured_snr_db: measured_snr_db(&s.xh, &noisy),
        clean_psnr: clean.psnr_db,
        clean_sam: clean.sam_deg,
        noisy_psnr: dirty.psnr_db,
        noisy_sam: dirty.sam_deg,
        noisy_rmse: dirty.rmse,
        noisy_ergas: dirty.ergas,
    })
}

#[wasm_bindgen]
pub fn noise_metrics(
    size: usize,
    bands: usize,
    msi_bands: usize,
    scale: usize,
    seed: u64,
    snr_db: f64,
) -> Result<NoiseReport, JsError> {
    noise_report(size, bands, msi_bands, scale, seed, snr_db).map_err(js)
}

#[wasm_bindgen]
pub struct EnergyReport {
    energies: Vec<f64>,
    channels: Vec<u32>,
    pub top_quarter: f64,
    pub gini: f64,
    pub params: usize,
}

#[wasm_bindgen]
impl EnergyReport {
    /// Normalised energies, largest first.
    pub fn energies(&self) -> Vec<f64> {
        self.energies.clone()
    }
    /// Channel index of each entry in `energies`.
    pub fn channels(&self) -> Vec<u32> {
        self.channels.clone()
    }
}

pub fn energy_report(size: usize, bands: usize, msi_bands: usize, scale: usize, seed: u64, kaiming: bool) -> s3rnet::Result<EnergyReport> {
    let s = scene(size, bands, msi_bands, scale, seed)?;
    let init = if kaiming { InitScheme::Kaiming } else { InitScheme::ZeroResidual };
    let net = S3RNet::<f32>::new(ModelConfig::toy(bands, msi_bands, scale), init, seed)?;
    let dump = net.infer_with_activations(&s.xh.to_tensor(), &s.xm.to_tensor())?;
    let d = energy_distribution(&dump.fused)?;
    Ok(EnergyReport {
        top_quarter: d.top_mass(0.25),
        gini: d.gini,
        params: net.param_count(),
        channels: d.channels.iter().map(|&c| c as u32).collect(),
        energies: d.energies,
    })
}

/// Fused-channel energy of a freshly initialised small network.
#[wasm_bindgen]
pub fn fused_energy(size: usize, bands: usize, msi_bands: usize, scale: usize, seed: u64, kaiming: bool) -> Result<EnergyReport, JsError> {
    energy_report(size, bands, msi_bands, scale, seed, kaiming).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preview_sizes() {
        let p = preview(32, 8, 3, 4, 1).unwrap();
        assert_eq!((p.side, p.low_side), (32, 8));
        assert_eq!(p.target.len(), 32 * 32 * 4);
        assert_eq!(p.low.len(), 8 * 8 * 4);
        assert_eq!(p.multi.len(), 32 * 32 * 4);
        assert!(p.target.chunks(4).all(|px| px[3] == 255));
        assert!(preview(30, 8, 3, 4, 1).is_err());
    }

    #[test]
    fn noise_hurts_the_baseline() {
        let quiet = noise_report(32, 8, 3, 4, 2, 35.0).unwrap();
        let loud = noise_report(32, 8, 3, 4, 2, 10.0).unwrap();
        assert!((quiet.measured_snr_db - 35.0).abs() < 0.5);
        assert_eq!(quiet.clean_psnr, loud.clean_psnr);
        assert!(loud.noisy_psnr < quiet.noisy_psnr && quiet.noisy_psnr <= quiet.clean_psnr + 0.5);
    }

    #[test]
    fn energies_are_a_distribution() {
        let r = energy_report(16, 8, 3, 4, 3, true).unwrap();
        assert_eq!(r.energies.len(), 16);
        assert!((r.energies.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(r.top_quarter >= 0.25);
        let mut seen = r.channels.clone();
        seen.sort();
        assert_eq!(seen, (0..16).collect::<Vec<u32>>());
    }
}
