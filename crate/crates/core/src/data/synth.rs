//! Synthetic scenes built by linear spectral mixing.
//!
//! Each scene is `illumination(x) · Σ_i abundance_i(x) · signature_i`, with
//! smooth spectral signatures, smooth softmax-normalised abundance maps and a
//! smooth illumination field, clipped to `[0, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HsiCube;
use crate::error::{usage_err, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSceneSpec {
    pub num_endmembers: usize,
    /// Width of the spectral bumps forming each signature, as a fraction of
    /// the band count.
    pub spectral_smoothness: f64,
    /// Spatial scale of abundance blobs, as a fraction of the image side.
    pub blob_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        Self { num_endmembers: 4, spectral_smoothness: 0.15, blob_scale: 0.25, seed: 0 }
    }
}

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_endmembers == 0 {
            return Err(usage_err!("a scene needs at least one endmember"));
        }
        if !(self.spectral_smoothness > 0.0) || !(self.blob_scale > 0.0) {
            return Err(usage_err!("smoothness and blob scale must be positive"));
        }
        Ok(())
    }
}

/// A generated scene together with its mixing ingredients.
#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub cube: HsiCube,
    /// `k × M` endmember spectra.
    pub signatures: Vec<Vec<f64>>,
    /// `k × (H·W)` abundance fractions, summing to one at each pixel.
    pub abundances: Vec<Vec<f64>>,
    /// `H·W` illumination factors.
    pub illumination: Vec<f64>,
}

pub fn generate_synthetic_hsi(
    spec: &SyntheticSceneSpec,
    height: usize,
    width: usize,
    bands: usize,
) -> Result<HsiCube> {
    Ok(generate_scene(spec, height, width, bands)?.cube)
}

pub fn generate_scene(
    spec: &SyntheticSceneSpec,
    height: usize,
    width: usize,
    bands: usize,
) -> Result<SyntheticScene> {
    spec.validate()?;
    if height == 0 || width == 0 || bands == 0 {
        return Err(usage_err!("scene extents must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.num_endmembers;

    let signatures: Vec<Vec<f64>> =
        (0..k).map(|_| smooth_signature(bands, spec.spectral_smoothness, &mut rng)).collect();

    let side = height.max(width) as f64;
    let logits: Vec<Vec<f64>> =
        (0..k).map(|_| smooth_field(height, width, spec.blob_scale * side, 4.0, &mut rng)).collect();
    let pixels = height * width;
    let mut abundances = vec![vec![0.0; pixels]; k];
    for p in 0..pixels {
        let max = logits.iter().map(|l| l[p]).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logits.iter().map(|l| (l[p] - max).exp()).sum();
        for i in 0..k {
            abundances[i][p] = (logits[i][p] - max).exp() / total;
        }
    }

    let raw = smooth_field(height, width, 0.5 * side, 1.0, &mut rng);
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let illumination: Vec<f64> = raw.iter().map(|v| 0.6 + 0.4 * (v - lo) / span).collect();

    let mut data = vec![0.0f32; pixels * bands];
    for b in 0..bands {
        for p in 0..pixels {
            let mix: f64 = (0..k).map(|i| abundances[i][p] * signatures[i][b]).sum();
            data[b * pixels + p] = (illumination[p] * mix).clamp(0.0, 1.0) as f32;
        }
    }
    let band_ids = (0..bands).map(|b| format!("band_{b:03}")).collect();
    let cube = HsiCube::with_band_ids(height, width, bands, data, band_ids)?;
    Ok(SyntheticScene { cube, signatures, abundances, illumination })
}

/// Baseline plus a few Gaussian bumps over the band index, rescaled into
/// `[0.05, 0.95]`.
fn smooth_signature(bands: usize, smoothness: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let width = (smoothness * bands as f64).max(0.5);
    let bumps: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.random_range(0.0..bands as f64), rng.random_range(-1.0..1.0)))
        .collect();
    let slope = rng.random_range(-0.5..0.5);
    let raw: Vec<f64> = (0..bands)
        .map(|b| {
            let x = b as f64;
            let t = if bands > 1 { x / (bands - 1) as f64 } else { 0.0 };
            slope * t
                + bumps
                    .iter()
                    .map(|&(c, a)| a * (-(x - c).powi(2) / (2.0 * width * width)).exp())
                    .sum::<f64>()
        })
        .collect();
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let level = rng.random_range(0.3..0.7);
    if hi - lo < 1e-12 {
        return vec![level; bands];
    }
    let span = rng.random_range(0.3..0.9);
    raw.iter()
        .map(|v| (level + span * ((v - lo) / (hi - lo) - 0.5)).clamp(0.05, 0.95))
        .collect()
}

/// Sum of random isotropic Gaussian blobs with the given length scale,
/// returned as an `H·W` row-major field with amplitudes up to `amplitude`.
fn smooth_field(
    height: usize,
    width: usize,
    scale: f64,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let scale = scale.max(1.0);
    let blobs: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.0..height as f64),
                rng.random_range(0.0..width as f64),
                rng.random_range(-amplitude..amplitude),
            )
        })
        .collect();
    let mut field = vec![0.0; height * width];
    for r in 0..height {
        for c in 0..width {
            field[r * width + c] = blobs
                .iter()
                .map(|&(br, bc, a)| {
                    let d2 = (r as f64 - br).powi(2) + (c as f64 - bc).powi(2);
                    a * (-d2 / (2.0 * scale * scale)).exp()
                })
                .sum();
        }
    }
    field
}
