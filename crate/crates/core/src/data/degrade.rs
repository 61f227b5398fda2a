//! Observation model: the low-resolution HSI is the target blurred and
//! decimated in space, the high-resolution MSI is the target with adjacent
//! bands averaged together.

use serde::{Deserialize, Serialize};

use super::HsiCube;
use crate::error::{dim_err, usage_err, Result};

/// Row-stochastic `M_m × M` band-combination matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResponse {
    rows: Vec<Vec<f64>>,
}

impl SpectralResponse {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(usage_err!("spectral response needs at least one row"));
        };
        let m = first.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(dim_err!("spectral response row {i} has {} entries, expected {m}", row.len()));
            }
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(usage_err!("spectral response row {i} has a negative entry"));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-6 {
                return Err(usage_err!("spectral response row {i} sums to {total}, not 1"));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(bands: usize) -> Self {
        let rows = (0..bands)
            .map(|i| (0..bands).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Number of output (multispectral) bands.
    pub fn out_bands(&self) -> usize {
        self.rows.len()
    }

    /// Number of input (hyperspectral) bands.
    pub fn in_bands(&self) -> usize {
        self.rows[0].len()
    }
}

/// Boxcar averaging over `msi_bands` contiguous partitions of `bands`.
/// Partition `i` covers `[floor(i·M/M_m), floor((i+1)·M/M_m))`.
pub fn build_spectral_response(bands: usize, msi_bands: usize) -> Result<SpectralResponse> {
    if msi_bands == 0 || msi_bands > bands {
        return Err(usage_err!("cannot combine {bands} bands into {msi_bands}"));
    }
    let rows = (0..msi_bands)
        .map(|i| {
            let (lo, hi) = (i * bands / msi_bands, (i + 1) * bands / msi_bands);
            let w = 1.0 / (hi - lo) as f64;
            (0..bands).map(|b| if (lo..hi).contains(&b) { w } else { 0.0 }).collect()
        })
        .collect();
    SpectralResponse::new(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationConfig {
    pub blur_sigma: f64,
    /// Odd kernel support; taps lie within `(size-1)/2` of the sample centre.
    pub blur_kernel_size: usize,
    pub decimation: usize,
    pub spectral_response: SpectralResponse,
}

impl DegradationConfig {
    /// Gaussian blur with `sigma = s/2`, support `2·ceil(3σ)+1`, and boxcar
    /// spectral response.
    pub fn new(bands: usize, msi_bands: usize, decimation: usize) -> Result<Self> {
        if decimation == 0 {
            return Err(usage_err!("decimation factor must be >= 1"));
        }
        let blur_sigma = decimation as f64 / 2.0;
        Ok(Self {
            blur_sigma,
            blur_kernel_size: 2 * (3.0 * blur_sigma).ceil() as usize + 1,
            decimation,
            spectral_response: build_spectral_response(bands, msi_bands)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.decimation == 0 {
            return Err(usage_err!("decimation factor must be >= 1"));
        }
        if self.blur_kernel_size.is_multiple_of(2) {
            return Err(usage_err!("blur kernel size must be odd, got {}", self.blur_kernel_size));
        }
        if !(self.blur_sigma > 0.0) {
            return Err(usage_err!("blur sigma must be positive"));
        }
        Ok(())
    }

    /// Offset of output sample `i`'s centre from `i·s` in HR pixels.
    pub fn sample_offset(&self) -> f64 {
        (self.decimation as f64 - 1.0) / 2.0
    }

    /// Normalised 1-D taps `(offset from first tap, weight)` around a sample
    /// centre. For even decimation the centre falls between pixels.
    pub fn taps(&self) -> (isize, Vec<f64>) {
        let half = ((self.blur_kernel_size - 1) / 2) as f64;
        let c = self.sample_offset();
        let first = (c - half).ceil() as isize;
        let last = (c + half).floor() as isize;
        let raw: Vec<f64> = (first..=last)
            .map(|k| {
                let d = k as f64 - c;
                (-d * d / (2.0 * self.blur_sigma * self.blur_sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        (first, raw.into_iter().map(|w| w / total).collect())
    }
}

/// Per-band Gaussian blur then `s`-fold decimation; borders replicate the
/// edge pixel.
pub fn spatial_degrade(y: &HsiCube, cfg: &DegradationConfig) -> Result<HsiCube> {
    cfg.validate()?;
    let s = cfg.decimation;
    let (h, w, m) = y.dims();
    if h % s != 0 || w % s != 0 {
        return Err(dim_err!("decimation {s} does not divide {h}x{w}"));
    }
    let (oh, ow) = (h / s, w / s);
    let (first, taps) = cfg.taps();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut out = vec![0.0f32; oh * ow * m];
    let mut rows_done = vec![0.0f64; oh * w];
    for b in 0..m {
        let band = y.band(b);
        // vertical pass onto the decimated rows
        for i in 0..oh {
            let base = (i * s) as isize + first;
            for c in 0..w {
                rows_done[i * w + c] = taps
                    .iter()
                    .enumerate()
                    .map(|(t, wt)| wt * band[clamp(base + t as isize, h) * w + c] as f64)
                    .sum();
            }
        }
        let dst = &mut out[b * oh * ow..(b + 1) * oh * ow];
        for i in 0..oh {
            for j in 0..ow {
                let base = (j * s) as isize + first;
                dst[i * ow + j] = taps
                    .iter()
                    .enumerate()
                    .map(|(t, wt)| wt * rows_done[i * w + clamp(base + t as isize, w)])
                    .sum::<f64>() as f32;
            }
        }
    }
    HsiCube::with_band_ids(oh, ow, m, out, y.band_ids().to_vec())
}

/// Map every pixel spectrum through `D`.
pub fn spectral_degrade(y: &HsiCube, cfg: &DegradationConfig) -> Result<HsiCube> {
    apply_spectral_response(y, &cfg.spectral_response)
}

pub fn apply_spectral_response(y: &HsiCube, d: &SpectralResponse) -> Result<HsiCube> {
    let (h, w, m) = y.dims();
    if d.in_bands() != m {
        return Err(dim_err!("spectral response expects {} bands, cube has {m}", d.in_bands()));
    }
    let plane = h * w;
    let mut out = vec![0.0f32; plane * d.out_bands()];
    for (o, row) in d.rows().iter().enumerate() {
        let dst = &mut out[o * plane..(o + 1) * plane];
        let mut acc = vec![0.0f64; plane];
        for (b, &wt) in row.iter().enumerate() {
            if wt == 0.0 {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(y.band(b)) {
                *a += wt * v as f64;
            }
        }
        for (dv, a) in dst.iter_mut().zip(acc) {
            *dv = a as f32;
        }
    }
    HsiCube::new(h, w, d.out_bands(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_cube(h: usize, w: usize, m: usize, seed: u64) -> HsiCube {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        HsiCube::new(h, w, m, (0..h * w * m).map(|_| rng.random::<f32>()).collect()).unwrap()
    }

    #[test]
    fn boxcar_response_partitions() {
        let d = build_spectral_response(4, 2).unwrap();
        assert_eq!(d.rows(), &[vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.5]]);

        let d = build_spectral_response(172, 4).unwrap();
        let supports: Vec<(usize, usize)> = d
            .rows()
            .iter()
            .map(|r| {
                let lo = r.iter().position(|&v| v > 0.0).unwrap();
                let hi = r.iter().rposition(|&v| v > 0.0).unwrap() + 1;
                (lo, hi)
            })
            .collect();
        assert_eq!(supports, vec![(0, 43), (43, 86), (86, 129), (129, 172)]);

        for (m, mm) in [(172, 6), (16, 6), (7, 7), (31, 4)] {
            for row in build_spectral_response(m, mm).unwrap().rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
            }
        }
        assert!(matches!(build_spectral_response(4, 5), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn default_blur_kernel() {
        let cfg = DegradationConfig::new(8, 4, 4).unwrap();
        assert_eq!(cfg.blur_sigma, 2.0);
        assert_eq!(cfg.blur_kernel_size, 13);
        let (_, taps) = cfg.taps();
        assert!((taps.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        // symmetric around the half-pixel centre
        for (a, b) in taps.iter().zip(taps.iter().rev()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn spatial_degrade_shapes() {
        let cfg = DegradationConfig::new(172, 6, 4).unwrap();
        let y = HsiCube::zeros(256, 256, 172);
        assert_eq!(spatial_degrade(&y, &cfg).unwrap().dims(), (64, 64, 172));
        let y = HsiCube::zeros(30, 32, 3);
        let cfg = DegradationConfig::new(3, 1, 4).unwrap();
        assert!(matches!(spatial_degrade(&y, &cfg), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn constants_survive_degradation() {
        let y = HsiCube::new(16, 16, 6, vec![0.375; 16 * 16 * 6]).unwrap();
        for s in [1, 2, 3, 4] {
            let cfg = DegradationConfig::new(6, 3, s).unwrap();
            if 16 % s != 0 {
                continue;
            }
            let xh = spatial_degrade(&y, &cfg).unwrap();
            assert!(xh.data().iter().all(|&v| (v - 0.375).abs() < 1e-6));
            let xm = spectral_degrade(&y, &cfg).unwrap();
            assert!(xm.data().iter().all(|&v| (v - 0.375).abs() < 1e-6));
        }
    }

    /// Explicit `(H·W/s²) × (H·W)` blur-and-decimate matrix, built pixel by
    /// pixel from the 2-D Gaussian.
    fn dense_b(h: usize, w: usize, cfg: &DegradationConfig) -> Vec<Vec<f64>> {
        let s = cfg.decimation;
        let half = ((cfg.blur_kernel_size - 1) / 2) as f64;
        let c0 = (s as f64 - 1.0) / 2.0;
        let (oh, ow) = (h / s, w / s);
        let mut b = vec![vec![0.0; h * w]; oh * ow];
        for i in 0..oh {
            for j in 0..ow {
                let (ci, cj) = (i as f64 * s as f64 + c0, j as f64 * s as f64 + c0);
                let mut weights = Vec::new();
                let lo_r = (ci - half).ceil() as i64;
                let hi_r = (ci + half).floor() as i64;
                let lo_c = (cj - half).ceil() as i64;
                let hi_c = (cj + half).floor() as i64;
                for r in lo_r..=hi_r {
                    for c in lo_c..=hi_c {
                        let d2 = (r as f64 - ci).powi(2) + (c as f64 - cj).powi(2);
                        let wt = (-d2 / (2.0 * cfg.blur_sigma.powi(2))).exp();
                        let rr = r.clamp(0, h as i64 - 1) as usize;
                        let cc = c.clamp(0, w as i64 - 1) as usize;
                        weights.push((rr * w + cc, wt));
                    }
                }
                let total: f64 = weights.iter().map(|(_, wt)| wt).sum();
                for (idx, wt) in weights {
                    b[i * ow + j][idx] += wt / total;
                }
            }
        }
        b
    }

    #[test]
    fn spatial_degrade_equals_dense_matrix() {
        for s in [2, 4] {
            let cfg = DegradationConfig::new(3, 1, s).unwrap();
            let y = random_cube(16, 16, 3, 11 + s as u64);
            let xh = spatial_degrade(&y, &cfg).unwrap();
            let b = dense_b(16, 16, &cfg);
            for band in 0..3 {
                let src = y.band(band);
                for (o, row) in b.iter().enumerate() {
                    let expect: f64 = row.iter().zip(src).map(|(wt, v)| wt * *v as f64).sum();
                    assert!((xh.band(band)[o] as f64 - expect).abs() <= 1e-5);
                }
            }
        }
        // single-band impulse
        let mut y = HsiCube::zeros(16, 16, 1);
        y.set(7, 9, 0, 1.0);
        let cfg = DegradationConfig::new(1, 1, 4).unwrap();
        let xh = spatial_degrade(&y, &cfg).unwrap();
        let b = dense_b(16, 16, &cfg);
        for (o, row) in b.iter().enumerate() {
            assert!((xh.band(0)[o] as f64 - row[7 * 16 + 9]).abs() <= 1e-6);
        }
    }

    #[test]
    fn spectral_degrade_band_counts_and_identity() {
        let y = random_cube(4, 4, 172, 3);
        for mm in [4, 6] {
            let cfg = DegradationConfig::new(172, mm, 4).unwrap();
            assert_eq!(spectral_degrade(&y, &cfg).unwrap().bands(), mm);
        }
        let id = apply_spectral_response(&y, &SpectralResponse::identity(172)).unwrap();
        assert_eq!(id.data(), y.data());
        let wrong = build_spectral_response(10, 2).unwrap();
        assert!(matches!(apply_spectral_response(&y, &wrong), Err(crate::Error::Dimension(_))));
    }
}
