use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HsiCube;
use crate::error::{dim_err, usage_err, Result};

/// Aligned training triple: low-res HSI, high-res MSI, high-res target.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionSample {
    pub xh: HsiCube,
    pub xm: HsiCube,
    pub y: HsiCube,
}

impl FusionSample {
    /// Spatial ratio between the high- and low-resolution members.
    pub fn scale(&self) -> Result<usize> {
        let (h, w) = (self.xh.height(), self.xh.width());
        let s = self.y.height() / h;
        let consistent = s >= 1
            && self.y.height() == s * h
            && self.y.width() == s * w
            && self.xm.height() == self.y.height()
            && self.xm.width() == self.y.width();
        if !consistent {
            return Err(dim_err!(
                "misaligned sample: xh {:?}, xm {:?}, y {:?}",
                self.xh.dims(),
                self.xm.dims(),
                self.y.dims()
            ));
        }
        Ok(s)
    }
}

/// Crop window expressed on the low-resolution grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CropWindow {
    pub row: usize,
    pub col: usize,
    pub size: usize,
}

/// One geometric draw: optional crop, then flips, then `rotations` quarter
/// turns counter-clockwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Augmentation {
    pub crop: Option<CropWindow>,
    pub flip_rows: bool,
    pub flip_cols: bool,
    pub rotations: u8,
}

impl Augmentation {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Random draw. `crop_hr` is the high-resolution crop side, which must be
    /// a multiple of `scale`.
    pub fn draw<R: Rng>(
        lr_height: usize,
        lr_width: usize,
        scale: usize,
        crop_hr: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        let crop = match crop_hr {
            None => None,
            Some(c) => {
                if c == 0 || c % scale != 0 {
                    return Err(usage_err!("crop size {c} is not a positive multiple of scale {scale}"));
                }
                let size = c / scale;
                if size > lr_height || size > lr_width {
                    return Err(usage_err!(
                        "crop {c} exceeds image {}x{}",
                        lr_height * scale,
                        lr_width * scale
                    ));
                }
                Some(CropWindow {
                    row: rng.random_range(0..=lr_height - size),
                    col: rng.random_range(0..=lr_width - size),
                    size,
                })
            }
        };
        Ok(Self {
            crop,
            flip_rows: rng.random(),
            flip_cols: rng.random(),
            rotations: rng.random_range(0..4),
        })
    }

    pub fn apply(&self, sample: &FusionSample) -> Result<FusionSample> {
        let s = sample.scale()?;
        let transform = |cube: &HsiCube, factor: usize| -> Result<HsiCube> {
            let mut out = match self.crop {
                Some(w) => crop(cube, w.row * factor, w.col * factor, w.size * factor)?,
                None => cube.clone(),
            };
            if self.flip_rows {
                out = flip_rows(&out);
            }
            if self.flip_cols {
                out = flip_cols(&out);
            }
            for _ in 0..self.rotations % 4 {
                out = rotate90(&out);
            }
            Ok(out)
        };
        Ok(FusionSample {
            xh: transform(&sample.xh, 1)?,
            xm: transform(&sample.xm, s)?,
            y: transform(&sample.y, s)?,
        })
    }
}

/// Draw and apply one augmentation from `seed`.
pub fn augment(sample: &FusionSample, crop_hr: Option<usize>, seed: u64) -> Result<FusionSample> {
    let s = sample.scale()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aug = Augmentation::draw(sample.xh.height(), sample.xh.width(), s, crop_hr, &mut rng)?;
    aug.apply(sample)
}

pub fn crop(cube: &HsiCube, row: usize, col: usize, size: usize) -> Result<HsiCube> {
    let (h, w, m) = cube.dims();
    if size == 0 || row + size > h || col + size > w {
        return Err(usage_err!("crop {size} at ({row},{col}) exceeds {h}x{w}"));
    }
    let mut out = HsiCube::zeros(size, size, m);
    for b in 0..m {
        for r in 0..size {
            for c in 0..size {
                out.set(r, c, b, cube.get(row + r, col + c, b));
            }
        }
    }
    relabel(out, cube)
}

pub fn flip_rows(cube: &HsiCube) -> HsiCube {
    let (h, w, m) = cube.dims();
    let mut out = cube.clone();
    for b in 0..m {
        for r in 0..h {
            for c in 0..w {
                out.set(r, c, b, cube.get(h - 1 - r, c, b));
            }
        }
    }
    out
}

pub fn flip_cols(cube: &HsiCube) -> HsiCube {
    let (h, w, m) = cube.dims();
    let mut out = cube.clone();
    for b in 0..m {
        for r in 0..h {
            for c in 0..w {
                out.set(r, c, b, cube.get(r, w - 1 - c, b));
            }
        }
    }
    out
}

/// Quarter turn counter-clockwise; a `H×W` cube becomes `W×H`.
pub fn rotate90(cube: &HsiCube) -> HsiCube {
    let (h, w, m) = cube.dims();
    let mut out = HsiCube::zeros(w, h, m);
    for b in 0..m {
        for r in 0..w {
            for c in 0..h {
                out.set(r, c, b, cube.get(c, w - 1 - r, b));
            }
        }
    }
    relabel(out, cube).expect("same band count")
}

fn relabel(out: HsiCube, like: &HsiCube) -> Result<HsiCube> {
    let (h, w, m) = out.dims();
    HsiCube::with_band_ids(h, w, m, out.data().to_vec(), like.band_ids().to_vec())
}
