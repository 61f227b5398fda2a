use serde::{Deserialize, Serialize};

use crate::data::HsiCube;
use crate::error::{dim_err, Result};

/// Norm and mean clamp shared by SAM and ERGAS.
pub const METRIC_EPS: f64 = 1e-8;

fn check(y_star: &HsiCube, y: &HsiCube) -> Result<()> {
    if y_star.dims() != y.dims() {
        return Err(dim_err!("metric inputs differ: {:?} vs {:?}", y_star.dims(), y.dims()));
    }
    Ok(())
}

fn mse(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&p, &q)| (p as f64 - q as f64).powi(2)).sum::<f64>() / a.len() as f64
}

/// Peak signal-to-noise ratio in dB over the whole cube. `peak` defaults to
/// the reference maximum. Identical cubes give `f64::INFINITY`.
pub fn psnr(y_star: &HsiCube, y: &HsiCube, peak: Option<f64>) -> Result<f64> {
    check(y_star, y)?;
    let err = mse(y_star.data(), y.data());
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = peak.unwrap_or_else(|| y.max_value() as f64);
    Ok(10.0 * (peak * peak / err).log10())
}

/// Angle in radians between two spectra. Norms are clamped at
/// [`METRIC_EPS`]; two bitwise-identical spectra (including all-zero ones)
/// are at angle 0.
pub fn spectral_angle(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(METRIC_EPS);
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(METRIC_EPS);
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Mean per-pixel spectral angle in degrees.
pub fn sam_metric(y_star: &HsiCube, y: &HsiCube) -> Result<f64> {
    check(y_star, y)?;
    let (h, w, m) = y.dims();
    let plane = h * w;
    let (ds, dy) = (y_star.data(), y.data());
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    let mut total = 0.0;
    for p in 0..plane {
        for k in 0..m {
            a[k] = ds[k * plane + p] as f64;
            b[k] = dy[k * plane + p] as f64;
        }
        total += spectral_angle(&a, &b);
    }
    Ok((total / plane as f64).to_degrees())
}

pub fn rmse_metric(y_star: &HsiCube, y: &HsiCube) -> Result<f64> {
    check(y_star, y)?;
    Ok(mse(y_star.data(), y.data()).sqrt())
}

/// `100/ratio · sqrt(mean_b (RMSE_b / μ_b)²)` with `μ_b` the reference band
/// mean, clamped in magnitude at [`METRIC_EPS`].
pub fn ergas(y_star: &HsiCube, y: &HsiCube, ratio: f64) -> Result<f64> {
    check(y_star, y)?;
    let m = y.bands();
    let mut acc = 0.0;
    for band in 0..m {
        let (bs, by) = (y_star.band(band), y.band(band));
        let rmse_b = mse(bs, by).sqrt();
        let mean = by.iter().map(|&v| v as f64).sum::<f64>() / by.len() as f64;
        acc += (rmse_b / mean.abs().max(METRIC_EPS)).powi(2);
    }
    Ok(100.0 / ratio * (acc / m as f64).sqrt())
}

/// The four fusion quality scores of one reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    #[serde(with = "inf_as_string")]
    pub psnr_db: f64,
    pub sam_deg: f64,
    pub rmse: f64,
    pub ergas: f64,
}

impl QualityMetrics {
    pub fn compute(y_star: &HsiCube, y: &HsiCube, ratio: usize) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(y_star, y, None)?,
            sam_deg: sam_metric(y_star, y)?,
            rmse: rmse_metric(y_star, y)?,
            ergas: ergas(y_star, y, ratio as f64)?,
        })
    }

    /// Arithmetic mean of each score. Any infinite PSNR makes the mean infinite.
    pub fn mean(items: &[Self]) -> Option<Self> {
        if items.is_empty() {
            return None;
        }
        let n = items.len() as f64;
        let avg = |f: fn(&Self) -> f64| items.iter().map(f).sum::<f64>() / n;
        Some(Self {
            psnr_db: avg(|m| m.psnr_db),
            sam_deg: avg(|m| m.sam_deg),
            rmse: avg(|m| m.rmse),
            ergas: avg(|m| m.ergas),
        })
    }
}

/// Serialises infinities as `"inf"` / `"-inf"` since JSON has no literal.
pub mod inf_as_string {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            v.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("expected a number or inf, got {other}"))),
            },
        }
    }
}

pub fn format_db(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6}")
    }
}
