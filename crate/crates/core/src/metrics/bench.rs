use serde::{Deserialize, Serialize};

use super::cka::CkaMatrix;
use super::quality::{format_db, QualityMetrics};
use crate::data::{add_awgn, FusionSample, HsiCube};
use crate::error::{usage_err, Result};
use crate::model::S3RNet;
use crate::parallel::par_map;
use crate::seed::mix_seed;
use crate::tensor::kernels::upsample_bilinear;

/// Where a set of scores came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportContext {
    pub config_hash: String,
    pub seed: u64,
    /// `None` for clean inputs.
    pub snr_db: Option<f64>,
    pub msi_bands: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub metrics: QualityMetrics,
    pub context: ReportContext,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "snr_db,psnr,sam,rmse,ergas";

    pub fn csv_row(&self) -> String {
        let m = &self.metrics;
        let snr = self.context.snr_db.map_or_else(|| "inf".to_string(), |s| format!("{s}"));
        format!("{snr},{},{:.6},{:.6},{:.6}", format_db(m.psnr_db), m.sam_deg, m.rmse, m.ergas)
    }
}

pub fn reports_to_csv(reports: &[MetricsReport]) -> String {
    let mut out = format!("{}\n", MetricsReport::CSV_HEADER);
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Run the network on one sample and return the reconstruction as a cube.
pub fn reconstruct(model: &S3RNet<f32>, sample: &FusionSample) -> Result<HsiCube> {
    let out = model.infer(&sample.xh.to_tensor(), &sample.xm.to_tensor())?;
    HsiCube::from_tensor(&out, 0)
}

/// Per-sample scores of `model` on `samples`.
pub fn evaluate(model: &S3RNet<f32>, samples: &[FusionSample]) -> Result<Vec<QualityMetrics>> {
    let ratio = model.config().scale;
    par_map(samples, |_, s| QualityMetrics::compute(&reconstruct(model, s)?, &s.y, ratio)).into_iter().collect()
}

/// Metrics averaged over `samples` for every SNR level. Noise is added to
/// the LR hyperspectral input; `f64::INFINITY` is the clean row. Each scene
/// reuses one noise seed across levels, so rows differ only in noise power.
pub fn noise_bench(
    model: &S3RNet<f32>,
    samples: &[FusionSample],
    snrs_db: &[f64],
    seed: u64,
    config_hash: &str,
) -> Result<Vec<MetricsReport>> {
    if samples.is_empty() {
        return Err(usage_err!("noise benchmark needs at least one scene"));
    }
    let ratio = model.config().scale;
    let mut reports = Vec::with_capacity(snrs_db.len());
    for &snr in snrs_db {
        let scores = par_map(samples, |i, s| {
            let noisy = FusionSample { xh: add_awgn(&s.xh, snr, mix_seed(seed, i as u64))?, ..s.clone() };
            QualityMetrics::compute(&reconstruct(model, &noisy)?, &s.y, ratio)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        reports.push(MetricsReport {
            metrics: QualityMetrics::mean(&scores).expect("non-empty"),
            context: ReportContext {
                config_hash: config_hash.to_string(),
                seed,
                snr_db: snr.is_finite().then_some(snr),
                msi_bands: model.config().msi_bands,
            },
        });
    }
    Ok(reports)
}

/// Bilinear upsampling of the LR cube, ignoring the MSI input.
pub fn bilinear_baseline(xh: &HsiCube, scale: usize) -> Result<HsiCube> {
    let (h, w, m) = xh.dims();
    let data = upsample_bilinear(xh.data(), m, h, w, scale);
    HsiCube::new(h * scale, w * scale, m, data)
}

/// Keys cubic convolution kernel, `a = -0.5`.
fn cubic_weight(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

/// Four clamped source indices and weights per output position, on the same
/// half-pixel grid as the bilinear path.
fn cubic_taps(extent: usize, factor: usize) -> Vec<[(usize, f64); 4]> {
    (0..extent * factor)
        .map(|o| {
            let src = (o as f64 + 0.5) / factor as f64 - 0.5;
            let base = src.floor();
            let frac = src - base;
            std::array::from_fn(|k| {
                let i = (base as i64 + k as i64 - 1).clamp(0, extent as i64 - 1) as usize;
                (i, cubic_weight(frac - (k as f64 - 1.0)))
            })
        })
        .collect()
}

/// Model-free reference: separable bicubic upsampling of `X_h`.
pub fn bicubic_baseline(xh: &HsiCube, scale: usize) -> Result<HsiCube> {
    if scale == 0 {
        return Err(usage_err!("scale must be positive"));
    }
    let (h, w, m) = xh.dims();
    let (oh, ow) = (h * scale, w * scale);
    let rows = cubic_taps(h, scale);
    let cols = cubic_taps(w, scale);
    let mut out = Vec::with_capacity(m * oh * ow);
    let mut tmp = vec![0.0f64; h * ow];
    for k in 0..m {
        let src = xh.band(k);
        for i in 0..h {
            for (o, taps) in cols.iter().enumerate() {
                tmp[i * ow + o] = taps.iter().map(|&(j, wt)| wt * src[i * w + j] as f64).sum();
            }
        }
        for taps in &rows {
            for o in 0..ow {
                out.push(taps.iter().map(|&(i, wt)| wt * tmp[i * ow + o]).sum::<f64>() as f32);
            }
        }
    }
    HsiCube::new(oh, ow, m, out)
}

/// CKA between every residual group output of all four branches, for a
/// batch of probe inputs `(N, M, H, W)` / `(N, M_m, sH, sW)`.
pub fn branch_cka_matrix(model: &S3RNet<f32>, probes: &[FusionSample]) -> Result<CkaMatrix> {
    if probes.len() < 2 {
        return Err(usage_err!("branch CKA needs at least 2 probe inputs, got {}", probes.len()));
    }
    let xh = HsiCube::stack(&probes.iter().map(|s| &s.xh).collect::<Vec<_>>())?;
    let xm = HsiCube::stack(&probes.iter().map(|s| &s.xm).collect::<Vec<_>>())?;
    let dump = model.infer_with_activations(&xh, &xm)?;
    CkaMatrix::compute(&dump.groups)
}
