//! Fusion quality scores, the noise benchmark, and activation analyses
//! (channel energy and layer similarity).

mod bench;
mod cka;
mod energy;
mod quality;

pub use bench::{
    bicubic_baseline, bilinear_baseline, branch_cka_matrix, evaluate, noise_bench, reconstruct, reports_to_csv,
    MetricsReport, ReportContext,
};
pub use cka::{cka, cka_tensors, CkaMatrix};
pub use energy::{energy_distribution, gini, EnergyDistribution};
pub use quality::{
    ergas, format_db, inf_as_string, psnr, rmse_metric, sam_metric, spectral_angle, QualityMetrics,
    METRIC_EPS,
};
