use serde::Serialize;

use crate::error::{dim_err, Result};
use crate::tensor::{Element, Tensor};

/// Per-channel activation energy, normalised to sum to one and sorted in
/// descending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyDistribution {
    /// Normalised energies, largest first.
    pub energies: Vec<f64>,
    /// Original channel index of each entry in `energies`.
    pub channels: Vec<usize>,
    pub gini: f64,
    /// Set when the input carried no energy and the uniform distribution was
    /// substituted.
    pub uniform_fallback: bool,
}

impl EnergyDistribution {
    /// Share of the total energy held by the largest `ceil(fraction·C)`
    /// channels.
    pub fn top_mass(&self, fraction: f64) -> f64 {
        let k = ((fraction * self.energies.len() as f64).ceil() as usize).clamp(1, self.energies.len());
        self.energies[..k].iter().sum()
    }

    /// `rank,channel,energy` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,channel,energy\n");
        for (rank, (c, e)) in self.channels.iter().zip(&self.energies).enumerate() {
            out.push_str(&format!("{rank},{c},{e:.12e}\n"));
        }
        out
    }
}

/// Gini coefficient `Σ_i Σ_j |x_i − x_j| / (2·n·Σx)` of non-negative values.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total == 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Σ_i Σ_j |x_i − x_j| = 2·Σ_i (2i − n + 1)·x_(i) for ascending order
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (2.0 * i as f64 - n as f64 + 1.0) * x).sum();
    weighted / (n as f64 * total)
}

/// Energy `Σ x²` per channel (axis 1) of an `(N, C, …)` tensor.
pub fn energy_distribution<T: Element>(activations: &Tensor<T>) -> Result<EnergyDistribution> {
    let s = activations.shape();
    if s.len() < 2 || s[1] == 0 {
        return Err(dim_err!("energy distribution needs a channel axis, got {s:?}"));
    }
    let c = s[1];
    let inner: usize = s[2..].iter().product();
    let mut raw = vec![0.0f64; c];
    for (i, chunk) in activations.data().chunks(inner.max(1)).enumerate() {
        raw[i % c] += chunk.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>();
    }
    let total: f64 = raw.iter().sum();
    let uniform_fallback = total == 0.0;
    if uniform_fallback {
        log::warn!("fused activations carry no energy; reporting a uniform distribution");
        raw.iter_mut().for_each(|e| *e = 1.0);
    }
    let total: f64 = raw.iter().sum();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    let energies: Vec<f64> = order.iter().map(|&i| raw[i] / total).collect();
    Ok(EnergyDistribution { gini: gini(&energies), energies, channels: order, uniform_fallback })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_and_uniform_extremes() {
        let mut t = Tensor::<f64>::zeros(&[1, 5, 2, 2]);
        t.data_mut()[8..12].copy_from_slice(&[1.0, -2.0, 0.5, 0.0]);
        let d = energy_distribution(&t).unwrap();
        assert_eq!(d.energies, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(d.channels[0], 2);
        assert!((d.gini - 0.8).abs() < 1e-12);

        let u = energy_distribution(&Tensor::<f64>::ones(&[2, 4, 3, 3])).unwrap();
        assert!(u.energies.iter().all(|&e| (e - 0.25).abs() < 1e-15));
        assert!(u.gini.abs() < 1e-12);
        assert!((u.top_mass(0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn all_zero_falls_back_to_uniform() {
        let d = energy_distribution(&Tensor::<f32>::zeros(&[1, 4, 2, 2])).unwrap();
        assert!(d.uniform_fallback);
        assert_eq!(d.energies, vec![0.25; 4]);
    }

    #[test]
    fn csv_has_one_row_per_channel() {
        let d = energy_distribution(&Tensor::<f64>::ones(&[1, 3, 1, 1])).unwrap();
        assert_eq!(d.to_csv().lines().count(), 4);
    }
}
