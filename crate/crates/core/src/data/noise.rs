use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::HsiCube;
use crate::error::{usage_err, Result};

/// Add zero-mean white Gaussian noise at `snr_db` relative to the cube's
/// mean signal power. `f64::INFINITY` means no noise. The result is not
/// clipped.
pub fn add_awgn(x: &HsiCube, snr_db: f64, seed: u64) -> Result<HsiCube> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(usage_err!("invalid SNR {snr_db} dB"));
    }
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let power = signal_power(x.data());
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for v in out.data_mut() {
        let n: f64 = StandardNormal.sample(&mut rng);
        *v = (*v as f64 + sigma * n) as f32;
    }
    Ok(out)
}

pub fn signal_power(values: &[f32]) -> f64 {
    values.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / values.len() as f64
}

/// `10·log10(Σ clean² / Σ (noisy − clean)²)`.
pub fn measured_snr_db(clean: &HsiCube, noisy: &HsiCube) -> f64 {
    let signal: f64 = clean.data().iter().map(|&v| (v as f64).powi(2)).sum();
    let noise: f64 =
        clean.data().iter().zip(noisy.data()).map(|(&c, &n)| (n as f64 - c as f64).powi(2)).sum();
    10.0 * (signal / noise).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_hsi, SyntheticSceneSpec};

    fn cube() -> HsiCube {
        generate_synthetic_hsi(&SyntheticSceneSpec { seed: 2, ..Default::default() }, 64, 64, 6)
            .unwrap()
    }

    #[test]
    fn infinite_snr_is_noise_free() {
        let x = cube();
        assert_eq!(add_awgn(&x, f64::INFINITY, 1).unwrap(), x);
        assert!(add_awgn(&x, f64::NAN, 1).is_err());
    }

    #[test]
    fn measured_snr_tracks_request() {
        let x = cube();
        for snr in [35.0, 15.0, 0.0] {
            let a = measured_snr_db(&x, &add_awgn(&x, snr, 1).unwrap());
            let b = measured_snr_db(&x, &add_awgn(&x, snr, 2).unwrap());
            assert!((a - snr).abs() < 0.5, "{a} vs {snr}");
            assert!((a - b).abs() < 0.5);
        }
        assert_ne!(add_awgn(&x, 15.0, 1).unwrap(), add_awgn(&x, 15.0, 2).unwrap());
        assert_eq!(add_awgn(&x, 15.0, 1).unwrap(), add_awgn(&x, 15.0, 1).unwrap());
    }

    #[test]
    fn noisy_values_are_not_clipped() {
        let x = cube();
        let noisy = add_awgn(&x, 0.0, 4).unwrap();
        assert!(noisy.data().iter().any(|&v| !(0.0..=1.0).contains(&v)));
    }
}
