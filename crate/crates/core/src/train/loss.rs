use crate::error::{dim_err, Result};
use crate::tensor::{Element, Graph, Var};

/// Norm clamp inside the spectral-angle loss.
pub const SAM_LOSS_EPS: f64 = 1e-8;

/// Graph handles of the loss and its two terms.
#[derive(Clone, Copy, Debug)]
pub struct LossTerms {
    pub total: Var,
    pub l1: Var,
    /// Mean per-pixel spectral angle in radians.
    pub sam: Var,
}

/// `mean|y* − y| + sam_weight · mean angle(y*, y)` with spectra along axis 1.
pub fn fusion_loss<T: Element>(g: &mut Graph<T>, y_star: Var, y: Var, sam_weight: f64) -> Result<LossTerms> {
    if g.shape(y_star) != g.shape(y) {
        return Err(dim_err!("loss inputs differ: {:?} vs {:?}", g.shape(y_star), g.shape(y)));
    }
    let l1 = g.mean_abs_diff(y_star, y)?;
    let sam = g.spectral_angle(y_star, y, SAM_LOSS_EPS)?;
    let weighted = g.scale(sam, sam_weight)?;
    let total = g.add(l1, weighted)?;
    Ok(LossTerms { total, l1, sam })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn run(a: &Tensor<f64>, b: &Tensor<f64>, w: f64) -> (f64, f64, f64) {
        let mut g = Graph::new();
        let (x, y) = (g.input(a.clone()), g.input(b.clone()));
        let t = fusion_loss(&mut g, x, y, w).unwrap();
        let v = |g: &Graph<f64>, v| g.value(v).item().unwrap();
        (v(&g, t.total), v(&g, t.l1), v(&g, t.sam))
    }

    #[test]
    fn equal_inputs_give_zero() {
        let y = Tensor::<f64>::from_f64(&[1, 3, 2, 2], &(0..12).map(|v| v as f64 / 7.0).collect::<Vec<_>>()).unwrap();
        assert_eq!(run(&y, &y, 0.1).0, 0.0);
    }

    #[test]
    fn offset_against_per_pixel_arccos() {
        // spectrally varying reference so the angle is non-zero
        let y_vals: Vec<f64> = (0..2 * 3 * 2 * 2).map(|i| 0.1 + (i as f64 * 0.37).sin().abs()).collect();
        let y = Tensor::<f64>::from_f64(&[2, 3, 2, 2], &y_vals).unwrap();
        let ys = y.map(|v| v + 0.5);
        let (total, l1, sam) = run(&ys, &y, 0.1);
        assert!((l1 - 0.5).abs() < 1e-12);
        let mut oracle = 0.0;
        for n in 0..2 {
            for p in 0..4 {
                let at = |c: usize| (n * 3 + c) * 4 + p;
                let (a, b): (Vec<f64>, Vec<f64>) = (0..3).map(|c| (ys.data()[at(c)], y.data()[at(c)])).unzip();
                let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                oracle += (dot / (na * nb)).clamp(-1.0, 1.0).acos();
            }
        }
        oracle /= 8.0;
        assert!((sam - oracle).abs() < 1e-9, "{sam} vs {oracle}");
        assert!((total - (0.5 + 0.1 * oracle)).abs() < 1e-9);
    }

    #[test]
    fn constant_spectra_shrink_the_angle() {
        let y = Tensor::<f64>::full(&[1, 4, 2, 2], 2.0);
        let ys = y.map(|v| v + 0.5);
        let (_, _, sam) = run(&ys, &y, 0.1);
        assert!(sam.abs() < 1e-7);
    }

    #[test]
    fn zero_weight_is_plain_l1() {
        let a = Tensor::<f64>::from_f64(&[1, 2, 1, 2], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let b = Tensor::<f64>::from_f64(&[1, 2, 1, 2], &[0.5, 0.0, 2.0, 5.0]).unwrap();
        let (total, l1, _) = run(&a, &b, 0.0);
        assert_eq!(total, l1);
        assert!((l1 - 3.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut g = Graph::<f64>::new();
        let a = g.input(Tensor::zeros(&[1, 2, 2, 2]));
        let b = g.input(Tensor::zeros(&[1, 3, 2, 2]));
        assert!(fusion_loss(&mut g, a, b, 0.1).is_err());
    }
}
