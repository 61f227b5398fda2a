use serde::Serialize;

use crate::error::{usage_err, Result};
use crate::tensor::{Element, Tensor};

/// Column-centred copy of an `n × p` row-major matrix.
fn centred(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    for j in 0..p {
        let mean = (0..n).map(|i| x[i * p + j]).sum::<f64>() / n as f64;
        for i in 0..n {
            out[i * p + j] -= mean;
        }
    }
    out
}

/// `X_c X_cᵀ`, an `n × n` Gram matrix.
fn gram(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    let mut k = vec![0.0; n * n];
    f64::gemm(n, p, n, 1.0, x, (p as isize, 1), x, (1, p as isize), 0.0, &mut k, (n as isize, 1));
    k
}

fn frobenius_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear CKA between `x` (`n × p1`) and `y` (`n × p2`), both row-major
/// with one sample per row.
///
/// Computed as `⟨K, L⟩ / (‖K‖·‖L‖)` over centred Gram matrices, which equals
/// `‖Y_cᵀX_c‖² / (‖X_cᵀX_c‖·‖Y_cᵀY_c‖)` but costs `n²·p`.
pub fn cka(x: &[f64], p1: usize, y: &[f64], p2: usize) -> Result<f64> {
    if p1 == 0 || p2 == 0 || !x.len().is_multiple_of(p1) || !y.len().is_multiple_of(p2) {
        return Err(usage_err!("cka: buffers do not divide into rows of width {p1} and {p2}"));
    }
    let n = x.len() / p1;
    if y.len() / p2 != n {
        return Err(usage_err!("cka: sample counts differ ({n} vs {})", y.len() / p2));
    }
    if n < 2 {
        return Err(usage_err!("cka: need at least 2 samples, got {n}"));
    }
    let k = gram(&centred(x, n, p1), n, p1);
    let l = gram(&centred(y, n, p2), n, p2);
    let (kk, ll) = (frobenius_dot(&k, &k), frobenius_dot(&l, &l));
    if kk == 0.0 || ll == 0.0 {
        return Err(usage_err!("cka: an input has zero variance across samples"));
    }
    Ok((frobenius_dot(&k, &l) / (kk.sqrt() * ll.sqrt())).clamp(0.0, 1.0))
}

/// CKA between two activation tensors, flattening everything after the
/// batch axis into features.
pub fn cka_tensors<T: Element>(x: &Tensor<T>, y: &Tensor<T>) -> Result<f64> {
    let (n1, n2) = (x.shape()[0], y.shape()[0]);
    if n1 == 0 || n2 == 0 {
        return Err(usage_err!("cka: empty batch"));
    }
    cka(&x.to_f64_vec(), x.numel() / n1, &y.to_f64_vec(), y.numel() / n2)
}

/// Square similarity matrix between labelled layers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CkaMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CkaMatrix {
    pub fn compute<T: Element>(layers: &[(String, Tensor<T>)]) -> Result<Self> {
        let n = layers.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = 1.0;
            for j in 0..i {
                let v = cka_tensors(&layers[i].1, &layers[j].1)?;
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        Ok(Self { labels: layers.iter().map(|(l, _)| l.clone()).collect(), values })
    }

    /// Mean similarity over pairs whose labels have different prefixes
    /// before the first `.`.
    pub fn cross_group_mean(&self) -> f64 {
        let prefix = |s: &str| s.split('.').next().unwrap_or("").to_string();
        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..self.labels.len() {
            for j in 0..i {
                if prefix(&self.labels[i]) != prefix(&self.labels[j]) {
                    total += self.values[i][j];
                    count += 1;
                }
            }
        }
        if count == 0 { f64::NAN } else { total / count as f64 }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!(",{v:.9}"));
            }
            out.push('\n');
        }
        out
    }
}
