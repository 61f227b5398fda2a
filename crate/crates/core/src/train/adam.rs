use crate::error::{usage_err, Result};
use crate::model::ParamStore;
use crate::tensor::Tensor;

/// Adam moment buffers, one pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<Tensor<f32>>,
    pub v: Vec<Tensor<f32>>,
}

impl OptimizerState {
    pub fn new(params: &ParamStore<f32>) -> Self {
        let zeros = || params.iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros(), v: zeros() }
    }

    fn check(&self, params: &ParamStore<f32>) -> Result<()> {
        let ok = self.m.len() == params.len()
            && self.v.len() == params.len()
            && params
                .iter()
                .zip(self.m.iter().zip(&self.v))
                .all(|((_, p), (m, v))| p.shape() == m.shape() && p.shape() == v.shape());
        if ok {
            Ok(())
        } else {
            Err(usage_err!("optimizer state does not mirror the parameter shapes"))
        }
    }
}

/// One bias-corrected Adam update. `grads[i]` belongs to parameter `i`.
pub fn adam_step(
    params: &mut ParamStore<f32>,
    grads: &[Option<Tensor<f32>>],
    state: &mut OptimizerState,
    lr: f64,
) -> Result<()> {
    state.check(params)?;
    if grads.len() != params.len() {
        return Err(usage_err!("{} gradients for {} parameters", grads.len(), params.len()));
    }
    let ids: Vec<_> = params.ids().collect();
    for (id, g) in ids.iter().zip(grads) {
        let g = g
            .as_ref()
            .ok_or_else(|| usage_err!("missing gradient for {}", params.name(*id)))?;
        if g.shape() != params.get(*id).shape() {
            return Err(usage_err!("gradient shape {:?} for {}", g.shape(), params.name(*id)));
        }
    }
    state.step += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    for (i, id) in ids.into_iter().enumerate() {
        let g = grads[i].as_ref().expect("checked").data();
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for (((p, &g), m), v) in params.get_mut(id).data_mut().iter_mut().zip(g).zip(m).zip(v) {
            let g = g as f64;
            let mn = b1 * *m as f64 + (1.0 - b1) * g;
            let vn = b2 * *v as f64 + (1.0 - b2) * g * g;
            *m = mn as f32;
            *v = vn as f32;
            let update = lr * (mn / c1) / ((vn / c2).sqrt() + eps);
            *p = (*p as f64 - update) as f32;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore<f32> {
        let mut s = ParamStore::new();
        s.add("a", Tensor::new(&[3], vec![0.5, -1.0, 2.0]).unwrap());
        s.add("b", Tensor::new(&[1], vec![0.25]).unwrap());
        s
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = store();
        let before = p.clone();
        let mut st = OptimizerState::new(&p);
        let grads = vec![Some(Tensor::zeros(&[3])), Some(Tensor::zeros(&[1]))];
        adam_step(&mut p, &grads, &mut st, 1e-2).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr_against_sign() {
        let mut p = store();
        let before = p.clone();
        let mut st = OptimizerState::new(&p);
        let grads = vec![Some(Tensor::new(&[3], vec![3.0, -0.2, 1e-3]).unwrap()), Some(Tensor::new(&[1], vec![-7.0]).unwrap())];
        let lr = 1e-3;
        adam_step(&mut p, &grads, &mut st, lr).unwrap();
        for ((_, a), ((_, b), g)) in p.iter().zip(before.iter().zip(&grads)) {
            for ((x, y), g) in a.data().iter().zip(b.data()).zip(g.as_ref().unwrap().data()) {
                let delta = (*x - *y) as f64;
                assert!((delta + lr * g.signum() as f64).abs() < 1e-3 * lr, "{delta}");
            }
        }
    }

    #[test]
    fn missing_gradient_is_usage_error() {
        let mut p = store();
        let mut st = OptimizerState::new(&p);
        let grads = vec![Some(Tensor::zeros(&[3])), None];
        assert!(matches!(adam_step(&mut p, &grads, &mut st, 1e-3), Err(crate::Error::Usage(_))));
        assert_eq!(st.step, 0);
    }
}
