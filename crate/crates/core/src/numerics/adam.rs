use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Hyperparameters for [`adam_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.0005,
            weight_decay: 0.0005,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators for one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Matrix,
    pub v: Matrix,
    pub step: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            m: Matrix::zeros(rows, cols),
            v: Matrix::zeros(rows, cols),
            step: 0,
        }
    }

    pub fn for_param(param: &Matrix) -> Self {
        Self::new(param.rows(), param.cols())
    }
}

/// One bias-corrected Adam update with L2 weight decay folded into the gradient.
pub fn adam_step(
    param: &mut Matrix,
    grad: &Matrix,
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<()> {
    param.check_same_shape(grad)?;
    param.check_same_shape(&state.m)?;
    param.check_same_shape(&state.v)?;
    if state.m.shape() != state.v.shape() {
        return Err(Error::shape("adam moments disagree"));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let p = param.as_mut_slice();
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (((p, &g), m), v) in p.iter_mut().zip(grad.as_slice()).zip(m).zip(v) {
        let g = g + cfg.weight_decay * *p;
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lr: f64, wd: f64) -> AdamConfig {
        AdamConfig {
            lr,
            weight_decay: wd,
            ..AdamConfig::default()
        }
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = Matrix::from_vec(1, 3, vec![1.0, -2.0, 3.0]).unwrap();
        let before = p.clone();
        let mut s = AdamState::for_param(&p);
        adam_step(&mut p, &Matrix::zeros(1, 3), &mut s, &cfg(0.1, 0.0)).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_magnitude() {
        // m_hat = 1, v_hat = 1 after bias correction, so the step is lr / (1 + eps).
        let mut p = Matrix::zeros(1, 1);
        let mut s = AdamState::for_param(&p);
        let c = cfg(0.0005, 0.0);
        adam_step(&mut p, &Matrix::from_vec(1, 1, vec![1.0]).unwrap(), &mut s, &c).unwrap();
        let expected = -0.0005 / (1.0 + 1e-8);
        assert!((p.get(0, 0) - expected).abs() < 1e-15, "{}", p.get(0, 0));
    }

    #[test]
    fn constant_gradient_decreases_monotonically() {
        let mut p = Matrix::zeros(1, 1);
        let mut s = AdamState::for_param(&p);
        let g = Matrix::from_vec(1, 1, vec![0.3]).unwrap();
        let mut prev = p.get(0, 0);
        for _ in 0..2 {
            adam_step(&mut p, &g, &mut s, &cfg(0.01, 0.0)).unwrap();
            assert!(p.get(0, 0) < prev);
            prev = p.get(0, 0);
        }
    }

    #[test]
    fn zero_lr_never_moves() {
        let mut p = Matrix::from_vec(2, 1, vec![0.5, -0.5]).unwrap();
        let before = p.clone();
        let mut s = AdamState::for_param(&p);
        let g = Matrix::from_vec(2, 1, vec![3.0, -7.0]).unwrap();
        for _ in 0..5 {
            adam_step(&mut p, &g, &mut s, &cfg(0.0, 0.0005)).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Matrix::zeros(2, 2);
        let mut s = AdamState::for_param(&p);
        let err = adam_step(&mut p, &Matrix::zeros(2, 1), &mut s, &cfg(0.1, 0.0));
        assert!(matches!(err, Err(Error::Shape(_))));
    }
}
