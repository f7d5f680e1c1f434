use crate::error::{Error, Result};

/// Floor applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn sigmoid_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(sigmoid).collect()
}

pub fn tanh_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| x.tanh()).collect()
}

pub fn relu_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(relu).collect()
}

/// Max-shifted softmax.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::shape("softmax of an empty vector"));
    }
    Ok(softmax_unchecked(z))
}

pub(crate) fn softmax_unchecked(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// `-ln max(p[label], 1e-12)`.
pub fn cross_entropy(p: &[f64], label: usize) -> Result<f64> {
    if label >= p.len() {
        return Err(Error::Index(format!(
            "label {label} for a distribution over {} classes",
            p.len()
        )));
    }
    Ok(cross_entropy_unchecked(p, label))
}

pub(crate) fn cross_entropy_unchecked(p: &[f64], label: usize) -> f64 {
    -p[label].max(PROB_FLOOR).ln()
}

/// Gradient of `scale * CE(softmax(z), label)` with respect to `z`, added into `dz`.
///
/// Once `p[label]` falls below the floor the loss is constant, so the
/// gradient vanishes.
pub(crate) fn softmax_ce_grad_acc(p: &[f64], label: usize, scale: f64, dz: &mut [f64]) {
    if p[label] < PROB_FLOOR || scale == 0.0 {
        return;
    }
    for (d, &pi) in dz.iter_mut().zip(p) {
        *d += scale * pi;
    }
    dz[label] -= scale;
}

/// Vector-Jacobian product of softmax: `dz += p * (dp - <p, dp>)`.
pub(crate) fn softmax_vjp_acc(p: &[f64], dp: &[f64], dz: &mut [f64]) {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    for ((d, &pi), &g) in dz.iter_mut().zip(p).zip(dp) {
        *d += pi * (g - inner);
    }
}
