use crate::error::{Error, Result};

/// Default central-difference step at 64-bit precision.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Gradients smaller than this are compared absolutely rather than relatively.
pub const RELATIVE_FLOOR: f64 = 1e-5;

/// Central-difference gradient `(f(x+h) - f(x-h)) / 2h` per coordinate.
pub fn finite_diff_grad<F>(mut f: F, params: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x = params.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = f(&x);
        x[i] = orig - h;
        let minus = f(&x);
        x[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "objective not finite when perturbing coordinate {i}"
            )));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// `|a - b| / max(|a|, |b|, RELATIVE_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(RELATIVE_FLOOR);
    (a - b).abs() / denom
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cross_entropy, softmax};

    #[test]
    fn quadratic() {
        let g = finite_diff_grad(|x| x[0] * x[0], &[3.0], DEFAULT_STEP).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_function() {
        let g = finite_diff_grad(|_| 4.2, &[1.0, -2.0, 0.5], DEFAULT_STEP).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn softmax_cross_entropy_matches_closed_form() {
        let logits = [0.3, -1.2, 2.0, 0.7];
        let label = 1;
        let g = finite_diff_grad(
            |z| cross_entropy(&softmax(z).unwrap(), label).unwrap(),
            &logits,
            DEFAULT_STEP,
        )
        .unwrap();
        let p = softmax(&logits).unwrap();
        for (i, (&gi, &pi)) in g.iter().zip(&p).enumerate() {
            let expected = pi - if i == label { 1.0 } else { 0.0 };
            assert!((gi - expected).abs() < 1e-6, "coord {i}: {gi} vs {expected}");
        }
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let r = finite_diff_grad(|x| (x[0]).ln(), &[0.0], DEFAULT_STEP);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }
}
