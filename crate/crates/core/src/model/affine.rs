use rand::Rng;

use crate::model::params::ParamSet;
use crate::numerics::Matrix;

/// Fully connected layer `W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Affine {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(out_dim, in_dim),
            bias: Matrix::zeros(out_dim, 1),
        }
    }

    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and bias.
    pub fn init<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        let mut a = Self::zeros(out_dim, in_dim);
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        uniform_fill(a.weight.as_mut_slice(), bound, rng);
        uniform_fill(a.bias.as_mut_slice(), bound, rng);
        a
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.out_dim()];
        self.weight.matvec_into(x, &mut y);
        for (o, b) in y.iter_mut().zip(self.bias.as_slice()) {
            *o += b;
        }
        y
    }

    /// Accumulates parameter gradients for output gradient `dy` at input `x`
    /// into `grad`, and adds `W^T dy` into `dx` when requested.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Affine, dx: Option<&mut [f64]>) {
        grad.weight.outer_acc(dy, x);
        grad.bias.add_column(dy);
        if let Some(dx) = dx {
            self.weight.matvec_t_acc(dy, dx);
        }
    }
}

impl ParamSet for Affine {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![
            ("weight".to_string(), &self.weight),
            ("bias".to_string(), &self.bias),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.weight, &mut self.bias]
    }
}

pub(crate) fn uniform_fill<R: Rng + ?Sized>(xs: &mut [f64], bound: f64, rng: &mut R) {
    for x in xs {
        *x = rng.random_range(-bound..=bound);
    }
}
