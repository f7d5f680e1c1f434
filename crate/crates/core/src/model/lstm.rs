use rand::Rng;

use crate::error::{Error, Result};
use crate::model::affine::uniform_fill;
use crate::model::params::ParamSet;
use crate::numerics::{sigmoid, Matrix};

/// Hidden and cell state of an LSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Standard LSTM weights with the four gates stacked as `[input, forget, candidate, output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4H x input_dim`
    pub w_input: Matrix,
    /// `4H x H`
    pub w_hidden: Matrix,
    /// `4H x 1`
    pub bias: Matrix,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w_input: Matrix::zeros(4 * hidden, input_dim),
            w_hidden: Matrix::zeros(4 * hidden, hidden),
            bias: Matrix::zeros(4 * hidden, 1),
        }
    }

    /// Uniform in `[-1/sqrt(in + H), 1/sqrt(in + H)]`, forget-gate bias shifted by +1.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden);
        let bound = 1.0 / ((input_dim + hidden).max(1) as f64).sqrt();
        uniform_fill(p.w_input.as_mut_slice(), bound, rng);
        uniform_fill(p.w_hidden.as_mut_slice(), bound, rng);
        uniform_fill(p.bias.as_mut_slice(), bound, rng);
        for b in &mut p.bias.as_mut_slice()[hidden..2 * hidden] {
            *b += 1.0;
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_hidden.cols()
    }

    pub(crate) fn forward_cached(&self, x: &[f64], prev: &CellState) -> LstmCache {
        let hd = self.hidden_dim();
        let mut z = vec![0.0; 4 * hd];
        self.w_input.matvec_into(x, &mut z);
        let mut zh = vec![0.0; 4 * hd];
        self.w_hidden.matvec_into(&prev.h, &mut zh);
        for ((z, a), b) in z.iter_mut().zip(&zh).zip(self.bias.as_slice()) {
            *z += a + b;
        }
        let mut gates = z;
        for v in &mut gates[..2 * hd] {
            *v = sigmoid(*v);
        }
        for v in &mut gates[2 * hd..3 * hd] {
            *v = v.tanh();
        }
        for v in &mut gates[3 * hd..] {
            *v = sigmoid(*v);
        }
        let mut c = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        for j in 0..hd {
            let (i, f, g, o) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
            c[j] = f * prev.c[j] + i * g;
            tanh_c[j] = c[j].tanh();
            h[j] = o * tanh_c[j];
        }
        LstmCache {
            x: x.to_vec(),
            prev: prev.clone(),
            gates,
            tanh_c,
            next: CellState { h, c },
        }
    }

    /// Backpropagates `dh`, `dc` (gradients w.r.t. the step's output state)
    /// through one cached step. Parameter gradients accumulate into `grad`;
    /// `dx` receives the input gradient when provided. Returns the gradient
    /// w.r.t. the previous state.
    pub(crate) fn backward(
        &self,
        cache: &LstmCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut LstmParams,
        dx: Option<&mut [f64]>,
    ) -> CellState {
        let hd = self.hidden_dim();
        let g = &cache.gates;
        let mut dz = vec![0.0; 4 * hd];
        let mut dc_prev = vec![0.0; hd];
        for j in 0..hd {
            let (i, f, cand, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
            let tc = cache.tanh_c[j];
            let dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
            let d_o = dh[j] * tc;
            let d_i = dct * cand;
            let d_g = dct * i;
            let d_f = dct * cache.prev.c[j];
            dc_prev[j] = dct * f;
            dz[j] = d_i * i * (1.0 - i);
            dz[hd + j] = d_f * f * (1.0 - f);
            dz[2 * hd + j] = d_g * (1.0 - cand * cand);
            dz[3 * hd + j] = d_o * o * (1.0 - o);
        }
        grad.w_input.outer_acc(&dz, &cache.x);
        grad.w_hidden.outer_acc(&dz, &cache.prev.h);
        grad.bias.add_column(&dz);
        if let Some(dx) = dx {
            self.w_input.matvec_t_acc(&dz, dx);
        }
        let mut dh_prev = vec![0.0; hd];
        self.w_hidden.matvec_t_acc(&dz, &mut dh_prev);
        CellState {
            h: dh_prev,
            c: dc_prev,
        }
    }
}

impl ParamSet for LstmParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![
            ("w_input".to_string(), &self.w_input),
            ("w_hidden".to_string(), &self.w_hidden),
            ("bias".to_string(), &self.bias),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w_input, &mut self.w_hidden, &mut self.bias]
    }
}

/// Activations of one LSTM step kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct LstmCache {
    pub x: Vec<f64>,
    pub prev: CellState,
    /// post-activation `[i, f, g, o]`
    pub gates: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub next: CellState,
}

/// One LSTM step: `c' = f*c + i*g`, `h' = o*tanh(c')`.
pub fn lstm_step(params: &LstmParams, x: &[f64], state: &CellState) -> Result<CellState> {
    let hd = params.hidden_dim();
    if x.len() != params.input_dim() {
        return Err(Error::shape(format!(
            "lstm input of length {} for input width {}",
            x.len(),
            params.input_dim()
        )));
    }
    if state.h.len() != hd || state.c.len() != hd {
        return Err(Error::shape(format!(
            "lstm state ({}, {}) for hidden size {hd}",
            state.h.len(),
            state.c.len()
        )));
    }
    Ok(params.forward_cached(x, state).next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad, max_relative_error, DEFAULT_STEP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let s = lstm_step(&p, &[5.0, -1.0, 2.0], &CellState::zeros(2)).unwrap();
        assert_eq!(s, CellState::zeros(2));
    }

    #[test]
    fn zero_params_carry_half_the_cell() {
        let p = LstmParams::zeros(1, 1);
        let state = CellState {
            h: vec![0.0],
            c: vec![1.0],
        };
        let s = lstm_step(&p, &[0.3], &state).unwrap();
        assert_eq!(s.c, vec![0.5]);
        assert!((s.h[0] - 0.5 * 0.5f64.tanh()).abs() < 1e-15);
        assert!((s.h[0] - 0.23106).abs() < 1e-5);
    }

    #[test]
    fn output_shape_follows_hidden_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmParams::init(4, 3, &mut rng);
        let s = lstm_step(&p, &[1.0, 2.0, 3.0, 4.0], &CellState::zeros(3)).unwrap();
        assert_eq!((s.h.len(), s.c.len()), (3, 3));
        assert!(lstm_step(&p, &[1.0], &CellState::zeros(3)).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = LstmParams::init(3, 2, &mut rng);
        let x = [0.4, -0.9, 1.3];
        let state = CellState {
            h: vec![0.2, -0.5],
            c: vec![0.7, 0.1],
        };
        // objective: sum(h') * 1.5 + sum(c') * 0.5
        let objective = |p: &LstmParams| {
            let s = lstm_step(p, &x, &state).unwrap();
            1.5 * s.h.iter().sum::<f64>() + 0.5 * s.c.iter().sum::<f64>()
        };
        let cache = p.forward_cached(&x, &state);
        let mut grad = p.zeros_like();
        let mut dx = vec![0.0; 3];
        p.backward(&cache, &[1.5, 1.5], &[0.5, 0.5], &mut grad, Some(&mut dx));

        let numeric = finite_diff_grad(
            |flat| {
                let mut q = p.clone();
                q.assign_flat(flat).unwrap();
                objective(&q)
            },
            &p.to_flat(),
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(max_relative_error(&grad.to_flat(), &numeric) < 1e-6);

        let numeric_x = finite_diff_grad(
            |xs| {
                let s = lstm_step(&p, xs, &state).unwrap();
                1.5 * s.h.iter().sum::<f64>() + 0.5 * s.c.iter().sum::<f64>()
            },
            &x,
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(max_relative_error(&dx, &numeric_x) < 1e-6);
    }
}
