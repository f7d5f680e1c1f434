//! The temporal recurrent network cell.
//!
//! At every step a decoder rolls forward from the previous hidden state,
//! predicting the next `steps` action distributions. Its hidden states are
//! average-pooled and embedded by the future gate, and the accumulator LSTM
//! consumes `[x_t, future_context]` to classify the current frame.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::affine::Affine;
use crate::model::decoder::{DecoderParams, Rollout, RolloutCache};
use crate::model::lstm::{CellState, LstmCache, LstmParams};
use crate::model::params::{prefixed, ParamSet};
use crate::model::{check_frames, StepOutput, Targets, TrnConfig};
use crate::numerics::{
    cross_entropy_unchecked, relu, softmax_ce_grad_acc, softmax_unchecked, Matrix,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrnParams {
    /// Accumulator, input width D + F.
    pub sta: LstmParams,
    pub decoder: DecoderParams,
    /// `F x H`, followed by ReLU.
    pub future_gate: Affine,
    /// `(K+1) x H`
    pub classifier: Affine,
}

impl TrnParams {
    pub fn zeros(cfg: &TrnConfig) -> Self {
        Self {
            sta: LstmParams::zeros(cfg.feature_dim + cfg.future_dim, cfg.hidden_dim),
            decoder: DecoderParams::zeros(cfg),
            future_gate: Affine::zeros(cfg.future_dim, cfg.hidden_dim),
            classifier: Affine::zeros(cfg.num_classes(), cfg.hidden_dim),
        }
    }

    pub fn init<R: Rng + ?Sized>(cfg: &TrnConfig, rng: &mut R) -> Self {
        Self {
            sta: LstmParams::init(cfg.feature_dim + cfg.future_dim, cfg.hidden_dim, rng),
            decoder: DecoderParams::init(cfg, rng),
            future_gate: Affine::init(cfg.future_dim, cfg.hidden_dim, rng),
            classifier: Affine::init(cfg.num_classes(), cfg.hidden_dim, rng),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.sta.input_dim() - self.future_gate.out_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.sta.hidden_dim()
    }

    fn step_cached(&self, x: &[f64], prev: &CellState) -> TrnStepCache {
        let rollout = self.decoder.rollout_cached(&prev.h);
        let hd = self.hidden_dim();
        let mut mean = vec![0.0; hd];
        for s in &rollout.steps {
            for (m, v) in mean.iter_mut().zip(&s.next.h) {
                *m += v;
            }
        }
        let n = rollout.steps.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let gate_pre = self.future_gate.forward(&mean);
        let mut input = Vec::with_capacity(self.sta.input_dim());
        input.extend_from_slice(x);
        input.extend(gate_pre.iter().copied().map(relu));
        let sta = self.sta.forward_cached(&input, prev);
        let current = softmax_unchecked(&self.classifier.forward(&sta.next.h));
        TrnStepCache {
            rollout,
            mean,
            gate_pre,
            sta,
            current,
        }
    }
}

impl ParamSet for TrnParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        prefixed("sta", self.sta.blocks())
            .chain(prefixed("decoder", self.decoder.blocks()))
            .chain(prefixed("future_gate", self.future_gate.blocks()))
            .chain(prefixed("classifier", self.classifier.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.sta.blocks_mut();
        v.extend(self.decoder.blocks_mut());
        v.extend(self.future_gate.blocks_mut());
        v.extend(self.classifier.blocks_mut());
        v
    }
}

struct TrnStepCache {
    rollout: RolloutCache,
    mean: Vec<f64>,
    gate_pre: Vec<f64>,
    sta: LstmCache,
    current: Vec<f64>,
}

impl TrnStepCache {
    fn output(&self) -> StepOutput {
        StepOutput {
            current: self.current.clone(),
            anticipated: self.rollout.scores.clone(),
            state: self.sta.next.clone(),
        }
    }
}

/// Runs the decoder from `h_prev` and returns its hidden states and anticipated distributions.
pub fn decoder_rollout(params: &TrnParams, h_prev: &[f64]) -> Result<Rollout> {
    if h_prev.len() != params.hidden_dim() {
        return Err(Error::shape(format!(
            "decoder source of length {} for hidden size {}",
            h_prev.len(),
            params.hidden_dim()
        )));
    }
    let cache = params.decoder.rollout_cached(h_prev);
    Ok(Rollout {
        hidden: cache.steps.iter().map(|s| s.next.h.clone()).collect(),
        scores: cache.scores,
    })
}

/// `ReLU(W_f * mean(stack) + b_f)`.
pub fn future_gate(params: &TrnParams, stack: &[Vec<f64>]) -> Result<Vec<f64>> {
    let hd = params.hidden_dim();
    if stack.is_empty() {
        return Err(Error::contract("future gate needs at least one decoder state"));
    }
    if let Some(bad) = stack.iter().find(|v| v.len() != hd) {
        return Err(Error::shape(format!(
            "decoder state of length {} for hidden size {hd}",
            bad.len()
        )));
    }
    let mut mean = vec![0.0; hd];
    for v in stack {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= stack.len() as f64);
    Ok(params
        .future_gate
        .forward(&mean)
        .into_iter()
        .map(relu)
        .collect())
}

pub fn trn_step(params: &TrnParams, x: &[f64], state: &CellState) -> Result<StepOutput> {
    if x.len() != params.feature_dim() {
        return Err(Error::shape(format!(
            "frame of length {} for feature width {}",
            x.len(),
            params.feature_dim()
        )));
    }
    let hd = params.hidden_dim();
    if state.h.len() != hd || state.c.len() != hd {
        return Err(Error::shape("cell state does not match hidden size"));
    }
    Ok(params.step_cached(x, state).output())
}

/// Causal fold of [`trn_step`] from the zero state.
pub fn forward_sequence(params: &TrnParams, frames: &[Vec<f64>]) -> Result<Vec<StepOutput>> {
    check_frames(frames, params.feature_dim())?;
    let mut state = CellState::zeros(params.hidden_dim());
    let mut out = Vec::with_capacity(frames.len());
    for x in frames {
        let cache = params.step_cached(x, &state);
        state = cache.sta.next.clone();
        out.push(cache.output());
    }
    Ok(out)
}

/// Joint detection + anticipation loss of one sequence and its exact gradient.
pub fn backward_sequence(
    params: &TrnParams,
    frames: &[Vec<f64>],
    targets: &Targets,
    alpha: f64,
) -> Result<(f64, TrnParams)> {
    check_frames(frames, params.feature_dim())?;
    targets.validate(
        frames.len(),
        params.classifier.out_dim(),
        params.decoder.steps,
    )?;
    let hd = params.hidden_dim();
    let fd = params.feature_dim();

    let mut caches = Vec::with_capacity(frames.len());
    let mut state = CellState::zeros(hd);
    for x in frames {
        let cache = params.step_cached(x, &state);
        state = cache.sta.next.clone();
        caches.push(cache);
    }

    let mut loss = 0.0;
    for (t, cache) in caches.iter().enumerate() {
        loss += cross_entropy_unchecked(&cache.current, targets.labels[t]);
        if alpha != 0.0 {
            loss += alpha * params.decoder.loss(&cache.rollout, &targets.future[t]);
        }
    }

    let mut grad = params.zeros_like();
    let mut dh = vec![0.0; hd];
    let mut dc = vec![0.0; hd];
    let steps = params.decoder.steps as f64;
    for (t, cache) in caches.iter().enumerate().rev() {
        let mut dlogits = vec![0.0; cache.current.len()];
        softmax_ce_grad_acc(&cache.current, targets.labels[t], 1.0, &mut dlogits);
        params.classifier.backward(
            &cache.sta.next.h,
            &dlogits,
            &mut grad.classifier,
            Some(&mut dh),
        );
        let mut dinput = vec![0.0; params.sta.input_dim()];
        let dprev = params
            .sta
            .backward(&cache.sta, &dh, &dc, &mut grad.sta, Some(&mut dinput));

        let dgate_pre: Vec<f64> = dinput[fd..]
            .iter()
            .zip(&cache.gate_pre)
            .map(|(g, &a)| if a > 0.0 { *g } else { 0.0 })
            .collect();
        let mut dmean = vec![0.0; hd];
        params.future_gate.backward(
            &cache.mean,
            &dgate_pre,
            &mut grad.future_gate,
            Some(&mut dmean),
        );
        dmean.iter_mut().for_each(|v| *v /= steps);

        let mut dsource = dprev.h;
        params.decoder.backward(
            &cache.rollout,
            Some(&dmean),
            &targets.future[t],
            alpha,
            &mut grad.decoder,
            &mut dsource,
        );
        dh = dsource;
        dc = dprev.c;
    }
    Ok((loss, grad))
}
