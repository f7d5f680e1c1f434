//! Comparison models: a per-frame classifier, a plain LSTM, an
//! encoder-decoder whose anticipation does not feed back into detection,
//! and an offline LSTM that peeks at averaged future features.

use rand::Rng;

use crate::error::Result;
use crate::model::affine::Affine;
use crate::model::decoder::{DecoderParams, RolloutCache};
use crate::model::lstm::{CellState, LstmCache, LstmParams};
use crate::model::params::{prefixed, ParamSet};
use crate::model::{check_frames, StepOutput, Targets, TrnConfig};
use crate::numerics::{
    cross_entropy_unchecked, relu, softmax_ce_grad_acc, softmax_unchecked, Matrix,
};

/// One hidden layer on the current frame only.
#[derive(Debug, Clone, PartialEq)]
pub struct FramewiseParams {
    /// `H x D`
    pub hidden: Affine,
    /// `(K+1) x H`
    pub output: Affine,
}

impl FramewiseParams {
    pub fn zeros(cfg: &TrnConfig) -> Self {
        Self {
            hidden: Affine::zeros(cfg.hidden_dim, cfg.feature_dim),
            output: Affine::zeros(cfg.num_classes(), cfg.hidden_dim),
        }
    }

    pub fn init<R: Rng + ?Sized>(cfg: &TrnConfig, rng: &mut R) -> Self {
        Self {
            hidden: Affine::init(cfg.hidden_dim, cfg.feature_dim, rng),
            output: Affine::init(cfg.num_classes(), cfg.hidden_dim, rng),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.hidden.in_dim()
    }
}

impl ParamSet for FramewiseParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        prefixed("hidden", self.hidden.blocks())
            .chain(prefixed("output", self.output.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.hidden.blocks_mut();
        v.extend(self.output.blocks_mut());
        v
    }
}

/// Stateless `softmax(W2 relu(W1 x + b1) + b2)`.
pub fn baseline_framewise(params: &FramewiseParams, x: &[f64]) -> Result<Vec<f64>> {
    check_frames(std::slice::from_ref(&x.to_vec()), params.feature_dim())?;
    let a: Vec<f64> = params.hidden.forward(x).into_iter().map(relu).collect();
    Ok(softmax_unchecked(&params.output.forward(&a)))
}

pub(crate) fn framewise_forward(
    params: &FramewiseParams,
    frames: &[Vec<f64>],
) -> Result<Vec<StepOutput>> {
    check_frames(frames, params.feature_dim())?;
    let state = CellState::zeros(0);
    Ok(frames
        .iter()
        .map(|x| {
            let a: Vec<f64> = params.hidden.forward(x).into_iter().map(relu).collect();
            StepOutput {
                current: softmax_unchecked(&params.output.forward(&a)),
                anticipated: Vec::new(),
                state: state.clone(),
            }
        })
        .collect())
}

pub(crate) fn framewise_backward(
    params: &FramewiseParams,
    frames: &[Vec<f64>],
    targets: &Targets,
) -> Result<(f64, FramewiseParams)> {
    check_frames(frames, params.feature_dim())?;
    targets.validate(frames.len(), params.output.out_dim(), 0)?;
    let mut grad = params.zeros_like();
    let mut loss = 0.0;
    for (x, &label) in frames.iter().zip(&targets.labels) {
        let pre = params.hidden.forward(x);
        let a: Vec<f64> = pre.iter().copied().map(relu).collect();
        let p = softmax_unchecked(&params.output.forward(&a));
        loss += cross_entropy_unchecked(&p, label);
        let mut dlogits = vec![0.0; p.len()];
        softmax_ce_grad_acc(&p, label, 1.0, &mut dlogits);
        let mut da = vec![0.0; a.len()];
        params
            .output
            .backward(&a, &dlogits, &mut grad.output, Some(&mut da));
        for (d, &z) in da.iter_mut().zip(&pre) {
            if z <= 0.0 {
                *d = 0.0;
            }
        }
        params.hidden.backward(x, &da, &mut grad.hidden, None);
    }
    Ok((loss, grad))
}

/// LSTM followed by a linear classifier. Also backs the offline oracle,
/// whose input width is doubled by the future-feature block.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModelParams {
    pub encoder: LstmParams,
    /// `(K+1) x H`
    pub classifier: Affine,
}

impl LstmModelParams {
    pub fn zeros(input_dim: usize, cfg: &TrnConfig) -> Self {
        Self {
            encoder: LstmParams::zeros(input_dim, cfg.hidden_dim),
            classifier: Affine::zeros(cfg.num_classes(), cfg.hidden_dim),
        }
    }

    pub fn init<R: Rng + ?Sized>(input_dim: usize, cfg: &TrnConfig, rng: &mut R) -> Self {
        Self {
            encoder: LstmParams::init(input_dim, cfg.hidden_dim, rng),
            classifier: Affine::init(cfg.num_classes(), cfg.hidden_dim, rng),
        }
    }
}

impl ParamSet for LstmModelParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        prefixed("encoder", self.encoder.blocks())
            .chain(prefixed("classifier", self.classifier.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.encoder.blocks_mut();
        v.extend(self.classifier.blocks_mut());
        v
    }
}

/// Causal LSTM classifier over the frame features.
pub fn baseline_lstm(params: &LstmModelParams, frames: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    Ok(lstm_forward(params, frames)?
        .into_iter()
        .map(|o| o.current)
        .collect())
}

pub(crate) fn lstm_forward(
    params: &LstmModelParams,
    frames: &[Vec<f64>],
) -> Result<Vec<StepOutput>> {
    check_frames(frames, params.encoder.input_dim())?;
    let mut state = CellState::zeros(params.encoder.hidden_dim());
    let mut out = Vec::with_capacity(frames.len());
    for x in frames {
        let cache = params.encoder.forward_cached(x, &state);
        state = cache.next;
        out.push(StepOutput {
            current: softmax_unchecked(&params.classifier.forward(&state.h)),
            anticipated: Vec::new(),
            state: state.clone(),
        });
    }
    Ok(out)
}

pub(crate) fn lstm_backward(
    params: &LstmModelParams,
    frames: &[Vec<f64>],
    targets: &Targets,
) -> Result<(f64, LstmModelParams)> {
    check_frames(frames, params.encoder.input_dim())?;
    targets.validate(frames.len(), params.classifier.out_dim(), 0)?;
    let hd = params.encoder.hidden_dim();
    let mut caches: Vec<(LstmCache, Vec<f64>)> = Vec::with_capacity(frames.len());
    let mut state = CellState::zeros(hd);
    for x in frames {
        let cache = params.encoder.forward_cached(x, &state);
        state = cache.next.clone();
        let p = softmax_unchecked(&params.classifier.forward(&state.h));
        caches.push((cache, p));
    }
    let loss = caches
        .iter()
        .zip(&targets.labels)
        .map(|((_, p), &l)| cross_entropy_unchecked(p, l))
        .sum();

    let mut grad = params.zeros_like();
    let mut dh = vec![0.0; hd];
    let mut dc = vec![0.0; hd];
    for ((cache, p), &label) in caches.iter().zip(&targets.labels).rev() {
        let mut dlogits = vec![0.0; p.len()];
        softmax_ce_grad_acc(p, label, 1.0, &mut dlogits);
        params
            .classifier
            .backward(&cache.next.h, &dlogits, &mut grad.classifier, Some(&mut dh));
        let dprev = params
            .encoder
            .backward(cache, &dh, &dc, &mut grad.encoder, None);
        dh = dprev.h;
        dc = dprev.c;
    }
    Ok((loss, grad))
}

/// Encoder LSTM for detection plus a decoder that anticipates from the
/// encoder state without feeding back into the current prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct EdParams {
    pub encoder: LstmParams,
    /// `(K+1) x H`
    pub classifier: Affine,
    pub decoder: DecoderParams,
}

impl EdParams {
    pub fn zeros(cfg: &TrnConfig) -> Self {
        Self {
            encoder: LstmParams::zeros(cfg.feature_dim, cfg.hidden_dim),
            classifier: Affine::zeros(cfg.num_classes(), cfg.hidden_dim),
            decoder: DecoderParams::zeros(cfg),
        }
    }

    /// Draws the encoder and classifier first, in the same order as
    /// [`LstmModelParams::init`], so both baselines share an init under one seed.
    pub fn init<R: Rng + ?Sized>(cfg: &TrnConfig, rng: &mut R) -> Self {
        let LstmModelParams {
            encoder,
            classifier,
        } = LstmModelParams::init(cfg.feature_dim, cfg, rng);
        Self {
            encoder,
            classifier,
            decoder: DecoderParams::init(cfg, rng),
        }
    }
}

impl ParamSet for EdParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        prefixed("encoder", self.encoder.blocks())
            .chain(prefixed("classifier", self.classifier.blocks()))
            .chain(prefixed("decoder", self.decoder.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.encoder.blocks_mut();
        v.extend(self.classifier.blocks_mut());
        v.extend(self.decoder.blocks_mut());
        v
    }
}

/// Per-frame current and anticipated distributions from the encoder-decoder.
pub fn baseline_encoder_decoder(params: &EdParams, frames: &[Vec<f64>]) -> Result<Vec<StepOutput>> {
    check_frames(frames, params.encoder.input_dim())?;
    let mut state = CellState::zeros(params.encoder.hidden_dim());
    let mut out = Vec::with_capacity(frames.len());
    for x in frames {
        let cache = params.encoder.forward_cached(x, &state);
        state = cache.next;
        let rollout = params.decoder.rollout_cached(&state.h);
        out.push(StepOutput {
            current: softmax_unchecked(&params.classifier.forward(&state.h)),
            anticipated: rollout.scores,
            state: state.clone(),
        });
    }
    Ok(out)
}

pub(crate) fn ed_backward(
    params: &EdParams,
    frames: &[Vec<f64>],
    targets: &Targets,
    alpha: f64,
) -> Result<(f64, EdParams)> {
    check_frames(frames, params.encoder.input_dim())?;
    targets.validate(
        frames.len(),
        params.classifier.out_dim(),
        params.decoder.steps,
    )?;
    let hd = params.encoder.hidden_dim();
    let mut caches: Vec<(LstmCache, Vec<f64>, RolloutCache)> = Vec::with_capacity(frames.len());
    let mut state = CellState::zeros(hd);
    for x in frames {
        let cache = params.encoder.forward_cached(x, &state);
        state = cache.next.clone();
        let p = softmax_unchecked(&params.classifier.forward(&state.h));
        let rollout = params.decoder.rollout_cached(&state.h);
        caches.push((cache, p, rollout));
    }
    let mut loss = 0.0;
    for (t, (_, p, rollout)) in caches.iter().enumerate() {
        loss += cross_entropy_unchecked(p, targets.labels[t]);
        if alpha != 0.0 {
            loss += alpha * params.decoder.loss(rollout, &targets.future[t]);
        }
    }

    let mut grad = params.zeros_like();
    let mut dh = vec![0.0; hd];
    let mut dc = vec![0.0; hd];
    for (t, (cache, p, rollout)) in caches.iter().enumerate().rev() {
        let mut dlogits = vec![0.0; p.len()];
        softmax_ce_grad_acc(p, targets.labels[t], 1.0, &mut dlogits);
        params
            .classifier
            .backward(&cache.next.h, &dlogits, &mut grad.classifier, Some(&mut dh));
        params.decoder.backward(
            rollout,
            None,
            &targets.future[t],
            alpha,
            &mut grad.decoder,
            &mut dh,
        );
        let dprev = params
            .encoder
            .backward(cache, &dh, &dc, &mut grad.encoder, None);
        dh = dprev.h;
        dc = dprev.c;
    }
    Ok((loss, grad))
}

/// Appends to every frame the mean of the next `lookahead` frames (fewer at
/// the tail, zeros past the end). Uses future frames: offline only.
pub fn offline_inputs(frames: &[Vec<f64>], lookahead: usize) -> Vec<Vec<f64>> {
    let dim = frames.first().map_or(0, Vec::len);
    (0..frames.len())
        .map(|t| {
            let future = &frames[(t + 1).min(frames.len())..(t + 1 + lookahead).min(frames.len())];
            let mut row = Vec::with_capacity(2 * dim);
            row.extend_from_slice(&frames[t]);
            let mut mean = vec![0.0; dim];
            for f in future {
                for (m, v) in mean.iter_mut().zip(f) {
                    *m += v;
                }
            }
            if !future.is_empty() {
                mean.iter_mut().for_each(|m| *m /= future.len() as f64);
            }
            row.extend(mean);
            row
        })
        .collect()
}

/// LSTM over `[x_t, mean(x_{t+1..t+lookahead})]`.
pub fn baseline_rnn_offline(
    params: &LstmModelParams,
    frames: &[Vec<f64>],
    lookahead: usize,
) -> Result<Vec<Vec<f64>>> {
    baseline_lstm(params, &offline_inputs(frames, lookahead))
}
