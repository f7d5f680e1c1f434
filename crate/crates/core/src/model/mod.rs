//! The temporal recurrent network and its baselines, with hand-derived
//! backward passes through time.

mod affine;
mod baselines;
pub mod checkpoint;
mod config;
mod decoder;
mod lstm;
mod params;
mod trn;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use affine::Affine;
pub use baselines::{
    baseline_encoder_decoder, baseline_framewise, baseline_lstm, baseline_rnn_offline,
    offline_inputs, EdParams, FramewiseParams, LstmModelParams,
};
pub use config::TrnConfig;
pub use decoder::{DecoderParams, Rollout};
pub use lstm::{lstm_step, CellState, LstmParams};
pub use params::ParamSet;
pub use trn::{backward_sequence, decoder_rollout, forward_sequence, future_gate, trn_step, TrnParams};

/// Outputs of one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Distribution over the K+1 classes for the current frame.
    pub current: Vec<f64>,
    /// One distribution per future offset `1..=decoder_steps`; empty for
    /// models that do not anticipate.
    pub anticipated: Vec<Vec<f64>>,
    /// Recurrent state after the step (empty for stateless models).
    pub state: CellState,
}

/// Supervision for one sequence.
///
/// `future[t][i - 1]` is the label `i` frames after `t`, or `None` when that
/// frame lies beyond the end of the source video.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub labels: Vec<usize>,
    pub future: Vec<Vec<Option<usize>>>,
}

impl Targets {
    /// Targets for the window `[start, start + len)` of a video, reading
    /// anticipation labels from the whole video.
    pub fn from_video(video_labels: &[usize], start: usize, len: usize, steps: usize) -> Self {
        let labels = video_labels[start..start + len].to_vec();
        let future = (start..start + len)
            .map(|t| {
                (1..=steps)
                    .map(|i| video_labels.get(t + i).copied())
                    .collect()
            })
            .collect();
        Self { labels, future }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub(crate) fn validate(&self, len: usize, classes: usize, steps: usize) -> Result<()> {
        if self.labels.len() != len {
            return Err(Error::contract(format!(
                "{} labels for {len} frames",
                self.labels.len()
            )));
        }
        let check = |l: usize| {
            if l >= classes {
                Err(Error::Index(format!("label {l} outside 0..{classes}")))
            } else {
                Ok(())
            }
        };
        self.labels.iter().try_for_each(|&l| check(l))?;
        if steps > 0 {
            if self.future.len() != len || self.future.iter().any(|f| f.len() != steps) {
                return Err(Error::contract(format!(
                    "anticipation targets must be {len} x {steps}"
                )));
            }
            self.future
                .iter()
                .flatten()
                .flatten()
                .try_for_each(|&l| check(l))?;
        }
        Ok(())
    }
}

pub(crate) fn check_frames(frames: &[Vec<f64>], dim: usize) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::contract("empty frame sequence"));
    }
    if let Some((t, f)) = frames.iter().enumerate().find(|(_, f)| f.len() != dim) {
        return Err(Error::shape(format!(
            "frame {t} has {} features, expected {dim}",
            f.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Trn,
    Lstm,
    EncoderDecoder,
    Framewise,
    RnnOffline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Trn,
        ModelKind::Lstm,
        ModelKind::EncoderDecoder,
        ModelKind::Framewise,
        ModelKind::RnnOffline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Trn => "trn",
            ModelKind::Lstm => "lstm",
            ModelKind::EncoderDecoder => "ed",
            ModelKind::Framewise => "framewise",
            ModelKind::RnnOffline => "rnn-offline",
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            ModelKind::Trn => 0,
            ModelKind::Lstm => 1,
            ModelKind::EncoderDecoder => 2,
            ModelKind::Framewise => 3,
            ModelKind::RnnOffline => 4,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    /// Whether the model emits anticipated distributions.
    pub fn anticipates(self) -> bool {
        matches!(self, ModelKind::Trn | ModelKind::EncoderDecoder)
    }

    /// Whether outputs at `t` depend only on frames up to `t`.
    pub fn is_online(self) -> bool {
        self != ModelKind::RnnOffline
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown model '{s}', expected one of trn, lstm, ed, framewise, rnn-offline"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Trn(TrnParams),
    Lstm(LstmModelParams),
    EncoderDecoder(EdParams),
    Framewise(FramewiseParams),
    RnnOffline(LstmModelParams),
}

impl ParamSet for ModelParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        match self {
            ModelParams::Trn(p) => p.blocks(),
            ModelParams::Lstm(p) | ModelParams::RnnOffline(p) => p.blocks(),
            ModelParams::EncoderDecoder(p) => p.blocks(),
            ModelParams::Framewise(p) => p.blocks(),
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        match self {
            ModelParams::Trn(p) => p.blocks_mut(),
            ModelParams::Lstm(p) | ModelParams::RnnOffline(p) => p.blocks_mut(),
            ModelParams::EncoderDecoder(p) => p.blocks_mut(),
            ModelParams::Framewise(p) => p.blocks_mut(),
        }
    }
}

/// A model kind, its architecture config and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub config: TrnConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn init<R: Rng + ?Sized>(kind: ModelKind, config: TrnConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let params = match kind {
            ModelKind::Trn => ModelParams::Trn(TrnParams::init(c, rng)),
            ModelKind::Lstm => ModelParams::Lstm(LstmModelParams::init(c.feature_dim, c, rng)),
            ModelKind::EncoderDecoder => ModelParams::EncoderDecoder(EdParams::init(c, rng)),
            ModelKind::Framewise => ModelParams::Framewise(FramewiseParams::init(c, rng)),
            ModelKind::RnnOffline => {
                ModelParams::RnnOffline(LstmModelParams::init(2 * c.feature_dim, c, rng))
            }
        };
        Ok(Self {
            kind,
            config,
            params,
        })
    }

    pub fn zeros(kind: ModelKind, config: TrnConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let params = match kind {
            ModelKind::Trn => ModelParams::Trn(TrnParams::zeros(c)),
            ModelKind::Lstm => ModelParams::Lstm(LstmModelParams::zeros(c.feature_dim, c)),
            ModelKind::EncoderDecoder => ModelParams::EncoderDecoder(EdParams::zeros(c)),
            ModelKind::Framewise => ModelParams::Framewise(FramewiseParams::zeros(c)),
            ModelKind::RnnOffline => {
                ModelParams::RnnOffline(LstmModelParams::zeros(2 * c.feature_dim, c))
            }
        };
        Ok(Self {
            kind,
            config,
            params,
        })
    }

    /// Per-frame inputs the model consumes for a full video. Only the
    /// offline oracle differs from the raw features.
    pub fn prepare_inputs(&self, frames: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match self.kind {
            ModelKind::RnnOffline => offline_inputs(frames, self.config.decoder_steps),
            _ => frames.to_vec(),
        }
    }

    /// Runs over already-prepared inputs from the zero state.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<Vec<StepOutput>> {
        match &self.params {
            ModelParams::Trn(p) => forward_sequence(p, inputs),
            ModelParams::Lstm(p) | ModelParams::RnnOffline(p) => baselines::lstm_forward(p, inputs),
            ModelParams::EncoderDecoder(p) => baseline_encoder_decoder(p, inputs),
            ModelParams::Framewise(p) => baselines::framewise_forward(p, inputs),
        }
    }

    /// Prepares a raw video and runs the model over it.
    pub fn stream(&self, frames: &[Vec<f64>]) -> Result<Vec<StepOutput>> {
        self.forward(&self.prepare_inputs(frames))
    }

    /// Loss of one prepared sequence and its gradient. Models without a
    /// decoder ignore the anticipation targets and `alpha`.
    pub fn loss_and_grad(
        &self,
        inputs: &[Vec<f64>],
        targets: &Targets,
        alpha: f64,
    ) -> Result<(f64, ModelParams)> {
        Ok(match &self.params {
            ModelParams::Trn(p) => {
                let (l, g) = backward_sequence(p, inputs, targets, alpha)?;
                (l, ModelParams::Trn(g))
            }
            ModelParams::Lstm(p) => {
                let (l, g) = baselines::lstm_backward(p, inputs, targets)?;
                (l, ModelParams::Lstm(g))
            }
            ModelParams::RnnOffline(p) => {
                let (l, g) = baselines::lstm_backward(p, inputs, targets)?;
                (l, ModelParams::RnnOffline(g))
            }
            ModelParams::EncoderDecoder(p) => {
                let (l, g) = baselines::ed_backward(p, inputs, targets, alpha)?;
                (l, ModelParams::EncoderDecoder(g))
            }
            ModelParams::Framewise(p) => {
                let (l, g) = baselines::framewise_backward(p, inputs, targets)?;
                (l, ModelParams::Framewise(g))
            }
        })
    }

    /// Input width expected by [`Model::forward`].
    pub fn input_dim(&self) -> usize {
        match self.kind {
            ModelKind::RnnOffline => 2 * self.config.feature_dim,
            _ => self.config.feature_dim,
        }
    }
}
