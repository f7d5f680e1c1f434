use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::StreamDataset;
use crate::error::{Error, Result};
use crate::model::{Model, ModelKind, ParamSet, Targets, TrnConfig};
use crate::numerics::{adam_step, AdamConfig, AdamState};
use crate::rng;
use crate::training::chop::chop_augment;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub seed: u64,
    pub sequence_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.0005,
            weight_decay: 0.0005,
            batch_size: 32,
            epochs: 10,
            alpha: 1.0,
            seed: 0,
            sequence_len: 90,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr < 0.0 || !self.lr.is_finite() {
            return Err(Error::config("lr must be finite and >= 0"));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::config("weight_decay must be finite and >= 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.sequence_len < 2 {
            return Err(Error::config("sequence_len must be >= 2"));
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::config("alpha must be finite and >= 0"));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }
}

/// One training window: prepared inputs and their targets.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Targets,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    /// Mean per-sample sequence loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Chop offset drawn for each (epoch, video); 0 for videos too short
    /// to chop.
    pub offsets: Vec<Vec<usize>>,
}

/// Mean loss and mean gradient over a batch. Per-sample work may run in
/// parallel; the reduction is sequential in sample order, so the result does
/// not depend on the thread count.
pub fn batch_gradient(
    model: &Model,
    batch: &[&TrainingSample],
    alpha: f64,
) -> Result<(f64, crate::model::ModelParams)> {
    if batch.is_empty() {
        return Err(Error::contract("empty batch"));
    }
    let per_sample: Vec<Result<(f64, crate::model::ModelParams)>> = batch
        .par_iter()
        .map(|s| model.loss_and_grad(&s.inputs, &s.targets, alpha))
        .collect();
    let mut loss = 0.0;
    let mut total: Option<crate::model::ModelParams> = None;
    for r in per_sample {
        let (l, g) = r?;
        loss += l;
        match &mut total {
            Some(t) => t.accumulate(&g)?,
            None => total = Some(g),
        }
    }
    let n = batch.len() as f64;
    let mut grad = total.expect("batch is non-empty");
    grad.scale(1.0 / n);
    Ok((loss / n, grad))
}

/// Trains a fresh model of `kind` on every video of `dataset`.
///
/// Each epoch re-chops every video with a fresh offset, shuffles the
/// windows and takes one Adam step per batch. `on_epoch` receives the epoch
/// number (from 1) and its mean loss.
pub fn train(
    kind: ModelKind,
    arch: &TrnConfig,
    dataset: &StreamDataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.videos.is_empty() {
        return Err(Error::contract("training set has no videos"));
    }
    let mut arch = arch.clone();
    arch.sequence_len = cfg.sequence_len;
    arch.alpha = cfg.alpha;
    if arch.feature_dim != dataset.feature_dim || arch.num_actions != dataset.num_actions {
        return Err(Error::config(format!(
            "model expects D={} K={}, dataset has D={} K={}",
            arch.feature_dim, arch.num_actions, dataset.feature_dim, dataset.num_actions
        )));
    }
    let mut model = Model::init(kind, arch, &mut rng::stream(cfg.seed, rng::INIT))?;
    let mut chop_rng = rng::stream(cfg.seed, rng::CHOP);
    let mut shuffle_rng = rng::stream(cfg.seed, rng::SHUFFLE);
    let steps = model.config.decoder_steps;
    let prepared: Vec<Vec<Vec<f64>>> = dataset
        .videos
        .iter()
        .map(|v| model.prepare_inputs(&v.features))
        .collect();

    let adam = cfg.adam();
    let mut states: Vec<AdamState> = model
        .params
        .blocks()
        .iter()
        .map(|(_, m)| AdamState::for_param(m))
        .collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut offsets = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut samples = Vec::new();
        let mut epoch_offsets = Vec::with_capacity(dataset.videos.len());
        for (video, inputs) in dataset.videos.iter().zip(&prepared) {
            let (offset, windows) = chop_augment(video.len(), cfg.sequence_len, &mut chop_rng);
            epoch_offsets.push(offset);
            for (start, end) in windows {
                samples.push(TrainingSample {
                    inputs: inputs[start..end].to_vec(),
                    targets: Targets::from_video(&video.labels, start, end - start, steps),
                });
            }
        }
        offsets.push(epoch_offsets);
        if samples.is_empty() {
            return Err(Error::contract(format!(
                "no video is longer than the {}-frame window",
                cfg.sequence_len
            )));
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&TrainingSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let (loss, grad) = batch_gradient(&model, &batch, cfg.alpha)?;
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss or gradient in epoch {epoch}, batch {}",
                    b + 1
                )));
            }
            loss_sum += loss * batch.len() as f64;
            let grads: Vec<_> = grad.blocks().into_iter().map(|(_, m)| m).collect();
            for ((param, g), state) in model
                .params
                .blocks_mut()
                .into_iter()
                .zip(grads)
                .zip(&mut states)
            {
                adam_step(param, g, state, &adam)?;
            }
        }
        let epoch_loss = loss_sum / samples.len() as f64;
        on_epoch(epoch, epoch_loss);
        epoch_losses.push(epoch_loss);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
        offsets,
    })
}
