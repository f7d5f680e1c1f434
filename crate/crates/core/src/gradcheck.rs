//! Analytic-versus-numeric gradient comparison for whole models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Model, ModelKind, ParamSet, Targets, TrnConfig};
use crate::numerics::{finite_diff_grad, relative_error, DEFAULT_STEP};
use crate::training::sequence_loss;

/// Rewrites a flattened analytic gradient in place.
pub type GradientHook<'a> = &'a dyn Fn(&mut [f64]);

/// Worst relative error within one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub max_relative_error: f64,
}

/// Compares the model's backward pass against central differences of the
/// forward-only loss, block by block.
///
/// `corrupt` is applied to the analytic gradient before comparison; it
/// exists so callers can confirm that a wrong gradient is caught.
pub fn block_errors(
    model: &Model,
    inputs: &[Vec<f64>],
    targets: &Targets,
    alpha: f64,
    corrupt: Option<GradientHook<'_>>,
) -> Result<Vec<BlockError>> {
    let (_, grad) = model.loss_and_grad(inputs, targets, alpha)?;
    let mut analytic = grad.to_flat();
    if let Some(f) = corrupt {
        f(&mut analytic);
    }
    let mut probe = model.clone();
    let numeric = finite_diff_grad(
        |flat| {
            probe.params.assign_flat(flat).expect("flat length is fixed");
            probe
                .forward(inputs)
                .and_then(|out| sequence_loss(&out, targets, alpha))
                .unwrap_or(f64::NAN)
        },
        &model.params.to_flat(),
        DEFAULT_STEP,
    )?;
    let mut offset = 0;
    Ok(model
        .params
        .blocks()
        .into_iter()
        .map(|(name, m)| {
            let range = offset..offset + m.len();
            offset += m.len();
            let worst = analytic[range.clone()]
                .iter()
                .zip(&numeric[range])
                .map(|(&a, &n)| relative_error(a, n))
                .fold(0.0, f64::max);
            BlockError {
                name,
                max_relative_error: worst,
            }
        })
        .collect())
}

/// A random model, input sequence and targets at tiny dimensions.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub model: Model,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Targets,
    pub alpha: f64,
}

/// Draws a tiny instance (dims <= 8, length <= 5, decoder steps <= 3) with
/// some anticipation targets masked.
pub fn tiny_instance(kind: ModelKind, seed: u64) -> Result<TinyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = TrnConfig {
        feature_dim: rng.random_range(1..=4),
        num_actions: rng.random_range(1..=3),
        hidden_dim: rng.random_range(1..=5),
        decoder_steps: rng.random_range(1..=3),
        sequence_len: rng.random_range(2..=5),
        alpha: rng.random_range(0.25..2.0),
        score_embed_dim: rng.random_range(1..=4),
        future_dim: rng.random_range(1..=4),
    };
    let model = Model::init(kind, config.clone(), &mut rng)?;
    let len = config.sequence_len;
    let raw: Vec<Vec<f64>> = (0..len + config.decoder_steps)
        .map(|_| {
            (0..config.feature_dim)
                .map(|_| rng.random_range(-1.5..1.5))
                .collect()
        })
        .collect();
    let labels: Vec<usize> = (0..len + rng.random_range(0..=config.decoder_steps))
        .map(|_| rng.random_range(0..config.num_classes()))
        .collect();
    let inputs = model.prepare_inputs(&raw)[..len].to_vec();
    let targets = Targets::from_video(&labels, 0, len, config.decoder_steps);
    Ok(TinyInstance {
        model,
        inputs,
        targets,
        alpha: config.alpha,
    })
}
