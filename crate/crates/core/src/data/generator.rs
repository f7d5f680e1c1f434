//! Synthetic labeled streams.
//!
//! Labels follow a Markov chain over segments with geometric durations.
//! Each frame's feature is its class mean plus Gaussian noise, except in the
//! last `precursor_len` frames before a label change, where the mean is
//! blended toward the upcoming class. The blend is what makes the near
//! future partially visible in the present.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};

use crate::data::{StreamDataset, Video};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub num_videos: usize,
    pub frames_per_video: usize,
    pub num_actions: usize,
    pub feature_dim: usize,
    /// Row-stochastic `(K+1) x (K+1)` chain over segment labels.
    pub transition: Vec<Vec<f64>>,
    /// Mean of the geometric segment duration, in frames.
    pub mean_segment_len: f64,
    /// Per-class emission means; drawn from `N(0, mean_scale^2)` when absent.
    pub class_means: Option<Vec<Vec<f64>>>,
    pub mean_scale: f64,
    /// Standard deviation of the per-coordinate Gaussian noise.
    pub noise: f64,
    /// Blend weight toward the next class inside the precursor window.
    pub precursor_strength: f64,
    pub precursor_len: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    /// A config with the default background-hub chain.
    pub fn new(num_actions: usize, feature_dim: usize) -> Self {
        Self {
            num_videos: 10,
            frames_per_video: 600,
            num_actions,
            feature_dim,
            transition: default_transition(num_actions, 0.5),
            mean_segment_len: 20.0,
            class_means: None,
            mean_scale: 1.0,
            noise: 1.0,
            precursor_strength: 0.0,
            precursor_len: 0,
            seed: 0,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_actions + 1
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.num_classes();
        if self.transition.len() != c || self.transition.iter().any(|r| r.len() != c) {
            return Err(Error::config(format!(
                "transition matrix must be {c}x{c} for {} actions",
                self.num_actions
            )));
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::config(format!(
                    "transition row {i} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "transition row {i} sums to {s}, not 1"
                )));
            }
        }
        if self.mean_segment_len < 1.0 || !self.mean_segment_len.is_finite() {
            return Err(Error::config("mean_segment_len must be >= 1"));
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return Err(Error::config("noise must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.precursor_strength) {
            return Err(Error::config("precursor_strength must lie in [0, 1]"));
        }
        if self.mean_scale < 0.0 || !self.mean_scale.is_finite() {
            return Err(Error::config("mean_scale must be >= 0"));
        }
        if self.feature_dim == 0 || self.num_actions == 0 || self.num_actions > 255 {
            return Err(Error::config(
                "feature_dim must be >= 1 and num_actions in 1..=255",
            ));
        }
        if let Some(means) = &self.class_means {
            if means.len() != c || means.iter().any(|m| m.len() != self.feature_dim) {
                return Err(Error::config(format!(
                    "class_means must be {c} vectors of length {}",
                    self.feature_dim
                )));
            }
        }
        Ok(())
    }
}

/// Background moves to each action with equal probability; an action returns
/// to background with probability `background_return` and otherwise moves to
/// another action uniformly. With one action, the action always returns.
pub fn default_transition(num_actions: usize, background_return: f64) -> Vec<Vec<f64>> {
    let c = num_actions + 1;
    let mut t = vec![vec![0.0; c]; c];
    for p in &mut t[0][1..] {
        *p = 1.0 / num_actions as f64;
    }
    for (a, row) in t.iter_mut().enumerate().skip(1) {
        if num_actions == 1 {
            row[0] = 1.0;
            continue;
        }
        row[0] = background_return;
        let other = (1.0 - background_return) / (num_actions - 1) as f64;
        for (b, p) in row.iter_mut().enumerate().skip(1) {
            if b != a {
                *p = other;
            }
        }
    }
    t
}

/// Stationary distribution of a row-stochastic matrix, by power iteration
/// on the lazy chain `(P + I) / 2` (same fixed point, never periodic).
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Vec<f64> {
    let n = transition.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, row) in transition.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                next[j] += 0.5 * pi[i] * p;
            }
            next[i] += 0.5 * pi[i];
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    pi
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the last cumulative sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn round_f32(x: f64) -> f64 {
    f64::from(x as f32)
}

/// Samples a label sequence of length `frames`.
fn sample_labels(
    cfg: &GeneratorConfig,
    initial: &[f64],
    duration: &Geometric,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut labels = Vec::with_capacity(cfg.frames_per_video);
    let mut label = sample_index(rng, initial);
    while labels.len() < cfg.frames_per_video {
        let len = duration.sample(rng) as usize + 1;
        let take = len.min(cfg.frames_per_video - labels.len());
        labels.extend(std::iter::repeat_n(label, take));
        label = sample_index(rng, &cfg.transition[label]);
    }
    labels
}

pub fn generate(cfg: &GeneratorConfig) -> Result<StreamDataset> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, rng::DATAGEN);
    let means: Vec<Vec<f64>> = match &cfg.class_means {
        Some(m) => m
            .iter()
            .map(|row| row.iter().copied().map(round_f32).collect())
            .collect(),
        None => (0..cfg.num_classes())
            .map(|_| {
                (0..cfg.feature_dim)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        round_f32(cfg.mean_scale * z)
                    })
                    .collect()
            })
            .collect(),
    };
    let initial = stationary_distribution(&cfg.transition);
    let duration = Geometric::new(1.0 / cfg.mean_segment_len)
        .map_err(|e| Error::config(format!("segment duration: {e}")))?;
    let rho = cfg.precursor_strength;

    let mut videos = Vec::with_capacity(cfg.num_videos);
    for v in 0..cfg.num_videos {
        let labels = sample_labels(cfg, &initial, &duration, &mut rng);
        let n = labels.len();
        // label of the next different segment, if it starts within precursor_len frames
        let mut upcoming: Vec<Option<usize>> = vec![None; n];
        let mut next_change: Option<usize> = None;
        for t in (0..n).rev() {
            if t + 1 < n && labels[t + 1] != labels[t] {
                next_change = Some(t + 1);
            }
            if let Some(b) = next_change {
                if b - t <= cfg.precursor_len {
                    upcoming[t] = Some(labels[b]);
                }
            }
        }
        let features = labels
            .iter()
            .zip(&upcoming)
            .map(|(&l, next)| {
                (0..cfg.feature_dim)
                    .map(|j| {
                        let base = match next {
                            Some(nl) if rho > 0.0 => {
                                (1.0 - rho) * means[l][j] + rho * means[*nl][j]
                            }
                            _ => means[l][j],
                        };
                        let z: f64 = rng.sample(StandardNormal);
                        round_f32(base + cfg.noise * z)
                    })
                    .collect()
            })
            .collect();
        videos.push(Video {
            id: format!("video_{v:04}"),
            features,
            labels,
        });
    }
    Ok(StreamDataset {
        num_actions: cfg.num_actions,
        feature_dim: cfg.feature_dim,
        videos,
    })
}
