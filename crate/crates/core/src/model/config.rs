use crate::error::{Error, Result};

/// Architecture hyperparameters shared by the TRN and the baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct TrnConfig {
    /// D
    pub feature_dim: usize,
    /// K action classes; class 0 is background so models emit K+1 scores.
    pub num_actions: usize,
    /// H
    pub hidden_dim: usize,
    /// Decoder rollout length, also the lookahead of the offline oracle.
    pub decoder_steps: usize,
    /// Training window length.
    pub sequence_len: usize,
    /// Weight of the anticipation loss.
    pub alpha: f64,
    /// E, width of the embedded score feedback.
    pub score_embed_dim: usize,
    /// F, width of the future-context vector.
    pub future_dim: usize,
}

impl Default for TrnConfig {
    fn default() -> Self {
        Self {
            feature_dim: 16,
            num_actions: 4,
            hidden_dim: 32,
            decoder_steps: 8,
            sequence_len: 90,
            alpha: 1.0,
            score_embed_dim: 32,
            future_dim: 32,
        }
    }
}

impl TrnConfig {
    pub fn num_classes(&self) -> usize {
        self.num_actions + 1
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.feature_dim >= 1, "feature_dim must be >= 1"),
            (self.num_actions >= 1, "num_actions must be >= 1"),
            (self.num_actions <= 255, "num_actions must fit in a label byte"),
            (self.hidden_dim >= 1, "hidden_dim must be >= 1"),
            (self.decoder_steps >= 1, "decoder_steps must be >= 1"),
            (self.sequence_len >= 1, "sequence_len must be >= 1"),
            (self.score_embed_dim >= 1, "score_embed_dim must be >= 1"),
            (self.future_dim >= 1, "future_dim must be >= 1"),
            (
                self.alpha >= 0.0 && self.alpha.is_finite(),
                "alpha must be finite and >= 0",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::config(msg));
            }
        }
        Ok(())
    }
}
