use rand::Rng;

use crate::model::affine::Affine;
use crate::model::lstm::{CellState, LstmCache, LstmParams};
use crate::model::params::{prefixed, ParamSet};
use crate::model::TrnConfig;
use crate::numerics::{
    cross_entropy_unchecked, softmax_ce_grad_acc, softmax_unchecked, softmax_vjp_acc, Matrix,
};

/// Recurrent decoder that rolls `steps` predictions forward from a source
/// hidden vector, feeding each embedded prediction back as the next input.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    /// `H x H`, maps the source hidden vector to the decoder's initial hidden state.
    pub hidden_embed: Affine,
    /// `E x (K+1)`, embeds the previous step's probabilities.
    pub score_embed: Affine,
    pub cell: LstmParams,
    /// `(K+1) x H`
    pub classifier: Affine,
    pub steps: usize,
}

/// Decoder hidden states and anticipated distributions, one per future offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub hidden: Vec<Vec<f64>>,
    pub scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct RolloutCache {
    pub source: Vec<f64>,
    pub steps: Vec<LstmCache>,
    pub scores: Vec<Vec<f64>>,
}

impl DecoderParams {
    pub fn zeros(cfg: &TrnConfig) -> Self {
        let (h, e, c) = (cfg.hidden_dim, cfg.score_embed_dim, cfg.num_classes());
        Self {
            hidden_embed: Affine::zeros(h, h),
            score_embed: Affine::zeros(e, c),
            cell: LstmParams::zeros(e, h),
            classifier: Affine::zeros(c, h),
            steps: cfg.decoder_steps,
        }
    }

    pub fn init<R: Rng + ?Sized>(cfg: &TrnConfig, rng: &mut R) -> Self {
        let (h, e, c) = (cfg.hidden_dim, cfg.score_embed_dim, cfg.num_classes());
        Self {
            hidden_embed: Affine::init(h, h, rng),
            score_embed: Affine::init(e, c, rng),
            cell: LstmParams::init(e, h, rng),
            classifier: Affine::init(c, h, rng),
            steps: cfg.decoder_steps,
        }
    }

    pub(crate) fn rollout_cached(&self, source: &[f64]) -> RolloutCache {
        let classes = self.classifier.out_dim();
        let mut state = CellState {
            h: self.hidden_embed.forward(source),
            c: vec![0.0; self.cell.hidden_dim()],
        };
        let mut feedback = vec![0.0; classes];
        let mut steps = Vec::with_capacity(self.steps);
        let mut scores = Vec::with_capacity(self.steps);
        for _ in 0..self.steps {
            let input = self.score_embed.forward(&feedback);
            let cache = self.cell.forward_cached(&input, &state);
            let p = softmax_unchecked(&self.classifier.forward(&cache.next.h));
            state = cache.next.clone();
            feedback.clone_from(&p);
            steps.push(cache);
            scores.push(p);
        }
        RolloutCache {
            source: source.to_vec(),
            steps,
            scores,
        }
    }

    pub(crate) fn loss(&self, cache: &RolloutCache, targets: &[Option<usize>]) -> f64 {
        cache
            .scores
            .iter()
            .zip(targets)
            .filter_map(|(p, t)| t.map(|l| cross_entropy_unchecked(p, l)))
            .sum()
    }

    /// Backward through a cached rollout.
    ///
    /// `extra_dh` is added to the gradient of every decoder hidden state (the
    /// future gate's average pooling contributes the same vector to each).
    /// The anticipation loss enters with weight `alpha`; masked offsets
    /// (`None`) contribute nothing. The gradient w.r.t. the source vector is
    /// added into `dsource`.
    pub(crate) fn backward(
        &self,
        cache: &RolloutCache,
        extra_dh: Option<&[f64]>,
        targets: &[Option<usize>],
        alpha: f64,
        grad: &mut DecoderParams,
        dsource: &mut [f64],
    ) {
        let hd = self.cell.hidden_dim();
        let classes = self.classifier.out_dim();
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut d_input_next: Option<Vec<f64>> = None;
        for i in (0..self.steps).rev() {
            let p = &cache.scores[i];
            let mut dlogits = vec![0.0; classes];
            if let Some(Some(label)) = targets.get(i) {
                softmax_ce_grad_acc(p, *label, alpha, &mut dlogits);
            }
            if let Some(du) = &d_input_next {
                // p feeds the next step through score_embed
                let mut dp = vec![0.0; classes];
                self.score_embed.weight.matvec_t_acc(du, &mut dp);
                softmax_vjp_acc(p, &dp, &mut dlogits);
                grad.score_embed.weight.outer_acc(du, p);
                grad.score_embed.bias.add_column(du);
            }
            let step = &cache.steps[i];
            let mut dh = dh_next;
            if let Some(extra) = extra_dh {
                for (a, b) in dh.iter_mut().zip(extra) {
                    *a += b;
                }
            }
            self.classifier
                .backward(&step.next.h, &dlogits, &mut grad.classifier, Some(&mut dh));
            let mut du = vec![0.0; step.x.len()];
            let dprev = self
                .cell
                .backward(step, &dh, &dc_next, &mut grad.cell, Some(&mut du));
            dh_next = dprev.h;
            dc_next = dprev.c;
            d_input_next = Some(du);
        }
        // the first step consumed score_embed(0): only the bias sees it
        if let Some(du) = &d_input_next {
            grad.score_embed.bias.add_column(du);
        }
        self.hidden_embed.backward(
            &cache.source,
            &dh_next,
            &mut grad.hidden_embed,
            Some(dsource),
        );
    }
}

impl ParamSet for DecoderParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        prefixed("hidden_embed", self.hidden_embed.blocks())
            .chain(prefixed("score_embed", self.score_embed.blocks()))
            .chain(prefixed("cell", self.cell.blocks()))
            .chain(prefixed("classifier", self.classifier.blocks()))
            .collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.hidden_embed.blocks_mut();
        v.extend(self.score_embed.blocks_mut());
        v.extend(self.cell.blocks_mut());
        v.extend(self.classifier.blocks_mut());
        v
    }
}
