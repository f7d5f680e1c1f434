use rayon::prelude::*;

use crate::data::StreamDataset;
use crate::error::{Error, Result};
use crate::metrics::{ScoreRow, ScoreTable};
use crate::model::Model;

/// Streams every video of `dataset` through `model` from the zero state
/// and records per-frame scores. Videos run in parallel; rows come back in
/// dataset order.
pub fn evaluate(model: &Model, dataset: &StreamDataset) -> Result<ScoreTable> {
    let cfg = &model.config;
    if cfg.feature_dim != dataset.feature_dim || cfg.num_actions != dataset.num_actions {
        return Err(Error::config(format!(
            "model expects D={} K={}, dataset has D={} K={}",
            cfg.feature_dim, cfg.num_actions, dataset.feature_dim, dataset.num_actions
        )));
    }
    dataset.validate()?;
    let steps = if model.kind.anticipates() {
        cfg.decoder_steps
    } else {
        0
    };
    let per_video: Vec<Result<Vec<ScoreRow>>> = dataset
        .videos
        .par_iter()
        .filter(|v| !v.is_empty())
        .map(|v| {
            let outputs = model.stream(&v.features)?;
            Ok(outputs
                .into_iter()
                .zip(&v.labels)
                .enumerate()
                .map(|(frame, (out, &label))| ScoreRow {
                    video: v.id.clone(),
                    frame,
                    label,
                    current: out.current,
                    anticipated: out.anticipated,
                })
                .collect())
        })
        .collect();
    let mut table = ScoreTable::new(dataset.num_classes(), steps);
    for rows in per_video {
        table.rows.extend(rows?);
    }
    Ok(table)
}
