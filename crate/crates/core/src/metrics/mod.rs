//! Per-frame AP / mAP, calibrated AP, decile (early-stage) evaluation and
//! anticipation-horizon evaluation.
//!
//! Only action classes `1..=K` are scored; background never contributes a
//! class AP. Classes without positives are left out of the means.

mod ap;
mod report;
mod table;

pub use ap::{average_precision, calibrated_ap, ranking};
pub use report::MetricReport;
pub use table::{ScoreRow, ScoreTable};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetric {
    pub class: usize,
    /// `None` when the class has no positive frames.
    pub ap: Option<f64>,
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMetrics {
    pub classes: Vec<ClassMetric>,
    pub map: f64,
    pub mcap: f64,
}

/// AP and cAP per action class over `(label, scores)` pairs, in ranking order
/// for ties.
pub fn detection_metrics<'a, I>(pairs: I, num_classes: usize) -> Result<DetectionMetrics>
where
    I: IntoIterator<Item = (usize, &'a [f64])>,
{
    let pairs: Vec<(usize, &[f64])> = pairs.into_iter().collect();
    if pairs.is_empty() {
        return Err(Error::contract("no frames to score"));
    }
    let mut classes = Vec::with_capacity(num_classes.saturating_sub(1));
    for c in 1..num_classes {
        let scores: Vec<f64> = pairs.iter().map(|(_, s)| s[c]).collect();
        let positive: Vec<bool> = pairs.iter().map(|&(l, _)| l == c).collect();
        let metric = match (
            average_precision(&scores, &positive),
            calibrated_ap(&scores, &positive),
        ) {
            (Ok(ap), Ok(cap)) => ClassMetric {
                class: c,
                ap: Some(ap),
                cap: Some(cap),
            },
            (Err(Error::UndefinedMetric(_)), _) => {
                log::warn!("class {c} has no positive frames; excluded from the mean");
                ClassMetric {
                    class: c,
                    ap: None,
                    cap: None,
                }
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        classes.push(metric);
    }
    let aps: Vec<f64> = classes.iter().filter_map(|m| m.ap).collect();
    let caps: Vec<f64> = classes.iter().filter_map(|m| m.cap).collect();
    if aps.is_empty() {
        return Err(Error::UndefinedMetric(
            "no action class has a positive frame".into(),
        ));
    }
    Ok(DetectionMetrics {
        map: mean(&aps),
        mcap: mean(&caps),
        classes,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Per-class AP/cAP and their means on the current-frame scores.
pub fn per_frame_map(table: &ScoreTable) -> Result<DetectionMetrics> {
    table.validate()?;
    detection_metrics(
        table.rows.iter().map(|r| (r.label, r.current.as_slice())),
        table.num_classes,
    )
}

/// Frame ranges `[start, end)` (table rows) of maximal runs of one
/// non-background label, within a video.
pub fn action_instances(table: &ScoreTable) -> Vec<(usize, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    for range in table.video_ranges() {
        let mut i = range.start;
        while i < range.end {
            let label = table.rows[i].label;
            let mut j = i + 1;
            while j < range.end && table.rows[j].label == label {
                j += 1;
            }
            if label != 0 {
                out.push((label, i..j));
            }
            i = j;
        }
    }
    out
}

/// Decile of position `k` within an instance of `len` frames.
pub fn decile_of(k: usize, len: usize) -> usize {
    10 * k / len
}

/// Mean cAP over classes for each tenth of every action instance.
///
/// For class `c` and decile `j` the positives are the decile-`j` frames of
/// `c` instances and the negatives are every frame not labeled `c`. Entries
/// are `None` when no class has positives in that decile.
pub fn decile_cap(table: &ScoreTable) -> Result<Vec<Option<f64>>> {
    table.validate()?;
    let n = table.rows.len();
    // decile index of every frame that belongs to an action instance
    let mut decile = vec![None; n];
    for (_, range) in action_instances(table) {
        let len = range.len();
        for (k, row) in range.enumerate() {
            decile[row] = Some(decile_of(k, len));
        }
    }
    let mut out = Vec::with_capacity(10);
    for j in 0..10 {
        let mut caps = Vec::new();
        for c in 1..table.num_classes {
            let mut scores = Vec::new();
            let mut positive = Vec::new();
            for (row, d) in table.rows.iter().zip(&decile) {
                if row.label != c {
                    scores.push(row.current[c]);
                    positive.push(false);
                } else if *d == Some(j) {
                    scores.push(row.current[c]);
                    positive.push(true);
                }
            }
            match calibrated_ap(&scores, &positive) {
                Ok(v) => caps.push(v),
                Err(Error::UndefinedMetric(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.push(if caps.is_empty() { None } else { Some(mean(&caps)) });
    }
    Ok(out)
}

/// Detection metrics of the anticipated scores at one future offset.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetMetrics {
    pub offset: usize,
    pub metrics: Option<DetectionMetrics>,
}

/// For each offset `i` in `1..=steps`, scores `p~_t^i` against `l_{t+i}` over
/// frames whose target lies inside the same video.
pub fn anticipation_report(table: &ScoreTable) -> Result<Vec<OffsetMetrics>> {
    if table.anticipation_steps == 0 {
        return Ok(Vec::new());
    }
    table.validate()?;
    let ranges = table.video_ranges();
    (1..=table.anticipation_steps)
        .map(|i| {
            let pairs = ranges.iter().flat_map(|r| {
                (r.start..r.end.saturating_sub(i))
                    .map(move |t| (table.rows[t + i].label, table.rows[t].anticipated[i - 1].as_slice()))
            });
            let pairs: Vec<(usize, &[f64])> = pairs.collect();
            let metrics = if pairs.is_empty() {
                None
            } else {
                match detection_metrics(pairs, table.num_classes) {
                    Ok(m) => Some(m),
                    Err(Error::UndefinedMetric(_)) => None,
                    Err(e) => return Err(e),
                }
            };
            Ok(OffsetMetrics { offset: i, metrics })
        })
        .collect()
}

/// Mean of the per-offset mAP and mcAP over offsets that have a value.
pub fn anticipation_average(offsets: &[OffsetMetrics]) -> Option<(f64, f64)> {
    let defined: Vec<&DetectionMetrics> = offsets.iter().filter_map(|o| o.metrics.as_ref()).collect();
    if defined.is_empty() {
        return None;
    }
    let maps: Vec<f64> = defined.iter().map(|m| m.map).collect();
    let mcaps: Vec<f64> = defined.iter().map(|m| m.mcap).collect();
    Some((mean(&maps), mean(&mcaps)))
}
