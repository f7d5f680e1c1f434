//! Quadratic-time transcription of the AP / cAP definitions, written
//! without the library's ranking so the two can be compared.

use trn::metrics::ScoreTable;

/// Whether item `j` is ranked at or above item `i`: higher score first,
/// ties broken by position.
fn at_or_above(scores: &[f64], j: usize, i: usize) -> bool {
    scores[j] > scores[i] || (scores[j] == scores[i] && j <= i)
}

/// `sum over positives i of prec(i) / P`, where `prec` counts true and
/// false positives ranked at or above `i` and scales false positives by
/// `1 / w`. `w = None` means plain precision.
#[allow(clippy::needless_range_loop)]
fn brute_precision(scores: &[f64], positive: &[bool], calibrated: bool) -> Option<f64> {
    let p = positive.iter().filter(|&&x| x).count();
    if p == 0 {
        return None;
    }
    let n = positive.len() - p;
    let w = n as f64 / p as f64;
    let mut sum = 0.0;
    for i in 0..scores.len() {
        if !positive[i] {
            continue;
        }
        let mut tp = 0.0;
        let mut fp = 0.0;
        for j in 0..scores.len() {
            if at_or_above(scores, j, i) {
                if positive[j] {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        sum += if !calibrated {
            tp / (tp + fp)
        } else if w == 0.0 {
            1.0
        } else {
            tp / (tp + fp / w)
        };
    }
    Some(sum / p as f64)
}

pub fn ap(scores: &[f64], positive: &[bool]) -> Option<f64> {
    brute_precision(scores, positive, false)
}

pub fn cap(scores: &[f64], positive: &[bool]) -> Option<f64> {
    brute_precision(scores, positive, true)
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// (mAP, mcAP) over action classes of `(label, scores)` pairs.
pub fn means(pairs: &[(usize, Vec<f64>)], classes: usize) -> (Option<f64>, Option<f64>) {
    let per_class = |f: fn(&[f64], &[bool]) -> Option<f64>| {
        mean_defined((1..classes).map(|c| {
            let s: Vec<f64> = pairs.iter().map(|(_, x)| x[c]).collect();
            let p: Vec<bool> = pairs.iter().map(|(l, _)| *l == c).collect();
            f(&s, &p)
        }))
    };
    (per_class(ap), per_class(cap))
}

/// Per-video label sequences.
fn videos(table: &ScoreTable) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<&str> = None;
    for (r, row) in table.rows.iter().enumerate() {
        if last != Some(row.video.as_str()) {
            out.push(Vec::new());
            last = Some(&row.video);
        }
        out.last_mut().unwrap().push(r);
    }
    out
}

pub fn detection(table: &ScoreTable) -> (Option<f64>, Option<f64>) {
    let pairs: Vec<(usize, Vec<f64>)> = table
        .rows
        .iter()
        .map(|r| (r.label, r.current.clone()))
        .collect();
    means(&pairs, table.num_classes)
}

/// Mean cAP per decile. A frame at position `k` of an `len`-frame
/// instance is in decile `j` when `j * len <= 10 * k < (j + 1) * len`.
pub fn deciles(table: &ScoreTable) -> Vec<Option<f64>> {
    let rows = &table.rows;
    let mut position: Vec<Option<(usize, usize)>> = vec![None; rows.len()];
    for video in videos(table) {
        for (i, &r) in video.iter().enumerate() {
            let label = rows[r].label;
            if label == 0 {
                continue;
            }
            let mut start = i;
            while start > 0 && rows[video[start - 1]].label == label {
                start -= 1;
            }
            let mut end = i + 1;
            while end < video.len() && rows[video[end]].label == label {
                end += 1;
            }
            position[r] = Some((i - start, end - start));
        }
    }
    (0..10)
        .map(|j| {
            mean_defined((1..table.num_classes).map(|c| {
                let mut s = Vec::new();
                let mut p = Vec::new();
                for (r, row) in rows.iter().enumerate() {
                    let in_decile = position[r]
                        .is_some_and(|(k, len)| j * len <= 10 * k && 10 * k < (j + 1) * len);
                    if row.label != c || in_decile {
                        s.push(row.current[c]);
                        p.push(row.label == c);
                    }
                }
                cap(&s, &p)
            }))
        })
        .collect()
}

/// (mAP, mcAP) of the offset-`i` anticipated scores against labels `i`
/// frames later in the same video.
pub fn anticipation(table: &ScoreTable, i: usize) -> (Option<f64>, Option<f64>) {
    let mut pairs = Vec::new();
    for video in videos(table) {
        for t in 0..video.len() {
            if t + i < video.len() {
                pairs.push((
                    table.rows[video[t + i]].label,
                    table.rows[video[t]].anticipated[i - 1].clone(),
                ));
            }
        }
    }
    means(&pairs, table.num_classes)
}
