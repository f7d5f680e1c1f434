use crate::error::{Error, Result};

/// Indices ordered by descending score; equal scores keep input order.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

fn check(scores: &[f64], is_positive: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != is_positive.len() {
        return Err(Error::shape(format!(
            "{} scores for {} flags",
            scores.len(),
            is_positive.len()
        )));
    }
    let pos = is_positive.iter().filter(|&&p| p).count();
    if pos == 0 {
        return Err(Error::UndefinedMetric("no positive frames".into()));
    }
    Ok((pos, is_positive.len() - pos))
}

/// Sum of `TP / (TP + FP / w)` at every positive rank, divided by `P`.
/// `w = 1` gives ordinary precision.
fn precision_sum(scores: &[f64], is_positive: &[bool], w: f64) -> f64 {
    let (mut tp, mut fp, mut acc) = (0.0f64, 0.0f64, 0.0f64);
    for i in ranking(scores) {
        if is_positive[i] {
            tp += 1.0;
            acc += if w == 0.0 { 1.0 } else { tp / (tp + fp / w) };
        } else {
            fp += 1.0;
        }
    }
    acc / tp
}

/// Average precision over the descending-score ranking.
pub fn average_precision(scores: &[f64], is_positive: &[bool]) -> Result<f64> {
    check(scores, is_positive)?;
    Ok(precision_sum(scores, is_positive, 1.0))
}

/// Calibrated AP: false positives are scaled by `1 / w`, `w = #neg / #pos`.
/// With no negatives every rank has calibrated precision 1.
pub fn calibrated_ap(scores: &[f64], is_positive: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, is_positive)?;
    let w = neg as f64 / pos as f64;
    Ok(precision_sum(scores, is_positive, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let s = [0.9, 0.8, 0.1, 0.05];
        let p = [true, true, false, false];
        assert_eq!(average_precision(&s, &p).unwrap(), 1.0);
        assert_eq!(calibrated_ap(&s, &p).unwrap(), 1.0);
    }

    #[test]
    fn single_positive_second() {
        assert_eq!(average_precision(&[0.9, 0.2], &[false, true]).unwrap(), 0.5);
    }

    #[test]
    fn positives_at_one_and_three() {
        let s = [0.9, 0.8, 0.7, 0.1];
        let p = [true, false, true, false];
        let ap = average_precision(&s, &p).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        // balanced, so calibration changes nothing
        assert_eq!(calibrated_ap(&s, &p).unwrap(), ap);
    }

    #[test]
    fn calibrated_hand_cases() {
        let p = [true, false, false, false];
        assert_eq!(calibrated_ap(&[0.9, 0.5, 0.4, 0.3], &p).unwrap(), 1.0);
        // w = 3; positive at rank 2 -> 1 / (1 + 1/3)
        let c = calibrated_ap(&[0.5, 0.9, 0.4, 0.3], &p).unwrap();
        assert!((c - 0.75).abs() < 1e-15);
        // no negatives
        assert_eq!(calibrated_ap(&[0.1, 0.2], &[true, true]).unwrap(), 1.0);
    }

    #[test]
    fn ties_break_by_position() {
        assert_eq!(ranking(&[0.5, 0.7, 0.5, 0.7]), vec![1, 3, 0, 2]);
        // tied positive listed after the negative ranks second
        assert_eq!(average_precision(&[0.5, 0.5], &[false, true]).unwrap(), 0.5);
        assert_eq!(average_precision(&[0.5, 0.5], &[true, false]).unwrap(), 1.0);
    }

    #[test]
    fn no_positives_is_undefined() {
        assert!(matches!(
            average_precision(&[0.1], &[false]),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(
            calibrated_ap(&[0.1], &[false]),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
