use crate::error::{Error, Result};
use crate::model::{StepOutput, Targets};
use crate::numerics::cross_entropy;

/// `sum_t [ CE(p_t, l_t) + alpha * sum_i mask(t, i) * CE(p~_t^i, l_{t+i}) ]`.
///
/// Computed from forward outputs alone, independently of the backward
/// passes. Outputs without anticipated distributions contribute only the
/// detection term.
pub fn sequence_loss(outputs: &[StepOutput], targets: &Targets, alpha: f64) -> Result<f64> {
    if outputs.len() != targets.labels.len() {
        return Err(Error::contract(format!(
            "{} outputs but {} labels",
            outputs.len(),
            targets.labels.len()
        )));
    }
    let mut total = 0.0;
    for (t, out) in outputs.iter().enumerate() {
        let mut step = cross_entropy(&out.current, targets.labels[t])?;
        if !out.anticipated.is_empty() {
            let future = targets.future.get(t).ok_or_else(|| {
                Error::contract(format!("no anticipation targets for step {t}"))
            })?;
            if future.len() != out.anticipated.len() {
                return Err(Error::contract(format!(
                    "step {t}: {} anticipated distributions but {} targets",
                    out.anticipated.len(),
                    future.len()
                )));
            }
            let mut anticipation = 0.0;
            for (p, target) in out.anticipated.iter().zip(future) {
                if let Some(label) = target {
                    anticipation += cross_entropy(p, *label)?;
                }
            }
            step += alpha * anticipation;
        }
        total += step;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellState;

    fn out(current: Vec<f64>, anticipated: Vec<Vec<f64>>) -> StepOutput {
        StepOutput {
            current,
            anticipated,
            state: CellState::zeros(0),
        }
    }

    #[test]
    fn perfect_predictions_cost_nothing() {
        let outputs = vec![
            out(vec![1.0, 0.0], vec![vec![0.0, 1.0]]),
            out(vec![0.0, 1.0], vec![vec![0.0, 1.0]]),
        ];
        let targets = Targets {
            labels: vec![0, 1],
            future: vec![vec![Some(1)], vec![None]],
        };
        assert_eq!(sequence_loss(&outputs, &targets, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_two_step_hand_sum() {
        // two detection terms plus two valid anticipation terms, each ln 2
        let u = vec![0.5, 0.5];
        let outputs = vec![out(u.clone(), vec![u.clone()]), out(u.clone(), vec![u.clone()])];
        let targets = Targets {
            labels: vec![0, 1],
            future: vec![vec![Some(1)], vec![Some(0)]],
        };
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let want = (2.0 + alpha * 2.0) * 2f64.ln();
            let got = sequence_loss(&outputs, &targets, alpha).unwrap();
            assert!((got - want).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn alpha_zero_is_detection_only() {
        let outputs = vec![
            out(vec![0.7, 0.3], vec![vec![0.2, 0.8]]),
            out(vec![0.4, 0.6], vec![vec![0.9, 0.1]]),
        ];
        let targets = Targets {
            labels: vec![1, 0],
            future: vec![vec![Some(0)], vec![Some(1)]],
        };
        let want = -(0.3f64.ln()) - 0.4f64.ln();
        assert_eq!(sequence_loss(&outputs, &targets, 0.0).unwrap(), want);
    }

    #[test]
    fn misaligned_lengths_rejected() {
        let outputs = vec![out(vec![0.5, 0.5], vec![])];
        let targets = Targets {
            labels: vec![0, 1],
            future: vec![],
        };
        assert!(matches!(
            sequence_loss(&outputs, &targets, 1.0),
            Err(Error::Contract(_))
        ));
    }
}
