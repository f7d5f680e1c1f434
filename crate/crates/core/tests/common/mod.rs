#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trn::metrics::{ScoreRow, ScoreTable};

/// Random score table: 1..=3 videos, at most 50 frames in total, 2..=4
/// classes, 0..=3 anticipation steps. Scores are drawn from a small grid
/// half the time so ties are common.
pub fn random_table(seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = rng.random_range(2..=4);
    let steps = rng.random_range(0..=3);
    let coarse = rng.random_bool(0.5);
    let score = |rng: &mut ChaCha8Rng| {
        if coarse {
            f64::from(rng.random_range(0..5u8)) / 4.0
        } else {
            rng.random::<f64>()
        }
    };
    let mut table = ScoreTable::new(classes, steps);
    let videos = rng.random_range(1..=3);
    let total = rng.random_range(videos..=50);
    let mut lens = vec![1; videos];
    for _ in videos..total {
        lens[rng.random_range(0..videos)] += 1;
    }
    for (v, &len) in lens.iter().enumerate() {
        let mut label = rng.random_range(0..classes);
        for frame in 0..len {
            if rng.random_bool(0.25) {
                label = rng.random_range(0..classes);
            }
            let current = (0..classes).map(|_| score(&mut rng)).collect();
            let anticipated = (0..steps)
                .map(|_| (0..classes).map(|_| score(&mut rng)).collect())
                .collect();
            table.rows.push(ScoreRow {
                video: format!("v{v}"),
                frame,
                label,
                current,
                anticipated,
            });
        }
    }
    table
}
