use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trn::model::{Model, ModelKind, TrnConfig};

fn random_frames(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

#[test]
fn online_outputs_never_depend_on_later_frames() {
    let cfg = TrnConfig {
        feature_dim: 5,
        num_actions: 3,
        hidden_dim: 6,
        decoder_steps: 3,
        score_embed_dim: 4,
        future_dim: 5,
        ..TrnConfig::default()
    };
    for (i, kind) in ModelKind::ALL.into_iter().enumerate().filter(|(_, k)| k.is_online()) {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let model = Model::init(kind, cfg.clone(), &mut rng).unwrap();
        for _ in 0..10 {
            let frames = random_frames(&mut rng, 24, cfg.feature_dim);
            let full = model.stream(&frames).unwrap();
            for p in [1, 7, 23] {
                let prefix = model.stream(&frames[..p]).unwrap();
                assert_eq!(prefix[..], full[..p], "{kind} prefix {p}");
                // changing the future leaves the past untouched
                let mut altered = frames.clone();
                for row in &mut altered[p..] {
                    row.iter_mut().for_each(|v| *v = -*v * 3.0);
                }
                assert_eq!(model.stream(&altered).unwrap()[..p], full[..p]);
            }
        }
    }
}

#[test]
fn offline_oracle_does_look_ahead() {
    let cfg = TrnConfig {
        feature_dim: 3,
        num_actions: 2,
        hidden_dim: 4,
        decoder_steps: 2,
        ..TrnConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = Model::init(ModelKind::RnnOffline, cfg, &mut rng).unwrap();
    let frames = random_frames(&mut rng, 10, 3);
    let full = model.stream(&frames).unwrap();
    let prefix = model.stream(&frames[..5]).unwrap();
    assert_ne!(prefix[4], full[4]);
}
