//! Loss, chop augmentation, the training loop and streaming evaluation.

mod chop;
mod evaluate;
mod loss;
mod trainer;

pub use chop::{chop_augment, chop_windows, Window};
pub use evaluate::evaluate;
pub use loss::sequence_loss;
pub use trainer::{batch_gradient, train, TrainConfig, TrainOutcome, TrainingSample};
