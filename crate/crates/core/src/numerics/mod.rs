//! Dense linear algebra, activations, losses, Adam, and the finite-difference
//! gradient oracle used to validate every hand-derived backward pass.
//!
//! Everything runs in `f64`; checkpoints narrow to `f32` only on disk.

mod activation;
mod adam;
mod gradcheck;
mod matrix;

pub use activation::{
    cross_entropy, relu, relu_vec, sigmoid, sigmoid_vec, softmax, tanh_vec, PROB_FLOOR,
};
pub(crate) use activation::{
    cross_entropy_unchecked, softmax_ce_grad_acc, softmax_unchecked, softmax_vjp_acc,
};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{
    finite_diff_grad, max_relative_error, relative_error, DEFAULT_STEP, RELATIVE_FLOOR,
};
pub use matrix::{linear, Matrix};
