//! Trainable maps from a finite space (or ℝⁿ) into ℝᵈ, loss primitives, and
//! the full-batch optimizer shared by every training routine.

mod activation;
mod mlp;
mod optim;
mod table;

pub use activation::{cross_entropy, guarded_ln, k_sigmoid, log_softmax, sigmoid, softmax, Activation};
pub use mlp::MlpEncoder;
pub use optim::{armijo_step, grad_check, minimize, Minimized, Objective, OptimizerConfig};
pub use table::EmbeddingTable;
