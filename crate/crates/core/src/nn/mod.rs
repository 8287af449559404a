//! Dense-network engine: matrices, layers, activations, losses,
//! backpropagation and optimizers, all in `f64`.

mod activation;
mod layer;
mod loss;
mod matrix;
mod network;
mod optim;
pub mod rng;
mod spec;

pub use activation::{relu, sigmoid, Activation};
pub use layer::{glorot_limit, init_weights, DenseLayer, LayerGradient};
pub use loss::{bce_grad, bce_loss, mse_loss, Loss, LossKind, BCE_EPSILON};
pub use matrix::Matrix;
pub use network::{ForwardPass, Gradients, LayerId, Mode, Network};
pub use optim::{Optimizer, OptimizerConfig, OptimizerKind};
pub use rng::Rng;
pub use spec::{HeadKind, HeadSpec, LayerSpec, NetworkSpec};
