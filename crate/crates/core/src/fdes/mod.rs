//! Fuzzy discrete event systems: state/event algebra, smooth composition,
//! backpropagation, training, and serialization.

mod backprop;
mod compose;
mod event;
mod network;
mod serial;
mod state;
mod train;

pub use backprop::{
    backward, backward_from_output_grad, finite_diff_gradients, gradient_check_cases,
    max_relative_error, run_gradient_check, sgd_step, GradCheckCase, GradientSet,
};
pub use compose::{compose_exact, compose_smooth, cost};
pub use event::EventMatrix;
pub use network::{FdesNetwork, ForwardTrace};
pub use serial::{
    load_network, network_to_string, parse_network, parse_network_partial, save_network,
};
pub use state::FuzzyState;
pub use train::{train, train_seeded, TrainConfig, TrainResult};
