//! Deterministic numeric kernel: seeded RNG streams, dense parameter
//! tensors, scalar nonlinearities, global-norm gradient clipping, SGD,
//! and a finite-difference gradient checker.
//!
//! Everything here is a pure function of its inputs and the supplied RNG
//! state. Repeated with identical inputs within one build, every routine
//! reproduces identical 64-bit float outputs.

mod ops;
mod optim;
mod real;
mod rng;
mod tensor;

pub use ops::{identity, relu, relu_deriv, sigmoid, sigmoid_deriv_from_output, tanh, tanh_deriv_from_output};
pub use optim::{clip_global_norm, finite_diff_check, sgd_step};
pub use real::Real;
pub use rng::{fnv1a64, split_stream, splitmix64_mix, Rng};
pub use tensor::{init_uniform, Matrix, ParamStore, ParamTensor, Role, TensorId};
