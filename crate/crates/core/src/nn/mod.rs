//! Minimal double-precision neural toolkit: dense matrices, an LSTM, softmax
//! and cross-entropy, SGD with norm clipping, and a finite-difference
//! gradient checker.

pub mod gradcheck;
pub mod lstm;
pub mod matrix;
pub mod ops;
pub mod optim;

pub use gradcheck::{grad_check, GradCheckReport};
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmParams};
pub use matrix::Matrix;
pub use ops::{argmax, cross_entropy, softmax};
pub use optim::{clip_grad_norm, sgd_step, Parameters, SgdConfig};
