//! Reverse-mode automatic differentiation over dense `f64` tensors.
//!
//! A [`Tape`] records every operation applied to its [`Var`]s and replays
//! them backwards to produce gradients. Tapes are cheap and meant to be
//! rebuilt for every evaluation.

mod check;
mod error;
mod gemm;
mod tape;
mod tensor;

pub use check::{central_difference, finite_diff_check, max_relative_error};
pub use error::{DiffError, Result};
pub use tape::{Gradients, Tape, Var, LAYER_NORM_EPS};
pub use tensor::Tensor;
