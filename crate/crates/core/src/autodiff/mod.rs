//! A small dense-tensor engine with reverse-mode differentiation.
//!
//! Values are 2-d `f64` matrices. Forward computations are recorded on a
//! [`Tape`]; [`Tape::backward`] returns gradients for every node and every
//! parameter the loss depends on. Parameters live in a [`ParamStore`] and are
//! updated by [`AdamState`]; [`EmaState`] keeps the averaged weights used for
//! evaluation.

mod checkpoint;
mod layers;
mod optim;
mod params;
mod tape;
mod tensor;

use thiserror::Error;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use layers::{dropout, Activation, BiLstm, CharCnn, Dense, Lstm, Mode, CHAR_PAD, CHAR_UNKNOWN};
pub use optim::{AdamState, EmaState};
pub use params::{fan_in_uniform, glorot_uniform, he_uniform, orthogonal, small_uniform, ParamId, ParamStore};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {}x{} vs {}x{}", left.0, left.1, right.0, right.1)]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{len} values cannot fill a {}x{} tensor", shape.0, shape.1)]
    DataLength { shape: (usize, usize), len: usize },
    #[error("index {index} out of range in {op} (bound {bound})")]
    Index {
        op: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("{0} needs at least one element")]
    Empty(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
