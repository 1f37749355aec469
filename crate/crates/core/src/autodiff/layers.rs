//! Layer primitives built on the tape: dense, LSTM/BiLSTM, character CNN and
//! dropout.

use rand::Rng;

use super::params::{fan_in_uniform, he_uniform, orthogonal, small_uniform, ParamId, ParamStore};
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use super::AutodiffError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// `activation(W · x + b)` applied to every column of `x`. Weights use He
/// initialization since the layers here are followed by a ReLU.
#[derive(Debug, Clone, Copy)]
pub struct Dense {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Dense {
    pub fn new<R: Rng>(store: &mut ParamStore, rng: &mut R, name: &str, input: usize, output: usize) -> Self {
        Dense {
            weight: store.add(format!("{name}.weight"), he_uniform(rng, output, input)),
            bias: store.add(format!("{name}.bias"), Tensor::zeros(output, 1)),
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var, activation: Activation) -> Result<Var, AutodiffError> {
        let w = tape.param(self.weight);
        let b = tape.param(self.bias);
        let wx = tape.matmul(w, x)?;
        let y = tape.add(wx, b)?;
        Ok(match activation {
            Activation::Relu => tape.relu(y),
            Activation::None => y,
        })
    }
}

/// Single-direction LSTM with gate order input, forget, cell, output.
#[derive(Debug, Clone, Copy)]
pub struct Lstm {
    pub input_weight: ParamId,
    pub recurrent_weight: ParamId,
    pub bias: ParamId,
    pub hidden: usize,
}

impl Lstm {
    /// Orthogonal recurrent blocks, small uniform input weights and a forget
    /// gate bias of one.
    pub fn new<R: Rng>(store: &mut ParamStore, rng: &mut R, name: &str, input: usize, hidden: usize) -> Self {
        let bound = (1.0 / input.max(1) as f64).sqrt();
        let mut recurrent = Tensor::zeros(4 * hidden, hidden);
        for gate in 0..4 {
            let q = orthogonal(rng, hidden);
            for r in 0..hidden {
                for c in 0..hidden {
                    recurrent.set(gate * hidden + r, c, q.get(r, c));
                }
            }
        }
        let mut bias = Tensor::zeros(4 * hidden, 1);
        for r in hidden..2 * hidden {
            bias.set(r, 0, 1.0);
        }
        Lstm {
            input_weight: store.add(format!("{name}.w_ih"), small_uniform(rng, 4 * hidden, input, bound)),
            recurrent_weight: store.add(format!("{name}.w_hh"), recurrent),
            bias: store.add(format!("{name}.bias"), bias),
            hidden,
        }
    }

    /// Runs over the columns of `x` (one timestep per column), optionally in
    /// reverse. Returns `hidden × T` with column t holding the state after
    /// reading column t.
    pub fn forward(&self, tape: &mut Tape, x: Var, reverse: bool) -> Result<Var, AutodiffError> {
        let steps = tape.shape(x).1;
        let h = self.hidden;
        let w_ih = tape.param(self.input_weight);
        let w_hh = tape.param(self.recurrent_weight);
        let bias = tape.param(self.bias);
        let projected = tape.matmul(w_ih, x)?;
        let projected = tape.add(projected, bias)?;

        let mut state_h = tape.constant(Tensor::zeros(h, 1));
        let mut state_c = tape.constant(Tensor::zeros(h, 1));
        let mut outputs = vec![state_h; steps];
        let order: Vec<usize> = if reverse { (0..steps).rev().collect() } else { (0..steps).collect() };
        for t in order {
            let xt = tape.column(projected, t)?;
            let rec = tape.matmul(w_hh, state_h)?;
            let gates = tape.add(xt, rec)?;
            let i = tape.slice_rows(gates, 0, h)?;
            let f = tape.slice_rows(gates, h, h)?;
            let g = tape.slice_rows(gates, 2 * h, h)?;
            let o = tape.slice_rows(gates, 3 * h, h)?;
            let i = tape.sigmoid(i);
            let f = tape.sigmoid(f);
            let g = tape.tanh(g);
            let o = tape.sigmoid(o);
            let keep = tape.mul(f, state_c)?;
            let write = tape.mul(i, g)?;
            state_c = tape.add(keep, write)?;
            let squashed = tape.tanh(state_c);
            state_h = tape.mul(o, squashed)?;
            outputs[t] = state_h;
        }
        tape.concat_cols(&outputs)
    }
}

/// Forward and backward LSTMs whose outputs are stacked, giving `2·hidden`
/// rows per timestep.
#[derive(Debug, Clone, Copy)]
pub struct BiLstm {
    pub forward: Lstm,
    pub backward: Lstm,
}

impl BiLstm {
    /// `output` is the concatenated size and must be even.
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        name: &str,
        input: usize,
        output: usize,
    ) -> Result<Self, AutodiffError> {
        if output == 0 || !output.is_multiple_of(2) {
            return Err(AutodiffError::Config(format!(
                "BiLSTM output size must be even and positive, got {output}"
            )));
        }
        Ok(BiLstm {
            forward: Lstm::new(store, rng, &format!("{name}.fwd"), input, output / 2),
            backward: Lstm::new(store, rng, &format!("{name}.bwd"), input, output / 2),
        })
    }

    pub fn run(&self, tape: &mut Tape, x: Var) -> Result<Var, AutodiffError> {
        let f = self.forward.forward(tape, x, false)?;
        let b = self.backward.forward(tape, x, true)?;
        tape.concat_rows(&[f, b])
    }
}

/// Index 0 pads short words, index 1 stands for unseen characters.
pub const CHAR_PAD: usize = 0;
pub const CHAR_UNKNOWN: usize = 1;

/// Character embeddings, one convolution of fixed width and max-over-time
/// pooling per word.
#[derive(Debug, Clone, Copy)]
pub struct CharCnn {
    pub embedding: ParamId,
    pub filters: ParamId,
    pub bias: ParamId,
    pub width: usize,
    pub word_len: usize,
    pub vocab: usize,
}

impl CharCnn {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        name: &str,
        vocab: usize,
        embed_dim: usize,
        width: usize,
        channels: usize,
        word_len: usize,
    ) -> Result<Self, AutodiffError> {
        if width == 0 || width > word_len {
            return Err(AutodiffError::Config(format!(
                "filter width {width} must be in 1..={word_len}"
            )));
        }
        Ok(CharCnn {
            embedding: store.add(format!("{name}.embedding"), small_uniform(rng, embed_dim, vocab.max(2), 0.1)),
            filters: store.add(format!("{name}.filters"), fan_in_uniform(rng, channels, embed_dim * width)),
            bias: store.add(format!("{name}.bias"), Tensor::zeros(channels, 1)),
            width,
            word_len,
            vocab: vocab.max(2),
        })
    }

    /// `words` holds one character-index row per word, each exactly
    /// `word_len` long. Out-of-range indices are read as [`CHAR_UNKNOWN`].
    /// Returns `channels × words.len()`.
    pub fn forward(&self, tape: &mut Tape, words: &[Vec<usize>]) -> Result<Var, AutodiffError> {
        if words.is_empty() {
            return Err(AutodiffError::Empty("char_cnn"));
        }
        let mut ids = Vec::with_capacity(words.len() * self.word_len);
        for w in words {
            if w.len() != self.word_len {
                return Err(AutodiffError::Config(format!(
                    "word has {} characters, expected {}",
                    w.len(),
                    self.word_len
                )));
            }
            ids.extend(w.iter().map(|&c| if c < self.vocab { c } else { CHAR_UNKNOWN }));
        }
        let table = tape.param(self.embedding);
        let chars = tape.gather_columns(table, &ids)?;
        let windows = tape.unfold(chars, self.word_len, self.width)?;
        let filters = tape.param(self.filters);
        let conv = tape.matmul(filters, windows)?;
        let bias = tape.param(self.bias);
        let conv = tape.add(conv, bias)?;
        tape.max_pool_segments(conv, self.word_len - self.width + 1)
    }
}

/// Inverted dropout: in training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; evaluation mode and a
/// zero rate return `x` unchanged.
pub fn dropout<R: Rng>(tape: &mut Tape, x: Var, rate: f64, mode: Mode, rng: &mut R) -> Result<Var, AutodiffError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(AutodiffError::Config(format!("dropout rate {rate} outside [0, 1)")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x);
    }
    let keep = 1.0 / (1.0 - rate);
    let n = tape.value(x).len();
    let mask = (0..n)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    tape.mask_mul(x, mask)
}
