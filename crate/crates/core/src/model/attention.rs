//! Attention building blocks of the reader, written against a [`Tape`].

use rand::Rng;

use crate::autodiff::{dropout, Activation, AutodiffError, Dense, Mode, ParamId, ParamStore, Tape, Tensor, Var};
use crate::autodiff::glorot_uniform;

/// Parameters of an additive attention pooling `vᵀ tanh(W z + U c)`.
/// `v` is stored as a `1 × d` row.
#[derive(Debug, Clone, Copy)]
pub struct Pooling {
    pub v: ParamId,
    pub w: ParamId,
    pub u: ParamId,
}

impl Pooling {
    pub fn new<R: Rng>(store: &mut ParamStore, rng: &mut R, name: &str, d: usize, context: usize) -> Self {
        Pooling {
            v: store.add(format!("{name}.v"), glorot_uniform(rng, 1, d)),
            w: store.add(format!("{name}.w"), glorot_uniform(rng, d, d)),
            u: store.add(format!("{name}.u"), glorot_uniform(rng, d, context)),
        }
    }
}

/// Dropout settings threaded through a forward pass.
pub struct Regularizer<'r, R: Rng> {
    pub rate: f64,
    pub mode: Mode,
    pub rng: &'r mut R,
}

impl<R: Rng> Regularizer<'_, R> {
    pub fn apply(&mut self, tape: &mut Tape, x: Var) -> Result<Var, AutodiffError> {
        dropout(tape, x, self.rate, self.mode, self.rng)
    }

    /// Dropout on the input of a dense layer, then the layer.
    pub fn dense(&mut self, tape: &mut Tape, layer: &Dense, x: Var) -> Result<Var, AutodiffError> {
        let x = self.apply(tape, x)?;
        layer.forward(tape, x, Activation::Relu)
    }
}

/// Attention-pools the columns of `source` at the 1-based `positions`.
///
/// `w_source` must be `W · source`, computed once per sequence and shared by
/// all words; `u_c` is `U · c_w` for the word being enhanced. An empty
/// position list yields an exact zero vector.
pub fn pool_positions(
    tape: &mut Tape,
    source: Var,
    w_source: Var,
    positions: &[u32],
    u_c: Var,
    v: Var,
) -> Result<Var, AutodiffError> {
    if positions.is_empty() {
        let d = tape.shape(source).0;
        return Ok(tape.constant(Tensor::zeros(d, 1)));
    }
    let idx: Vec<usize> = positions.iter().map(|&p| p as usize - 1).collect();
    let z = tape.gather_columns(source, &idx)?;
    let wz = tape.gather_columns(w_source, &idx)?;
    let pre = tape.add(wz, u_c)?;
    let act = tape.tanh(pre);
    let scores = tape.matmul(v, act)?;
    let weights = tape.softmax_rows(scores);
    let weights = tape.transpose(weights);
    tape.matmul(z, weights)
}

/// The matching vector of one word: attention pooling of the columns of `z`
/// against the word's context vector `c_w`. `None` stands for an empty `Z`.
pub fn matching_vector(tape: &mut Tape, pool: &Pooling, c_w: Var, z: Option<Var>) -> Result<Var, AutodiffError> {
    let Some(z) = z else {
        let d = tape.shape(c_w).0;
        return Ok(tape.constant(Tensor::zeros(d, 1)));
    };
    let (w, u, v) = (tape.param(pool.w), tape.param(pool.u), tape.param(pool.v));
    let wz = tape.matmul(w, z)?;
    let uc = tape.matmul(u, c_w)?;
    let k = tape.shape(z).1;
    let positions: Vec<u32> = (1..=k as u32).collect();
    pool_positions(tape, z, wz, &positions, uc, v)
}

/// Matching vectors for every column of `context`, each pooling `source`
/// at that column's positions. Returns `d × context.cols()`.
pub fn matching_vectors(
    tape: &mut Tape,
    pool: &Pooling,
    source: Var,
    context: Var,
    sets: &[Vec<u32>],
) -> Result<Var, AutodiffError> {
    let (w, u, v) = (tape.param(pool.w), tape.param(pool.u), tape.param(pool.v));
    let w_source = tape.matmul(w, source)?;
    let u_context = tape.matmul(u, context)?;
    let mut columns = Vec::with_capacity(sets.len());
    for (i, set) in sets.iter().enumerate() {
        let column = if set.is_empty() {
            let d = tape.shape(source).0;
            tape.constant(Tensor::zeros(d, 1))
        } else {
            let u_c = tape.column(u_context, i)?;
            pool_positions(tape, source, w_source, set, u_c, v)?
        };
        columns.push(column);
    }
    tape.concat_cols(&columns)
}

/// Trilinear similarity `A[i][j] = v_fᵀ [p_i; q_j; p_i ⊙ q_j]` for
/// `v_f` stored as a `3d × 1` column.
pub fn similarity(tape: &mut Tape, v_f: ParamId, p: Var, q: Var) -> Result<Var, AutodiffError> {
    let d = tape.shape(p).0;
    let v = tape.param(v_f);
    let v1 = tape.slice_rows(v, 0, d)?;
    let v2 = tape.slice_rows(v, d, d)?;
    let v3 = tape.slice_rows(v, 2 * d, d)?;
    let v1 = tape.transpose(v1);
    let v2 = tape.transpose(v2);
    let s1 = tape.matmul(v1, p)?;
    let s1 = tape.transpose(s1);
    let s2 = tape.matmul(v2, q)?;
    let weighted = tape.mul(p, v3)?;
    let weighted = tape.transpose(weighted);
    let s3 = tape.matmul(weighted, q)?;
    let a = tape.add(s3, s1)?;
    tape.add(a, s2)
}

/// Question-aware passage summaries `(R_Q, R_P)` from the similarity matrix.
pub fn summaries(tape: &mut Tape, a: Var, c_p: Var, c_q: Var) -> Result<(Var, Var), AutodiffError> {
    let by_row = tape.softmax_rows(a);
    let by_col = tape.softmax_cols(a);
    let by_row_t = tape.transpose(by_row);
    let r_q = tape.matmul(c_q, by_row_t)?;
    let passage_to_question = tape.matmul(c_p, by_col)?;
    let r_p = tape.matmul(passage_to_question, by_row_t)?;
    Ok((r_q, r_p))
}

/// Learned-vector pooling `C · softmax(vᵀ tanh(W C))` into one column.
pub fn summary_pool(tape: &mut Tape, v: ParamId, w: ParamId, c: Var) -> Result<Var, AutodiffError> {
    let (v, w) = (tape.param(v), tape.param(w));
    let pre = tape.matmul(w, c)?;
    let act = tape.tanh(pre);
    let scores = tape.matmul(v, act)?;
    let weights = tape.softmax_rows(scores);
    let weights = tape.transpose(weights);
    tape.matmul(c, weights)
}

/// Start or end distribution `softmax(vᵀ tanh(W H + U x))` as a `1 × n` row.
pub fn pointer(tape: &mut Tape, pool: &Pooling, h: Var, x: Var) -> Result<Var, AutodiffError> {
    let (w, u, v) = (tape.param(pool.w), tape.param(pool.u), tape.param(pool.v));
    let wh = tape.matmul(w, h)?;
    let ux = tape.matmul(u, x)?;
    let pre = tape.add(wh, ux)?;
    let act = tape.tanh(pre);
    let scores = tape.matmul(v, act)?;
    Ok(tape.softmax_rows(scores))
}
