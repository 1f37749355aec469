//! The Knowledge Aided Reader.
//!
//! Five layers: lexicon embedding, context embedding, coarse memory
//! (knowledge aided mutual attention + BiLSTM), refined memory (knowledge
//! aided self attention + BiLSTM) and span prediction. Examples are run one at
//! a time, so no padding or masking is needed; mini-batches average the
//! per-example gradients.

pub mod attention;
mod vocab;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, BiLstm, CharCnn, Checkpoint, Dense, Mode, ParamId, ParamStore, Tape, Tensor, Var};
use crate::autodiff::{glorot_uniform, AdamState, EmaState};
use crate::dataeval::{AlignedExample, DataError, SpanPredictor};
use crate::enrich::{ConnectionTable, EnrichError, HopCount};

pub use attention::{matching_vector, Pooling};
pub use vocab::{CharVocab, WordSource, WordVectors};

use attention::{matching_vectors, pointer, similarity, summaries, summary_pool, Regularizer};

/// Floor inside the log of the span loss.
pub const LOSS_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Enrich(#[from] EnrichError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("empty {0}")]
    EmptySequence(&'static str),
    #[error("invalid gold span ({a_s}, {a_e}) for a passage of {n} tokens")]
    InvalidLabel { a_s: usize, a_e: usize, n: usize },
    #[error("connection table built with kappa {found}, model expects {expected}")]
    KappaMismatch { expected: u32, found: u32 },
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("word vectors line {line}: {message}")]
    WordVectors { line: usize, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden size of every layer; BiLSTMs use `d / 2` per direction.
    pub d: usize,
    pub word_dim: usize,
    pub char_dim: usize,
    pub char_width: usize,
    pub char_channels: usize,
    /// Characters kept per word; shorter words are padded.
    pub word_len: usize,
    pub dropout: f64,
    /// Hop bound the connection tables must have been built with.
    pub kappa: HopCount,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d: 64,
            word_dim: 50,
            char_dim: 64,
            char_width: 5,
            char_channels: 100,
            word_len: 16,
            dropout: 0.3,
            kappa: HopCount::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.d == 0 || !self.d.is_multiple_of(2) {
            return bad(format!("d must be even and positive, got {}", self.d));
        }
        if self.word_dim == 0 || self.char_dim == 0 || self.char_channels == 0 {
            return bad("embedding sizes must be positive".into());
        }
        if self.char_width == 0 || self.char_width > self.word_len {
            return bad(format!(
                "char_width {} must be in 1..={}",
                self.char_width, self.word_len
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Layers {
    char_cnn: CharCnn,
    unknown: ParamId,
    lexicon: Dense,
    context: BiLstm,
    mutual: Pooling,
    enhance: Dense,
    similarity: ParamId,
    fusion: Dense,
    coarse: BiLstm,
    selfp: Pooling,
    self_fusion: Dense,
    refined: BiLstm,
    question_v: ParamId,
    question_w: ParamId,
    start: Pooling,
    end: Pooling,
}

impl Layers {
    fn new<R: Rng>(store: &mut ParamStore, rng: &mut R, c: &ModelConfig, chars: usize) -> Result<Self, ModelError> {
        let d = c.d;
        let char_cnn = CharCnn::new(
            store,
            rng,
            "char_cnn",
            chars,
            c.char_dim,
            c.char_width,
            c.char_channels,
            c.word_len,
        )?;
        let unknown = store.add("word.unknown", Tensor::zeros(c.word_dim, 1));
        let lexicon = Dense::new(store, rng, "lexicon", c.word_dim + c.char_channels, d);
        let context = BiLstm::new(store, rng, "context", d, d)?;
        let mutual = Pooling::new(store, rng, "mutual.match", d, d);
        let enhance = Dense::new(store, rng, "mutual.enhance", 2 * d, d);
        let similarity = store.add(
            "mutual.similarity",
            glorot_uniform(rng, 3 * d, 1),
        );
        let fusion = Dense::new(store, rng, "mutual.fusion", 4 * d, d);
        let coarse = BiLstm::new(store, rng, "coarse", d, d)?;
        let selfp = Pooling::new(store, rng, "self.match", d, d);
        let self_fusion = Dense::new(store, rng, "self.fusion", 2 * d, d);
        let refined = BiLstm::new(store, rng, "refined", d, d)?;
        let question_v = store.add("question.v", glorot_uniform(rng, 1, d));
        let question_w = store.add("question.w", glorot_uniform(rng, d, d));
        let start = Pooling::new(store, rng, "span.start", d, d);
        let end = Pooling::new(store, rng, "span.end", d, 2 * d);
        Ok(Layers {
            char_cnn,
            unknown,
            lexicon,
            context,
            mutual,
            enhance,
            similarity,
            fusion,
            coarse,
            selfp,
            self_fusion,
            refined,
            question_v,
            question_w,
            start,
            end,
        })
    }
}

/// Model inputs for one token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput {
    /// `word_dim × len`, zero columns for words without a vector.
    pub vectors: Tensor,
    /// 1 where the word has no vector and the unknown vector applies.
    pub unknown: Vec<f64>,
    pub chars: Vec<Vec<usize>>,
}

impl SequenceInput {
    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedExample {
    pub passage: SequenceInput,
    pub question: SequenceInput,
}

impl PreparedExample {
    pub fn n(&self) -> usize {
        self.passage.len()
    }

    pub fn m(&self) -> usize {
        self.question.len()
    }
}

/// Tape handles of every intermediate of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardVars {
    pub l_p: Var,
    pub l_q: Var,
    pub c_p: Var,
    pub c_q: Var,
    pub c_plus_p: Var,
    pub c_plus_q: Var,
    pub c_star_p: Var,
    pub c_star_q: Var,
    pub a: Var,
    pub r_q_mutual: Var,
    pub r_p: Var,
    pub g_tilde: Var,
    pub g: Var,
    pub g_plus: Var,
    pub h_tilde: Var,
    pub h: Var,
    pub r_q: Var,
    pub o_s: Var,
    pub o_e: Var,
    pub o: Var,
}

/// Values of the main representations of one example.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPair {
    pub l_p: Tensor,
    pub l_q: Tensor,
    pub c_p: Tensor,
    pub c_q: Tensor,
    pub g_tilde: Tensor,
    pub g: Tensor,
    pub h_tilde: Tensor,
    pub h: Tensor,
    /// Matching vectors: passage and question words against `C_P`, then
    /// passage words against `G`.
    pub c_plus_p: Tensor,
    pub c_plus_q: Tensor,
    pub g_plus: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanPrediction {
    pub o_s: Vec<f64>,
    pub o_e: Vec<f64>,
    /// `n × n`, strictly-lower entries zero.
    pub o: Tensor,
    /// 1-based, inclusive.
    pub a_s: usize,
    pub a_e: usize,
}

impl SpanPrediction {
    /// Builds `O = uptri(o_s o_eᵀ)` and takes its maximum cell, preferring
    /// the smallest start and then the smallest end on ties.
    pub fn from_distributions(o_s: Vec<f64>, o_e: Vec<f64>) -> Self {
        let n = o_s.len();
        let o = Tensor::from_fn(n, n, |i, j| if j >= i { o_s[i] * o_e[j] } else { 0.0 });
        Self::from_matrix(o_s, o_e, o)
    }

    fn from_matrix(o_s: Vec<f64>, o_e: Vec<f64>, o: Tensor) -> Self {
        let n = o_s.len();
        let (mut best, mut a_s, mut a_e) = (f64::NEG_INFINITY, 1, 1);
        for i in 0..n {
            for j in i..n {
                if o.get(i, j) > best {
                    best = o.get(i, j);
                    a_s = i + 1;
                    a_e = j + 1;
                }
            }
        }
        SpanPrediction { o_s, o_e, o, a_s, a_e }
    }

    pub fn n(&self) -> usize {
        self.o_s.len()
    }

    pub fn confidence(&self) -> f64 {
        self.o.get(self.a_s - 1, self.a_e - 1)
    }
}

fn check_label(gold: (usize, usize), n: usize) -> Result<(), ModelError> {
    let (a_s, a_e) = gold;
    if a_s == 0 || a_s > a_e || a_e > n {
        return Err(ModelError::InvalidLabel { a_s, a_e, n });
    }
    Ok(())
}

/// `−log(O[a_s][a_e] + ε)` for a 1-based gold span.
pub fn span_loss(prediction: &SpanPrediction, gold: (usize, usize)) -> Result<f64, ModelError> {
    check_label(gold, prediction.n())?;
    Ok(-(prediction.o.get(gold.0 - 1, gold.1 - 1) + LOSS_EPSILON).ln())
}

/// Everything needed to rebuild a model from a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub config: ModelConfig,
    pub chars: CharVocab,
    pub words: WordSource,
    pub seed: u64,
}

/// Result of a forward pass with a gold span.
#[derive(Debug, Clone)]
pub struct TrainStep {
    pub loss: f64,
    pub grads: Vec<Option<Tensor>>,
    pub prediction: SpanPrediction,
}

#[derive(Debug, Clone)]
pub struct KarModel {
    config: ModelConfig,
    chars: CharVocab,
    words: WordVectors,
    seed: u64,
    layers: Layers,
    pub params: ParamStore,
}

impl KarModel {
    /// Initializes all parameters from `seed`.
    pub fn new(config: ModelConfig, chars: CharVocab, words: WordVectors, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        if words.dim() != config.word_dim {
            return Err(ModelError::Config(format!(
                "word vectors have {} components, word_dim is {}",
                words.dim(),
                config.word_dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let layers = Layers::new(&mut params, &mut rng, &config, chars.size())?;
        Ok(KarModel {
            config,
            chars,
            words,
            seed,
            layers,
            params,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn chars(&self) -> &CharVocab {
        &self.chars
    }

    pub fn words(&self) -> &WordVectors {
        &self.words
    }

    pub fn meta(&self) -> ModelMeta {
        ModelMeta {
            config: self.config.clone(),
            chars: self.chars.clone(),
            words: self.words.source().clone(),
            seed: self.seed,
        }
    }

    pub fn to_checkpoint(&self, adam: Option<&AdamState>, ema: Option<&EmaState>) -> Checkpoint {
        let meta = serde_json::to_value(self.meta()).expect("model metadata is serializable");
        Checkpoint::new(meta, &self.params, adam, ema)
    }

    pub fn meta_of(checkpoint: &Checkpoint) -> Result<ModelMeta, ModelError> {
        serde_json::from_value(checkpoint.meta.clone()).map_err(|e| ModelError::Checkpoint(e.to_string()))
    }

    /// Rebuilds the model described by the checkpoint and loads its weights.
    /// `words` must provide the vectors named in the checkpoint metadata.
    pub fn from_checkpoint(checkpoint: &Checkpoint, words: WordVectors) -> Result<Self, ModelError> {
        let meta = Self::meta_of(checkpoint)?;
        let mut model = KarModel::new(meta.config, meta.chars, words, meta.seed)?;
        checkpoint
            .restore_params(&mut model.params)
            .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        Ok(model)
    }

    fn sequence(&self, words: &[&str]) -> SequenceInput {
        let dim = self.config.word_dim;
        let mut vectors = Tensor::zeros(dim, words.len());
        let mut unknown = vec![0.0; words.len()];
        let mut chars = Vec::with_capacity(words.len());
        for (j, w) in words.iter().enumerate() {
            match self.words.lookup(w) {
                Some(v) => {
                    for (r, x) in v.into_iter().enumerate() {
                        vectors.set(r, j, x);
                    }
                }
                None => unknown[j] = 1.0,
            }
            chars.push(self.chars.encode(w, self.config.word_len));
        }
        SequenceInput { vectors, unknown, chars }
    }

    /// Maps normalized tokens to word vectors and character indices.
    pub fn prepare_words(&self, passage: &[&str], question: &[&str]) -> Result<PreparedExample, ModelError> {
        if passage.is_empty() {
            return Err(ModelError::EmptySequence("passage"));
        }
        if question.is_empty() {
            return Err(ModelError::EmptySequence("question"));
        }
        Ok(PreparedExample {
            passage: self.sequence(passage),
            question: self.sequence(question),
        })
    }

    pub fn prepare(&self, example: &AlignedExample) -> Result<PreparedExample, ModelError> {
        self.prepare_words(&example.passage_words(), &example.question_words())
    }

    fn check_table(&self, input: &PreparedExample, table: &ConnectionTable) -> Result<(), ModelError> {
        if table.kappa != self.config.kappa {
            return Err(ModelError::KappaMismatch {
                expected: self.config.kappa.0,
                found: table.kappa.0,
            });
        }
        table.validate(input.n(), input.m())?;
        Ok(())
    }

    fn lexicon(
        &self,
        tape: &mut Tape,
        seq: &SequenceInput,
        reg: &mut Regularizer<'_, impl Rng>,
    ) -> Result<Var, ModelError> {
        let vectors = tape.constant(seq.vectors.clone());
        let unknown = tape.param(self.layers.unknown);
        let mask = tape.constant(Tensor::from_vec(1, seq.len(), seq.unknown.clone())?);
        let fill = tape.matmul(unknown, mask)?;
        let words = tape.add(vectors, fill)?;
        let chars = self.layers.char_cnn.forward(tape, &seq.chars)?;
        let x = tape.concat_rows(&[words, chars])?;
        Ok(reg.dense(tape, &self.layers.lexicon, x)?)
    }

    fn bilstm(
        &self,
        tape: &mut Tape,
        layer: &BiLstm,
        x: Var,
        reg: &mut Regularizer<'_, impl Rng>,
    ) -> Result<Var, ModelError> {
        let x = reg.apply(tape, x)?;
        Ok(layer.run(tape, x)?)
    }

    /// Records the full forward pass on `tape`. Dropout is active only in
    /// [`Mode::Train`].
    pub fn forward_on<R: Rng>(
        &self,
        tape: &mut Tape,
        input: &PreparedExample,
        table: &ConnectionTable,
        mode: Mode,
        rng: &mut R,
    ) -> Result<ForwardVars, ModelError> {
        if input.n() == 0 {
            return Err(ModelError::EmptySequence("passage"));
        }
        if input.m() == 0 {
            return Err(ModelError::EmptySequence("question"));
        }
        self.check_table(input, table)?;
        let mut reg = Regularizer {
            rate: self.config.dropout,
            mode,
            rng,
        };
        let ly = &self.layers;

        let l_p = self.lexicon(tape, &input.passage, &mut reg)?;
        let l_q = self.lexicon(tape, &input.question, &mut reg)?;
        let c_p = self.bilstm(tape, &ly.context, l_p, &mut reg)?;
        let c_q = self.bilstm(tape, &ly.context, l_q, &mut reg)?;

        let c_plus_p = matching_vectors(tape, &ly.mutual, c_p, c_p, &table.passage)?;
        let c_plus_q = matching_vectors(tape, &ly.mutual, c_p, c_q, &table.question)?;
        let x = tape.concat_rows(&[c_p, c_plus_p])?;
        let c_star_p = reg.dense(tape, &ly.enhance, x)?;
        let x = tape.concat_rows(&[c_q, c_plus_q])?;
        let c_star_q = reg.dense(tape, &ly.enhance, x)?;

        let a = similarity(tape, ly.similarity, c_star_p, c_star_q)?;
        let (r_q_mutual, r_p) = summaries(tape, a, c_p, c_q)?;
        let cp_rq = tape.mul(c_p, r_q_mutual)?;
        let rp_rq = tape.mul(r_p, r_q_mutual)?;
        let x = tape.concat_rows(&[c_p, r_q_mutual, cp_rq, rp_rq])?;
        let g_tilde = reg.dense(tape, &ly.fusion, x)?;
        let g = self.bilstm(tape, &ly.coarse, g_tilde, &mut reg)?;

        let g_plus = matching_vectors(tape, &ly.selfp, g, g, &table.passage)?;
        let x = tape.concat_rows(&[g, g_plus])?;
        let h_tilde = reg.dense(tape, &ly.self_fusion, x)?;
        let h = self.bilstm(tape, &ly.refined, h_tilde, &mut reg)?;

        let r_q = summary_pool(tape, ly.question_v, ly.question_w, c_q)?;
        let o_s = pointer(tape, &ly.start, h, r_q)?;
        let o_s_t = tape.transpose(o_s);
        let attended = tape.matmul(h, o_s_t)?;
        let end_context = tape.concat_rows(&[r_q, attended])?;
        let o_e = pointer(tape, &ly.end, h, end_context)?;
        let outer = tape.matmul(o_s_t, o_e)?;
        let o = tape.upper_triangular(outer);

        Ok(ForwardVars {
            l_p,
            l_q,
            c_p,
            c_q,
            c_plus_p,
            c_plus_q,
            c_star_p,
            c_star_q,
            a,
            r_q_mutual,
            r_p,
            g_tilde,
            g,
            g_plus,
            h_tilde,
            h,
            r_q,
            o_s,
            o_e,
            o,
        })
    }

    fn prediction(tape: &Tape, vars: &ForwardVars) -> SpanPrediction {
        SpanPrediction::from_matrix(
            tape.value(vars.o_s).data().to_vec(),
            tape.value(vars.o_e).data().to_vec(),
            tape.value(vars.o).clone(),
        )
    }

    /// Evaluation-mode prediction.
    pub fn predict(&self, input: &PreparedExample, table: &ConnectionTable) -> Result<SpanPrediction, ModelError> {
        let mut tape = Tape::new(&self.params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let vars = self.forward_on(&mut tape, input, table, Mode::Eval, &mut rng)?;
        Ok(Self::prediction(&tape, &vars))
    }

    /// Evaluation-mode intermediate representations.
    pub fn encode(&self, input: &PreparedExample, table: &ConnectionTable) -> Result<EncodedPair, ModelError> {
        let mut tape = Tape::new(&self.params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = self.forward_on(&mut tape, input, table, Mode::Eval, &mut rng)?;
        let get = |x: Var| tape.value(x).clone();
        Ok(EncodedPair {
            l_p: get(v.l_p),
            l_q: get(v.l_q),
            c_p: get(v.c_p),
            c_q: get(v.c_q),
            g_tilde: get(v.g_tilde),
            g: get(v.g),
            h_tilde: get(v.h_tilde),
            h: get(v.h),
            c_plus_p: get(v.c_plus_p),
            c_plus_q: get(v.c_plus_q),
            g_plus: get(v.g_plus),
        })
    }

    /// Loss and parameter gradients for one example.
    pub fn train_step<R: Rng>(
        &self,
        input: &PreparedExample,
        table: &ConnectionTable,
        gold: (usize, usize),
        mode: Mode,
        rng: &mut R,
    ) -> Result<TrainStep, ModelError> {
        check_label(gold, input.n())?;
        let mut tape = Tape::new(&self.params);
        let vars = self.forward_on(&mut tape, input, table, mode, rng)?;
        let cell = tape.element(vars.o, gold.0 - 1, gold.1 - 1)?;
        let floored = tape.add_scalar(cell, LOSS_EPSILON);
        let log = tape.log(floored);
        let loss = tape.scale(log, -1.0);
        let grads = tape.backward(loss).into_param_grads();
        Ok(TrainStep {
            loss: tape.value(loss).item(),
            grads,
            prediction: Self::prediction(&tape, &vars),
        })
    }

    /// Evaluation-mode loss without gradients.
    pub fn loss(&self, input: &PreparedExample, table: &ConnectionTable, gold: (usize, usize)) -> Result<f64, ModelError> {
        check_label(gold, input.n())?;
        span_loss(&self.predict(input, table)?, gold)
    }
}

impl SpanPredictor for KarModel {
    type Error = ModelError;

    fn predict_span(&self, example: &AlignedExample, table: &ConnectionTable) -> Result<(usize, usize, f64), ModelError> {
        let input = self.prepare(example)?;
        let p = self.predict(&input, table)?;
        Ok((p.a_s, p.a_e, p.confidence()))
    }
}
