//! Mini-batch training with Adam and an exponential moving average of the
//! weights, plus evaluation with the averaged weights.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{AdamState, Checkpoint, EmaState, Mode, Tensor};
use crate::dataeval::{evaluate, AlignedExample, DataError, EvalResult};
use crate::enrich::ConnectionTable;
use crate::model::{KarModel, ModelError, PreparedExample, TrainStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub ema_decay: f64,
    /// Ramp the EMA decay up from 0.1 during the first updates.
    pub ema_warmup: bool,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.0005,
            ema_decay: 0.999,
            ema_warmup: true,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch_size must be positive".into()));
        }
        if self.threads == 0 {
            return Err(ModelError::Config("threads must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.ema_decay) {
            return Err(ModelError::Config(format!("EMA decay {} outside [0, 1)", self.ema_decay)));
        }
        Ok(())
    }
}

/// A training example ready for the model.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub id: String,
    pub input: PreparedExample,
    pub table: ConnectionTable,
    pub gold: (usize, usize),
}

/// Pairs examples with their tables and the first alignable answer.
/// Examples without one are skipped with a warning; their ids are returned.
pub fn prepare_training(
    model: &KarModel,
    examples: &[AlignedExample],
    tables: &HashMap<String, ConnectionTable>,
) -> Result<(Vec<TrainingExample>, Vec<String>), ModelError> {
    let mut out = Vec::with_capacity(examples.len());
    let mut skipped = Vec::new();
    for ex in examples {
        let Some(gold) = ex.gold_span() else {
            log::warn!("skipping `{}`: no answer aligns to passage tokens", ex.id());
            skipped.push(ex.id().to_owned());
            continue;
        };
        let table = tables
            .get(ex.id())
            .ok_or_else(|| DataError::MissingTable(ex.id().to_owned()))?;
        out.push(TrainingExample {
            id: ex.id().to_owned(),
            input: model.prepare(ex)?,
            table: table.clone(),
            gold,
        });
    }
    Ok((out, skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training-mode loss over the epoch's examples.
    pub loss: f64,
    pub steps: usize,
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn derived_rng(seed: u64, epoch: usize, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed) ^ epoch as u64) ^ index as u64))
}

pub struct Trainer {
    pub model: KarModel,
    pub adam: AdamState,
    pub ema: EmaState,
    pub config: TrainConfig,
    pub epoch: usize,
    pool: Option<rayon::ThreadPool>,
}

impl Trainer {
    pub fn new(model: KarModel, config: TrainConfig) -> Result<Self, ModelError> {
        let adam = AdamState::new(&model.params, config.learning_rate);
        let ema = EmaState::new(&model.params, config.ema_decay, config.ema_warmup)?;
        Self::resume(model, adam, ema, config, 0)
    }

    /// Continues from saved optimizer state.
    pub fn resume(
        model: KarModel,
        mut adam: AdamState,
        ema: EmaState,
        config: TrainConfig,
        epoch: usize,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        adam.lr = config.learning_rate;
        let pool = if config.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.threads)
                    .build()
                    .map_err(|e| ModelError::Config(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Trainer {
            model,
            adam,
            ema,
            config,
            epoch,
            pool,
        })
    }

    fn steps_for(&self, batch: &[(usize, &TrainingExample)], mode: Mode) -> Result<Vec<TrainStep>, ModelError> {
        let run = |&(index, ex): &(usize, &TrainingExample)| {
            let mut rng = derived_rng(self.config.seed, self.epoch, index);
            self.model.train_step(&ex.input, &ex.table, ex.gold, mode, &mut rng)
        };
        match &self.pool {
            Some(pool) => pool.install(|| batch.par_iter().map(run).collect()),
            None => batch.iter().map(run).collect(),
        }
    }

    /// One update from the mean gradient of `batch`. Returns the mean loss.
    pub fn step(&mut self, batch: &[(usize, &TrainingExample)], mode: Mode) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let steps = self.steps_for(batch, mode)?;
        let scale = 1.0 / batch.len() as f64;
        let mut total: Vec<Option<Tensor>> = vec![None; self.model.params.len()];
        let mut loss = 0.0;
        for s in steps {
            loss += s.loss;
            for (slot, g) in total.iter_mut().zip(s.grads) {
                if let Some(g) = g {
                    match slot {
                        Some(t) => t.add_assign(&g),
                        None => *slot = Some(g),
                    }
                }
            }
        }
        for t in total.iter_mut().flatten() {
            t.scale_assign(scale);
        }
        self.adam.step(&mut self.model.params, &total)?;
        self.ema.update(&self.model.params)?;
        Ok(loss * scale)
    }

    /// Shuffles, splits into mini-batches and updates once per batch.
    pub fn train_epoch(&mut self, data: &[TrainingExample]) -> Result<EpochStats, ModelError> {
        self.epoch += 1;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = derived_rng(self.config.seed, self.epoch, usize::MAX);
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        let mut steps = 0;
        for chunk in order.chunks(self.config.batch_size) {
            let batch: Vec<(usize, &TrainingExample)> = chunk.iter().map(|&i| (i, &data[i])).collect();
            loss += self.step(&batch, Mode::Train)? * batch.len() as f64;
            steps += 1;
        }
        Ok(EpochStats {
            epoch: self.epoch,
            loss: loss / data.len().max(1) as f64,
            steps,
        })
    }

    /// A copy of the model carrying the averaged weights.
    pub fn averaged_model(&self) -> KarModel {
        let mut model = self.model.clone();
        model.params = self.ema.averaged(&self.model.params);
        model
    }

    /// Mean evaluation-mode loss of `model` over `data`.
    pub fn mean_loss(model: &KarModel, data: &[TrainingExample]) -> Result<f64, ModelError> {
        let mut total = 0.0;
        for ex in data {
            total += model.loss(&ex.input, &ex.table, ex.gold)?;
        }
        Ok(total / data.len().max(1) as f64)
    }

    /// EM/F1 of the averaged weights.
    pub fn evaluate(
        &self,
        dataset: &[AlignedExample],
        tables: &HashMap<String, ConnectionTable>,
    ) -> Result<EvalResult, ModelError> {
        evaluate(&self.averaged_model(), dataset, tables)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = self.model.to_checkpoint(Some(&self.adam), Some(&self.ema));
        if let serde_json::Value::Object(map) = &mut ck.meta {
            map.insert("epoch".into(), self.epoch.into());
        }
        ck
    }

    /// Rebuilds a trainer from [`Trainer::checkpoint`] output.
    pub fn from_checkpoint(
        checkpoint: &Checkpoint,
        words: crate::model::WordVectors,
        config: TrainConfig,
    ) -> Result<Self, ModelError> {
        let model = KarModel::from_checkpoint(checkpoint, words)?;
        let missing = |what: &str| ModelError::Checkpoint(format!("checkpoint has no {what} state"));
        let adam = checkpoint.adam.clone().ok_or_else(|| missing("optimizer"))?;
        let ema = checkpoint.ema.clone().ok_or_else(|| missing("EMA"))?;
        let epoch = checkpoint.meta.get("epoch").and_then(|e| e.as_u64()).unwrap_or(0) as usize;
        Self::resume(model, adam, ema, config, epoch)
    }
}
