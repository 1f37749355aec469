//! Versioned JSON checkpoints. Floats are written in shortest round-trip form
//! and parsed with correct rounding, so save/load is value exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::optim::{AdamState, EmaState};
use super::params::ParamStore;
use super::tensor::Tensor;
use super::AutodiffError;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub value: Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Free-form metadata owned by the caller (model configuration, vocabularies).
    pub meta: serde_json::Value,
    pub params: Vec<NamedTensor>,
    pub adam: Option<AdamState>,
    pub ema: Option<EmaState>,
}

impl Checkpoint {
    pub fn new(
        meta: serde_json::Value,
        params: &ParamStore,
        adam: Option<&AdamState>,
        ema: Option<&EmaState>,
    ) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            meta,
            params: params
                .iter()
                .map(|(_, name, value)| NamedTensor {
                    name: name.to_owned(),
                    value: value.clone(),
                })
                .collect(),
            adam: adam.cloned(),
            ema: ema.cloned(),
        }
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), AutodiffError> {
        serde_json::to_writer(out, self).map_err(|e| AutodiffError::Checkpoint(e.to_string()))
    }

    pub fn load<R: Read>(input: R) -> Result<Self, AutodiffError> {
        let ck: Checkpoint =
            serde_json::from_reader(input).map_err(|e| AutodiffError::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(AutodiffError::Checkpoint(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        for p in &ck.params {
            if p.value.len() != p.value.rows() * p.value.cols() {
                return Err(AutodiffError::Checkpoint(format!("parameter `{}` is truncated", p.name)));
            }
        }
        Ok(ck)
    }

    /// Copies the stored values into `params`; names and shapes must match.
    pub fn restore_params(&self, params: &mut ParamStore) -> Result<(), AutodiffError> {
        let pairs: Vec<(String, Tensor)> = self
            .params
            .iter()
            .map(|p| (p.name.clone(), p.value.clone()))
            .collect();
        params.load_from(&pairs)
    }
}
