use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use super::AutodiffError;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(params: &ParamStore, lr: f64) -> Self {
        let zeros: Vec<Tensor> = params
            .values()
            .iter()
            .map(|t| Tensor::zeros(t.rows(), t.cols()))
            .collect();
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    fn check(&self, params: &ParamStore) -> Result<(), AutodiffError> {
        if self.first.len() != params.len()
            || self
                .first
                .iter()
                .zip(params.values())
                .any(|(m, p)| m.shape() != p.shape())
        {
            return Err(AutodiffError::Checkpoint(
                "optimizer state does not match the parameter shapes".into(),
            ));
        }
        Ok(())
    }

    /// One update. `grads[i]` belongs to the i-th parameter; `None` counts as
    /// a zero gradient.
    pub fn step(&mut self, params: &mut ParamStore, grads: &[Option<Tensor>]) -> Result<(), AutodiffError> {
        self.check(params)?;
        if grads.len() != params.len() {
            return Err(AutodiffError::Checkpoint(format!(
                "{} gradients for {} parameters",
                grads.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (i, value) in params.values_mut().iter_mut().enumerate() {
            let shape = value.shape();
            let m = self.first[i].data_mut();
            let v = self.second[i].data_mut();
            let p = value.data_mut();
            match &grads[i] {
                Some(g) => {
                    if g.shape() != shape {
                        return Err(AutodiffError::Shape {
                            op: "adam_step",
                            left: shape,
                            right: g.shape(),
                        });
                    }
                    for k in 0..p.len() {
                        let gk = g.data()[k];
                        m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * gk;
                        v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * gk * gk;
                        p[k] -= self.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + self.eps);
                    }
                }
                None => {
                    for k in 0..p.len() {
                        m[k] *= self.beta1;
                        v[k] *= self.beta2;
                        p[k] -= self.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + self.eps);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exponential moving average of the parameters.
///
/// With `warmup` set the effective decay after `k` updates is
/// `min(decay, (1 + k) / (10 + k))`, so early shadows follow the weights
/// closely instead of averaging in the initialization for thousands of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmaState {
    pub decay: f64,
    pub warmup: bool,
    pub updates: u64,
    shadow: Vec<Tensor>,
    swapped: bool,
}

impl EmaState {
    /// Shadows start as a copy of the current parameters.
    pub fn new(params: &ParamStore, decay: f64, warmup: bool) -> Result<Self, AutodiffError> {
        Self::with_shadow(params.values().to_vec(), decay, warmup)
    }

    /// Shadows start at zero.
    pub fn zeros(params: &ParamStore, decay: f64) -> Result<Self, AutodiffError> {
        let shadow = params
            .values()
            .iter()
            .map(|t| Tensor::zeros(t.rows(), t.cols()))
            .collect();
        Self::with_shadow(shadow, decay, false)
    }

    fn with_shadow(shadow: Vec<Tensor>, decay: f64, warmup: bool) -> Result<Self, AutodiffError> {
        if !(0.0..1.0).contains(&decay) {
            return Err(AutodiffError::Config(format!("EMA decay {decay} outside [0, 1)")));
        }
        Ok(EmaState {
            decay,
            warmup,
            updates: 0,
            shadow,
            swapped: false,
        })
    }

    pub fn shadow(&self) -> &[Tensor] {
        &self.shadow
    }

    pub fn effective_decay(&self) -> f64 {
        if self.warmup {
            let k = self.updates as f64;
            self.decay.min((1.0 + k) / (10.0 + k))
        } else {
            self.decay
        }
    }

    /// `shadow ← decay · shadow + (1 − decay) · param`.
    pub fn update(&mut self, params: &ParamStore) -> Result<(), AutodiffError> {
        if self.swapped {
            return Err(AutodiffError::Config("EMA update while shadow weights are swapped in".into()));
        }
        if self.shadow.len() != params.len() {
            return Err(AutodiffError::Checkpoint("EMA state does not match the parameters".into()));
        }
        let d = self.effective_decay();
        for (s, p) in self.shadow.iter_mut().zip(params.values()) {
            if s.shape() != p.shape() {
                return Err(AutodiffError::Shape {
                    op: "ema_update",
                    left: s.shape(),
                    right: p.shape(),
                });
            }
            for (a, b) in s.data_mut().iter_mut().zip(p.data()) {
                *a = d * *a + (1.0 - d) * b;
            }
        }
        self.updates += 1;
        Ok(())
    }

    /// Puts the shadow weights into `params`, keeping the training weights
    /// aside until [`EmaState::swap_out`].
    pub fn swap_in(&mut self, params: &mut ParamStore) {
        assert!(!self.swapped, "shadow weights already swapped in");
        self.exchange(params);
        self.swapped = true;
    }

    pub fn swap_out(&mut self, params: &mut ParamStore) {
        assert!(self.swapped, "shadow weights are not swapped in");
        self.exchange(params);
        self.swapped = false;
    }

    fn exchange(&mut self, params: &mut ParamStore) {
        for (s, p) in self.shadow.iter_mut().zip(params.values_mut()) {
            std::mem::swap(s, p);
        }
    }

    /// A copy of `params` carrying the shadow values.
    pub fn averaged(&self, params: &ParamStore) -> ParamStore {
        let mut out = params.clone();
        for (dst, src) in out.values_mut().iter_mut().zip(&self.shadow) {
            *dst = src.clone();
        }
        out
    }
}
