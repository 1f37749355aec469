//! Knowledge-aided machine reading comprehension.
//!
//! - [`lexdb`]: WordNet-style lexical database.
//! - [`enrich`]: bounded-hop semantic connections between passage and question words.
//! - [`autodiff`]: dense tensors, reverse-mode gradients, layers and optimizers.
//! - [`model`]: the Knowledge Aided Reader network.
//! - [`dataeval`]: SQuAD ingestion, tokenization and EM/F1.
//! - [`train`]: mini-batch training and evaluation loop.

pub mod autodiff;
pub mod dataeval;
pub mod enrich;
pub mod lexdb;
pub mod model;
pub mod train;
