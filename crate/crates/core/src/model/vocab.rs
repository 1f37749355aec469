//! Character vocabulary and word-vector tables.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autodiff::{CHAR_PAD, CHAR_UNKNOWN};

use super::ModelError;

/// Characters seen in training text, numbered from 2 upwards in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct CharVocab {
    chars: Vec<char>,
    #[serde(skip)]
    index: HashMap<char, usize>,
}

impl From<String> for CharVocab {
    fn from(s: String) -> Self {
        CharVocab::from_chars(s.chars())
    }
}

impl From<CharVocab> for String {
    fn from(v: CharVocab) -> Self {
        v.chars.into_iter().collect()
    }
}

impl CharVocab {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let chars: Vec<char> = chars.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i + 2)).collect();
        CharVocab { chars, index }
    }

    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Self::from_chars(words.into_iter().flat_map(str::chars))
    }

    /// Table size including the padding and unknown slots.
    pub fn size(&self) -> usize {
        self.chars.len() + 2
    }

    pub fn index(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(CHAR_UNKNOWN)
    }

    /// Exactly `len` indices: truncated, then padded with [`CHAR_PAD`].
    pub fn encode(&self, word: &str, len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = word.chars().take(len).map(|c| self.index(c)).collect();
        out.resize(len, CHAR_PAD);
        out
    }
}

/// Where word vectors come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WordSource {
    /// Fixed pseudo-random vectors derived from a hash of the word.
    Hashed,
    /// A text file with one `word v1 v2 ...` entry per line.
    File { path: String },
}

/// Frozen word vectors. Lookups for words missing from a loaded table
/// report `None` so the caller can substitute the trainable unknown vector.
#[derive(Debug, Clone)]
pub struct WordVectors {
    dim: usize,
    source: WordSource,
    table: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn hashed(dim: usize) -> Self {
        WordVectors {
            dim,
            source: WordSource::Hashed,
            table: HashMap::new(),
        }
    }

    /// Reads a whitespace-separated vector file. When `keep` is given only
    /// those words are retained. Every line must have `dim` components.
    pub fn load<R: BufRead>(
        input: R,
        dim: usize,
        path: &str,
        keep: Option<&HashSet<String>>,
    ) -> Result<Self, ModelError> {
        let mut table = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| ModelError::Io(e.to_string()))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().unwrap_or_default();
            if keep.is_some_and(|k| !k.contains(word)) {
                continue;
            }
            let values: Vec<f64> = parts
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| ModelError::WordVectors {
                    line: i + 1,
                    message: format!("{e}"),
                })?;
            if values.len() != dim {
                return Err(ModelError::WordVectors {
                    line: i + 1,
                    message: format!("expected {dim} components, found {}", values.len()),
                });
            }
            table.entry(word.to_owned()).or_insert(values);
        }
        Ok(WordVectors {
            dim,
            source: WordSource::File { path: path.to_owned() },
            table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &WordSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn lookup(&self, word: &str) -> Option<Vec<f64>> {
        match self.source {
            WordSource::Hashed => Some(hashed_vector(word, self.dim)),
            WordSource::File { .. } => self.table.get(word).cloned(),
        }
    }
}

fn hashed_vector(word: &str, dim: usize) -> Vec<f64> {
    let digest = Sha256::digest(word.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(seed);
    let bound = (3.0 / dim.max(1) as f64).sqrt();
    (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
}
