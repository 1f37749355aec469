//! Enriched-dataset files: JSON lines, one header line followed by one record
//! per example.
//!
//! ```text
//! {"format":"kar-enriched","version":1,"kappa":3,"lexicon":"9f2c…","examples":2}
//! {"id":"q1","kappa":3,"passage":[[],[4],…],"question":[[2],…]}
//! ```
//!
//! Position lists are sorted and 1-based.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConnectionTable, EnrichedExample, HopCount};

pub const FORMAT_NAME: &str = "kar-enriched";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("not an enriched-dataset file (format `{0}`)")]
    Format(String),
    #[error("unsupported enriched-file version {0}")]
    Version(u32),
    #[error("missing header line")]
    MissingHeader,
    #[error("record `{id}` has kappa {found}, header says {expected}")]
    KappaMismatch { id: String, found: u32, expected: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedHeader {
    pub format: String,
    pub version: u32,
    pub kappa: HopCount,
    /// Fingerprint of the lexicon the file was built from.
    pub lexicon: String,
    pub examples: usize,
}

impl EnrichedHeader {
    pub fn new(kappa: HopCount, lexicon: &str, examples: usize) -> Self {
        EnrichedHeader {
            format: FORMAT_NAME.to_owned(),
            version: FORMAT_VERSION,
            kappa,
            lexicon: lexicon.to_owned(),
            examples,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    kappa: HopCount,
    passage: Vec<Vec<u32>>,
    question: Vec<Vec<u32>>,
}

pub fn write_enriched<W: Write>(
    mut out: W,
    header: &EnrichedHeader,
    examples: &[EnrichedExample],
) -> Result<(), FileError> {
    let json = |e| FileError::Json { line: 0, source: e };
    writeln!(out, "{}", serde_json::to_string(header).map_err(json)?)?;
    for ex in examples {
        let record = Record {
            id: ex.id.clone(),
            kappa: ex.table.kappa,
            passage: ex.table.passage.clone(),
            question: ex.table.question.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&record).map_err(json)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_enriched<R: BufRead>(input: R) -> Result<(EnrichedHeader, Vec<EnrichedExample>), FileError> {
    let mut lines = input.lines().enumerate();
    let header: EnrichedHeader = loop {
        let Some((i, line)) = lines.next() else {
            return Err(FileError::MissingHeader);
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break serde_json::from_str(&line).map_err(|e| FileError::Json {
            line: i + 1,
            source: e,
        })?;
    };
    if header.format != FORMAT_NAME {
        return Err(FileError::Format(header.format));
    }
    if header.version != FORMAT_VERSION {
        return Err(FileError::Version(header.version));
    }
    let mut examples = Vec::with_capacity(header.examples);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line).map_err(|e| FileError::Json {
            line: i + 1,
            source: e,
        })?;
        if r.kappa != header.kappa {
            return Err(FileError::KappaMismatch {
                id: r.id,
                found: r.kappa.0,
                expected: header.kappa.0,
            });
        }
        examples.push(EnrichedExample {
            id: r.id,
            table: ConnectionTable {
                passage: r.passage,
                question: r.question,
                kappa: r.kappa,
            },
        });
    }
    Ok((header, examples))
}
