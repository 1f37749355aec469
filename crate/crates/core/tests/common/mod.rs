#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use kar_core::dataeval::{align_dataset, load_dataset, AlignedExample};
use kar_core::enrich::{ConnectionTable, EnrichConfig, Enricher, HopCount};
use kar_core::lexdb::LexicalDatabase;
use kar_core::model::{CharVocab, KarModel, ModelConfig, WordVectors};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn lexicon(name: &str) -> LexicalDatabase {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    LexicalDatabase::from_text(&text).unwrap()
}

pub fn dataset(name: &str) -> Vec<AlignedExample> {
    let file = std::fs::File::open(fixture(name)).unwrap();
    align_dataset(load_dataset(std::io::BufReader::new(file)).unwrap())
}

pub fn tables(db: &LexicalDatabase, data: &[AlignedExample], kappa: u32) -> HashMap<String, ConnectionTable> {
    let enricher = Enricher::new(db, EnrichConfig::default());
    enricher
        .enrich_dataset(data, HopCount(kappa))
        .unwrap()
        .into_iter()
        .map(|e| (e.id, e.table))
        .collect()
}

pub fn model_for(data: &[AlignedExample], config: ModelConfig, seed: u64) -> KarModel {
    let chars = CharVocab::from_words(data.iter().flat_map(|e| {
        let mut w = e.passage_words();
        w.extend(e.question_words());
        w
    }));
    let words = WordVectors::hashed(config.word_dim);
    KarModel::new(config, chars, words, seed).unwrap()
}
