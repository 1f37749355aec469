use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use kar_core::autodiff::Checkpoint;
use kar_core::dataeval::{align_dataset, evaluate, load_dataset, tokenize, AlignedExample};
use kar_core::enrich::{
    connection_stats, read_enriched, witness_chain, write_enriched, ConnectionTable, EnrichConfig, EnrichedHeader,
    Enricher, HopCount,
};
use kar_core::lexdb::LexicalDatabase;
use kar_core::model::{CharVocab, KarModel, ModelConfig, WordSource, WordVectors};
use kar_core::train::{prepare_training, TrainConfig, Trainer};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;

pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const LAST_CHECKPOINT: &str = "last.ckpt";
pub const TRAIN_LOG: &str = "train.log";

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_line(out: &mut impl Write, path: &Path, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::io(path, e))
}

fn kappa(config: &RunConfig) -> HopCount {
    HopCount(config.uint("kappa").min(u64::from(u32::MAX)) as u32)
}

fn load_lexicon(config: &RunConfig) -> Result<LexicalDatabase, CliError> {
    config.require(&["lexicon"])?;
    let path = config.path("lexicon").expect("required");
    let db = LexicalDatabase::load(open(&path)?).map_err(|e| CliError::from(e).in_file(&path))?;
    log::info!("lexicon {}: {} synsets, fingerprint {}", path.display(), db.len(), db.fingerprint());
    Ok(db)
}

fn load_data(path: &Path) -> Result<Vec<AlignedExample>, CliError> {
    let raw = load_dataset(open(path)?).map_err(|e| CliError::from(e).in_file(path))?;
    Ok(align_dataset(raw))
}

fn enricher<'db>(db: &'db LexicalDatabase, config: &RunConfig) -> Enricher<'db> {
    Enricher::new(
        db,
        EnrichConfig {
            threads: config.usize("threads"),
            ..EnrichConfig::default()
        },
    )
}

/// Reads an enriched file and checks its header against the expected hop
/// count and lexicon fingerprint.
fn load_tables(
    path: &Path,
    kappa: HopCount,
    fingerprint: &str,
) -> Result<HashMap<String, ConnectionTable>, CliError> {
    let (header, examples) = read_enriched(open(path)?).map_err(|e| CliError::from(e).in_file(path))?;
    if header.kappa != kappa {
        return Err(CliError::Consistency(format!(
            "{} was enriched with kappa {}, the run uses kappa {}",
            path.display(),
            header.kappa.0,
            kappa.0
        )));
    }
    if header.lexicon != fingerprint {
        return Err(CliError::Consistency(format!(
            "{} was enriched with lexicon {}, the configured lexicon is {fingerprint}",
            path.display(),
            header.lexicon
        )));
    }
    Ok(examples.into_iter().map(|e| (e.id, e.table)).collect())
}

/// Fails if any example lacks a connection table.
fn check_coverage(
    data: &[AlignedExample],
    tables: &HashMap<String, ConnectionTable>,
    data_path: &Path,
) -> Result<(), CliError> {
    if let Some(ex) = data.iter().find(|e| !tables.contains_key(e.id())) {
        return Err(CliError::Consistency(format!(
            "example `{}` of {} has no entry in its enriched file",
            ex.id(),
            data_path.display()
        )));
    }
    Ok(())
}

fn vocabulary<'a>(sets: impl IntoIterator<Item = &'a [AlignedExample]>) -> HashSet<String> {
    let mut words = HashSet::new();
    for set in sets {
        for ex in set {
            words.extend(ex.passage_words().into_iter().map(str::to_owned));
            words.extend(ex.question_words().into_iter().map(str::to_owned));
        }
    }
    words
}

fn load_vectors(path: Option<&Path>, dim: usize, keep: &HashSet<String>) -> Result<WordVectors, CliError> {
    let Some(path) = path else {
        log::info!("no word_vectors configured; using hashed {dim}-d vectors");
        return Ok(WordVectors::hashed(dim));
    };
    let vectors = WordVectors::load(open(path)?, dim, &path.to_string_lossy(), Some(keep))
        .map_err(|e| CliError::from(e).in_file(path))?;
    log::info!("word vectors {}: {} of {} needed words found", path.display(), vectors.len(), keep.len());
    Ok(vectors)
}

fn enrich_file(
    enricher: &Enricher,
    input: &Path,
    kappa: HopCount,
) -> Result<Vec<kar_core::enrich::EnrichedExample>, CliError> {
    let data = load_data(input)?;
    Ok(enricher.enrich_dataset(&data, kappa)?)
}

pub fn enrich(config: &RunConfig, input: &Path, output: &Path) -> Result<(), CliError> {
    let db = load_lexicon(config)?;
    let kappa = kappa(config);
    let enriched = enrich_file(&enricher(&db, config), input, kappa)?;
    let header = EnrichedHeader::new(kappa, db.fingerprint(), enriched.len());
    write_enriched(create(output)?, &header, &enriched).map_err(|e| CliError::from(e).in_file(output))?;
    let words: usize = enriched.iter().map(|e| e.table.n() + e.table.m()).sum();
    let connections: usize = enriched.iter().map(|e| e.table.total_connections()).sum();
    println!("examples: {}", enriched.len());
    println!("kappa: {}", kappa.0);
    println!("words: {words}");
    println!("connections: {connections}");
    match connection_stats(&enriched) {
        Ok(avg) => println!("connections per word: {avg:.4}"),
        Err(_) => println!("connections per word: undefined (no words)"),
    }
    Ok(())
}

pub fn stats(config: &RunConfig, input: &Path, max_kappa: u32) -> Result<(), CliError> {
    let db = load_lexicon(config)?;
    let data = load_data(input)?;
    let enricher = enricher(&db, config);
    println!("kappa\tconnections_per_word");
    for k in 0..=max_kappa {
        let enriched = enricher.enrich_dataset(&data, HopCount(k))?;
        println!("{k}\t{:.4}", connection_stats(&enriched)?);
    }
    Ok(())
}

pub fn connections(config: &RunConfig, word: &str, passage: &str) -> Result<(), CliError> {
    let db = load_lexicon(config)?;
    let kappa = kappa(config);
    let word = word.trim().to_lowercase();
    if word.is_empty() {
        return Err(CliError::Config("the word to look up is empty".into()));
    }
    let mut found = 0;
    for (i, token) in tokenize(passage).iter().enumerate() {
        if let Some(chain) = witness_chain(&db, &word, &token.normalized, kappa) {
            println!("{}\t{}\t{} hops\t{chain}", i + 1, token.surface, chain.len());
            found += 1;
        }
    }
    println!("`{word}` connects to {found} passage position(s) at kappa {}", kappa.0);
    Ok(())
}

fn model_config(config: &RunConfig) -> ModelConfig {
    ModelConfig {
        d: config.usize("dim"),
        word_dim: config.usize("word_dim"),
        char_dim: config.usize("char_dim"),
        char_width: config.usize("char_width"),
        char_channels: config.usize("char_channels"),
        word_len: config.usize("word_len"),
        dropout: config.float("dropout"),
        kappa: kappa(config),
    }
}

fn train_config(config: &RunConfig) -> TrainConfig {
    TrainConfig {
        epochs: config.usize("epochs"),
        batch_size: config.usize("batch_size"),
        learning_rate: config.float("learning_rate"),
        ema_decay: config.float("ema_decay"),
        seed: config.uint("seed"),
        threads: config.usize("threads"),
        ..TrainConfig::default()
    }
}

fn save(checkpoint: &Checkpoint, path: &Path) -> Result<(), CliError> {
    let mut out = create(path)?;
    checkpoint.save(&mut out).map_err(|e| CliError::from(e).in_file(path))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn train(config: &RunConfig) -> Result<(), CliError> {
    config.require(&["lexicon", "train_data", "train_enriched", "dev_data", "dev_enriched", "checkpoint_dir"])?;
    let path = |k: &str| config.path(k).expect("required");
    let model_config = model_config(config);
    let train_config = train_config(config);
    model_config.validate()?;
    train_config.validate()?;

    let db = load_lexicon(config)?;
    let kappa = kappa(config);
    let train_data = load_data(&path("train_data"))?;
    let dev_data = load_data(&path("dev_data"))?;
    let train_tables = load_tables(&path("train_enriched"), kappa, db.fingerprint())?;
    let dev_tables = load_tables(&path("dev_enriched"), kappa, db.fingerprint())?;
    check_coverage(&train_data, &train_tables, &path("train_data"))?;
    check_coverage(&dev_data, &dev_tables, &path("dev_data"))?;
    drop(db);

    let dir = path("checkpoint_dir");
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let chars = CharVocab::from_words(
        train_data
            .iter()
            .flat_map(|e| e.passage_words().into_iter().chain(e.question_words())),
    );
    let words = load_vectors(
        config.path("word_vectors").as_deref(),
        model_config.word_dim,
        &vocabulary([train_data.as_slice(), dev_data.as_slice()]),
    )?;
    let model = KarModel::new(model_config, chars, words, train_config.seed)?;
    let (prepared, skipped) = prepare_training(&model, &train_data, &train_tables)?;
    if prepared.is_empty() {
        return Err(CliError::Other("no training example has an alignable answer".into()));
    }
    log::info!("training on {} examples ({} skipped)", prepared.len(), skipped.len());

    let log_path = dir.join(TRAIN_LOG);
    let mut log_file = create(&log_path)?;
    let mut trainer = Trainer::new(model, train_config)?;
    let mut best: Option<(f64, f64, usize)> = None;
    for _ in 0..trainer.config.epochs {
        let stats = trainer.train_epoch(&prepared)?;
        let dev = trainer.evaluate(&dev_data, &dev_tables)?;
        let line = format!(
            "epoch {} loss {:.6} dev_em {:.2} dev_f1 {:.2}",
            stats.epoch, stats.loss, dev.em, dev.f1
        );
        println!("{line}");
        write_line(&mut log_file, &log_path, &line)?;
        save(&trainer.checkpoint(), &dir.join(LAST_CHECKPOINT))?;
        if best.is_none_or(|(f1, em, _)| (dev.f1, dev.em) > (f1, em)) {
            best = Some((dev.f1, dev.em, stats.epoch));
            save(&trainer.averaged_model().to_checkpoint(None, None), &dir.join(BEST_CHECKPOINT))?;
        }
    }
    log_file.flush().map_err(|e| CliError::io(&log_path, e))?;
    if let Some((f1, em, epoch)) = best {
        println!("best dev EM {em:.2} F1 {f1:.2} at epoch {epoch}");
    }
    Ok(())
}

pub struct EvalPaths {
    pub checkpoint: Option<PathBuf>,
    pub data: PathBuf,
    pub enriched: PathBuf,
    pub predictions: PathBuf,
    pub report: Option<PathBuf>,
}

pub fn eval(config: &RunConfig, paths: &EvalPaths) -> Result<(), CliError> {
    let checkpoint_path = match &paths.checkpoint {
        Some(p) => p.clone(),
        None => {
            config.require(&["checkpoint_dir"])?;
            config.path("checkpoint_dir").expect("required").join(BEST_CHECKPOINT)
        }
    };
    let checkpoint = Checkpoint::load(open(&checkpoint_path)?).map_err(|e| CliError::from(e).in_file(&checkpoint_path))?;
    let meta = KarModel::meta_of(&checkpoint).map_err(|e| CliError::from(e).in_file(&checkpoint_path))?;
    if config.is_set("dim") && config.usize("dim") != meta.config.d {
        return Err(CliError::Checkpoint(format!(
            "{} holds a dim {} model, the configuration asks for dim {}",
            checkpoint_path.display(),
            meta.config.d,
            config.usize("dim")
        )));
    }
    if config.is_set("kappa") && kappa(config) != meta.config.kappa {
        return Err(CliError::Consistency(format!(
            "{} was trained with kappa {}, the configuration asks for kappa {}",
            checkpoint_path.display(),
            meta.config.kappa.0,
            config.uint("kappa")
        )));
    }

    let db = load_lexicon(config)?;
    let data = load_data(&paths.data)?;
    let tables = load_tables(&paths.enriched, meta.config.kappa, db.fingerprint())?;
    check_coverage(&data, &tables, &paths.data)?;
    drop(db);

    let keep = vocabulary([data.as_slice()]);
    let words = match &meta.words {
        WordSource::Hashed => WordVectors::hashed(meta.config.word_dim),
        WordSource::File { path } => {
            let path = config.path("word_vectors").unwrap_or_else(|| PathBuf::from(path));
            load_vectors(Some(&path), meta.config.word_dim, &keep)?
        }
    };
    let model = KarModel::from_checkpoint(&checkpoint, words).map_err(|e| CliError::from(e).in_file(&checkpoint_path))?;
    let result = evaluate(&model, &data, &tables)?;

    let mut out = create(&paths.predictions)?;
    for s in &result.examples {
        let record = json!({
            "id": s.id,
            "text": s.prediction,
            "a_s": s.a_s,
            "a_e": s.a_e,
            "confidence": s.confidence,
        });
        write_line(&mut out, &paths.predictions, &record.to_string())?;
    }
    out.flush().map_err(|e| CliError::io(&paths.predictions, e))?;

    let summary = json!({
        "dataset": paths.data.display().to_string(),
        "checkpoint": checkpoint_path.display().to_string(),
        "examples": result.examples.len(),
        "em": result.em,
        "f1": result.f1,
    });
    println!("{summary}");
    if let Some(report) = &paths.report {
        let full = json!({ "summary": summary, "examples": result.examples });
        let mut out = create(report)?;
        let text = serde_json::to_string_pretty(&full).map_err(|e| CliError::Other(e.to_string()))?;
        write_line(&mut out, report, &text)?;
        out.flush().map_err(|e| CliError::io(report, e))?;
    }
    Ok(())
}

