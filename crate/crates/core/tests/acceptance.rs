//! Acceptance criteria 1 to 8. Each test prints one `PASS` or `FAIL` line
//! with the measured values; tolerances are the constants below.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use kar_core::autodiff::{Mode, ParamId, Tensor};
use kar_core::dataeval::{em_f1, evaluate, AlignedExample};
use kar_core::enrich::{connection_stats, extended_synsets, ConnectionTable, EnrichConfig, Enricher, HopCount};
use kar_core::lexdb::{LexicalDatabase, RelationType, SynsetId};
use kar_core::model::{CharVocab, KarModel, ModelConfig, WordVectors};
use kar_core::train::{prepare_training, TrainConfig, Trainer};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_LEXICONS: usize = 50;
const ORACLE_MAX_SYNSETS: usize = 200;
const ORACLE_MAX_EDGES: usize = 5;
const ORACLE_MAX_KAPPA: u32 = 5;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);

const FULL_STAT_RANGE: (f64, f64) = (1.5, 3.0);

const GRAD_TOLERANCE: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-5;
const GRAD_SEEDS: u64 = 5;
const GRAD_BUDGET: Duration = Duration::from_secs(120);

const OVERFIT_EPOCHS: usize = 300;
const OVERFIT_BUDGET: Duration = Duration::from_secs(300);

const SPAN_PASSES: usize = 1000;
const PROB_TOLERANCE: f64 = 1e-9;

const DEGENERATE_EPOCHS: usize = 50;
const DEGENERATE_REDUCTION: f64 = 0.5;
/// With 16 examples a batch of 16 is one update per epoch; four examples
/// per batch give the 50-epoch budget 200 updates.
const DEGENERATE_BATCH: usize = 4;

const METRIC_PAIRS: usize = 1000;

/// Criteria measure wall-clock time, so they run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(criterion: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {criterion} [{title}]: {verdict}: {detail}").unwrap();
}

fn report_unavailable(criterion: u32, title: &str, detail: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {criterion} [{title}]: UNAVAILABLE: {detail}").unwrap();
}

// ---------------------------------------------------------------- criterion 1

fn random_lexicon(rng: &mut ChaCha8Rng) -> (LexicalDatabase, Vec<String>) {
    let synsets = rng.gen_range(1..=ORACLE_MAX_SYNSETS);
    let vocab: Vec<String> = (0..rng.gen_range(5..=synsets.max(5))).map(|i| format!("w{i}")).collect();
    let mut text = String::new();
    for s in 0..synsets {
        let lemmas: BTreeSet<&str> = (0..rng.gen_range(1..=3))
            .map(|_| vocab.choose(rng).unwrap().as_str())
            .collect();
        text.push_str(&format!("S s{s}.n.01 {}\n", lemmas.into_iter().collect::<Vec<_>>().join(" ")));
    }
    for s in 0..synsets {
        for _ in 0..rng.gen_range(0..=ORACLE_MAX_EDGES) {
            let rel = RelationType::ALL.choose(rng).unwrap();
            let target = rng.gen_range(0..synsets);
            text.push_str(&format!("R s{s}.n.01 {} s{target}.n.01\n", rel.name()));
        }
    }
    (LexicalDatabase::from_text(&text).unwrap(), vocab)
}

/// Every synset at the end of some relation chain of length at most
/// `kappa`, found by enumerating the chains themselves.
fn enumerate_chains(db: &LexicalDatabase, word: &str, kappa: u32) -> BTreeSet<SynsetId> {
    fn walk(db: &LexicalDatabase, at: &SynsetId, left: u32, out: &mut BTreeSet<SynsetId>) {
        out.insert(at.clone());
        if left == 0 {
            return;
        }
        let synset = db.synset(at).unwrap();
        for targets in synset.relations.values() {
            for t in targets {
                walk(db, t, left - 1, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for s in db.synsets_of(word) {
        walk(db, &s, kappa, &mut out);
    }
    out
}

#[test]
fn criterion_1_enrichment_matches_chain_enumeration() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checks, mut mismatches) = (0usize, 0usize);
    for _ in 0..ORACLE_LEXICONS {
        let (db, vocab) = random_lexicon(&mut rng);
        for word in vocab.iter().map(String::as_str).chain(["absent"]) {
            for kappa in 0..=ORACLE_MAX_KAPPA {
                let fast = extended_synsets(&db, word, HopCount(kappa)).unwrap();
                checks += 1;
                if fast != enumerate_chains(&db, word, kappa) {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < ORACLE_BUDGET;
    report(
        1,
        "enrichment oracle",
        pass,
        &format!("{checks} word/kappa checks over {ORACLE_LEXICONS} lexicons, {mismatches} mismatches, {elapsed:.2?} (budget {ORACLE_BUDGET:?})"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 2

fn monotone_on(db: &LexicalDatabase, data: &[AlignedExample]) -> (Vec<f64>, bool) {
    let enricher = Enricher::new(db, EnrichConfig::default());
    let mut stats = Vec::new();
    for kappa in 0..=5 {
        let enriched = enricher.enrich_dataset(data, HopCount(kappa)).unwrap();
        stats.push(connection_stats(&enriched).unwrap());
    }
    let mut subsets = true;
    for ex in data {
        for w in ex.passage_words().into_iter().chain(ex.question_words()) {
            for kappa in 0..5 {
                let a = enricher.extended_synsets(w, HopCount(kappa)).unwrap();
                let b = enricher.extended_synsets(w, HopCount(kappa + 1)).unwrap();
                subsets &= a.is_subset(&b);
            }
        }
    }
    (stats, subsets)
}

#[test]
fn criterion_2_connections_grow_with_kappa() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let db = common::lexicon("toy_lexicon.txt");
    let mut all_pass = true;
    let mut details = Vec::new();
    for name in ["squad_train16.json", "addsent_fixture.json"] {
        let data = common::dataset(name);
        let (stats, subsets) = monotone_on(&db, &data);
        let monotone = stats.windows(2).all(|w| w[0] <= w[1]);
        all_pass &= monotone && subsets;
        let shown: Vec<String> = stats.iter().map(|s| format!("{s:.3}")).collect();
        details.push(format!("{name}: per-word [{}] subsets {subsets}", shown.join(", ")));
    }
    report(2, "kappa monotonicity", all_pass, &details.join("; "));
    assert!(all_pass);

    match (std::env::var("KAR_WORDNET_LEXICON"), std::env::var("KAR_SQUAD_DEV")) {
        (Ok(lex), Ok(dev)) => {
            let db = LexicalDatabase::from_text(&std::fs::read_to_string(lex).unwrap()).unwrap();
            let file = std::fs::File::open(dev).unwrap();
            let data = kar_core::dataeval::align_dataset(
                kar_core::dataeval::load_dataset(std::io::BufReader::new(file)).unwrap(),
            );
            let enricher = Enricher::new(&db, EnrichConfig::default());
            let stat = connection_stats(&enricher.enrich_dataset(&data, HopCount(3)).unwrap()).unwrap();
            let pass = (FULL_STAT_RANGE.0..=FULL_STAT_RANGE.1).contains(&stat);
            report(
                2,
                "full lexicon kappa=3 statistic",
                pass,
                &format!("{stat:.3} connections per word, accepted range {FULL_STAT_RANGE:?}"),
            );
            assert!(pass);
        }
        _ => report_unavailable(
            2,
            "full lexicon kappa=3 statistic",
            "set KAR_WORDNET_LEXICON and KAR_SQUAD_DEV to run it",
        ),
    }
}

// ---------------------------------------------------------------- criterion 3

const GRAD_WORDS: [&str; 12] = [
    "the", "parrot", "bird", "feather", "keratin", "has", "a", "what", "is", "made", "of", "brooklyn",
];

fn grad_config() -> ModelConfig {
    ModelConfig {
        d: 8,
        word_dim: 4,
        char_dim: 3,
        char_width: 2,
        char_channels: 4,
        word_len: 5,
        dropout: 0.0,
        kappa: HopCount(3),
    }
}

fn random_table(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ConnectionTable {
    let pick = |rng: &mut ChaCha8Rng, exclude: Option<usize>| -> Vec<u32> {
        let mut set: Vec<u32> = (1..=n as u32)
            .filter(|&p| Some(p as usize) != exclude && rng.gen_bool(0.4))
            .collect();
        set.sort_unstable();
        set
    };
    let passage = (1..=n).map(|i| pick(rng, Some(i))).collect();
    let question = (0..m).map(|_| pick(rng, None)).collect();
    ConnectionTable {
        passage,
        question,
        kappa: HopCount(3),
    }
}

/// Worst norm-wise relative error between backpropagated and central
/// difference gradients over all parameter tensors. Parameters are spread
/// out first so that no tensor sits in a region where its gradient vanishes
/// below finite-difference resolution.
fn gradient_check(seed: u64, populated: bool) -> (String, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=4);
    let passage: Vec<&str> = (0..n).map(|_| *GRAD_WORDS.choose(&mut rng).unwrap()).collect();
    let question: Vec<&str> = (0..m).map(|_| *GRAD_WORDS.choose(&mut rng).unwrap()).collect();
    let table = if populated {
        let mut t = random_table(&mut rng, n, m);
        if t.is_all_empty() {
            t.question[0] = vec![1];
        }
        t
    } else {
        ConnectionTable::empty(n, m, HopCount(3))
    };
    let a_s = rng.gen_range(1..=n);
    let gold = (a_s, rng.gen_range(a_s..=n));

    let chars = CharVocab::from_words(GRAD_WORDS);
    let mut model = KarModel::new(grad_config(), chars, WordVectors::hashed(4), seed).unwrap();
    let ids: Vec<ParamId> = model.params.ids().collect();
    for &id in &ids {
        let t = model.params.get_mut(id);
        *t = t.map(|x| 3.0 * x);
    }
    let input = model.prepare_words(&passage, &question).unwrap();
    let step = model
        .train_step(&input, &table, gold, Mode::Eval, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();

    let mut worst = (String::new(), 0.0);
    let mut probe = model.clone();
    for &id in &ids {
        let value = model.params.get(id).clone();
        let analytic = step.grads[id.index()]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(value.rows(), value.cols()));
        let mut numeric = Tensor::zeros(value.rows(), value.cols());
        for k in 0..value.len() {
            probe.params.get_mut(id).data_mut()[k] = value.data()[k] + GRAD_STEP;
            let up = probe.loss(&input, &table, gold).unwrap();
            probe.params.get_mut(id).data_mut()[k] = value.data()[k] - GRAD_STEP;
            let down = probe.loss(&input, &table, gold).unwrap();
            probe.params.get_mut(id).data_mut()[k] = value.data()[k];
            numeric.data_mut()[k] = (up - down) / (2.0 * GRAD_STEP);
        }
        let mut diff = numeric.clone();
        diff.scale_assign(-1.0);
        diff.add_assign(&analytic);
        let scale = analytic.norm().max(numeric.norm());
        let rel = if scale == 0.0 { 0.0 } else { diff.norm() / scale };
        if rel >= worst.1 {
            worst = (model.params.name(id).to_owned(), rel);
        }
    }
    (worst.0, worst.1, ids.len())
}

#[test]
fn criterion_3_end_to_end_gradients() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut worst = (String::new(), 0.0f64);
    let mut tensors = 0;
    let mut runs = 0;
    for seed in 0..GRAD_SEEDS {
        for populated in [false, true] {
            let (name, err, count) = gradient_check(seed, populated);
            tensors = count;
            runs += 1;
            if err >= worst.1 {
                worst = (format!("{name} (seed {seed}, populated {populated})"), err);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst.1 < GRAD_TOLERANCE && elapsed < GRAD_BUDGET;
    report(
        3,
        "gradient integrity",
        pass,
        &format!(
            "{runs} runs x {tensors} tensors, worst relative error {:.2e} at {} (tolerance {GRAD_TOLERANCE:e}), {elapsed:.2?} (budget {GRAD_BUDGET:?})",
            worst.1, worst.0
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 4

fn overfit_config() -> (ModelConfig, TrainConfig) {
    let model = ModelConfig {
        d: 64,
        dropout: 0.0,
        kappa: HopCount(3),
        ..ModelConfig::default()
    };
    let train = TrainConfig {
        epochs: OVERFIT_EPOCHS,
        batch_size: 16,
        seed: 1,
        ..TrainConfig::default()
    };
    (model, train)
}

#[test]
fn criterion_4_overfits_sixteen_examples() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let data = common::dataset("squad_train16.json");
    assert_eq!(data.len(), 16);
    let db = common::lexicon("toy_lexicon.txt");
    let tables = common::tables(&db, &data, 3);
    let (model_config, train_config) = overfit_config();
    let model = common::model_for(&data, model_config, train_config.seed);
    let (prepared, skipped) = prepare_training(&model, &data, &tables).unwrap();
    assert!(skipped.is_empty());
    let mut trainer = Trainer::new(model, train_config).unwrap();
    let mut reached = None;
    let mut last = (0.0, 0.0);
    for epoch in 1..=OVERFIT_EPOCHS {
        trainer.train_epoch(&prepared).unwrap();
        let result = trainer.evaluate(&data, &tables).unwrap();
        last = (result.em, result.f1);
        if result.em == 100.0 && result.f1 == 100.0 {
            reached = Some(epoch);
            break;
        }
    }
    let elapsed = start.elapsed();
    let pass = reached.is_some() && elapsed < OVERFIT_BUDGET;
    let when = reached.map_or("never".to_owned(), |e| format!("at epoch {e}"));
    report(
        4,
        "overfit",
        pass,
        &format!(
            "EM/F1 100 {when} (limit {OVERFIT_EPOCHS}), last EM {:.1} F1 {:.1}, {elapsed:.2?} (budget {OVERFIT_BUDGET:?})",
            last.0, last.1
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_5_span_structure() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chars = CharVocab::from_words(GRAD_WORDS);
    let mut violations = Vec::new();
    let mut worst_sum: f64 = 0.0;
    for pass in 0..SPAN_PASSES {
        let config = ModelConfig {
            dropout: 0.3,
            ..grad_config()
        };
        let mut model = KarModel::new(config, chars.clone(), WordVectors::hashed(4), pass as u64).unwrap();
        let spread = rng.gen_range(0.5..4.0);
        let ids: Vec<ParamId> = model.params.ids().collect();
        for id in ids {
            let t = model.params.get_mut(id);
            *t = t.map(|x| spread * x);
        }
        let n = rng.gen_range(1..=15);
        let m = rng.gen_range(1..=6);
        let passage: Vec<&str> = (0..n).map(|_| *GRAD_WORDS.choose(&mut rng).unwrap()).collect();
        let question: Vec<&str> = (0..m).map(|_| *GRAD_WORDS.choose(&mut rng).unwrap()).collect();
        let table = random_table(&mut rng, n, m);
        let input = model.prepare_words(&passage, &question).unwrap();
        let p = if pass % 2 == 0 {
            model.predict(&input, &table).unwrap()
        } else {
            let a_s = rng.gen_range(1..=n);
            let gold = (a_s, rng.gen_range(a_s..=n));
            model.train_step(&input, &table, gold, Mode::Train, &mut rng).unwrap().prediction
        };
        let s: f64 = p.o_s.iter().sum();
        let e: f64 = p.o_e.iter().sum();
        let total = p.o.sum();
        worst_sum = worst_sum.max((s - 1.0).abs()).max((e - 1.0).abs());
        let lower_zero = (0..n).all(|i| (0..i).all(|j| p.o.get(i, j) == 0.0));
        let ok = p.a_s <= p.a_e
            && p.a_s >= 1
            && p.a_e <= n
            && p.o_s.iter().chain(&p.o_e).all(|&x| x >= 0.0)
            && (s - 1.0).abs() <= PROB_TOLERANCE
            && (e - 1.0).abs() <= PROB_TOLERANCE
            && lower_zero
            && total <= 1.0 + PROB_TOLERANCE;
        if !ok {
            violations.push(pass);
        }
    }
    let pass = violations.is_empty();
    report(
        5,
        "span structure",
        pass,
        &format!(
            "{SPAN_PASSES} forward passes, {} violations, worst |sum - 1| {worst_sum:.1e} (tolerance {PROB_TOLERANCE:e})",
            violations.len()
        ),
    );
    assert!(pass, "violating passes: {violations:?}");
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_degenerate_knowledge() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let data = common::dataset("squad_train16.json");
    let db = common::lexicon("isolated_lexicon.txt");
    let tables = common::tables(&db, &data, 0);
    let all_empty = tables.values().all(ConnectionTable::is_all_empty);

    let (mut model_config, mut train_config) = overfit_config();
    model_config.kappa = HopCount(0);
    train_config.epochs = DEGENERATE_EPOCHS;
    train_config.batch_size = DEGENERATE_BATCH;
    let model = common::model_for(&data, model_config, train_config.seed);

    let mut zero_matching = true;
    for ex in &data {
        let enc = model.encode(&model.prepare(ex).unwrap(), &tables[ex.id()]).unwrap();
        zero_matching &= [&enc.c_plus_p, &enc.c_plus_q, &enc.g_plus]
            .iter()
            .all(|t| t.data().iter().all(|&x| x == 0.0));
    }

    let (prepared, _) = prepare_training(&model, &data, &tables).unwrap();
    let mut trainer = Trainer::new(model, train_config).unwrap();
    let before = Trainer::mean_loss(&trainer.model, &prepared).unwrap();
    for _ in 0..DEGENERATE_EPOCHS {
        trainer.train_epoch(&prepared).unwrap();
    }
    let after = Trainer::mean_loss(&trainer.model, &prepared).unwrap();
    let reduction = 1.0 - after / before;
    let eval = trainer.evaluate(&data, &tables);
    let eval_ok = eval.is_ok();
    let pass = all_empty && zero_matching && reduction >= DEGENERATE_REDUCTION && eval_ok;
    report(
        6,
        "degenerate knowledge",
        pass,
        &format!(
            "tables empty {all_empty}, matching vectors zero {zero_matching}, batch {DEGENERATE_BATCH}, loss {before:.3} -> {after:.3} ({:.1}% reduction, need {:.0}%), evaluation ok {eval_ok}",
            100.0 * reduction,
            100.0 * DEGENERATE_REDUCTION
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_metric_fidelity() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cases: [(&str, &[&str], f64, f64); 20] = [
        ("The lesson plan", &["lesson plan"], 1.0, 1.0),
        ("lesson", &["lesson plan"], 0.0, 2.0 / 3.0),
        ("brooklyn", &["Brooklyn"], 1.0, 1.0),
        ("a borough", &["borough"], 1.0, 1.0),
        ("an apple", &["the apple"], 1.0, 1.0),
        ("Brooklyn.", &["Brooklyn"], 1.0, 1.0),
        ("New York City!", &["new york city"], 1.0, 1.0),
        ("1,883", &["1883"], 1.0, 1.0),
        ("  warm   forests ", &["warm forests"], 1.0, 1.0),
        ("seeds", &["seeds and fruit"], 0.0, 0.5),
        ("seeds and fruit", &["fruit"], 0.0, 0.5),
        ("keratin", &["feather"], 0.0, 0.0),
        ("feather", &["keratin", "feather"], 1.0, 1.0),
        ("east river", &["the East River", "river"], 1.0, 1.0),
        ("the river east", &["East River"], 0.0, 1.0),
        ("honey honey", &["honey"], 0.0, 2.0 / 3.0),
        ("a", &["the"], 1.0, 1.0),
        ("", &["lesson plan"], 0.0, 0.0),
        ("single queen", &["a single queen", "queen"], 1.0, 1.0),
        ("inside hive", &["inside the hive", "the hive"], 1.0, 1.0),
    ];
    let mut failures = Vec::new();
    for (i, (pred, golds, em, f1)) in cases.iter().enumerate() {
        let golds: Vec<&str> = golds.to_vec();
        let (got_em, got_f1) = em_f1(pred, &golds).unwrap();
        if got_em != *em || (got_f1 - f1).abs() > 1e-12 {
            failures.push(format!("case {i} {pred:?}: got ({got_em}, {got_f1})"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words = ["the", "a", "lesson", "plan", "Plan.", "bird", "of", "keratin", "an", "1883", ",", "river"];
    let phrase = |rng: &mut ChaCha8Rng| -> String {
        (0..rng.gen_range(0..5))
            .map(|_| *words.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut order_violations = 0;
    let (mut em_total, mut f1_total) = (0.0, 0.0);
    for _ in 0..METRIC_PAIRS {
        let pred = phrase(&mut rng);
        let golds: Vec<String> = (0..rng.gen_range(1..4)).map(|_| phrase(&mut rng)).collect();
        let golds: Vec<&str> = golds.iter().map(String::as_str).collect();
        let (em, f1) = em_f1(&pred, &golds).unwrap();
        em_total += em;
        f1_total += f1;
        if em > f1 || !(0.0..=1.0).contains(&f1) {
            order_violations += 1;
        }
    }
    let pass = failures.is_empty() && order_violations == 0 && em_total <= f1_total;
    report(
        7,
        "metric fidelity",
        pass,
        &format!(
            "{} of {} table cases wrong; {order_violations} EM > F1 pairs in {METRIC_PAIRS}; aggregate EM {:.1} <= F1 {:.1}",
            failures.len(),
            cases.len(),
            100.0 * em_total / METRIC_PAIRS as f64,
            100.0 * f1_total / METRIC_PAIRS as f64
        ),
    );
    assert!(pass, "{failures:?}");
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_8_full_scale_documented_not_gated() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    let has_section = readme.contains("## Full-scale runs");
    // Prose may be wrapped anywhere.
    let prose = readme.split_whitespace().collect::<Vec<_>>().join(" ");
    let states_not_gated = prose.contains("not part of the test suite");
    let has_recipe = ["kar enrich", "kar train", "kar eval", "dim = 600"]
        .iter()
        .all(|s| readme.contains(s));
    let pass = has_section && states_not_gated && has_recipe;
    report(
        8,
        "full-scale results documented, not gated",
        pass,
        &format!("section {has_section}, not-gated statement {states_not_gated}, recipe commands {has_recipe}"),
    );
    assert!(pass);
}

#[test]
fn evaluation_handles_adversarial_fixture() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let data = common::dataset("addsent_fixture.json");
    let db = common::lexicon("toy_lexicon.txt");
    let tables: HashMap<String, ConnectionTable> = common::tables(&db, &data, 3);
    let model = common::model_for(&data, grad_config(), 3);
    let result = evaluate(&model, &data, &tables).unwrap();
    assert_eq!(result.examples.len(), 3);
    assert!(result.em <= result.f1);
}
