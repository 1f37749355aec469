//! Inter-word semantic connections.
//!
//! A word `w1` is connected to `w2` when the synsets reachable from `w1` by
//! relation chains of at most κ hops intersect the synsets of `w2`. For every
//! passage and question word we record the 1-based positions of the passage
//! words it is connected to.

mod file;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataeval::AlignedExample;
use crate::lexdb::{LexicalDatabase, RelationType, SynsetId, SynsetIdx};

pub use file::{read_enriched, write_enriched, EnrichedHeader, FileError, FORMAT_NAME, FORMAT_VERSION};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnrichError {
    #[error("hop count {kappa} exceeds the configured ceiling {ceiling}")]
    BoundExceeded { kappa: u32, ceiling: u32 },
    #[error("connection statistics are undefined for an empty dataset")]
    EmptyStatistic,
    #[error("connection table has {found} {side} entries, expected {expected}")]
    LengthMismatch {
        side: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("connection table references passage position {position}, outside 1..={n}")]
    CorruptTable { position: u32, n: usize },
}

/// Maximum number of relation hops allowed in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HopCount(pub u32);

impl Default for HopCount {
    fn default() -> Self {
        HopCount(3)
    }
}

impl std::fmt::Display for HopCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-word passage position sets E_w for one passage-question pair.
/// Positions are 1-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionTable {
    pub passage: Vec<Vec<u32>>,
    pub question: Vec<Vec<u32>>,
    pub kappa: HopCount,
}

impl ConnectionTable {
    pub fn empty(n: usize, m: usize, kappa: HopCount) -> Self {
        ConnectionTable {
            passage: vec![Vec::new(); n],
            question: vec![Vec::new(); m],
            kappa,
        }
    }

    pub fn n(&self) -> usize {
        self.passage.len()
    }

    pub fn m(&self) -> usize {
        self.question.len()
    }

    /// Checks lengths against the token counts and every position against 1..=n.
    pub fn validate(&self, n: usize, m: usize) -> Result<(), EnrichError> {
        if self.passage.len() != n {
            return Err(EnrichError::LengthMismatch {
                side: "passage",
                found: self.passage.len(),
                expected: n,
            });
        }
        if self.question.len() != m {
            return Err(EnrichError::LengthMismatch {
                side: "question",
                found: self.question.len(),
                expected: m,
            });
        }
        for &p in self.passage.iter().chain(&self.question).flatten() {
            if p == 0 || p as usize > n {
                return Err(EnrichError::CorruptTable { position: p, n });
            }
        }
        Ok(())
    }

    pub fn total_connections(&self) -> usize {
        self.passage.iter().chain(&self.question).map(Vec::len).sum()
    }

    pub fn is_all_empty(&self) -> bool {
        self.total_connections() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedExample {
    pub id: String,
    pub table: ConnectionTable,
}

#[derive(Debug, Clone)]
pub struct EnrichConfig {
    pub max_kappa: u32,
    /// Capacity of each LRU cache; 0 disables caching.
    pub cache_capacity: usize,
    pub threads: usize,
}

impl Default for EnrichConfig {
    fn default() -> Self {
        EnrichConfig {
            max_kappa: 10,
            cache_capacity: 1_000_000,
            threads: 1,
        }
    }
}

fn check_bound(kappa: HopCount, ceiling: u32) -> Result<(), EnrichError> {
    if kappa.0 > ceiling {
        return Err(EnrichError::BoundExceeded {
            kappa: kappa.0,
            ceiling,
        });
    }
    Ok(())
}

/// Breadth-first closure of `start` to depth `kappa` over all relation types.
/// Returns sorted indices.
pub fn extended_indices(db: &LexicalDatabase, start: &[SynsetIdx], kappa: u32) -> Vec<SynsetIdx> {
    let mut visited: HashSet<SynsetIdx> = start.iter().copied().collect();
    let mut frontier: Vec<SynsetIdx> = visited.iter().copied().collect();
    for _ in 0..kappa {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &s in &frontier {
            for &t in db.adjacent(s) {
                if visited.insert(t) {
                    next.push(t);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<SynsetIdx> = visited.into_iter().collect();
    out.sort_unstable();
    out
}

/// S*_w(κ): the synsets of `word` plus everything reachable within κ hops.
pub fn extended_synsets(
    db: &LexicalDatabase,
    word: &str,
    kappa: HopCount,
) -> Result<BTreeSet<SynsetId>, EnrichError> {
    check_bound(kappa, EnrichConfig::default().max_kappa)?;
    Ok(extended_indices(db, &db.sense_indices(word), kappa.0)
        .into_iter()
        .map(|i| db.id_of(i).clone())
        .collect())
}

fn sorted_intersects(a: &[SynsetIdx], b: &[SynsetIdx]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Directional connection rule: S*_{w1}(κ) ∩ S_{w2} ≠ ∅.
pub fn is_connected(db: &LexicalDatabase, w1: &str, w2: &str, kappa: HopCount) -> Result<bool, EnrichError> {
    check_bound(kappa, EnrichConfig::default().max_kappa)?;
    let target = db.sense_indices(w2);
    if target.is_empty() {
        return Ok(false);
    }
    let ext = extended_indices(db, &db.sense_indices(w1), kappa.0);
    Ok(sorted_intersects(&ext, &target))
}

/// One hop of a witness chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainHop {
    pub relation: RelationType,
    pub target: SynsetId,
}

/// A shortest relation chain from a synset of one word to a synset of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessChain {
    pub start: SynsetId,
    pub hops: Vec<ChainHop>,
}

impl WitnessChain {
    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }
}

impl std::fmt::Display for WitnessChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.start)?;
        for hop in &self.hops {
            write!(f, " --{}--> {}", hop.relation, hop.target)?;
        }
        Ok(())
    }
}

/// Finds one shortest chain (at most κ hops) linking `w1`'s synsets to
/// `w2`'s synsets. Ties go to the lowest synset index, then the first edge
/// in (relation, target) order.
pub fn witness_chain(db: &LexicalDatabase, w1: &str, w2: &str, kappa: HopCount) -> Option<WitnessChain> {
    let targets: HashSet<SynsetIdx> = db.sense_indices(w2).into_iter().collect();
    if targets.is_empty() {
        return None;
    }
    let mut parent: std::collections::HashMap<SynsetIdx, Option<(SynsetIdx, RelationType)>> =
        std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    for s in db.sense_indices(w1) {
        parent.insert(s, None);
        queue.push_back((s, 0u32));
    }
    while let Some((s, depth)) = queue.pop_front() {
        if targets.contains(&s) {
            let mut hops = Vec::new();
            let mut cur = s;
            while let Some(Some((prev, rel))) = parent.get(&cur) {
                hops.push(ChainHop {
                    relation: *rel,
                    target: db.id_of(cur).clone(),
                });
                cur = *prev;
            }
            hops.reverse();
            return Some(WitnessChain {
                start: db.id_of(cur).clone(),
                hops,
            });
        }
        if depth == kappa.0 {
            continue;
        }
        for &(rel, t) in db.edges(s) {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(t) {
                e.insert(Some((s, rel)));
                queue.push_back((t, depth + 1));
            }
        }
    }
    None
}

type ExtKey = (String, u32);
type ConnKey = (String, String, u32);

/// Cached connection extraction over one immutable database. The caches are
/// shared between worker threads.
pub struct Enricher<'db> {
    db: &'db LexicalDatabase,
    config: EnrichConfig,
    extended: Option<Mutex<LruCache<ExtKey, Arc<Vec<SynsetIdx>>>>>,
    connected: Option<Mutex<LruCache<ConnKey, bool>>>,
}

impl<'db> Enricher<'db> {
    pub fn new(db: &'db LexicalDatabase, config: EnrichConfig) -> Self {
        let cap = NonZeroUsize::new(config.cache_capacity);
        Enricher {
            db,
            extended: cap.map(|c| Mutex::new(LruCache::new(c))),
            connected: cap.map(|c| Mutex::new(LruCache::new(c))),
            config,
        }
    }

    pub fn database(&self) -> &LexicalDatabase {
        self.db
    }

    pub fn config(&self) -> &EnrichConfig {
        &self.config
    }

    fn extended(&self, word: &str, kappa: u32) -> Arc<Vec<SynsetIdx>> {
        let key = (word.to_owned(), kappa);
        if let Some(cache) = &self.extended {
            if let Some(hit) = cache.lock().unwrap().get(&key) {
                return Arc::clone(hit);
            }
        }
        let ext = Arc::new(extended_indices(self.db, &self.db.sense_indices(word), kappa));
        if let Some(cache) = &self.extended {
            cache.lock().unwrap().put(key, Arc::clone(&ext));
        }
        ext
    }

    pub fn extended_synsets(&self, word: &str, kappa: HopCount) -> Result<BTreeSet<SynsetId>, EnrichError> {
        check_bound(kappa, self.config.max_kappa)?;
        Ok(self
            .extended(word, kappa.0)
            .iter()
            .map(|&i| self.db.id_of(i).clone())
            .collect())
    }

    fn connected_unchecked(&self, w1: &str, w2: &str, kappa: u32) -> bool {
        let key = (w1.to_owned(), w2.to_owned(), kappa);
        if let Some(cache) = &self.connected {
            if let Some(&hit) = cache.lock().unwrap().get(&key) {
                return hit;
            }
        }
        let target = self.db.sense_indices(w2);
        let result = !target.is_empty() && sorted_intersects(&self.extended(w1, kappa), &target);
        if let Some(cache) = &self.connected {
            cache.lock().unwrap().put(key, result);
        }
        result
    }

    pub fn is_connected(&self, w1: &str, w2: &str, kappa: HopCount) -> Result<bool, EnrichError> {
        check_bound(kappa, self.config.max_kappa)?;
        Ok(self.connected_unchecked(w1, w2, kappa.0))
    }

    /// Computes E_w for every passage and question word. Repeated tokens
    /// share one computation.
    pub fn enrich_pair<'w>(
        &self,
        passage: &[&'w str],
        question: &[&'w str],
        kappa: HopCount,
    ) -> Result<ConnectionTable, EnrichError> {
        check_bound(kappa, self.config.max_kappa)?;
        let mut memo: std::collections::HashMap<&'w str, Vec<u32>> = std::collections::HashMap::new();
        let mut targets_of = |w: &'w str| -> Vec<u32> {
            memo.entry(w)
                .or_insert_with(|| {
                    passage
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| self.connected_unchecked(w, p, kappa.0))
                        .map(|(j, _)| j as u32 + 1)
                        .collect()
                })
                .clone()
        };
        let mut passage_sets = Vec::with_capacity(passage.len());
        for (i, w) in passage.iter().enumerate() {
            let own = i as u32 + 1;
            passage_sets.push(targets_of(w).into_iter().filter(|&p| p != own).collect());
        }
        let question_sets = question.iter().map(|&w| targets_of(w)).collect();
        Ok(ConnectionTable {
            passage: passage_sets,
            question: question_sets,
            kappa,
        })
    }

    /// Enriches every example, preserving input order. With more than one
    /// configured thread the examples are processed in parallel.
    pub fn enrich_dataset(
        &self,
        dataset: &[AlignedExample],
        kappa: HopCount,
    ) -> Result<Vec<EnrichedExample>, EnrichError> {
        check_bound(kappa, self.config.max_kappa)?;
        let one = |ex: &AlignedExample| -> Result<EnrichedExample, EnrichError> {
            Ok(EnrichedExample {
                id: ex.id().to_owned(),
                table: self.enrich_pair(&ex.passage_words(), &ex.question_words(), kappa)?,
            })
        };
        if self.config.threads <= 1 {
            return dataset.iter().map(one).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.threads)
            .build()
            .expect("thread pool");
        pool.install(|| dataset.par_iter().map(one).collect())
    }
}

/// Average |E_w| over every passage and question word of every example.
pub fn connection_stats<'a>(
    enriched: impl IntoIterator<Item = &'a EnrichedExample>,
) -> Result<f64, EnrichError> {
    let (mut connections, mut words) = (0usize, 0usize);
    for ex in enriched {
        connections += ex.table.total_connections();
        words += ex.table.n() + ex.table.m();
    }
    if words == 0 {
        return Err(EnrichError::EmptyStatistic);
    }
    Ok(connections as f64 / words as f64)
}
