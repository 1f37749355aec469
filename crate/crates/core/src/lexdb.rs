//! WordNet-style lexical database: synsets, the lemma index and the sixteen
//! directed semantic relation types.
//!
//! The on-disk format is line oriented:
//!
//! ```text
//! # comment
//! S keratin.n.01 keratin ceratin
//! R keratin.n.01 substance_holonym feather.n.01
//! L feathers feather
//! ```
//!
//! `S` declares a synset with its lemmas, `R` adds one directed edge and the
//! optional `L` lines map an inflected surface form onto a lemma. Relation
//! targets may be declared after the edge that references them; closure is
//! checked once the whole file has been read.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown relation type `{name}`")]
    UnknownRelation { line: usize, name: String },
    #[error("relation {source_id} -> {target} references an undefined synset")]
    DanglingReference { source_id: String, target: String },
    #[error("line {line}: synset `{id}` declared twice")]
    DuplicateSynset { line: usize, id: String },
    #[error("unknown synset `{0}`")]
    NotFound(String),
    #[error("i/o error reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Identifier of a synset in `lemma.pos.nn` form, e.g. `keratin.n.01`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId(String);

impl SynsetId {
    pub fn new(id: impl Into<String>) -> Self {
        SynsetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SynsetId {
    fn from(s: &str) -> Self {
        SynsetId(s.to_owned())
    }
}

/// The closed set of synset-to-synset relations exposed by the NLTK WordNet
/// interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    Hypernym,
    Hyponym,
    InstanceHypernym,
    InstanceHyponym,
    MemberHolonym,
    SubstanceHolonym,
    PartHolonym,
    MemberMeronym,
    SubstanceMeronym,
    PartMeronym,
    Attribute,
    Entailment,
    Cause,
    AlsoSee,
    VerbGroup,
    SimilarTo,
}

impl RelationType {
    pub const ALL: [RelationType; 16] = [
        RelationType::Hypernym,
        RelationType::Hyponym,
        RelationType::InstanceHypernym,
        RelationType::InstanceHyponym,
        RelationType::MemberHolonym,
        RelationType::SubstanceHolonym,
        RelationType::PartHolonym,
        RelationType::MemberMeronym,
        RelationType::SubstanceMeronym,
        RelationType::PartMeronym,
        RelationType::Attribute,
        RelationType::Entailment,
        RelationType::Cause,
        RelationType::AlsoSee,
        RelationType::VerbGroup,
        RelationType::SimilarTo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Hypernym => "hypernym",
            RelationType::Hyponym => "hyponym",
            RelationType::InstanceHypernym => "instance_hypernym",
            RelationType::InstanceHyponym => "instance_hyponym",
            RelationType::MemberHolonym => "member_holonym",
            RelationType::SubstanceHolonym => "substance_holonym",
            RelationType::PartHolonym => "part_holonym",
            RelationType::MemberMeronym => "member_meronym",
            RelationType::SubstanceMeronym => "substance_meronym",
            RelationType::PartMeronym => "part_meronym",
            RelationType::Attribute => "attribute",
            RelationType::Entailment => "entailment",
            RelationType::Cause => "cause",
            RelationType::AlsoSee => "also_see",
            RelationType::VerbGroup => "verb_group",
            RelationType::SimilarTo => "similar_to",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        RelationType::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or(())
    }
}

/// Dense index of a synset inside one [`LexicalDatabase`].
pub type SynsetIdx = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    pub lemmas: BTreeSet<String>,
    pub relations: BTreeMap<RelationType, BTreeSet<SynsetId>>,
}

/// An immutable lexical database. Synsets are stored in declaration order and
/// addressed internally by [`SynsetIdx`]; the traversal code in `enrich` works
/// on those indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexicalDatabase {
    synsets: Vec<Synset>,
    by_id: HashMap<SynsetId, SynsetIdx>,
    lemma_index: HashMap<String, Vec<SynsetIdx>>,
    lemma_map: HashMap<String, String>,
    /// Per synset, the sorted (relation, target) edge list.
    edges: Vec<Vec<(RelationType, SynsetIdx)>>,
    /// Per synset, the sorted and deduplicated union of targets over all relations.
    adjacency: Vec<Vec<SynsetIdx>>,
    fingerprint: String,
}

impl LexicalDatabase {
    /// Parses a lexicon file.
    pub fn load<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut hasher = Sha256::new();
        let mut declared: Vec<(SynsetId, BTreeSet<String>)> = Vec::new();
        let mut seen: HashMap<SynsetId, usize> = HashMap::new();
        let mut raw_edges: Vec<(SynsetId, RelationType, SynsetId)> = Vec::new();
        let mut lemma_map = HashMap::new();

        for (lineno, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parse_err = |message: &str| LexiconError::Parse {
                line: lineno,
                message: message.to_owned(),
            };
            match fields[0] {
                "S" => {
                    if fields.len() < 3 {
                        return Err(parse_err("synset line needs an id and at least one lemma"));
                    }
                    let id = SynsetId::new(fields[1]);
                    if seen.contains_key(&id) {
                        return Err(LexiconError::DuplicateSynset {
                            line: lineno,
                            id: id.0,
                        });
                    }
                    let lemmas = fields[2..].iter().map(|l| l.to_lowercase()).collect();
                    seen.insert(id.clone(), declared.len());
                    declared.push((id, lemmas));
                }
                "R" => {
                    if fields.len() != 4 {
                        return Err(parse_err("relation line must be `R <source> <relation> <target>`"));
                    }
                    let relation = fields[2].parse().map_err(|_| LexiconError::UnknownRelation {
                        line: lineno,
                        name: fields[2].to_owned(),
                    })?;
                    raw_edges.push((SynsetId::new(fields[1]), relation, SynsetId::new(fields[3])));
                }
                "L" => {
                    if fields.len() != 3 {
                        return Err(parse_err("lemma-map line must be `L <form> <lemma>`"));
                    }
                    lemma_map.insert(fields[1].to_lowercase(), fields[2].to_lowercase());
                }
                other => {
                    return Err(parse_err(&format!("unknown record type `{other}`")));
                }
            }
        }

        let mut synsets: Vec<Synset> = declared
            .into_iter()
            .map(|(id, lemmas)| Synset {
                id,
                lemmas,
                relations: BTreeMap::new(),
            })
            .collect();
        let by_id: HashMap<SynsetId, SynsetIdx> = seen
            .into_iter()
            .map(|(id, i)| (id, i as SynsetIdx))
            .collect();

        let mut edges: Vec<Vec<(RelationType, SynsetIdx)>> = vec![Vec::new(); synsets.len()];
        for (source, relation, target) in raw_edges {
            let (Some(&s), Some(&t)) = (by_id.get(&source), by_id.get(&target)) else {
                return Err(LexiconError::DanglingReference {
                    source_id: source.0,
                    target: target.0,
                });
            };
            synsets[s as usize]
                .relations
                .entry(relation)
                .or_default()
                .insert(target);
            edges[s as usize].push((relation, t));
        }
        for e in &mut edges {
            e.sort_unstable();
            e.dedup();
        }
        let adjacency = edges
            .iter()
            .map(|e| {
                let mut targets: Vec<SynsetIdx> = e.iter().map(|&(_, t)| t).collect();
                targets.sort_unstable();
                targets.dedup();
                targets
            })
            .collect();

        let mut lemma_index: HashMap<String, Vec<SynsetIdx>> = HashMap::new();
        for (i, s) in synsets.iter().enumerate() {
            for lemma in &s.lemmas {
                lemma_index.entry(lemma.clone()).or_default().push(i as SynsetIdx);
            }
        }

        Ok(LexicalDatabase {
            synsets,
            by_id,
            lemma_index,
            lemma_map,
            edges,
            adjacency,
            fingerprint: hex::encode(&hasher.finalize()[..8]),
        })
    }

    pub fn from_text(text: &str) -> Result<Self, LexiconError> {
        Self::load(text.as_bytes())
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Short content hash of the lexicon source, stored in enriched-file headers.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn synset(&self, id: &SynsetId) -> Option<&Synset> {
        self.by_id.get(id).map(|&i| &self.synsets[i as usize])
    }

    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.iter()
    }

    pub fn index_of(&self, id: &SynsetId) -> Result<SynsetIdx, LexiconError> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| LexiconError::NotFound(id.0.clone()))
    }

    pub fn id_of(&self, idx: SynsetIdx) -> &SynsetId {
        &self.synsets[idx as usize].id
    }

    /// Every lemma known to the database, in no particular order.
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemma_index.keys().map(String::as_str)
    }

    /// Sense indices of a normalized word: exact lemma match, plus the senses
    /// of its mapped lemma when the lexicon carries an `L` entry for it.
    /// Sorted and deduplicated.
    pub fn sense_indices(&self, word: &str) -> Vec<SynsetIdx> {
        let mut out: Vec<SynsetIdx> = self.lemma_index.get(word).cloned().unwrap_or_default();
        if let Some(lemma) = self.lemma_map.get(word) {
            if let Some(more) = self.lemma_index.get(lemma) {
                out.extend_from_slice(more);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The synsets S_w of a normalized word; empty for unknown words.
    pub fn synsets_of(&self, word: &str) -> BTreeSet<SynsetId> {
        self.sense_indices(word)
            .into_iter()
            .map(|i| self.id_of(i).clone())
            .collect()
    }

    pub fn neighbors(
        &self,
        synset: &SynsetId,
        relation: RelationType,
    ) -> Result<BTreeSet<SynsetId>, LexiconError> {
        let s = self.index_of(synset)?;
        Ok(self.synsets[s as usize]
            .relations
            .get(&relation)
            .cloned()
            .unwrap_or_default())
    }

    pub fn all_neighbors(&self, synset: &SynsetId) -> Result<BTreeSet<SynsetId>, LexiconError> {
        let s = self.index_of(synset)?;
        Ok(self.adjacency[s as usize]
            .iter()
            .map(|&t| self.id_of(t).clone())
            .collect())
    }

    /// One-hop targets of `idx` over all relation types, sorted.
    pub fn adjacent(&self, idx: SynsetIdx) -> &[SynsetIdx] {
        &self.adjacency[idx as usize]
    }

    /// Typed out-edges of `idx`, sorted by relation then target.
    pub fn edges(&self, idx: SynsetIdx) -> &[(RelationType, SynsetIdx)] {
        &self.edges[idx as usize]
    }

    /// Full-scan check of the lemma index against the synset lemma sets.
    pub fn index_is_consistent(&self) -> bool {
        let forward = self.synsets.iter().enumerate().all(|(i, s)| {
            s.lemmas.iter().all(|l| {
                self.lemma_index
                    .get(l)
                    .is_some_and(|v| v.contains(&(i as SynsetIdx)))
            })
        });
        let backward = self.lemma_index.iter().all(|(l, ids)| {
            ids.iter()
                .all(|&i| self.synsets[i as usize].lemmas.contains(l))
        });
        forward && backward
    }
}
