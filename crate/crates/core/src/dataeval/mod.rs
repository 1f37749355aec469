//! SQuAD v1.1 ingestion, tokenization, answer alignment and EM/F1 scoring.
//!
//! Adversarial sets (AddSent, AddOneSent) share the schema and go through the
//! same loader.

mod metrics;
mod tokenize;

use std::collections::HashMap;
use std::io::Read;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::enrich::ConnectionTable;

pub use metrics::{em_f1, exact_match, f1, normalize_answer};
pub use tokenize::{align_answer, span_text, tokenize, Token};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid dataset JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("answer_start {start} at {path} is beyond the passage length {len}")]
    AnswerOutOfRange { path: String, start: usize, len: usize },
    #[error("gold answer list is empty")]
    EmptyGolds,
    #[error("no connection table for example `{0}`")]
    MissingTable(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub text: String,
    pub char_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawExample {
    pub id: String,
    pub passage_text: String,
    pub question_text: String,
    pub answers: Vec<Answer>,
}

/// A tokenized example with its gold answers aligned to 1-based token spans.
#[derive(Debug, Clone)]
pub struct AlignedExample {
    pub raw: RawExample,
    pub passage: Vec<Token>,
    pub question: Vec<Token>,
    /// One entry per answer; `None` when the answer could not be aligned.
    pub spans: Vec<Option<(usize, usize)>>,
}

impl AlignedExample {
    pub fn new(raw: RawExample) -> Self {
        let passage = tokenize(&raw.passage_text);
        let question = tokenize(&raw.question_text);
        let spans = raw
            .answers
            .iter()
            .map(|a| align_answer(&passage, &a.text, a.char_start))
            .collect();
        AlignedExample {
            raw,
            passage,
            question,
            spans,
        }
    }

    pub fn id(&self) -> &str {
        &self.raw.id
    }

    /// First alignable gold span, used as the training label.
    pub fn gold_span(&self) -> Option<(usize, usize)> {
        self.spans.iter().flatten().next().copied()
    }

    pub fn passage_words(&self) -> Vec<&str> {
        self.passage.iter().map(|t| t.normalized.as_str()).collect()
    }

    pub fn question_words(&self) -> Vec<&str> {
        self.question.iter().map(|t| t.normalized.as_str()).collect()
    }

    pub fn gold_texts(&self) -> Vec<&str> {
        self.raw.answers.iter().map(|a| a.text.as_str()).collect()
    }

    pub fn span_text(&self, a_s: usize, a_e: usize) -> String {
        span_text(&self.raw.passage_text, &self.passage, a_s, a_e)
    }
}

fn schema(path: &str, message: &str) -> DataError {
    DataError::Schema {
        path: path.to_owned(),
        message: message.to_owned(),
    }
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, DataError> {
    v.get(key)
        .ok_or_else(|| schema(path, &format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Vec<Value>, DataError> {
    field(v, key, path)?
        .as_array()
        .ok_or_else(|| schema(&format!("{path}.{key}"), "expected an array"))
}

fn string<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a str, DataError> {
    field(v, key, path)?
        .as_str()
        .ok_or_else(|| schema(&format!("{path}.{key}"), "expected a string"))
}

/// Reads a SQuAD v1.1 file into one [`RawExample`] per question.
pub fn load_dataset<R: Read>(source: R) -> Result<Vec<RawExample>, DataError> {
    let root: Value = serde_json::from_reader(source)?;
    let mut out = Vec::new();
    for (ai, article) in array(&root, "data", "$")?.iter().enumerate() {
        let apath = format!("data[{ai}]");
        for (pi, para) in array(article, "paragraphs", &apath)?.iter().enumerate() {
            let ppath = format!("{apath}.paragraphs[{pi}]");
            let context = string(para, "context", &ppath)?;
            let context_len = context.chars().count();
            for (qi, qa) in array(para, "qas", &ppath)?.iter().enumerate() {
                let qpath = format!("{ppath}.qas[{qi}]");
                let id = string(qa, "id", &qpath)?;
                let question = string(qa, "question", &qpath)?;
                let mut answers = Vec::new();
                for (xi, ans) in array(qa, "answers", &qpath)?.iter().enumerate() {
                    let xpath = format!("{qpath}.answers[{xi}]");
                    let text = string(ans, "text", &xpath)?;
                    let start = field(ans, "answer_start", &xpath)?
                        .as_u64()
                        .ok_or_else(|| {
                            schema(&format!("{xpath}.answer_start"), "expected a non-negative integer")
                        })? as usize;
                    if start >= context_len.max(1) {
                        return Err(DataError::AnswerOutOfRange {
                            path: xpath,
                            start,
                            len: context_len,
                        });
                    }
                    answers.push(Answer {
                        text: text.to_owned(),
                        char_start: start,
                    });
                }
                out.push(RawExample {
                    id: id.to_owned(),
                    passage_text: context.to_owned(),
                    question_text: question.to_owned(),
                    answers,
                });
            }
        }
    }
    Ok(out)
}

pub fn align_dataset(raw: Vec<RawExample>) -> Vec<AlignedExample> {
    raw.into_iter().map(AlignedExample::new).collect()
}

/// Anything that can pick a span for an example given its connection table.
pub trait SpanPredictor {
    type Error: From<DataError>;

    /// Returns the 1-based inclusive span and its confidence.
    fn predict_span(
        &self,
        example: &AlignedExample,
        table: &ConnectionTable,
    ) -> Result<(usize, usize, f64), Self::Error>;
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleScore {
    pub id: String,
    pub prediction: String,
    pub a_s: usize,
    pub a_e: usize,
    pub confidence: f64,
    pub em: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalResult {
    /// Percentage in [0, 100].
    pub em: f64,
    /// Percentage in [0, 100].
    pub f1: f64,
    pub examples: Vec<ExampleScore>,
}

impl EvalResult {
    pub fn from_scores(examples: Vec<ExampleScore>) -> Self {
        let n = examples.len().max(1) as f64;
        let em = 100.0 * examples.iter().map(|e| e.em).sum::<f64>() / n;
        let f1 = 100.0 * examples.iter().map(|e| e.f1).sum::<f64>() / n;
        EvalResult { em, f1, examples }
    }
}

/// Scores every example; `tables` is keyed by example id.
pub fn evaluate<P: SpanPredictor>(
    predictor: &P,
    dataset: &[AlignedExample],
    tables: &HashMap<String, ConnectionTable>,
) -> Result<EvalResult, P::Error> {
    let mut scores = Vec::with_capacity(dataset.len());
    for ex in dataset {
        let table = tables
            .get(ex.id())
            .ok_or_else(|| DataError::MissingTable(ex.id().to_owned()))?;
        let (a_s, a_e, confidence) = predictor.predict_span(ex, table)?;
        let prediction = ex.span_text(a_s, a_e);
        let (em, f1) = em_f1(&prediction, &ex.gold_texts())?;
        scores.push(ExampleScore {
            id: ex.id().to_owned(),
            prediction,
            a_s,
            a_e,
            confidence,
            em,
            f1,
        });
    }
    Ok(EvalResult::from_scores(scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrich::HopCount;

    const TABLE1: &str = r#"{"version":"1.1","data":[{"title":"Lesson","paragraphs":[{
        "context":"Teachers may use a lesson plan to facilitate student learning, providing a course of study which is called the curriculum.",
        "qas":[{"id":"q1","question":"What can a teacher use to help students learn?",
                "answers":[{"text":"lesson plan","answer_start":19}]}]}]}]}"#;

    #[test]
    fn loads_minimal_file() {
        let raw = load_dataset(TABLE1.as_bytes()).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(raw[0].question_text, "What can a teacher use to help students learn?");
        assert_eq!(raw[0].answers[0].text, "lesson plan");
        let ex = AlignedExample::new(raw[0].clone());
        let (s, e) = ex.gold_span().unwrap();
        assert_eq!(e - s, 1);
        assert_eq!(ex.span_text(s, e), "lesson plan");
    }

    #[test]
    fn answer_start_out_of_range() {
        let bad = TABLE1.replace("\"answer_start\":19", "\"answer_start\":999");
        assert!(matches!(
            load_dataset(bad.as_bytes()),
            Err(DataError::AnswerOutOfRange { start: 999, .. })
        ));
    }

    #[test]
    fn schema_error_has_path() {
        let bad = TABLE1.replace("\"question\"", "\"query\"");
        match load_dataset(bad.as_bytes()) {
            Err(DataError::Schema { path, .. }) => assert_eq!(path, "data[0].paragraphs[0].qas[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metric_examples() {
        assert_eq!(em_f1("The lesson plan", &["lesson plan"]).unwrap(), (1.0, 1.0));
        let (em, f) = em_f1("lesson", &["lesson plan"]).unwrap();
        assert_eq!(em, 0.0);
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(em_f1("brooklyn", &["Brooklyn"]).unwrap().0, 1.0);
        assert!(matches!(em_f1("x", &[] as &[&str]), Err(DataError::EmptyGolds)));
        assert_eq!(em_f1("the", &["a"]).unwrap(), (1.0, 1.0));
    }

    struct Oracle;

    impl SpanPredictor for Oracle {
        type Error = DataError;

        fn predict_span(
            &self,
            example: &AlignedExample,
            _table: &ConnectionTable,
        ) -> Result<(usize, usize, f64), DataError> {
            let (s, e) = example.gold_span().unwrap();
            Ok((s, e, 1.0))
        }
    }

    struct First;

    impl SpanPredictor for First {
        type Error = DataError;

        fn predict_span(&self, _: &AlignedExample, _: &ConnectionTable) -> Result<(usize, usize, f64), DataError> {
            Ok((1, 1, 0.5))
        }
    }

    fn tables_for(ds: &[AlignedExample]) -> HashMap<String, ConnectionTable> {
        ds.iter()
            .map(|ex| {
                (
                    ex.id().to_owned(),
                    ConnectionTable::empty(ex.passage.len(), ex.question.len(), HopCount(0)),
                )
            })
            .collect()
    }

    #[test]
    fn evaluate_aggregates() {
        let ds = align_dataset(load_dataset(TABLE1.as_bytes()).unwrap());
        let tables = tables_for(&ds);
        let r = evaluate(&Oracle, &ds, &tables).unwrap();
        assert_eq!((r.em, r.f1), (100.0, 100.0));

        let mut second = ds[0].raw.clone();
        second.id = "q2".into();
        second.answers[0] = Answer {
            text: "curriculum".into(),
            char_start: second.passage_text.find("curriculum").unwrap(),
        };
        let mut two = ds.clone();
        two.push(AlignedExample::new(second));
        two[0].raw.answers[0].text = "Teachers".into();
        let r = evaluate(&First, &two, &tables_for(&two)).unwrap();
        assert_eq!(r.em, 50.0);
        assert!(r.em <= r.f1);
    }

    #[test]
    fn missing_table_is_consistency_error() {
        let ds = align_dataset(load_dataset(TABLE1.as_bytes()).unwrap());
        assert!(matches!(
            evaluate(&Oracle, &ds, &HashMap::new()),
            Err(DataError::MissingTable(_))
        ));
    }
}
