//! Rule-based triple extraction from dependency-parsed sentences.
//!
//! Entities: tokens are scanned left to right. Punctuation never contributes
//! and clears the pending modifier buffer. Compound and modifier tokens are
//! buffered and prefixed onto the next entity head. A token whose (base)
//! dependency label ends in `subj` closes the subject span, one ending in
//! `obj` closes the object span; either close clears the buffer. The first
//! subject and first object found form the pair.
//!
//! Relation: the sentence root, then an optional adjacent `prep`/`agent`
//! token, then an optional adjacent adjective (`ADJ` or `amod`). Lemmas,
//! lowercased, space-joined.

mod conllu;
mod llm;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RawTriple;

pub use conllu::{parse_conllu, Sentence, Token};
pub use llm::{parse_llm_triples, LlmTriples, RejectedLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("CoNLL-U parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("sentence has no root token")]
    NoRoot,
}

/// Label sets driving the extraction rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRules {
    pub compound_labels: Vec<String>,
    pub modifier_labels: Vec<String>,
    /// A dependency label containing this marks a subject head (`nsubj`, `nsubjpass`, ...).
    pub subject_marker: String,
    /// A dependency label containing this marks an object head (`dobj`, `pobj`, ...).
    pub object_marker: String,
    pub link_labels: Vec<String>,
    pub adjective_labels: Vec<String>,
}

impl Default for ExtractionRules {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        ExtractionRules {
            compound_labels: v(&["compound"]),
            modifier_labels: v(&["amod", "nmod"]),
            subject_marker: "subj".into(),
            object_marker: "obj".into(),
            link_labels: v(&["prep", "agent"]),
            adjective_labels: v(&["amod"]),
        }
    }
}

fn is_punct(tok: &Token) -> bool {
    tok.pos == "PUNCT"
        || tok.dep == "punct"
        || (!tok.surface.is_empty() && tok.surface.chars().all(|c| c.is_ascii_punctuation() || c.is_whitespace()))
}

fn has_label(labels: &[String], dep: &str) -> bool {
    labels.iter().any(|l| l == dep)
}

fn relation_word(tok: &Token) -> String {
    let lemma = if tok.lemma.is_empty() || tok.lemma == "_" { &tok.surface } else { &tok.lemma };
    lemma.to_lowercase()
}

impl ExtractionRules {
    /// First `(subject, object)` pair of surface spans, if both exist.
    pub fn get_entities(&self, sentence: &Sentence) -> Option<(String, String)> {
        let mut buffer: Vec<&str> = Vec::new();
        let mut subject: Option<String> = None;
        let mut object: Option<String> = None;

        let close = |buffer: &mut Vec<&str>, head: &str| {
            let mut words = std::mem::take(buffer);
            words.push(head);
            words.join(" ")
        };

        for tok in &sentence.tokens {
            if is_punct(tok) {
                buffer.clear();
                continue;
            }
            let dep = tok.base_dep();
            if has_label(&self.compound_labels, dep) || has_label(&self.modifier_labels, dep) {
                buffer.push(&tok.surface);
            } else if dep.contains(self.subject_marker.as_str()) {
                let span = close(&mut buffer, &tok.surface);
                subject.get_or_insert(span);
            } else if dep.contains(self.object_marker.as_str()) {
                let span = close(&mut buffer, &tok.surface);
                object.get_or_insert(span);
            }
            if subject.is_some() && object.is_some() {
                break;
            }
        }
        subject.zip(object)
    }

    pub fn get_relation(&self, sentence: &Sentence) -> Result<String, ExtractError> {
        let root = sentence.root().ok_or(ExtractError::NoRoot)?;
        let toks = &sentence.tokens;
        let mut words = vec![relation_word(&toks[root])];
        let mut next = root + 1;
        if let Some(tok) = toks.get(next) {
            if has_label(&self.link_labels, tok.base_dep()) {
                words.push(relation_word(tok));
                next += 1;
            }
        }
        if let Some(tok) = toks.get(next) {
            if tok.pos == "ADJ" || has_label(&self.adjective_labels, tok.base_dep()) {
                words.push(relation_word(tok));
            }
        }
        Ok(words.join(" "))
    }

    fn extract_one(&self, sentence: &Sentence) -> Result<RawTriple, SkipReason> {
        let (subject, object) = self.get_entities(sentence).ok_or(SkipReason::NoEntityPair)?;
        let relation = self.get_relation(sentence).map_err(|_| SkipReason::NoRoot)?;
        Ok(RawTriple::new(subject, relation, object))
    }

    /// One triple per sentence that yields an entity pair, in input order.
    pub fn extract_triples(&self, sentences: &[Sentence]) -> Extraction {
        let results: Vec<_> = sentences.par_iter().map(|s| self.extract_one(s)).collect();
        let mut out = Extraction::default();
        for (sentence, r) in sentences.iter().zip(results) {
            match r {
                Ok(t) => out.triples.push(t),
                Err(reason) => out.skipped.push(SkippedSentence { source_id: sentence.source_id.clone(), reason }),
            }
        }
        out
    }
}

pub fn get_entities(sentence: &Sentence) -> Option<(String, String)> {
    ExtractionRules::default().get_entities(sentence)
}

pub fn get_relation(sentence: &Sentence) -> Result<String, ExtractError> {
    ExtractionRules::default().get_relation(sentence)
}

pub fn extract_triples(sentences: &[Sentence]) -> Extraction {
    ExtractionRules::default().extract_triples(sentences)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoEntityPair,
    NoRoot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSentence {
    pub source_id: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub triples: Vec<RawTriple>,
    pub skipped: Vec<SkippedSentence>,
}

impl Extraction {
    pub fn skip_count(&self) -> usize {
        self.skipped.len()
    }
}

/// `{"skipped": n, "rejected_lines": [...]}` report written next to extracted triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub skipped: usize,
    pub rejected_lines: Vec<RejectedLine>,
}

impl From<&Extraction> for ExtractionReport {
    fn from(e: &Extraction) -> Self {
        ExtractionReport { skipped: e.skip_count(), rejected_lines: Vec::new() }
    }
}

impl From<&LlmTriples> for ExtractionReport {
    fn from(l: &LlmTriples) -> Self {
        ExtractionReport { skipped: 0, rejected_lines: l.rejected.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(rows: &[(&str, &str, &str, &str, usize)]) -> Sentence {
        Sentence {
            source_id: "t".into(),
            tokens: rows.iter().map(|&(s, l, p, d, h)| Token::new(s, l, p, d, h.checked_sub(1))).collect(),
        }
    }

    #[test]
    fn simple_svo() {
        let s = sent(&[
            ("John", "John", "PROPN", "nsubj", 2),
            ("founded", "found", "VERB", "ROOT", 0),
            ("Acme", "Acme", "PROPN", "dobj", 2),
        ]);
        assert_eq!(get_entities(&s), Some(("John".into(), "Acme".into())));
        assert_eq!(get_relation(&s).unwrap(), "found");
    }

    #[test]
    fn modifiers_and_compounds_prefix_the_head() {
        let s = sent(&[
            ("Old", "old", "ADJ", "amod", 2),
            ("John", "John", "PROPN", "nsubj", 3),
            ("founded", "found", "VERB", "ROOT", 0),
            ("Acme", "Acme", "PROPN", "compound", 5),
            ("Corp", "Corp", "PROPN", "dobj", 3),
        ]);
        assert_eq!(get_entities(&s), Some(("Old John".into(), "Acme Corp".into())));
    }

    #[test]
    fn no_object_no_pair() {
        let s = sent(&[("John", "John", "PROPN", "nsubj", 2), ("slept", "sleep", "VERB", "ROOT", 0)]);
        assert_eq!(get_entities(&s), None);
    }

    #[test]
    fn punctuation_flushes_buffer() {
        let s = sent(&[
            ("Big", "big", "ADJ", "amod", 3),
            (",", ",", "PUNCT", "punct", 3),
            ("Tom", "Tom", "PROPN", "nsubj", 4),
            ("won", "win", "VERB", "ROOT", 0),
            ("gold", "gold", "NOUN", "dobj", 4),
            (".", ".", "PUNCT", "punct", 4),
        ]);
        assert_eq!(get_entities(&s), Some(("Tom".into(), "gold".into())));
    }

    #[test]
    fn subtyped_labels() {
        let s = sent(&[
            ("Books", "book", "NOUN", "nsubj:pass", 3),
            ("were", "be", "AUX", "aux:pass", 3),
            ("written", "write", "VERB", "root", 0),
            ("by", "by", "ADP", "agent", 3),
            ("Ann", "Ann", "PROPN", "pobj", 4),
        ]);
        assert_eq!(get_entities(&s), Some(("Books".into(), "Ann".into())));
        assert_eq!(get_relation(&s).unwrap(), "write by");
    }

    #[test]
    fn spacy_passive_subject() {
        let s = sent(&[
            ("Penicillin", "penicillin", "NOUN", "nsubjpass", 3),
            ("was", "be", "AUX", "auxpass", 3),
            ("discovered", "discover", "VERB", "ROOT", 0),
            ("by", "by", "ADP", "agent", 3),
            ("Fleming", "Fleming", "PROPN", "pobj", 4),
        ]);
        assert_eq!(get_entities(&s), Some(("Penicillin".into(), "Fleming".into())));
        assert_eq!(get_relation(&s).unwrap(), "discover by");
    }

    #[test]
    fn relation_with_adjective() {
        let s = sent(&[
            ("Paris", "Paris", "PROPN", "nsubj", 2),
            ("became", "become", "VERB", "ROOT", 0),
            ("famous", "famous", "ADJ", "acomp", 2),
            ("worldwide", "worldwide", "ADV", "advmod", 2),
        ]);
        assert_eq!(get_relation(&s).unwrap(), "become famous");
    }

    #[test]
    fn missing_root() {
        let s = Sentence { source_id: "x".into(), tokens: vec![Token::new("a", "a", "X", "dep", Some(0))] };
        assert_eq!(get_relation(&s), Err(ExtractError::NoRoot));
    }

    #[test]
    fn skip_accounting() {
        let good = sent(&[
            ("John", "John", "PROPN", "nsubj", 2),
            ("founded", "found", "VERB", "ROOT", 0),
            ("Acme", "Acme", "PROPN", "dobj", 2),
        ]);
        let bad = sent(&[("Rain", "rain", "NOUN", "ROOT", 0)]);
        let out = extract_triples(&[good.clone(), bad, good]);
        assert_eq!(out.triples.len(), 2);
        assert_eq!(out.skip_count(), 1);
        assert!(extract_triples(&[]).triples.is_empty());
    }
}
