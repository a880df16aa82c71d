//! Parser for LLM-emitted triple lines of the form `(subject | predicate | object)`.

use serde::{Deserialize, Serialize};

use crate::graph::{canonicalize, RawTriple};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LlmTriples {
    pub triples: Vec<RawTriple>,
    pub rejected: Vec<RejectedLine>,
}

impl LlmTriples {
    /// True when there was input but nothing parsed.
    pub fn all_rejected(&self) -> bool {
        self.triples.is_empty() && !self.rejected.is_empty()
    }
}

fn parse_line(line: &str) -> Result<RawTriple, String> {
    let inner = line
        .strip_prefix('(')
        .and_then(|l| l.strip_suffix(')'))
        .ok_or_else(|| "expected `(subject | predicate | object)`".to_owned())?;
    let parts: Vec<String> = inner.split('|').map(canonicalize).collect();
    if parts.len() != 3 {
        return Err(format!("expected 3 fields, found {}", parts.len()));
    }
    if parts.iter().any(String::is_empty) {
        return Err("empty field".to_owned());
    }
    let mut it = parts.into_iter();
    Ok(RawTriple::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
}

/// Malformed lines are collected, never fatal. Blank lines are ignored.
pub fn parse_llm_triples(text: &str) -> LlmTriples {
    let mut out = LlmTriples::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(t) => out.triples.push(t),
            Err(reason) => out.rejected.push(RejectedLine { line: i + 1, text: raw.to_owned(), reason }),
        }
    }
    if out.all_rejected() {
        log::warn!("all {} triple lines were rejected", out.rejected.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_line() {
        let r = parse_llm_triples("  (cairo | capital_of | egypt)  ");
        assert_eq!(r.triples, vec![RawTriple::new("cairo", "capital_of", "egypt")]);
        assert!(r.rejected.is_empty());
    }

    #[test]
    fn arity_violation() {
        let r = parse_llm_triples("(a | b)");
        assert!(r.triples.is_empty());
        assert_eq!(r.rejected.len(), 1);
        assert!(r.all_rejected());
    }

    #[test]
    fn mixed_file() {
        let text = "(a | r | b)\n(c | r | d)\nnot a triple\n\n(e |  r2 | f )\n";
        let r = parse_llm_triples(text);
        assert_eq!(r.triples.len(), 3);
        assert_eq!(r.rejected.len(), 1);
        assert_eq!(r.rejected[0].line, 3);
        assert_eq!(r.triples[2], RawTriple::new("e", "r2", "f"));
    }

    #[test]
    fn empty_field_rejected() {
        assert_eq!(parse_llm_triples("( | r | b)").rejected.len(), 1);
    }
}
