//! 10-column CoNLL-U reader. Only FORM, LEMMA, UPOS, HEAD and DEPREL are kept.

use serde::{Deserialize, Serialize};

use super::ExtractError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub dep: String,
    /// 0-based index of the syntactic head; `None` for the root.
    pub head: Option<usize>,
}

impl Token {
    pub fn new(surface: &str, lemma: &str, pos: &str, dep: &str, head: Option<usize>) -> Self {
        Token { surface: surface.into(), lemma: lemma.into(), pos: pos.into(), dep: dep.into(), head }
    }

    pub fn is_root(&self) -> bool {
        self.head.is_none() || self.dep.eq_ignore_ascii_case("root")
    }

    /// Dependency label without its `:subtype` suffix.
    pub fn base_dep(&self) -> &str {
        self.dep.split(':').next().unwrap_or(&self.dep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub source_id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(Token::is_root)
    }

    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// Parse blank-line separated CoNLL-U sentences.
///
/// Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped. The
/// sentence id comes from a `# sent_id = ...` comment when present, else it
/// is the 1-based sentence ordinal.
pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>, ExtractError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;

    let flush = |tokens: &mut Vec<Token>, sent_id: &mut Option<String>, sentences: &mut Vec<Sentence>| {
        if !tokens.is_empty() {
            let id = sent_id.take().unwrap_or_else(|| (sentences.len() + 1).to_string());
            sentences.push(Sentence { source_id: id, tokens: std::mem::take(tokens) });
        }
        *sent_id = None;
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut sent_id, &mut sentences);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_owned());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ExtractError::Parse {
                line: line_no,
                reason: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let expected = tokens.len() + 1;
        match id.parse::<usize>() {
            Ok(n) if n == expected => {}
            _ => {
                return Err(ExtractError::Parse {
                    line: line_no,
                    reason: format!("token id `{id}` out of sequence (expected {expected})"),
                })
            }
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| ExtractError::Parse { line: line_no, reason: format!("non-integer HEAD `{}`", cols[6]) })?;
        tokens.push(Token {
            surface: cols[1].to_owned(),
            lemma: cols[2].to_owned(),
            pos: cols[3].to_owned(),
            dep: cols[7].to_owned(),
            head: head.checked_sub(1),
        });
    }
    flush(&mut tokens, &mut sent_id, &mut sentences);
    Ok(sentences)
}
