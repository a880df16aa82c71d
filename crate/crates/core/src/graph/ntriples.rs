//! Line-oriented N-Triples subset: `<iri> <iri> <iri> .` and bare `s p o .`.
//!
//! Literals and blank nodes are rejected. IRIs may carry `\uXXXX` /
//! `\UXXXXXXXX` escapes, which is how the exporter writes spaces and other
//! characters that cannot appear raw inside angle brackets.

use super::{GraphError, RawTriple, Result};

pub fn parse_ntriples(text: &str) -> Result<Vec<RawTriple>> {
    let mut triples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if let Some(t) = parse_line(line, i + 1)? {
            triples.push(t);
        }
    }
    Ok(triples)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], ' ' | '\t') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, column: usize, reason: impl Into<String>) -> GraphError {
        GraphError::parse(self.line, column, reason)
    }

    fn term(&mut self, what: &str) -> Result<String> {
        self.skip_ws();
        let start = self.column();
        match self.peek() {
            None => Err(self.error(start, format!("missing {what}"))),
            Some('<') => self.iri(),
            Some('"') => Err(self.error(start, "literal unsupported")),
            Some('_') if self.chars.get(self.pos + 1) == Some(&':') => Err(self.error(start, "blank node unsupported")),
            Some('.') if self.pos + 1 >= self.chars.len() || self.chars[self.pos + 1].is_whitespace() => {
                Err(self.error(start, format!("missing {what}")))
            }
            Some(_) => Ok(self.bare()),
        }
    }

    fn bare(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && !self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn iri(&mut self) -> Result<String> {
        let open = self.column();
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error(open, "unterminated IRI"));
            };
            self.pos += 1;
            match c {
                '>' => break,
                '\\' => out.push(self.uchar()?),
                '<' | '"' | ' ' | '\t' => {
                    return Err(self.error(self.pos, format!("invalid character {c:?} in IRI")));
                }
                c => out.push(c),
            }
        }
        if out.is_empty() {
            return Err(self.error(open, "empty IRI"));
        }
        Ok(out)
    }

    fn uchar(&mut self) -> Result<char> {
        let at = self.pos;
        let width = match self.peek() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error(at, "invalid escape in IRI")),
        };
        self.pos += 1;
        if self.pos + width > self.chars.len() {
            return Err(self.error(at, "truncated escape in IRI"));
        }
        let hex: String = self.chars[self.pos..self.pos + width].iter().collect();
        self.pos += width;
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error(at, format!("invalid code point \\{hex}")))
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<RawTriple>> {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor::new(line, line_no);
    let head = cur.term("subject")?;
    let relation = cur.term("predicate")?;
    let tail = cur.term("object")?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.error(cur.column(), "missing terminal dot"));
    }
    cur.pos += 1;
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => Ok(Some(RawTriple { head, relation, tail })),
        Some(_) => Err(cur.error(cur.column(), "unexpected content after terminal dot")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_of(text: &str) -> (usize, usize, String) {
        match parse_ntriples(text) {
            Err(GraphError::Parse { line, column, reason }) => (line, column, reason),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_line() {
        assert_eq!(parse_ntriples("<a> <b> <c> .").unwrap(), vec![RawTriple::new("a", "b", "c")]);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let t = parse_ntriples("# comment\n\n<x> <r> <y> .").unwrap();
        assert_eq!(t, vec![RawTriple::new("x", "r", "y")]);
    }

    #[test]
    fn literal_rejected_at_object() {
        let (line, column, reason) = err_of("<a> <b> \"lit\" .");
        assert_eq!((line, column), (1, 9));
        assert_eq!(reason, "literal unsupported");
    }

    #[test]
    fn blank_node_rejected() {
        let (_, column, reason) = err_of("_:b0 <p> <o> .");
        assert_eq!(column, 1);
        assert_eq!(reason, "blank node unsupported");
    }

    #[test]
    fn missing_dot() {
        let (line, _, reason) = err_of("<a> <b> <c> .\n<a> <b> <c>");
        assert_eq!(line, 2);
        assert_eq!(reason, "missing terminal dot");
    }

    #[test]
    fn bare_tokens_crlf_and_trailing_comment() {
        let t = parse_ntriples("s p o .\r\n<http://x/a> <http://x/p> <http://x/b> . # done\r\n").unwrap();
        assert_eq!(t[0], RawTriple::new("s", "p", "o"));
        assert_eq!(t[1], RawTriple::new("http://x/a", "http://x/p", "http://x/b"));
    }

    #[test]
    fn escapes_in_iri() {
        let t = parse_ntriples("<New\\u0020York> <in> <USA> .").unwrap();
        assert_eq!(t[0].head, "New York");
    }

    #[test]
    fn too_few_terms() {
        let (_, _, reason) = err_of("<a> <b> .");
        assert_eq!(reason, "missing object");
        let (_, _, reason) = err_of("<a> <b> <c> <d> .");
        assert_eq!(reason, "missing terminal dot");
    }
}
