use super::{GraphError, RawTriple, Result};

const HEADER: &str = "head\trelation\ttail";

/// Three tab-separated columns per line; one optional `head relation tail` header.
pub fn parse_tsv(text: &str) -> Result<Vec<RawTriple>> {
    let mut triples = Vec::new();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line == HEADER {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(GraphError::parse(
                i + 1,
                1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        triples.push(RawTriple::new(fields[0], fields[1], fields[2]));
    }
    Ok(triples)
}
