use serde_json::Value;

use crate::{Client, Endpoint, LinkError, Result};

/// `/c/en/<term>`: trimmed, lowercased, inner whitespace as `_`.
pub fn concept_uri(concept: &str) -> Result<String> {
    let words: Vec<String> = concept.split_whitespace().map(str::to_lowercase).collect();
    if words.is_empty() {
        return Err(LinkError::EmptyConcept);
    }
    Ok(format!("/c/en/{}", words.join("_")))
}

/// Distinct `edges[].rel.label` values in response order.
pub fn parse_conceptnet(body: &str) -> Result<Vec<String>> {
    let doc: Value = serde_json::from_str(body).map_err(|e| LinkError::MalformedResponse(e.to_string()))?;
    let edges = match doc.get("edges") {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Array(edges)) => edges,
        Some(_) => return Err(LinkError::MalformedResponse("`edges` is not a list".into())),
    };
    let mut out: Vec<String> = Vec::new();
    for edge in edges {
        let label = edge
            .pointer("/rel/label")
            .and_then(Value::as_str)
            .ok_or_else(|| LinkError::MalformedResponse("edge without `rel.label`".into()))?;
        if !out.iter().any(|l| l == label) {
            out.push(label.to_owned());
        }
    }
    Ok(out)
}

/// Relation labels on edges between `a` and `b`.
pub fn conceptnet_relations(client: &Client, a: &str, b: &str, endpoint: &Endpoint) -> Result<Vec<String>> {
    let (na, nb) = (concept_uri(a)?, concept_uri(b)?);
    let body = client.fetch(endpoint, "conceptnet", &format!("{na}\n{nb}"), &[("node", &na), ("other", &nb)])?;
    parse_conceptnet(&body)
}
