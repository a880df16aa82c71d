use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Client, Endpoint, LinkError, Result};

/// One entity mention linked to a DBpedia resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub surface_form: String,
    pub uri: String,
    /// The request's confidence threshold.
    pub confidence_used: f64,
    /// Character index of the mention in the input text.
    pub offset: usize,
}

fn key(text: &str, confidence: f64) -> String {
    format!("{text}\n{confidence}")
}

/// Spotlight encodes every field as a string; numbers are accepted too.
fn field(obj: &Value, name: &str) -> Result<String> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        _ => Err(LinkError::MalformedResponse(format!("resource without `{name}`"))),
    }
}

/// Decode a Spotlight `/annotate` JSON body. A missing `Resources` key means
/// no mentions.
pub fn parse_spotlight(body: &str, text: &str, confidence: f64) -> Result<Vec<Annotation>> {
    let doc: Value = serde_json::from_str(body).map_err(|e| LinkError::MalformedResponse(e.to_string()))?;
    let resources = match doc.get("Resources") {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Array(items)) => items.as_slice(),
        // a single resource is sometimes returned bare
        Some(single @ Value::Object(_)) => std::slice::from_ref(single),
        Some(_) => return Err(LinkError::MalformedResponse("`Resources` is not a list".into())),
    };
    let chars = text.chars().count();
    resources
        .iter()
        .map(|r| {
            let offset: usize = field(r, "@offset")?
                .parse()
                .map_err(|_| LinkError::MalformedResponse("`@offset` is not an index".into()))?;
            let surface_form = field(r, "@surfaceForm")?;
            if offset + surface_form.chars().count() > chars {
                return Err(LinkError::MalformedResponse(format!("offset {offset} outside the input text")));
            }
            Ok(Annotation { surface_form, uri: field(r, "@URI")?, confidence_used: confidence, offset })
        })
        .collect()
}

/// Annotate `text` with Spotlight at the given confidence threshold.
pub fn dbpedia_annotate(client: &Client, text: &str, confidence: f64, endpoint: &Endpoint) -> Result<Vec<Annotation>> {
    if !(0.0..=1.0).contains(&confidence) {
        return Err(LinkError::InvalidConfidence(confidence));
    }
    let conf = confidence.to_string();
    let body = client.fetch(endpoint, "dbpedia", &key(text, confidence), &[("text", text), ("confidence", &conf)])?;
    parse_spotlight(&body, text, confidence)
}
