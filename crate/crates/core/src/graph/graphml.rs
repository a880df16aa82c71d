//! Reads the GraphML subset written by [`to_graphml`](super::to_graphml):
//! node labels from `<data key="label">`, edge labels from `<data key="relation">`.

use std::collections::HashMap;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{GraphError, RawTriple, Result};

enum Owner {
    Node(String),
    Edge { source: String, target: String },
}

fn attr(e: &quick_xml::events::BytesStart<'_>, name: &[u8]) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| GraphError::parse(0, 0, format!("bad attribute: {err}")))?;
        if a.key.as_ref() == name {
            let v = a.unescape_value().map_err(|err| GraphError::parse(0, 0, format!("bad attribute value: {err}")))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &quick_xml::events::BytesStart<'_>, name: &[u8]) -> Result<String> {
    attr(e, name)?
        .ok_or_else(|| GraphError::parse(0, 0, format!("missing attribute `{}`", String::from_utf8_lossy(name))))
}

pub fn parse_graphml(text: &str) -> Result<Vec<RawTriple>> {
    let mut reader = Reader::from_str(text);
    let mut labels: HashMap<String, String> = HashMap::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut owner: Option<Owner> = None;
    let mut data_key: Option<String> = None;
    let mut text_buf = String::new();

    loop {
        let event =
            reader.read_event().map_err(|e| GraphError::parse(0, reader.buffer_position() as usize, e.to_string()))?;
        match event {
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"node" => {
                let id = required(&e, b"id")?;
                labels.entry(id.clone()).or_insert_with(|| id.clone());
                owner = Some(Owner::Node(id));
            }
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"edge" => {
                owner = Some(Owner::Edge { source: required(&e, b"source")?, target: required(&e, b"target")? });
            }
            Event::Start(e) if e.name().as_ref() == b"data" => {
                data_key = attr(&e, b"key")?;
                text_buf.clear();
            }
            Event::Text(t) if data_key.is_some() => {
                let s = t.unescape().map_err(|e| GraphError::parse(0, 0, e.to_string()))?;
                text_buf.push_str(&s);
            }
            Event::End(e) if e.name().as_ref() == b"data" => match (data_key.take().as_deref(), &owner) {
                (Some("label"), Some(Owner::Node(id))) => {
                    labels.insert(id.clone(), text_buf.clone());
                }
                (Some("relation"), Some(Owner::Edge { source, target })) => {
                    edges.push((source.clone(), text_buf.clone(), target.clone()));
                    owner = None;
                }
                _ => {}
            },
            Event::End(e) if matches!(e.name().as_ref(), b"node" | b"edge") => {
                if let Some(Owner::Edge { .. }) = owner {
                    return Err(GraphError::parse(0, 0, "edge without a relation attribute"));
                }
                owner = None;
            }
            Event::Eof => break,
            _ => {}
        }
    }

    edges
        .into_iter()
        .map(|(s, r, t)| {
            let head = labels.get(&s).ok_or_else(|| GraphError::parse(0, 0, format!("unknown node `{s}`")))?;
            let tail = labels.get(&t).ok_or_else(|| GraphError::parse(0, 0, format!("unknown node `{t}`")))?;
            Ok(RawTriple::new(head.clone(), r, tail.clone()))
        })
        .collect()
}
