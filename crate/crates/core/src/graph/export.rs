//! Deterministic text exports: DOT, GraphML, N-Triples, TSV.
//!
//! Nodes are written in entity-index order and edges in triple-slot order,
//! one edge per unit of multiplicity.

use std::fmt::Write;

use super::KnowledgeGraph;

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn to_dot(graph: &KnowledgeGraph) -> String {
    let mut out = String::from("digraph kg {\n");
    for (i, name) in graph.entities().iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label={}];", dot_quote(name));
    }
    for t in graph.triple_multiset() {
        let _ =
            writeln!(out, "  n{} -> n{} [label={}];", t.head.0, t.tail.0, dot_quote(graph.relation_name(t.relation)));
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn to_graphml(graph: &KnowledgeGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n  \
         <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n  \
         <key id=\"relation\" for=\"edge\" attr.name=\"relation\" attr.type=\"string\"/>\n  \
         <graph id=\"kg\" edgedefault=\"directed\">\n",
    );
    for (i, name) in graph.entities().iter().enumerate() {
        let _ = writeln!(out, "    <node id=\"n{i}\"><data key=\"label\">{}</data></node>", xml_escape(name));
    }
    for (e, t) in graph.triple_multiset().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{e}\" source=\"n{}\" target=\"n{}\"><data key=\"relation\">{}</data></edge>",
            t.head.0,
            t.tail.0,
            xml_escape(graph.relation_name(t.relation))
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn nt_iri(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('<');
    for c in s.chars() {
        if c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let cp = c as u32;
            if cp <= 0xFFFF {
                let _ = write!(out, "\\u{cp:04X}");
            } else {
                let _ = write!(out, "\\U{cp:08X}");
            }
        } else {
            out.push(c);
        }
    }
    out.push('>');
    out
}

/// Every term is written as an IRI so the subset parser reads it back verbatim.
pub fn to_ntriples(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for t in graph.triple_multiset() {
        let _ = writeln!(
            out,
            "{} {} {} .",
            nt_iri(graph.entity_name(t.head)),
            nt_iri(graph.relation_name(t.relation)),
            nt_iri(graph.entity_name(t.tail))
        );
    }
    out
}

/// Headerless TSV, one line per unit of multiplicity.
pub fn to_tsv(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for t in graph.triple_multiset() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            graph.entity_name(t.head),
            graph.relation_name(t.relation),
            graph.entity_name(t.tail)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dot() {
        assert_eq!(to_dot(&KnowledgeGraph::new()), "digraph kg {\n}\n");
    }

    #[test]
    fn single_edge_dot() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let dot = to_dot(&g);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("n0 [label=\"a\"]"));
        assert!(dot.contains("n0 -> n1 [label=\"r\"]"));
    }

    #[test]
    fn dot_quotes_escaped() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("say \"hi\"", "r\\s", "b").unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains(r#"[label="say \"hi\""]"#), "{dot}");
        assert!(dot.contains(r#"[label="r\\s"]"#), "{dot}");
    }

    #[test]
    fn graphml_shape() {
        let g = KnowledgeGraph::new();
        let xml = to_graphml(&g);
        assert!(xml.contains("edgedefault=\"directed\""));
        assert!(!xml.contains("<node"));

        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        let xml = to_graphml(&g);
        assert_eq!(xml.matches("<node ").count(), 2);
        assert_eq!(xml.matches("<edge ").count(), 1);
        assert!(xml.contains("<data key=\"relation\">r</data>"));
    }

    #[test]
    fn exports_repeat_multiplicity() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("a", "r", "b").unwrap();
        g.add_triple("a", "r", "b").unwrap();
        assert_eq!(to_tsv(&g), "a\tr\tb\na\tr\tb\n");
        assert_eq!(to_ntriples(&g).lines().count(), 2);
    }

    #[test]
    fn ntriples_escapes_spaces() {
        let mut g = KnowledgeGraph::new();
        g.add_triple("New York", "in", "U<S>A").unwrap();
        assert_eq!(to_ntriples(&g), "<New\\u0020York> <in> <U\\u003CS\\u003EA> .\n");
    }
}
