//! On-disk graph directory: `triples.tsv`, `entities.txt`, `relations.txt`, `version`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use kgraph_core::graph::{canonicalize, to_tsv, GraphConfig};
use kgraph_core::{GraphDelta, KnowledgeGraph, RawTriple};

use crate::error::{CliError, Located, Result};

pub const TRIPLES: &str = "triples.tsv";
pub const ENTITIES: &str = "entities.txt";
pub const RELATIONS: &str = "relations.txt";
pub const VERSION: &str = "version";

/// Contents of a file, or of stdin for `-`.
pub fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::at(Path::new("<stdin>"), e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::at(path, e))
}

/// Write to a file, or to stdout for `-`.
pub fn write_output(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::at(Path::new("<stdout>"), e));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::at(parent, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::at(path, e))
}

pub fn exists(dir: &Path) -> bool {
    dir.join(TRIPLES).is_file()
}

fn vocabulary(path: &Path) -> Result<Vec<String>> {
    let text = read_input(path)?;
    let mut names = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let name = canonicalize(line);
        if name.is_empty() {
            return Err(CliError::at(path, Located::line(i + 1, "empty name")));
        }
        names.push(name);
    }
    Ok(names)
}

pub fn load(dir: &Path) -> Result<KnowledgeGraph> {
    if !exists(dir) {
        return Err(CliError::Data(format!("{}: not a graph directory (no {TRIPLES})", dir.display())));
    }
    let triples_path = dir.join(TRIPLES);
    let raw = kgraph_core::graph::parse_tsv(&read_input(&triples_path)?).map_err(|e| CliError::at(&triples_path, e))?;
    let self_loops = raw.iter().any(|t| canonicalize(&t.head) == canonicalize(&t.tail));
    let mut g = KnowledgeGraph::with_config(GraphConfig { allow_self_loops: self_loops });
    for (path, entities) in [(dir.join(ENTITIES), true), (dir.join(RELATIONS), false)] {
        for (i, name) in vocabulary(&path)?.iter().enumerate() {
            let before = (g.entity_count(), g.relation_count());
            let interned = if entities { g.intern_entity(name).map(drop) } else { g.intern_relation(name).map(drop) };
            interned.map_err(|e| CliError::at(&path, Located::line(i + 1, e)))?;
            if (g.entity_count(), g.relation_count()) == before {
                return Err(CliError::at(&path, Located::line(i + 1, format!("duplicate name `{name}`"))));
            }
        }
    }
    let text = read_input(&triples_path)?;
    let mut data_lines: Vec<(usize, &str)> = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).collect();
    if data_lines.first().is_some_and(|(_, l)| *l == "head\trelation\ttail") {
        data_lines.remove(0);
    }
    let mut line_of = data_lines.into_iter().map(|(i, _)| i + 1);
    for t in &raw {
        let line = line_of.next().unwrap_or(0);
        let undeclared = [(&t.head, true), (&t.relation, false), (&t.tail, true)].into_iter().find(|(n, entity)| {
            let n = canonicalize(n);
            if *entity {
                g.entity_id(&n).is_none()
            } else {
                g.relation_id(&n).is_none()
            }
        });
        if let Some((name, entity)) = undeclared {
            let file = if entity { ENTITIES } else { RELATIONS };
            return Err(CliError::at(&triples_path, Located::line(line, format!("`{name}` is not listed in {file}"))));
        }
        g.add_raw(t).map_err(|e| CliError::at(&triples_path, Located::line(line, e)))?;
    }
    let version_path = dir.join(VERSION);
    let version = match fs::read_to_string(&version_path) {
        Ok(s) => {
            s.trim().parse::<u64>().map_err(|_| CliError::at(&version_path, Located::line(1, "not an integer")))?
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => 0,
        Err(e) => return Err(CliError::at(&version_path, e)),
    };
    g.set_version(version);
    Ok(g)
}

pub fn save(dir: &Path, g: &KnowledgeGraph) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::at(dir, e))?;
    let lines = |names: &[String]| names.iter().map(|n| format!("{n}\n")).collect::<String>();
    let files: [(PathBuf, String); 4] = [
        (dir.join(ENTITIES), lines(g.entities())),
        (dir.join(RELATIONS), lines(g.relations())),
        (dir.join(TRIPLES), to_tsv(g)),
        (dir.join(VERSION), format!("{}\n", g.version())),
    ];
    for (path, text) in files {
        write_output(&path, &text)?;
    }
    Ok(())
}

/// A delta plus the source line of each addition and deletion.
#[derive(Debug, Clone, Default)]
pub struct DeltaFile {
    pub delta: GraphDelta,
    pub addition_lines: Vec<usize>,
    pub deletion_lines: Vec<usize>,
}

impl DeltaFile {
    /// Line of the first change `graph` rejects: deletions are checked
    /// before additions, as `apply_delta` does.
    pub fn failing_line(&self, graph: &KnowledgeGraph) -> Option<usize> {
        let mut g = graph.clone();
        let deletions = self.delta.deletions.iter().zip(&self.deletion_lines);
        for (t, &line) in deletions {
            if g.apply_delta(&GraphDelta { additions: Vec::new(), deletions: vec![t.clone()] }).is_err() {
                return Some(line);
            }
        }
        for (t, &line) in self.delta.additions.iter().zip(&self.addition_lines) {
            if g.apply_delta(&GraphDelta { additions: vec![t.clone()], deletions: Vec::new() }).is_err() {
                return Some(line);
            }
        }
        None
    }
}

/// Delta lines `+<TAB>head<TAB>relation<TAB>tail` or `-<TAB>...`; blank lines
/// and `#` comments are skipped.
pub fn parse_delta(text: &str) -> std::result::Result<DeltaFile, Located> {
    let mut out = DeltaFile::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Located::line(i + 1, format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let t = RawTriple::new(canonicalize(fields[1]), canonicalize(fields[2]), canonicalize(fields[3]));
        match fields[0].trim() {
            "+" => {
                out.delta.additions.push(t);
                out.addition_lines.push(i + 1);
            }
            "-" => {
                out.delta.deletions.push(t);
                out.deletion_lines.push(i + 1);
            }
            op => return Err(Located::line(i + 1, format!("operation must be `+` or `-`, found `{op}`"))),
        }
    }
    Ok(out)
}
