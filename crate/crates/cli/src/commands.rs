use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use kgraph_core::cluster::{
    agglomerative, clustering_report, excut_loop, gap_statistic, kmeans_with, select_k_elbow, select_k_silhouette,
    ClusterModel, ExcutConfig, KMeansConfig, Linkage,
};
use kgraph_core::dynamic::{reconstruct_after_delta, DynamicModel, Fallback, Layer, ReconstructionConfig, Scope};
use kgraph_core::embedding::{EmbeddingFile, EmbeddingTable};
use kgraph_core::extract::{extract_triples, parse_conllu, parse_llm_triples, ExtractionReport};
use kgraph_core::graph::{
    parse_graphml, parse_ntriples, parse_tsv, to_dot, to_graphml, to_ntriples, to_tsv, GraphConfig,
};
use kgraph_core::predict::{
    evaluate, predict_relation, predict_relation_both, Candidates, EvalConfig, EvalDirection, RankMode,
};
use kgraph_core::transe::{train, Norm, TransEConfig, TransEModel, TransEModelFile};
use kgraph_core::walk::{deepwalk, node2vec, WalkConfig};
use kgraph_core::{EntityId, GraphDelta, KnowledgeGraph, RawTriple, Triple};
use kgraph_link::{conceptnet_relations, dbpedia_annotate, Client, Endpoint, LinkError};
use serde_json::json;

use crate::error::{CliError, Located, Result};
use crate::graphdir::{self, read_input, write_output};
use crate::*;

pub fn dispatch(cli: &Cli) -> Result<()> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a),
        Command::Embed(EmbedCommand::Deepwalk(a)) => embed_walk(a, 1.0, 1.0, seed, false),
        Command::Embed(EmbedCommand::Node2vec(a)) => embed_walk(&a.walk, a.p, a.q, seed, true),
        Command::Embed(EmbedCommand::Transe(a)) => embed_transe(a, seed),
        Command::Cluster(c) => cluster(c, seed),
        Command::Predict(p) => predict(p, seed),
        Command::Update(a) => update(a, seed),
        Command::Link(l) => link(l),
        Command::Export(a) => export(a),
        Command::Report(a) => report(a, seed),
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn raw_triples(path: &Path) -> Result<Vec<RawTriple>> {
    parse_tsv(&read_input(path)?).map_err(|e| CliError::at(path, e))
}

/// Line number of each parsed triple; empty for GraphML.
fn data_lines(text: &str, format: IngestFormat) -> Vec<usize> {
    let mut lines: Vec<(usize, &str)> =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
    match format {
        IngestFormat::Tsv => {
            if lines.first().is_some_and(|(_, l)| *l == "head\trelation\ttail") {
                lines.remove(0);
            }
        }
        IngestFormat::Ntriples => lines.retain(|(_, l)| !l.starts_with('#')),
        IngestFormat::Graphml => return Vec::new(),
    }
    lines.into_iter().map(|(i, _)| i).collect()
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let text = read_input(&a.input)?;
    let source = if a.input == Path::new("-") { Path::new("<stdin>") } else { a.input.as_path() };
    let triples = match a.format {
        IngestFormat::Ntriples => parse_ntriples(&text),
        IngestFormat::Tsv => parse_tsv(&text),
        IngestFormat::Graphml => parse_graphml(&text),
    }
    .map_err(|e| CliError::at(source, e))?;
    let exists = graphdir::exists(&a.out);
    if exists && !a.append {
        return Err(CliError::Usage(format!(
            "--out {} already holds a graph; pass --append to add to it",
            a.out.display()
        )));
    }
    let mut g = if exists {
        let mut g = graphdir::load(&a.out)?;
        if a.allow_self_loops && !g.config().allow_self_loops {
            let mut fresh = KnowledgeGraph::with_config(GraphConfig { allow_self_loops: true });
            for n in g.entities() {
                fresh.intern_entity(n).expect("loaded names are valid");
            }
            for n in g.relations() {
                fresh.intern_relation(n).expect("loaded names are valid");
            }
            for t in g.raw_multiset() {
                fresh.add_raw(&t).expect("loaded triples are valid");
            }
            fresh.set_version(g.version());
            g = fresh;
        }
        g
    } else {
        KnowledgeGraph::with_config(GraphConfig { allow_self_loops: a.allow_self_loops })
    };
    if let Some(schema) = &a.schema {
        let names: Vec<String> =
            read_input(schema)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
        g.set_schema(names);
    }
    if exists {
        g.apply_delta(&GraphDelta { additions: triples, deletions: Vec::new() })
            .map_err(|e| CliError::at(source, e))?;
    } else {
        let lines = data_lines(&text, a.format);
        for (i, t) in triples.iter().enumerate() {
            g.add_raw(t).map_err(|e| match lines.get(i) {
                Some(&line) => CliError::at(source, Located::line(line, e)),
                None => CliError::at(source, format!("edge {}: {e}", i + 1)),
            })?;
        }
    }
    graphdir::save(&a.out, &g)?;
    log::info!(
        "graph {} now has {} entities, {} relations, {} triples (version {})",
        a.out.display(),
        g.entity_count(),
        g.relation_count(),
        g.total_count(),
        g.version()
    );
    Ok(())
}

fn triples_tsv(triples: &[RawTriple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(out, "{}\t{}\t{}", t.head, t.relation, t.tail);
    }
    out
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let text = read_input(&a.input)?;
    let source = if a.input == Path::new("-") { Path::new("<stdin>") } else { a.input.as_path() };
    let (triples, report) = match a.format {
        ExtractFormat::Conllu => {
            let sentences = parse_conllu(&text).map_err(|e| CliError::at(source, e))?;
            let ex = extract_triples(&sentences);
            let report = ExtractionReport::from(&ex);
            (ex.triples, report)
        }
        ExtractFormat::LlmLines => {
            let parsed = parse_llm_triples(&text);
            for r in &parsed.rejected {
                log::warn!("{}:{}: {}", source.display(), r.line, r.reason);
            }
            let report = ExtractionReport::from(&parsed);
            (parsed.triples, report)
        }
    };
    log::info!(
        "{} triples, {} sentences skipped, {} lines rejected",
        triples.len(),
        report.skipped,
        report.rejected_lines.len()
    );
    write_output(&a.out, &triples_tsv(&triples))?;
    if let Some(path) = &a.report {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        write_output(path, &s)?;
    }
    Ok(())
}

/// False for NaN as well.
fn positive(x: f64) -> bool {
    x > 0.0
}

fn check_walk(a: &WalkArgs) -> Result<()> {
    for (flag, v) in [
        ("--dim", a.dim),
        ("--walk-length", a.walk_length),
        ("--walks-per-node", a.walks_per_node),
        ("--window", a.window),
        ("--negatives", a.negatives),
    ] {
        if v == 0 {
            return Err(CliError::flag(flag, "must be at least 1"));
        }
    }
    if !positive(a.lr) {
        return Err(CliError::flag("--lr", "must be positive"));
    }
    Ok(())
}

fn embed_walk(a: &WalkArgs, p: f64, q: f64, seed: u64, biased: bool) -> Result<()> {
    check_walk(a)?;
    for (flag, v) in [("--p", p), ("--q", q)] {
        if !positive(v) {
            return Err(CliError::flag(flag, "must be positive"));
        }
    }
    let g = graphdir::load(&a.graph)?;
    let config = WalkConfig {
        walk_length: a.walk_length,
        walks_per_node: a.walks_per_node,
        window: a.window,
        dim: a.dim,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.lr,
        p,
        q,
        directed: a.directed,
        seed,
    };
    let table = if biased { node2vec(&g, &config) } else { deepwalk(&g, &config) }
        .map_err(|e| CliError::Data(format!("{}: {e}", a.graph.display())))?;
    write_output(&a.out, &(EmbeddingFile::new(&table, g.entities()).to_json() + "\n"))?;
    if let Some(path) = &a.pca {
        write_output(path, &table.pca_csv(g.entities()))?;
    }
    Ok(())
}

fn resolve_all(g: &KnowledgeGraph, triples: &[RawTriple], path: &Path) -> Result<Vec<Triple>> {
    triples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            g.resolve(t)
                .ok_or_else(|| CliError::at(path, format!("triple {} ({t}) is not in the graph vocabulary", i + 1)))
        })
        .collect()
}

fn embed_transe(a: &TransEArgs, seed: u64) -> Result<()> {
    if a.dim == 0 {
        return Err(CliError::flag("--dim", "must be at least 1"));
    }
    if !positive(a.margin) {
        return Err(CliError::flag("--margin", "must be positive"));
    }
    if !positive(a.lr) {
        return Err(CliError::flag("--lr", "must be positive"));
    }
    if a.batch_size == 0 {
        return Err(CliError::flag("--batch-size", "must be at least 1"));
    }
    let g = graphdir::load(&a.graph)?;
    let config = TransEConfig {
        dim: a.dim,
        margin: a.margin,
        learning_rate: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        norm: match a.norm {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        },
        seed,
        filter_corruptions: !a.unfiltered_corruptions,
        unit_entities: true,
    };
    let known: HashSet<Triple> = g.triples().collect();
    let held: HashSet<Triple> = match &a.holdout {
        Some(path) => resolve_all(&g, &raw_triples(path)?, path)?.into_iter().collect(),
        None => HashSet::new(),
    };
    let training: Vec<Triple> = g.triples().filter(|t| !held.contains(t)).collect();
    let model = train(&training, g.entity_count(), g.relation_count(), &known, &config)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.graph.display())))?;
    let file = TransEModelFile::new(&model, g.entities(), g.relations(), g.version());
    write_output(&a.out, &(file.to_json() + "\n"))
}

/// Entity names and vectors from an embedding or TransE model file.
fn load_embeddings(path: &Path) -> Result<(Vec<String>, EmbeddingTable)> {
    let file = EmbeddingFile::from_json(&read_input(path)?).map_err(|e| CliError::at(path, e.to_string()))?;
    if file.entities.is_empty() {
        return Err(CliError::at(path, "no entity vectors"));
    }
    Ok((file.names(), file.table()))
}

fn load_model(path: &Path) -> Result<(TransEModelFile, Vec<String>, Vec<String>, TransEModel)> {
    let file = TransEModelFile::from_json(&read_input(path)?).map_err(|e| CliError::at(path, e.to_string()))?;
    let ents: Vec<String> = file.entities.keys().cloned().collect();
    let rels: Vec<String> = file.relations.keys().cloned().collect();
    let model = file.model_for(&ents, &rels).map_err(|e| CliError::at(path, e.to_string()))?;
    Ok((file, ents, rels, model))
}

fn choose_k(points: &EmbeddingTable, k: &KArgs, seed: u64) -> Result<usize> {
    let n = points.rows();
    let chosen = match (k.k, k.select_k) {
        (Some(k), _) => k,
        (None, None) => return Err(CliError::Usage("one of --k or --select-k is required".into())),
        (None, Some(sel)) => {
            if k.k_max < 2 {
                return Err(CliError::flag("--k-max", "must be at least 2"));
            }
            let k_max = k.k_max.min(n);
            if k_max < 2 {
                return Err(CliError::Data(format!("{n} points are too few to select k")));
            }
            let picked = match sel {
                SelectK::Silhouette => select_k_silhouette(points, k_max, seed).map(|(k, _)| k),
                SelectK::Elbow => select_k_elbow(points, k_max, seed),
                SelectK::Gap => {
                    if k.gap_b == 0 {
                        return Err(CliError::flag("--gap-b", "must be at least 1"));
                    }
                    gap_statistic(points, k_max, k.gap_b, seed).map(|g| g.k)
                }
            }
            .map_err(|e| CliError::Data(e.to_string()))?;
            log::info!("selected k = {picked}");
            picked
        }
    };
    if chosen == 0 {
        return Err(CliError::flag("--k", "must be at least 1"));
    }
    if chosen > n {
        return Err(CliError::Data(format!("k = {chosen} exceeds the {n} embedded entities")));
    }
    Ok(chosen)
}

fn write_clusters(io: &ClusterIo, names: &[String], model: &ClusterModel, extra: serde_json::Value) -> Result<()> {
    write_output(&io.out, &model.assignments_csv(names))?;
    if let Some(path) = &io.summary {
        let mut summary = json!({
            "k": model.k,
            "silhouette": model.silhouette,
            "inertia": model.inertia,
            "sizes": model.cluster_sizes(),
        });
        if let (Some(obj), serde_json::Value::Object(more)) = (summary.as_object_mut(), extra) {
            obj.extend(more);
        }
        write_output(path, &json_text(&summary))?;
    }
    Ok(())
}

fn linkage(l: LinkageArg) -> Linkage {
    match l {
        LinkageArg::Single => Linkage::Single,
        LinkageArg::Complete => Linkage::Complete,
        LinkageArg::Average => Linkage::Average,
    }
}

fn cluster(c: &ClusterCommand, seed: u64) -> Result<()> {
    match c {
        ClusterCommand::Kmeans { io, k, max_iter, n_init } => {
            let (names, points) = load_embeddings(&io.embeddings)?;
            if *n_init == 0 {
                return Err(CliError::flag("--n-init", "must be at least 1"));
            }
            let k = choose_k(&points, k, seed)?;
            let model = kmeans_with(&points, &KMeansConfig { k, max_iter: *max_iter, n_init: *n_init, seed })
                .map_err(|e| CliError::at(&io.embeddings, e.to_string()))?;
            write_clusters(io, &names, &model, json!({}))
        }
        ClusterCommand::Agglo { io, k, linkage: l } => {
            let (names, points) = load_embeddings(&io.embeddings)?;
            let k = choose_k(&points, k, seed)?;
            let model =
                agglomerative(&points, k, linkage(*l)).map_err(|e| CliError::at(&io.embeddings, e.to_string()))?;
            write_clusters(io, &names, &model, json!({}))
        }
        ClusterCommand::Excut { io, k, graph, targets, max_iters, top_m, eta, rules } => {
            if !(0.0..=1.0).contains(eta) {
                return Err(CliError::flag("--eta", "must lie in [0, 1]"));
            }
            if *top_m == 0 {
                return Err(CliError::flag("--top-m", "must be at least 1"));
            }
            let g = graphdir::load(graph)?;
            let file = EmbeddingFile::from_json(&read_input(&io.embeddings)?)
                .map_err(|e| CliError::at(&io.embeddings, e.to_string()))?;
            let emb = file.table_for(g.entities()).map_err(|e| CliError::at(&io.embeddings, e.to_string()))?;
            let target_ids: Option<Vec<EntityId>> = match targets {
                None => None,
                Some(path) => Some(
                    read_input(path)?
                        .lines()
                        .enumerate()
                        .filter(|(_, l)| !l.trim().is_empty())
                        .map(|(i, l)| {
                            g.entity_id(&kgraph_core::graph::canonicalize(l)).ok_or_else(|| {
                                CliError::at(path, Located::line(i + 1, format!("unknown entity `{}`", l.trim())))
                            })
                        })
                        .collect::<Result<_>>()?,
                ),
            };
            let ids: Vec<EntityId> =
                target_ids.clone().unwrap_or_else(|| (0..g.entity_count()).map(EntityId).collect());
            let mut sub = EmbeddingTable::zeros(0, emb.dim());
            for e in &ids {
                sub.push_row(emb.row(e.0));
            }
            let k = choose_k(&sub, k, seed)?;
            if k < 2 {
                return Err(CliError::flag("--k", "ExCut needs at least 2 clusters"));
            }
            let config = ExcutConfig { k, max_iters: *max_iters, top_m: *top_m, eta: *eta, seed };
            let result =
                excut_loop(&g, &emb, target_ids.as_deref(), &config).map_err(|e| CliError::Data(e.to_string()))?;
            let names: Vec<String> = result.targets.iter().map(|&e| g.entity_name(e).to_owned()).collect();
            if let Some(path) = rules {
                let doc = json!({
                    "iterations": result.iterations,
                    "changes": result.changes,
                    "labels": result.labels(&g),
                    "clusters": result.rules_json(&g),
                });
                write_output(path, &json_text(&doc))?;
            }
            write_clusters(
                io,
                &names,
                &result.model,
                json!({ "iterations": result.iterations, "labels": result.labels(&g) }),
            )
        }
    }
}

fn predict(p: &PredictCommand, seed: u64) -> Result<()> {
    match p {
        PredictCommand::Relation { model, head, tail, both_directions, top, out } => {
            let (_, ents, rels, m) = load_model(model)?;
            let id = |flag: &str, name: &str| {
                let n = kgraph_core::graph::canonicalize(name);
                ents.iter().position(|e| *e == n).map(EntityId).ok_or_else(|| {
                    CliError::Data(format!("{}: {flag} entity `{n}` is not in the model", model.display()))
                })
            };
            let (h, t) = (id("--head", head)?, id("--tail", tail)?);
            let scores = if *both_directions { predict_relation_both(&m, h, t) } else { predict_relation(&m, h, t) }
                .map_err(|e| CliError::at(model, e.to_string()))?;
            let mut csv = String::from("relation,distance,reversed\n");
            for s in scores.iter().take(top.unwrap_or(usize::MAX)) {
                let _ = writeln!(csv, "{},{},{}", rels[s.relation.0], s.distance, s.reversed);
            }
            write_output(out, &csv)
        }
        PredictCommand::Evaluate { model, test, graph, filtered, direction, hits, sample, format, out } => {
            if hits.contains(&0) {
                return Err(CliError::flag("--hits", "cut-offs must be at least 1"));
            }
            let (_, ents, rels, m) = load_model(model)?;
            let mut vocab = KnowledgeGraph::with_config(GraphConfig { allow_self_loops: true });
            for e in &ents {
                vocab.intern_entity(e).map_err(|e| CliError::at(model, e.to_string()))?;
            }
            for r in &rels {
                vocab.intern_relation(r).map_err(|e| CliError::at(model, e.to_string()))?;
            }
            let test_triples = resolve_all(&vocab, &raw_triples(test)?, test)?;
            let mut known: HashSet<Triple> = test_triples.iter().copied().collect();
            if let Some(dir) = graph {
                let g = graphdir::load(dir)?;
                known.extend(g.triples().filter_map(|t| vocab.resolve(&g.raw(t))));
            }
            let config = EvalConfig {
                mode: if *filtered { RankMode::Filtered } else { RankMode::Raw },
                direction: match direction {
                    DirectionArg::Head => EvalDirection::Head,
                    DirectionArg::Tail => EvalDirection::Tail,
                    DirectionArg::Both => EvalDirection::Both,
                },
                hits: hits.clone(),
                candidates: match sample {
                    None => Candidates::All,
                    Some(size) => Candidates::Sampled { size: *size, seed },
                },
            };
            let report = evaluate(&m, &test_triples, &known, &config).map_err(|e| CliError::at(test, e.to_string()))?;
            let text = match format {
                ReportFormat::Json => report.to_json() + "\n",
                ReportFormat::Csv => report.to_csv(),
            };
            write_output(out, &text)
        }
    }
}

fn update(a: &UpdateArgs, seed: u64) -> Result<()> {
    if a.min_neighbors == 0 {
        return Err(CliError::flag("--min-neighbors", "must be at least 1"));
    }
    let mut g = graphdir::load(&a.graph)?;
    let parsed = graphdir::parse_delta(&read_input(&a.delta)?).map_err(|e| CliError::at(&a.delta, e))?;
    let delta = &parsed.delta;
    let file = TransEModelFile::from_json(&read_input(&a.model)?).map_err(|e| CliError::at(&a.model, e.to_string()))?;
    if file.graph_version != g.version() {
        log::warn!(
            "model was built against graph version {} but {} is at version {}",
            file.graph_version,
            a.graph.display(),
            g.version()
        );
    }
    if let Err(e) = g.apply_delta(delta) {
        return Err(match parsed.failing_line(&g) {
            Some(line) => CliError::at(&a.delta, Located::line(line, e)),
            None => CliError::at(&a.delta, e),
        });
    }
    let dm = DynamicModel::from_file(&file, &g).map_err(|e| CliError::at(&a.model, e.to_string()))?;
    let config = ReconstructionConfig {
        layer: match a.layer {
            LayerArg::Connectivity => Layer::Connectivity,
            LayerArg::Translational => Layer::Translational,
            LayerArg::Composite => Layer::Composite,
        },
        min_neighbors: a.min_neighbors,
        fallback: match a.fallback {
            FallbackArg::Zero => Fallback::Zero,
            FallbackArg::Random => Fallback::Random { seed },
        },
        scope: match a.scope {
            ScopeArg::New => Scope::New,
            ScopeArg::Touched => Scope::Touched,
        },
    };
    let (next, report) = reconstruct_after_delta(&g, &dm, delta, &config);
    for c in &report.changes {
        if let Some(w) = &c.warning {
            log::warn!("{}: {w}", c.entity);
        }
    }
    write_output(&a.out, &(next.to_file(&g).to_json() + "\n"))?;
    graphdir::save(&a.graph, &g)?;
    write_output(&a.report, &(report.to_json() + "\n"))
}

fn client(s: &ServiceArgs) -> Client {
    let c = if s.offline { Client::offline() } else { Client::live() };
    match &s.record {
        Some(dir) => c.recording_to(dir),
        None => c,
    }
}

fn link_error(e: LinkError) -> CliError {
    match e {
        LinkError::InvalidConfidence(c) => CliError::flag("--confidence", format!("{c} is outside [0, 1]")),
        LinkError::EmptyConcept => CliError::Usage("concepts must be non-empty".into()),
        other => CliError::Data(other.to_string()),
    }
}

fn link(l: &LinkCommand) -> Result<()> {
    match l {
        LinkCommand::Dbpedia { text, confidence, service } => {
            let endpoint = service.endpoint.as_deref().map(Endpoint::parse).unwrap_or_else(Endpoint::dbpedia_from_env);
            let out = dbpedia_annotate(&client(service), text, *confidence, &endpoint).map_err(link_error)?;
            write_output(Path::new("-"), &json_text(&serde_json::to_value(out).expect("annotations serialize")))
        }
        LinkCommand::Conceptnet { a, b, service } => {
            let endpoint =
                service.endpoint.as_deref().map(Endpoint::parse).unwrap_or_else(Endpoint::conceptnet_from_env);
            let out = conceptnet_relations(&client(service), a, b, &endpoint).map_err(link_error)?;
            write_output(Path::new("-"), &json_text(&json!(out)))
        }
    }
}

fn export(a: &ExportArgs) -> Result<()> {
    let g = graphdir::load(&a.graph)?;
    let text = match a.format {
        ExportFormat::Dot => to_dot(&g),
        ExportFormat::Graphml => to_graphml(&g),
        ExportFormat::Ntriples => to_ntriples(&g),
        ExportFormat::Tsv => to_tsv(&g),
    };
    write_output(&a.out, &text)
}

fn report(a: &ReportArgs, seed: u64) -> Result<()> {
    if a.k < 2 {
        return Err(CliError::flag("--k", "must be at least 2"));
    }
    let mut tables = Vec::new();
    for spec in &a.embeddings {
        let (name, path) = spec
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| CliError::flag("--embeddings", format!("`{spec}` is not name=file")))?;
        let (_, table) = load_embeddings(Path::new(path))?;
        if a.k > table.rows() {
            return Err(CliError::Data(format!("{path}: k = {} exceeds the {} embedded entities", a.k, table.rows())));
        }
        tables.push((name.to_owned(), table));
    }
    let report =
        clustering_report(&tables, a.k, linkage(a.linkage), seed).map_err(|e| CliError::Data(e.to_string()))?;
    let text = match a.format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
    };
    write_output(&a.out, &text)
}
