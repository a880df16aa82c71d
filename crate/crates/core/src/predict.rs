//! Relation prediction between entity pairs and link-prediction evaluation
//! (MRR, MR, Hits@k) over a trained TransE model.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EntityId, RelationId, Triple};
use crate::rng;
use crate::transe::TransEModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("unknown entity {0}")]
    UnknownEntity(usize),
    #[error("unknown relation {0}")]
    UnknownRelation(usize),
    #[error("true entity is not among the candidates")]
    TrueEntityMissing,
    #[error("empty test set")]
    EmptyTestSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationScore {
    pub relation: RelationId,
    pub distance: f64,
    /// Scored as `(t, r, h)` rather than `(h, r, t)`.
    pub reversed: bool,
}

fn check_entity(model: &TransEModel, e: EntityId) -> Result<(), PredictError> {
    if e.0 >= model.entity_count() {
        Err(PredictError::UnknownEntity(e.0))
    } else {
        Ok(())
    }
}

fn sort_scores(scores: &mut [RelationScore]) {
    scores.sort_by(|a, b| {
        a.distance.total_cmp(&b.distance).then(a.relation.0.cmp(&b.relation.0)).then(a.reversed.cmp(&b.reversed))
    });
}

/// Every relation scored between `h` and `t`, best (smallest distance) first;
/// ties go to the lower relation index.
pub fn predict_relation(model: &TransEModel, h: EntityId, t: EntityId) -> Result<Vec<RelationScore>, PredictError> {
    check_entity(model, h)?;
    check_entity(model, t)?;
    let mut out: Vec<RelationScore> = (0..model.relation_count())
        .map(|r| RelationScore {
            relation: RelationId(r),
            distance: model.score_unchecked(h, RelationId(r), t),
            reversed: false,
        })
        .collect();
    sort_scores(&mut out);
    Ok(out)
}

/// Both orientations ranked together; the head is the global minimum.
pub fn predict_relation_both(
    model: &TransEModel,
    a: EntityId,
    b: EntityId,
) -> Result<Vec<RelationScore>, PredictError> {
    let mut out = predict_relation(model, a, b)?;
    out.extend(predict_relation(model, b, a)?.into_iter().map(|s| RelationScore { reversed: true, ..s }));
    sort_scores(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    #[default]
    Raw,
    Filtered,
}

/// Which end of a triple is being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Head,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalDirection {
    Head,
    Tail,
    #[default]
    Both,
}

fn replace(triple: Triple, slot: Slot, e: EntityId) -> Triple {
    match slot {
        Slot::Head => Triple { head: e, ..triple },
        Slot::Tail => Triple { tail: e, ..triple },
    }
}

/// 1-based rank of the true entity at `slot` among `candidates`, sorted by
/// ascending score. Ties count against the true entity. In filtered mode,
/// candidates forming a triple in `known` (other than the test triple) are
/// dropped first.
pub fn rank_entity(
    model: &TransEModel,
    triple: Triple,
    slot: Slot,
    candidates: &[EntityId],
    mode: RankMode,
    known: &HashSet<Triple>,
) -> Result<usize, PredictError> {
    check_entity(model, triple.head)?;
    check_entity(model, triple.tail)?;
    if triple.relation.0 >= model.relation_count() {
        return Err(PredictError::UnknownRelation(triple.relation.0));
    }
    let truth = match slot {
        Slot::Head => triple.head,
        Slot::Tail => triple.tail,
    };
    if !candidates.contains(&truth) {
        return Err(PredictError::TrueEntityMissing);
    }
    let true_score = model.score_unchecked(triple.head, triple.relation, triple.tail);
    let mut rank = 1;
    for &c in candidates {
        if c == truth {
            continue;
        }
        check_entity(model, c)?;
        let t = replace(triple, slot, c);
        if mode == RankMode::Filtered && known.contains(&t) {
            continue;
        }
        if model.score_unchecked(t.head, t.relation, t.tail) <= true_score {
            rank += 1;
        }
    }
    Ok(rank)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Candidates {
    /// Every entity in the model vocabulary.
    #[default]
    All,
    /// `size` random entities plus the true one; not comparable with `All`.
    Sampled { size: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mode: RankMode,
    pub direction: EvalDirection,
    pub hits: Vec<usize>,
    pub candidates: Candidates,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: RankMode::Raw,
            direction: EvalDirection::Both,
            hits: vec![1, 3, 10],
            candidates: Candidates::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub mrr: f64,
    pub mr: f64,
    pub hits: BTreeMap<usize, f64>,
    pub mode: RankMode,
    pub direction: EvalDirection,
    pub count: usize,
    pub sampled: bool,
}

impl RankingReport {
    pub fn from_ranks(
        ranks: &[usize],
        hits: &[usize],
        mode: RankMode,
        direction: EvalDirection,
    ) -> Result<Self, PredictError> {
        if ranks.is_empty() {
            return Err(PredictError::EmptyTestSet);
        }
        let n = ranks.len() as f64;
        Ok(RankingReport {
            mrr: ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n,
            mr: ranks.iter().sum::<usize>() as f64 / n,
            hits: hits.iter().map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / n)).collect(),
            mode,
            direction,
            count: ranks.len(),
            sampled: false,
        })
    }

    pub fn hits_at(&self, k: usize) -> Option<f64> {
        self.hits.get(&k).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub head: Option<RankingReport>,
    pub tail: Option<RankingReport>,
    pub combined: RankingReport,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per direction present plus the combined row.
    pub fn to_csv(&self) -> String {
        let ks: Vec<usize> = self.combined.hits.keys().copied().collect();
        let mut out = String::from("direction,mode,count,mrr,mr");
        for k in &ks {
            let _ = write!(out, ",hits@{k}");
        }
        out.push('\n');
        let rows = [("head", self.head.as_ref()), ("tail", self.tail.as_ref()), ("both", Some(&self.combined))];
        for (name, report) in rows {
            let Some(r) = report else { continue };
            let mode = match r.mode {
                RankMode::Raw => "raw",
                RankMode::Filtered => "filtered",
            };
            let mode = if r.sampled { format!("{mode}-sampled") } else { mode.to_owned() };
            let _ = write!(out, "{name},{mode},{},{},{}", r.count, r.mrr, r.mr);
            for k in &ks {
                let _ = write!(out, ",{}", r.hits_at(*k).unwrap_or(f64::NAN));
            }
            out.push('\n');
        }
        out
    }
}

/// `dataset,MRR,Hit@10` summary table.
pub fn summary_table(rows: &[(&str, &RankingReport)]) -> String {
    let mut out = String::from("dataset,MRR,Hit@10\n");
    for (name, r) in rows {
        let hits = r.hits_at(10).map(|h| format!("{h:.3}")).unwrap_or_default();
        let _ = writeln!(out, "{name},{:.3},{hits}", r.mrr);
    }
    out
}

fn candidate_list(model: &TransEModel, truth: EntityId, candidates: Candidates, index_in_run: u64) -> Vec<EntityId> {
    let n = model.entity_count();
    match candidates {
        Candidates::All => (0..n).map(EntityId).collect(),
        Candidates::Sampled { size, seed } => {
            let mut rng = rng::stream(seed, index_in_run);
            let mut out: Vec<EntityId> = index::sample(&mut rng, n, size.min(n)).into_iter().map(EntityId).collect();
            if !out.contains(&truth) {
                out.push(truth);
            }
            out
        }
    }
}

/// Rank every test triple in the configured directions.
pub fn evaluate(
    model: &TransEModel,
    test: &[Triple],
    known: &HashSet<Triple>,
    config: &EvalConfig,
) -> Result<EvalReport, PredictError> {
    if test.is_empty() {
        return Err(PredictError::EmptyTestSet);
    }
    let slots: &[Slot] = match config.direction {
        EvalDirection::Head => &[Slot::Head],
        EvalDirection::Tail => &[Slot::Tail],
        EvalDirection::Both => &[Slot::Head, Slot::Tail],
    };
    let mut per_slot = Vec::new();
    for (s, &slot) in slots.iter().enumerate() {
        let ranks: Vec<usize> = test
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                let truth = if slot == Slot::Head { t.head } else { t.tail };
                check_entity(model, truth)?;
                let cands = candidate_list(model, truth, config.candidates, (i * 2 + s) as u64);
                rank_entity(model, t, slot, &cands, config.mode, known)
            })
            .collect::<Result<_, _>>()?;
        per_slot.push((slot, ranks));
    }
    let sampled = matches!(config.candidates, Candidates::Sampled { .. });
    let report = |ranks: &[usize], direction| {
        RankingReport::from_ranks(ranks, &config.hits, config.mode, direction).map(|r| RankingReport { sampled, ..r })
    };
    let all: Vec<usize> = per_slot.iter().flat_map(|(_, r)| r.iter().copied()).collect();
    let mut out = EvalReport { head: None, tail: None, combined: report(&all, config.direction)? };
    for (slot, ranks) in &per_slot {
        match slot {
            Slot::Head => out.head = Some(report(ranks, EvalDirection::Head)?),
            Slot::Tail => out.tail = Some(report(ranks, EvalDirection::Tail)?),
        }
    }
    Ok(out)
}
