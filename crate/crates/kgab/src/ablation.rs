//! Deletion strategies: random triple deletion and reasoning-path disruption.
//!
//! Both strategies emit an [`AblationManifest`]: a reproducible record of
//! exactly which triples were removed, keyed by both triple id and labels so
//! a manifest replays onto a freshly rebuilt graph. Random deletion removes a
//! uniform sample of a fixed fraction of triples. Path disruption walks the
//! question list in order, finds the shortest topic-to-answer reasoning paths
//! with BFS, picks one path and one of its triples at random (seeded per
//! question), and removes that triple — cutting a critical step out of the
//! reasoning chain.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{resolve_answer_ids, resolve_topic_ids, Question};
use crate::error::{Error, Result};
use crate::kg::{Kg, KgView, TripleId};
use crate::path::{shortest_paths_multi, DirectionMode};
use crate::text::question_seed;

/// Which deletion strategy produced a manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    PathDisruption,
}

/// One removed triple, recorded by id and by labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedTriple {
    pub triple_id: u32,
    pub head: String,
    pub relation: String,
    pub tail: String,
}

/// Why a question produced no removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Topic or answer labels do not resolve in the graph.
    EntitiesMissing,
    /// No topic-to-answer path within the hop bound on the current view.
    Unreachable,
    /// A topic entity is itself an answer entity; there is no triple to cut.
    ZeroLengthPath,
}

/// Per-question outcome of path disruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuestionOutcome {
    Removed {
        /// Rendered form of the disrupted path.
        selected_path: String,
        removed_triple: RemovedTriple,
        /// True when another question already removed the same triple
        /// (possible only in per-question scope).
        shared: bool,
    },
    Skipped { skipped: SkipReason },
}

/// Whether disruptions accumulate into one view or are drawn independently
/// per question against the intact graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisruptionScope {
    /// All removals accumulate; later questions see earlier deletions.
    #[default]
    Cumulative,
    /// Each question samples against the intact graph; removals are unioned.
    PerQuestion,
}

/// Reproducible record of one ablation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationManifest {
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub seed: u64,
    /// Removed triples in canonical (ascending id) order.
    pub removed: Vec<RemovedTriple>,
    /// Present for path disruption only; keyed by question id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_question: BTreeMap<String, QuestionOutcome>,
}

impl AblationManifest {
    /// Removed triple ids as a set.
    pub fn removed_ids(&self) -> BTreeSet<TripleId> {
        self.removed.iter().map(|r| TripleId(r.triple_id)).collect()
    }

    /// Replays the manifest onto `kg`, resolving each removed triple by its
    /// labels and cross-checking the recorded id. Replay therefore fails
    /// loudly when pointed at a different graph.
    pub fn apply<'a>(&self, kg: &'a Kg) -> Result<KgView<'a>> {
        let mut ids = Vec::with_capacity(self.removed.len());
        for r in &self.removed {
            let triple = kg
                .triple_by_labels(&r.head, &r.relation, &r.tail)
                .ok_or_else(|| {
                    Error::consistency(format!(
                        "manifest triple ({}, {}, {}) not present in the graph",
                        r.head, r.relation, r.tail
                    ))
                })?;
            if triple.id.0 != r.triple_id {
                return Err(Error::consistency(format!(
                    "manifest triple id {} does not match graph id {} for ({}, {}, {})",
                    r.triple_id, triple.id.0, r.head, r.relation, r.tail
                )));
            }
            ids.push(triple.id);
        }
        kg.apply_mask(ids)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("bad manifest: {e}")))
    }
}

fn removed_record(kg: &Kg, id: TripleId) -> RemovedTriple {
    let t = &kg.triples()[id.index()];
    RemovedTriple {
        triple_id: id.0,
        head: kg.entity_label(t.head).to_string(),
        relation: kg.relation_label(t.relation).to_string(),
        tail: kg.entity_label(t.tail).to_string(),
    }
}

fn sorted_removed(kg: &Kg, ids: &BTreeSet<TripleId>) -> Vec<RemovedTriple> {
    ids.iter().map(|&id| removed_record(kg, id)).collect()
}

/// `round_half_up(rate * n)`, with a tiny epsilon so decimal rates whose
/// binary representation lands just below an exact half still round up.
fn deletion_count(rate: f64, n: usize) -> usize {
    (rate * n as f64 + 0.5 + 1e-9).floor() as usize
}

/// Removes `round_half_up(rate * |kg|)` triples, sampled uniformly without
/// replacement. Fully determined by the graph's canonical order, the rate,
/// and the seed.
pub fn random_deletion(kg: &Kg, rate: f64, seed: u64) -> Result<AblationManifest> {
    random_deletion_with(kg, rate, seed, false)
}

/// Like [`random_deletion`]; with `nested` set, samples at different rates
/// under the same seed are prefixes of one seeded permutation, so a 5% mask
/// is a subset of the 10% mask (variance-reduced rate comparisons).
pub fn random_deletion_with(
    kg: &Kg,
    rate: f64,
    seed: u64,
    nested: bool,
) -> Result<AblationManifest> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::config(format!(
            "deletion rate must be within [0, 1], got {rate}"
        )));
    }
    let n = kg.triple_count();
    let k = deletion_count(rate, n).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<u32> = (0..n as u32).collect();
    // Partial Fisher-Yates: the first k slots are a uniform sample. With
    // `nested` the full permutation is drawn so prefixes nest across rates.
    let shuffle_upto = if nested { n } else { k };
    for i in 0..shuffle_upto.min(n.saturating_sub(1)) {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    let ids: BTreeSet<TripleId> = indices[..k].iter().map(|&i| TripleId(i)).collect();
    Ok(AblationManifest {
        strategy: Strategy::Random,
        rate: Some(rate),
        seed,
        removed: sorted_removed(kg, &ids),
        per_question: BTreeMap::new(),
    })
}

/// Disrupts one shortest reasoning path per question: for each question in
/// dataset order, BFS the shortest topic-to-answer paths on the current view,
/// pick one path uniformly and one of its triples uniformly (seeded by
/// `(seed, question id)`), and remove that triple. Unresolvable or
/// unreachable questions are recorded as skipped, never fatal.
pub fn disrupt_paths(
    kg: &Kg,
    questions: &[Question],
    seed: u64,
    max_hops: usize,
    mode: DirectionMode,
) -> Result<AblationManifest> {
    disrupt_paths_with(kg, questions, seed, max_hops, mode, DisruptionScope::Cumulative)
}

pub fn disrupt_paths_with(
    kg: &Kg,
    questions: &[Question],
    seed: u64,
    max_hops: usize,
    mode: DirectionMode,
    scope: DisruptionScope,
) -> Result<AblationManifest> {
    if max_hops == 0 {
        return Err(Error::config("max_hops must be at least 1"));
    }
    let mut removed: BTreeSet<TripleId> = BTreeSet::new();
    let mut per_question = BTreeMap::new();

    for question in questions {
        let outcome = (|| -> Result<QuestionOutcome> {
            let topics = resolve_topic_ids(kg, question);
            let answers = resolve_answer_ids(kg, question);
            if topics.is_empty() || answers.is_empty() {
                return Ok(QuestionOutcome::Skipped {
                    skipped: SkipReason::EntitiesMissing,
                });
            }
            let view = match scope {
                DisruptionScope::Cumulative => kg.apply_mask(removed.iter().copied())?,
                DisruptionScope::PerQuestion => kg.view(),
            };
            let paths = shortest_paths_multi(&view, &topics, &answers, max_hops, mode)?;
            let Some(first) = paths.first() else {
                return Ok(QuestionOutcome::Skipped {
                    skipped: SkipReason::Unreachable,
                });
            };
            if first.is_empty() {
                return Ok(QuestionOutcome::Skipped {
                    skipped: SkipReason::ZeroLengthPath,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(question_seed(seed, &question.id));
            let path = &paths[rng.gen_range(0..paths.len())];
            let step = &path.steps()[rng.gen_range(0..path.len())];
            let shared = !removed.insert(step.triple);
            Ok(QuestionOutcome::Removed {
                selected_path: path.render(kg),
                removed_triple: removed_record(kg, step.triple),
                shared,
            })
        })()?;
        per_question.insert(question.id.clone(), outcome);
    }

    Ok(AblationManifest {
        strategy: Strategy::PathDisruption,
        rate: None,
        seed,
        removed: sorted_removed(kg, &removed),
        per_question,
    })
}
