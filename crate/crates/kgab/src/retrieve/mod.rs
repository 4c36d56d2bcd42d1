//! Retrieval pipelines over an ablated graph view.
//!
//! Three desk-scale pipelines produce evidence for the generator:
//! - [`rog_retrieve`]: plan relation paths with a [`Planner`], ground them in
//!   the graph, and keep the grounded reasoning paths.
//! - [`tog_retrieve`]: iterative beam search from the topic entities, pruning
//!   expansions with a [`Scorer`].
//! - [`gretriever_retrieve`]: rank the topic neighborhood with an
//!   [`Embedder`], convert ranks to prizes, and extract a compact subgraph
//!   with a prize-collecting Steiner tree.
//!
//! A fourth, [`oracle_retrieve`], returns the true shortest topic-to-answer
//! paths in the queried view; with the mock generator it turns end-to-end
//! accuracy into a pure function of answer reachability.
//!
//! Evidence text always serializes the retrieved triples through the fixed
//! template `head --relation--> tail`, one line per triple, in canonical
//! order. Reasoning paths additionally render through the arrow-chain form
//! (`e0 --[r1]--> e1`) inside traces, adapter prompts, and reports.

mod builtin;
mod gretriever;
mod llm_backed;
mod oracle;
mod rog;
mod tog;

pub use builtin::{cosine, HashedEmbedder, LexicalScorer, OraclePlanner, EMBED_DIMS};
pub use gretriever::{gretriever_retrieve, GRetrieverParams};
pub use llm_backed::{LlmPlanner, LlmScorer};
pub use oracle::oracle_retrieve;
pub use rog::rog_retrieve;
pub use tog::{tog_retrieve, TogParams};

use serde::{Deserialize, Serialize};

use crate::data::Question;
use crate::error::{Error, Result};
use crate::kg::{Kg, KgView, TripleId};
use crate::path::ReasoningPath;

/// Which pipeline produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMethod {
    Rog,
    Tog,
    Gretriever,
    Oracle,
    /// Retrieval disabled; the generator sees no evidence.
    #[serde(rename = "none")]
    NoRetrieval,
}

impl std::fmt::Display for RetrievalMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RetrievalMethod::Rog => "rog",
            RetrievalMethod::Tog => "tog",
            RetrievalMethod::Gretriever => "gretriever",
            RetrievalMethod::Oracle => "oracle",
            RetrievalMethod::NoRetrieval => "none",
        };
        f.write_str(name)
    }
}

/// Produces ranked relation-label sequences for a question.
pub trait Planner: Send + Sync {
    fn plan(&self, question: &Question) -> Result<Vec<Vec<String>>>;
}

/// Scores a candidate text against a question; values live in `[0, 1]`.
pub trait Scorer: Send + Sync {
    fn score(&self, question: &str, candidate: &str) -> Result<f64>;
}

/// Maps text to a fixed-length vector.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Per-step log of what a retriever tried and kept.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trace {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<PlanTrace>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub depths: Vec<DepthTrace>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub prizes: Vec<PrizeTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<String>,
}

impl Trace {
    pub fn note(&mut self, message: impl Into<String>) {
        self.notes.push(message.into());
    }
}

/// One plan the planner proposed and how many paths it grounded into.
#[derive(Debug, Clone, Serialize)]
pub struct PlanTrace {
    pub plan: Vec<String>,
    pub grounded: usize,
}

/// One beam-search depth: how many expansions were scored, what survived.
#[derive(Debug, Clone, Serialize)]
pub struct DepthTrace {
    pub depth: usize,
    pub expanded: usize,
    pub kept: Vec<ScoredPath>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredPath {
    pub path: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrizeTrace {
    pub entity: String,
    pub prize: f64,
}

/// What a retriever hands to the generator.
#[derive(Debug, Clone)]
pub struct RetrievalResult {
    pub method: RetrievalMethod,
    /// Reasoning paths (path-based retrievers), canonical order.
    pub paths: Vec<ReasoningPath>,
    /// Retrieved triples in canonical id order. For path-based retrievers
    /// this is the union of the paths' triples.
    pub subgraph: Vec<TripleId>,
    /// One `head --relation--> tail` line per retrieved triple.
    pub evidence_text: String,
    pub trace: Trace,
}

impl RetrievalResult {
    pub fn empty(method: RetrievalMethod) -> Self {
        RetrievalResult {
            method,
            paths: Vec::new(),
            subgraph: Vec::new(),
            evidence_text: String::new(),
            trace: Trace::default(),
        }
    }

    /// Builds a path-based result: dedupes and canonically orders the paths,
    /// collects their triples, and serializes the evidence.
    pub fn from_paths(
        view: &KgView<'_>,
        method: RetrievalMethod,
        mut paths: Vec<ReasoningPath>,
        trace: Trace,
    ) -> Self {
        paths.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        paths.dedup();
        let mut triples: Vec<TripleId> = paths
            .iter()
            .flat_map(|p| p.triple_ids())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        triples.sort_unstable();
        let evidence_text = textualize_subgraph(view.base(), &triples);
        RetrievalResult {
            method,
            paths,
            subgraph: triples,
            evidence_text,
            trace,
        }
    }

    /// Builds a subgraph result from triple ids (canonically reordered).
    pub fn from_subgraph(
        view: &KgView<'_>,
        method: RetrievalMethod,
        mut triples: Vec<TripleId>,
        trace: Trace,
    ) -> Self {
        triples.sort_unstable();
        triples.dedup();
        let evidence_text = textualize_subgraph(view.base(), &triples);
        RetrievalResult {
            method,
            paths: Vec::new(),
            subgraph: triples,
            evidence_text,
            trace,
        }
    }

    /// Soundness check: everything retrieved must exist in the queried view,
    /// paths must chain, and the evidence must re-serialize identically.
    pub fn verify(&self, view: &KgView<'_>) -> Result<()> {
        for path in &self.paths {
            path.verify(view)?;
        }
        for &t in &self.subgraph {
            if !view.contains(t) {
                return Err(Error::consistency(format!(
                    "retrieved triple {t} is absent from the queried view"
                )));
            }
        }
        if self.evidence_text != textualize_subgraph(view.base(), &self.subgraph) {
            return Err(Error::consistency(
                "evidence text does not match the retrieved subgraph",
            ));
        }
        Ok(())
    }
}

/// Serializes triples through the fixed template, one line each:
/// `head --relation--> tail`, canonical id order, newline-separated.
pub fn textualize_subgraph(kg: &Kg, triples: &[TripleId]) -> String {
    let mut lines = Vec::with_capacity(triples.len());
    for &id in triples {
        let t = &kg.triples()[id.index()];
        lines.push(format!(
            "{} --{}--> {}",
            kg.entity_label(t.head),
            kg.relation_label(t.relation),
            kg.entity_label(t.tail)
        ));
    }
    lines.join("\n")
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::metrics::AnswerEntity;

    pub fn sibling_kg() -> Kg {
        Kg::build(vec![
            ("JustinBieber", "has_brother", "JaxonBieber"),
            ("JustinBieber", "has_parent", "JeremyBieber"),
            ("JeremyBieber", "has_child", "JaxonBieber"),
        ])
        .unwrap()
    }

    pub fn brother_question() -> Question {
        Question {
            id: "q-brother".into(),
            text: "Who is the brother of Justin Bieber?".into(),
            topic_entities: vec!["JustinBieber".into()],
            answers: vec![AnswerEntity::new("JaxonBieber")],
        }
    }

    pub fn timezone_kg() -> Kg {
        Kg::build(vec![
            ("Nigeria", "time zones", "West Africa Time Zone"),
            ("Nigeria", "administrative division", "Bauchi"),
            ("Bauchi", "time zones", "West Africa Time Zone"),
        ])
        .unwrap()
    }

    pub fn timezone_question() -> Question {
        Question {
            id: "q-tz".into(),
            text: "What is the Nigeria time?".into(),
            topic_entities: vec!["Nigeria".into()],
            answers: vec![AnswerEntity::new("West Africa Time Zone")],
        }
    }
}
