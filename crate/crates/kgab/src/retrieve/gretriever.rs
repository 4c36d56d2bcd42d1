//! Subgraph retrieval: embed the question, rank the topic neighborhood by
//! similarity, convert ranks into node prizes, and extract a compact
//! connected subgraph with a prize-collecting Steiner tree.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::data::{resolve_topic_ids, Question};
use crate::error::{Error, Result};
use crate::kg::{Direction, EntityId, KgView, TripleId};
use crate::pcst::{assign_prizes, solve_pcst, PrizedGraph, SolveMode, EXACT_NODE_GUARD};

use super::{cosine, Embedder, PrizeTrace, RetrievalMethod, RetrievalResult, Trace};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GRetrieverParams {
    /// How many top-ranked candidates receive prizes.
    pub k_nodes: usize,
    /// Candidate pool: entities within this many hops of a topic entity.
    pub hop_radius: usize,
    /// Uniform cost of keeping one edge in the tree.
    pub edge_cost: f64,
}

impl Default for GRetrieverParams {
    fn default() -> Self {
        GRetrieverParams {
            k_nodes: 4,
            hop_radius: 2,
            edge_cost: 0.5,
        }
    }
}

/// Undirected ball of radius `hops` around the sources, topics included.
fn neighborhood(
    view: &KgView<'_>,
    sources: &[EntityId],
    hops: usize,
) -> Result<BTreeSet<EntityId>> {
    let mut seen: BTreeSet<EntityId> = sources.iter().copied().collect();
    let mut frontier: Vec<EntityId> = sources.to_vec();
    for _ in 0..hops {
        let mut next = Vec::new();
        for &e in &frontier {
            for step in view.neighbors(e, Direction::Both)? {
                if seen.insert(step.entity) {
                    next.push(step.entity);
                }
            }
        }
        frontier = next;
    }
    Ok(seen)
}

/// Runs the ranking + PCST pipeline. The solver runs exact when the candidate
/// pool fits under the exact-mode guard, otherwise the cluster-growing
/// approximation.
pub fn gretriever_retrieve(
    view: &KgView<'_>,
    question: &Question,
    embedder: &dyn Embedder,
    params: &GRetrieverParams,
) -> Result<RetrievalResult> {
    if params.k_nodes == 0 {
        return Err(Error::config("k_nodes must be at least 1"));
    }
    if !(1..=2).contains(&params.hop_radius) {
        return Err(Error::config(format!(
            "hop_radius must be 1 or 2, got {}",
            params.hop_radius
        )));
    }
    if !(params.edge_cost > 0.0) {
        return Err(Error::config("edge_cost must be positive"));
    }

    let kg = view.base();
    let mut trace = Trace::default();
    let topics = resolve_topic_ids(kg, question);
    if topics.is_empty() {
        trace.note("no topic entity resolved; no candidate pool");
        let mut result = RetrievalResult::empty(RetrievalMethod::Gretriever);
        result.trace = trace;
        return Ok(result);
    }

    // Candidate pool and similarity ranking.
    let candidates = neighborhood(view, &topics, params.hop_radius)?;
    let question_vec = embedder.embed(&question.text);
    let mut ranked: Vec<(f64, EntityId)> = candidates
        .iter()
        .map(|&e| (cosine(&question_vec, &embedder.embed(kg.entity_label(e))), e))
        .collect();
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let ranking: Vec<EntityId> = ranked.iter().map(|&(_, e)| e).collect();
    let prizes = assign_prizes(&ranking, params.k_nodes)?;
    for &(score, e) in ranked.iter().take(params.k_nodes) {
        trace.prizes.push(PrizeTrace {
            entity: format!("{} (sim {:.4})", kg.entity_label(e), score),
            prize: prizes.get(&e).copied().unwrap_or(0.0),
        });
    }

    // Candidate-induced prized graph: directed triples project to undirected
    // edges with uniform cost; parallel edges collapse to the smallest
    // triple id. Local node ids follow ascending entity id, so the solver's
    // node tie-breaking matches entity order.
    let locals: Vec<EntityId> = candidates.iter().copied().collect();
    let index_of: HashMap<EntityId, usize> =
        locals.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut graph = PrizedGraph::new(
        locals
            .iter()
            .map(|e| prizes.get(e).copied().unwrap_or(0.0))
            .collect(),
    )?;
    let mut edge_triple: Vec<TripleId> = Vec::new();
    let mut pair_seen: HashSet<(usize, usize)> = HashSet::new();
    for triple in view.triples() {
        let (Some(&a), Some(&b)) = (index_of.get(&triple.head), index_of.get(&triple.tail))
        else {
            continue;
        };
        if a == b {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if !pair_seen.insert(pair) {
            continue;
        }
        graph.add_edge(pair.0, pair.1, params.edge_cost)?;
        edge_triple.push(triple.id);
    }

    let mode = if graph.node_count() <= EXACT_NODE_GUARD {
        SolveMode::Exact
    } else {
        SolveMode::Approx
    };
    let solution = solve_pcst(&graph, mode)?;
    trace.note(format!(
        "pcst over {} candidates / {} edges ({}): objective {:.4}, kept {:?}",
        graph.node_count(),
        graph.edges().len(),
        match mode {
            SolveMode::Exact => "exact",
            SolveMode::Approx => "approx",
        },
        solution.objective,
        solution
            .nodes
            .iter()
            .map(|&i| kg.entity_label(locals[i]))
            .collect::<Vec<_>>(),
    ));

    let triples: Vec<TripleId> = solution.edges.iter().map(|&ei| edge_triple[ei]).collect();
    Ok(RetrievalResult::from_subgraph(
        view,
        RetrievalMethod::Gretriever,
        triples,
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::builtin::HashedEmbedder;
    use super::super::test_support::*;
    use super::*;

    /// Embedder that rates one fixed label as identical to any question and
    /// everything else as orthogonal.
    struct PinnedEmbedder {
        favorite: String,
    }

    impl Embedder for PinnedEmbedder {
        fn embed(&self, text: &str) -> Vec<f64> {
            // Dimension 0 marks "question or favorite", dimension 1 the rest.
            if text == self.favorite || text.contains('?') {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        }
    }

    fn masked_timezone_view(kg: &crate::kg::Kg) -> crate::kg::KgView<'_> {
        let gold = kg
            .triple_by_labels("Nigeria", "time zones", "West Africa Time Zone")
            .unwrap()
            .id;
        kg.apply_mask(vec![gold]).unwrap()
    }

    #[test]
    fn lone_top_prize_is_kept_without_edges() {
        // With k=1 and the answer node as the only prize, connecting it costs
        // more than the prize pays: the tree is the prized node alone.
        let kg = timezone_kg();
        let view = masked_timezone_view(&kg);
        let embedder = PinnedEmbedder {
            favorite: "West Africa Time Zone".into(),
        };
        let params = GRetrieverParams {
            k_nodes: 1,
            hop_radius: 2,
            edge_cost: 0.5,
        };
        let result = gretriever_retrieve(&view, &timezone_question(), &embedder, &params).unwrap();
        assert!(result.subgraph.is_empty());
        assert!(result.evidence_text.is_empty());
        let note = result.trace.notes.last().unwrap();
        assert!(note.contains("objective 1.0000"));
        assert!(note.contains("West Africa Time Zone"));
    }

    #[test]
    fn second_prize_funds_the_alternative_route() {
        // Prizing both the topic and the answer makes the two-hop detour the
        // optimum, recovering the alternative route after the gold triple is
        // gone.
        let kg = timezone_kg();
        let view = masked_timezone_view(&kg);
        let params = GRetrieverParams {
            k_nodes: 2,
            hop_radius: 2,
            edge_cost: 0.4,
        };
        let result =
            gretriever_retrieve(&view, &timezone_question(), &HashedEmbedder, &params).unwrap();
        assert_eq!(result.subgraph.len(), 2);
        assert_eq!(
            result.evidence_text,
            "Nigeria --administrative division--> Bauchi\nBauchi --time zones--> West Africa Time Zone"
        );
        result.verify(&view).unwrap();
    }

    #[test]
    fn expensive_edges_collapse_to_the_topic_alone() {
        let kg = sibling_kg();
        let view = kg.view();
        let embedder = PinnedEmbedder {
            favorite: "JustinBieber".into(),
        };
        let params = GRetrieverParams {
            k_nodes: 1,
            hop_radius: 1,
            edge_cost: 50.0,
        };
        let result =
            gretriever_retrieve(&view, &brother_question(), &embedder, &params).unwrap();
        assert!(result.subgraph.is_empty());
        assert!(result.trace.notes.last().unwrap().contains("JustinBieber"));
    }

    #[test]
    fn topic_without_neighbors_yields_topic_only_subgraph() {
        let kg = crate::kg::Kg::build(vec![("T", "r", "T"), ("a", "r", "b")]).unwrap();
        let view = kg.view();
        let q = Question {
            id: "q".into(),
            text: "T?".into(),
            topic_entities: vec!["T".into()],
            answers: vec![crate::metrics::AnswerEntity::new("a")],
        };
        let result =
            gretriever_retrieve(&view, &q, &HashedEmbedder, &GRetrieverParams::default())
                .unwrap();
        assert!(result.subgraph.is_empty());
        assert!(result.evidence_text.is_empty());
        assert!(result.trace.notes.last().unwrap().contains("\"T\""));
    }

    #[test]
    fn absent_topic_is_an_empty_result() {
        let kg = sibling_kg();
        let view = kg.view();
        let mut q = brother_question();
        q.topic_entities = vec!["Martian".into()];
        let result =
            gretriever_retrieve(&view, &q, &HashedEmbedder, &GRetrieverParams::default())
                .unwrap();
        assert!(result.subgraph.is_empty());
        assert!(!result.trace.notes.is_empty());
    }

    #[test]
    fn hop_radius_bounds_the_candidate_pool() {
        let kg = crate::kg::Kg::build(vec![
            ("a", "r", "b"),
            ("b", "r", "c"),
            ("c", "r", "d"),
        ])
        .unwrap();
        let view = kg.view();
        let one = neighborhood(&view, &[kg.entity_id("a").unwrap()], 1).unwrap();
        assert_eq!(one.len(), 2);
        let two = neighborhood(&view, &[kg.entity_id("a").unwrap()], 2).unwrap();
        assert_eq!(two.len(), 3);
    }

    #[test]
    fn parameter_validation() {
        let kg = sibling_kg();
        let view = kg.view();
        for params in [
            GRetrieverParams { k_nodes: 0, ..GRetrieverParams::default() },
            GRetrieverParams { hop_radius: 3, ..GRetrieverParams::default() },
            GRetrieverParams { edge_cost: 0.0, ..GRetrieverParams::default() },
        ] {
            assert!(matches!(
                gretriever_retrieve(&view, &brother_question(), &HashedEmbedder, &params)
                    .unwrap_err(),
                Error::Config(_)
            ));
        }
    }

    #[test]
    fn output_is_a_tree_containing_an_anchor() {
        // Random graphs: result must be connected, acyclic, and contain a
        // topic entity or the top-prize node (or be empty).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for round in 0..20 {
            let rows: Vec<(String, String, String)> = (0..25)
                .map(|_| {
                    (
                        format!("n{}", rng.gen_range(0..8)),
                        format!("r{}", rng.gen_range(0..3)),
                        format!("n{}", rng.gen_range(0..8)),
                    )
                })
                .collect();
            let kg = crate::kg::Kg::build(rows).unwrap();
            if kg.entity_id("n0").is_none() {
                continue;
            }
            let q = Question {
                id: format!("q{round}"),
                text: "which n1?".into(),
                topic_entities: vec!["n0".into()],
                answers: vec![crate::metrics::AnswerEntity::new("n1")],
            };
            let view = kg.view();
            let params = GRetrieverParams {
                k_nodes: 3,
                hop_radius: 2,
                edge_cost: 0.5,
            };
            let result = gretriever_retrieve(&view, &q, &HashedEmbedder, &params).unwrap();
            result.verify(&view).unwrap();
            // Tree shape: n triples connect n+1 entities, no cycles.
            if result.subgraph.is_empty() {
                continue;
            }
            let mut nodes = std::collections::HashSet::new();
            let mut uf_pairs = Vec::new();
            for &t in &result.subgraph {
                let triple = kg.triple(t).unwrap();
                nodes.insert(triple.head);
                nodes.insert(triple.tail);
                uf_pairs.push((triple.head, triple.tail));
            }
            assert_eq!(result.subgraph.len() + 1, nodes.len(), "acyclic");
            let mut reach: std::collections::HashSet<_> =
                [*nodes.iter().next().unwrap()].into_iter().collect();
            loop {
                let before = reach.len();
                for &(a, b) in &uf_pairs {
                    if reach.contains(&a) {
                        reach.insert(b);
                    }
                    if reach.contains(&b) {
                        reach.insert(a);
                    }
                }
                if reach.len() == before {
                    break;
                }
            }
            assert_eq!(reach.len(), nodes.len(), "connected");

            // Anchoring: the tree holds a topic entity or the top-prize node.
            let topic = kg.entity_id("n0").unwrap();
            let pool = neighborhood(&view, &[topic], params.hop_radius).unwrap();
            let q_vec = HashedEmbedder.embed(&q.text);
            let top_prize = pool
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    let sa = cosine(&q_vec, &HashedEmbedder.embed(kg.entity_label(a)));
                    let sb = cosine(&q_vec, &HashedEmbedder.embed(kg.entity_label(b)));
                    sa.partial_cmp(&sb).unwrap().then(b.cmp(&a))
                })
                .unwrap();
            assert!(nodes.contains(&topic) || nodes.contains(&top_prize));
        }
    }
}
