//! Iterative beam search over the graph, treating the scorer as the agent
//! that prunes candidate reasoning paths.

use serde::{Deserialize, Serialize};

use crate::data::{resolve_topic_ids, Question};
use crate::error::{Error, Result};
use crate::path::{DirectionMode, PathStep, ReasoningPath};
use crate::kg::KgView;

use super::{DepthTrace, RetrievalMethod, RetrievalResult, ScoredPath, Scorer, Trace};

/// Beam-search knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TogParams {
    /// Beam width N: paths kept per depth.
    pub beam_width: usize,
    /// Maximum exploration depth D.
    pub max_depth: usize,
    /// Stop early once a beam path ends at an entity the scorer rates at
    /// least this high against the question.
    pub stop_threshold: f64,
    pub mode: DirectionMode,
}

impl Default for TogParams {
    fn default() -> Self {
        TogParams {
            beam_width: 3,
            max_depth: 3,
            stop_threshold: 0.9,
            mode: DirectionMode::Bidirectional,
        }
    }
}

/// Beam search from the topic entities: at each depth every frontier path is
/// expanded one hop, expansions are scored against the question, and the
/// top-N survive (ties keep canonical generation order). The retrieved
/// evidence is every path that was ever kept in a beam, so shorter kept
/// paths are not lost when the search deepens.
pub fn tog_retrieve(
    view: &KgView<'_>,
    question: &Question,
    scorer: &dyn Scorer,
    params: &TogParams,
) -> Result<RetrievalResult> {
    if params.beam_width == 0 {
        return Err(Error::config("beam_width must be at least 1"));
    }
    if params.max_depth == 0 {
        return Err(Error::config("max_depth must be at least 1"));
    }
    let kg = view.base();
    let mut trace = Trace::default();

    let topics = resolve_topic_ids(kg, question);
    if topics.is_empty() {
        trace.note("no topic entity resolved; frontier is empty at depth 0");
        let mut result = RetrievalResult::empty(RetrievalMethod::Tog);
        result.trace = trace;
        return Ok(result);
    }

    let mut frontier: Vec<ReasoningPath> = topics.iter().map(|&t| ReasoningPath::zero(t)).collect();
    let mut kept_pool: Vec<ReasoningPath> = Vec::new();

    for depth in 1..=params.max_depth {
        // Expand every frontier path by one hop, in canonical neighbor order.
        let mut candidates: Vec<ReasoningPath> = Vec::new();
        for path in &frontier {
            for step in view.neighbors(path.end(), direction(params.mode))? {
                if path.contains_entity(step.entity) {
                    continue;
                }
                candidates.push(path.extended(PathStep {
                    relation: step.relation,
                    dir: step.dir,
                    entity: step.entity,
                    triple: step.triple,
                }));
            }
        }
        if candidates.is_empty() {
            trace.note(format!("frontier exhausted at depth {depth}"));
            break;
        }

        let mut scored: Vec<(f64, ReasoningPath)> = Vec::with_capacity(candidates.len());
        for path in candidates {
            let score = scorer.score(&question.text, &path.render(kg))?;
            scored.push((score, path));
        }
        let expanded = scored.len();
        // Stable sort: equal scores preserve canonical generation order.
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        scored.truncate(params.beam_width);

        trace.depths.push(DepthTrace {
            depth,
            expanded,
            kept: scored
                .iter()
                .map(|(score, path)| ScoredPath {
                    path: path.render(kg),
                    score: *score,
                })
                .collect(),
        });

        let beams: Vec<ReasoningPath> = scored.into_iter().map(|(_, p)| p).collect();
        kept_pool.extend(beams.iter().cloned());

        // Sufficiency check on beam endpoints.
        let mut confident = None;
        for path in &beams {
            let end_label = kg.entity_label(path.end());
            if scorer.score(&question.text, end_label)? >= params.stop_threshold {
                confident = Some(end_label.to_string());
                break;
            }
        }
        if let Some(entity) = confident {
            trace.stop_reason = Some(format!(
                "stopped at depth {depth}: endpoint {entity:?} rated sufficient"
            ));
            break;
        }

        frontier = beams;
    }

    if trace.stop_reason.is_none() {
        trace.stop_reason = Some("explored to configured depth".to_string());
    }
    Ok(RetrievalResult::from_paths(
        view,
        RetrievalMethod::Tog,
        kept_pool,
        trace,
    ))
}

fn direction(mode: DirectionMode) -> crate::kg::Direction {
    match mode {
        DirectionMode::ForwardOnly => crate::kg::Direction::Forward,
        DirectionMode::Bidirectional => crate::kg::Direction::Both,
    }
}

#[cfg(test)]
mod tests {
    use super::super::builtin::LexicalScorer;
    use super::super::test_support::*;
    use super::*;
    use crate::path::enumerate_paths;

    struct ConstScorer(f64);

    impl Scorer for ConstScorer {
        fn score(&self, _q: &str, _c: &str) -> Result<f64> {
            Ok(self.0)
        }
    }

    #[test]
    fn narrow_beam_keeps_the_lexically_matching_hop() {
        let kg = sibling_kg();
        let view = kg.view();
        let params = TogParams {
            beam_width: 1,
            max_depth: 1,
            mode: DirectionMode::ForwardOnly,
            ..TogParams::default()
        };
        let result =
            tog_retrieve(&view, &brother_question(), &LexicalScorer, &params).unwrap();
        assert_eq!(result.paths.len(), 1);
        assert_eq!(
            result.paths[0].render(&kg),
            "JustinBieber --[has_brother]--> JaxonBieber"
        );
        let depth = &result.trace.depths[0];
        assert_eq!(depth.expanded, 2);
        assert_eq!(depth.kept.len(), 1);
        result.verify(&view).unwrap();
    }

    #[test]
    fn wide_beam_retains_every_candidate() {
        let kg = sibling_kg();
        let view = kg.view();
        let params = TogParams {
            beam_width: 100,
            max_depth: 1,
            mode: DirectionMode::ForwardOnly,
            ..TogParams::default()
        };
        let result = tog_retrieve(&view, &brother_question(), &ConstScorer(0.5), &params).unwrap();
        assert_eq!(result.paths.len(), 2);
    }

    #[test]
    fn isolated_topic_retrieves_nothing() {
        let kg = crate::kg::Kg::build(vec![("lonely", "r", "lonely"), ("a", "r", "b")]).unwrap();
        let view = kg.view();
        let q = Question {
            id: "q".into(),
            text: "lonely?".into(),
            topic_entities: vec!["lonely".into()],
            answers: vec![crate::metrics::AnswerEntity::new("a")],
        };
        let result = tog_retrieve(&view, &q, &ConstScorer(0.5), &TogParams::default()).unwrap();
        assert!(result.paths.is_empty());
        assert!(result.evidence_text.is_empty());
    }

    #[test]
    fn missing_topic_means_empty_frontier() {
        let kg = sibling_kg();
        let view = kg.view();
        let mut q = brother_question();
        q.topic_entities = vec!["Nobody".into()];
        let result = tog_retrieve(&view, &q, &ConstScorer(0.5), &TogParams::default()).unwrap();
        assert!(result.paths.is_empty());
        assert!(result.trace.notes[0].contains("depth 0"));
    }

    #[test]
    fn unbounded_beam_with_constant_scorer_equals_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(46);
        for _ in 0..15 {
            let rows: Vec<(String, String, String)> = (0..18)
                .map(|_| {
                    (
                        format!("n{}", rng.gen_range(0..6)),
                        format!("r{}", rng.gen_range(0..3)),
                        format!("n{}", rng.gen_range(0..6)),
                    )
                })
                .collect();
            let kg = crate::kg::Kg::build(rows).unwrap();
            let Some(topic) = kg.entity_id("n0") else { continue };
            let q = Question {
                id: "q".into(),
                text: "?".into(),
                topic_entities: vec!["n0".into()],
                answers: vec![crate::metrics::AnswerEntity::new("n1")],
            };
            let view = kg.view();
            let depth = 3;
            let params = TogParams {
                beam_width: usize::MAX,
                max_depth: depth,
                stop_threshold: 2.0, // never fires
                mode: DirectionMode::Bidirectional,
            };
            let result = tog_retrieve(&view, &q, &ConstScorer(0.7), &params).unwrap();
            let expected: std::collections::HashSet<_> =
                enumerate_paths(&view, topic, depth, DirectionMode::Bidirectional)
                    .unwrap()
                    .map(|p| p.sort_key())
                    .collect();
            let got: std::collections::HashSet<_> =
                result.paths.iter().map(|p| p.sort_key()).collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn stop_predicate_halts_the_walk() {
        // Scorer that rates the target endpoint as fully sufficient.
        struct EndpointScorer;
        impl Scorer for EndpointScorer {
            fn score(&self, _q: &str, candidate: &str) -> Result<f64> {
                Ok(if candidate == "JaxonBieber" { 1.0 } else { 0.1 })
            }
        }
        let kg = sibling_kg();
        let view = kg.view();
        let params = TogParams {
            beam_width: 5,
            max_depth: 3,
            stop_threshold: 0.9,
            mode: DirectionMode::ForwardOnly,
        };
        let result =
            tog_retrieve(&view, &brother_question(), &EndpointScorer, &params).unwrap();
        assert!(result
            .trace
            .stop_reason
            .as_deref()
            .unwrap()
            .contains("depth 1"));
        // Only depth-1 beams retrieved.
        assert!(result.paths.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn invalid_params_are_config_errors() {
        let kg = sibling_kg();
        let view = kg.view();
        let mut params = TogParams::default();
        params.beam_width = 0;
        assert!(matches!(
            tog_retrieve(&view, &brother_question(), &ConstScorer(0.1), &params).unwrap_err(),
            Error::Config(_)
        ));
    }
}
