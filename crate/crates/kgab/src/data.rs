//! QA dataset ingestion and synthetic benchmark generation.
//!
//! Questions arrive as JSON lines, one record per line:
//!
//! ```text
//! {"id":"...","question":"...","topic":["..."],"answers":[{"label":"...","aliases":["..."]}]}
//! ```
//!
//! The synthetic generator builds gadget graphs with controlled redundancy:
//! each question gets a topic entity, an answer entity, one direct triple,
//! and `redundancy` disjoint two-hop alternatives, plus distractor triples
//! over a separate entity pool. Because the gadgets are disjoint, answer
//! reachability after any deletion is exactly computable, which is what the
//! closed-loop acceptance checks lean on.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, Kg};
use crate::metrics::{AnswerEntity, AnswerSet};

/// Synthetic relation vocabulary, fixed so fixtures stay human-readable.
pub const REL_DIRECT: &str = "rel_direct";
pub const REL_P: &str = "rel_p";
pub const REL_C: &str = "rel_c";
pub const REL_NOISE: &str = "rel_noise";

/// Guard on synthetic graph size.
pub const SYNTH_TRIPLE_GUARD: usize = 1_000_000;

/// One benchmark question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    #[serde(rename = "question")]
    pub text: String,
    #[serde(rename = "topic")]
    pub topic_entities: Vec<String>,
    pub answers: AnswerSet,
}

/// Loads a QA file, preserving record order. Malformed or empty-answer
/// records fail with the offending line number.
pub fn load_questions(path: impl AsRef<Path>) -> Result<Vec<Question>> {
    let content = std::fs::read_to_string(path)?;
    parse_questions(&content)
}

/// Parses QA JSON-lines text. Blank lines are skipped.
pub fn parse_questions(content: &str) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    let mut seen_ids = HashSet::new();
    for (line0, raw) in content.lines().enumerate() {
        let line = line0 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(raw)
            .map_err(|e| Error::parse(line, format!("bad question record: {e}")))?;
        if q.id.trim().is_empty() {
            return Err(Error::parse(line, "question id is empty"));
        }
        if q.topic_entities.is_empty() {
            return Err(Error::parse(line, "question has no topic entities"));
        }
        if q.answers.is_empty() {
            return Err(Error::parse(line, "question has no answers"));
        }
        if !seen_ids.insert(q.id.clone()) {
            return Err(Error::parse(line, format!("duplicate question id {:?}", q.id)));
        }
        out.push(q);
    }
    Ok(out)
}

/// Serializes questions back to JSON lines.
pub fn questions_to_text(questions: &[Question]) -> Result<String> {
    let mut out = String::new();
    for q in questions {
        out.push_str(
            &serde_json::to_string(q).map_err(|e| Error::input(format!("serialize: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}

pub fn write_questions(questions: &[Question], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, questions_to_text(questions)?)?;
    Ok(())
}

/// Topic entity ids that resolve in `kg`, deduplicated, question order.
pub fn resolve_topic_ids(kg: &Kg, question: &Question) -> Vec<EntityId> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for label in &question.topic_entities {
        if let Some(id) = kg.entity_id(label) {
            if seen.insert(id) {
                out.push(id);
            }
        }
    }
    out
}

/// Answer entity ids that resolve in `kg`; each answer entity resolves via
/// its canonical label first, then its aliases.
pub fn resolve_answer_ids(kg: &Kg, question: &Question) -> HashSet<EntityId> {
    let mut out = HashSet::new();
    for answer in &question.answers {
        for form in answer.surface_forms() {
            if let Some(id) = kg.entity_id(form) {
                out.insert(id);
                break;
            }
        }
    }
    out
}

/// Parameters of the synthetic benchmark generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_questions: usize,
    /// Alternative two-hop paths per question, disjoint from each other.
    pub redundancy: usize,
    /// Extra triples over a fresh entity pool, never touching any gadget.
    pub distractor_triples: usize,
    pub seed: u64,
}

/// Builds the synthetic graph and its question list. Deterministic in the
/// spec, including distractor wiring.
pub fn synth_kg(spec: &SynthSpec) -> Result<(Kg, Vec<Question>)> {
    let gadget_triples = spec
        .num_questions
        .saturating_mul(1 + 2 * spec.redundancy)
        .saturating_add(spec.distractor_triples);
    if gadget_triples > SYNTH_TRIPLE_GUARD {
        return Err(Error::config(format!(
            "synthetic spec would generate {gadget_triples} triples (guard {SYNTH_TRIPLE_GUARD})"
        )));
    }

    let mut rows: Vec<(String, String, String)> = Vec::with_capacity(gadget_triples);
    let mut questions = Vec::with_capacity(spec.num_questions);
    for i in 0..spec.num_questions {
        let topic = format!("topic_{i:04}");
        let answer = format!("answer_{i:04}");
        rows.push((topic.clone(), REL_DIRECT.to_string(), answer.clone()));
        for j in 0..spec.redundancy {
            let mid = format!("mid_{i:04}_{j}");
            rows.push((topic.clone(), REL_P.to_string(), mid.clone()));
            rows.push((mid, REL_C.to_string(), answer.clone()));
        }
        questions.push(Question {
            id: format!("synth-{i:04}"),
            text: format!("Which entity does {topic} link to directly?"),
            topic_entities: vec![topic],
            answers: vec![AnswerEntity::new(answer)],
        });
    }

    if spec.distractor_triples > 0 {
        let pool = (2 * spec.distractor_triples).max(4);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut used: HashSet<(usize, usize)> = HashSet::new();
        while used.len() < spec.distractor_triples {
            let a = rng.gen_range(0..pool);
            let b = rng.gen_range(0..pool);
            if a == b || !used.insert((a, b)) {
                continue;
            }
            rows.push((
                format!("noise_{a:04}"),
                REL_NOISE.to_string(),
                format!("noise_{b:04}"),
            ));
        }
    }

    Ok((Kg::build(rows)?, questions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::Direction;
    use crate::path::{shortest_paths, DirectionMode};
    use std::collections::HashSet as Set;

    #[test]
    fn parses_a_realistic_record() {
        let line = r#"{"id":"WebQTest-116","question":"which country was Justin Bieber born in?","topic":["Justin Bieber"],"answers":[{"label":"Canada","aliases":[]}]}"#;
        let qs = parse_questions(line).unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].id, "WebQTest-116");
        assert_eq!(qs[0].topic_entities, vec!["Justin Bieber"]);
        assert_eq!(qs[0].answers[0].label, "Canada");
    }

    #[test]
    fn missing_or_empty_answers_fail_with_line_numbers() {
        let missing = r#"{"id":"a","question":"?","topic":["X"]}"#;
        match parse_questions(&format!("{missing}\n")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected: {other}"),
        }

        let ok = r#"{"id":"a","question":"?","topic":["X"],"answers":[{"label":"Y"}]}"#;
        let empty = r#"{"id":"b","question":"?","topic":["X"],"answers":[]}"#;
        match parse_questions(&format!("{ok}\n{empty}\n")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let a = r#"{"id":"a","question":"?","topic":["X"],"answers":[{"label":"Y"}]}"#;
        assert!(parse_questions(&format!("{a}\n{a}\n")).is_err());
    }

    #[test]
    fn empty_file_is_an_empty_dataset() {
        assert!(parse_questions("").unwrap().is_empty());
    }

    #[test]
    fn round_trips_through_text() {
        let qs = vec![Question {
            id: "q1".into(),
            text: "who?".into(),
            topic_entities: vec!["A".into()],
            answers: vec![AnswerEntity::with_aliases("B", ["b jr"])],
        }];
        let text = questions_to_text(&qs).unwrap();
        assert_eq!(parse_questions(&text).unwrap(), qs);
    }

    #[test]
    fn single_question_gadget_matches_the_sibling_shape() {
        let (kg, qs) = synth_kg(&SynthSpec {
            num_questions: 1,
            redundancy: 1,
            distractor_triples: 0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(kg.triple_count(), 3);
        assert_eq!(kg.entity_count(), 3);
        assert_eq!(qs.len(), 1);
        // One direct edge plus a two-hop alternative, exactly the sibling shape.
        let topic = kg.entity_id("topic_0000").unwrap();
        let steps = kg.view().neighbors(topic, Direction::Forward).unwrap();
        assert_eq!(steps.len(), 2);
    }

    #[test]
    fn zero_redundancy_means_direct_edge_is_critical() {
        let (kg, qs) = synth_kg(&SynthSpec {
            num_questions: 2,
            redundancy: 0,
            distractor_triples: 0,
            seed: 1,
        })
        .unwrap();
        let direct = kg
            .triple_by_labels("topic_0000", REL_DIRECT, "answer_0000")
            .unwrap()
            .id;
        let view = kg.apply_mask(vec![direct]).unwrap();
        let topic = kg.entity_id(&qs[0].topic_entities[0]).unwrap();
        let answer: Set<_> = [kg.entity_id(&qs[0].answers[0].label).unwrap()]
            .into_iter()
            .collect();
        let paths = shortest_paths(&view, topic, &answer, 4, DirectionMode::Bidirectional).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn redundancy_survives_direct_deletion_exactly() {
        for r in [0usize, 1, 3] {
            let (kg, qs) = synth_kg(&SynthSpec {
                num_questions: 2,
                redundancy: r,
                distractor_triples: 10,
                seed: 9,
            })
            .unwrap();
            let direct = kg
                .triple_by_labels("topic_0001", REL_DIRECT, "answer_0001")
                .unwrap()
                .id;
            let view = kg.apply_mask(vec![direct]).unwrap();
            let topic = kg.entity_id(&qs[1].topic_entities[0]).unwrap();
            let answer: Set<_> = [kg.entity_id(&qs[1].answers[0].label).unwrap()]
                .into_iter()
                .collect();
            let paths =
                shortest_paths(&view, topic, &answer, 4, DirectionMode::Bidirectional).unwrap();
            assert_eq!(paths.len(), r);
            assert!(paths.iter().all(|p| p.len() == 2));
        }
    }

    #[test]
    fn distractors_never_touch_gadget_entities() {
        let (kg, _) = synth_kg(&SynthSpec {
            num_questions: 3,
            redundancy: 2,
            distractor_triples: 25,
            seed: 42,
        })
        .unwrap();
        let noise_rel = kg.relation_id(REL_NOISE).unwrap();
        for t in kg.triples() {
            if t.relation == noise_rel {
                assert!(kg.entity_label(t.head).starts_with("noise_"));
                assert!(kg.entity_label(t.tail).starts_with("noise_"));
            } else {
                assert!(!kg.entity_label(t.head).starts_with("noise_"));
                assert!(!kg.entity_label(t.tail).starts_with("noise_"));
            }
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = SynthSpec {
            num_questions: 4,
            redundancy: 1,
            distractor_triples: 12,
            seed: 77,
        };
        let (kg_a, qs_a) = synth_kg(&spec).unwrap();
        let (kg_b, qs_b) = synth_kg(&spec).unwrap();
        assert_eq!(crate::kg::kg_to_text(&kg_a), crate::kg::kg_to_text(&kg_b));
        assert_eq!(qs_a, qs_b);
    }

    #[test]
    fn guard_rejects_oversized_specs() {
        let err = synth_kg(&SynthSpec {
            num_questions: 600_000,
            redundancy: 1,
            distractor_triples: 0,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
