//! Plan-then-ground retrieval: the planner proposes relation paths, and each
//! plan is grounded from every topic entity into concrete reasoning paths.

use crate::data::{resolve_topic_ids, Question};
use crate::error::Result;
use crate::kg::KgView;
use crate::path::{ground_relation_path, DirectionMode};

use super::{PlanTrace, Planner, RetrievalMethod, RetrievalResult, Trace};

/// Grounds the planner's top `top_k_plans` relation sequences. Plans with
/// unknown relation labels ground nothing (noted in the trace); an empty plan
/// list yields an empty result, not an error.
pub fn rog_retrieve(
    view: &KgView<'_>,
    question: &Question,
    planner: &dyn Planner,
    top_k_plans: usize,
    mode: DirectionMode,
) -> Result<RetrievalResult> {
    let kg = view.base();
    let mut trace = Trace::default();

    let topics = resolve_topic_ids(kg, question);
    for label in &question.topic_entities {
        if kg.entity_id(label).is_none() {
            trace.note(format!("topic entity {label:?} is not in the graph"));
        }
    }
    if topics.is_empty() {
        trace.note("no topic entity resolved; nothing to ground");
        let mut result = RetrievalResult::empty(RetrievalMethod::Rog);
        result.trace = trace;
        return Ok(result);
    }

    let mut plans = planner.plan(question)?;
    plans.truncate(top_k_plans);
    if plans.is_empty() {
        trace.note("planner produced no relation paths");
    }

    let mut paths = Vec::new();
    for plan in plans {
        let relations: Option<Vec<_>> = plan.iter().map(|l| kg.relation_id(l)).collect();
        let Some(relations) = relations else {
            trace.note(format!("plan {plan:?} uses relations unknown to the graph"));
            trace.plans.push(PlanTrace { plan, grounded: 0 });
            continue;
        };
        let mut grounded = 0;
        for &topic in &topics {
            for path in ground_relation_path(view, topic, &relations, mode)? {
                if !path.is_empty() {
                    grounded += 1;
                    paths.push(path);
                }
            }
        }
        trace.plans.push(PlanTrace { plan, grounded });
    }

    Ok(RetrievalResult::from_paths(
        view,
        RetrievalMethod::Rog,
        paths,
        trace,
    ))
}
