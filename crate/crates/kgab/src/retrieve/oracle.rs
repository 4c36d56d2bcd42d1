//! Perfect retriever: the true shortest topic-to-answer paths of the queried
//! view. Retrieval succeeds exactly when the answers are still reachable, so
//! paired with the mock generator, measured Hits reduces to answer
//! reachability.

use crate::data::{resolve_answer_ids, resolve_topic_ids, Question};
use crate::error::Result;
use crate::kg::KgView;
use crate::path::{shortest_paths_multi, DirectionMode};

use super::{RetrievalMethod, RetrievalResult, Trace};

pub fn oracle_retrieve(
    view: &KgView<'_>,
    question: &Question,
    max_hops: usize,
    mode: DirectionMode,
) -> Result<RetrievalResult> {
    let kg = view.base();
    let mut trace = Trace::default();
    let topics = resolve_topic_ids(kg, question);
    let answers = resolve_answer_ids(kg, question);
    if topics.is_empty() || answers.is_empty() {
        trace.note("topic or answer entities missing from the graph");
        let mut result = RetrievalResult::empty(RetrievalMethod::Oracle);
        result.trace = trace;
        return Ok(result);
    }
    let mut paths = shortest_paths_multi(view, &topics, &answers, max_hops, mode)?;
    if paths.iter().any(|p| p.is_empty()) {
        trace.note("a topic entity is itself an answer; zero-length paths dropped");
        paths.retain(|p| !p.is_empty());
    }
    if paths.is_empty() {
        trace.note("answers unreachable within the hop bound");
    }
    Ok(RetrievalResult::from_paths(
        view,
        RetrievalMethod::Oracle,
        paths,
        trace,
    ))
}
