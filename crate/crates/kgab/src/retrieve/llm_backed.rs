//! Planner and scorer adapters that route through the generation gateway.
//!
//! Prompt templates are configuration, not code: callers may override them,
//! with `{question}`, `{topics}`, `{k}`, and `{candidate}` as substitution
//! slots. Replies are parsed leniently — the first well-formed relation list
//! (for planning) or the first in-range number (for scoring) wins.

use crate::data::Question;
use crate::error::{Error, Result};
use crate::llm::{GenRequest, Generator};

use super::{Planner, Scorer};

const PLANNER_SYSTEM: &str =
    "You plan relation paths for knowledge-graph question answering. Reply with one relation \
path per line, relations separated by ' -> '.";

const PLANNER_USER_TEMPLATE: &str =
    "Question: {question}\nTopic entities: {topics}\nList up to {k} relation paths.";

const SCORER_SYSTEM: &str =
    "You judge how useful a knowledge-graph path is for answering a question. Reply with a \
single number between 0 and 1.";

const SCORER_USER_TEMPLATE: &str = "Question: {question}\nCandidate: {candidate}\nScore:";

/// LLM-backed planner.
pub struct LlmPlanner<'a> {
    gateway: &'a dyn Generator,
    user_template: String,
    max_plans: usize,
}

impl<'a> LlmPlanner<'a> {
    pub fn new(gateway: &'a dyn Generator, max_plans: usize) -> Self {
        LlmPlanner {
            gateway,
            user_template: PLANNER_USER_TEMPLATE.to_string(),
            max_plans,
        }
    }

    pub fn with_template(mut self, template: impl Into<String>) -> Self {
        self.user_template = template.into();
        self
    }
}

impl Planner for LlmPlanner<'_> {
    fn plan(&self, question: &Question) -> Result<Vec<Vec<String>>> {
        let user_text = self
            .user_template
            .replace("{question}", &question.text)
            .replace("{topics}", &question.topic_entities.join(", "))
            .replace("{k}", &self.max_plans.to_string());
        let response = self.gateway.generate(&GenRequest {
            system_text: PLANNER_SYSTEM.to_string(),
            user_text,
            max_tokens: 256,
            temperature: 0.0,
        })?;
        Ok(parse_relation_lists(&response.output_text, self.max_plans))
    }
}

/// Pulls relation paths out of free-form text: one plan per line containing
/// `->`, with list bullets and numbering stripped.
pub(crate) fn parse_relation_lists(text: &str, max_plans: usize) -> Vec<Vec<String>> {
    let mut plans = Vec::new();
    for line in text.lines() {
        let line = line
            .trim()
            .trim_start_matches(|c: char| c.is_ascii_digit() || "-*.)".contains(c))
            .trim();
        if !line.contains("->") {
            continue;
        }
        let plan: Vec<String> = line
            .split("->")
            .map(|part| part.trim().trim_matches('`').trim().to_string())
            .filter(|part| !part.is_empty())
            .collect();
        if !plan.is_empty() {
            plans.push(plan);
            if plans.len() == max_plans {
                break;
            }
        }
    }
    plans
}

/// LLM-backed scorer.
pub struct LlmScorer<'a> {
    gateway: &'a dyn Generator,
    user_template: String,
}

impl<'a> LlmScorer<'a> {
    pub fn new(gateway: &'a dyn Generator) -> Self {
        LlmScorer {
            gateway,
            user_template: SCORER_USER_TEMPLATE.to_string(),
        }
    }

    pub fn with_template(mut self, template: impl Into<String>) -> Self {
        self.user_template = template.into();
        self
    }
}

impl Scorer for LlmScorer<'_> {
    fn score(&self, question: &str, candidate: &str) -> Result<f64> {
        let user_text = self
            .user_template
            .replace("{question}", question)
            .replace("{candidate}", candidate);
        let response = self.gateway.generate(&GenRequest {
            system_text: SCORER_SYSTEM.to_string(),
            user_text,
            max_tokens: 8,
            temperature: 0.0,
        })?;
        parse_first_score(&response.output_text).ok_or_else(|| {
            Error::Protocol(format!(
                "scorer reply contains no number: {:?}",
                response.output_text
            ))
        })
    }
}

/// First parseable number in the text, clamped into `[0, 1]`.
pub(crate) fn parse_first_score(text: &str) -> Option<f64> {
    for token in text.split_whitespace() {
        let token = token.trim_matches(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'));
        if let Ok(value) = token.parse::<f64>() {
            return Some(value.clamp(0.0, 1.0));
        }
    }
    None
}
