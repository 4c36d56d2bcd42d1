//! Accuracy and Hits scoring over generated answers, plus relative drops.
//!
//! A question's ground truth is an [`AnswerSet`]: one entry per answer
//! entity, each with a canonical label and optional alias surface forms. An
//! answer entity counts as matched when any of its surface forms occurs as a
//! contiguous, in-order token subsequence of the generated output. Accuracy
//! averages the matched fraction per question; Hits averages the indicator
//! that at least one answer matched. Both are reported as percentages with
//! two decimals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::round2;

/// One gold answer entity with its alias surface forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerEntity {
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl AnswerEntity {
    pub fn new(label: impl Into<String>) -> Self {
        AnswerEntity {
            label: label.into(),
            aliases: Vec::new(),
        }
    }

    pub fn with_aliases<I, S>(label: impl Into<String>, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AnswerEntity {
            label: label.into(),
            aliases: aliases.into_iter().map(Into::into).collect(),
        }
    }

    /// Canonical label first, then aliases.
    pub fn surface_forms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.label.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

/// The gold answers of one question. `|A(q)|` counts entities, not surface
/// forms: aliases are alternative spellings of one entity, so adding an alias
/// can only help.
pub type AnswerSet = Vec<AnswerEntity>;

/// Scoring knobs. Defaults match the harness-wide contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchOptions {
    /// When false, only canonical labels are matched (alias-blind comparison).
    pub use_aliases: bool,
    /// Only this many leading output tokens are scanned; a guard against
    /// runaway generations.
    pub max_output_tokens: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            use_aliases: true,
            max_output_tokens: 512,
        }
    }
}

/// Per-question score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    /// Matched answer entities divided by `|A(q)|`, in `[0, 1]`.
    pub accuracy_contribution: f64,
    /// 1 iff at least one answer entity matched.
    pub hit: u8,
    /// Canonical labels of the matched entities, in answer-set order.
    pub matched_answers: Vec<String>,
}

/// Whitespace tokens, lowercased, with leading/trailing punctuation stripped
/// per token. Tokens that strip to nothing are dropped.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| {
            tok.trim_matches(|c: char| c.is_ascii_punctuation())
                .to_lowercase()
        })
        .filter(|tok| !tok.is_empty())
        .collect()
}

fn contains_contiguous(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() {
        return false;
    }
    if needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// True iff any surface form of `answer` occurs contiguously and in order
/// within the normalized tokens of `output`.
pub fn match_answer(output: &str, answer: &AnswerEntity) -> bool {
    match_answer_with(output, answer, &MatchOptions::default())
}

pub fn match_answer_with(output: &str, answer: &AnswerEntity, opts: &MatchOptions) -> bool {
    let mut out_tokens = normalize_tokens(output);
    out_tokens.truncate(opts.max_output_tokens);
    let forms: Vec<&str> = if opts.use_aliases {
        answer.surface_forms().collect()
    } else {
        vec![answer.label.as_str()]
    };
    forms.iter().any(|form| {
        let needle = normalize_tokens(form);
        contains_contiguous(&out_tokens, &needle)
    })
}

/// Scores one generated output against the question's answer set.
pub fn score_question(output: &str, answers: &AnswerSet) -> Result<QuestionScore> {
    score_question_with(output, answers, &MatchOptions::default())
}

pub fn score_question_with(
    output: &str,
    answers: &AnswerSet,
    opts: &MatchOptions,
) -> Result<QuestionScore> {
    if answers.is_empty() {
        return Err(Error::input("cannot score a question with no answers"));
    }
    let matched: Vec<String> = answers
        .iter()
        .filter(|a| match_answer_with(output, a, opts))
        .map(|a| a.label.clone())
        .collect();
    Ok(QuestionScore {
        accuracy_contribution: matched.len() as f64 / answers.len() as f64,
        hit: u8::from(!matched.is_empty()),
        matched_answers: matched,
    })
}

/// Mean Accuracy and Hits over a run, as percentages rounded to 2 decimals.
pub fn aggregate(scores: &[QuestionScore]) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(Error::input("cannot aggregate an empty score list"));
    }
    let n = scores.len() as f64;
    let acc: f64 = scores.iter().map(|s| s.accuracy_contribution).sum::<f64>() / n;
    let hits: f64 = scores.iter().map(|s| f64::from(s.hit)).sum::<f64>() / n;
    Ok((round2(acc * 100.0), round2(hits * 100.0)))
}

/// Relative drop of `value` against `baseline`, in percent with two decimals.
/// Positive means a drop. `None` when the baseline is zero (reported as n/a).
pub fn relative_drop(baseline_percent: f64, value_percent: f64) -> Option<f64> {
    if baseline_percent == 0.0 {
        return None;
    }
    Some(round2(
        (baseline_percent - value_percent) / baseline_percent * 100.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_token_containment() {
        assert!(match_answer(
            "Justin Bieber was born in Canada",
            &AnswerEntity::new("Canada")
        ));
    }

    #[test]
    fn partial_phrase_does_not_match() {
        assert!(!match_answer(
            "West Africa Time",
            &AnswerEntity::new("West Africa Time Zone")
        ));
    }

    #[test]
    fn full_phrase_matches_inside_sentence() {
        assert!(match_answer(
            "the West Africa Time Zone applies",
            &AnswerEntity::new("West Africa Time Zone")
        ));
    }

    #[test]
    fn aliases_match_unless_disabled() {
        let answer = AnswerEntity::with_aliases("West Africa Time Zone", ["WAT"]);
        assert!(match_answer("clocks follow WAT there", &answer));
        let strict = MatchOptions {
            use_aliases: false,
            ..MatchOptions::default()
        };
        assert!(!match_answer_with("clocks follow WAT there", &answer, &strict));
    }

    #[test]
    fn truncation_guard_limits_the_scan() {
        let mut output = "filler ".repeat(600);
        output.push_str("Canada");
        assert!(!match_answer(&output, &AnswerEntity::new("Canada")));
        let relaxed = MatchOptions {
            max_output_tokens: 1000,
            ..MatchOptions::default()
        };
        assert!(match_answer_with(&output, &AnswerEntity::new("Canada"), &relaxed));
    }

    #[test]
    fn score_question_fractions() {
        let answers = vec![
            AnswerEntity::new("Jaxon Bieber"),
            AnswerEntity::new("Jazmyn Bieber"),
        ];
        let s = score_question("I believe it is Jaxon Bieber.", &answers).unwrap();
        assert_eq!(s.accuracy_contribution, 0.5);
        assert_eq!(s.hit, 1);
        assert_eq!(s.matched_answers, vec!["Jaxon Bieber".to_string()]);

        let none = score_question("unknown", &answers).unwrap();
        assert_eq!(none.accuracy_contribution, 0.0);
        assert_eq!(none.hit, 0);

        let both = score_question("Jaxon Bieber and Jazmyn Bieber", &answers).unwrap();
        assert_eq!(both.accuracy_contribution, 1.0);
        assert_eq!(both.hit, 1);
    }

    #[test]
    fn score_question_rejects_empty_answer_sets() {
        assert!(matches!(
            score_question("anything", &Vec::new()).unwrap_err(),
            Error::Input(_)
        ));
    }

    #[test]
    fn aggregate_hand_values() {
        let scores = vec![
            QuestionScore {
                accuracy_contribution: 1.0,
                hit: 1,
                matched_answers: vec![],
            },
            QuestionScore {
                accuracy_contribution: 0.5,
                hit: 1,
                matched_answers: vec![],
            },
            QuestionScore {
                accuracy_contribution: 0.0,
                hit: 0,
                matched_answers: vec![],
            },
        ];
        assert_eq!(aggregate(&scores).unwrap(), (50.00, 66.67));

        let perfect = vec![scores[0].clone(), scores[0].clone()];
        assert_eq!(aggregate(&perfect).unwrap(), (100.00, 100.00));
        assert_eq!(aggregate(&scores[2..3]).unwrap(), (0.00, 0.00));
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn relative_drop_reference_values() {
        assert_eq!(relative_drop(76.75, 75.55), Some(1.56));
        assert_eq!(relative_drop(76.75, 50.46), Some(34.25));
        assert_eq!(relative_drop(57.49, 53.23), Some(7.41));
        assert_eq!(relative_drop(76.75, 76.75), Some(0.00));
        assert_eq!(relative_drop(0.0, 10.0), None);
    }

    fn arb_answer_set() -> impl Strategy<Value = AnswerSet> {
        let word = "[a-d]{1,3}";
        let label = proptest::collection::vec(word, 1..3).prop_map(|w| w.join(" "));
        let entity = (label, proptest::collection::vec("[a-d]{1,4}", 0..2)).prop_map(
            |(label, aliases)| AnswerEntity {
                label,
                aliases,
            },
        );
        proptest::collection::vec(entity, 1..4)
    }

    proptest! {
        #[test]
        fn accuracy_never_exceeds_hits(
            output in "[a-d ]{0,40}",
            answers in arb_answer_set(),
        ) {
            let s = score_question(&output, &answers).unwrap();
            prop_assert!(s.accuracy_contribution <= f64::from(s.hit));
            prop_assert!((0.0..=1.0).contains(&s.accuracy_contribution));
        }

        #[test]
        fn adding_an_alias_is_monotone(
            output in "[a-d ]{0,40}",
            answers in arb_answer_set(),
            alias in "[a-d]{1,3}",
        ) {
            let before = score_question(&output, &answers).unwrap();
            let mut extended = answers.clone();
            extended[0].aliases.push(alias);
            let after = score_question(&output, &extended).unwrap();
            prop_assert!(after.accuracy_contribution >= before.accuracy_contribution);
            prop_assert!(after.hit >= before.hit);
        }

        #[test]
        fn aggregation_is_permutation_invariant(
            pairs in proptest::collection::vec((0..=4u8, proptest::bool::ANY), 1..20),
            seed in proptest::num::u64::ANY,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let scores: Vec<QuestionScore> = pairs
                .iter()
                .map(|(q, h)| QuestionScore {
                    accuracy_contribution: f64::from(*q) / 4.0,
                    hit: u8::from(*h || *q > 0),
                    matched_answers: vec![],
                })
                .collect();
            let mut shuffled = scores.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(&scores).unwrap(), aggregate(&shuffled).unwrap());
        }
    }
}
