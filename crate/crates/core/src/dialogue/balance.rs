//! Streaming counters that keep answer values, question types and
//! topic-transfer outcomes balanced within one split.

use std::collections::BTreeMap;

use crate::template::{QuestionType, Template};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    /// Accepted answers per template id.
    pub answers: BTreeMap<String, BTreeMap<String, usize>>,
    pub types: BTreeMap<QuestionType, usize>,
    pub sub_types: BTreeMap<(QuestionType, String), usize>,
    /// Topic-transfer turns whose answer equals / differs from the previous answer.
    pub carry_same: usize,
    pub carry_diff: usize,
    pub total: usize,
}

impl Ledger {
    pub fn answer_count(&self, template: &str, answer: &str) -> usize {
        self.answers
            .get(template)
            .and_then(|m| m.get(answer))
            .copied()
            .unwrap_or(0)
    }

    /// True when one more `answer` keeps max/min within `ratio` once the rarest answer catches up.
    pub fn answer_ok(&self, t: &Template, answer: &str, ratio: f64) -> bool {
        let min = t
            .answers
            .iter()
            .map(|a| self.answer_count(&t.id, a))
            .min()
            .unwrap_or(0);
        let cap = (min + 1).max((ratio * min as f64).floor() as usize);
        self.answer_count(&t.id, answer) < cap
    }

    pub fn carry_ok(&self, same: bool, slack: usize) -> bool {
        let (mine, other) = if same {
            (self.carry_same, self.carry_diff)
        } else {
            (self.carry_diff, self.carry_same)
        };
        mine <= other + slack
    }

    pub fn record(&mut self, t: &Template, answer: &str, carry: Option<bool>) {
        *self
            .answers
            .entry(t.id.clone())
            .or_default()
            .entry(answer.to_string())
            .or_default() += 1;
        *self.types.entry(t.question_type).or_default() += 1;
        *self.sub_types.entry((t.question_type, t.sub_type.clone())).or_default() += 1;
        match carry {
            Some(true) => self.carry_same += 1,
            Some(false) => self.carry_diff += 1,
            None => {}
        }
        self.total += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::template_by_id;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn accepted_stream_stays_within_ratio(stream in proptest::collection::vec(0usize..4, 1..600)) {
            let t = template_by_id("action_count").unwrap();
            let mut l = Ledger::default();
            for i in stream {
                let a = &t.answers[i];
                if l.answer_ok(t, a, 1.5) {
                    l.record(t, a, None);
                }
                let counts: Vec<usize> = t.answers.iter().map(|a| l.answer_count(&t.id, a)).collect();
                let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
                prop_assert!(hi <= (lo + 1).max((1.5 * lo as f64).floor() as usize));
            }
        }
    }

    #[test]
    fn carry_slack() {
        let mut l = Ledger::default();
        assert!(l.carry_ok(true, 0));
        l.carry_same = 3;
        assert!(!l.carry_ok(true, 2));
        assert!(l.carry_ok(false, 0));
    }
}
