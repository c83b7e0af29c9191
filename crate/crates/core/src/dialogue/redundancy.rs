//! Drops questions whose answer the dialogue has already established.

use std::collections::BTreeSet;

use crate::scene::AttrValue;
use crate::state::DialogueState;
use crate::template::{program_key, Candidate};

/// Counting facts stated so far plus the questions already asked.
#[derive(Debug, Clone, Default)]
pub struct Facts {
    /// (attribute filter, count) from whole-scene counting questions.
    counts: Vec<(Vec<AttrValue>, usize)>,
    asked: BTreeSet<(String, u64)>,
}

/// Why a candidate was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redundant {
    KnownAttribute,
    EntailedCount,
    Duplicate,
}

fn scene_count_filter(c: &Candidate) -> Option<&[AttrValue]> {
    (c.template.id == "object_count_none").then_some(c.bindings.s.as_slice())
}

impl Facts {
    pub fn check(&self, c: &Candidate, state: &DialogueState) -> Option<Redundant> {
        if self.asked.contains(&(program_key(&c.program), state.cutoff.to_bits())) {
            return Some(Redundant::Duplicate);
        }
        if let (Some(kind), Some(&id)) = (c.template.queried_attr(), c.focal.first()) {
            if state.tracked(id).and_then(|o| o.known(kind)).is_some() {
                return Some(Redundant::KnownAttribute);
            }
        }
        if let Some(g) = scene_count_filter(c) {
            for (f, n) in &self.counts {
                if !f.iter().all(|v| g.contains(v)) {
                    continue;
                }
                if *n == 0 {
                    return Some(Redundant::EntailedCount);
                }
                // The single object matching `f` is tracked and its other attributes are known.
                let known = state.objects.iter().find(|o| f.iter().all(|v| o.known(v.kind()) == Some(*v)));
                if *n == 1 && known.is_some_and(|o| g.iter().all(|v| o.known(v.kind()).is_some())) {
                    return Some(Redundant::EntailedCount);
                }
            }
        }
        None
    }

    pub fn record(&mut self, c: &Candidate, cutoff: f64) {
        self.asked.insert((program_key(&c.program), cutoff.to_bits()));
        if let Some(g) = scene_count_filter(c) {
            if let Ok(n) = c.answer.parse() {
                self.counts.push((g.to_vec(), n));
            }
        }
    }
}
