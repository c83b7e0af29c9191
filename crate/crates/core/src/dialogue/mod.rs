//! Ten-turn dialogue synthesis with temporal relations, object references and
//! topic transfers.

mod balance;
mod redundancy;
mod transfer;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{IntervalKind, TemporalRelation, VideoInterval, DEFAULT_MIN_DURATION};
use crate::program::{execute, ExecContext, ExecOptions, Execution, Program, ProgramError};
use crate::scene::{SceneGraph, EPS};
use crate::state::{DialogueState, LastTurn};
use crate::template::{
    evaluate, instantiate, templates, Candidate, InstantiateRequest, IntervalType, OrRecord, QuestionType,
    Rejected, Template, TrMode,
};

pub use balance::Ledger;
pub use redundancy::{Facts, Redundant};
pub use transfer::{attribute_drafts, reaskable, spatial_drafts, temporal_draft, Draft, TtKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogueConfig {
    pub turns: usize,
    /// Shortest interval a program may produce, in seconds.
    pub min_duration: f64,
    /// Chance that a regular turn reuses or shifts the previous interval.
    pub p_temporal_relation: f64,
    /// Chance that a regular turn refers back to an earlier object.
    pub p_object_reference: f64,
    /// Chance of an attribute or spatial transfer on a turn without a cutoff update.
    pub p_topic_transfer: f64,
    /// Chance that the turn before a cutoff update is drawn so that the update can re-ask it.
    pub p_prepare_reask: f64,
    /// Share of spatial transfers among attribute/spatial transfers when both apply.
    pub p_spatial_transfer: f64,
    pub p_cutoff_update: f64,
    pub max_cutoff_updates: usize,
    /// Chance that an update extends the video to its full length.
    pub p_cutoff_to_end: f64,
    /// Initial cutoff range as fractions of the duration.
    pub initial_cutoff: [f64; 2],
    pub p_reuse: f64,
    pub p_pronoun: f64,
    pub balance_ratio: f64,
    /// Allowed excess of same-answer over different-answer transfers, and vice versa.
    pub carryover_slack: usize,
    pub turn_budget: usize,
    pub restarts: usize,
    pub type_weights: BTreeMap<QuestionType, f64>,
    /// Extra weight of compositional templates within a sub-type.
    pub compositional_bias: f64,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        use QuestionType::*;
        DialogueConfig {
            turns: 10,
            min_duration: DEFAULT_MIN_DURATION,
            p_temporal_relation: 0.4,
            p_object_reference: 0.55,
            p_topic_transfer: 0.6,
            p_prepare_reask: 1.0,
            p_spatial_transfer: 0.3,
            p_cutoff_update: 0.3,
            max_cutoff_updates: 3,
            p_cutoff_to_end: 0.4,
            initial_cutoff: [0.5, 0.8],
            p_reuse: 0.7,
            p_pronoun: 0.35,
            balance_ratio: 1.5,
            carryover_slack: 20,
            turn_budget: 200,
            restarts: 20,
            type_weights: [
                (ActionCount, 0.10),
                (ActionQuery, 0.15),
                (AttributeQuery, 0.12),
                (CompareActionSeq, 0.10),
                (CompareActionSet, 0.10),
                (CompareActionFreq, 0.12),
                (ObjectCount, 0.15),
                (ObjectExist, 0.16),
            ]
            .into(),
            compositional_bias: 1.5,
        }
    }
}

impl DialogueConfig {
    pub fn exec_options(&self) -> ExecOptions {
        ExecOptions {
            min_duration: self.min_duration,
            ..ExecOptions::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let probs = [
            ("p_temporal_relation", self.p_temporal_relation),
            ("p_object_reference", self.p_object_reference),
            ("p_topic_transfer", self.p_topic_transfer),
            ("p_prepare_reask", self.p_prepare_reask),
            ("p_spatial_transfer", self.p_spatial_transfer),
            ("p_cutoff_update", self.p_cutoff_update),
            ("p_cutoff_to_end", self.p_cutoff_to_end),
            ("p_reuse", self.p_reuse),
            ("p_pronoun", self.p_pronoun),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.min_duration > 0.0) {
            return Err("min_duration must be positive".into());
        }
        if self.turns == 0 {
            return Err("turns must be positive".into());
        }
        if self.p_temporal_relation + self.p_object_reference <= 0.0 {
            return Err("regular turns need a temporal relation or object reference".into());
        }
        let [lo, hi] = self.initial_cutoff;
        if !(0.0 < lo && lo <= hi && hi <= 1.0) {
            return Err(format!("initial_cutoff {lo}..{hi} is not within (0, 1]"));
        }
        if self.balance_ratio < 1.0 {
            return Err("balance_ratio must be at least 1".into());
        }
        if self.type_weights.values().any(|w| *w < 0.0) || self.type_weights.values().sum::<f64>() <= 0.0 {
            return Err("type_weights must be non-negative with a positive sum".into());
        }
        if self.turn_budget == 0 || self.restarts == 0 {
            return Err("turn_budget and restarts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relations {
    pub tr: Option<TemporalRelation>,
    pub or: Vec<OrRecord>,
    pub tt: Option<TtKind>,
}

impl Relations {
    pub fn any(&self) -> bool {
        self.tr.is_some() || !self.or.is_empty() || self.tt.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    /// One-based position in the dialogue.
    pub turn: usize,
    pub question: String,
    pub answer: String,
    pub program: Program,
    pub interval: VideoInterval,
    pub relations: Relations,
    pub cutoff: f64,
    /// Dialogue state before this turn; replaying the program against it reproduces the answer.
    pub state: DialogueState,
    pub template: String,
    pub question_type: QuestionType,
    pub sub_type: String,
    pub interval_type: IntervalType,
    /// Objects hidden inside a container at some point of the question interval.
    pub contained_object_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub dialogue_id: String,
    pub video_id: String,
    pub initial_cutoff: f64,
    pub final_cutoff: f64,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogueError {
    #[error("no dialogue completed within {restarts} restarts (last failure at turn {turn})")]
    ExhaustedRetries { restarts: usize, turn: usize },
}

/// Re-executes a stored turn against its state snapshot and the scene cut at the turn's cutoff.
pub fn replay_turn(scene: &SceneGraph, turn: &Turn, options: ExecOptions) -> Result<Execution, ProgramError> {
    let view = scene.truncated(turn.cutoff);
    let mut ctx = ExecContext::new(&view, &turn.state);
    ctx.options = options;
    execute(&turn.program, &ctx)
}

/// Initial cutoff and the cutoff after each update turn.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSchedule {
    pub initial: f64,
    pub updates: BTreeMap<usize, f64>,
}

/// Event boundaries strictly inside the video.
fn boundaries(scene: &SceneGraph) -> Vec<f64> {
    scene
        .timestamps()
        .into_iter()
        .filter(|t| *t > EPS && *t < scene.duration - EPS)
        .collect()
}

pub fn schedule_cutoffs<R: Rng>(scene: &SceneGraph, cfg: &DialogueConfig, rng: &mut R) -> CutoffSchedule {
    let d = scene.duration;
    let (lo, hi) = (cfg.initial_cutoff[0] * d, cfg.initial_cutoff[1] * d);
    let bounds = boundaries(scene);
    let inside: Vec<f64> = bounds.iter().copied().filter(|t| *t >= lo - EPS && *t <= hi + EPS).collect();
    let initial = match inside.choose(rng) {
        Some(t) => *t,
        None => {
            // No event boundary in range: fall back to the half-second grid.
            let steps = ((hi - lo) / 0.5).floor() as usize;
            lo + 0.5 * rng.gen_range(0..=steps) as f64
        }
    };
    let mut updates = BTreeMap::new();
    if initial >= d - EPS || cfg.turns < 2 || cfg.max_cutoff_updates == 0 {
        return CutoffSchedule { initial, updates };
    }
    let turns: Vec<usize> = loop {
        let mut picked = Vec::new();
        for t in 2..=cfg.turns {
            if picked.len() < cfg.max_cutoff_updates && rng.gen_bool(cfg.p_cutoff_update) {
                picked.push(t);
            }
        }
        if !picked.is_empty() {
            break picked;
        }
    };
    let mut cur = initial;
    for t in turns {
        if cur >= d - EPS {
            break;
        }
        let later: Vec<f64> = bounds.iter().copied().filter(|b| *b > cur + EPS).collect();
        cur = if later.is_empty() || rng.gen_bool(cfg.p_cutoff_to_end) {
            d
        } else {
            *later.choose(rng).unwrap()
        };
        updates.insert(t, cur);
    }
    CutoffSchedule { initial, updates }
}

/// Objects contained at some point of `iv`.
fn contained_count(scene: &SceneGraph, iv: &VideoInterval) -> usize {
    let (s, e) = if iv.kind == IntervalKind::None {
        (0.0, scene.duration)
    } else {
        (iv.start, iv.end)
    };
    scene
        .objects
        .iter()
        .filter(|o| o.containment.iter().any(|c| c.start < e - EPS && c.end > s + EPS))
        .count()
}

/// Template draw order for one turn: weighted without replacement.
fn template_order<R: Rng>(
    cfg: &DialogueConfig,
    ledger: &Ledger,
    feasible: &dyn Fn(&Template) -> bool,
    rng: &mut R,
) -> Vec<&'static Template> {
    let total_w: f64 = cfg.type_weights.values().sum();
    let n = ledger.total as f64;
    let mut sub_counts: BTreeMap<QuestionType, Vec<(&str, usize)>> = BTreeMap::new();
    for t in templates() {
        let subs = sub_counts.entry(t.question_type).or_default();
        if !subs.iter().any(|(s, _)| *s == t.sub_type) {
            let c = ledger
                .sub_types
                .get(&(t.question_type, t.sub_type.clone()))
                .copied()
                .unwrap_or(0);
            subs.push((&t.sub_type, c));
        }
    }
    let mut pool: Vec<(&'static Template, f64)> = templates()
        .iter()
        .filter(|t| feasible(t))
        .map(|t| {
            let share = cfg.type_weights.get(&t.question_type).copied().unwrap_or(0.0) / total_w;
            let have = ledger.types.get(&t.question_type).copied().unwrap_or(0) as f64;
            let deficit = ((share * n + 5.0) / (have + 5.0)).powi(2).clamp(0.05, 20.0);
            let subs = &sub_counts[&t.question_type];
            let mean = subs.iter().map(|s| s.1).sum::<usize>() as f64 / subs.len() as f64;
            let mine = subs.iter().find(|s| s.0 == t.sub_type).map(|s| s.1).unwrap_or(0) as f64;
            let sub_deficit = ((mean + 5.0) / (mine + 5.0)).powi(2).clamp(0.05, 20.0);
            let per_sub = templates()
                .iter()
                .filter(|x| x.question_type == t.question_type && x.sub_type == t.sub_type)
                .count() as f64;
            let bias = if t.interval == IntervalType::Compositional {
                cfg.compositional_bias
            } else {
                1.0
            };
            let w = share * deficit * sub_deficit * bias / (subs.len() as f64 * per_sub);
            (t, w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let mut order = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        let Ok(i) = (0..pool.len()).collect::<Vec<_>>().choose_weighted(rng, |&i| pool[i].1).copied() else {
            break;
        };
        order.push(pool.swap_remove(i).0);
    }
    order
}

struct Prev {
    candidate: Candidate,
    tt: bool,
    /// Whether a predictor that repeats the previous answer on transfers gets this turn right.
    recycle_correct: bool,
}

struct TurnContext<'a> {
    cfg: &'a DialogueConfig,
    view: &'a SceneGraph,
    state: &'a DialogueState,
    facts: &'a Facts,
    prev: Option<&'a Prev>,
}

impl TurnContext<'_> {
    fn acceptable(&self, c: &Candidate, ledger: &Ledger) -> bool {
        self.facts.check(c, self.state).is_none() && ledger.answer_ok(c.template, &c.answer, self.cfg.balance_ratio)
    }

    /// Carryover category of a transfer, when its predecessor counts for transferability.
    fn carry(&self, c: &Candidate) -> Option<bool> {
        let p = self.prev?;
        p.recycle_correct.then(|| c.answer == p.candidate.answer)
    }

    fn try_drafts<R: Rng>(&self, drafts: Vec<Draft>, ledger: &Ledger, rng: &mut R) -> Option<(Candidate, TtKind)> {
        for d in drafts.into_iter().take(self.cfg.turn_budget) {
            let Ok(mut c) = evaluate(d.template, &d.bindings, self.view, self.state, self.cfg.exec_options(), rng) else { continue };
            c.question = d.question;
            c.or_records.clear();
            c.tr = None;
            if !self.acceptable(&c, ledger) {
                continue;
            }
            if let Some(same) = self.carry(&c) {
                if !ledger.carry_ok(same, self.cfg.carryover_slack) {
                    continue;
                }
            }
            return Some((c, d.kind));
        }
        None
    }

    fn temporal_transfer<R: Rng>(&self, old_cutoff: f64, ledger: &Ledger, rng: &mut R) -> Option<(Candidate, TtKind)> {
        let p = self.prev.filter(|p| !p.tt)?;
        let d = transfer::temporal_draft(&p.candidate, self.view, old_cutoff, rng)?;
        self.try_drafts(vec![d], ledger, rng)
    }

    fn topic_transfer<R: Rng>(&self, ledger: &Ledger, rng: &mut R) -> Option<(Candidate, TtKind)> {
        let p = self.prev?;
        let spatial = transfer::spatial_drafts(&p.candidate, self.view, rng);
        let attribute = transfer::attribute_drafts(&p.candidate, self.view, rng);
        let drafts = if !spatial.is_empty() && (attribute.is_empty() || rng.gen_bool(self.cfg.p_spatial_transfer)) {
            spatial.into_iter().chain(attribute).collect()
        } else {
            attribute.into_iter().chain(spatial).collect()
        };
        self.try_drafts(drafts, ledger, rng)
    }

    /// A fresh question; `reask` asks for one that a following cutoff update can re-ask.
    fn regular<R: Rng>(&self, ledger: &Ledger, reask: bool, rng: &mut R) -> Option<Candidate> {
        let first = self.state.last_turn.is_none();
        let tr_possible = !reask
            && !first
            && (self.state.interval.is_some_and(|i| i.kind != IntervalKind::None)
                || self.state.last_turn.as_ref().is_some_and(|l| l.anchor.is_some()));
        let mut budget = self.cfg.turn_budget;
        while budget > 0 {
            let (tr, or) = if first {
                (false, false)
            } else {
                loop {
                    let tr = tr_possible && rng.gen_bool(self.cfg.p_temporal_relation);
                    let or = rng.gen_bool(self.cfg.p_object_reference);
                    if tr || or {
                        break (tr, or);
                    }
                }
            };
            let feasible = |t: &Template| {
                let s = t.slots();
                (!tr || s.interval) && (!reask || s.interval) && (!or || s.o1 || s.o2 || (s.interval && !tr))
            };
            let order = template_order(self.cfg, ledger, &feasible, rng);
            if order.is_empty() {
                budget = budget.saturating_sub(1);
                continue;
            }
            for t in order.into_iter().take(4) {
                let slice = budget.min(self.cfg.turn_budget / 4).max(1);
                budget -= slice;
                let req = InstantiateRequest {
                    template: t,
                    scene: self.view,
                    state: self.state,
                    tr: if tr { TrMode::Require } else { TrMode::Forbid },
                    or_required: or,
                    p_reuse: self.cfg.p_reuse,
                    p_pronoun: self.cfg.p_pronoun,
                    budget: slice,
                    options: self.cfg.exec_options(),
                };
                let cutoff = self.state.cutoff;
                let accept = &mut |c: &Candidate| (!reask || reaskable(c, cutoff)) && self.acceptable(c, ledger);
                match instantiate(&req, rng, accept) {
                    Ok(c) => return Some(c),
                    Err(Rejected::Infeasible(_)) | Err(Rejected::Exhausted) => {}
                }
                if budget == 0 {
                    break;
                }
            }
        }
        None
    }
}

/// One dialogue over `scene`, updating the split ledger only on success.
pub fn generate_dialogue<R: Rng>(
    scene: &SceneGraph,
    cfg: &DialogueConfig,
    dialogue_id: String,
    ledger: &mut Ledger,
    rng: &mut R,
) -> Result<Dialogue, DialogueError> {
    let mut last_turn = 0;
    for _ in 0..cfg.restarts {
        let mut local = ledger.clone();
        match try_dialogue(scene, cfg, &mut local, rng) {
            Ok((schedule, turns)) => {
                *ledger = local;
                let final_cutoff = turns.last().map(|t| t.cutoff).unwrap_or(schedule.initial);
                return Ok(Dialogue {
                    dialogue_id,
                    video_id: scene.video_id.clone(),
                    initial_cutoff: schedule.initial,
                    final_cutoff,
                    turns,
                });
            }
            Err(turn) => last_turn = turn,
        }
    }
    Err(DialogueError::ExhaustedRetries {
        restarts: cfg.restarts,
        turn: last_turn,
    })
}

fn try_dialogue<R: Rng>(
    scene: &SceneGraph,
    cfg: &DialogueConfig,
    ledger: &mut Ledger,
    rng: &mut R,
) -> Result<(CutoffSchedule, Vec<Turn>), usize> {
    let schedule = schedule_cutoffs(scene, cfg, rng);
    let mut state = DialogueState::initial(schedule.initial);
    let mut facts = Facts::default();
    let mut prev: Option<Prev> = None;
    let mut turns = Vec::with_capacity(cfg.turns);
    let mut view = scene.truncated(state.cutoff);
    for t in 1..=cfg.turns {
        let old_cutoff = state.cutoff;
        let update = schedule.updates.get(&t).copied();
        if let Some(c) = update {
            state.cutoff = c;
            view = scene.truncated(c);
        }
        let ctx = TurnContext {
            cfg,
            view: &view,
            state: &state,
            facts: &facts,
            prev: prev.as_ref(),
        };
        // The question before a cutoff update should be one the update can re-ask.
        let reask = schedule.updates.contains_key(&(t + 1)) && rng.gen_bool(cfg.p_prepare_reask);
        let mut picked = None;
        if t > 1 {
            picked = if update.is_some() {
                ctx.temporal_transfer(old_cutoff, ledger, rng)
            } else if !reask && rng.gen_bool(cfg.p_topic_transfer) {
                ctx.topic_transfer(ledger, rng)
            } else {
                None
            };
        }
        let (c, tt) = match picked {
            Some((c, k)) => (c, Some(k)),
            None => {
                let c = match reask.then(|| ctx.regular(ledger, true, rng)).flatten() {
                    Some(c) => c,
                    None => ctx.regular(ledger, false, rng).ok_or(t)?,
                };
                (c, None)
            }
        };
        let carry = if tt.is_some() { ctx.carry(&c) } else { None };
        ledger.record(c.template, &c.answer, carry);
        facts.record(&c, state.cutoff);
        let relations = Relations {
            tr: c.tr,
            or: c.or_records.clone(),
            tt,
        };
        turns.push(Turn {
            turn: t,
            question: c.question.clone(),
            answer: c.answer.clone(),
            program: c.program.clone(),
            interval: c.interval,
            relations,
            cutoff: state.cutoff,
            state: state.clone(),
            template: c.template.id.clone(),
            question_type: c.template.question_type,
            sub_type: c.template.sub_type.clone(),
            interval_type: c.template.interval,
            contained_object_count: contained_count(&view, &c.interval),
        });
        let exec = Execution {
            values: c.values.clone(),
            interval: c.interval,
        };
        state.advance(
            &c.program,
            &exec,
            LastTurn {
                question: c.question.clone(),
                program: c.program.clone(),
                answer: c.answer.clone(),
                focal: c.focal.clone(),
                anchor: c.anchor,
                anchor_action: c.anchor_action,
            },
        );
        let recycle_correct = match (tt, &prev) {
            (Some(_), Some(p)) => c.answer == p.candidate.answer,
            _ => true,
        };
        prev = Some(Prev {
            candidate: c,
            tt: tt.is_some(),
            recycle_correct,
        });
    }
    Ok((schedule, turns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{simulate_scene, SceneConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schedule_respects_bounds() {
        let cfg = DialogueConfig::default();
        for seed in 0..50 {
            let scene = simulate_scene(&SceneConfig::default(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = schedule_cutoffs(&scene, &cfg, &mut rng);
            assert!(s.initial >= 5.0 - EPS && s.initial <= 8.0 + EPS);
            assert!((1..=3).contains(&s.updates.len()), "{s:?}");
            let mut cur = s.initial;
            for (&t, &c) in &s.updates {
                assert!((2..=10).contains(&t));
                assert!(c > cur);
                cur = c;
            }
        }
    }

    #[test]
    fn dialogues_have_ten_related_turns() {
        let cfg = DialogueConfig::default();
        let mut ledger = Ledger::default();
        for seed in 0..6 {
            let scene = simulate_scene(&SceneConfig::default(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = generate_dialogue(&scene, &cfg, format!("t_{seed}"), &mut ledger, &mut rng).unwrap();
            assert_eq!(d.turns.len(), 10);
            assert!(!d.turns[0].relations.any());
            assert!(d.turns[1..].iter().all(|t| t.relations.any()));
            for turn in &d.turns {
                let e = replay_turn(&scene, turn, cfg.exec_options()).unwrap();
                assert_eq!(e.answer().answer_string().unwrap(), turn.answer, "{}", turn.question);
            }
        }
    }
}
