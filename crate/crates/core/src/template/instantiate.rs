//! Slot sampling, program expansion and execution of one template.

use rand::seq::SliceRandom;
use rand::Rng;

use super::bind::{emit_filters, Bindings, EventRef, IntervalDesc, ObjRef, OrRecord};
use super::{text, IntervalType, ObjSlot, SideArg, Step, StepInput, Template};
use crate::interval::{IntervalKind, SpatialRelation, TemporalRelation, VideoInterval};
use crate::program::{execute, ExecContext, ExecOptions, Frequency, Module, Order, Program, ProgramError, Value};
use crate::scene::{ActionKind, AttrKind, AttrValue, SceneGraph};
use crate::state::DialogueState;

/// Whether the interval must be defined relative to the previous turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrMode {
    Forbid,
    Require,
}

/// Where a required cross-turn object reference goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrPlacement {
    Slot(ObjSlot),
    IntervalEvent,
}

#[derive(Debug, Clone)]
pub struct InstantiateRequest<'a> {
    pub template: &'static Template,
    /// The scene truncated at the current cutoff.
    pub scene: &'a SceneGraph,
    pub state: &'a DialogueState,
    pub tr: TrMode,
    pub or_required: bool,
    /// Chance of describing an already tracked object rather than a fresh one.
    pub p_reuse: f64,
    /// Chance of "it" over "the earlier mentioned ..." when both are possible.
    pub p_pronoun: f64,
    pub budget: usize,
    pub options: ExecOptions,
}

/// A fully bound, executed and rendered question.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub template: &'static Template,
    pub bindings: Bindings,
    pub program: Program,
    pub question: String,
    pub answer: String,
    pub values: Vec<Value>,
    pub interval: VideoInterval,
    pub focal: Vec<u32>,
    pub anchor: Option<VideoInterval>,
    pub anchor_action: Option<ActionKind>,
    pub or_records: Vec<OrRecord>,
    pub tr: Option<TemporalRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejected {
    /// The template cannot satisfy the request in this state.
    Infeasible(String),
    /// No accepted candidate within the attempt budget.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct Built {
    pub program: Program,
    /// `unique` nodes whose objects the question is about.
    pub focal_nodes: Vec<usize>,
    /// Nodes that must resolve to the object a reference was bound to.
    pub bound: Vec<(usize, u32)>,
}

/// Expands the skeleton with the bound slots.
pub fn build_program(t: &Template, b: &Bindings) -> Result<Built, String> {
    let mut p = Program::default();
    let mut interval_node: Option<Option<usize>> = None;
    let mut obj_nodes: [Option<usize>; 2] = [None, None];
    let mut steps: Vec<usize> = Vec::with_capacity(t.skeleton.len());
    let mut focal_nodes = Vec::new();
    let mut bound = Vec::new();
    for step in &t.skeleton {
        match step {
            Step::Filters { input } => {
                let n = emit_filters(&mut p, steps[*input], &b.s);
                steps.push(n);
            }
            Step::Node { module, inputs, side } => {
                let mut ins = Vec::with_capacity(inputs.len());
                for input in inputs {
                    match input {
                        StepInput::Step(k) => ins.push(steps[*k]),
                        StepInput::Interval => {
                            let node = match interval_node {
                                Some(n) => n,
                                None => {
                                    let desc = b.interval.as_ref().ok_or("unbound <I>")?;
                                    let first = p.len();
                                    let n = desc.emit(&mut p);
                                    let finds = p.nodes[first..]
                                        .iter()
                                        .filter(|x| x.module == Module::FindInterval)
                                        .map(|x| x.inputs[0]);
                                    bound.extend(finds.zip(desc.object_refs().iter().map(|r| r.id())));
                                    interval_node = Some(n);
                                    n
                                }
                            };
                            ins.extend(node);
                        }
                        StepInput::Object(slot) => {
                            let i = *slot as usize;
                            let n = match obj_nodes[i] {
                                Some(n) => n,
                                None => {
                                    let r = match slot {
                                        ObjSlot::O1 => b.o1.as_ref(),
                                        ObjSlot::O2 => b.o2.as_ref(),
                                    }
                                    .ok_or("unbound object slot")?;
                                    let n = r.emit(&mut p);
                                    bound.push((n, r.id()));
                                    obj_nodes[i] = Some(n);
                                    focal_nodes.push(n);
                                    n
                                }
                            };
                            ins.push(n);
                        }
                    }
                }
                let side = side
                    .iter()
                    .map(|a| side_literal(a, b))
                    .collect::<Result<Vec<String>, String>>()?;
                let n = p.push(*module, ins, side);
                if *module == Module::Unique {
                    focal_nodes.push(n);
                }
                steps.push(n);
            }
        }
    }
    Ok(Built {
        program: p,
        focal_nodes,
        bound,
    })
}

fn side_literal(a: &SideArg, b: &Bindings) -> Result<String, String> {
    let missing = |s: &str| format!("unbound side slot {s}");
    Ok(match a {
        SideArg::Literal(s) => s.clone(),
        SideArg::A1 => b.a1.ok_or_else(|| missing("A1"))?.as_str().to_string(),
        SideArg::A2 => b.a2.ok_or_else(|| missing("A2"))?.as_str().to_string(),
        SideArg::R => b.r.ok_or_else(|| missing("R"))?.as_str().to_string(),
        SideArg::F => b.f.ok_or_else(|| missing("F"))?.to_string(),
        SideArg::N => b.n.ok_or_else(|| missing("N"))?.as_str().to_string(),
    })
}

pub fn render_question<R: Rng>(t: &Template, b: &Bindings, rng: &mut R) -> Result<String, String> {
    let variant = t.texts.get(b.variant).ok_or("no such text variant")?;
    text::realize(variant, b, rng)
}

/// Builds, executes and renders one binding. Fails when the program is ill-posed
/// or its answer falls outside the template's answer domain.
pub fn evaluate<R: Rng>(
    t: &'static Template,
    b: &Bindings,
    scene: &SceneGraph,
    state: &DialogueState,
    options: ExecOptions,
    rng: &mut R,
) -> Result<Candidate, String> {
    let built = build_program(t, b)?;
    let mut ctx = ExecContext::new(scene, state);
    ctx.options = options;
    let exec = execute(&built.program, &ctx).map_err(|e: ProgramError| e.to_string())?;
    for &(n, id) in &built.bound {
        if exec.values[n] != Value::Object(id) {
            return Err(format!("reference at node {n} does not resolve to object {id}"));
        }
    }
    let answer = exec.answer().answer_string().ok_or("answer has no surface form")?;
    if !t.answers.contains(&answer) {
        return Err(format!("answer {answer} is outside the template domain"));
    }
    if t.interval != IntervalType::None && exec.interval.kind != t.interval.interval_kind() {
        return Err(format!("{} interval for a {} template", exec.interval.kind.as_str(), t.interval.as_str()));
    }
    let mut focal: Vec<u32> = Vec::new();
    for &n in &built.focal_nodes {
        if let Value::Object(id) = exec.values[n] {
            if !focal.contains(&id) {
                focal.push(id);
            }
        }
    }
    let (anchor, anchor_action) = built
        .program
        .nodes
        .iter()
        .enumerate()
        .find(|(_, n)| n.module == Module::FindInterval)
        .and_then(|(i, n)| match &exec.values[i] {
            Value::Interval(v) => Some((Some(*v), ActionKind::parse(&n.side[0]))),
            _ => None,
        })
        .unwrap_or((None, None));
    let turn = state.turn_index;
    let or_records = b
        .object_refs()
        .into_iter()
        .filter_map(|r| match r {
            ObjRef::Pronoun { id } => Some(OrRecord { distance: 1, object: *id }),
            ObjRef::LongTerm { id, turn: t0, .. } => Some(OrRecord {
                distance: turn - t0,
                object: *id,
            }),
            ObjRef::Describe { .. } => None,
        })
        .collect();
    let question = render_question(t, b, rng)?;
    Ok(Candidate {
        template: t,
        bindings: b.clone(),
        question,
        answer,
        interval: exec.interval,
        values: exec.values,
        program: built.program,
        focal,
        anchor,
        anchor_action,
        or_records,
        tr: b.interval.as_ref().and_then(|i| i.temporal_relation()),
    })
}

/// Minimal attribute sets that single out `id` among `pool`, drawn from `allowed`.
fn unique_descriptions(
    scene: &SceneGraph,
    id: u32,
    pool: &[u32],
    allowed: &[AttrValue],
) -> Vec<Vec<AttrValue>> {
    let n = allowed.len();
    let mut best: Vec<Vec<AttrValue>> = Vec::new();
    let mut best_len = usize::MAX;
    for mask in 1u32..(1 << n) {
        let len = mask.count_ones() as usize;
        if len > best_len {
            continue;
        }
        let attrs: Vec<AttrValue> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| allowed[i]).collect();
        let unique = pool.iter().filter(|&&o| o != id).all(|&o| {
            let obj = scene.object(o).expect("pool objects exist");
            !attrs.iter().all(|a| obj.attrs.matches(*a))
        });
        if unique {
            if len < best_len {
                best.clear();
                best_len = len;
            }
            best.push(attrs);
        }
    }
    best
}

/// Describes `id` uniquely in the scene, sometimes with one redundant attribute.
pub fn describe<R: Rng>(scene: &SceneGraph, id: u32, exclude: Option<AttrKind>, rng: &mut R) -> Option<Vec<AttrValue>> {
    let obj = scene.object(id)?;
    let allowed: Vec<AttrValue> = AttrKind::ALL
        .iter()
        .filter(|k| Some(**k) != exclude)
        .map(|k| obj.attrs.get(*k))
        .collect();
    let pool: Vec<u32> = scene.objects.iter().map(|o| o.id).collect();
    let mut attrs = unique_descriptions(scene, id, &pool, &allowed).choose(rng)?.clone();
    if rng.gen_bool(0.8) {
        let extra: Vec<AttrValue> = allowed.iter().filter(|a| !attrs.contains(a)).copied().collect();
        if let Some(e) = extra.choose(rng) {
            attrs.push(*e);
        }
    }
    Some(attrs)
}

/// Candidate references to `id` that point back into the dialogue.
pub fn object_refs<R: Rng>(
    scene: &SceneGraph,
    state: &DialogueState,
    id: u32,
    exclude: Option<AttrKind>,
    rng: &mut R,
) -> Vec<ObjRef> {
    let mut out = Vec::new();
    if let Some(last) = &state.last_turn {
        if last.focal == [id] {
            out.push(ObjRef::Pronoun { id });
        }
    }
    let t = state.turn_index;
    let Some(tracked) = state.tracked(id) else { return out };
    let past: Vec<usize> = tracked.turns.iter().copied().filter(|&x| x + 2 <= t).collect();
    if past.is_empty() {
        return out;
    }
    let known: Vec<AttrValue> = tracked
        .known_values()
        .into_iter()
        .filter(|v| Some(v.kind()) != exclude)
        .collect();
    let pool = state.tracked_ids();
    if let Some(attrs) = unique_descriptions(scene, id, &pool, &known).choose(rng) {
        let turn = if rng.gen_bool(0.6) { *past.last().unwrap() } else { *past.choose(rng).unwrap() };
        out.push(ObjRef::LongTerm {
            id,
            attrs: attrs.clone(),
            turn,
        });
    }
    out
}

struct Sampler<'a, 'r, R: Rng> {
    req: &'a InstantiateRequest<'a>,
    rng: &'r mut R,
    exclude: Option<AttrKind>,
}

impl<R: Rng> Sampler<'_, '_, R> {
    fn scene(&self) -> &SceneGraph {
        self.req.scene
    }

    fn fresh_object(&mut self, avoid: &[u32]) -> Option<u32> {
        let scene = self.req.scene;
        let tracked: Vec<u32> = self
            .req
            .state
            .tracked_ids()
            .into_iter()
            .filter(|id| !avoid.contains(id) && scene.object(*id).is_some())
            .collect();
        if !tracked.is_empty() && self.rng.gen_bool(self.req.p_reuse) {
            return tracked.choose(self.rng).copied();
        }
        let all: Vec<u32> = scene.objects.iter().map(|o| o.id).filter(|id| !avoid.contains(id)).collect();
        all.choose(self.rng).copied()
    }

    fn plain_ref(&mut self, avoid: &[u32]) -> Option<ObjRef> {
        let id = self.fresh_object(avoid)?;
        let attrs = describe(self.req.scene, id, self.exclude, self.rng)?;
        Some(ObjRef::Describe { id, attrs })
    }

    /// A pronoun or long-term reference to some object, optionally restricted.
    fn cross_ref(&mut self, filter: &dyn Fn(u32) -> bool) -> Option<ObjRef> {
        let mut pronouns = Vec::new();
        let mut long = Vec::new();
        for id in self.req.state.tracked_ids() {
            if !filter(id) || self.req.scene.object(id).is_none() {
                continue;
            }
            for r in object_refs(self.req.scene, self.req.state, id, self.exclude, self.rng) {
                match r {
                    ObjRef::Pronoun { .. } => pronouns.push(r),
                    _ => long.push(r),
                }
            }
        }
        let use_pronoun = !pronouns.is_empty() && (long.is_empty() || self.rng.gen_bool(self.req.p_pronoun));
        if use_pronoun {
            pronouns.choose(self.rng).cloned()
        } else {
            long.choose(self.rng).cloned()
        }
    }

    fn event_for(&mut self, r: ObjRef) -> Option<EventRef> {
        let scene = self.req.scene;
        let obj = scene.object(r.id())?;
        let mut kinds: Vec<ActionKind> = obj.motion_events().map(|e| e.kind).collect();
        kinds.sort();
        kinds.dedup();
        let action = *kinds.choose(self.rng)?;
        let count = obj.events_of(action).count();
        let order = if count == 1 {
            if self.rng.gen_bool(0.8) {
                None
            } else {
                Some(Order::First)
            }
        } else {
            let opts: Vec<Order> = Order::ALL.iter().copied().filter(|o| o.index(count).is_some()).collect();
            opts.choose(self.rng).copied()
        };
        Some(EventRef { obj: r, action, order })
    }

    fn event_ref(&mut self, cross: bool) -> Option<EventRef> {
        let r = if cross {
            let scene = self.req.scene;
            self.cross_ref(&|id| scene.object(id).is_some_and(|o| o.motion_events().next().is_some()))?
        } else {
            let movers: Vec<u32> = self
                .scene()
                .objects
                .iter()
                .filter(|o| o.motion_events().next().is_some())
                .map(|o| o.id)
                .collect();
            let tracked_movers: Vec<u32> =
                movers.iter().copied().filter(|id| self.req.state.tracked(*id).is_some()).collect();
            let id = if !tracked_movers.is_empty() && self.rng.gen_bool(self.req.p_reuse) {
                *tracked_movers.choose(self.rng)?
            } else {
                *movers.choose(self.rng)?
            };
            ObjRef::Describe {
                id,
                attrs: describe(self.req.scene, id, None, self.rng)?,
            }
        };
        self.event_for(r)
    }

    fn relation(&mut self, choices: &[(TemporalRelation, f64)]) -> TemporalRelation {
        choices.choose_weighted(self.rng, |c| c.1).map(|c| c.0).unwrap_or(TemporalRelation::During)
    }

    fn interval(&mut self, cross: bool) -> Option<IntervalDesc> {
        use TemporalRelation::*;
        let state = self.req.state;
        if self.req.tr == TrMode::Require {
            let mut forms = Vec::new();
            if state.interval.is_some_and(|i| i.kind != IntervalKind::None) {
                forms.push(0);
            }
            if let Some(last) = &state.last_turn {
                if last.anchor.is_some() && last.anchor_action.is_some() {
                    forms.push(1);
                }
            }
            let rel = self.relation(&[(During, 0.4), (Before, 0.2), (After, 0.2), (Until, 0.1), (Since, 0.1)]);
            return match forms.choose(self.rng)? {
                0 => Some(IntervalDesc::Tracked { rel }),
                _ => Some(IntervalDesc::Referred {
                    rel,
                    action: state.last_turn.as_ref()?.anchor_action?,
                }),
            };
        }
        let forms = [(0, if cross { 0.0 } else { 0.1 }), (1, 0.5), (2, 0.4)];
        let form = forms.choose_weighted(self.rng, |f| f.1).ok()?.0;
        match form {
            0 => Some(IntervalDesc::Whole),
            1 => {
                let rel = self.relation(&[(During, 0.35), (Before, 0.2), (After, 0.2), (Until, 0.125), (Since, 0.125)]);
                Some(IntervalDesc::Event {
                    rel,
                    event: self.event_ref(cross)?,
                })
            }
            _ => {
                let from = self.event_ref(cross)?;
                let to = self.event_ref(false)?;
                let from_rel = if self.rng.gen_bool(0.7) { After } else { Since };
                let to_rel = if self.rng.gen_bool(0.7) { Before } else { Until };
                Some(IntervalDesc::Between { from, from_rel, to, to_rel })
            }
        }
    }

    /// Executes an interval on its own and checks its kind against the template.
    fn interval_fits(&self, d: &IntervalDesc) -> bool {
        let want = self.req.template.interval.interval_kind();
        let mut p = Program::default();
        let kind = match d.emit(&mut p) {
            None => crate::interval::classify(self.req.scene, 0.0, self.req.scene.duration),
            Some(_) => {
                let mut ctx = ExecContext::new(self.req.scene, self.req.state);
                ctx.options = self.req.options;
                match execute(&p, &ctx) {
                    Ok(e) => match e.answer() {
                        Value::Interval(v) => v.kind,
                        _ => return false,
                    },
                    Err(_) => return false,
                }
            }
        };
        kind == want
    }

    fn filters(&mut self, needed: bool) -> Vec<AttrValue> {
        let weights = if needed { [0.0, 0.6, 0.4] } else { [0.35, 0.45, 0.2] };
        let k = [0usize, 1, 2].choose_weighted(self.rng, |i| weights[*i]).copied().unwrap_or(1);
        let mut kinds = AttrKind::ALL.to_vec();
        kinds.shuffle(self.rng);
        kinds.truncate(k);
        kinds.sort();
        let from_scene = self.rng.gen_bool(0.75);
        let scene = self.req.scene;
        let source = scene.objects.choose(self.rng).map(|o| o.attrs);
        kinds
            .into_iter()
            .filter_map(|kind| match (from_scene, source) {
                (true, Some(a)) => Some(a.get(kind)),
                _ => AttrValue::all_of(kind).choose(self.rng).copied(),
            })
            .collect()
    }

    fn motion(&mut self) -> ActionKind {
        *ActionKind::MOTIONS.choose(self.rng).unwrap()
    }

    /// One random full binding, or `None` if a slot has no admissible value.
    fn sample(&mut self, or_place: Option<OrPlacement>) -> Option<Bindings> {
        let t = self.req.template;
        let slots = t.slots();
        let mut b = Bindings {
            variant: self.rng.gen_range(0..t.texts.len()),
            ..Bindings::default()
        };
        if slots.interval {
            let d = self.interval(or_place == Some(OrPlacement::IntervalEvent))?;
            if !self.interval_fits(&d) {
                return None;
            }
            b.interval = Some(d);
        }
        let mut used: Vec<u32> = Vec::new();
        for (slot, on) in [(ObjSlot::O1, slots.o1), (ObjSlot::O2, slots.o2)] {
            if !on {
                continue;
            }
            let r = if or_place == Some(OrPlacement::Slot(slot)) {
                let avoid = used.clone();
                self.cross_ref(&|id| !avoid.contains(&id))?
            } else {
                self.plain_ref(&used)?
            };
            used.push(r.id());
            match slot {
                ObjSlot::O1 => b.o1 = Some(r),
                ObjSlot::O2 => b.o2 = Some(r),
            }
        }
        if slots.a1 {
            b.a1 = Some(if t.question_type == super::QuestionType::ObjectCount
                || t.question_type == super::QuestionType::ObjectExist
            {
                if t.interval == IntervalType::AtomicNonspatial && self.rng.gen_bool(0.25) {
                    ActionKind::NoAction
                } else {
                    self.motion()
                }
            } else {
                self.motion()
            });
        }
        if slots.a2 {
            let a1 = b.a1;
            let mut a = self.motion();
            if t.question_type != super::QuestionType::CompareActionFreq {
                while Some(a) == a1 {
                    a = self.motion();
                }
            }
            b.a2 = Some(a);
        }
        if slots.r {
            b.r = SpatialRelation::ALL.choose(self.rng).copied();
        }
        if slots.s {
            b.s = self.filters(t.needs_filters());
        }
        if slots.f {
            b.f = Some(if self.rng.gen_bool(0.5) { Frequency::Least } else { Frequency::Most });
        }
        if slots.n {
            b.n = Order::ALL.choose(self.rng).copied();
        }
        Some(b)
    }
}

/// Samples bindings for `req.template` until `accept` takes one or the budget runs out.
pub fn instantiate<R: Rng>(
    req: &InstantiateRequest,
    rng: &mut R,
    accept: &mut dyn FnMut(&Candidate) -> bool,
) -> Result<Candidate, Rejected> {
    let t = req.template;
    let slots = t.slots();
    if req.tr == TrMode::Require && !slots.interval {
        return Err(Rejected::Infeasible("template has no interval".into()));
    }
    let mut placements = Vec::new();
    if req.or_required {
        if slots.o1 {
            placements.push(OrPlacement::Slot(ObjSlot::O1));
        }
        if slots.o2 {
            placements.push(OrPlacement::Slot(ObjSlot::O2));
        }
        if placements.is_empty() && slots.interval && req.tr == TrMode::Forbid {
            placements.push(OrPlacement::IntervalEvent);
        }
        if placements.is_empty() {
            return Err(Rejected::Infeasible("no place for an object reference".into()));
        }
        if req.state.last_turn.is_none() {
            return Err(Rejected::Infeasible("first turn".into()));
        }
    }
    let mut sampler = Sampler {
        req,
        rng,
        exclude: t.queried_attr(),
    };
    for _ in 0..req.budget {
        let place = placements.choose(sampler.rng).copied();
        let Some(b) = sampler.sample(place) else { continue };
        let Ok(c) = evaluate(t, &b, req.scene, req.state, req.options, sampler.rng) else { continue };
        if c.program.len() < 3 {
            continue;
        }
        if accept(&c) {
            return Ok(c);
        }
    }
    Err(Rejected::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{simulate_scene, SceneConfig};
    use crate::template::templates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_template_instantiates_somewhere() {
        let cfg = SceneConfig::default();
        for t in templates() {
            let mut ok = false;
            for seed in 0..40 {
                let scene = simulate_scene(&cfg, seed).unwrap();
                let state = DialogueState::initial(scene.duration);
                let req = InstantiateRequest {
                    template: t,
                    scene: &scene,
                    state: &state,
                    tr: TrMode::Forbid,
                    or_required: false,
                    p_reuse: 0.5,
                    p_pronoun: 0.5,
                    budget: 100,
                    options: ExecOptions::default(),
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                if let Ok(c) = instantiate(&req, &mut rng, &mut |_| true) {
                    assert!(t.answers.contains(&c.answer));
                    assert!(c.program.len() >= 3, "{}: {}", t.id, c.program.to_compact());
                    assert!(!c.question.contains('<'), "{}", c.question);
                    ok = true;
                    break;
                }
            }
            assert!(ok, "{} never instantiated", t.id);
        }
    }

    #[test]
    fn describe_is_unique() {
        let scene = simulate_scene(&SceneConfig::default(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for o in &scene.objects {
            let attrs = describe(&scene, o.id, Some(AttrKind::Color), &mut rng);
            if let Some(a) = attrs {
                assert!(a.iter().all(|v| v.kind() != AttrKind::Color));
                assert_eq!(scene.matching(&a), vec![o.id]);
            }
        }
    }

    #[test]
    fn tr_requires_interval_slot() {
        let scene = simulate_scene(&SceneConfig::default(), 1).unwrap();
        let state = DialogueState::initial(scene.duration);
        let req = InstantiateRequest {
            template: crate::template::template_by_id("attribute_query_color").unwrap(),
            scene: &scene,
            state: &state,
            tr: TrMode::Require,
            or_required: false,
            p_reuse: 0.5,
            p_pronoun: 0.5,
            budget: 10,
            options: ExecOptions::default(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(instantiate(&req, &mut rng, &mut |_| true), Err(Rejected::Infeasible(_))));
    }
}
