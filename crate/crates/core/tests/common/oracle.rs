//! Brute-force reference semantics for every DSL module on a 0.01 s time grid.
//!
//! Nothing here calls the interval or summary helpers of the library: each
//! object's timeline is rasterized into grid cells and every module is
//! answered by scanning those cells.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use vidialog::interval::{IntervalKind, SpatialRelation, TemporalRelation, VideoInterval};
use vidialog::program::{apply_module, ExecContext, ExecOptions, Frequency, Module, Order, Value};
use vidialog::scene::{ActionKind, AttrKind, AttrValue, SceneGraph};
use vidialog::state::{DialogueState, LastTurn, TrackedObject};

pub const GRID: f64 = 0.01;
const MIN_DURATION: f64 = 0.5;

fn cell(t: f64) -> usize {
    (t / GRID).round() as usize
}

fn time(c: usize) -> f64 {
    c as f64 / 100.0
}

/// Rasterized scene.
pub struct Raster<'a> {
    pub scene: &'a SceneGraph,
    cells: usize,
    /// Per object, the timeline index active in each cell.
    event: Vec<Vec<Option<usize>>>,
    contained: Vec<Vec<bool>>,
}

impl<'a> Raster<'a> {
    pub fn new(scene: &'a SceneGraph) -> Self {
        let cells = cell(scene.duration);
        let mut event = Vec::new();
        let mut contained = Vec::new();
        for o in &scene.objects {
            let mut ev = vec![None; cells];
            let mut co = vec![false; cells];
            for (c, slot) in ev.iter_mut().enumerate() {
                let mid = time(c) + GRID / 2.0;
                *slot = o.timeline.iter().position(|e| e.start < mid && mid < e.end);
                co[c] = o.containment.iter().any(|k| k.start < mid && mid < k.end);
            }
            event.push(ev);
            contained.push(co);
        }
        Raster {
            scene,
            cells,
            event,
            contained,
        }
    }

    fn idx(&self, id: u32) -> usize {
        self.scene.objects.iter().position(|o| o.id == id).unwrap()
    }

    fn kind(&self, o: usize, e: usize) -> ActionKind {
        self.scene.objects[o].timeline[e].kind
    }

    /// Runs of timeline indices over the cells of `[s, e]`, in order.
    fn runs(&self, o: usize, s: f64, e: f64) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for c in cell(s)..cell(e).min(self.cells) {
            if let Some(ev) = self.event[o][c] {
                if out.last() != Some(&ev) {
                    out.push(ev);
                }
            }
        }
        out
    }

    fn motions(&self, o: usize, s: f64, e: f64) -> Vec<ActionKind> {
        self.runs(o, s, e).into_iter().map(|ev| self.kind(o, ev)).filter(|k| *k != ActionKind::NoAction).collect()
    }

    fn sequence(&self, o: usize, s: f64, e: f64) -> Vec<ActionKind> {
        let m = self.motions(o, s, e);
        if m.is_empty() {
            vec![ActionKind::NoAction]
        } else {
            m
        }
    }

    fn set(&self, o: usize, s: f64, e: f64) -> BTreeSet<ActionKind> {
        self.sequence(o, s, e).into_iter().collect()
    }

    fn any_contained(&self, o: usize, s: f64, e: f64) -> bool {
        (cell(s)..cell(e).min(self.cells)).any(|c| self.contained[o][c])
    }

    fn hidden(&self, o: usize, s: f64, e: f64) -> bool {
        let r = cell(s)..cell(e).min(self.cells);
        !r.is_empty() && r.clone().all(|c| self.contained[o][c])
    }

    fn translates(&self, o: usize, s: f64, e: f64) -> bool {
        self.runs(o, s, e).into_iter().any(|ev| matches!(self.kind(o, ev), ActionKind::Flying | ActionKind::Sliding))
    }

    /// Atomic when no object switches event strictly inside the span.
    pub fn classify(&self, s: f64, e: f64) -> IntervalKind {
        let (a, b) = (cell(s), cell(e).min(self.cells));
        for ev in &self.event {
            for c in a + 1..b {
                if ev[c] != ev[c - 1] {
                    return IntervalKind::Compositional;
                }
            }
        }
        IntervalKind::Atomic
    }

    pub fn interval(&self, s: f64, e: f64) -> VideoInterval {
        VideoInterval {
            start: s,
            end: e,
            kind: self.classify(s, e),
        }
    }

    fn position(&self, o: usize, t: f64) -> [f64; 2] {
        let c = cell(t).min(self.cells - 1);
        let ev = self.event[o][c].unwrap();
        let e = &self.scene.objects[o].timeline[ev];
        let a = if e.end > e.start { ((t - e.start) / (e.end - e.start)).clamp(0.0, 1.0) } else { 0.0 };
        [
            e.start_pos[0] + a * (e.end_pos[0] - e.start_pos[0]),
            e.start_pos[1] + a * (e.end_pos[1] - e.start_pos[1]),
        ]
    }

    /// Event spans of one kind for an object, over the whole video.
    fn events(&self, o: usize, kind: ActionKind) -> Vec<(f64, f64)> {
        let mut out: Vec<(usize, usize, usize)> = Vec::new();
        for c in 0..self.cells {
            let Some(ev) = self.event[o][c] else { continue };
            if self.kind(o, ev) != kind {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == ev => last.2 = c + 1,
                _ => out.push((ev, c, c + 1)),
            }
        }
        out.into_iter().map(|(_, a, b)| (time(a), time(b))).collect()
    }
}

fn left_of(rel: SpatialRelation, p: [f64; 2], a: [f64; 2]) -> bool {
    match rel {
        SpatialRelation::Left => p[0] < a[0],
        SpatialRelation::Right => p[0] > a[0],
        SpatialRelation::Front => p[1] < a[1],
        SpatialRelation::Behind => p[1] > a[1],
    }
}

fn order_index(o: Order, len: usize) -> Option<usize> {
    let i = match o {
        Order::First => 0,
        Order::Second => 1,
        Order::Third => 2,
        Order::Last => len.checked_sub(1)?,
    };
    (i < len).then_some(i)
}

/// One module application: inputs, side arguments and the context state.
#[derive(Debug, Clone)]
pub struct Call {
    pub module: Module,
    pub side: Vec<String>,
    pub inputs: Vec<Value>,
}

/// Reference result; `None` means the call is ill-posed.
pub fn reference(r: &Raster, state: &DialogueState, call: &Call) -> Option<Value> {
    let scene = r.scene;
    let whole = r.interval(0.0, scene.duration);
    let consumes = matches!(
        call.module,
        Module::FilterAction
            | Module::FilterContained
            | Module::SameActionSet
            | Module::SameActionSequence
            | Module::CountAction
            | Module::RelateSpatial
            | Module::QueryActionSet
            | Module::QueryActionSequence
            | Module::ActionByFrequency
            | Module::ActionByOrder
    );
    let (iv, rest): (VideoInterval, &[Value]) = match call.inputs.first() {
        Some(Value::Interval(v)) if consumes => (*v, &call.inputs[1..]),
        _ => (whole, &call.inputs[..]),
    };
    let (s, e) = (iv.start, iv.end);
    let objs = |v: &Value| match v {
        Value::Objects(ids) => ids.clone(),
        _ => panic!("objects expected"),
    };
    let obj = |v: &Value| match v {
        Value::Object(id) => r.idx(*id),
        _ => panic!("object expected"),
    };
    let int = |v: &Value| match v {
        Value::Integer(n) => *n,
        _ => panic!("integer expected"),
    };
    let side = |i: usize| call.side[i].as_str();
    let action = |i: usize| ActionKind::parse(side(i)).unwrap();
    let attr_filter = |kind: AttrKind| {
        let want = AttrValue::parse(kind, side(0)).unwrap();
        Some(Value::Objects(
            objs(&rest[0]).into_iter().filter(|id| scene.object(*id).unwrap().attrs.get(kind) == want).collect(),
        ))
    };
    let related = |a: f64, b: f64| {
        if b - a < MIN_DURATION - 1e-9 {
            None
        } else {
            Some(Value::Interval(r.interval(a, b)))
        }
    };
    Some(match call.module {
        Module::Scene => Value::Objects(scene.objects.iter().map(|o| o.id).collect()),
        Module::FilterColor => return attr_filter(AttrKind::Color),
        Module::FilterMaterial => return attr_filter(AttrKind::Material),
        Module::FilterShape => return attr_filter(AttrKind::Shape),
        Module::FilterSize => return attr_filter(AttrKind::Size),
        Module::FilterAction => {
            let k = action(0);
            Value::Objects(
                objs(&rest[0])
                    .into_iter()
                    .filter(|id| {
                        let o = r.idx(*id);
                        !r.hidden(o, s, e) && r.set(o, s, e).contains(&k)
                    })
                    .collect(),
            )
        }
        Module::FilterContained => {
            Value::Objects(objs(&rest[0]).into_iter().filter(|id| r.any_contained(r.idx(*id), s, e)).collect())
        }
        Module::SameActionSet | Module::SameActionSequence => {
            let p = obj(&rest[0]);
            let seq = call.module == Module::SameActionSequence;
            Value::Objects(
                (0..scene.objects.len())
                    .filter(|&o| o != p && !r.hidden(o, s, e))
                    .filter(|&o| {
                        if seq {
                            r.sequence(o, s, e) == r.sequence(p, s, e)
                        } else {
                            r.set(o, s, e) == r.set(p, s, e)
                        }
                    })
                    .map(|o| scene.objects[o].id)
                    .collect(),
            )
        }
        Module::Unique => {
            let ids = objs(&rest[0]);
            if ids.len() != 1 {
                return None;
            }
            Value::Object(ids[0])
        }
        Module::CountObject => Value::Integer(objs(&rest[0]).len() as u32),
        Module::Exist => Value::Binary(!objs(&rest[0]).is_empty()),
        Module::CountAction => {
            let k = action(0);
            if k == ActionKind::NoAction {
                return None;
            }
            Value::Integer(r.motions(obj(&rest[0]), s, e).iter().filter(|x| **x == k).count() as u32)
        }
        Module::FindInterval => {
            let evs = r.events(obj(&rest[0]), action(0));
            let i = match call.side.get(1) {
                None => (evs.len() == 1).then_some(0)?,
                Some(o) => order_index(Order::parse(o).unwrap(), evs.len())?,
            };
            Value::Interval(r.interval(evs[i].0, evs[i].1))
        }
        Module::UnionInterval => {
            let (Value::Interval(a), Value::Interval(b)) = (&rest[0], &rest[1]) else { panic!() };
            return related(a.start.max(b.start), a.end.min(b.end));
        }
        Module::RelateTemporal => {
            let Value::Interval(b) = &rest[0] else { panic!() };
            if b.kind == IntervalKind::None {
                return None;
            }
            let d = scene.duration;
            return match TemporalRelation::parse(side(0)).unwrap() {
                TemporalRelation::During => related(b.start, b.end),
                TemporalRelation::Before => related(0.0, b.start),
                TemporalRelation::After => related(b.end, d),
                TemporalRelation::Until => related(0.0, b.end),
                TemporalRelation::Since => related(b.start, d),
            };
        }
        Module::RelateSpatial => {
            if r.classify(s, e) != IntervalKind::Atomic {
                return None;
            }
            let rel = SpatialRelation::parse(side(0)).unwrap();
            let a = obj(&rest[0]);
            Value::Objects(
                (0..scene.objects.len())
                    .filter(|&o| o != a)
                    .filter(|&o| !(r.translates(o, s, e) && r.translates(a, s, e)))
                    .filter(|&o| !r.any_contained(o, s, e) && !r.any_contained(a, s, e))
                    .filter(|&o| [s, e].iter().all(|&t| left_of(rel, r.position(o, t), r.position(a, t))))
                    .map(|o| scene.objects[o].id)
                    .collect(),
            )
        }
        Module::GreaterThan => Value::Binary(int(&rest[0]) > int(&rest[1])),
        Module::LessThan => Value::Binary(int(&rest[0]) < int(&rest[1])),
        Module::Equal => Value::Binary(int(&rest[0]) == int(&rest[1])),
        Module::ReferObject => {
            let l = state.last_turn.as_ref()?;
            if l.focal.len() != 1 {
                return None;
            }
            Value::Objects(l.focal.clone())
        }
        Module::TrackObject => {
            if state.objects.is_empty() {
                return None;
            }
            Value::Objects(state.objects.iter().map(|o| o.id).collect())
        }
        Module::ReferInterval => {
            let a = state.last_turn.as_ref()?.anchor?;
            Value::Interval(r.interval(a.start, a.end))
        }
        Module::TrackInterval => {
            let a = state.interval.filter(|i| i.kind != IntervalKind::None)?;
            Value::Interval(r.interval(a.start, a.end))
        }
        Module::QueryActionSet => Value::ActionSet(r.set(obj(&rest[0]), s, e)),
        Module::QueryActionSequence => Value::ActionSequence(r.sequence(obj(&rest[0]), s, e)),
        Module::ActionByFrequency => {
            let mut freq: BTreeMap<ActionKind, u32> = BTreeMap::new();
            for k in r.motions(obj(&rest[0]), s, e) {
                *freq.entry(k).or_default() += 1;
            }
            let f = Frequency::parse(side(0)).unwrap();
            let hits: BTreeSet<ActionKind> = match f {
                Frequency::Times(n) => freq.iter().filter(|(_, c)| **c == n).map(|(k, _)| *k).collect(),
                Frequency::Least | Frequency::Most => {
                    let t = if f == Frequency::Least { freq.values().min() } else { freq.values().max() }?;
                    let h: BTreeSet<ActionKind> = freq.iter().filter(|(_, c)| *c == t).map(|(k, _)| *k).collect();
                    if h.len() != 1 {
                        return None;
                    }
                    h
                }
            };
            if hits.is_empty() {
                return None;
            }
            Value::ActionSet(hits)
        }
        Module::ActionByOrder => {
            let seq = r.sequence(obj(&rest[0]), s, e);
            Value::Action(seq[order_index(Order::parse(side(0)).unwrap(), seq.len())?])
        }
        Module::EqualAction => Value::Binary(rest[0] == rest[1]),
        Module::QueryColor => Value::Color(scene.objects[obj(&rest[0])].attrs.color),
        Module::QueryMaterial => Value::Material(scene.objects[obj(&rest[0])].attrs.material),
        Module::QueryShape => Value::Shape(scene.objects[obj(&rest[0])].attrs.shape),
        Module::QuerySize => Value::Size(scene.objects[obj(&rest[0])].attrs.size),
    })
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Interval(x), Value::Interval(y)) => {
            (x.start - y.start).abs() < 1e-6 && (x.end - y.end).abs() < 1e-6 && x.kind == y.kind
        }
        _ => a == b,
    }
}

/// Random dialogue state over the scene: some tracked objects, a last turn
/// with zero to two focal objects and maybe an anchor, maybe a tracked interval.
pub fn random_state<R: Rng>(r: &Raster, rng: &mut R) -> DialogueState {
    let scene = r.scene;
    let mut st = DialogueState::initial(scene.duration);
    let mut ids: Vec<u32> = scene.objects.iter().map(|o| o.id).collect();
    ids.shuffle(rng);
    for &id in ids.iter().take(rng.gen_range(0..=ids.len())) {
        st.objects.push(TrackedObject::new(id, 1));
    }
    let random_span = |rng: &mut R| {
        let a = rng.gen_range(0..cell(scene.duration) - 10);
        let b = rng.gen_range(a + 10..=cell(scene.duration));
        r.interval(time(a), time(b))
    };
    if rng.gen_bool(0.8) {
        let focal: Vec<u32> = ids.iter().take(rng.gen_range(0..=2)).copied().collect();
        let anchor = rng.gen_bool(0.6).then(|| random_span(rng));
        st.last_turn = Some(LastTurn {
            question: String::new(),
            program: Default::default(),
            answer: String::new(),
            focal,
            anchor,
            anchor_action: None,
        });
    }
    if rng.gen_bool(0.6) {
        st.interval = Some(random_span(rng));
    }
    st
}

fn intervals<R: Rng>(r: &Raster, rng: &mut R) -> Vec<VideoInterval> {
    let ts = r.scene.timestamps();
    let mut out = Vec::new();
    // Spans between event boundaries, atomic ones included.
    for _ in 0..6 {
        let i = rng.gen_range(0..ts.len() - 1);
        let j = if rng.gen_bool(0.5) { i + 1 } else { rng.gen_range(i + 1..ts.len()) };
        out.push(r.interval(ts[i], ts[j]));
    }
    // Arbitrary grid spans.
    let n = cell(r.scene.duration);
    for _ in 0..4 {
        let a = rng.gen_range(0..n - 1);
        let b = rng.gen_range(a + 1..=n);
        out.push(r.interval(time(a), time(b)));
    }
    out
}

/// Outcome of checking one scene.
#[derive(Debug, Default)]
pub struct Tally {
    pub checks: usize,
    pub mismatches: Vec<String>,
    pub modules: BTreeSet<&'static str>,
}

fn check(r: &Raster, state: &DialogueState, call: Call, tally: &mut Tally) {
    let ctx = ExecContext {
        scene: r.scene,
        state,
        options: ExecOptions::default(),
    };
    let got = apply_module(call.module, &call.side, &call.inputs, &ctx).ok();
    let want = reference(r, state, &call);
    tally.checks += 1;
    tally.modules.insert(call.module.name());
    let ok = match (&got, &want) {
        (Some(a), Some(b)) => same(a, b),
        (None, None) => true,
        _ => false,
    };
    if !ok && tally.mismatches.len() < 20 {
        tally.mismatches.push(format!(
            "{}: {} {:?} {:?}: got {:?}, want {:?}",
            r.scene.video_id,
            call.module.name(),
            call.side,
            call.inputs,
            got,
            want
        ));
    }
}

fn call(module: Module, side: &[&str], inputs: Vec<Value>) -> Call {
    Call {
        module,
        side: side.iter().map(|s| s.to_string()).collect(),
        inputs,
    }
}

/// Applies every module to sampled inputs over one scene.
pub fn check_scene<R: Rng>(scene: &SceneGraph, rng: &mut R, tally: &mut Tally) {
    let r = Raster::new(scene);
    let state = random_state(&r, rng);
    let ids: Vec<u32> = scene.objects.iter().map(|o| o.id).collect();
    let mut subsets = vec![ids.clone(), vec![]];
    for _ in 0..3 {
        let mut s: Vec<u32> = ids.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        s.sort_unstable();
        subsets.push(s);
    }
    let ivs = intervals(&r, rng);
    let actions = ["flying", "sliding", "rotating", "no_action"];
    let orders = ["first", "second", "third", "last"];
    let freqs = ["least", "most", "1", "2", "3"];
    let objects = |v: &Vec<u32>| Value::Objects(v.clone());

    check(&r, &state, call(Module::Scene, &[], vec![]), tally);
    for sub in &subsets {
        for (m, kind) in [
            (Module::FilterColor, AttrKind::Color),
            (Module::FilterMaterial, AttrKind::Material),
            (Module::FilterShape, AttrKind::Shape),
            (Module::FilterSize, AttrKind::Size),
        ] {
            let v = *AttrValue::all_of(kind).choose(rng).unwrap();
            check(&r, &state, call(m, &[v.as_str()], vec![objects(sub)]), tally);
        }
        for m in [Module::Unique, Module::CountObject, Module::Exist] {
            check(&r, &state, call(m, &[], vec![objects(sub)]), tally);
        }
    }
    check(&r, &state, call(Module::ReferObject, &["it"], vec![]), tally);
    check(&r, &state, call(Module::ReferInterval, &["that"], vec![]), tally);
    check(&r, &state, call(Module::TrackObject, &[], vec![]), tally);
    check(&r, &state, call(Module::TrackInterval, &[], vec![]), tally);
    for (a, b) in [(1u32, 2u32), (2, 2), (3, 0)] {
        for m in [Module::GreaterThan, Module::LessThan, Module::Equal] {
            check(&r, &state, call(m, &[], vec![Value::Integer(a), Value::Integer(b)]), tally);
        }
    }
    for &id in &ids {
        let o = Value::Object(id);
        for m in [Module::QueryColor, Module::QueryMaterial, Module::QueryShape, Module::QuerySize] {
            check(&r, &state, call(m, &[], vec![o.clone()]), tally);
        }
        for a in actions {
            check(&r, &state, call(Module::FindInterval, &[a], vec![o.clone()]), tally);
            for ord in orders {
                check(&r, &state, call(Module::FindInterval, &[a, ord], vec![o.clone()]), tally);
            }
        }
    }
    // Interval-consuming modules, with the whole video (no input) and sampled spans.
    let mut spans: Vec<Option<VideoInterval>> = vec![None];
    spans.extend(ivs.iter().copied().map(Some));
    for span in &spans {
        let with = |v: Vec<Value>| -> Vec<Value> {
            match span {
                Some(iv) => std::iter::once(Value::Interval(*iv)).chain(v).collect(),
                None => v,
            }
        };
        for sub in &subsets[..3] {
            for a in actions {
                check(&r, &state, call(Module::FilterAction, &[a], with(vec![objects(sub)])), tally);
            }
            check(&r, &state, call(Module::FilterContained, &[], with(vec![objects(sub)])), tally);
        }
        for &id in &ids {
            let o = Value::Object(id);
            for m in [Module::SameActionSet, Module::SameActionSequence, Module::QueryActionSet, Module::QueryActionSequence] {
                check(&r, &state, call(m, &[], with(vec![o.clone()])), tally);
            }
            for a in actions {
                check(&r, &state, call(Module::CountAction, &[a], with(vec![o.clone()])), tally);
            }
            for f in freqs {
                check(&r, &state, call(Module::ActionByFrequency, &[f], with(vec![o.clone()])), tally);
            }
            for ord in orders {
                check(&r, &state, call(Module::ActionByOrder, &[ord], with(vec![o.clone()])), tally);
            }
            for rel in ["left", "right", "front", "behind"] {
                check(&r, &state, call(Module::RelateSpatial, &[rel], with(vec![o.clone()])), tally);
            }
        }
    }
    for iv in &ivs {
        for rel in ["during", "before", "after", "until", "since"] {
            check(&r, &state, call(Module::RelateTemporal, &[rel], vec![Value::Interval(*iv)]), tally);
        }
        let other = ivs.choose(rng).unwrap();
        check(&r, &state, call(Module::UnionInterval, &[], vec![Value::Interval(*iv), Value::Interval(*other)]), tally);
    }
    for _ in 0..4 {
        let (a, b) = (*ids.choose(rng).unwrap(), *ids.choose(rng).unwrap());
        let span = *ivs.choose(rng).unwrap();
        for m in [Module::QueryActionSet, Module::QueryActionSequence] {
            let ctx = ExecContext {
                scene,
                state: &state,
                options: ExecOptions::default(),
            };
            let x = apply_module(m, &[], &[Value::Interval(span), Value::Object(a)], &ctx).unwrap();
            let y = apply_module(m, &[], &[Value::Interval(span), Value::Object(b)], &ctx).unwrap();
            check(&r, &state, call(Module::EqualAction, &[], vec![x, y]), tally);
        }
    }
}
