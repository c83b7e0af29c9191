use std::collections::BTreeSet;

use super::value::{Frequency, Order, Tag, Value};
use super::{IntervalInput, Module, Program, ProgramError};
use crate::interval::{
    holds_spatial, make_interval, summarize_actions, IntervalKind, SpatialRelation, TemporalRelation,
    VideoInterval, DEFAULT_MIN_DURATION,
};
use crate::scene::{ActionKind, AttrKind, AttrValue, SceneGraph, SceneObject, EPS};
use crate::state::DialogueState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecOptions {
    pub min_duration: f64,
    /// When set, every interval-consuming module reads this interval instead of its input.
    pub interval_override: Option<VideoInterval>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            min_duration: DEFAULT_MIN_DURATION,
            interval_override: None,
        }
    }
}

/// Scene truncated at the current cutoff plus the dialogue state.
#[derive(Debug, Clone, Copy)]
pub struct ExecContext<'a> {
    pub scene: &'a SceneGraph,
    pub state: &'a DialogueState,
    pub options: ExecOptions,
}

impl<'a> ExecContext<'a> {
    pub fn new(scene: &'a SceneGraph, state: &'a DialogueState) -> Self {
        ExecContext {
            scene,
            state,
            options: ExecOptions::default(),
        }
    }

    fn whole(&self) -> VideoInterval {
        make_interval(self.scene, 0.0, self.scene.duration)
    }

    fn object(&self, id: u32) -> Result<&'a SceneObject, String> {
        self.scene.object(id).ok_or_else(|| format!("object {id} is not in the scene"))
    }
}

/// Values of every node plus the interval the question is about.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub values: Vec<Value>,
    pub interval: VideoInterval,
}

impl Execution {
    pub fn answer(&self) -> &Value {
        self.values.last().expect("programs are non-empty")
    }
}

pub fn execute(program: &Program, ctx: &ExecContext) -> Result<Execution, ProgramError> {
    execute_with(program, ctx, None)
}

/// Executes nodes in order. `stop_after` evaluates only a prefix.
pub fn execute_with(
    program: &Program,
    ctx: &ExecContext,
    stop_after: Option<usize>,
) -> Result<Execution, ProgramError> {
    program.check_order()?;
    let last = stop_after.unwrap_or(program.len() - 1).min(program.len() - 1);
    let mut values: Vec<Value> = Vec::with_capacity(last + 1);
    let mut interval = None;
    for (i, node) in program.nodes.iter().enumerate().take(last + 1) {
        let inputs: Vec<Value> = node.inputs.iter().map(|&j| values[j].clone()).collect();
        let (v, used) = apply_node(i, node.module, &node.side, &inputs, ctx)?;
        if interval.is_none() {
            interval = used;
        }
        values.push(v);
    }
    Ok(Execution {
        values,
        interval: interval.unwrap_or_else(|| VideoInterval::none(ctx.scene.duration)),
    })
}

/// Applies one module to already-evaluated inputs.
pub fn apply_module(module: Module, side: &[String], inputs: &[Value], ctx: &ExecContext) -> Result<Value, ProgramError> {
    apply_node(0, module, side, inputs, ctx).map(|(v, _)| v)
}

/// Static type inference; returns the output tag of the program.
pub fn typecheck(program: &Program) -> Result<Tag, ProgramError> {
    program.check_order()?;
    let mut tags: Vec<Tag> = Vec::new();
    for (i, node) in program.nodes.iter().enumerate() {
        let sig = node.module.signature();
        let got: Vec<Tag> = node.inputs.iter().map(|&j| tags[j]).collect();
        let mismatch = |detail: String| ProgramError::TypeMismatch { node: i, detail };
        let rest = match (sig.interval, got.first()) {
            (IntervalInput::Optional, Some(Tag::Interval)) if got.len() == sig.inputs.len() + 1 => &got[1..],
            _ => &got[..],
        };
        if node.module == Module::EqualAction {
            if rest.len() != 2 || rest[0] != rest[1] || !matches!(rest[0], Tag::ActionSet | Tag::ActionSequence) {
                return Err(mismatch(format!("equal_action on {rest:?}")));
            }
        } else if rest != sig.inputs {
            return Err(mismatch(format!("{} expects {:?}, got {:?}", node.module, sig.inputs, got)));
        }
        check_side(i, node.module, &node.side)?;
        tags.push(sig.output);
    }
    Ok(*tags.last().unwrap())
}

fn check_side(node: usize, module: Module, side: &[String]) -> Result<Vec<Value>, ProgramError> {
    let sig = module.signature();
    if side.len() < sig.required_side || side.len() > sig.side.len() {
        return Err(ProgramError::TypeMismatch {
            node,
            detail: format!("{module} takes {} side arguments, got {}", sig.side.len(), side.len()),
        });
    }
    side.iter()
        .zip(sig.side)
        .map(|(s, tag)| {
            parse_literal(*tag, s).ok_or_else(|| ProgramError::TypeMismatch {
                node,
                detail: format!("{s:?} is not a {tag:?}"),
            })
        })
        .collect()
}

fn parse_literal(tag: Tag, s: &str) -> Option<Value> {
    let attr = |k| AttrValue::parse(k, s).map(Value::from_attr);
    match tag {
        Tag::Action => ActionKind::parse(s).map(Value::Action),
        Tag::SpatialRelation => SpatialRelation::parse(s).map(Value::SpatialRelation),
        Tag::TemporalRelation => TemporalRelation::parse(s).map(Value::TemporalRelation),
        Tag::Frequency => Frequency::parse(s).map(Value::Frequency),
        Tag::Order => Order::parse(s).map(Value::Order),
        Tag::Color => attr(AttrKind::Color),
        Tag::Material => attr(AttrKind::Material),
        Tag::Shape => attr(AttrKind::Shape),
        Tag::Size => attr(AttrKind::Size),
        Tag::Reference => Some(Value::Reference(s.to_string())),
        _ => None,
    }
}

fn apply_node(
    node: usize,
    module: Module,
    side: &[String],
    inputs: &[Value],
    ctx: &ExecContext,
) -> Result<(Value, Option<VideoInterval>), ProgramError> {
    let side = check_side(node, module, side)?;
    let sig = module.signature();
    let mismatch = |detail: String| ProgramError::TypeMismatch { node, detail };
    let ill = |reason: String| ProgramError::IllPosed {
        node,
        module: module.name(),
        reason,
    };

    // Split off the optional leading interval.
    let (given, rest) = match (sig.interval, inputs.first()) {
        (IntervalInput::Optional, Some(Value::Interval(iv))) if inputs.len() == sig.inputs.len() + 1 => {
            (Some(*iv), &inputs[1..])
        }
        _ => (None, inputs),
    };
    if module != Module::EqualAction {
        let tags: Vec<Tag> = rest.iter().map(Value::tag).collect();
        if tags != sig.inputs {
            return Err(mismatch(format!("{module} expects {:?}, got {:?}", sig.inputs, tags)));
        }
    }
    let used = if module.consumes_interval() {
        Some(ctx.options.interval_override.or(given).unwrap_or_else(|| ctx.whole()))
    } else {
        None
    };
    let iv = used.unwrap_or_else(|| ctx.whole());

    let objects = |v: &Value| -> Vec<u32> {
        match v {
            Value::Objects(ids) => ids.clone(),
            _ => Vec::new(),
        }
    };
    let object_id = |v: &Value| -> u32 {
        match v {
            Value::Object(id) => *id,
            _ => u32::MAX,
        }
    };
    let integer = |v: &Value| -> u32 {
        match v {
            Value::Integer(n) => *n,
            _ => 0,
        }
    };

    let out = match module {
        Module::Scene => Value::Objects(ctx.scene.objects.iter().map(|o| o.id).collect()),
        Module::FilterColor | Module::FilterMaterial | Module::FilterShape | Module::FilterSize => {
            let want = side[0].as_attr().expect("attribute literal");
            let ids = objects(&rest[0])
                .into_iter()
                .filter(|id| ctx.scene.object(*id).is_some_and(|o| o.attrs.matches(want)))
                .collect();
            Value::Objects(ids)
        }
        Module::FilterAction => {
            let Value::Action(kind) = side[0] else { unreachable!() };
            let mut ids = Vec::new();
            for id in objects(&rest[0]) {
                let o = ctx.object(id).map_err(ill)?;
                if o.hidden_throughout(iv.start, iv.end) {
                    continue;
                }
                if summarize_actions(o, iv.start, iv.end).action_set.contains(&kind) {
                    ids.push(id);
                }
            }
            Value::Objects(ids)
        }
        Module::FilterContained => {
            let mut ids = Vec::new();
            for id in objects(&rest[0]) {
                if ctx.object(id).map_err(ill)?.contained_during(iv.start, iv.end) {
                    ids.push(id);
                }
            }
            Value::Objects(ids)
        }
        Module::SameActionSet | Module::SameActionSequence => {
            let probe = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let key = summarize_actions(probe, iv.start, iv.end);
            let mut ids = Vec::new();
            for o in &ctx.scene.objects {
                if o.id == probe.id || o.hidden_throughout(iv.start, iv.end) {
                    continue;
                }
                let s = summarize_actions(o, iv.start, iv.end);
                let same = if module == Module::SameActionSet {
                    s.action_set == key.action_set
                } else {
                    s.action_sequence == key.action_sequence
                };
                if same {
                    ids.push(o.id);
                }
            }
            Value::Objects(ids)
        }
        Module::Unique => {
            let ids = objects(&rest[0]);
            if ids.len() != 1 {
                return Err(ill(format!("{} candidates", ids.len())));
            }
            Value::Object(ids[0])
        }
        Module::CountObject => Value::Integer(objects(&rest[0]).len() as u32),
        Module::CountAction => {
            let Value::Action(kind) = side[0] else { unreachable!() };
            if !kind.is_motion() {
                return Err(ill("only motions can be counted".into()));
            }
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let n = o.events_of(kind).filter(|e| e.overlaps(iv.start, iv.end)).count();
            Value::Integer(n as u32)
        }
        Module::Exist => Value::Binary(!objects(&rest[0]).is_empty()),
        Module::FindInterval => {
            let Value::Action(kind) = side[0] else { unreachable!() };
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let events: Vec<_> = o.events_of(kind).collect();
            let ev = match side.get(1) {
                None => {
                    if events.len() != 1 {
                        return Err(ill(format!("{} {kind} events, expected one", events.len())));
                    }
                    events[0]
                }
                Some(Value::Order(ord)) => {
                    let i = ord
                        .index(events.len())
                        .ok_or_else(|| ill(format!("no {} {kind} event", ord.as_str())))?;
                    events[i]
                }
                Some(_) => unreachable!(),
            };
            Value::Interval(make_interval(ctx.scene, ev.start, ev.end))
        }
        Module::UnionInterval => {
            let (Value::Interval(a), Value::Interval(b)) = (&rest[0], &rest[1]) else { unreachable!() };
            let (s, e) = (a.start.max(b.start), a.end.min(b.end));
            if e - s + EPS < ctx.options.min_duration {
                return Err(ill(format!("overlap ({s}, {e}) is too short")));
            }
            Value::Interval(make_interval(ctx.scene, s, e))
        }
        Module::RelateSpatial => {
            let Value::SpatialRelation(rel) = side[0] else { unreachable!() };
            if iv.kind != IntervalKind::Atomic {
                return Err(ill(format!("{} interval", iv.kind.as_str())));
            }
            let anchor = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let mut ids = Vec::new();
            for o in &ctx.scene.objects {
                if o.id == anchor.id {
                    continue;
                }
                if holds_spatial(&iv, o, anchor, rel).map_err(|e| ill(e.to_string()))? == Some(true) {
                    ids.push(o.id);
                }
            }
            Value::Objects(ids)
        }
        Module::RelateTemporal => {
            let Value::TemporalRelation(rel) = side[0] else { unreachable!() };
            let Value::Interval(base) = &rest[0] else { unreachable!() };
            if base.kind == IntervalKind::None {
                return Err(ill("no interval to relate to".into()));
            }
            let (s, e) = rel.span(base.start, base.end, ctx.scene.duration);
            if e - s + EPS < ctx.options.min_duration {
                return Err(ill(format!("({s}, {e}) is shorter than the minimum duration")));
            }
            Value::Interval(make_interval(ctx.scene, s, e))
        }
        Module::GreaterThan => Value::Binary(integer(&rest[0]) > integer(&rest[1])),
        Module::LessThan => Value::Binary(integer(&rest[0]) < integer(&rest[1])),
        Module::Equal => Value::Binary(integer(&rest[0]) == integer(&rest[1])),
        Module::ReferObject => {
            let last = ctx.state.last_turn.as_ref().ok_or_else(|| ill("no previous turn".into()))?;
            if last.focal.len() != 1 {
                return Err(ill(format!("{} focal objects in the previous turn", last.focal.len())));
            }
            Value::Objects(last.focal.clone())
        }
        Module::TrackObject => {
            let ids = ctx.state.tracked_ids();
            if ids.is_empty() {
                return Err(ill("no tracked objects".into()));
            }
            Value::Objects(ids)
        }
        Module::ReferInterval => {
            let last = ctx.state.last_turn.as_ref().ok_or_else(|| ill("no previous turn".into()))?;
            let a = last.anchor.ok_or_else(|| ill("previous turn has no anchor event".into()))?;
            Value::Interval(make_interval(ctx.scene, a.start, a.end))
        }
        Module::TrackInterval => {
            let a = ctx
                .state
                .interval
                .filter(|i| i.kind != IntervalKind::None)
                .ok_or_else(|| ill("no tracked interval".into()))?;
            Value::Interval(make_interval(ctx.scene, a.start, a.end))
        }
        Module::QueryActionSet => {
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            Value::ActionSet(summarize_actions(o, iv.start, iv.end).action_set)
        }
        Module::QueryActionSequence => {
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            Value::ActionSequence(summarize_actions(o, iv.start, iv.end).action_sequence)
        }
        Module::ActionByFrequency => {
            let Value::Frequency(f) = side[0] else { unreachable!() };
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let freq = summarize_actions(o, iv.start, iv.end).frequency;
            let set: BTreeSet<ActionKind> = match f {
                Frequency::Times(k) => freq.iter().filter(|(_, c)| **c == k).map(|(a, _)| *a).collect(),
                Frequency::Least | Frequency::Most => {
                    let target = if f == Frequency::Least {
                        freq.values().min()
                    } else {
                        freq.values().max()
                    };
                    let Some(&t) = target else {
                        return Err(ill("no motion in the interval".into()));
                    };
                    let hits: BTreeSet<ActionKind> = freq.iter().filter(|(_, c)| **c == t).map(|(a, _)| *a).collect();
                    if hits.len() != 1 {
                        return Err(ill(format!("{f} is tied between {} actions", hits.len())));
                    }
                    hits
                }
            };
            if set.is_empty() {
                return Err(ill(format!("no action performed {f} times")));
            }
            Value::ActionSet(set)
        }
        Module::ActionByOrder => {
            let Value::Order(ord) = side[0] else { unreachable!() };
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let seq = summarize_actions(o, iv.start, iv.end).action_sequence;
            let i = ord
                .index(seq.len())
                .ok_or_else(|| ill(format!("sequence has {} actions", seq.len())))?;
            Value::Action(seq[i])
        }
        Module::EqualAction => match (inputs.first(), inputs.get(1), inputs.len()) {
            (Some(Value::ActionSet(a)), Some(Value::ActionSet(b)), 2) => Value::Binary(a == b),
            (Some(Value::ActionSequence(a)), Some(Value::ActionSequence(b)), 2) => Value::Binary(a == b),
            _ => {
                let tags: Vec<Tag> = inputs.iter().map(Value::tag).collect();
                return Err(mismatch(format!("equal_action on {tags:?}")));
            }
        },
        Module::QueryColor | Module::QueryMaterial | Module::QueryShape | Module::QuerySize => {
            let o = ctx.object(object_id(&rest[0])).map_err(ill)?;
            let kind = match module {
                Module::QueryColor => AttrKind::Color,
                Module::QueryMaterial => AttrKind::Material,
                Module::QueryShape => AttrKind::Shape,
                _ => AttrKind::Size,
            };
            Value::from_attr(o.attrs.get(kind))
        }
    };
    Ok((out, used))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ActionEvent, Color, Material, ObjectAttr, Shape, Size};
    use crate::state::{LastTurn, TrackedObject};

    fn ev(kind: ActionKind, start: f64, end: f64, a: [f64; 2], b: [f64; 2]) -> ActionEvent {
        ActionEvent {
            kind,
            start,
            end,
            start_pos: a,
            end_pos: b,
        }
    }

    fn attrs(shape: Shape, size: Size, color: Color, material: Material) -> ObjectAttr {
        ObjectAttr {
            shape,
            size,
            color,
            material,
        }
    }

    fn object(id: u32, a: ObjectAttr, timeline: Vec<ActionEvent>) -> SceneObject {
        SceneObject {
            id,
            attrs: a,
            timeline,
            containment: vec![],
        }
    }

    fn still(p: [f64; 2]) -> Vec<ActionEvent> {
        vec![ev(ActionKind::NoAction, 0.0, 10.0, p, p)]
    }

    /// Four objects: a rubber cube that rotates over [2,4] then slides, a cone
    /// behind it, a red rubber sphere in front, and the snitch.
    fn fixture() -> SceneGraph {
        let c = [0.0, 0.0];
        SceneGraph {
            video_id: "fixture".into(),
            duration: 10.0,
            objects: vec![
                object(
                    0,
                    attrs(Shape::Cube, Size::Large, Color::Blue, Material::Rubber),
                    vec![
                        ev(ActionKind::NoAction, 0.0, 2.0, c, c),
                        ev(ActionKind::Rotating, 2.0, 4.0, c, c),
                        ev(ActionKind::Sliding, 4.0, 6.0, c, [1.0, 0.0]),
                        ev(ActionKind::NoAction, 6.0, 10.0, [1.0, 0.0], [1.0, 0.0]),
                    ],
                ),
                object(1, attrs(Shape::Cone, Size::Small, Color::Red, Material::Metal), still([0.0, 2.0])),
                object(2, attrs(Shape::Sphere, Size::Small, Color::Red, Material::Rubber), still([0.5, -2.0])),
                object(
                    3,
                    ObjectAttr::SNITCH,
                    vec![
                        ev(ActionKind::NoAction, 0.0, 1.0, [2.0, 3.0], [2.0, 3.0]),
                        ev(ActionKind::Flying, 1.0, 2.0, [2.0, 3.0], [-2.0, 3.0]),
                        ev(ActionKind::NoAction, 2.0, 10.0, [-2.0, 3.0], [-2.0, 3.0]),
                    ],
                ),
            ],
        }
    }

    fn run(text: &str, scene: &SceneGraph, state: &DialogueState) -> Result<Value, ProgramError> {
        let p: Program = text.parse().unwrap();
        typecheck(&p).unwrap();
        execute(&p, &ExecContext::new(scene, state)).map(|e| e.answer().clone())
    }

    fn empty() -> DialogueState {
        DialogueState::initial(10.0)
    }

    #[test]
    fn count_red() {
        let sc = fixture();
        assert_eq!(run("scene(); filter_color[red](0); count_object(1)", &sc, &empty()), Ok(Value::Integer(2)));
    }

    #[test]
    fn unique_over_many_is_ill_posed() {
        let sc = fixture();
        let err = run("scene(); unique(0); query_color(1)", &sc, &empty()).unwrap_err();
        assert!(err.is_ill_posed());
    }

    #[test]
    fn rubber_behind_cone_during_first_rotation() {
        // filter rubber ∩ behind the cone during the cube's first rotation, count
        let sc = fixture();
        let text = "scene(); filter_shape[cube](0); unique(1); find_interval[rotating,first](2); relate_temporal[during](3); \
                    scene(); filter_shape[cone](5); unique(6); relate_spatial[front](4, 7); filter_material[rubber](8); count_object(9)";
        let got = run(text, &sc, &empty()).unwrap();
        // brute force: every object other than the cone, rubber, strictly in front at both 2.0 and 4.0
        let cone = sc.object(1).unwrap();
        let n = sc
            .objects
            .iter()
            .filter(|o| o.id != 1 && o.attrs.material == Material::Rubber)
            .filter(|o| [2.0, 4.0].iter().all(|&t| o.position_at(t)[1] < cone.position_at(t)[1]))
            .count();
        assert_eq!(got, Value::Integer(n as u32));
        assert_eq!(n, 2);
    }

    #[test]
    fn spatial_on_compositional_is_ill_posed() {
        let sc = fixture();
        let err = run("scene(); filter_shape[cone](0); unique(1); relate_spatial[left](2)", &sc, &empty()).unwrap_err();
        assert!(err.is_ill_posed());
    }

    #[test]
    fn filters_preserve_order() {
        let sc = fixture();
        assert_eq!(run("scene(); filter_color[yellow](0)", &sc, &empty()), Ok(Value::Objects(vec![])));
        assert_eq!(
            run("scene(); filter_size[small](0)", &sc, &empty()),
            Ok(Value::Objects(vec![1, 2, 3]))
        );
    }

    #[test]
    fn action_filters() {
        let sc = fixture();
        assert_eq!(run("scene(); filter_action[rotating](0)", &sc, &empty()), Ok(Value::Objects(vec![0])));
        assert_eq!(
            run("scene(); filter_action[no_action](0)", &sc, &empty()),
            Ok(Value::Objects(vec![1, 2]))
        );
        assert_eq!(
            run("scene(); filter_shape[cone](0); unique(1); same_action_set(2)", &sc, &empty()),
            Ok(Value::Objects(vec![2]))
        );
    }

    #[test]
    fn interval_modules() {
        let sc = fixture();
        let snitch = "scene(); filter_shape[snitch](0); unique(1); find_interval[flying](2)";
        let rel = |r: &str| run(&format!("{snitch}; relate_temporal[{r}](3)"), &sc, &empty());
        assert!(matches!(rel("before"), Ok(Value::Interval(i)) if i.start == 0.0 && i.end == 1.0 && i.kind == IntervalKind::Atomic));
        assert!(matches!(rel("after"), Ok(Value::Interval(i)) if i.start == 2.0 && i.end == 10.0));
        assert!(matches!(rel("until"), Ok(Value::Interval(i)) if i.end == 2.0 && i.kind == IntervalKind::Compositional));
        assert!(matches!(rel("during"), Ok(Value::Interval(i)) if i.start == 1.0 && i.end == 2.0));
        // (2,10) intersected with the cube's rotation (2,4)
        let text = format!("{snitch}; relate_temporal[after](3); scene(); filter_shape[cube](5); unique(6); find_interval[rotating](7); union_interval(4, 8)");
        assert!(matches!(run(&text, &sc, &empty()), Ok(Value::Interval(i)) if i.start == 2.0 && i.end == 4.0 && i.kind == IntervalKind::Atomic));
        let text = format!("{snitch}; relate_temporal[before](3); scene(); filter_shape[cube](5); unique(6); find_interval[rotating](7); union_interval(4, 8)");
        assert!(run(&text, &sc, &empty()).unwrap_err().is_ill_posed());
        let err = run("scene(); filter_shape[cube](0); unique(1); find_interval[flying](2)", &sc, &empty());
        assert!(err.unwrap_err().is_ill_posed());
    }

    #[test]
    fn action_modules() {
        let sc = fixture();
        let cube = "scene(); filter_shape[cube](0); unique(1)";
        assert_eq!(
            run(&format!("{cube}; action_by_order[first](2)"), &sc, &empty()),
            Ok(Value::Action(ActionKind::Rotating))
        );
        assert!(run(&format!("{cube}; action_by_order[third](2)"), &sc, &empty()).unwrap_err().is_ill_posed());
        assert!(run(&format!("{cube}; action_by_frequency[least](2)"), &sc, &empty()).unwrap_err().is_ill_posed());
        assert_eq!(
            run(&format!("{cube}; action_by_frequency[1](2)"), &sc, &empty()),
            Ok(Value::ActionSet([ActionKind::Rotating, ActionKind::Sliding].into_iter().collect()))
        );
        assert_eq!(
            run(&format!("{cube}; count_action[sliding](2)"), &sc, &empty()),
            Ok(Value::Integer(1))
        );
        assert_eq!(
            run(&format!("{cube}; query_action_set(2); query_action_set(2); equal_action(3, 4)"), &sc, &empty()),
            Ok(Value::Binary(true))
        );
    }

    #[test]
    fn equal_action_rejects_mixed_inputs() {
        let sc = fixture();
        let p: Program = "scene(); filter_shape[cube](0); unique(1); query_action_set(2); query_action_sequence(2); equal_action(3, 4)"
            .parse()
            .unwrap();
        assert!(matches!(typecheck(&p), Err(ProgramError::TypeMismatch { .. })));
        let err = execute(&p, &ExecContext::new(&sc, &empty())).unwrap_err();
        assert!(matches!(err, ProgramError::TypeMismatch { .. }));
    }

    #[test]
    fn context_modules() {
        let sc = fixture();
        assert!(run("refer_object[it](); unique(0); query_color(1)", &sc, &empty()).unwrap_err().is_ill_posed());
        let mut st = empty();
        st.objects.push(TrackedObject {
            size: Some(Size::Small),
            ..TrackedObject::new(2, 1)
        });
        st.objects.push(TrackedObject {
            size: Some(Size::Large),
            ..TrackedObject::new(0, 1)
        });
        assert_eq!(
            run("track_object(); filter_size[small](0); unique(1)", &sc, &st),
            Ok(Value::Object(2))
        );
        st.interval = Some(VideoInterval {
            start: 2.0,
            end: 4.0,
            kind: IntervalKind::Atomic,
        });
        assert!(matches!(run("track_interval()", &sc, &st), Ok(Value::Interval(i)) if i.start == 2.0 && i.end == 4.0));
        st.last_turn = Some(LastTurn {
            question: String::new(),
            program: Program::default(),
            answer: "1".into(),
            focal: vec![1],
            anchor: None,
            anchor_action: None,
        });
        assert_eq!(run("refer_object[it](); unique(0)", &sc, &st), Ok(Value::Object(1)));
        assert!(run("refer_interval[that]()", &sc, &st).unwrap_err().is_ill_posed());
    }

    #[test]
    fn interval_override_and_question_interval() {
        let sc = fixture();
        let st = empty();
        let p: Program = "scene(); filter_shape[snitch](0); unique(1); find_interval[flying](2); relate_temporal[after](3); scene(); filter_action[flying](4, 5); count_object(6)"
            .parse()
            .unwrap();
        let ctx = ExecContext::new(&sc, &st);
        let e = execute(&p, &ctx).unwrap();
        assert_eq!(e.answer(), &Value::Integer(0));
        assert_eq!((e.interval.start, e.interval.end), (2.0, 10.0));
        let mut o = ctx;
        o.options.interval_override = Some(make_interval(&sc, 0.0, 10.0));
        assert_eq!(execute(&p, &o).unwrap().answer(), &Value::Integer(1));
        let q: Program = "scene(); filter_color[red](0); count_object(1)".parse().unwrap();
        assert_eq!(execute(&q, &ctx).unwrap().interval.kind, IntervalKind::None);
    }

    #[test]
    fn comparisons() {
        let sc = fixture();
        let cmp = |m: &str, a: &str, b: &str| {
            run(
                &format!("scene(); filter_color[{a}](0); count_object(1); scene(); filter_color[{b}](3); count_object(4); {m}(2, 5)"),
                &sc,
                &empty(),
            )
        };
        assert_eq!(cmp("equal", "red", "red"), Ok(Value::Binary(true)));
        assert_eq!(cmp("greater_than", "gray", "blue"), Ok(Value::Binary(false)));
        assert_eq!(cmp("less_than", "gray", "blue"), Ok(Value::Binary(true)));
    }

    #[test]
    fn side_arguments_are_checked() {
        let p: Program = "scene(); filter_color[large](0)".parse().unwrap();
        assert!(matches!(typecheck(&p), Err(ProgramError::TypeMismatch { .. })));
        let p: Program = "scene(); count_object(0); exist(1)".parse().unwrap();
        assert!(matches!(typecheck(&p), Err(ProgramError::TypeMismatch { .. })));
    }
}
