//! Scene metadata: objects, timed actions on the ground plane and containment
//! episodes, plus a seeded simulator that produces CATER-like scenes.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when comparing timestamps and coordinates.
pub const EPS: f64 = 1e-9;

/// Half extent of the square ground plane.
pub const ARENA_HALF_EXTENT: f64 = 5.0;

pub const MAX_OBJECTS: usize = 10;
pub const MIN_OBJECTS: usize = 3;

macro_rules! vocab_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                match s {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocab_enum!(Shape {
    Cone => "cone",
    Cube => "cube",
    Sphere => "sphere",
    Cylinder => "cylinder",
    Snitch => "snitch",
});

vocab_enum!(Size {
    Small => "small",
    Medium => "medium",
    Large => "large",
});

vocab_enum!(Color {
    Gold => "gold",
    Gray => "gray",
    Green => "green",
    Purple => "purple",
    Red => "red",
    Cyan => "cyan",
    Blue => "blue",
    Brown => "brown",
    Yellow => "yellow",
});

vocab_enum!(Material {
    Metal => "metal",
    Rubber => "rubber",
});

vocab_enum!(
    /// What an object is doing during one timeline event.
    ActionKind {
        Flying => "flying",
        Sliding => "sliding",
        Rotating => "rotating",
        NoAction => "no_action",
    }
);

impl ActionKind {
    pub const MOTIONS: &'static [ActionKind] =
        &[ActionKind::Flying, ActionKind::Sliding, ActionKind::Rotating];

    pub fn is_motion(self) -> bool {
        self != ActionKind::NoAction
    }

    /// Flying and sliding project to a straight segment; rotating and idling to a point.
    pub fn translates(self) -> bool {
        matches!(self, ActionKind::Flying | ActionKind::Sliding)
    }
}

/// The four attributes that identify an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectAttr {
    pub shape: Shape,
    pub size: Size,
    pub color: Color,
    pub material: Material,
}

impl ObjectAttr {
    pub const SNITCH: ObjectAttr = ObjectAttr {
        shape: Shape::Snitch,
        size: Size::Small,
        color: Color::Gold,
        material: Material::Metal,
    };
}

/// Attribute kinds, used for filters, queries and descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKind {
    Size,
    Color,
    Material,
    Shape,
}

impl AttrKind {
    /// Canonical description order ("the large red rubber cube").
    pub const ALL: [AttrKind; 4] = [AttrKind::Size, AttrKind::Color, AttrKind::Material, AttrKind::Shape];

    pub fn as_str(self) -> &'static str {
        match self {
            AttrKind::Size => "size",
            AttrKind::Color => "color",
            AttrKind::Material => "material",
            AttrKind::Shape => "shape",
        }
    }
}

/// A single attribute value of any kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttrValue {
    Size(Size),
    Color(Color),
    Material(Material),
    Shape(Shape),
}

impl AttrValue {
    pub fn kind(self) -> AttrKind {
        match self {
            AttrValue::Size(_) => AttrKind::Size,
            AttrValue::Color(_) => AttrKind::Color,
            AttrValue::Material(_) => AttrKind::Material,
            AttrValue::Shape(_) => AttrKind::Shape,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttrValue::Size(v) => v.as_str(),
            AttrValue::Color(v) => v.as_str(),
            AttrValue::Material(v) => v.as_str(),
            AttrValue::Shape(v) => v.as_str(),
        }
    }

    pub fn parse(kind: AttrKind, s: &str) -> Option<Self> {
        match kind {
            AttrKind::Size => Size::parse(s).map(AttrValue::Size),
            AttrKind::Color => Color::parse(s).map(AttrValue::Color),
            AttrKind::Material => Material::parse(s).map(AttrValue::Material),
            AttrKind::Shape => Shape::parse(s).map(AttrValue::Shape),
        }
    }

    /// Every value of the given kind.
    pub fn all_of(kind: AttrKind) -> Vec<AttrValue> {
        match kind {
            AttrKind::Size => Size::ALL.iter().copied().map(AttrValue::Size).collect(),
            AttrKind::Color => Color::ALL.iter().copied().map(AttrValue::Color).collect(),
            AttrKind::Material => Material::ALL.iter().copied().map(AttrValue::Material).collect(),
            AttrKind::Shape => Shape::ALL.iter().copied().map(AttrValue::Shape).collect(),
        }
    }
}

impl ObjectAttr {
    pub fn get(&self, kind: AttrKind) -> AttrValue {
        match kind {
            AttrKind::Size => AttrValue::Size(self.size),
            AttrKind::Color => AttrValue::Color(self.color),
            AttrKind::Material => AttrValue::Material(self.material),
            AttrKind::Shape => AttrValue::Shape(self.shape),
        }
    }

    pub fn matches(&self, value: AttrValue) -> bool {
        self.get(value.kind()) == value
    }
}

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub kind: ActionKind,
    pub start: f64,
    pub end: f64,
    pub start_pos: Point,
    pub end_pos: Point,
}

impl ActionEvent {
    /// Length of the overlap between this event and `[start, end]`.
    pub fn overlap(&self, start: f64, end: f64) -> f64 {
        self.end.min(end) - self.start.max(start)
    }

    /// Overlap with strictly positive measure; touching endpoints do not count.
    pub fn overlaps(&self, start: f64, end: f64) -> bool {
        self.overlap(start, end) > EPS
    }

    /// Position at time `t`, linearly interpolated along the projected segment.
    pub fn position_at(&self, t: f64) -> Point {
        let span = self.end - self.start;
        if span <= EPS {
            return self.start_pos;
        }
        let a = ((t - self.start) / span).clamp(0.0, 1.0);
        // Exact at the end so a landing position equals its target bit for bit.
        if a >= 1.0 {
            return self.end_pos;
        }
        [
            self.start_pos[0] + a * (self.end_pos[0] - self.start_pos[0]),
            self.start_pos[1] + a * (self.end_pos[1] - self.start_pos[1]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentEpisode {
    pub container: u32,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    #[serde(flatten)]
    pub attrs: ObjectAttr,
    pub timeline: Vec<ActionEvent>,
    #[serde(default)]
    pub containment: Vec<ContainmentEpisode>,
}

impl SceneObject {
    pub fn motion_events(&self) -> impl Iterator<Item = &ActionEvent> {
        self.timeline.iter().filter(|e| e.kind.is_motion())
    }

    /// Events of one kind, in chronological order.
    pub fn events_of(&self, kind: ActionKind) -> impl Iterator<Item = &ActionEvent> {
        self.timeline.iter().filter(move |e| e.kind == kind)
    }

    pub fn position_at(&self, t: f64) -> Point {
        let event = self
            .timeline
            .iter()
            .find(|e| t >= e.start - EPS && t <= e.end + EPS)
            .or(self.timeline.last());
        match event {
            Some(e) => e.position_at(t),
            None => [0.0, 0.0],
        }
    }

    /// True if some containment episode overlaps `[start, end]` with positive measure.
    pub fn contained_during(&self, start: f64, end: f64) -> bool {
        self.containment
            .iter()
            .any(|c| c.end.min(end) - c.start.max(start) > EPS)
    }

    /// True if `[start, end]` lies entirely inside one containment episode.
    pub fn hidden_throughout(&self, start: f64, end: f64) -> bool {
        self.containment
            .iter()
            .any(|c| c.start <= start + EPS && c.end >= end - EPS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub video_id: String,
    pub duration: f64,
    pub objects: Vec<SceneObject>,
}

impl SceneGraph {
    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Sorted, de-duplicated event endpoints together with the video bounds.
    pub fn timestamps(&self) -> Vec<f64> {
        let mut ts = vec![0.0, self.duration];
        for obj in &self.objects {
            for e in &obj.timeline {
                ts.push(e.start);
                ts.push(e.end);
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() <= EPS);
        ts
    }

    /// The scene as seen by a viewer whose video stops at `cutoff`.
    pub fn truncated(&self, cutoff: f64) -> SceneGraph {
        let cutoff = cutoff.min(self.duration);
        let objects = self
            .objects
            .iter()
            .map(|obj| {
                let timeline = obj
                    .timeline
                    .iter()
                    .filter(|e| e.start < cutoff - EPS)
                    .map(|e| {
                        if e.end > cutoff + EPS {
                            ActionEvent {
                                kind: e.kind,
                                start: e.start,
                                end: cutoff,
                                start_pos: e.start_pos,
                                end_pos: e.position_at(cutoff),
                            }
                        } else {
                            e.clone()
                        }
                    })
                    .collect();
                let containment = obj
                    .containment
                    .iter()
                    .filter(|c| c.start < cutoff - EPS)
                    .map(|c| ContainmentEpisode {
                        container: c.container,
                        start: c.start,
                        end: c.end.min(cutoff),
                    })
                    .collect();
                SceneObject {
                    id: obj.id,
                    attrs: obj.attrs,
                    timeline,
                    containment,
                }
            })
            .collect();
        SceneGraph {
            video_id: self.video_id.clone(),
            duration: cutoff,
            objects,
        }
    }

    /// Ids of objects whose attributes contain every value in `values`.
    pub fn matching(&self, values: &[AttrValue]) -> Vec<u32> {
        self.objects
            .iter()
            .filter(|o| values.iter().all(|v| o.attrs.matches(*v)))
            .map(|o| o.id)
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("invalid scene config: {0}")]
    Config(String),
}

/// Relative sampling weights of the motion kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionWeights {
    pub flying: f64,
    pub sliding: f64,
    pub rotating: f64,
}

impl Default for MotionWeights {
    fn default() -> Self {
        MotionWeights {
            flying: 0.45,
            sliding: 0.30,
            rotating: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub duration: f64,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Every action starts and ends on a multiple of this step.
    pub time_step: f64,
    /// Weights for 0, 1, 2, ... motion events per object.
    pub motion_count_weights: Vec<f64>,
    /// Allowed motion lengths, in time steps.
    pub motion_min_steps: usize,
    pub motion_max_steps: usize,
    pub motion_weights: MotionWeights,
    /// Chance that a scene with at least one cone gets a containment episode.
    pub containment_prob: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            duration: 10.0,
            min_objects: 3,
            max_objects: 10,
            time_step: 0.5,
            motion_count_weights: vec![0.1, 0.25, 0.3, 0.25, 0.1],
            motion_min_steps: 1,
            motion_max_steps: 3,
            motion_weights: MotionWeights::default(),
            containment_prob: 0.5,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.min_objects < MIN_OBJECTS || self.max_objects > MAX_OBJECTS {
            return Err(SceneError::Config(format!(
                "object count range [{}, {}] must lie within [{MIN_OBJECTS}, {MAX_OBJECTS}]",
                self.min_objects, self.max_objects
            )));
        }
        if self.min_objects > self.max_objects {
            return Err(SceneError::Config("min_objects exceeds max_objects".into()));
        }
        if !(self.duration >= 1.0) {
            return Err(SceneError::Config(format!("duration {} is below 1.0", self.duration)));
        }
        if !(self.time_step > 0.0) || self.time_step > self.duration {
            return Err(SceneError::Config("time_step must be in (0, duration]".into()));
        }
        if self.motion_count_weights.is_empty() || self.motion_count_weights.iter().any(|w| *w < 0.0) {
            return Err(SceneError::Config("motion_count_weights must be non-empty and non-negative".into()));
        }
        if self.motion_min_steps == 0 || self.motion_min_steps > self.motion_max_steps {
            return Err(SceneError::Config("motion step range is empty".into()));
        }
        let w = &self.motion_weights;
        if w.flying < 0.0 || w.sliding < 0.0 || w.rotating < 0.0 || w.flying + w.sliding + w.rotating <= 0.0 {
            return Err(SceneError::Config("motion weights must be non-negative with positive sum".into()));
        }
        if !(0.0..=1.0).contains(&self.containment_prob) {
            return Err(SceneError::Config("containment_prob must be in [0, 1]".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.duration / self.time_step).floor() as usize
    }
}

/// A planned motion on the step grid before positions are assigned.
#[derive(Debug, Clone)]
struct PlannedMotion {
    kind: ActionKind,
    start: usize,
    end: usize,
    /// Fixed landing point, used by a cone flying over a containee.
    target: Option<Point>,
}

/// Generates a scene satisfying every invariant checked by [`validate_scene`].
pub fn simulate_scene(config: &SceneConfig, seed: u64) -> Result<SceneGraph, SceneError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = config.steps();
    let duration = steps as f64 * config.time_step;

    let count = rng.gen_range(config.min_objects..=config.max_objects);
    let attrs = sample_attributes(&mut rng, count);

    // Optional containment: a cone lands on a non-cone and stays until it lifts off.
    let mut plan: Vec<Vec<PlannedMotion>> = vec![Vec::new(); count];
    let mut hold: Vec<Option<(usize, usize)>> = vec![None; count];
    let mut episode: Option<(usize, usize, usize, usize)> = None; // (cone, containee, land, lift)
    let cones: Vec<usize> = (0..count).filter(|&i| attrs[i].shape == Shape::Cone).collect();
    let others: Vec<usize> = (0..count).filter(|&i| attrs[i].shape != Shape::Cone).collect();
    let fly_len = config.motion_min_steps.max(1);
    if !cones.is_empty() && !others.is_empty() && steps >= 2 * fly_len + 2 && rng.gen_bool(config.containment_prob) {
        let cone = *cones.choose(&mut rng).unwrap();
        let containee = *others.choose(&mut rng).unwrap();
        let land = rng.gen_range(fly_len..steps - 1);
        let lift = if rng.gen_bool(0.3) || land + 2 + fly_len > steps {
            steps
        } else {
            rng.gen_range(land + 2..=steps - fly_len)
        };
        hold[containee] = Some((land, lift));
        episode = Some((cone, containee, land, lift));
    }

    // Motion plans for everyone except the containing cone, whose plan depends on the containee.
    for i in 0..count {
        if matches!(episode, Some((cone, ..)) if cone == i) {
            continue;
        }
        let blocked: Vec<(usize, usize)> = hold[i].into_iter().collect();
        plan[i] = plan_motions(&mut rng, config, steps, &blocked, attrs[i].shape);
    }

    let mut objects: Vec<SceneObject> = Vec::with_capacity(count);
    let mut timelines: Vec<Option<Vec<ActionEvent>>> = vec![None; count];
    for i in 0..count {
        if matches!(episode, Some((cone, ..)) if cone == i) {
            continue;
        }
        let start = random_point(&mut rng);
        timelines[i] = Some(build_timeline(&mut rng, &plan[i], start, steps, config.time_step));
    }
    let mut containment: Vec<Vec<ContainmentEpisode>> = vec![Vec::new(); count];
    if let Some((cone, containee, land, lift)) = episode {
        let land_t = land as f64 * config.time_step;
        let target = timelines[containee]
            .as_ref()
            .map(|tl| position_in(tl, land_t))
            .unwrap_or([0.0, 0.0]);
        let mut fixed = vec![PlannedMotion {
            kind: ActionKind::Flying,
            start: land - fly_len,
            end: land,
            target: Some(target),
        }];
        if lift < steps {
            fixed.push(PlannedMotion {
                kind: ActionKind::Flying,
                start: lift,
                end: lift + fly_len,
                target: None,
            });
        }
        let busy_end = if lift < steps { lift + fly_len } else { steps };
        let mut cone_plan = plan_motions(&mut rng, config, steps, &[(land - fly_len, busy_end)], Shape::Cone);
        cone_plan.extend(fixed);
        cone_plan.sort_by_key(|m| m.start);
        let start = random_point(&mut rng);
        timelines[cone] = Some(build_timeline(&mut rng, &cone_plan, start, steps, config.time_step));
        containment[containee].push(ContainmentEpisode {
            container: cone as u32,
            start: land_t,
            end: lift as f64 * config.time_step,
        });
    }

    for (i, attr) in attrs.into_iter().enumerate() {
        objects.push(SceneObject {
            id: i as u32,
            attrs: attr,
            timeline: timelines[i].take().unwrap_or_default(),
            containment: std::mem::take(&mut containment[i]),
        });
    }

    Ok(SceneGraph {
        video_id: format!("sim_{seed:016x}"),
        duration,
        objects,
    })
}

fn sample_attributes(rng: &mut ChaCha8Rng, count: usize) -> Vec<ObjectAttr> {
    let mut seen = HashSet::new();
    let mut attrs = Vec::with_capacity(count);
    let snitch_slot = rng.gen_range(0..count);
    let shapes = [Shape::Cone, Shape::Cube, Shape::Sphere, Shape::Cylinder];
    for i in 0..count {
        if i == snitch_slot {
            attrs.push(ObjectAttr::SNITCH);
            continue;
        }
        loop {
            let a = ObjectAttr {
                shape: *shapes.choose(rng).unwrap(),
                size: *Size::ALL.choose(rng).unwrap(),
                color: *Color::ALL.choose(rng).unwrap(),
                material: *Material::ALL.choose(rng).unwrap(),
            };
            if seen.insert(a) {
                attrs.push(a);
                break;
            }
        }
    }
    attrs
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    let lim = ARENA_HALF_EXTENT - 1.0;
    [round3(rng.gen_range(-lim..lim)), round3(rng.gen_range(-lim..lim))]
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn sample_motion_kind(rng: &mut ChaCha8Rng, weights: &MotionWeights, shape: Shape) -> ActionKind {
    let rotating = if shape == Shape::Sphere { 0.0 } else { weights.rotating };
    let total = weights.flying + weights.sliding + rotating;
    let mut x = rng.gen::<f64>() * total;
    if x < weights.flying {
        return ActionKind::Flying;
    }
    x -= weights.flying;
    if x < weights.sliding || rotating == 0.0 {
        return ActionKind::Sliding;
    }
    ActionKind::Rotating
}

/// Places random motions on the free parts of the step grid `[0, steps)`.
fn plan_motions(
    rng: &mut ChaCha8Rng,
    config: &SceneConfig,
    steps: usize,
    blocked: &[(usize, usize)],
    shape: Shape,
) -> Vec<PlannedMotion> {
    let total_w: f64 = config.motion_count_weights.iter().sum();
    let mut target = 0;
    if total_w > 0.0 {
        let mut x = rng.gen::<f64>() * total_w;
        for (n, w) in config.motion_count_weights.iter().enumerate() {
            if x < *w {
                target = n;
                break;
            }
            x -= w;
            target = n;
        }
    }
    let mut free = vec![true; steps];
    for &(a, b) in blocked {
        for s in free.iter_mut().take(b.min(steps)).skip(a) {
            *s = false;
        }
    }
    let mut motions = Vec::new();
    let mut tries = 0;
    while motions.len() < target && tries < 50 {
        tries += 1;
        let len = rng.gen_range(config.motion_min_steps..=config.motion_max_steps);
        if len > steps {
            continue;
        }
        let start = rng.gen_range(0..=steps - len);
        if !(start..start + len).all(|s| free[s]) {
            continue;
        }
        for s in free.iter_mut().skip(start).take(len) {
            *s = false;
        }
        motions.push(PlannedMotion {
            kind: sample_motion_kind(rng, &config.motion_weights, shape),
            start,
            end: start + len,
            target: None,
        });
    }
    motions.sort_by_key(|m| m.start);
    motions
}

/// Turns a sorted motion plan into a gap-free timeline tiling `[0, steps * step]`.
fn build_timeline(
    rng: &mut ChaCha8Rng,
    plan: &[PlannedMotion],
    start_pos: Point,
    steps: usize,
    step: f64,
) -> Vec<ActionEvent> {
    let mut events = Vec::new();
    let mut pos = start_pos;
    let mut cursor = 0usize;
    let t = |s: usize| s as f64 * step;
    for m in plan {
        if m.start > cursor {
            events.push(ActionEvent {
                kind: ActionKind::NoAction,
                start: t(cursor),
                end: t(m.start),
                start_pos: pos,
                end_pos: pos,
            });
        }
        let end_pos = if m.kind.translates() {
            match m.target {
                Some(p) if dist(p, pos) > 1e-6 => p,
                _ => loop {
                    let p = random_point(rng);
                    if dist(p, pos) >= 0.5 {
                        break p;
                    }
                },
            }
        } else {
            pos
        };
        events.push(ActionEvent {
            kind: m.kind,
            start: t(m.start),
            end: t(m.end),
            start_pos: pos,
            end_pos,
        });
        pos = end_pos;
        cursor = m.end;
    }
    if cursor < steps {
        events.push(ActionEvent {
            kind: ActionKind::NoAction,
            start: t(cursor),
            end: t(steps),
            start_pos: pos,
            end_pos: pos,
        });
    }
    events
}

fn position_in(timeline: &[ActionEvent], t: f64) -> Point {
    timeline
        .iter()
        .find(|e| t >= e.start - EPS && t <= e.end + EPS)
        .map(|e| e.position_at(t))
        .unwrap_or([0.0, 0.0])
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Names of the invariants checked by [`validate_scene`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ObjectCount,
    DuplicateId,
    DuplicateAttrs,
    SnitchCount,
    SnitchAttrs,
    Duration,
    EventBounds,
    TimelineOrder,
    TimelineOverlap,
    TimelineGap,
    EventProjection,
    PositionContinuity,
    PositionBounds,
    SphereNoRotate,
    ContainerNotCone,
    ContainerMissing,
    ContainmentBounds,
    ContainmentMotion,
    ContainmentPosition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub object: Option<u32>,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn new(object: Option<u32>, rule: Rule, detail: impl Into<String>) -> Self {
        Violation {
            object,
            rule,
            detail: detail.into(),
        }
    }
}

/// Checks every scene invariant; an empty result means the scene is valid.
pub fn validate_scene(scene: &SceneGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = scene.objects.len();
    if !(MIN_OBJECTS..=MAX_OBJECTS).contains(&n) {
        out.push(Violation::new(None, Rule::ObjectCount, format!("{n} objects")));
    }
    if !(scene.duration > 0.0) {
        out.push(Violation::new(None, Rule::Duration, format!("duration {}", scene.duration)));
    }
    let mut ids = HashSet::new();
    let mut attrs = HashSet::new();
    for obj in &scene.objects {
        if !ids.insert(obj.id) {
            out.push(Violation::new(Some(obj.id), Rule::DuplicateId, "id reused"));
        }
        if !attrs.insert(obj.attrs) {
            out.push(Violation::new(Some(obj.id), Rule::DuplicateAttrs, "indistinguishable from another object"));
        }
    }
    let snitches: Vec<&SceneObject> = scene.objects.iter().filter(|o| o.attrs.shape == Shape::Snitch).collect();
    if snitches.len() != 1 {
        out.push(Violation::new(None, Rule::SnitchCount, format!("{} snitches", snitches.len())));
    }
    for s in snitches {
        if s.attrs != ObjectAttr::SNITCH {
            out.push(Violation::new(Some(s.id), Rule::SnitchAttrs, "snitch attributes are fixed"));
        }
    }

    for obj in &scene.objects {
        check_timeline(scene, obj, &mut out);
        check_containment(scene, obj, &mut out);
    }
    out
}

fn check_timeline(scene: &SceneGraph, obj: &SceneObject, out: &mut Vec<Violation>) {
    let id = Some(obj.id);
    let tl = &obj.timeline;
    if tl.is_empty() {
        out.push(Violation::new(id, Rule::TimelineGap, "empty timeline"));
        return;
    }
    for e in tl {
        if !(e.start < e.end) || e.start < -EPS || e.end > scene.duration + EPS {
            out.push(Violation::new(id, Rule::EventBounds, format!("event [{}, {}]", e.start, e.end)));
        }
        let moved = dist(e.start_pos, e.end_pos) > 1e-9;
        if e.kind.translates() != moved {
            out.push(Violation::new(id, Rule::EventProjection, format!("{} event with moved={moved}", e.kind)));
        }
        for p in [e.start_pos, e.end_pos] {
            if p[0].abs() > ARENA_HALF_EXTENT + EPS || p[1].abs() > ARENA_HALF_EXTENT + EPS {
                out.push(Violation::new(id, Rule::PositionBounds, format!("position {p:?}")));
            }
        }
        if e.kind == ActionKind::Rotating && obj.attrs.shape == Shape::Sphere {
            out.push(Violation::new(id, Rule::SphereNoRotate, "sphere rotates"));
        }
    }
    if (tl[0].start).abs() > EPS {
        out.push(Violation::new(id, Rule::TimelineGap, "timeline does not start at 0"));
    }
    if (tl[tl.len() - 1].end - scene.duration).abs() > EPS {
        out.push(Violation::new(id, Rule::TimelineGap, "timeline does not reach the end"));
    }
    for w in tl.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.start < a.start {
            out.push(Violation::new(id, Rule::TimelineOrder, format!("event at {} after {}", b.start, a.start)));
        }
        if b.start < a.end - EPS {
            out.push(Violation::new(id, Rule::TimelineOverlap, format!("[{}, {}] overlaps [{}, {}]", a.start, a.end, b.start, b.end)));
        } else if b.start > a.end + EPS {
            out.push(Violation::new(id, Rule::TimelineGap, format!("gap between {} and {}", a.end, b.start)));
        }
        if dist(a.end_pos, b.start_pos) > 1e-6 {
            out.push(Violation::new(id, Rule::PositionContinuity, format!("jump at {}", b.start)));
        }
    }
}

fn check_containment(scene: &SceneGraph, obj: &SceneObject, out: &mut Vec<Violation>) {
    let id = Some(obj.id);
    for c in &obj.containment {
        if !(c.start < c.end) || c.start < -EPS || c.end > scene.duration + EPS {
            out.push(Violation::new(id, Rule::ContainmentBounds, format!("episode [{}, {}]", c.start, c.end)));
            continue;
        }
        let Some(container) = scene.object(c.container) else {
            out.push(Violation::new(id, Rule::ContainerMissing, format!("container {}", c.container)));
            continue;
        };
        if container.attrs.shape != Shape::Cone || container.id == obj.id {
            out.push(Violation::new(id, Rule::ContainerNotCone, format!("container {} is a {}", container.id, container.attrs.shape)));
        }
        for e in obj.timeline.iter().filter(|e| e.overlaps(c.start, c.end)) {
            if e.kind != ActionKind::NoAction {
                out.push(Violation::new(id, Rule::ContainmentMotion, format!("{} while contained", e.kind)));
            }
        }
        for t in [c.start, c.end] {
            if dist(obj.position_at(t), container.position_at(t)) > 1e-6 {
                out.push(Violation::new(id, Rule::ContainmentPosition, format!("apart from container at {t}")));
            }
        }
    }
}
