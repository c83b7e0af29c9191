//! Video intervals, atomic/compositional classification, spatial relations and
//! per-interval action summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ActionKind, SceneGraph, SceneObject, EPS};

pub const DEFAULT_MIN_DURATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Atomic,
    Compositional,
    None,
}

impl IntervalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalKind::Atomic => "atomic",
            IntervalKind::Compositional => "compositional",
            IntervalKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoInterval {
    pub start: f64,
    pub end: f64,
    pub kind: IntervalKind,
}

impl VideoInterval {
    /// The interval-less marker; carries the full span by convention.
    pub fn none(duration: f64) -> Self {
        VideoInterval {
            start: 0.0,
            end: duration,
            kind: IntervalKind::None,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn same_span(&self, other: &VideoInterval) -> bool {
        (self.start - other.start).abs() <= EPS && (self.end - other.end).abs() <= EPS
    }

    /// Intersection over union of the two spans.
    pub fn iou(&self, other: &VideoInterval) -> f64 {
        let inter = (self.end.min(other.end) - self.start.max(other.start)).max(0.0);
        let union = self.end.max(other.end) - self.start.min(other.start);
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

impl fmt::Display for VideoInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.start, self.end, self.kind.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialRelation {
    Left,
    Right,
    Front,
    Behind,
}

impl SpatialRelation {
    pub const ALL: [SpatialRelation; 4] = [
        SpatialRelation::Left,
        SpatialRelation::Right,
        SpatialRelation::Front,
        SpatialRelation::Behind,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpatialRelation::Left => "left",
            SpatialRelation::Right => "right",
            SpatialRelation::Front => "front",
            SpatialRelation::Behind => "behind",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.as_str() == s)
    }

    /// Strict test of `p` against the anchor position `a`. Front means closer to
    /// the camera, which sits on the negative y side.
    pub fn test(self, p: [f64; 2], a: [f64; 2]) -> bool {
        match self {
            SpatialRelation::Left => p[0] < a[0],
            SpatialRelation::Right => p[0] > a[0],
            SpatialRelation::Front => p[1] < a[1],
            SpatialRelation::Behind => p[1] > a[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalRelation {
    During,
    Before,
    After,
    Until,
    Since,
}

impl TemporalRelation {
    pub const ALL: [TemporalRelation; 5] = [
        TemporalRelation::During,
        TemporalRelation::Before,
        TemporalRelation::After,
        TemporalRelation::Until,
        TemporalRelation::Since,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemporalRelation::During => "during",
            TemporalRelation::Before => "before",
            TemporalRelation::After => "after",
            TemporalRelation::Until => "until",
            TemporalRelation::Since => "since",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.as_str() == s)
    }

    /// The raw span related to `[start, end]` within a video cut at `cutoff`.
    pub fn span(self, start: f64, end: f64, cutoff: f64) -> (f64, f64) {
        match self {
            TemporalRelation::During => (start, end),
            TemporalRelation::Before => (0.0, start),
            TemporalRelation::After => (end, cutoff),
            TemporalRelation::Until => (0.0, end),
            TemporalRelation::Since => (start, cutoff),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("spatial relations need an atomic interval, got {}", .0.as_str())]
    NotAtomic(IntervalKind),
}

/// Classifies `[start, end]` against the scene's event boundaries.
pub fn classify(scene: &SceneGraph, start: f64, end: f64) -> IntervalKind {
    let interior = scene
        .timestamps()
        .into_iter()
        .any(|t| t > start + EPS && t < end - EPS);
    if interior {
        IntervalKind::Compositional
    } else {
        IntervalKind::Atomic
    }
}

pub fn make_interval(scene: &SceneGraph, start: f64, end: f64) -> VideoInterval {
    VideoInterval {
        start,
        end,
        kind: classify(scene, start, end),
    }
}

/// Every interval bounded by event endpoints or the video bounds, at least
/// `min_duration` long, in (start, end) order.
pub fn enumerate_intervals(scene: &SceneGraph, min_duration: f64) -> Vec<VideoInterval> {
    let ts = scene.timestamps();
    let mut out = Vec::new();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            if ts[j] - ts[i] + EPS < min_duration {
                continue;
            }
            let kind = if j == i + 1 {
                IntervalKind::Atomic
            } else {
                IntervalKind::Compositional
            };
            out.push(VideoInterval {
                start: ts[i],
                end: ts[j],
                kind,
            });
        }
    }
    out
}

/// True when the object changes position anywhere inside `[start, end]`.
pub fn moves_during(obj: &SceneObject, start: f64, end: f64) -> bool {
    obj.timeline
        .iter()
        .any(|e| e.kind.translates() && e.overlaps(start, end))
}

/// Tri-state spatial relation: `Ok(None)` when undefined because both objects
/// move or one of them is contained.
pub fn holds_spatial(
    interval: &VideoInterval,
    moving: &SceneObject,
    anchor: &SceneObject,
    rel: SpatialRelation,
) -> Result<Option<bool>, IntervalError> {
    if interval.kind != IntervalKind::Atomic {
        return Err(IntervalError::NotAtomic(interval.kind));
    }
    let (s, e) = (interval.start, interval.end);
    if moves_during(moving, s, e) && moves_during(anchor, s, e) {
        return Ok(None);
    }
    if moving.contained_during(s, e) || anchor.contained_during(s, e) {
        return Ok(None);
    }
    let holds = [s, e]
        .iter()
        .all(|&t| rel.test(moving.position_at(t), anchor.position_at(t)));
    Ok(Some(holds))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSummary {
    pub action_set: BTreeSet<ActionKind>,
    pub action_sequence: Vec<ActionKind>,
    pub frequency: BTreeMap<ActionKind, u32>,
}

pub fn summarize_actions(obj: &SceneObject, start: f64, end: f64) -> ActionSummary {
    let mut action_set = BTreeSet::new();
    let mut action_sequence = Vec::new();
    let mut frequency = BTreeMap::new();
    for e in obj.motion_events().filter(|e| e.overlaps(start, end)) {
        action_set.insert(e.kind);
        action_sequence.push(e.kind);
        *frequency.entry(e.kind).or_insert(0) += 1;
    }
    if action_sequence.is_empty() {
        action_set.insert(ActionKind::NoAction);
        action_sequence.push(ActionKind::NoAction);
    }
    ActionSummary {
        action_set,
        action_sequence,
        frequency,
    }
}
