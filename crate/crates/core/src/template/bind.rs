use serde::{Deserialize, Serialize};

use crate::interval::{SpatialRelation, TemporalRelation};
use crate::program::{Frequency, Module, Order, Program};
use crate::scene::{ActionKind, AttrKind, AttrValue};

/// How a question refers to one object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjRef {
    /// A description that is unique in the scene.
    Describe { id: u32, attrs: Vec<AttrValue> },
    /// "it": the single focal object of the previous turn.
    Pronoun { id: u32 },
    /// "the earlier mentioned ...": unique among tracked objects; `turn` is the
    /// past turn the reference points back to.
    LongTerm { id: u32, attrs: Vec<AttrValue>, turn: usize },
}

impl ObjRef {
    pub fn id(&self) -> u32 {
        match self {
            ObjRef::Describe { id, .. } | ObjRef::Pronoun { id } | ObjRef::LongTerm { id, .. } => *id,
        }
    }

    pub fn is_reference(&self) -> bool {
        !matches!(self, ObjRef::Describe { .. })
    }

    pub fn attrs(&self) -> &[AttrValue] {
        match self {
            ObjRef::Describe { attrs, .. } | ObjRef::LongTerm { attrs, .. } => attrs,
            ObjRef::Pronoun { .. } => &[],
        }
    }

    /// Emits the nodes resolving this reference; returns the `unique` node.
    pub fn emit(&self, p: &mut Program) -> usize {
        let (mut last, attrs) = match self {
            ObjRef::Describe { attrs, .. } => (p.push(Module::Scene, vec![], vec![]), attrs.as_slice()),
            ObjRef::Pronoun { .. } => (p.push(Module::ReferObject, vec![], vec!["it".into()]), &[][..]),
            ObjRef::LongTerm { attrs, .. } => (p.push(Module::TrackObject, vec![], vec![]), attrs.as_slice()),
        };
        last = emit_filters(p, last, attrs);
        p.push(Module::Unique, vec![last], vec![])
    }
}

/// Attribute filters in canonical order; returns the last node.
pub fn emit_filters(p: &mut Program, mut last: usize, attrs: &[AttrValue]) -> usize {
    let mut sorted = attrs.to_vec();
    sorted.sort_by_key(|a| a.kind());
    for a in sorted {
        let module = match a.kind() {
            AttrKind::Size => Module::FilterSize,
            AttrKind::Color => Module::FilterColor,
            AttrKind::Material => Module::FilterMaterial,
            AttrKind::Shape => Module::FilterShape,
        };
        last = p.push(module, vec![last], vec![a.as_str().to_string()]);
    }
    last
}

/// One action event of one object, e.g. "the cube 's second slide".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRef {
    pub obj: ObjRef,
    pub action: ActionKind,
    pub order: Option<Order>,
}

impl EventRef {
    pub fn emit(&self, p: &mut Program) -> usize {
        let o = self.obj.emit(p);
        let mut side = vec![self.action.as_str().to_string()];
        if let Some(ord) = self.order {
            side.push(ord.as_str().to_string());
        }
        p.push(Module::FindInterval, vec![o], side)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntervalDesc {
    Whole,
    Event { rel: TemporalRelation, event: EventRef },
    /// From one event to another: (after | since) A intersected with (before | until) B.
    Between {
        from: EventRef,
        from_rel: TemporalRelation,
        to: EventRef,
        to_rel: TemporalRelation,
    },
    /// Reuses the previous turn's interval.
    Tracked { rel: TemporalRelation },
    /// Reuses the action event the previous turn was anchored on.
    Referred { rel: TemporalRelation, action: ActionKind },
}

impl IntervalDesc {
    /// Emits the interval nodes; `None` for the whole video.
    pub fn emit(&self, p: &mut Program) -> Option<usize> {
        match self {
            IntervalDesc::Whole => None,
            IntervalDesc::Event { rel, event } => {
                let f = event.emit(p);
                Some(p.push(Module::RelateTemporal, vec![f], vec![rel.as_str().into()]))
            }
            IntervalDesc::Between { from, from_rel, to, to_rel } => {
                let a = from.emit(p);
                let a = p.push(Module::RelateTemporal, vec![a], vec![from_rel.as_str().into()]);
                let b = to.emit(p);
                let b = p.push(Module::RelateTemporal, vec![b], vec![to_rel.as_str().into()]);
                Some(p.push(Module::UnionInterval, vec![a, b], vec![]))
            }
            IntervalDesc::Tracked { rel } => {
                let t = p.push(Module::TrackInterval, vec![], vec![]);
                Some(p.push(Module::RelateTemporal, vec![t], vec![rel.as_str().into()]))
            }
            IntervalDesc::Referred { rel, .. } => {
                let t = p.push(Module::ReferInterval, vec![], vec!["that".into()]);
                Some(p.push(Module::RelateTemporal, vec![t], vec![rel.as_str().into()]))
            }
        }
    }

    /// The cross-turn temporal relation, if this interval is defined relative to the previous turn.
    pub fn temporal_relation(&self) -> Option<TemporalRelation> {
        match self {
            IntervalDesc::Tracked { rel } | IntervalDesc::Referred { rel, .. } => Some(*rel),
            _ => None,
        }
    }

    pub fn object_refs(&self) -> Vec<&ObjRef> {
        match self {
            IntervalDesc::Event { event, .. } => vec![&event.obj],
            IntervalDesc::Between { from, to, .. } => vec![&from.obj, &to.obj],
            _ => vec![],
        }
    }
}

/// Values bound to every slot of a template.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub interval: Option<IntervalDesc>,
    pub o1: Option<ObjRef>,
    pub o2: Option<ObjRef>,
    pub a1: Option<ActionKind>,
    pub a2: Option<ActionKind>,
    pub r: Option<SpatialRelation>,
    pub s: Vec<AttrValue>,
    pub f: Option<Frequency>,
    pub n: Option<Order>,
    pub variant: usize,
}

impl Bindings {
    /// Every object reference, interval objects first.
    pub fn object_refs(&self) -> Vec<&ObjRef> {
        let mut v: Vec<&ObjRef> = self.interval.as_ref().map(|i| i.object_refs()).unwrap_or_default();
        v.extend(self.o1.iter());
        v.extend(self.o2.iter());
        v
    }
}

/// One object reference annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrRecord {
    pub distance: usize,
    pub object: u32,
}
