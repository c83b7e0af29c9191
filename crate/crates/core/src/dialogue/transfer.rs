//! Topic transfers: the previous question re-targeted at another attribute,
//! filter value, object or spatial relation, or re-asked over a longer video.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::interval::{IntervalKind, SpatialRelation, TemporalRelation};
use crate::scene::{AttrKind, AttrValue, SceneGraph, EPS};
use crate::template::text;
use crate::template::{describe, templates, Bindings, Candidate, EventRef, IntervalDesc, ObjRef, QuestionType, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtKind {
    Attribute,
    Spatial,
    Temporal,
}

impl TtKind {
    pub const ALL: [TtKind; 3] = [TtKind::Attribute, TtKind::Spatial, TtKind::Temporal];

    pub fn as_str(self) -> &'static str {
        match self {
            TtKind::Attribute => "attribute",
            TtKind::Spatial => "spatial",
            TtKind::Temporal => "temporal",
        }
    }
}

/// A transferred question before execution.
#[derive(Debug, Clone)]
pub struct Draft {
    pub kind: TtKind,
    pub template: &'static Template,
    pub bindings: Bindings,
    pub question: String,
}

/// Intervals that read the previous turn would change meaning when cloned.
fn context_interval(b: &Bindings) -> bool {
    b.interval.as_ref().is_some_and(|i| i.temporal_relation().is_some())
}

fn detach_ref<R: Rng>(r: &ObjRef, scene: &SceneGraph, exclude: Option<AttrKind>, rng: &mut R) -> Option<ObjRef> {
    if !r.is_reference() {
        return Some(r.clone());
    }
    Some(ObjRef::Describe {
        id: r.id(),
        attrs: describe(scene, r.id(), exclude, rng)?,
    })
}

fn detach_event<R: Rng>(e: &EventRef, scene: &SceneGraph, rng: &mut R) -> Option<EventRef> {
    Some(EventRef {
        obj: detach_ref(&e.obj, scene, None, rng)?,
        ..e.clone()
    })
}

/// Rewrites the previous bindings so that they no longer read the dialogue
/// state of the turn before it: references become descriptions and an
/// interval taken from context becomes the interval the previous turn
/// established, which is what the state tracks after that turn.
fn detach<R: Rng>(b: &Bindings, scene: &SceneGraph, exclude: Option<AttrKind>, rng: &mut R) -> Option<Bindings> {
    let mut nb = b.clone();
    for slot in [&mut nb.o1, &mut nb.o2] {
        if let Some(r) = slot.as_ref() {
            *slot = Some(detach_ref(r, scene, exclude, rng)?);
        }
    }
    nb.interval = match &b.interval {
        Some(IntervalDesc::Event { rel, event }) => Some(IntervalDesc::Event {
            rel: *rel,
            event: detach_event(event, scene, rng)?,
        }),
        Some(IntervalDesc::Between { from, from_rel, to, to_rel }) => Some(IntervalDesc::Between {
            from: detach_event(from, scene, rng)?,
            from_rel: *from_rel,
            to: detach_event(to, scene, rng)?,
            to_rel: *to_rel,
        }),
        Some(IntervalDesc::Tracked { .. } | IntervalDesc::Referred { .. }) => Some(IntervalDesc::Tracked {
            rel: TemporalRelation::During,
        }),
        other => other.clone(),
    };
    Some(nb)
}

fn attribute_query(kind: AttrKind) -> &'static Template {
    templates()
        .iter()
        .find(|t| t.question_type == QuestionType::AttributeQuery && t.queried_attr() == Some(kind))
        .expect("one attribute query per kind")
}

/// Attribute transfers: another attribute of the same object, another filter
/// value, or the same question about another object.
pub fn attribute_drafts<R: Rng>(prev: &Candidate, scene: &SceneGraph, rng: &mut R) -> Vec<Draft> {
    let mut out = Vec::new();
    let t = prev.template;
    if let Some(asked) = t.queried_attr() {
        for kind in AttrKind::ALL {
            if kind == asked {
                continue;
            }
            let Some(bindings) = detach(&prev.bindings, scene, Some(kind), rng) else { continue };
            out.push(Draft {
                kind: TtKind::Attribute,
                template: attribute_query(kind),
                bindings,
                question: text::attribute_transfer(kind, rng),
            });
        }
    }
    let Some(b) = detach(&prev.bindings, scene, None, rng) else { return out };
    let b = &b;
    if !b.s.is_empty() && t.slots().s {
        let i = rng.gen_range(0..b.s.len());
        let old = b.s[i];
        for v in AttrValue::all_of(old.kind()) {
            if v == old {
                continue;
            }
            let mut nb = b.clone();
            nb.s[i] = v;
            let plural = t.question_type != QuestionType::ActionQuery;
            out.push(Draft {
                kind: TtKind::Attribute,
                template: t,
                question: text::filter_transfer(&nb.s, plural, rng),
                bindings: nb,
            });
        }
    }
    let slots = t.slots();
    if slots.o1 && !slots.o2 && t.queried_attr().is_none() {
        if let Some(old) = &b.o1 {
            for o in &scene.objects {
                if o.id == old.id() {
                    continue;
                }
                for kind in AttrKind::ALL {
                    let v = o.attrs.get(kind);
                    if scene.matching(&[v]) != [o.id] {
                        continue;
                    }
                    let mut nb = b.clone();
                    nb.o1 = Some(ObjRef::Describe { id: o.id, attrs: vec![v] });
                    out.push(Draft {
                        kind: TtKind::Attribute,
                        template: t,
                        question: text::object_transfer(v, rng),
                        bindings: nb,
                    });
                }
            }
        }
    }
    out.shuffle(rng);
    out
}

/// Spatial transfers: the same question with another spatial relation.
pub fn spatial_drafts<R: Rng>(prev: &Candidate, scene: &SceneGraph, rng: &mut R) -> Vec<Draft> {
    let Some(r) = prev.bindings.r else { return vec![] };
    let Some(b) = detach(&prev.bindings, scene, None, rng) else { return vec![] };
    let mut out: Vec<Draft> = SpatialRelation::ALL
        .iter()
        .filter(|&&x| x != r)
        .map(|&x| Draft {
            kind: TtKind::Spatial,
            template: prev.template,
            bindings: Bindings { r: Some(x), ..b.clone() },
            question: text::spatial_transfer(x, rng),
        })
        .collect();
    out.shuffle(rng);
    out
}

/// The previous question over the extended video. Only questions whose
/// interval ran up to the old cutoff change meaning when the video grows.
pub fn temporal_draft<R: Rng>(prev: &Candidate, scene: &SceneGraph, old_cutoff: f64, rng: &mut R) -> Option<Draft> {
    if !reaskable(prev, old_cutoff) {
        return None;
    }
    Some(Draft {
        kind: TtKind::Temporal,
        template: prev.template,
        bindings: detach(&prev.bindings, scene, None, rng)?,
        question: text::temporal_transfer(&prev.question, rng),
    })
}

/// Whether a question's interval runs up to the cutoff without depending on
/// the previous turn, so that asking it again over a longer video is meaningful.
pub fn reaskable(c: &Candidate, cutoff: f64) -> bool {
    c.interval.kind != IntervalKind::None
        && !context_interval(&c.bindings)
        && (c.interval.end - cutoff).abs() <= EPS
}
