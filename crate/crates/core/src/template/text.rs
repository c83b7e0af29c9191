//! Surface forms: noun phrases, verb forms, interval phrases and template text.

use rand::seq::SliceRandom;
use rand::Rng;

use super::bind::{Bindings, EventRef, IntervalDesc, ObjRef};
use crate::interval::{SpatialRelation, TemporalRelation};
use crate::program::{Frequency, Order};
use crate::scene::{ActionKind, AttrKind, AttrValue, Material, Shape, Size};

fn pick<'a, R: Rng>(rng: &mut R, options: &[&'a str]) -> &'a str {
    options.choose(rng).copied().unwrap_or("")
}

fn adjective<R: Rng>(v: AttrValue, rng: &mut R) -> &'static str {
    match v {
        AttrValue::Size(Size::Large) => pick(rng, &["large", "big"]),
        AttrValue::Size(Size::Medium) => pick(rng, &["medium", "average"]),
        AttrValue::Size(Size::Small) => "small",
        AttrValue::Material(Material::Rubber) => pick(rng, &["rubber", "matte"]),
        AttrValue::Material(Material::Metal) => pick(rng, &["metal", "metallic", "shiny"]),
        other => other.as_str(),
    }
}

fn noun<R: Rng>(shape: Option<Shape>, plural: bool, rng: &mut R) -> &'static str {
    match (shape, plural) {
        (None, false) => pick(rng, &["thing", "object"]),
        (None, true) => pick(rng, &["things", "objects"]),
        (Some(Shape::Cube), false) => pick(rng, &["cube", "block"]),
        (Some(Shape::Cube), true) => pick(rng, &["cubes", "blocks"]),
        (Some(Shape::Cone), p) => if p { "cones" } else { "cone" },
        (Some(Shape::Sphere), p) => if p { "spheres" } else { "sphere" },
        (Some(Shape::Cylinder), p) => if p { "cylinders" } else { "cylinder" },
        (Some(Shape::Snitch), p) => if p { "snitches" } else { "snitch" },
    }
}

/// "large rubber cones", "thing": attributes in size, color, material order, then the noun.
pub fn attribute_phrase<R: Rng>(attrs: &[AttrValue], plural: bool, rng: &mut R) -> String {
    let mut sorted = attrs.to_vec();
    sorted.sort_by_key(|a| a.kind());
    let mut words: Vec<&str> = Vec::new();
    let mut shape = None;
    for a in sorted {
        match a {
            AttrValue::Shape(s) => shape = Some(s),
            other => words.push(adjective(other, rng)),
        }
    }
    words.push(noun(shape, plural, rng));
    words.join(" ")
}

pub fn object_phrase<R: Rng>(r: &ObjRef, rng: &mut R) -> String {
    match r {
        ObjRef::Describe { attrs, .. } => format!("the {}", attribute_phrase(attrs, false, rng)),
        ObjRef::Pronoun { .. } => "it".to_string(),
        ObjRef::LongTerm { attrs, .. } => format!("the earlier mentioned {}", attribute_phrase(attrs, false, rng)),
    }
}

pub fn possessive<R: Rng>(r: &ObjRef, rng: &mut R) -> String {
    match r {
        ObjRef::Pronoun { .. } => "its".to_string(),
        other => format!("{} 's", object_phrase(other, rng)),
    }
}

/// Verb forms: `base`, `3s`, `ing`, `adj`, `noun`.
pub fn action_form<R: Rng>(a: ActionKind, form: &str, rng: &mut R) -> &'static str {
    match (a, form) {
        (ActionKind::Flying, "base") => "fly",
        (ActionKind::Flying, "3s") => "flies",
        (ActionKind::Flying, "ing" | "adj") => "flying",
        (ActionKind::Flying, _) => "flight",
        (ActionKind::Sliding, "base") => "slide",
        (ActionKind::Sliding, "3s") => "slides",
        (ActionKind::Sliding, "ing" | "adj") => "sliding",
        (ActionKind::Sliding, _) => "slide",
        (ActionKind::Rotating, "base") => pick(rng, &["rotate", "spin"]),
        (ActionKind::Rotating, "3s") => pick(rng, &["rotates", "spins"]),
        (ActionKind::Rotating, "ing" | "adj") => pick(rng, &["rotating", "spinning"]),
        (ActionKind::Rotating, _) => "rotation",
        (ActionKind::NoAction, "base") => "stay still",
        (ActionKind::NoAction, "3s") => "stays still",
        (ActionKind::NoAction, "ing") => "staying still",
        (ActionKind::NoAction, _) => "stationary",
    }
}

pub fn relation_phrase<R: Rng>(r: SpatialRelation, rng: &mut R) -> &'static str {
    match r {
        SpatialRelation::Left => pick(rng, &["left of", "to the left of"]),
        SpatialRelation::Right => pick(rng, &["right of", "to the right of"]),
        SpatialRelation::Front => "in front of",
        SpatialRelation::Behind => "behind",
    }
}

pub fn frequency_phrase(f: Frequency) -> String {
    match f {
        Frequency::Least => "the least".into(),
        Frequency::Most => "the most".into(),
        Frequency::Times(1) => "once".into(),
        Frequency::Times(2) => "twice".into(),
        Frequency::Times(n) => format!("{n} times"),
    }
}

fn event_phrase<R: Rng>(e: &EventRef, rng: &mut R) -> String {
    let owner = possessive(&e.obj, rng);
    let what = action_form(e.action, "noun", rng);
    match e.order {
        Some(o) => format!("{owner} {} {what}", o.as_str()),
        None => format!("{owner} {what}"),
    }
}

fn temporal_prefix(rel: TemporalRelation) -> &'static str {
    match rel {
        TemporalRelation::During => "during",
        TemporalRelation::Before => "before",
        TemporalRelation::After => "after",
        TemporalRelation::Until => "until the end of",
        TemporalRelation::Since => "since the start of",
    }
}

pub fn interval_phrase<R: Rng>(d: &IntervalDesc, rng: &mut R) -> String {
    match d {
        IntervalDesc::Whole => pick(rng, &["throughout the whole video", "during the whole video"]).to_string(),
        IntervalDesc::Event { rel, event } => format!("{} {}", temporal_prefix(*rel), event_phrase(event, rng)),
        IntervalDesc::Between { from, from_rel, to, to_rel } => {
            let a = if *from_rel == TemporalRelation::After { "the end of" } else { "the start of" };
            let b = if *to_rel == TemporalRelation::Before { "the start of" } else { "the end of" };
            format!("between {a} {} and {b} {}", event_phrase(from, rng), event_phrase(to, rng))
        }
        IntervalDesc::Tracked { rel } => {
            let span = pick(rng, &["that period", "that time"]);
            format!("{} {span}", temporal_prefix(*rel))
        }
        IntervalDesc::Referred { rel, action } => {
            format!("{} that {}", temporal_prefix(*rel), action_form(*action, "noun", rng))
        }
    }
}

pub fn order_phrase(o: Order) -> &'static str {
    o.as_str()
}

/// Fills every placeholder of `text` from the bindings.
pub fn realize<R: Rng>(text: &str, b: &Bindings, rng: &mut R) -> Result<String, String> {
    let mut out = String::with_capacity(text.len() + 32);
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('>').ok_or("unclosed placeholder")? + open;
        let tag = &rest[open + 1..close];
        let (name, form) = tag.split_once(':').unwrap_or((tag, ""));
        let unbound = || format!("unbound slot <{tag}>");
        let piece = match name {
            "I" => interval_phrase(b.interval.as_ref().ok_or_else(unbound)?, rng),
            "O1" | "O2" => {
                let r = if name == "O1" { &b.o1 } else { &b.o2 };
                let r = r.as_ref().ok_or_else(unbound)?;
                if form == "poss" {
                    possessive(r, rng)
                } else {
                    object_phrase(r, rng)
                }
            }
            "A1" | "A2" => {
                let a = if name == "A1" { b.a1 } else { b.a2 };
                action_form(a.ok_or_else(unbound)?, if form.is_empty() { "base" } else { form }, rng).to_string()
            }
            "R" => relation_phrase(b.r.ok_or_else(unbound)?, rng).to_string(),
            "S" => attribute_phrase(&b.s, form == "pl", rng),
            "F" => frequency_phrase(b.f.ok_or_else(unbound)?),
            "N" => order_phrase(b.n.ok_or_else(unbound)?).to_string(),
            _ => return Err(unbound()),
        };
        out.push_str(&piece);
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out.split_whitespace().collect::<Vec<_>>().join(" "))
}

/// Elliptical follow-up asking for another attribute of the same object.
pub fn attribute_transfer<R: Rng>(kind: AttrKind, rng: &mut R) -> String {
    let lead = pick(rng, &["what about", "how about"]);
    format!("{lead} its {} ?", kind.as_str())
}

/// Elliptical follow-up swapping the spatial relation, anchored on "it".
pub fn spatial_transfer<R: Rng>(r: SpatialRelation, rng: &mut R) -> String {
    let lead = pick(rng, &["how about", "what about"]);
    match r {
        SpatialRelation::Left => format!("{lead} its left ?"),
        SpatialRelation::Right => format!("{lead} its right ?"),
        SpatialRelation::Front => format!("{lead} in front of it ?"),
        SpatialRelation::Behind => format!("{lead} behind it ?"),
    }
}

/// Elliptical follow-up swapping filter values: "what about red cubes ?".
pub fn filter_transfer<R: Rng>(attrs: &[AttrValue], plural: bool, rng: &mut R) -> String {
    let lead = pick(rng, &["what about", "how about"]);
    if plural {
        format!("{lead} {} ?", attribute_phrase(attrs, true, rng))
    } else {
        format!("{lead} the {} ?", attribute_phrase(attrs, false, rng))
    }
}

/// Elliptical follow-up about another object: "what about the red one ?".
pub fn object_transfer<R: Rng>(v: AttrValue, rng: &mut R) -> String {
    let lead = pick(rng, &["what about", "how about"]);
    match v {
        AttrValue::Shape(s) => format!("{lead} the {} ?", noun(Some(s), false, rng)),
        other => format!("{lead} the {} one ?", adjective(other, rng)),
    }
}

/// The previous question asked again over the extended video.
pub fn temporal_transfer<R: Rng>(question: &str, rng: &mut R) -> String {
    let lead = pick(rng, &["now ,", "and now ,", "at this point ,"]);
    format!("{lead} {question}")
}
