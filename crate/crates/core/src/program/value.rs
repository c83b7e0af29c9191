use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::{SpatialRelation, TemporalRelation, VideoInterval};
use crate::scene::{ActionKind, AttrKind, AttrValue, Color, Material, Shape, Size};

/// Runtime type tags of the DSL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Objects,
    Object,
    Interval,
    Action,
    ActionSet,
    ActionSequence,
    SpatialRelation,
    TemporalRelation,
    Frequency,
    Order,
    Color,
    Material,
    Shape,
    Size,
    Binary,
    Integer,
    Reference,
    LastTurn,
    ObjectTracker,
    IntervalTracker,
}

impl Tag {
    pub fn for_attr(kind: AttrKind) -> Tag {
        match kind {
            AttrKind::Size => Tag::Size,
            AttrKind::Color => Tag::Color,
            AttrKind::Material => Tag::Material,
            AttrKind::Shape => Tag::Shape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Frequency {
    Least,
    Most,
    Times(u32),
}

impl Frequency {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "least" => Some(Frequency::Least),
            "most" => Some(Frequency::Most),
            _ => s.parse().ok().filter(|n| *n > 0).map(Frequency::Times),
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::Least => f.write_str("least"),
            Frequency::Most => f.write_str("most"),
            Frequency::Times(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    Second,
    Third,
    Last,
}

impl Order {
    pub const ALL: [Order; 4] = [Order::First, Order::Second, Order::Third, Order::Last];

    pub fn as_str(self) -> &'static str {
        match self {
            Order::First => "first",
            Order::Second => "second",
            Order::Third => "third",
            Order::Last => "last",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|o| o.as_str() == s)
    }

    /// Index into a list of `len` items, if the position exists.
    pub fn index(self, len: usize) -> Option<usize> {
        let i = match self {
            Order::First => 0,
            Order::Second => 1,
            Order::Third => 2,
            Order::Last => len.checked_sub(1)?,
        };
        (i < len).then_some(i)
    }
}

/// Tagged runtime value. Context-only tags carry a lightweight view of the
/// dialogue state.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Objects(Vec<u32>),
    Object(u32),
    Interval(VideoInterval),
    Action(ActionKind),
    ActionSet(BTreeSet<ActionKind>),
    ActionSequence(Vec<ActionKind>),
    SpatialRelation(SpatialRelation),
    TemporalRelation(TemporalRelation),
    Frequency(Frequency),
    Order(Order),
    Color(Color),
    Material(Material),
    Shape(Shape),
    Size(Size),
    Binary(bool),
    Integer(u32),
    Reference(String),
    LastTurn { focal: Vec<u32>, anchor: Option<VideoInterval> },
    ObjectTracker(Vec<u32>),
    IntervalTracker(Option<VideoInterval>),
}

impl Value {
    pub fn tag(&self) -> Tag {
        match self {
            Value::Objects(_) => Tag::Objects,
            Value::Object(_) => Tag::Object,
            Value::Interval(_) => Tag::Interval,
            Value::Action(_) => Tag::Action,
            Value::ActionSet(_) => Tag::ActionSet,
            Value::ActionSequence(_) => Tag::ActionSequence,
            Value::SpatialRelation(_) => Tag::SpatialRelation,
            Value::TemporalRelation(_) => Tag::TemporalRelation,
            Value::Frequency(_) => Tag::Frequency,
            Value::Order(_) => Tag::Order,
            Value::Color(_) => Tag::Color,
            Value::Material(_) => Tag::Material,
            Value::Shape(_) => Tag::Shape,
            Value::Size(_) => Tag::Size,
            Value::Binary(_) => Tag::Binary,
            Value::Integer(_) => Tag::Integer,
            Value::Reference(_) => Tag::Reference,
            Value::LastTurn { .. } => Tag::LastTurn,
            Value::ObjectTracker(_) => Tag::ObjectTracker,
            Value::IntervalTracker(_) => Tag::IntervalTracker,
        }
    }

    pub fn from_attr(v: AttrValue) -> Value {
        match v {
            AttrValue::Size(x) => Value::Size(x),
            AttrValue::Color(x) => Value::Color(x),
            AttrValue::Material(x) => Value::Material(x),
            AttrValue::Shape(x) => Value::Shape(x),
        }
    }

    pub fn as_attr(&self) -> Option<AttrValue> {
        match self {
            Value::Size(x) => Some(AttrValue::Size(*x)),
            Value::Color(x) => Some(AttrValue::Color(*x)),
            Value::Material(x) => Some(AttrValue::Material(*x)),
            Value::Shape(x) => Some(AttrValue::Shape(*x)),
            _ => None,
        }
    }

    /// Answer string, for values that can be final answers.
    pub fn answer_string(&self) -> Option<String> {
        match self {
            Value::Binary(b) => Some(if *b { "True" } else { "False" }.to_string()),
            Value::Integer(n) => Some(n.to_string()),
            Value::Action(a) => Some(a.as_str().to_string()),
            Value::ActionSet(s) => Some(action_set_string(s)),
            Value::Color(_) | Value::Material(_) | Value::Shape(_) | Value::Size(_) => {
                self.as_attr().map(|a| a.as_str().to_string())
            }
            _ => None,
        }
    }
}

/// Canonical set rendering: kinds in alphabetical order joined by commas.
pub fn action_set_string(set: &BTreeSet<ActionKind>) -> String {
    let mut names: Vec<&str> = set.iter().map(|a| a.as_str()).collect();
    names.sort_unstable();
    names.join(",")
}
