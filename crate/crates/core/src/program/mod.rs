//! The functional-program DSL: module signatures, programs as node lists and
//! their compact text form.

mod exec;
mod value;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::{apply_module, execute, execute_with, typecheck, ExecContext, ExecOptions, Execution};
pub use value::{action_set_string, Frequency, Order, Tag, Value};

macro_rules! modules {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Module {
            $($variant),+
        }

        impl Module {
            pub const ALL: &'static [Module] = &[$(Module::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(Module::$variant => $name),+
                }
            }

            pub fn from_name(s: &str) -> Option<Module> {
                match s {
                    $($name => Some(Module::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

modules! {
    Scene => "scene",
    FilterColor => "filter_color",
    FilterMaterial => "filter_material",
    FilterShape => "filter_shape",
    FilterSize => "filter_size",
    FilterAction => "filter_action",
    FilterContained => "filter_contained",
    SameActionSet => "same_action_set",
    SameActionSequence => "same_action_sequence",
    Unique => "unique",
    CountObject => "count_object",
    CountAction => "count_action",
    Exist => "exist",
    FindInterval => "find_interval",
    UnionInterval => "union_interval",
    RelateSpatial => "relate_spatial",
    RelateTemporal => "relate_temporal",
    GreaterThan => "greater_than",
    LessThan => "less_than",
    Equal => "equal",
    ReferObject => "refer_object",
    TrackObject => "track_object",
    ReferInterval => "refer_interval",
    TrackInterval => "track_interval",
    QueryActionSet => "query_action_set",
    QueryActionSequence => "query_action_sequence",
    ActionByFrequency => "action_by_frequency",
    ActionByOrder => "action_by_order",
    EqualAction => "equal_action",
    QueryColor => "query_color",
    QueryMaterial => "query_material",
    QueryShape => "query_shape",
    QuerySize => "query_size",
}

/// Type signature of a module.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    /// Whether a leading `Interval` node input may be given; when absent the
    /// whole visible video is used.
    pub interval: IntervalInput,
    /// Remaining node inputs.
    pub inputs: &'static [Tag],
    /// Literal side arguments; trailing ones after `required_side` are optional.
    pub side: &'static [Tag],
    pub required_side: usize,
    /// Dialogue-state inputs injected from the execution context.
    pub context: Option<Tag>,
    pub output: Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalInput {
    No,
    Optional,
}

impl Module {
    pub fn signature(self) -> Signature {
        use IntervalInput::{No, Optional};
        use Module::*;
        let sig = |interval, inputs: &'static [Tag], side: &'static [Tag], context, output| Signature {
            interval,
            inputs,
            side,
            required_side: side.len(),
            context,
            output,
        };
        match self {
            Scene => sig(No, &[], &[], None, Tag::Objects),
            FilterColor => sig(No, &[Tag::Objects], &[Tag::Color], None, Tag::Objects),
            FilterMaterial => sig(No, &[Tag::Objects], &[Tag::Material], None, Tag::Objects),
            FilterShape => sig(No, &[Tag::Objects], &[Tag::Shape], None, Tag::Objects),
            FilterSize => sig(No, &[Tag::Objects], &[Tag::Size], None, Tag::Objects),
            FilterAction => sig(Optional, &[Tag::Objects], &[Tag::Action], None, Tag::Objects),
            FilterContained => sig(Optional, &[Tag::Objects], &[], None, Tag::Objects),
            SameActionSet => sig(Optional, &[Tag::Object], &[], None, Tag::Objects),
            SameActionSequence => sig(Optional, &[Tag::Object], &[], None, Tag::Objects),
            Unique => sig(No, &[Tag::Objects], &[], None, Tag::Object),
            CountObject => sig(No, &[Tag::Objects], &[], None, Tag::Integer),
            CountAction => sig(Optional, &[Tag::Object], &[Tag::Action], None, Tag::Integer),
            Exist => sig(No, &[Tag::Objects], &[], None, Tag::Binary),
            FindInterval => Signature {
                interval: No,
                inputs: &[Tag::Object],
                side: &[Tag::Action, Tag::Order],
                required_side: 1,
                context: None,
                output: Tag::Interval,
            },
            UnionInterval => sig(No, &[Tag::Interval, Tag::Interval], &[], None, Tag::Interval),
            RelateSpatial => sig(Optional, &[Tag::Object], &[Tag::SpatialRelation], None, Tag::Objects),
            RelateTemporal => sig(No, &[Tag::Interval], &[Tag::TemporalRelation], None, Tag::Interval),
            GreaterThan | LessThan | Equal => sig(No, &[Tag::Integer, Tag::Integer], &[], None, Tag::Binary),
            ReferObject => sig(No, &[], &[Tag::Reference], Some(Tag::LastTurn), Tag::Objects),
            TrackObject => sig(No, &[], &[], Some(Tag::ObjectTracker), Tag::Objects),
            ReferInterval => sig(No, &[], &[Tag::Reference], Some(Tag::LastTurn), Tag::Interval),
            TrackInterval => sig(No, &[], &[], Some(Tag::IntervalTracker), Tag::Interval),
            QueryActionSet => sig(Optional, &[Tag::Object], &[], None, Tag::ActionSet),
            QueryActionSequence => sig(Optional, &[Tag::Object], &[], None, Tag::ActionSequence),
            ActionByFrequency => sig(Optional, &[Tag::Object], &[Tag::Frequency], None, Tag::ActionSet),
            ActionByOrder => sig(Optional, &[Tag::Object], &[Tag::Order], None, Tag::Action),
            // Inputs are two action sets or two action sequences; checked at run time.
            EqualAction => sig(No, &[Tag::ActionSet, Tag::ActionSet], &[], None, Tag::Binary),
            QueryColor => sig(No, &[Tag::Object], &[], None, Tag::Color),
            QueryMaterial => sig(No, &[Tag::Object], &[], None, Tag::Material),
            QueryShape => sig(No, &[Tag::Object], &[], None, Tag::Shape),
            QuerySize => sig(No, &[Tag::Object], &[], None, Tag::Size),
        }
    }

    /// Modules whose result depends on a video interval.
    pub fn consumes_interval(self) -> bool {
        self.signature().interval == IntervalInput::Optional
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Module {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Module {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Module::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown module {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub module: Module,
    pub inputs: Vec<usize>,
    pub side: Vec<String>,
}

impl Node {
    pub fn new(module: Module, inputs: Vec<usize>, side: Vec<String>) -> Self {
        Node { module, inputs, side }
    }
}

/// A program is a topologically ordered node list; the last node is the output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("type mismatch at node {node}: {detail}")]
    TypeMismatch { node: usize, detail: String },
    #[error("ill-posed at node {node} ({module}): {reason}")]
    IllPosed { node: usize, module: &'static str, reason: String },
}

impl ProgramError {
    pub fn is_ill_posed(&self) -> bool {
        matches!(self, ProgramError::IllPosed { .. })
    }
}

impl Program {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn push(&mut self, module: Module, inputs: Vec<usize>, side: Vec<String>) -> usize {
        self.nodes.push(Node::new(module, inputs, side));
        self.nodes.len() - 1
    }

    /// Node indices are acyclic by construction when every input precedes its node.
    pub fn check_order(&self) -> Result<(), ProgramError> {
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(&bad) = n.inputs.iter().find(|&&j| j >= i) {
                return Err(ProgramError::Parse(format!("node {i} reads node {bad}, which is not earlier")));
            }
        }
        if self.nodes.is_empty() {
            return Err(ProgramError::Parse("empty program".into()));
        }
        Ok(())
    }

    pub fn to_compact(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(n.module.name())?;
            if !n.side.is_empty() {
                write!(f, "[{}]", n.side.join(","))?;
            }
            let inputs: Vec<String> = n.inputs.iter().map(|j| j.to_string()).collect();
            write!(f, "({})", inputs.join(", "))?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = ProgramError;

    /// Parses `name[side,...](input, ...)` nodes separated by `;`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut nodes = Vec::new();
        for raw in s.split(';') {
            let part = raw.trim();
            if part.is_empty() {
                continue;
            }
            nodes.push(parse_node(part)?);
        }
        let p = Program { nodes };
        p.check_order()?;
        Ok(p)
    }
}

fn parse_node(part: &str) -> Result<Node, ProgramError> {
    let err = |m: &str| ProgramError::Parse(format!("{m} in {part:?}"));
    let open = part.find('(').ok_or_else(|| err("missing '('"))?;
    if !part.ends_with(')') {
        return Err(err("missing ')'"));
    }
    let head = &part[..open];
    let args = &part[open + 1..part.len() - 1];
    let (name, side) = match head.find('[') {
        Some(b) => {
            if !head.ends_with(']') {
                return Err(err("unclosed '['"));
            }
            let side: Vec<String> = head[b + 1..head.len() - 1]
                .split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect();
            (&head[..b], side)
        }
        None => (head, Vec::new()),
    };
    let module = Module::from_name(name.trim()).ok_or_else(|| err("unknown module"))?;
    let inputs = args
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<usize>().map_err(|_| err("bad input index")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Node { module, inputs, side })
}
