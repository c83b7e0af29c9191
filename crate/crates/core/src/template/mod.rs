//! Question templates: definitions loaded from the bundled data file, slot
//! bindings, program expansion and text realization.

mod bind;
mod instantiate;
pub mod text;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{Module, Program};
use crate::vocab;

pub use bind::{Bindings, EventRef, IntervalDesc, ObjRef, OrRecord};
pub use instantiate::{
    build_program, describe, evaluate, instantiate, object_refs, render_question, Built, Candidate, InstantiateRequest, OrPlacement,
    Rejected, TrMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    ActionCount,
    ActionQuery,
    AttributeQuery,
    CompareActionSeq,
    CompareActionSet,
    CompareActionFreq,
    ObjectCount,
    ObjectExist,
}

impl QuestionType {
    pub const ALL: [QuestionType; 8] = [
        QuestionType::ActionCount,
        QuestionType::ActionQuery,
        QuestionType::AttributeQuery,
        QuestionType::CompareActionSeq,
        QuestionType::CompareActionSet,
        QuestionType::CompareActionFreq,
        QuestionType::ObjectCount,
        QuestionType::ObjectExist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::ActionCount => "action_count",
            QuestionType::ActionQuery => "action_query",
            QuestionType::AttributeQuery => "attribute_query",
            QuestionType::CompareActionSeq => "compare_action_seq",
            QuestionType::CompareActionSet => "compare_action_set",
            QuestionType::CompareActionFreq => "compare_action_freq",
            QuestionType::ObjectCount => "object_count",
            QuestionType::ObjectExist => "object_exist",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The kind of video interval a template is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalType {
    AtomicSpatial,
    AtomicNonspatial,
    Compositional,
    None,
}

impl IntervalType {
    pub const ALL: [IntervalType; 4] = [
        IntervalType::AtomicSpatial,
        IntervalType::AtomicNonspatial,
        IntervalType::Compositional,
        IntervalType::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntervalType::AtomicSpatial => "atomic_spatial",
            IntervalType::AtomicNonspatial => "atomic_nonspatial",
            IntervalType::Compositional => "compositional",
            IntervalType::None => "none",
        }
    }

    pub fn interval_kind(self) -> crate::interval::IntervalKind {
        use crate::interval::IntervalKind;
        match self {
            IntervalType::AtomicSpatial | IntervalType::AtomicNonspatial => IntervalKind::Atomic,
            IntervalType::Compositional => IntervalKind::Compositional,
            IntervalType::None => IntervalKind::None,
        }
    }
}

/// Object-reference slots of a skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjSlot {
    O1,
    O2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepInput {
    Step(usize),
    Interval,
    Object(ObjSlot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideArg {
    Literal(String),
    A1,
    A2,
    R,
    F,
    N,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Node {
        module: Module,
        inputs: Vec<StepInput>,
        side: Vec<SideArg>,
    },
    /// Attribute filters of slot S applied to the output of an earlier step.
    Filters { input: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: String,
    pub question_type: QuestionType,
    pub sub_type: String,
    pub interval: IntervalType,
    pub answers: Vec<String>,
    pub skeleton: Vec<Step>,
    pub texts: Vec<String>,
}

/// Which slots a template uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotSet {
    pub interval: bool,
    pub o1: bool,
    pub o2: bool,
    pub a1: bool,
    pub a2: bool,
    pub r: bool,
    pub s: bool,
    pub f: bool,
    pub n: bool,
}

impl Template {
    pub fn slots(&self) -> SlotSet {
        let mut s = SlotSet::default();
        for step in &self.skeleton {
            match step {
                Step::Filters { .. } => s.s = true,
                Step::Node { inputs, side, .. } => {
                    for i in inputs {
                        match i {
                            StepInput::Interval => s.interval = true,
                            StepInput::Object(ObjSlot::O1) => s.o1 = true,
                            StepInput::Object(ObjSlot::O2) => s.o2 = true,
                            StepInput::Step(_) => {}
                        }
                    }
                    for a in side {
                        match a {
                            SideArg::A1 => s.a1 = true,
                            SideArg::A2 => s.a2 = true,
                            SideArg::R => s.r = true,
                            SideArg::F => s.f = true,
                            SideArg::N => s.n = true,
                            SideArg::Literal(_) => {}
                        }
                    }
                }
            }
        }
        s
    }

    /// Attribute kind asked for by an attribute query.
    pub fn queried_attr(&self) -> Option<crate::scene::AttrKind> {
        use crate::scene::AttrKind;
        match self.skeleton.last() {
            Some(Step::Node { module, .. }) => match module {
                Module::QueryColor => Some(AttrKind::Color),
                Module::QueryMaterial => Some(AttrKind::Material),
                Module::QueryShape => Some(AttrKind::Shape),
                Module::QuerySize => Some(AttrKind::Size),
                _ => None,
            },
            _ => None,
        }
    }

    /// Whether the filter-slot S must be non-empty.
    pub fn needs_filters(&self) -> bool {
        self.skeleton.len() <= 2
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("template {id}: {detail}")]
    Invalid { id: String, detail: String },
}

#[derive(Debug, Deserialize)]
struct TemplateFile {
    template: Vec<TemplateDef>,
}

#[derive(Debug, Deserialize)]
struct TemplateDef {
    id: String,
    question_type: QuestionType,
    sub_type: String,
    interval: IntervalType,
    answers: Vec<String>,
    skeleton: String,
    texts: Vec<String>,
}

const TEMPLATE_DATA: &str = include_str!("../../data/templates.toml");

/// The bundled templates, parsed once.
pub fn templates() -> &'static [Template] {
    static CELL: OnceLock<Vec<Template>> = OnceLock::new();
    CELL.get_or_init(|| parse_templates(TEMPLATE_DATA).expect("bundled templates are valid"))
}

pub fn template_by_id(id: &str) -> Option<&'static Template> {
    templates().iter().find(|t| t.id == id)
}

pub fn parse_templates(text: &str) -> Result<Vec<Template>, TemplateError> {
    let file: TemplateFile = toml::from_str(text)?;
    file.template
        .into_iter()
        .map(|d| {
            let invalid = |detail: String| TemplateError::Invalid {
                id: d.id.clone(),
                detail,
            };
            let skeleton = parse_skeleton(&d.skeleton).map_err(invalid)?;
            if d.texts.is_empty() {
                return Err(invalid("no text variants".into()));
            }
            if let Some(a) = d.answers.iter().find(|a| !vocab::is_answer(a)) {
                return Err(invalid(format!("answer {a:?} is not in the vocabulary")));
            }
            Ok(Template {
                id: d.id,
                question_type: d.question_type,
                sub_type: d.sub_type,
                interval: d.interval,
                answers: d.answers,
                skeleton,
                texts: d.texts,
            })
        })
        .collect()
}

fn parse_skeleton(text: &str) -> Result<Vec<Step>, String> {
    let mut steps = Vec::new();
    for raw in text.split(';') {
        let part = raw.trim();
        if part.is_empty() {
            continue;
        }
        let open = part.find('(').ok_or_else(|| format!("missing '(' in {part:?}"))?;
        if !part.ends_with(')') {
            return Err(format!("missing ')' in {part:?}"));
        }
        let head = &part[..open];
        let args: Vec<&str> = part[open + 1..part.len() - 1]
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .collect();
        let step_ref = |a: &str| -> Result<usize, String> {
            let k: usize = a
                .strip_prefix('#')
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| format!("bad input {a:?}"))?;
            if k >= steps.len() {
                return Err(format!("step {k} is not earlier than step {}", steps.len()));
            }
            Ok(k)
        };
        if head == "<S>" {
            if args.len() != 1 {
                return Err("<S> takes one input".into());
            }
            steps.push(Step::Filters { input: step_ref(args[0])? });
            continue;
        }
        let (name, side_text) = match head.find('[') {
            Some(b) if head.ends_with(']') => (&head[..b], &head[b + 1..head.len() - 1]),
            Some(_) => return Err(format!("unclosed '[' in {part:?}")),
            None => (head, ""),
        };
        let module = Module::from_name(name).ok_or_else(|| format!("unknown module {name:?}"))?;
        let side = side_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "<A1>" => SideArg::A1,
                "<A2>" => SideArg::A2,
                "<R>" => SideArg::R,
                "<F>" => SideArg::F,
                "<N>" => SideArg::N,
                lit => SideArg::Literal(lit.to_string()),
            })
            .collect();
        let inputs = args
            .iter()
            .map(|a| match *a {
                "<I>" => Ok(StepInput::Interval),
                "<O1>" => Ok(StepInput::Object(ObjSlot::O1)),
                "<O2>" => Ok(StepInput::Object(ObjSlot::O2)),
                other => step_ref(other).map(StepInput::Step),
            })
            .collect::<Result<Vec<_>, _>>()?;
        steps.push(Step::Node { module, inputs, side });
    }
    if steps.is_empty() {
        return Err("empty skeleton".into());
    }
    Ok(steps)
}

/// Compact program text, used as a key for duplicate detection.
pub fn program_key(p: &Program) -> String {
    p.to_compact()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn twenty_six_templates_over_eight_types() {
        let ts = templates();
        assert_eq!(ts.len(), 26);
        let types: BTreeSet<QuestionType> = ts.iter().map(|t| t.question_type).collect();
        assert_eq!(types.len(), 8);
        let ids: BTreeSet<&str> = ts.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids.len(), 26);
    }

    #[test]
    fn seventeen_sub_types() {
        let subs: BTreeSet<(QuestionType, &str)> =
            templates().iter().map(|t| (t.question_type, t.sub_type.as_str())).collect();
        assert_eq!(subs.len(), 17);
    }

    #[test]
    fn interval_applicability() {
        let mut by_type: BTreeMap<QuestionType, BTreeSet<IntervalType>> = BTreeMap::new();
        for t in templates() {
            by_type.entry(t.question_type).or_default().insert(t.interval);
        }
        use IntervalType::*;
        assert_eq!(by_type[&QuestionType::AttributeQuery], [None].into());
        assert_eq!(by_type[&QuestionType::CompareActionFreq], [Compositional].into());
        assert_eq!(by_type[&QuestionType::ActionCount], [Compositional].into());
        assert_eq!(by_type[&QuestionType::ObjectCount], [AtomicSpatial, AtomicNonspatial, Compositional, None].into());
        assert_eq!(by_type[&QuestionType::ObjectExist], [AtomicSpatial, AtomicNonspatial, Compositional].into());
        assert_eq!(by_type[&QuestionType::ActionQuery], [AtomicSpatial, AtomicNonspatial, Compositional].into());
    }

    #[test]
    fn interval_slot_matches_applicability() {
        for t in templates() {
            let s = t.slots();
            assert_eq!(s.interval, t.interval != IntervalType::None, "{}", t.id);
            assert_eq!(s.r, t.interval == IntervalType::AtomicSpatial, "{}", t.id);
        }
    }

    #[test]
    fn skeleton_parse_errors() {
        assert!(parse_skeleton("count_object(#0)").is_err());
        assert!(parse_skeleton("scene(); nope(#0)").is_err());
        assert!(parse_skeleton("scene(); <S>(#0, #0)").is_err());
        assert!(parse_skeleton("").is_err());
    }
}
