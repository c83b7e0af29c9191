//! Per-turn dialogue state: tracked objects with known attributes, the last
//! ground-truth interval, the last turn and the current video cutoff.

use serde::{Deserialize, Serialize};

use crate::interval::VideoInterval;
use crate::program::{Execution, Module, Program, Value};
use crate::scene::{ActionKind, AttrKind, AttrValue, Color, Material, ObjectAttr, Shape, Size};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedObject {
    pub id: u32,
    pub size: Option<Size>,
    pub color: Option<Color>,
    pub material: Option<Material>,
    pub shape: Option<Shape>,
    pub first_turn: usize,
    /// Turns in which the object was mentioned, ascending.
    #[serde(default)]
    pub turns: Vec<usize>,
}

impl TrackedObject {
    pub fn new(id: u32, turn: usize) -> Self {
        TrackedObject {
            id,
            size: None,
            color: None,
            material: None,
            shape: None,
            first_turn: turn,
            turns: vec![turn],
        }
    }

    pub fn known(&self, kind: AttrKind) -> Option<AttrValue> {
        match kind {
            AttrKind::Size => self.size.map(AttrValue::Size),
            AttrKind::Color => self.color.map(AttrValue::Color),
            AttrKind::Material => self.material.map(AttrValue::Material),
            AttrKind::Shape => self.shape.map(AttrValue::Shape),
        }
    }

    pub fn learn(&mut self, v: AttrValue) {
        match v {
            AttrValue::Size(x) => self.size = Some(x),
            AttrValue::Color(x) => self.color = Some(x),
            AttrValue::Material(x) => self.material = Some(x),
            AttrValue::Shape(x) => self.shape = Some(x),
        }
    }

    pub fn known_values(&self) -> Vec<AttrValue> {
        AttrKind::ALL.iter().filter_map(|k| self.known(*k)).collect()
    }

    /// True when every known attribute agrees with `attrs`.
    pub fn consistent_with(&self, attrs: &ObjectAttr) -> bool {
        self.known_values().iter().all(|v| attrs.matches(*v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastTurn {
    #[serde(skip)]
    pub question: String,
    #[serde(skip)]
    pub program: Program,
    pub answer: String,
    /// Objects the question was about; a pronoun resolves only when there is one.
    pub focal: Vec<u32>,
    /// The action event the question's interval was anchored on, if any.
    pub anchor: Option<VideoInterval>,
    pub anchor_action: Option<ActionKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    /// One-based index of the turn this state precedes.
    pub turn_index: usize,
    pub objects: Vec<TrackedObject>,
    pub interval: Option<VideoInterval>,
    pub last_turn: Option<LastTurn>,
    pub cutoff: f64,
}

impl DialogueState {
    pub fn initial(cutoff: f64) -> Self {
        DialogueState {
            turn_index: 1,
            objects: Vec::new(),
            interval: None,
            last_turn: None,
            cutoff,
        }
    }

    pub fn tracked(&self, id: u32) -> Option<&TrackedObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn tracked_ids(&self) -> Vec<u32> {
        self.objects.iter().map(|o| o.id).collect()
    }

    /// Folds one executed turn into the state and moves to the next turn.
    pub fn advance(&mut self, program: &Program, exec: &Execution, last: LastTurn) {
        let turn = self.turn_index;
        for (id, attrs) in mentions(program, &exec.values) {
            let pos = match self.objects.iter().position(|o| o.id == id) {
                Some(p) => p,
                None => {
                    self.objects.push(TrackedObject::new(id, turn));
                    self.objects.len() - 1
                }
            };
            let obj = &mut self.objects[pos];
            if obj.turns.last() != Some(&turn) {
                obj.turns.push(turn);
            }
            for a in attrs {
                obj.learn(a);
            }
        }
        if exec.interval.kind != crate::interval::IntervalKind::None {
            self.interval = Some(exec.interval);
        }
        self.last_turn = Some(last);
        self.turn_index += 1;
    }
}

/// Objects singled out by `unique` in an executed program, each with the
/// attribute values stated in its description or revealed by a query.
pub fn mentions(program: &Program, values: &[Value]) -> Vec<(u32, Vec<AttrValue>)> {
    let mut out: Vec<(u32, Vec<AttrValue>)> = Vec::new();
    let mut add = |id: u32, vals: Vec<AttrValue>| match out.iter_mut().find(|(i, _)| *i == id) {
        Some((_, v)) => {
            for x in vals {
                if !v.contains(&x) {
                    v.push(x);
                }
            }
        }
        None => out.push((id, vals)),
    };
    for (i, node) in program.nodes.iter().enumerate() {
        match node.module {
            Module::Unique => {
                if let Some(Value::Object(id)) = values.get(i) {
                    add(*id, described_attrs(program, node.inputs[0]));
                }
            }
            Module::QueryColor | Module::QueryMaterial | Module::QueryShape | Module::QuerySize => {
                if let (Some(Value::Object(id)), Some(v)) = (values.get(node.inputs[0]), values.get(i)) {
                    if let Some(a) = v.as_attr() {
                        add(*id, vec![a]);
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Attribute filters on the chain feeding node `idx`.
pub fn described_attrs(program: &Program, mut idx: usize) -> Vec<AttrValue> {
    let mut vals = Vec::new();
    loop {
        let node = &program.nodes[idx];
        let kind = match node.module {
            Module::FilterColor => AttrKind::Color,
            Module::FilterMaterial => AttrKind::Material,
            Module::FilterShape => AttrKind::Shape,
            Module::FilterSize => AttrKind::Size,
            _ => break,
        };
        if let Some(v) = node.side.first().and_then(|s| AttrValue::parse(kind, s)) {
            vals.push(v);
        }
        idx = node.inputs[0];
    }
    vals
}
