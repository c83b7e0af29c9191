//! Answer accuracy with diagnostic slices, transferability, object and
//! interval tracking metrics, baselines and corpus statistics.

pub mod baselines;
pub mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Split;
use crate::dialogue::{replay_turn, Dialogue, Turn, TtKind};
use crate::interval::{make_interval, IntervalKind, VideoInterval};
use crate::program::{ExecOptions, Module, Value};
use crate::scene::{Color, Material, SceneGraph, Shape, Size};
use crate::state::{described_attrs, TrackedObject};
use crate::vocab::is_answer;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("the training split has no turns")]
    EmptyTrain,
    #[error("no prediction for {dialogue_id} turn {turn}")]
    MissingPrediction { dialogue_id: String, turn: usize },
    #[error("more than one prediction for {dialogue_id} turn {turn}")]
    DuplicatePrediction { dialogue_id: String, turn: usize },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("scene {0} is not in the corpus")]
    MissingScene(String),
}

/// One object of a predicted or stored dialogue state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectSlots {
    pub id: u32,
    #[serde(default)]
    pub size: Option<Size>,
    #[serde(default)]
    pub color: Option<Color>,
    #[serde(default)]
    pub material: Option<Material>,
    #[serde(default)]
    pub shape: Option<Shape>,
}

impl From<&TrackedObject> for ObjectSlots {
    fn from(o: &TrackedObject) -> Self {
        ObjectSlots {
            id: o.id,
            size: o.size,
            color: o.color,
            material: o.material,
            shape: o.shape,
        }
    }
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub dialogue_id: String,
    pub turn: usize,
    pub answer: String,
    /// Objects and attributes known before this turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<ObjectSlots>>,
    /// (start, end) of the interval the question is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Candidate intervals, best first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<[f64; 2]>>,
}

impl Prediction {
    pub fn answer_only(dialogue_id: &str, turn: usize, answer: String) -> Self {
        Prediction {
            dialogue_id: dialogue_id.to_string(),
            turn,
            answer,
            state: None,
            interval: None,
            ranking: None,
        }
    }
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, EvalError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| EvalError::Schema(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn write_predictions(preds: &[Prediction]) -> String {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p).expect("predictions serialize"));
        out.push('\n');
    }
    out
}

/// Ground truth with everything a predictor could want.
pub fn oracle(dialogues: &[Dialogue]) -> Vec<Prediction> {
    dialogues
        .iter()
        .flat_map(|d| {
            d.turns.iter().map(|t| {
                let span = (t.interval.kind != IntervalKind::None).then_some([t.interval.start, t.interval.end]);
                Prediction {
                    dialogue_id: d.dialogue_id.clone(),
                    turn: t.turn,
                    answer: t.answer.clone(),
                    state: Some(t.state.objects.iter().map(ObjectSlots::from).collect()),
                    interval: span,
                    ranking: span.map(|s| vec![s]),
                }
            })
        })
        .collect()
}

/// Gold answers, except that a topic-transfer turn repeats the previous gold answer.
pub fn recycle(dialogues: &[Dialogue]) -> Vec<Prediction> {
    dialogues
        .iter()
        .flat_map(|d| {
            d.turns.iter().enumerate().map(|(i, t)| {
                let answer = match (t.relations.tt, i) {
                    (Some(_), i) if i > 0 => d.turns[i - 1].answer.clone(),
                    _ => t.answer.clone(),
                };
                Prediction::answer_only(&d.dialogue_id, t.turn, answer)
            })
        })
        .collect()
}

/// A fixed answer for every turn.
pub fn constant(dialogues: &[Dialogue], answer: &str) -> Vec<Prediction> {
    dialogues
        .iter()
        .flat_map(|d| d.turns.iter().map(|t| Prediction::answer_only(&d.dialogue_id, t.turn, answer.to_string())))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Acc {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Acc {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
    }

    fn finish(&mut self) {
        self.accuracy = if self.total == 0 { 0.0 } else { self.correct as f64 / self.total as f64 };
    }
}

pub type Slice = BTreeMap<String, Acc>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DotMetrics {
    pub joint: f64,
    pub slot: f64,
    /// Turns scored for joint accuracy (all) and slot accuracy (non-empty gold state).
    pub joint_turns: usize,
    pub slot_turns: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VitMetrics {
    pub rank1: f64,
    pub rank2: f64,
    pub miou: f64,
    pub turns: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub turns: usize,
    pub correct: usize,
    pub overall_accuracy: f64,
    pub by_question_type: Slice,
    pub by_interval_type: Slice,
    pub by_contained_count: Slice,
    pub by_interval_length_decile: Slice,
    /// Temporal-relation turns whose answer depends on the localized interval.
    pub by_tr_type: Slice,
    /// Temporal-relation turns before that filter.
    pub tr_unfiltered: usize,
    pub by_turn_position: Slice,
    /// Object-reference turns that need dialogue context, by turn distance.
    pub by_or_distance: Slice,
    pub or_unfiltered: usize,
    pub transferability: Option<f64>,
    pub transferability_pairs: usize,
    pub transferability_by_kind: Slice,
    pub dot: Option<DotMetrics>,
    pub vit: Option<VitMetrics>,
}

impl MetricReport {
    pub fn slices(&self) -> [(&'static str, &Slice); 8] {
        [
            ("question_type", &self.by_question_type),
            ("interval_type", &self.by_interval_type),
            ("contained_count", &self.by_contained_count),
            ("interval_length_decile", &self.by_interval_length_decile),
            ("tr_type", &self.by_tr_type),
            ("turn_position", &self.by_turn_position),
            ("or_distance", &self.by_or_distance),
            ("transferability", &self.transferability_by_kind),
        ]
    }

    /// Rows `slice,key,correct,total,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slice,key,correct,total,accuracy\n");
        let _ = writeln!(out, "overall,all,{},{},{}", self.correct, self.turns, self.overall_accuracy);
        for (name, slice) in self.slices() {
            for (k, a) in slice {
                let _ = writeln!(out, "{name},{k},{},{},{}", a.correct, a.total, a.accuracy);
            }
        }
        if let Some(t) = self.transferability {
            let _ = writeln!(out, "transferability,all,,{},{t}", self.transferability_pairs);
        }
        if let Some(d) = self.dot {
            let _ = writeln!(out, "dot,joint,,{},{}", d.joint_turns, d.joint);
            let _ = writeln!(out, "dot,slot,,{},{}", d.slot_turns, d.slot);
        }
        if let Some(v) = self.vit {
            let _ = writeln!(out, "vit,rank1,,{},{}", v.turns, v.rank1);
            let _ = writeln!(out, "vit,rank2,,{},{}", v.turns, v.rank2);
            let _ = writeln!(out, "vit,miou,,{},{}", v.turns, v.miou);
        }
        out
    }
}

/// Everything about one gold turn that scoring needs, computed once per split.
#[derive(Debug, Clone)]
pub struct TurnInfo {
    pub dialogue_id: String,
    pub turn: usize,
    pub answer: String,
    pub question_type: String,
    pub interval_type: String,
    pub contained: usize,
    pub length_decile: String,
    pub tr: Option<String>,
    pub tr_raw: bool,
    pub or_distances: Vec<usize>,
    pub or_raw: bool,
    pub tt: Option<TtKind>,
    pub state: Vec<ObjectSlots>,
    pub interval: Option<VideoInterval>,
}

/// Per-turn gold annotations of a split, in dialogue order.
#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub turns: Vec<TurnInfo>,
}

/// Fixed 10% bins of interval length relative to the visible video.
pub fn length_decile(t: &Turn) -> String {
    if t.interval.kind == IntervalKind::None || t.cutoff <= 0.0 {
        return "none".into();
    }
    let bin = ((t.interval.len() / t.cutoff) * 10.0).floor().clamp(0.0, 9.0) as usize;
    format!("d{bin}")
}

/// Objects referred to by "the earlier mentioned ..." whose description alone
/// already picks them out in the video.
fn resolvable_from_video(scene: &SceneGraph, t: &Turn, values: &[Value]) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for (i, node) in t.program.nodes.iter().enumerate() {
        if node.module != Module::Unique {
            continue;
        }
        let mut root = node.inputs[0];
        while !t.program.nodes[root].inputs.is_empty() && t.program.nodes[root].module != Module::TrackObject {
            root = t.program.nodes[root].inputs[0];
        }
        if t.program.nodes[root].module != Module::TrackObject {
            continue;
        }
        if let Some(Value::Object(id)) = values.get(i) {
            let attrs = described_attrs(&t.program, node.inputs[0]);
            if scene.matching(&attrs) == [*id] {
                out.insert(*id);
            }
        }
    }
    out
}

fn analyze_turn(scene: &SceneGraph, d: &Dialogue, t: &Turn, options: ExecOptions) -> Result<TurnInfo, EvalError> {
    let exec = replay_turn(scene, t, options)
        .map_err(|e| EvalError::Schema(format!("{} turn {} does not replay: {e}", d.dialogue_id, t.turn)))?;
    let tr = match t.relations.tr {
        Some(rel) => {
            let view = scene.truncated(t.cutoff);
            let whole = make_interval(&view, 0.0, view.duration);
            let o = ExecOptions {
                interval_override: Some(whole),
                ..options
            };
            let unlocalized = replay_turn(scene, t, o).ok().and_then(|e| e.answer().answer_string());
            (unlocalized.as_deref() != Some(t.answer.as_str())).then(|| rel.as_str().to_string())
        }
        None => None,
    };
    let video_only = resolvable_from_video(scene, t, &exec.values);
    let or_distances: BTreeSet<usize> = t
        .relations
        .or
        .iter()
        .filter(|r| !(r.distance >= 2 && video_only.contains(&r.object)))
        .map(|r| r.distance)
        .collect();
    Ok(TurnInfo {
        dialogue_id: d.dialogue_id.clone(),
        turn: t.turn,
        answer: t.answer.clone(),
        question_type: t.question_type.as_str().to_string(),
        interval_type: t.interval_type.as_str().to_string(),
        contained: t.contained_object_count,
        length_decile: length_decile(t),
        tr,
        tr_raw: t.relations.tr.is_some(),
        or_distances: or_distances.into_iter().collect(),
        or_raw: !t.relations.or.is_empty(),
        tt: t.relations.tt,
        state: t.state.objects.iter().map(ObjectSlots::from).collect(),
        interval: (t.interval.kind != IntervalKind::None).then_some(t.interval),
    })
}

/// Replays every turn of the split once; parallel over dialogues.
pub fn analyze(split: &Split, options: ExecOptions) -> Result<Analysis, EvalError> {
    let scenes: HashMap<&str, &SceneGraph> = split.scenes.iter().map(|s| (s.video_id.as_str(), s)).collect();
    let per: Vec<Result<Vec<TurnInfo>, EvalError>> = split
        .dialogues
        .par_iter()
        .map(|d| {
            let scene = scenes.get(d.video_id.as_str()).ok_or_else(|| EvalError::MissingScene(d.video_id.clone()))?;
            d.turns.iter().map(|t| analyze_turn(scene, d, t, options)).collect()
        })
        .collect();
    let mut turns = Vec::new();
    for p in per {
        turns.extend(p?);
    }
    Ok(Analysis { turns })
}

fn slot_hits(gold: &ObjectSlots, pred: Option<&ObjectSlots>) -> usize {
    let Some(p) = pred else {
        // An untracked object still matches on slots nobody knows yet.
        return [gold.size.is_none(), gold.color.is_none(), gold.material.is_none(), gold.shape.is_none()]
            .iter()
            .filter(|x| **x)
            .count();
    };
    (gold.size == p.size) as usize
        + (gold.color == p.color) as usize
        + (gold.material == p.material) as usize
        + (gold.shape == p.shape) as usize
}

fn span(s: [f64; 2]) -> VideoInterval {
    VideoInterval {
        start: s[0],
        end: s[1],
        kind: IntervalKind::Atomic,
    }
}

/// Scores predictions against a pre-computed analysis.
pub fn score(analysis: &Analysis, predictions: &[Prediction]) -> Result<MetricReport, EvalError> {
    let mut index: HashMap<(&str, usize), &Prediction> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if !is_answer(&p.answer) {
            return Err(EvalError::Schema(format!(
                "{} turn {}: {:?} is not a candidate answer",
                p.dialogue_id, p.turn, p.answer
            )));
        }
        if index.insert((p.dialogue_id.as_str(), p.turn), p).is_some() {
            return Err(EvalError::DuplicatePrediction {
                dialogue_id: p.dialogue_id.clone(),
                turn: p.turn,
            });
        }
    }
    let with_state = predictions.iter().any(|p| p.state.is_some());
    let with_interval = predictions.iter().any(|p| p.interval.is_some() || p.ranking.is_some());

    let mut r = MetricReport::default();
    let mut overall = Acc::default();
    let mut transfer = Acc::default();
    let (mut joint, mut joint_n, mut slot, mut slot_n) = (0usize, 0usize, 0.0f64, 0usize);
    let (mut r1, mut r2, mut iou, mut vit_n) = (0usize, 0usize, 0.0f64, 0usize);
    let mut prev: Option<(&TurnInfo, bool)> = None;

    for g in &analysis.turns {
        let p = index.get(&(g.dialogue_id.as_str(), g.turn)).ok_or_else(|| EvalError::MissingPrediction {
            dialogue_id: g.dialogue_id.clone(),
            turn: g.turn,
        })?;
        let ok = p.answer == g.answer;
        overall.add(ok);
        r.by_question_type.entry(g.question_type.clone()).or_default().add(ok);
        r.by_interval_type.entry(g.interval_type.clone()).or_default().add(ok);
        r.by_contained_count.entry(g.contained.to_string()).or_default().add(ok);
        r.by_interval_length_decile.entry(g.length_decile.clone()).or_default().add(ok);
        r.by_turn_position.entry(format!("{:02}", g.turn)).or_default().add(ok);
        if let Some(k) = &g.tr {
            r.by_tr_type.entry(k.clone()).or_default().add(ok);
        }
        r.tr_unfiltered += g.tr_raw as usize;
        r.or_unfiltered += g.or_raw as usize;
        for d in &g.or_distances {
            r.by_or_distance.entry(d.to_string()).or_default().add(ok);
        }
        if let (Some(kind), Some((pg, pok))) = (g.tt, prev) {
            if pg.dialogue_id == g.dialogue_id && pg.turn + 1 == g.turn && pok {
                transfer.add(ok);
                r.transferability_by_kind.entry(kind.as_str().to_string()).or_default().add(ok);
            }
        }
        prev = Some((g, ok));

        if with_state {
            let mut pred: Vec<ObjectSlots> = p.state.clone().unwrap_or_default();
            let mut gold = g.state.clone();
            pred.sort();
            gold.sort();
            joint_n += 1;
            joint += (pred == gold) as usize;
            if !gold.is_empty() {
                let hits: usize = gold.iter().map(|o| slot_hits(o, pred.iter().find(|x| x.id == o.id))).sum();
                slot += hits as f64 / (4 * gold.len()) as f64;
                slot_n += 1;
            }
        }
        if with_interval {
            if let Some(gi) = g.interval {
                vit_n += 1;
                let ranking: Vec<[f64; 2]> = match (&p.ranking, p.interval) {
                    (Some(rk), _) => rk.clone(),
                    (None, Some(s)) => vec![s],
                    (None, None) => vec![],
                };
                let pos = ranking.iter().position(|s| span(*s).same_span(&gi));
                r1 += matches!(pos, Some(0)) as usize;
                r2 += matches!(pos, Some(0 | 1)) as usize;
                let top = p.interval.or_else(|| ranking.first().copied());
                iou += top.map_or(0.0, |s| span(s).iou(&gi));
            }
        }
    }

    for s in [
        &mut r.by_question_type,
        &mut r.by_interval_type,
        &mut r.by_contained_count,
        &mut r.by_interval_length_decile,
        &mut r.by_tr_type,
        &mut r.by_turn_position,
        &mut r.by_or_distance,
        &mut r.transferability_by_kind,
    ] {
        s.values_mut().for_each(Acc::finish);
    }
    overall.finish();
    transfer.finish();
    r.turns = overall.total;
    r.correct = overall.correct;
    r.overall_accuracy = overall.accuracy;
    r.transferability_pairs = transfer.total;
    r.transferability = (transfer.total > 0).then_some(transfer.accuracy);
    let ratio = |a: f64, n: usize| if n == 0 { 0.0 } else { a / n as f64 };
    if with_state {
        r.dot = Some(DotMetrics {
            joint: ratio(joint as f64, joint_n),
            slot: ratio(slot, slot_n),
            joint_turns: joint_n,
            slot_turns: slot_n,
        });
    }
    if with_interval {
        r.vit = Some(VitMetrics {
            rank1: ratio(r1 as f64, vit_n),
            rank2: ratio(r2 as f64, vit_n),
            miou: ratio(iou, vit_n),
            turns: vit_n,
        });
    }
    Ok(r)
}

pub fn evaluate(predictions: &[Prediction], split: &Split, options: ExecOptions) -> Result<MetricReport, EvalError> {
    score(&analyze(split, options)?, predictions)
}
