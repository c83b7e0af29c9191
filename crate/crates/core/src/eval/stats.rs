//! Corpus statistics: distributions, per-dialogue relation counts and the
//! active-segment-by-turn matrix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dialogue::{replay_turn, Dialogue};
use crate::interval::IntervalKind;
use crate::program::ExecOptions;
use crate::scene::SceneGraph;
use crate::state::mentions;
use crate::vocab::tokenize;

/// Video deciles (columns) by turn position (rows).
pub const SEGMENT_BINS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub compositional_share: f64,
    pub mean_tokens: f64,
    pub mean_program_size: f64,
    pub mean_tr_per_dialogue: f64,
    pub mean_or_per_dialogue: f64,
    pub mean_tt_per_dialogue: f64,
    pub mean_cutoff_updates: f64,
    pub mean_active_objects: f64,
    pub or_distance_mode: Option<usize>,
    pub unique_question_share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub dialogues: usize,
    pub turns: usize,
    pub summary: Summary,
    pub question_types: BTreeMap<String, usize>,
    pub interval_types: BTreeMap<String, usize>,
    pub interval_kinds: BTreeMap<String, usize>,
    pub tt_kinds: BTreeMap<String, usize>,
    pub tr_relations: BTreeMap<String, usize>,
    pub or_distances: BTreeMap<usize, usize>,
    /// Dialogues by number of turns carrying each relation.
    pub tr_per_dialogue: BTreeMap<usize, usize>,
    pub or_per_dialogue: BTreeMap<usize, usize>,
    pub tt_per_dialogue: BTreeMap<usize, usize>,
    pub tokens: BTreeMap<usize, usize>,
    pub program_sizes: BTreeMap<usize, usize>,
    pub mean_tokens_by_type: BTreeMap<String, f64>,
    pub mean_program_size_by_type: BTreeMap<String, f64>,
    /// Turn positions at which the cutoff moved forward.
    pub cutoff_update_turns: BTreeMap<usize, usize>,
    pub cutoff_updates_per_dialogue: BTreeMap<usize, usize>,
    /// Mean number of tracked objects before each turn position.
    pub tracked_objects_by_turn: BTreeMap<usize, f64>,
    pub active_objects_per_dialogue: BTreeMap<usize, usize>,
    /// `segment_by_turn[t][b]`: turns at position t+1 whose interval overlaps video decile b.
    pub segment_by_turn: Vec<Vec<usize>>,
    pub answers_by_template: BTreeMap<String, BTreeMap<String, usize>>,
}

fn bump<K: Ord>(m: &mut BTreeMap<K, usize>, k: K) {
    *m.entry(k).or_default() += 1;
}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Objects mentioned anywhere in the dialogue: everything tracked before the
/// last turn plus what the last turn mentions.
pub fn active_objects(d: &Dialogue, scene: Option<&SceneGraph>, options: ExecOptions) -> usize {
    let Some(last) = d.turns.last() else { return 0 };
    let mut ids: BTreeSet<u32> = last.state.objects.iter().map(|o| o.id).collect();
    if let Some(exec) = scene.and_then(|s| replay_turn(s, last, options).ok()) {
        ids.extend(mentions(&last.program, &exec.values).into_iter().map(|(id, _)| id));
    }
    ids.len()
}

pub fn corpus_statistics(corpus: &Corpus, options: ExecOptions) -> StatsReport {
    let scenes: HashMap<&str, &SceneGraph> =
        corpus.splits.iter().flat_map(|s| &s.scenes).map(|s| (s.video_id.as_str(), s)).collect();
    let mut r = StatsReport {
        segment_by_turn: Vec::new(),
        ..StatsReport::default()
    };
    let (mut tok_sum, mut size_sum, mut comp) = (0usize, 0usize, 0usize);
    let (mut tr_sum, mut or_sum, mut tt_sum, mut upd_sum, mut active_sum) = (0, 0, 0, 0, 0);
    let mut by_type: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    let mut tracked: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut questions: BTreeSet<&str> = BTreeSet::new();

    for d in corpus.dialogues() {
        r.dialogues += 1;
        let scene = scenes.get(d.video_id.as_str()).copied();
        let duration = scene.map_or(d.final_cutoff, |s| s.duration).max(f64::MIN_POSITIVE);
        let (mut tr, mut or, mut tt, mut upd) = (0, 0, 0, 0);
        for (i, t) in d.turns.iter().enumerate() {
            r.turns += 1;
            questions.insert(&t.question);
            let ntok = tokenize(&t.question).len();
            let size = t.program.len();
            tok_sum += ntok;
            size_sum += size;
            bump(&mut r.tokens, ntok);
            bump(&mut r.program_sizes, size);
            let e = by_type.entry(t.question_type.as_str().to_string()).or_default();
            e.0 += 1;
            e.1 += ntok;
            e.2 += size;
            bump(&mut r.question_types, t.question_type.as_str().to_string());
            bump(&mut r.interval_types, t.interval_type.as_str().to_string());
            bump(&mut r.interval_kinds, t.interval.kind.as_str().to_string());
            comp += (t.interval.kind == IntervalKind::Compositional) as usize;
            if let Some(rel) = t.relations.tr {
                tr += 1;
                bump(&mut r.tr_relations, rel.as_str().to_string());
            }
            if !t.relations.or.is_empty() {
                or += 1;
            }
            for o in &t.relations.or {
                bump(&mut r.or_distances, o.distance);
            }
            if let Some(k) = t.relations.tt {
                tt += 1;
                bump(&mut r.tt_kinds, k.as_str().to_string());
            }
            if i > 0 && t.cutoff > d.turns[i - 1].cutoff {
                upd += 1;
                bump(&mut r.cutoff_update_turns, t.turn);
            }
            let e = tracked.entry(t.turn).or_default();
            e.0 += 1;
            e.1 += t.state.objects.len();
            bump(
                r.answers_by_template.entry(t.template.clone()).or_default(),
                t.answer.clone(),
            );
            if t.interval.kind != IntervalKind::None && t.turn >= 1 {
                if r.segment_by_turn.len() < t.turn {
                    r.segment_by_turn.resize(t.turn, vec![0; SEGMENT_BINS]);
                }
                let row = &mut r.segment_by_turn[t.turn - 1];
                for (b, cell) in row.iter_mut().enumerate() {
                    let lo = duration * b as f64 / SEGMENT_BINS as f64;
                    let hi = duration * (b + 1) as f64 / SEGMENT_BINS as f64;
                    if t.interval.start < hi && t.interval.end > lo {
                        *cell += 1;
                    }
                }
            }
        }
        tr_sum += tr;
        or_sum += or;
        tt_sum += tt;
        upd_sum += upd;
        bump(&mut r.tr_per_dialogue, tr);
        bump(&mut r.or_per_dialogue, or);
        bump(&mut r.tt_per_dialogue, tt);
        bump(&mut r.cutoff_updates_per_dialogue, upd);
        let active = active_objects(d, scene, options);
        active_sum += active;
        bump(&mut r.active_objects_per_dialogue, active);
    }

    for (k, (n, tok, size)) in by_type {
        r.mean_tokens_by_type.insert(k.clone(), mean(tok as f64, n));
        r.mean_program_size_by_type.insert(k, mean(size as f64, n));
    }
    r.tracked_objects_by_turn = tracked.into_iter().map(|(t, (n, s))| (t, mean(s as f64, n))).collect();
    let mode = r.or_distances.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(d, _)| *d);
    r.summary = Summary {
        compositional_share: mean(comp as f64, r.turns),
        mean_tokens: mean(tok_sum as f64, r.turns),
        mean_program_size: mean(size_sum as f64, r.turns),
        mean_tr_per_dialogue: mean(tr_sum as f64, r.dialogues),
        mean_or_per_dialogue: mean(or_sum as f64, r.dialogues),
        mean_tt_per_dialogue: mean(tt_sum as f64, r.dialogues),
        mean_cutoff_updates: mean(upd_sum as f64, r.dialogues),
        mean_active_objects: mean(active_sum as f64, r.dialogues),
        or_distance_mode: mode,
        unique_question_share: mean(questions.len() as f64, r.turns),
    };
    r
}

impl StatsReport {
    /// Long-format rows `table,key,value` for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,key,value\n");
        let s = &self.summary;
        for (k, v) in [
            ("dialogues", self.dialogues as f64),
            ("turns", self.turns as f64),
            ("compositional_share", s.compositional_share),
            ("mean_tokens", s.mean_tokens),
            ("mean_program_size", s.mean_program_size),
            ("mean_tr_per_dialogue", s.mean_tr_per_dialogue),
            ("mean_or_per_dialogue", s.mean_or_per_dialogue),
            ("mean_tt_per_dialogue", s.mean_tt_per_dialogue),
            ("mean_cutoff_updates", s.mean_cutoff_updates),
            ("mean_active_objects", s.mean_active_objects),
            ("unique_question_share", s.unique_question_share),
        ] {
            let _ = writeln!(out, "summary,{k},{v}");
        }
        let counts: [(&str, Vec<(String, usize)>); 14] = [
            ("question_type", strs(&self.question_types)),
            ("interval_type", strs(&self.interval_types)),
            ("interval_kind", strs(&self.interval_kinds)),
            ("tt_kind", strs(&self.tt_kinds)),
            ("tr_relation", strs(&self.tr_relations)),
            ("or_distance", nums(&self.or_distances)),
            ("tr_per_dialogue", nums(&self.tr_per_dialogue)),
            ("or_per_dialogue", nums(&self.or_per_dialogue)),
            ("tt_per_dialogue", nums(&self.tt_per_dialogue)),
            ("tokens", nums(&self.tokens)),
            ("program_size", nums(&self.program_sizes)),
            ("cutoff_update_turn", nums(&self.cutoff_update_turns)),
            ("cutoff_updates_per_dialogue", nums(&self.cutoff_updates_per_dialogue)),
            ("active_objects_per_dialogue", nums(&self.active_objects_per_dialogue)),
        ];
        for (table, rows) in counts {
            for (k, v) in rows {
                let _ = writeln!(out, "{table},{k},{v}");
            }
        }
        for (k, v) in &self.mean_tokens_by_type {
            let _ = writeln!(out, "mean_tokens_by_type,{k},{v}");
        }
        for (k, v) in &self.mean_program_size_by_type {
            let _ = writeln!(out, "mean_program_size_by_type,{k},{v}");
        }
        for (k, v) in &self.tracked_objects_by_turn {
            let _ = writeln!(out, "tracked_objects_by_turn,{k},{v}");
        }
        for (t, row) in self.segment_by_turn.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let _ = writeln!(out, "segment_by_turn,{}:{b},{v}", t + 1);
            }
        }
        out
    }
}

fn strs(m: &BTreeMap<String, usize>) -> Vec<(String, usize)> {
    m.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

fn nums(m: &BTreeMap<usize, usize>) -> Vec<(String, usize)> {
    m.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
