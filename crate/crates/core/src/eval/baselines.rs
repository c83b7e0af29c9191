//! Non-neural baselines fit on the training split.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{EvalError, Prediction};
use crate::corpus::derive_seed;
use crate::dialogue::Dialogue;
use crate::template::QuestionType;
use crate::vocab::{answer_index, tokenize};

/// Most frequent answer; ties go to the earlier vocabulary entry.
fn most_frequent<'a>(counts: &BTreeMap<&'a str, usize>) -> Option<&'a str> {
    counts
        .iter()
        .max_by(|a, b| {
            a.1.cmp(b.1)
                .then_with(|| answer_index(b.0).unwrap_or(usize::MAX).cmp(&answer_index(a.0).unwrap_or(usize::MAX)))
        })
        .map(|(a, _)| *a)
}

fn predictions<F>(dialogues: &[Dialogue], mut f: F) -> Vec<Prediction>
where
    F: FnMut(&Dialogue, usize) -> String,
{
    let mut out = Vec::new();
    for d in dialogues {
        for (i, t) in d.turns.iter().enumerate() {
            out.push(Prediction::answer_only(&d.dialogue_id, t.turn, f(d, i)));
        }
    }
    out
}

/// The single most popular training answer.
pub fn answer_prior(train: &[Dialogue], test: &[Dialogue]) -> Result<Vec<Prediction>, EvalError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in train.iter().flat_map(|d| &d.turns) {
        *counts.entry(t.answer.as_str()).or_default() += 1;
    }
    let best = most_frequent(&counts).ok_or(EvalError::EmptyTrain)?.to_string();
    Ok(predictions(test, |_, _| best.clone()))
}

fn answers_by_type(train: &[Dialogue]) -> BTreeMap<QuestionType, BTreeMap<&str, usize>> {
    let mut by: BTreeMap<QuestionType, BTreeMap<&str, usize>> = BTreeMap::new();
    for t in train.iter().flat_map(|d| &d.turns) {
        *by.entry(t.question_type).or_default().entry(t.answer.as_str()).or_default() += 1;
    }
    by
}

/// Uniform over the answers seen for the gold question type in training.
pub fn qtype_random(train: &[Dialogue], test: &[Dialogue], seed: u64) -> Result<Vec<Prediction>, EvalError> {
    let by = answers_by_type(train);
    if by.is_empty() {
        return Err(EvalError::EmptyTrain);
    }
    Ok(predictions(test, |d, i| {
        let t = &d.turns[i];
        let id_hash = d.dialogue_id.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, id_hash, t.turn as u64]));
        let options: Vec<&str> = by.get(&t.question_type).map(|m| m.keys().copied().collect()).unwrap_or_default();
        options.choose(&mut rng).map(|a| a.to_string()).unwrap_or_else(|| "True".into())
    }))
}

/// The most popular training answer of the gold question type.
pub fn qtype_freq(train: &[Dialogue], test: &[Dialogue]) -> Result<Vec<Prediction>, EvalError> {
    let by = answers_by_type(train);
    if by.is_empty() {
        return Err(EvalError::EmptyTrain);
    }
    let best: BTreeMap<QuestionType, String> = by
        .iter()
        .filter_map(|(k, m)| most_frequent(m).map(|a| (*k, a.to_string())))
        .collect();
    let global = {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in train.iter().flat_map(|d| &d.turns) {
            *counts.entry(t.answer.as_str()).or_default() += 1;
        }
        most_frequent(&counts).unwrap_or("True").to_string()
    };
    Ok(predictions(test, |d, i| {
        best.get(&d.turns[i].question_type).cloned().unwrap_or_else(|| global.clone())
    }))
}

/// TF-IDF question retrieval: the answer of the most similar training question.
pub struct TfIdf {
    idf: Vec<f64>,
    /// Per distinct training question (first occurrence): normalized sparse vector and answer.
    docs: Vec<(Vec<(usize, f64)>, String)>,
    vocab: HashMap<String, usize>,
    postings: Vec<Vec<(usize, f64)>>,
}

impl TfIdf {
    pub fn fit(train: &[Dialogue]) -> Result<Self, EvalError> {
        let questions: Vec<(&str, &str)> = train
            .iter()
            .flat_map(|d| &d.turns)
            .map(|t| (t.question.as_str(), t.answer.as_str()))
            .collect();
        if questions.is_empty() {
            return Err(EvalError::EmptyTrain);
        }
        let n = questions.len() as f64;
        let mut df: HashMap<&str, usize> = HashMap::new();
        for (q, _) in &questions {
            let mut toks = tokenize(q);
            toks.sort_unstable();
            toks.dedup();
            for tok in toks {
                *df.entry(tok).or_default() += 1;
            }
        }
        let mut terms: Vec<(&str, usize)> = df.into_iter().collect();
        terms.sort_unstable();
        let idf: Vec<f64> = terms.iter().map(|(_, c)| (n / *c as f64).ln()).collect();
        let vocab: HashMap<String, usize> = terms.iter().enumerate().map(|(i, (t, _))| (t.to_string(), i)).collect();
        let mut model = TfIdf {
            postings: vec![Vec::new(); vocab.len()],
            idf,
            docs: Vec::new(),
            vocab,
        };
        let mut seen: HashSet<&str> = HashSet::new();
        for (q, a) in questions {
            if !seen.insert(q) {
                continue;
            }
            let v = model.vectorize(q);
            let doc = model.docs.len();
            for &(term, w) in &v {
                model.postings[term].push((doc, w));
            }
            model.docs.push((v, a.to_string()));
        }
        Ok(model)
    }

    /// L2-normalized tf-idf vector over known terms with positive weight.
    fn vectorize(&self, q: &str) -> Vec<(usize, f64)> {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in tokenize(q) {
            if let Some(&i) = self.vocab.get(tok) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let mut v: Vec<(usize, f64)> = tf
            .into_iter()
            .map(|(i, c)| (i, c * self.idf[i]))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                x.1 /= norm;
            }
        }
        v
    }

    /// Answer of the most similar training question; ties go to the earliest one.
    pub fn predict(&self, q: &str) -> &str {
        let v = self.vectorize(q);
        let mut scores: HashMap<usize, f64> = HashMap::new();
        for (term, w) in v {
            for &(doc, dw) in &self.postings[term] {
                *scores.entry(doc).or_default() += w * dw;
            }
        }
        let best = scores
            .into_iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(doc, _)| doc)
            .unwrap_or(0);
        &self.docs[best].1
    }
}

pub fn tfidf(train: &[Dialogue], test: &[Dialogue]) -> Result<Vec<Prediction>, EvalError> {
    let model = TfIdf::fit(train)?;
    let out: Vec<Vec<Prediction>> = test
        .par_iter()
        .map(|d| {
            d.turns
                .iter()
                .map(|t| Prediction::answer_only(&d.dialogue_id, t.turn, model.predict(&t.question).to_string()))
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}
