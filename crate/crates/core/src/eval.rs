//! Hits@1 and answer recall.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::QaExample;
use crate::error::Result;
use crate::linking::analyze_question;
use crate::nn::argmax;
use crate::pipeline::{answer_question, AnswerMode, QaSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question: String,
    pub gold: Vec<String>,
    pub predicted: Vec<String>,
    pub hit: bool,
    /// `|predicted ∩ gold| / |gold|`.
    pub recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub hits_at_1: f64,
    /// Mean recall over hit questions.
    pub recall: f64,
    /// Mean recall over every question, misses counting zero.
    pub recall_all: f64,
    pub n_questions: usize,
    pub n_hits: usize,
    pub n_errors: usize,
}

/// Whether the prediction hits, and its recall of the gold set.
pub fn score_prediction(predicted: &BTreeSet<String>, gold: &BTreeSet<String>) -> (bool, f64) {
    let overlap = predicted.intersection(gold).count();
    let recall = if gold.is_empty() {
        0.0
    } else {
        overlap as f64 / gold.len() as f64
    };
    (overlap > 0, recall)
}

/// Aggregates per-question records. Depends only on the records, so a report
/// can be re-scored from its own records.
pub fn compute_metrics(records: &[QuestionRecord]) -> Metrics {
    let n = records.len();
    let hits: Vec<&QuestionRecord> = records.iter().filter(|r| r.hit).collect();
    let mean = |xs: &mut dyn Iterator<Item = f64>, d: usize| {
        if d == 0 {
            0.0
        } else {
            xs.sum::<f64>() / d as f64
        }
    };
    Metrics {
        hits_at_1: if n == 0 { 0.0 } else { hits.len() as f64 / n as f64 },
        recall: mean(&mut hits.iter().map(|r| r.recall), hits.len()),
        recall_all: mean(&mut records.iter().map(|r| r.recall), n),
        n_questions: n,
        n_hits: hits.len(),
        n_errors: records.iter().filter(|r| r.error.is_some()).count(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: Metrics,
    /// Share of labelled questions whose most probable relation is the gold one.
    pub relation_accuracy: Option<f64>,
    pub records: Vec<QuestionRecord>,
}

fn canonical(system: &QaSystem, name: &str) -> String {
    system
        .kg
        .resolve_entity(name)
        .map(|id| system.kg.entity_name(id).to_string())
        .unwrap_or_else(|_| name.to_string())
}

/// Answers every question; pipeline failures count as misses.
pub fn evaluate(
    system: &QaSystem,
    data: &[QaExample],
    mode: AnswerMode,
    multi_answer_only: bool,
) -> Result<Evaluation> {
    let mut records = Vec::new();
    let mut labelled = 0usize;
    let mut correct = 0usize;
    for ex in data.iter().filter(|e| !multi_answer_only || e.is_multi_answer()) {
        let gold: BTreeSet<String> = ex.answers.iter().map(|a| canonical(system, a)).collect();
        let record = match answer_question(system, &ex.question, mode) {
            Ok(answer) => {
                let predicted: BTreeSet<String> = answer.names.iter().cloned().collect();
                let (hit, recall) = score_prediction(&predicted, &gold);
                QuestionRecord {
                    question: ex.question.clone(),
                    gold: gold.into_iter().collect(),
                    predicted: predicted.into_iter().collect(),
                    hit,
                    recall,
                    error: None,
                }
            }
            Err(e) => QuestionRecord {
                question: ex.question.clone(),
                gold: gold.into_iter().collect(),
                predicted: Vec::new(),
                hit: false,
                recall: 0.0,
                error: Some(e.to_string()),
            },
        };
        records.push(record);

        if let Some(r) = system.kg.relation_id(&ex.relation) {
            labelled += 1;
            if let Ok(linked) = analyze_question(&ex.question, &system.kg) {
                if argmax(&system.rcnn.predict(&linked.masked)?) == r.0 {
                    correct += 1;
                }
            }
        }
    }
    Ok(Evaluation {
        metrics: compute_metrics(&records),
        relation_accuracy: (labelled > 0).then(|| correct as f64 / labelled as f64),
        records,
    })
}
