//! Question encoding and supernode selection.
//!
//! The question's masked tokens run through an LSTM; its final hidden state
//! is projected to the embedding dimension and dotted with every row of the
//! propagated supernode matrix `H`. A softmax over those scores picks the
//! answer.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::WordVectorTable;
use crate::error::{Error, Result};
use crate::kg::{EntityId, RelationId};
use crate::nn::matrix::dot;
use crate::nn::optim::init_bound;
use crate::nn::{
    argmax, lstm_backward, lstm_forward, softmax, LstmParams, Matrix, Parameters, SgdConfig,
};
use crate::summary::SummaryGraph;
use crate::training::{fit, TrainingLog};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    pub hidden_dim: usize,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self { hidden_dim: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorParams {
    pub lstm: LstmParams,
    /// `d × hidden`, no bias.
    pub projection: Matrix,
}

impl Parameters for SelectorParams {
    fn tensors(&self) -> Vec<&Matrix> {
        let mut t = self.lstm.tensors();
        t.push(&self.projection);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut t = self.lstm.tensors_mut();
        t.push(&mut self.projection);
        t
    }
}

impl SelectorParams {
    pub fn zeros(dim: usize, hidden_dim: usize) -> Self {
        Self {
            lstm: LstmParams::zeros(dim, hidden_dim),
            projection: Matrix::zeros(dim, hidden_dim),
        }
    }

    pub fn init(dim: usize, config: SelectorConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden_dim;
        Self {
            lstm: LstmParams::init(dim, h, &mut rng),
            projection: Matrix::uniform(dim, h, init_bound(h), &mut rng),
        }
    }

    /// Dimension of the question vector (and of the supernode embeddings).
    pub fn output_dim(&self) -> usize {
        self.projection.rows
    }
}

fn project(params: &SelectorParams, hidden: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; params.projection.rows];
    params.projection.matvec(hidden, &mut q);
    q
}

/// Question vector from pre-looked-up token vectors.
pub fn encode_inputs(params: &SelectorParams, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let cache = lstm_forward(&params.lstm, inputs)?;
    Ok(project(params, &cache.final_hidden))
}

/// Question vector for entity-masked tokens, looked up in the frozen table.
pub fn encode_question(
    params: &SelectorParams,
    tokens: &[String],
    table: &WordVectorTable,
) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Input("empty question".into()));
    }
    encode_inputs(params, &table.sequence(tokens))
}

/// `H · q`.
pub fn scores(h: &Matrix, q: &[f64]) -> Result<Vec<f64>> {
    if h.cols != q.len() {
        return Err(Error::Shape(format!(
            "question vector has {} values, supernode embeddings have {}",
            q.len(),
            h.cols
        )));
    }
    Ok((0..h.rows).map(|i| dot(h.row(i), q)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnswerPrediction {
    pub supernode: usize,
    pub probability: f64,
    pub members: Vec<EntityId>,
    /// Distribution over all supernodes, by id.
    pub probabilities: Vec<f64>,
}

/// Softmax over `H · q`; the most probable supernode wins, the smaller id on ties.
pub fn select_answer(summary: &SummaryGraph, h: &Matrix, q: &[f64]) -> Result<AnswerPrediction> {
    if summary.is_empty() {
        return Err(Error::EmptySummary);
    }
    if h.rows != summary.len() {
        return Err(Error::Shape(format!(
            "{} embedding rows for {} supernodes",
            h.rows,
            summary.len()
        )));
    }
    let raw = scores(h, q)?;
    // ranking on raw scores so that ties are exact rather than rounded
    let best = argmax(&raw);
    let probabilities = softmax(&raw);
    Ok(AnswerPrediction {
        supernode: best,
        probability: probabilities[best],
        members: summary.supernodes[best].members.clone(),
        probabilities,
    })
}

/// The supernode grouped under `relation` and anchored to every question
/// entity.
pub fn gold_supernode(
    summary: &SummaryGraph,
    relation: RelationId,
    question_entities: &[EntityId],
) -> Option<usize> {
    let mut anchors = question_entities.to_vec();
    anchors.sort_unstable();
    anchors.dedup();
    summary
        .supernodes
        .iter()
        .find(|s| s.relation == relation && s.anchors == anchors)
        .map(|s| s.id)
}

#[derive(Clone, Debug)]
pub struct TrainingExample {
    /// Entity-masked question tokens.
    pub tokens: Vec<String>,
    pub summary: SummaryGraph,
    /// Propagated supernode embeddings. Fixed once the classifier is frozen.
    pub embeddings: Matrix,
    pub gold: Option<usize>,
    pub answers: BTreeSet<EntityId>,
}

/// Cross-entropy of the gold supernode.
pub fn selection_loss(
    params: &SelectorParams,
    inputs: &[Vec<f64>],
    h: &Matrix,
    gold: usize,
) -> Result<f64> {
    let q = encode_inputs(params, inputs)?;
    let s = scores(h, &q)?;
    Ok(crate::nn::cross_entropy(&s, gold))
}

/// Loss and full gradient for one example.
pub fn selection_loss_and_grad(
    params: &SelectorParams,
    inputs: &[Vec<f64>],
    h: &Matrix,
    gold: usize,
) -> Result<(f64, SelectorParams)> {
    let cache = lstm_forward(&params.lstm, inputs)?;
    let q = project(params, &cache.final_hidden);
    let mut dq = vec![0.0; q.len()];
    let loss = accumulate_dq(h, &q, gold, 1.0, &mut dq)?;
    let mut grads = params.zeros_like();
    backprop_question(params, &cache, &dq, &mut grads);
    Ok((loss, grads))
}

/// Adds `scale · ∂CE/∂q` into `dq` and returns the unscaled loss.
fn accumulate_dq(h: &Matrix, q: &[f64], gold: usize, scale: f64, dq: &mut [f64]) -> Result<f64> {
    if gold >= h.rows {
        return Err(Error::Data(format!("gold supernode {gold} of {}", h.rows)));
    }
    let s = scores(h, q)?;
    let loss = crate::nn::cross_entropy(&s, gold);
    let mut ds = softmax(&s);
    ds[gold] -= 1.0;
    ds.iter_mut().for_each(|v| *v *= scale);
    h.t_matvec_add(&ds, dq);
    Ok(loss)
}

fn backprop_question(
    params: &SelectorParams,
    cache: &crate::nn::LstmCache,
    dq: &[f64],
    grads: &mut SelectorParams,
) {
    grads.projection.add_outer(dq, &cache.final_hidden);
    let mut dh = vec![0.0; params.lstm.hidden_dim];
    params.projection.t_matvec_add(dq, &mut dh);
    lstm_backward(&params.lstm, cache, &dh, &mut grads.lstm, false);
}

/// Questions that share a masked token sequence share one LSTM pass.
struct Encoded<'a> {
    sequences: Vec<Vec<Vec<f64>>>,
    seq_of: Vec<usize>,
    examples: Vec<&'a TrainingExample>,
}

fn encode_examples<'a>(examples: &[&'a TrainingExample], table: &WordVectorTable) -> Result<Encoded<'a>> {
    let mut index: HashMap<&[String], usize> = HashMap::new();
    let mut sequences = Vec::new();
    let mut seq_of = Vec::with_capacity(examples.len());
    for ex in examples {
        if ex.tokens.is_empty() {
            return Err(Error::Data("empty question in selector data".into()));
        }
        let next = sequences.len();
        let id = *index.entry(ex.tokens.as_slice()).or_insert(next);
        if id == next {
            sequences.push(table.sequence(&ex.tokens));
        }
        seq_of.push(id);
    }
    Ok(Encoded {
        sequences,
        seq_of,
        examples: examples.to_vec(),
    })
}

/// `(hits@1, mean gold cross-entropy)` over examples.
fn score_examples(params: &SelectorParams, data: &Encoded<'_>) -> (f64, f64) {
    if data.examples.is_empty() {
        return (0.0, 0.0);
    }
    let qs: Vec<Vec<f64>> = data
        .sequences
        .iter()
        .map(|s| encode_inputs(params, s).expect("validated input"))
        .collect();
    let mut hits = 0usize;
    let mut loss = 0.0;
    let mut with_gold = 0usize;
    for (ex, &seq) in data.examples.iter().zip(&data.seq_of) {
        let s = scores(&ex.embeddings, &qs[seq]).expect("validated shapes");
        let best = argmax(&s);
        if ex.summary.supernodes[best]
            .members
            .iter()
            .any(|m| ex.answers.contains(m))
        {
            hits += 1;
        }
        if let Some(g) = ex.gold {
            loss += crate::nn::cross_entropy(&s, g);
            with_gold += 1;
        }
    }
    (
        hits as f64 / data.examples.len() as f64,
        loss / with_gold.max(1) as f64,
    )
}

#[derive(Clone, Debug)]
pub struct SelectorTraining {
    pub params: SelectorParams,
    pub log: TrainingLog,
    /// Training examples dropped because no supernode matched the gold relation.
    pub skipped: usize,
}

/// Hits@1 and mean loss of trained parameters on a dataset.
pub fn evaluate_selector(
    params: &SelectorParams,
    data: &[TrainingExample],
    table: &WordVectorTable,
) -> Result<(f64, f64)> {
    let refs: Vec<&TrainingExample> = data.iter().collect();
    let enc = encode_examples(&refs, table)?;
    check_shapes(&enc, params.output_dim())?;
    Ok(score_examples(params, &enc))
}

fn check_shapes(data: &Encoded<'_>, dim: usize) -> Result<()> {
    for ex in &data.examples {
        if ex.embeddings.cols != dim || ex.embeddings.rows != ex.summary.len() || ex.summary.is_empty() {
            return Err(Error::Shape(format!(
                "example embeddings are {}×{}, expected {}×{dim}",
                ex.embeddings.rows,
                ex.embeddings.cols,
                ex.summary.len()
            )));
        }
    }
    Ok(())
}

/// Trains the encoder and projection on gold supernodes with the embeddings
/// held fixed. Examples without a gold supernode are skipped and counted.
pub fn train_selector(
    train: &[TrainingExample],
    dev: &[TrainingExample],
    table: &WordVectorTable,
    config: SelectorConfig,
    sgd: &SgdConfig,
) -> Result<SelectorTraining> {
    let usable: Vec<&TrainingExample> = train.iter().filter(|e| e.gold.is_some()).collect();
    let skipped = train.len() - usable.len();
    if skipped > 0 {
        log::warn!("{skipped} training questions have no gold supernode and were skipped");
    }
    if usable.is_empty() {
        return Err(Error::Data("no selector training example has a gold supernode".into()));
    }
    let dim = table.dim();
    let train_enc = encode_examples(&usable, table)?;
    check_shapes(&train_enc, dim)?;
    let dev_refs: Vec<&TrainingExample> = dev.iter().collect();
    let dev_enc = encode_examples(&dev_refs, table)?;
    check_shapes(&dev_enc, dim)?;

    let mut params = SelectorParams::init(dim, config, sgd.seed);
    let batch_grad = |p: &SelectorParams, batch: &[usize], g: &mut SelectorParams| -> Result<f64> {
        let scale = 1.0 / batch.len() as f64;
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for &i in batch {
            let seq = train_enc.seq_of[i];
            match groups.iter_mut().find(|(s, _)| *s == seq) {
                Some((_, members)) => members.push(i),
                None => groups.push((seq, vec![i])),
            }
        }
        let mut loss = 0.0;
        for (seq, members) in groups {
            let cache = lstm_forward(&p.lstm, &train_enc.sequences[seq])?;
            let q = project(p, &cache.final_hidden);
            let mut dq = vec![0.0; q.len()];
            for i in members {
                let ex = train_enc.examples[i];
                let gold = ex.gold.expect("filtered");
                loss += accumulate_dq(&ex.embeddings, &q, gold, scale, &mut dq)?;
            }
            backprop_question(p, &cache, &dq, g);
        }
        Ok(loss)
    };
    let validate =
        (!dev_enc.examples.is_empty()).then_some(|p: &SelectorParams| score_examples(p, &dev_enc));
    let log = fit(&mut params, usable.len(), sgd, batch_grad, validate)?;
    Ok(SelectorTraining {
        params,
        log,
        skipped,
    })
}
