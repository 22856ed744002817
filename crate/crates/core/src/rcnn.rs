//! Recurrent-convolutional relation classifier.
//!
//! Each token gets a left context (a tanh recurrence over the tokens before
//! it) and a right context (the mirror image). The concatenation
//! `[left; embedding; right]` is projected through tanh, max-pooled over
//! positions and fed to a softmax over relations. The resulting relation
//! probabilities weight the propagation step.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::WordVectorTable;
use crate::error::{Error, Result};
use crate::kg::RelationId;
use crate::nn::matrix::axpy;
use crate::nn::optim::init_bound;
use crate::nn::{argmax, cross_entropy, softmax, Matrix, Parameters, SgdConfig};
use crate::text::ENTITY_PLACEHOLDER;
use crate::training::{fit, TrainingLog};

pub const UNKNOWN_TOKEN: &str = "<UNK>";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Relation weights are the classifier's probabilities.
    #[default]
    Rcnn,
    /// Every relation weighs 1 (classifier ablated).
    Uniform,
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightMode::Rcnn => f.write_str("rcnn"),
            WeightMode::Uniform => f.write_str("uniform"),
        }
    }
}

/// Per-relation propagation weights, indexed by relation id.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationWeights(Vec<f64>);

impl RelationWeights {
    pub fn uniform(n_relations: usize) -> Self {
        Self(vec![1.0; n_relations])
    }

    pub fn from_probabilities(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn get(&self, r: RelationId) -> Option<f64> {
        self.0.get(r.0).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn relation_weights(probs: &[f64], mode: WeightMode) -> RelationWeights {
    match mode {
        WeightMode::Rcnn => RelationWeights::from_probabilities(probs.to_vec()),
        WeightMode::Uniform => RelationWeights::uniform(probs.len()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self { tokens, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    /// `<UNK>` and `<ENT>` first, then tokens in first-seen order.
    pub fn build<'a>(sentences: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut tokens = vec![UNKNOWN_TOKEN.to_string(), ENTITY_PLACEHOLDER.to_string()];
        let mut seen: std::collections::HashSet<String> = tokens.iter().cloned().collect();
        for s in sentences {
            for t in s {
                if seen.insert(t.clone()) {
                    tokens.push(t.clone());
                }
            }
        }
        tokens.into()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcnnConfig {
    pub context_dim: usize,
    pub hidden_dim: usize,
}

impl Default for RcnnConfig {
    fn default() -> Self {
        Self {
            context_dim: 50,
            hidden_dim: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcnnParams {
    /// `V × d`, fine-tuned.
    pub embedding: Matrix,
    pub w_left: Matrix,
    pub w_left_input: Matrix,
    pub w_right: Matrix,
    pub w_right_input: Matrix,
    /// `H × (2c + d)` over `[left; embedding; right]`.
    pub w_proj: Matrix,
    pub b_proj: Matrix,
    /// `|R| × H`
    pub w_out: Matrix,
    pub b_out: Matrix,
}

impl Parameters for RcnnParams {
    fn tensors(&self) -> Vec<&Matrix> {
        vec![
            &self.embedding,
            &self.w_left,
            &self.w_left_input,
            &self.w_right,
            &self.w_right_input,
            &self.w_proj,
            &self.b_proj,
            &self.w_out,
            &self.b_out,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![
            &mut self.embedding,
            &mut self.w_left,
            &mut self.w_left_input,
            &mut self.w_right,
            &mut self.w_right_input,
            &mut self.w_proj,
            &mut self.b_proj,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }
}

impl RcnnParams {
    pub fn zeros(vocab: usize, dim: usize, config: RcnnConfig, n_relations: usize) -> Self {
        let c = config.context_dim;
        let h = config.hidden_dim;
        Self {
            embedding: Matrix::zeros(vocab, dim),
            w_left: Matrix::zeros(c, c),
            w_left_input: Matrix::zeros(c, dim),
            w_right: Matrix::zeros(c, c),
            w_right_input: Matrix::zeros(c, dim),
            w_proj: Matrix::zeros(h, 2 * c + dim),
            b_proj: Matrix::zeros(h, 1),
            w_out: Matrix::zeros(n_relations, h),
            b_out: Matrix::zeros(n_relations, 1),
        }
    }

    /// Embedding rows copied from the word-vector table, everything else
    /// uniform in `±1/√fan_in`.
    pub fn init(
        vocab: &Vocabulary,
        table: &WordVectorTable,
        config: RcnnConfig,
        n_relations: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = table.dim();
        let c = config.context_dim;
        let h = config.hidden_dim;
        let mut embedding = Matrix::zeros(vocab.len(), d);
        for i in 0..vocab.len() {
            embedding
                .row_mut(i)
                .copy_from_slice(&table.vector(vocab.token(i)));
        }
        Self {
            embedding,
            w_left: Matrix::uniform(c, c, init_bound(c + d), &mut rng),
            w_left_input: Matrix::uniform(c, d, init_bound(c + d), &mut rng),
            w_right: Matrix::uniform(c, c, init_bound(c + d), &mut rng),
            w_right_input: Matrix::uniform(c, d, init_bound(c + d), &mut rng),
            w_proj: Matrix::uniform(h, 2 * c + d, init_bound(2 * c + d), &mut rng),
            b_proj: Matrix::uniform(h, 1, init_bound(2 * c + d), &mut rng),
            w_out: Matrix::uniform(n_relations, h, init_bound(h), &mut rng),
            b_out: Matrix::uniform(n_relations, 1, init_bound(h), &mut rng),
        }
    }

    pub fn n_relations(&self) -> usize {
        self.w_out.rows
    }

    fn context_dim(&self) -> usize {
        self.w_left.rows
    }

    fn dim(&self) -> usize {
        self.embedding.cols
    }
}

#[derive(Clone, Debug)]
pub struct RcnnCache {
    ids: Vec<usize>,
    features: Vec<Vec<f64>>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
    pool_arg: Vec<usize>,
    pooled: Vec<f64>,
    pub probs: Vec<f64>,
}

fn tanh_recurrence(w: &Matrix, w_in: &Matrix, prev: &[f64], input: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; w.rows];
    w.matvec_add(prev, &mut a);
    w_in.matvec_add(input, &mut a);
    a.iter_mut().for_each(|v| *v = v.tanh());
    a
}

pub fn rcnn_forward(params: &RcnnParams, ids: &[usize]) -> Result<RcnnCache> {
    if ids.is_empty() {
        return Err(Error::Input("empty question".into()));
    }
    if let Some(&bad) = ids.iter().find(|&&i| i >= params.embedding.rows) {
        return Err(Error::Shape(format!("token id {bad} outside vocabulary")));
    }
    let n = ids.len();
    let c = params.context_dim();
    let d = params.dim();
    let emb = |i: usize| params.embedding.row(ids[i]);

    let mut left = vec![vec![0.0; c]; n];
    for i in 1..n {
        left[i] = tanh_recurrence(&params.w_left, &params.w_left_input, &left[i - 1], emb(i - 1));
    }
    let mut right = vec![vec![0.0; c]; n];
    for i in (0..n - 1).rev() {
        right[i] = tanh_recurrence(&params.w_right, &params.w_right_input, &right[i + 1], emb(i + 1));
    }

    let h = params.w_proj.rows;
    let mut features = Vec::with_capacity(n);
    let mut hidden = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = Vec::with_capacity(2 * c + d);
        x.extend_from_slice(&left[i]);
        x.extend_from_slice(emb(i));
        x.extend_from_slice(&right[i]);
        let mut y = params.b_proj.data.clone();
        params.w_proj.matvec_add(&x, &mut y);
        y.iter_mut().for_each(|v| *v = v.tanh());
        features.push(x);
        hidden.push(y);
    }

    let mut pool_arg = vec![0usize; h];
    let mut pooled = hidden[0].clone();
    for (i, y) in hidden.iter().enumerate().skip(1) {
        for k in 0..h {
            if y[k] > pooled[k] {
                pooled[k] = y[k];
                pool_arg[k] = i;
            }
        }
    }
    let mut logits = params.b_out.data.clone();
    params.w_out.matvec_add(&pooled, &mut logits);
    let probs = softmax(&logits);
    Ok(RcnnCache {
        ids: ids.to_vec(),
        features,
        left,
        right,
        hidden,
        pool_arg,
        pooled,
        probs,
    })
}

/// Cross-entropy loss of one example.
pub fn rcnn_loss(params: &RcnnParams, ids: &[usize], target: usize) -> Result<f64> {
    let cache = rcnn_forward(params, ids)?;
    let mut logits = params.b_out.data.clone();
    params.w_out.matvec_add(&cache.pooled, &mut logits);
    Ok(cross_entropy(&logits, target))
}

/// Accumulates `scale · ∂CE/∂θ` for one example into `grads`.
pub fn rcnn_backward(
    params: &RcnnParams,
    cache: &RcnnCache,
    target: usize,
    scale: f64,
    grads: &mut RcnnParams,
) {
    let n = cache.ids.len();
    let c = params.context_dim();
    let d = params.dim();
    let h = params.w_proj.rows;

    let mut d_logits = cache.probs.clone();
    d_logits[target] -= 1.0;
    d_logits.iter_mut().for_each(|v| *v *= scale);
    grads.w_out.add_outer(&d_logits, &cache.pooled);
    axpy(1.0, &d_logits, &mut grads.b_out.data);
    let mut d_pooled = vec![0.0; h];
    params.w_out.t_matvec_add(&d_logits, &mut d_pooled);

    let mut d_hidden = vec![vec![0.0; h]; n];
    for k in 0..h {
        d_hidden[cache.pool_arg[k]][k] += d_pooled[k];
    }

    let mut d_left = vec![vec![0.0; c]; n];
    let mut d_right = vec![vec![0.0; c]; n];
    let mut d_emb = vec![vec![0.0; d]; n];
    let mut dx = vec![0.0; 2 * c + d];
    for i in 0..n {
        let y = &cache.hidden[i];
        let dz: Vec<f64> = d_hidden[i]
            .iter()
            .zip(y)
            .map(|(g, y)| g * (1.0 - y * y))
            .collect();
        if dz.iter().all(|&v| v == 0.0) {
            continue;
        }
        grads.w_proj.add_outer(&dz, &cache.features[i]);
        axpy(1.0, &dz, &mut grads.b_proj.data);
        dx.iter_mut().for_each(|v| *v = 0.0);
        params.w_proj.t_matvec_add(&dz, &mut dx);
        axpy(1.0, &dx[..c], &mut d_left[i]);
        axpy(1.0, &dx[c..c + d], &mut d_emb[i]);
        axpy(1.0, &dx[c + d..], &mut d_right[i]);
    }

    let emb = |i: usize| params.embedding.row(cache.ids[i]);
    for i in (1..n).rev() {
        let da: Vec<f64> = d_left[i]
            .iter()
            .zip(&cache.left[i])
            .map(|(g, a)| g * (1.0 - a * a))
            .collect();
        grads.w_left.add_outer(&da, &cache.left[i - 1]);
        grads.w_left_input.add_outer(&da, emb(i - 1));
        let (before, _) = d_left.split_at_mut(i);
        params.w_left.t_matvec_add(&da, &mut before[i - 1]);
        params.w_left_input.t_matvec_add(&da, &mut d_emb[i - 1]);
    }
    for i in 0..n.saturating_sub(1) {
        let da: Vec<f64> = d_right[i]
            .iter()
            .zip(&cache.right[i])
            .map(|(g, a)| g * (1.0 - a * a))
            .collect();
        grads.w_right.add_outer(&da, &cache.right[i + 1]);
        grads.w_right_input.add_outer(&da, emb(i + 1));
        let (_, after) = d_right.split_at_mut(i + 1);
        params.w_right.t_matvec_add(&da, &mut after[0]);
        params.w_right_input.t_matvec_add(&da, &mut d_emb[i + 1]);
    }
    for (i, de) in d_emb.iter().enumerate() {
        axpy(1.0, de, grads.embedding.row_mut(cache.ids[i]));
    }
}

/// A trained classifier: vocabulary plus parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcnnModel {
    pub vocab: Vocabulary,
    pub params: RcnnParams,
}

impl RcnnModel {
    /// Relation distribution for an entity-masked question.
    pub fn predict(&self, masked: &[String]) -> Result<Vec<f64>> {
        Ok(rcnn_forward(&self.params, &self.vocab.encode(masked))?.probs)
    }
}

#[derive(Clone, Debug)]
pub struct RelationExample {
    /// Entity-masked question tokens.
    pub tokens: Vec<String>,
    pub relation: RelationId,
}

fn encode_all(vocab: &Vocabulary, data: &[RelationExample], n_relations: usize) -> Result<Vec<(Vec<usize>, usize)>> {
    data.iter()
        .map(|ex| {
            if ex.relation.0 >= n_relations {
                return Err(Error::Data(format!(
                    "relation id {} out of range for {n_relations} relations",
                    ex.relation.0
                )));
            }
            if ex.tokens.is_empty() {
                return Err(Error::Data("empty question in relation data".into()));
            }
            Ok((vocab.encode(&ex.tokens), ex.relation.0))
        })
        .collect()
}

/// `(accuracy, mean loss)` of a classifier over encoded examples.
fn score(params: &RcnnParams, data: &[(Vec<usize>, usize)]) -> (f64, f64) {
    if data.is_empty() {
        return (0.0, 0.0);
    }
    let mut probs: HashMap<&[usize], Vec<f64>> = HashMap::new();
    let mut correct = 0usize;
    let mut loss = 0.0;
    for (ids, target) in data {
        let p = probs
            .entry(ids.as_slice())
            .or_insert_with(|| rcnn_forward(params, ids).expect("validated input").probs);
        if argmax(p) == *target {
            correct += 1;
        }
        loss -= p[*target].max(f64::MIN_POSITIVE).ln();
    }
    (correct as f64 / data.len() as f64, loss / data.len() as f64)
}

/// Classification accuracy and mean cross-entropy.
pub fn evaluate_rcnn(model: &RcnnModel, data: &[RelationExample]) -> Result<(f64, f64)> {
    let encoded = encode_all(&model.vocab, data, model.params.n_relations())?;
    Ok(score(&model.params, &encoded))
}

/// Seeded mini-batch SGD on cross-entropy; keeps the best-on-dev parameters.
pub fn train_rcnn(
    train: &[RelationExample],
    dev: &[RelationExample],
    table: &WordVectorTable,
    n_relations: usize,
    config: RcnnConfig,
    sgd: &SgdConfig,
) -> Result<(RcnnModel, TrainingLog)> {
    if train.is_empty() {
        return Err(Error::Data("no relation training examples".into()));
    }
    if n_relations == 0 {
        return Err(Error::Data("no relations".into()));
    }
    let vocab = Vocabulary::build(train.iter().map(|e| e.tokens.as_slice()));
    let train_enc = encode_all(&vocab, train, n_relations)?;
    let dev_enc = encode_all(&vocab, dev, n_relations)?;
    let mut params = RcnnParams::init(&vocab, table, config, n_relations, sgd.seed);

    // masked questions repeat a lot; identical (sequence, label) pairs share one pass
    let mut unique: Vec<&(Vec<usize>, usize)> = Vec::new();
    let mut key_of = Vec::with_capacity(train_enc.len());
    {
        let mut index: HashMap<&(Vec<usize>, usize), usize> = HashMap::new();
        for ex in &train_enc {
            let next = unique.len();
            let k = *index.entry(ex).or_insert(next);
            if k == next {
                unique.push(ex);
            }
            key_of.push(k);
        }
    }
    let batch_grad = |p: &RcnnParams, batch: &[usize], g: &mut RcnnParams| -> Result<f64> {
        let scale = 1.0 / batch.len() as f64;
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &i in batch {
            let k = key_of[i];
            match counts.iter_mut().find(|(key, _)| *key == k) {
                Some((_, c)) => *c += 1,
                None => counts.push((k, 1)),
            }
        }
        let mut loss = 0.0;
        for (k, count) in counts {
            let (ids, target) = unique[k];
            let cache = rcnn_forward(p, ids)?;
            loss -= count as f64 * cache.probs[*target].max(f64::MIN_POSITIVE).ln();
            rcnn_backward(p, &cache, *target, scale * count as f64, g);
        }
        Ok(loss)
    };
    let validate = (!dev_enc.is_empty()).then_some(|p: &RcnnParams| score(p, &dev_enc));
    let log = fit(&mut params, train_enc.len(), sgd, batch_grad, validate)?;
    Ok((RcnnModel { vocab, params }, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;
    use crate::text::tokenize;
    use proptest::prelude::*;
    use rand::Rng;

    fn small_table(dim: usize) -> WordVectorTable {
        WordVectorTable::new(dim)
    }

    fn random_params(seed: u64, vocab: usize, dim: usize, r: usize) -> RcnnParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = RcnnConfig {
            context_dim: 3,
            hidden_dim: 4,
        };
        let mut p = RcnnParams::zeros(vocab, dim, cfg, r);
        for t in p.tensors_mut() {
            *t = Matrix::uniform(t.rows, t.cols, 0.8, &mut rng);
        }
        p
    }

    #[test]
    fn zero_params_give_uniform_distribution() {
        let p = RcnnParams::zeros(5, 4, RcnnConfig::default(), 4);
        let cache = rcnn_forward(&p, &[1, 2, 3]).unwrap();
        for v in cache.probs {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_question() {
        let p = RcnnParams::zeros(5, 4, RcnnConfig::default(), 2);
        assert!(matches!(rcnn_forward(&p, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn backward_matches_finite_differences() {
        for seed in 0..3 {
            let p = random_params(seed, 6, 5, 3);
            let ids = [1, 4, 2, 5, 0];
            let target = (seed % 3) as usize;
            let cache = rcnn_forward(&p, &ids).unwrap();
            let mut g = p.zeros_like();
            rcnn_backward(&p, &cache, target, 1.0, &mut g);
            let report = grad_check(|q: &RcnnParams| rcnn_loss(q, &ids, target).unwrap(), &p, &g, 1e-4);
            assert!(report.passed(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn single_token_question_has_no_context() {
        let p = random_params(9, 4, 3, 2);
        let ids = [2];
        let cache = rcnn_forward(&p, &ids).unwrap();
        let mut g = p.zeros_like();
        rcnn_backward(&p, &cache, 1, 1.0, &mut g);
        assert!(g.w_left.data.iter().all(|&v| v == 0.0));
        let report = grad_check(|q: &RcnnParams| rcnn_loss(q, &ids, 1).unwrap(), &p, &g, 1e-4);
        assert!(report.passed(), "{report:?}");
    }

    fn ex(q: &str, r: usize) -> RelationExample {
        RelationExample {
            tokens: tokenize(q),
            relation: RelationId(r),
        }
    }

    #[test]
    fn memorizes_a_tiny_separable_set() {
        let mut data = Vec::new();
        let verbs = ["directed", "wrote", "starred", "produced"];
        let subjects = ["x", "y", "z", "w", "v"];
        for (r, verb) in verbs.iter().enumerate() {
            for s in subjects {
                data.push(ex(&format!("who {verb} {s}"), r));
            }
        }
        assert_eq!(data.len(), 20);
        let sgd = SgdConfig {
            epochs: 200,
            batch_size: 1,
            learning_rate: 0.05,
            patience: 0,
            ..SgdConfig::default()
        };
        let cfg = RcnnConfig {
            context_dim: 8,
            hidden_dim: 12,
        };
        let (model, log) = train_rcnn(&data, &[], &small_table(10), 4, cfg, &sgd).unwrap();
        assert_eq!(log.epochs.len(), 200);
        let (acc, _) = evaluate_rcnn(&model, &data).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn single_relation_dataset() {
        let data: Vec<_> = ["who directed a", "who made b", "director of c"]
            .iter()
            .map(|q| ex(q, 0))
            .collect();
        let sgd = SgdConfig {
            epochs: 30,
            batch_size: 1,
            patience: 0,
            ..SgdConfig::default()
        };
        let (model, _) = train_rcnn(&data, &[], &small_table(6), 1, RcnnConfig::default(), &sgd).unwrap();
        let p = model.predict(&tokenize("something never seen")).unwrap();
        assert_eq!(p, vec![1.0]);
    }

    #[test]
    fn out_of_range_relation() {
        let data = vec![ex("who directed a", 3)];
        let err = train_rcnn(&data, &[], &small_table(4), 2, RcnnConfig::default(), &SgdConfig::default());
        assert!(matches!(err, Err(Error::Data(_))));
    }

    #[test]
    fn first_epoch_reduces_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut data = Vec::new();
        for _ in 0..60 {
            let r = rng.gen_range(0..2);
            let verb = if r == 0 { "directed" } else { "wrote" };
            let filler = ["the", "film", "movie", "who", "which", "person"][rng.gen_range(0..6)];
            data.push(ex(&format!("{filler} {verb} <ENT>"), r));
        }
        let table = small_table(8);
        let cfg = RcnnConfig {
            context_dim: 5,
            hidden_dim: 6,
        };
        let sgd1 = SgdConfig {
            epochs: 1,
            batch_size: 4,
            ..SgdConfig::default()
        };
        let vocab = Vocabulary::build(data.iter().map(|e| e.tokens.as_slice()));
        let init = RcnnModel {
            params: RcnnParams::init(&vocab, &table, cfg, 2, sgd1.seed),
            vocab,
        };
        let (before, _) = (evaluate_rcnn(&init, &data).unwrap().1, ());
        let (trained, _) = train_rcnn(&data, &[], &table, 2, cfg, &sgd1).unwrap();
        let after = evaluate_rcnn(&trained, &data).unwrap().1;
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn weights_modes() {
        let w = relation_weights(&[0.7, 0.2, 0.1], WeightMode::Rcnn);
        assert_eq!(w.as_slice(), &[0.7, 0.2, 0.1]);
        let u = relation_weights(&[0.7, 0.2, 0.1], WeightMode::Uniform);
        assert_eq!(u.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn vocabulary_serializes_as_token_list() {
        let v = Vocabulary::build([tokenize("a b a").as_slice()]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"["<UNK>","<ENT>","a","b"]"#);
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(v.id("zzz"), 0);
    }

    proptest! {
        #[test]
        fn outputs_are_distributions(seed in 0u64..100, len in 1usize..8) {
            let p = random_params(seed, 7, 4, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
            let ids: Vec<usize> = (0..len).map(|_| rng.gen_range(0..7)).collect();
            let probs = rcnn_forward(&p, &ids).unwrap().probs;
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(probs.iter().all(|&v| v > 0.0));
            let w = relation_weights(&probs, WeightMode::Rcnn);
            prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
