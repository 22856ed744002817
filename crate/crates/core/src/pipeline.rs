//! End-to-end answering and two-stage training.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{QaExample, RelationLabel};
use crate::embedding::{supernode_init, EntityTable, WordVectorTable};
use crate::error::{Error, Result};
use crate::gcn::{propagate, EmbeddingMatrix};
use crate::kg::{EntityId, KnowledgeGraph, RelationId};
use crate::linking::{analyze_question, extract_subgraph, LinkedQuestion};
use crate::nn::SgdConfig;
use crate::rcnn::{
    evaluate_rcnn, relation_weights, train_rcnn, RcnnConfig, RcnnModel, RelationExample,
    RelationWeights, WeightMode,
};
use crate::selector::{
    encode_question, evaluate_selector, gold_supernode, select_answer, train_selector,
    AnswerPrediction, SelectorConfig, SelectorParams, TrainingExample,
};
use crate::summary::{singleton_candidates, summarize, SummaryGraph};
use crate::training::TrainingLog;

/// Inference switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerMode {
    /// `false` scores every subgraph node as its own singleton candidate.
    pub summarization: bool,
    pub weights: WeightMode,
}

impl Default for AnswerMode {
    fn default() -> Self {
        Self {
            summarization: true,
            weights: WeightMode::Rcnn,
        }
    }
}

impl AnswerMode {
    pub fn label(&self) -> String {
        let gs = if self.summarization { "gs" } else { "nogs" };
        match self.weights {
            WeightMode::Rcnn => gs.to_string(),
            WeightMode::Uniform => format!("{gs}-uniform"),
        }
    }
}

/// A loaded, ready-to-answer system. Immutable once built.
#[derive(Clone, Debug)]
pub struct QaSystem {
    pub kg: KnowledgeGraph,
    pub table: WordVectorTable,
    pub entities: EntityTable,
    pub rcnn: RcnnModel,
    pub selector: SelectorParams,
}

impl QaSystem {
    pub fn new(
        kg: KnowledgeGraph,
        table: WordVectorTable,
        rcnn: RcnnModel,
        selector: SelectorParams,
    ) -> Result<Self> {
        if rcnn.params.n_relations() != kg.relation_count() {
            return Err(Error::Shape(format!(
                "classifier knows {} relations, the graph has {}",
                rcnn.params.n_relations(),
                kg.relation_count()
            )));
        }
        if selector.output_dim() != table.dim() {
            return Err(Error::Shape(format!(
                "selector projects to {} dimensions, word vectors have {}",
                selector.output_dim(),
                table.dim()
            )));
        }
        let entities = EntityTable::build(&kg, &table);
        Ok(Self {
            kg,
            table,
            entities,
            rcnn,
            selector,
        })
    }
}

/// Candidate supernodes for the question entities.
pub fn candidates(kg: &KnowledgeGraph, entities: &[EntityId], summarization: bool) -> Result<SummaryGraph> {
    let sub = extract_subgraph(kg, entities)?;
    if summarization {
        summarize(&sub)
    } else {
        singleton_candidates(&sub)
    }
}

/// Initial states from member means, then one propagation step.
pub fn supernode_embeddings(
    summary: &SummaryGraph,
    entities: &EntityTable,
    weights: &RelationWeights,
) -> Result<EmbeddingMatrix> {
    let inits: Vec<Vec<f64>> = summary
        .supernodes
        .iter()
        .map(|s| supernode_init(s, entities))
        .collect();
    propagate(summary, &inits, entities, weights)
}

fn require_entities(linked: &LinkedQuestion, question: &str) -> Result<()> {
    if linked.entities.is_empty() {
        return Err(Error::NoEntity(question.to_string()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Answer {
    pub entities: Vec<EntityId>,
    pub names: Vec<String>,
    pub linked: LinkedQuestion,
    pub summary: SummaryGraph,
    pub relation_probabilities: Vec<f64>,
    pub weights: RelationWeights,
    pub prediction: AnswerPrediction,
}

impl Answer {
    /// Mentions, candidate graph, relation weights and the three best candidates.
    pub fn explain(&self, kg: &KnowledgeGraph) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mentions:");
        for m in &self.linked.mentions {
            let _ = writeln!(
                out,
                "  `{}` (tokens {}..{}) -> {}",
                m.surface,
                m.start,
                m.end,
                kg.entity_name(m.entity)
            );
        }
        let _ = writeln!(out, "masked question: {}", self.linked.masked.join(" "));
        let _ = writeln!(out, "candidates:");
        for line in self.summary.display(kg).to_string().lines() {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(out, "relation weights:");
        for (r, w) in self.weights.as_slice().iter().enumerate() {
            let _ = writeln!(out, "  {:<20} {w:.4}", kg.relation_name(RelationId(r)));
        }
        let mut order: Vec<usize> = (0..self.prediction.probabilities.len()).collect();
        order.sort_by(|&a, &b| {
            self.prediction.probabilities[b]
                .total_cmp(&self.prediction.probabilities[a])
                .then(a.cmp(&b))
        });
        let _ = writeln!(out, "top candidates:");
        for &i in order.iter().take(3) {
            let members: Vec<&str> = self.summary.supernodes[i]
                .members
                .iter()
                .map(|&m| kg.entity_name(m))
                .collect();
            let _ = writeln!(
                out,
                "  [{i}] p={:.4} {{{}}}",
                self.prediction.probabilities[i],
                members.join(", ")
            );
        }
        out
    }
}

pub fn answer_question(system: &QaSystem, question: &str, mode: AnswerMode) -> Result<Answer> {
    let linked = analyze_question(question, &system.kg)?;
    require_entities(&linked, question)?;
    let summary = candidates(&system.kg, &linked.entities, mode.summarization)?;
    let relation_probabilities = system.rcnn.predict(&linked.masked)?;
    let weights = relation_weights(&relation_probabilities, mode.weights);
    let h = supernode_embeddings(&summary, &system.entities, &weights)?;
    let q = encode_question(&system.selector, &linked.masked, &system.table)?;
    let prediction = select_answer(&summary, &h, &q)?;
    let entities = prediction.members.clone();
    let names = entities
        .iter()
        .map(|&e| system.kg.entity_name(e).to_string())
        .collect();
    Ok(Answer {
        entities,
        names,
        linked,
        summary,
        relation_probabilities,
        weights,
        prediction,
    })
}

/// Hyperparameters of both training stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub rcnn: RcnnConfig,
    pub selector: SelectorConfig,
    pub rcnn_training: SgdConfig,
    pub selector_training: SgdConfig,
    /// Relation weighting used while training the selector.
    pub weight_mode: WeightMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rcnn: RcnnConfig::default(),
            selector: SelectorConfig::default(),
            rcnn_training: SgdConfig::default(),
            selector_training: SgdConfig::default(),
            weight_mode: WeightMode::Rcnn,
        }
    }
}

impl TrainConfig {
    /// Sets the seed of both stages.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rcnn_training.seed = seed;
        self.selector_training.seed = seed;
        self
    }
}

fn relation_of(kg: &KnowledgeGraph, name: &str) -> Result<RelationId> {
    kg.relation_id(name)
        .ok_or_else(|| Error::Data(format!("relation `{name}` is not in the graph")))
}

/// Masks each labelled question; unlinkable questions are dropped and counted.
pub fn relation_examples(
    kg: &KnowledgeGraph,
    labels: &[RelationLabel],
) -> Result<(Vec<RelationExample>, usize)> {
    let mut out = Vec::new();
    let mut dropped = 0;
    for l in labels {
        let relation = relation_of(kg, &l.relation)?;
        match analyze_question(&l.question, kg) {
            Ok(linked) => out.push(RelationExample {
                tokens: linked.masked,
                relation,
            }),
            Err(e) => {
                log::debug!("dropping `{}`: {e}", l.question);
                dropped += 1;
            }
        }
    }
    Ok((out, dropped))
}

pub fn relation_labels(data: &[QaExample]) -> Result<Vec<RelationLabel>> {
    data.iter()
        .map(|q| {
            if q.relation.is_empty() {
                return Err(Error::Data(format!("question `{}` has no relation label", q.question)));
            }
            Ok(RelationLabel {
                question: q.question.clone(),
                relation: q.relation.clone(),
            })
        })
        .collect()
}

/// Builds selector examples with embeddings fixed by the frozen classifier.
/// Questions the pipeline cannot process are dropped and counted.
pub fn selector_examples(
    kg: &KnowledgeGraph,
    entities: &EntityTable,
    rcnn: &RcnnModel,
    mode: WeightMode,
    data: &[QaExample],
) -> Result<(Vec<TrainingExample>, usize)> {
    let mut out = Vec::new();
    let mut dropped = 0;
    for q in data {
        let relation = if q.relation.is_empty() {
            None
        } else {
            Some(relation_of(kg, &q.relation)?)
        };
        let built = (|| -> Result<TrainingExample> {
            let linked = analyze_question(&q.question, kg)?;
            require_entities(&linked, &q.question)?;
            let summary = candidates(kg, &linked.entities, true)?;
            let weights = relation_weights(&rcnn.predict(&linked.masked)?, mode);
            let embeddings = supernode_embeddings(&summary, entities, &weights)?;
            let gold = relation.and_then(|r| gold_supernode(&summary, r, &linked.entities));
            let answers: BTreeSet<EntityId> = q
                .answers
                .iter()
                .filter_map(|a| kg.resolve_entity(a).ok())
                .collect();
            Ok(TrainingExample {
                tokens: linked.masked,
                summary,
                embeddings,
                gold,
                answers,
            })
        })();
        match built {
            Ok(ex) => out.push(ex),
            Err(e) => {
                log::debug!("dropping `{}`: {e}", q.question);
                dropped += 1;
            }
        }
    }
    Ok((out, dropped))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub rcnn_log: TrainingLog,
    pub selector_log: TrainingLog,
    pub rcnn_dev_accuracy: Option<f64>,
    pub selector_dev_hits_at_1: Option<f64>,
    /// Training questions with no gold supernode.
    pub skipped_no_gold: usize,
    /// Questions dropped because linking or summarization failed.
    pub dropped: usize,
}

/// Stage one: relation classifier.
pub fn train_relation_classifier(
    kg: &KnowledgeGraph,
    table: &WordVectorTable,
    train: &[RelationLabel],
    dev: &[RelationLabel],
    config: &TrainConfig,
) -> Result<(RcnnModel, TrainingLog, Option<f64>, usize)> {
    let (rtrain, d1) = relation_examples(kg, train)?;
    let (rdev, d2) = relation_examples(kg, dev)?;
    let (rcnn, log) = train_rcnn(
        &rtrain,
        &rdev,
        table,
        kg.relation_count(),
        config.rcnn,
        &config.rcnn_training,
    )?;
    let acc = if rdev.is_empty() {
        None
    } else {
        Some(evaluate_rcnn(&rcnn, &rdev)?.0)
    };
    Ok((rcnn, log, acc, d1 + d2))
}

/// Stage two: the selector against a frozen classifier.
pub fn train_answer_selector(
    kg: &KnowledgeGraph,
    table: &WordVectorTable,
    rcnn: &RcnnModel,
    train: &[QaExample],
    dev: &[QaExample],
    config: &TrainConfig,
) -> Result<(SelectorParams, TrainingLog, Option<f64>, usize, usize)> {
    let entities = EntityTable::build(kg, table);
    let (strain, d1) = selector_examples(kg, &entities, rcnn, config.weight_mode, train)?;
    let (sdev, d2) = selector_examples(kg, &entities, rcnn, config.weight_mode, dev)?;
    let out = train_selector(&strain, &sdev, table, config.selector, &config.selector_training)?;
    let hits = if sdev.is_empty() {
        None
    } else {
        Some(evaluate_selector(&out.params, &sdev, table)?.0)
    };
    Ok((out.params, out.log, hits, out.skipped, d1 + d2))
}

/// Both stages on QA data; the classifier learns from the QA relation labels.
pub fn train_system(
    kg: KnowledgeGraph,
    table: WordVectorTable,
    train: &[QaExample],
    dev: &[QaExample],
    config: &TrainConfig,
) -> Result<(QaSystem, TrainSummary)> {
    let (rcnn, rcnn_log, rcnn_acc, dropped_r) = train_relation_classifier(
        &kg,
        &table,
        &relation_labels(train)?,
        &relation_labels(dev)?,
        config,
    )?;
    let (selector, selector_log, hits, skipped, dropped_s) =
        train_answer_selector(&kg, &table, &rcnn, train, dev, config)?;
    let summary = TrainSummary {
        rcnn_log,
        selector_log,
        rcnn_dev_accuracy: rcnn_acc,
        selector_dev_hits_at_1: hits,
        skipped_no_gold: skipped,
        dropped: dropped_r.max(dropped_s),
    };
    Ok((QaSystem::new(kg, table, rcnn, selector)?, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::TOY_MOVIES;
    use crate::kg::load_triples;

    fn toy_system() -> QaSystem {
        let kg = load_triples(TOY_MOVIES).unwrap();
        let mut table = WordVectorTable::new(4);
        table.insert("who", vec![0.1, 0.0, 0.0, 0.2]).unwrap();
        let vocab = crate::rcnn::Vocabulary::build(std::iter::empty());
        let rcnn = RcnnModel {
            params: crate::rcnn::RcnnParams::init(&vocab, &table, RcnnConfig::default(), kg.relation_count(), 0),
            vocab,
        };
        let selector = SelectorParams::init(4, SelectorConfig { hidden_dim: 3 }, 0);
        QaSystem::new(kg, table, rcnn, selector).unwrap()
    }

    #[test]
    fn unknown_entity_is_a_no_entity_error() {
        let sys = toy_system();
        assert!(matches!(
            answer_question(&sys, "who directed Nothing Here", AnswerMode::default()),
            Err(Error::NoEntity(_))
        ));
    }

    #[test]
    fn no_summarization_returns_one_entity() {
        let sys = toy_system();
        let mode = AnswerMode {
            summarization: false,
            weights: WeightMode::Rcnn,
        };
        for q in ["who wrote B", "who directed C", "who wrote A and C"] {
            let a = answer_question(&sys, q, mode).unwrap();
            assert_eq!(a.names.len(), 1, "{q}");
        }
    }

    #[test]
    fn answers_are_supernode_members() {
        let sys = toy_system();
        let a = answer_question(&sys, "who directed C", AnswerMode::default()).unwrap();
        assert_eq!(a.entities, a.summary.supernodes[a.prediction.supernode].members);
        let text = a.explain(&sys.kg);
        assert!(text.contains("top candidates"));
        assert!(text.contains("directed_by"));
    }

    #[test]
    fn mismatched_relation_count_is_rejected() {
        let sys = toy_system();
        let vocab = sys.rcnn.vocab.clone();
        let rcnn = RcnnModel {
            params: crate::rcnn::RcnnParams::init(&vocab, &sys.table, RcnnConfig::default(), 5, 0),
            vocab,
        };
        assert!(QaSystem::new(sys.kg.clone(), sys.table.clone(), rcnn, sys.selector.clone()).is_err());
    }

    #[test]
    fn mode_labels() {
        assert_eq!(AnswerMode::default().label(), "gs");
        let m = AnswerMode { summarization: false, weights: WeightMode::Uniform };
        assert_eq!(m.label(), "nogs-uniform");
    }
}
