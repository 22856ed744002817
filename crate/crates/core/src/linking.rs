//! Dictionary entity linking and question-subgraph extraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId, Triple};
use crate::text::{self, ENTITY_PLACEHOLDER};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub surface: String,
    /// Token span `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub entity: EntityId,
}

impl Mention {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Finds entity names inside a tokenized question.
///
/// All n-gram dictionary hits are collected, then accepted longest first
/// (ties: leftmost start, then smallest id) as long as they do not overlap an
/// already accepted span. The result is ordered by position.
pub fn link_entities(tokens: &[String], kg: &KnowledgeGraph) -> Result<Vec<Mention>> {
    if tokens.is_empty() {
        return Err(Error::Input("empty question".into()));
    }
    let max_len = kg.max_name_tokens().min(tokens.len());
    let mut candidates = Vec::new();
    for start in 0..tokens.len() {
        for len in 1..=max_len.min(tokens.len() - start) {
            let key = tokens[start..start + len].join(" ");
            if let Some(&entity) = kg.entities_with_key(&key).first() {
                candidates.push(Mention {
                    surface: key,
                    start,
                    end: start + len,
                    entity,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then(a.entity.cmp(&b.entity))
    });
    let mut taken = vec![false; tokens.len()];
    let mut accepted = Vec::new();
    for m in candidates {
        if taken[m.start..m.end].iter().any(|&t| t) {
            continue;
        }
        taken[m.start..m.end].iter_mut().for_each(|t| *t = true);
        accepted.push(m);
    }
    if accepted.is_empty() {
        return Err(Error::NoEntity(tokens.join(" ")));
    }
    accepted.sort_by_key(|m| m.start);
    Ok(accepted)
}

/// Question entities in mention order, each listed once.
pub fn question_entities(mentions: &[Mention]) -> Vec<EntityId> {
    let mut seen = BTreeSet::new();
    mentions
        .iter()
        .filter(|m| seen.insert(m.entity))
        .map(|m| m.entity)
        .collect()
}

/// Replaces every mention span with a single [`ENTITY_PLACEHOLDER`] token.
pub fn mask_mentions(tokens: &[String], mentions: &[Mention]) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    let mut spans = mentions.iter().peekable();
    while i < tokens.len() {
        match spans.peek() {
            Some(m) if m.start == i => {
                out.push(ENTITY_PLACEHOLDER.to_string());
                i = m.end;
                spans.next();
            }
            _ => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Tokenizes, links and masks in one go.
pub fn analyze_question(question: &str, kg: &KnowledgeGraph) -> Result<LinkedQuestion> {
    let tokens = text::tokenize(question);
    if tokens.is_empty() {
        return Err(Error::Input(format!("question `{question}` has no tokens")));
    }
    let mentions = link_entities(&tokens, kg)?;
    let masked = mask_mentions(&tokens, &mentions);
    let entities = question_entities(&mentions);
    Ok(LinkedQuestion {
        tokens,
        mentions,
        masked,
        entities,
    })
}

#[derive(Clone, Debug)]
pub struct LinkedQuestion {
    pub tokens: Vec<String>,
    pub mentions: Vec<Mention>,
    pub masked: Vec<String>,
    pub entities: Vec<EntityId>,
}

/// The triples touching at least one question entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    /// Sorted, duplicate-free.
    pub triples: Vec<Triple>,
    pub question_entities: Vec<EntityId>,
}

impl Subgraph {
    /// Neighbours of `e` inside the subgraph, grouped by relation. Edge
    /// orientation is ignored.
    pub fn neighbors_by_relation(&self, e: EntityId) -> BTreeMap<RelationId, BTreeSet<EntityId>> {
        let mut out: BTreeMap<RelationId, BTreeSet<EntityId>> = BTreeMap::new();
        for t in &self.triples {
            if t.head == e {
                out.entry(t.relation).or_default().insert(t.tail);
            }
            if t.tail == e {
                out.entry(t.relation).or_default().insert(t.head);
            }
        }
        out
    }

    pub fn nodes(&self) -> BTreeSet<EntityId> {
        self.triples
            .iter()
            .flat_map(|t| [t.head, t.tail])
            .chain(self.question_entities.iter().copied())
            .collect()
    }
}

/// Collects every triple with a question entity as head or tail.
pub fn extract_subgraph(kg: &KnowledgeGraph, entities: &[EntityId]) -> Result<Subgraph> {
    if entities.is_empty() {
        return Err(Error::Input("no question entities".into()));
    }
    let mut question_entities = Vec::new();
    for &e in entities {
        kg.check_entity(e)?;
        if !question_entities.contains(&e) {
            question_entities.push(e);
        }
    }
    let mut triples = BTreeSet::new();
    for &e in &question_entities {
        for adj in kg.neighbors(e)? {
            let t = match adj.direction {
                crate::kg::Direction::Outgoing => Triple {
                    head: e,
                    relation: adj.relation,
                    tail: adj.neighbor,
                },
                crate::kg::Direction::Incoming => Triple {
                    head: adj.neighbor,
                    relation: adj.relation,
                    tail: e,
                },
            };
            triples.insert(t);
        }
    }
    Ok(Subgraph {
        triples: triples.into_iter().collect(),
        question_entities,
    })
}
