//! In-process triple store.
//!
//! Entities and relations get dense ids in first-appearance order. Every
//! triple `(h, r, t)` is indexed twice: as an outgoing edge of `h` and as an
//! incoming edge of `t`, so neighbourhood queries can ignore orientation.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub usize);

impl EntityId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Outgoing,
    Incoming,
}

/// One adjacency entry of an entity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Adjacent {
    pub relation: RelationId,
    pub neighbor: EntityId,
    pub direction: Direction,
}

#[derive(Clone, Debug, Default)]
pub struct KnowledgeGraph {
    entity_names: Vec<String>,
    relation_names: Vec<String>,
    entity_ids: HashMap<String, EntityId>,
    relation_ids: HashMap<String, RelationId>,
    triples: Vec<Triple>,
    adjacency: Vec<Vec<Adjacent>>,
    aliases: Vec<(EntityId, String)>,
    // lowercased surface form -> ids (canonical names and aliases)
    folded: HashMap<String, Vec<EntityId>>,
    // tokenized surface form -> ids, for n-gram matching
    token_keys: HashMap<String, Vec<EntityId>>,
    max_name_tokens: usize,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.entity_names == other.entity_names
            && self.relation_names == other.relation_names
            && self.triples == other.triples
            && self.aliases == other.aliases
    }
}

/// Incremental construction; ids are handed out on first sight.
#[derive(Debug, Default)]
pub struct KgBuilder {
    graph: KnowledgeGraph,
    seen: HashSet<Triple>,
}

impl KgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity(&mut self, name: &str) -> EntityId {
        let g = &mut self.graph;
        if let Some(&id) = g.entity_ids.get(name) {
            return id;
        }
        let id = EntityId(g.entity_names.len());
        g.entity_names.push(name.to_string());
        g.entity_ids.insert(name.to_string(), id);
        id
    }

    pub fn relation(&mut self, name: &str) -> RelationId {
        let g = &mut self.graph;
        if let Some(&id) = g.relation_ids.get(name) {
            return id;
        }
        let id = RelationId(g.relation_names.len());
        g.relation_names.push(name.to_string());
        g.relation_ids.insert(name.to_string(), id);
        id
    }

    /// Returns false when the triple was already present.
    pub fn add(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        let head = self.entity(head);
        let relation = self.relation(relation);
        let tail = self.entity(tail);
        let triple = Triple {
            head,
            relation,
            tail,
        };
        if self.seen.insert(triple) {
            self.graph.triples.push(triple);
            true
        } else {
            false
        }
    }

    pub fn build(self) -> Result<KnowledgeGraph> {
        let mut graph = self.graph;
        if graph.triples.is_empty() {
            return Err(Error::EmptyGraph);
        }
        graph.reindex();
        Ok(graph)
    }
}

/// Parses a TAB-separated triple file (`head \t relation \t tail`).
///
/// Blank lines and lines starting with `#` are skipped. Repeated triples are
/// stored once.
pub fn load_triples(source: &str) -> Result<KnowledgeGraph> {
    let mut builder = KgBuilder::new();
    let mut duplicates = 0usize;
    for (idx, line) in source.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let (h, r, t) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty field".into(),
            });
        }
        if !builder.add(h, r, t) {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        log::debug!("dropped {duplicates} duplicate triples");
    }
    builder.build()
}

impl KnowledgeGraph {
    fn reindex(&mut self) {
        let mut adjacency = vec![Vec::new(); self.entity_names.len()];
        for t in &self.triples {
            adjacency[t.head.0].push(Adjacent {
                relation: t.relation,
                neighbor: t.tail,
                direction: Direction::Outgoing,
            });
            adjacency[t.tail.0].push(Adjacent {
                relation: t.relation,
                neighbor: t.head,
                direction: Direction::Incoming,
            });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        self.adjacency = adjacency;

        self.folded.clear();
        self.token_keys.clear();
        self.max_name_tokens = 0;
        let surfaces: Vec<(EntityId, String)> = self
            .entity_names
            .iter()
            .enumerate()
            .map(|(i, n)| (EntityId(i), n.clone()))
            .chain(self.aliases.iter().cloned())
            .collect();
        for (id, surface) in surfaces {
            push_unique(&mut self.folded, surface.trim().to_lowercase(), id);
            let tokens = text::tokenize(&surface);
            if !tokens.is_empty() {
                self.max_name_tokens = self.max_name_tokens.max(tokens.len());
                push_unique(&mut self.token_keys, tokens.join(" "), id);
            }
        }
    }

    /// Parses an alias file (`canonical \t alias`) and registers every alias.
    pub fn add_aliases(&mut self, source: &str) -> Result<()> {
        for (idx, line) in source.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            let canonical = fields[0].trim();
            let id = *self.entity_ids.get(canonical).ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("alias refers to unknown entity `{canonical}`"),
            })?;
            let alias = fields[1].trim().to_string();
            if !self.aliases.iter().any(|(i, a)| *i == id && *a == alias) {
                self.aliases.push((id, alias));
            }
        }
        self.reindex();
        Ok(())
    }

    pub fn entity_count(&self) -> usize {
        self.entity_names.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_names.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relation_names
    }

    pub fn aliases(&self) -> &[(EntityId, String)] {
        &self.aliases
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entity_names[id.0]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relation_names[id.0]
    }

    /// Exact canonical-name lookup.
    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entity_ids.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relation_ids.get(name).copied()
    }

    pub fn check_entity(&self, id: EntityId) -> Result<()> {
        if id.0 < self.entity_names.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: "entity",
                id: id.0,
            })
        }
    }

    /// All edges touching `v`, ordered by relation id, then neighbour id.
    pub fn neighbors(&self, v: EntityId) -> Result<&[Adjacent]> {
        self.check_entity(v)?;
        Ok(&self.adjacency[v.0])
    }

    /// Case-insensitive lookup through canonical names and aliases.
    pub fn resolve_entity(&self, name: &str) -> Result<EntityId> {
        let folded = name.trim().to_lowercase();
        if let Some(ids) = self.folded.get(&folded) {
            return Ok(ids[0]);
        }
        if let Some(ids) = self.token_keys.get(&text::name_key(name)) {
            return Ok(ids[0]);
        }
        Err(Error::UnknownEntity {
            name: name.to_string(),
            suggestions: self.nearest_names(&folded, 3),
        })
    }

    fn nearest_names(&self, folded: &str, k: usize) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .entity_names
            .iter()
            .chain(self.aliases.iter().map(|(_, a)| a))
            .map(|n| (strsim::levenshtein(folded, &n.to_lowercase()), n))
            .collect();
        scored.sort();
        scored.into_iter().take(k).map(|(_, n)| n.clone()).collect()
    }

    /// Entities whose tokenized name or alias equals `key` (see [`text::name_key`]).
    pub fn entities_with_key(&self, key: &str) -> &[EntityId] {
        self.token_keys.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Longest entity name, in tokens.
    pub fn max_name_tokens(&self) -> usize {
        self.max_name_tokens
    }

    /// Serializes back to the triple-file format.
    pub fn to_triple_file(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(self.entity_name(t.head));
            out.push('\t');
            out.push_str(self.relation_name(t.relation));
            out.push('\t');
            out.push_str(self.entity_name(t.tail));
            out.push('\n');
        }
        out
    }

    pub fn to_alias_file(&self) -> String {
        self.aliases
            .iter()
            .map(|(id, alias)| format!("{}\t{}\n", self.entity_name(*id), alias))
            .collect()
    }
}

fn push_unique(map: &mut HashMap<String, Vec<EntityId>>, key: String, id: EntityId) {
    let ids = map.entry(key).or_default();
    if !ids.contains(&id) {
        ids.push(id);
        ids.sort_unstable();
    }
}
