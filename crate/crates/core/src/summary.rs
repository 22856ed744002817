//! Graph summarization: grouping candidate answers into supernodes.
//!
//! With one question entity, every relation incident to it yields one
//! supernode holding all neighbours reached through that relation. With
//! several question entities, each relation yields a shared supernode (the
//! intersection of the entities' neighbourhoods under that relation) plus one
//! remainder supernode per entity for whatever is left over.
//!
//! Orientation is ignored throughout, and question entities never become
//! supernode members.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId};
use crate::linking::Subgraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supernode {
    pub id: usize,
    /// Sorted by id, never empty.
    pub members: Vec<EntityId>,
    pub relation: RelationId,
    /// Question entities this supernode hangs off, sorted by id.
    pub anchors: Vec<EntityId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SummaryEdge {
    pub anchor: EntityId,
    pub relation: RelationId,
    pub supernode: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummaryGraph {
    pub supernodes: Vec<Supernode>,
    pub question_entities: Vec<EntityId>,
    pub edges: Vec<SummaryEdge>,
}

impl SummaryGraph {
    pub fn len(&self) -> usize {
        self.supernodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supernodes.is_empty()
    }

    /// Edges incident to each supernode, indexed by supernode id.
    pub fn incident_edges(&self) -> Vec<Vec<SummaryEdge>> {
        let mut out = vec![Vec::new(); self.supernodes.len()];
        for e in &self.edges {
            out[e.supernode].push(*e);
        }
        out
    }

    pub fn relations(&self) -> BTreeSet<RelationId> {
        self.edges.iter().map(|e| e.relation).collect()
    }

    /// Text rendering, one line per supernode:
    /// `[id] anchor(s) --relation--> {members}`.
    pub fn display<'a>(&'a self, kg: &'a KnowledgeGraph) -> SummaryDisplay<'a> {
        SummaryDisplay { summary: self, kg }
    }

    fn push(&mut self, members: BTreeSet<EntityId>, relation: RelationId, anchors: Vec<EntityId>) {
        let id = self.supernodes.len();
        for &anchor in &anchors {
            self.edges.push(SummaryEdge {
                anchor,
                relation,
                supernode: id,
            });
        }
        self.supernodes.push(Supernode {
            id,
            members: members.into_iter().collect(),
            relation,
            anchors,
        });
    }
}

pub struct SummaryDisplay<'a> {
    summary: &'a SummaryGraph,
    kg: &'a KnowledgeGraph,
}

impl fmt::Display for SummaryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kg = self.kg;
        for node in &self.summary.supernodes {
            let anchors: Vec<&str> = node.anchors.iter().map(|&a| kg.entity_name(a)).collect();
            let members: Vec<&str> = node.members.iter().map(|&m| kg.entity_name(m)).collect();
            writeln!(
                f,
                "[{}] {} --{}--> {{{}}}",
                node.id,
                anchors.join(", "),
                kg.relation_name(node.relation),
                members.join(", ")
            )?;
        }
        Ok(())
    }
}

/// r-neighbourhoods of `e`, without any question entity.
fn grouped_neighbors(
    sub: &Subgraph,
    e: EntityId,
) -> BTreeMap<RelationId, BTreeSet<EntityId>> {
    let mut groups = sub.neighbors_by_relation(e);
    for set in groups.values_mut() {
        for q in &sub.question_entities {
            set.remove(q);
        }
    }
    groups.retain(|_, s| !s.is_empty());
    groups
}

/// One supernode per relation incident to the single question entity.
pub fn summarize_single(sub: &Subgraph) -> Result<SummaryGraph> {
    if sub.question_entities.len() != 1 {
        return Err(Error::Input(format!(
            "single-entity summarization needs exactly one question entity, got {}",
            sub.question_entities.len()
        )));
    }
    let center = sub.question_entities[0];
    let mut summary = SummaryGraph {
        supernodes: Vec::new(),
        question_entities: sub.question_entities.clone(),
        edges: Vec::new(),
    };
    for (relation, members) in grouped_neighbors(sub, center) {
        summary.push(members, relation, vec![center]);
    }
    if summary.is_empty() {
        return Err(Error::EmptySummary);
    }
    Ok(summary)
}

/// Relation-wise intersection grouping for two or more question entities.
pub fn summarize_multi(sub: &Subgraph) -> Result<SummaryGraph> {
    if sub.question_entities.len() < 2 {
        return Err(Error::Input(format!(
            "multi-entity summarization needs at least two question entities, got {}",
            sub.question_entities.len()
        )));
    }
    let mut anchors = sub.question_entities.clone();
    anchors.sort_unstable();
    let per_entity: Vec<BTreeMap<RelationId, BTreeSet<EntityId>>> =
        anchors.iter().map(|&e| grouped_neighbors(sub, e)).collect();
    let relations: BTreeSet<RelationId> =
        per_entity.iter().flat_map(|g| g.keys().copied()).collect();

    let mut summary = SummaryGraph {
        supernodes: Vec::new(),
        question_entities: sub.question_entities.clone(),
        edges: Vec::new(),
    };
    let empty = BTreeSet::new();
    for r in relations {
        let sets: Vec<&BTreeSet<EntityId>> =
            per_entity.iter().map(|g| g.get(&r).unwrap_or(&empty)).collect();
        let mut shared = sets[0].clone();
        for s in &sets[1..] {
            shared.retain(|x| s.contains(x));
        }
        if !shared.is_empty() {
            summary.push(shared.clone(), r, anchors.clone());
        }
        for (&anchor, set) in anchors.iter().zip(&sets) {
            let rest: BTreeSet<EntityId> = set.difference(&shared).copied().collect();
            if !rest.is_empty() {
                summary.push(rest, r, vec![anchor]);
            }
        }
    }
    if summary.is_empty() {
        return Err(Error::EmptySummary);
    }
    Ok(summary)
}

/// Picks the algorithm by question-entity count.
pub fn summarize(sub: &Subgraph) -> Result<SummaryGraph> {
    match sub.question_entities.len() {
        0 => Err(Error::Input("no question entities".into())),
        1 => summarize_single(sub),
        _ => summarize_multi(sub),
    }
}

/// The no-summarization candidate set: every non-question node of the
/// subgraph becomes its own singleton, linked to each question entity by
/// every relation that connects them. `relation` of a singleton is the
/// smallest such relation; `edges` carries the full set.
pub fn singleton_candidates(sub: &Subgraph) -> Result<SummaryGraph> {
    let mut links: BTreeMap<EntityId, BTreeSet<(EntityId, RelationId)>> = BTreeMap::new();
    for &q in &sub.question_entities {
        for (r, members) in grouped_neighbors(sub, q) {
            for m in members {
                links.entry(m).or_default().insert((q, r));
            }
        }
    }
    if links.is_empty() {
        return Err(Error::EmptySummary);
    }
    let mut summary = SummaryGraph {
        supernodes: Vec::new(),
        question_entities: sub.question_entities.clone(),
        edges: Vec::new(),
    };
    for (id, (entity, pairs)) in links.into_iter().enumerate() {
        let anchors: BTreeSet<EntityId> = pairs.iter().map(|p| p.0).collect();
        let relation = pairs.iter().map(|p| p.1).min().expect("non-empty");
        for &(anchor, r) in &pairs {
            summary.edges.push(SummaryEdge {
                anchor,
                relation: r,
                supernode: id,
            });
        }
        summary.supernodes.push(Supernode {
            id,
            members: vec![entity],
            relation,
            anchors: anchors.into_iter().collect(),
        });
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupernodeCheck {
    pub supernode: usize,
    pub expected: Vec<EntityId>,
    pub actual: Vec<EntityId>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<SupernodeCheck>,
    /// (relation, anchors) groups the KG says should exist but no supernode covers.
    pub missing: Vec<(RelationId, Vec<EntityId>)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.checks.iter().all(|c| c.matched)
    }

    pub fn mismatches(&self) -> usize {
        self.checks.iter().filter(|c| !c.matched).count()
    }

    pub fn accuracy(&self) -> f64 {
        if self.checks.is_empty() {
            return 1.0;
        }
        (self.checks.len() - self.mismatches()) as f64 / self.checks.len() as f64
    }
}

/// Re-derives every supernode's membership straight from the KG adjacency
/// lists and compares.
pub fn verify_grouping(summary: &SummaryGraph, kg: &KnowledgeGraph) -> VerificationReport {
    let qe: Vec<EntityId> = summary.question_entities.clone();
    let hood = |e: EntityId, r: RelationId| -> Vec<EntityId> {
        let mut v: Vec<EntityId> = kg
            .neighbors(e)
            .map(|adj| {
                adj.iter()
                    .filter(|a| a.relation == r && !qe.contains(&a.neighbor))
                    .map(|a| a.neighbor)
                    .collect()
            })
            .unwrap_or_default();
        v.sort_unstable();
        v.dedup();
        v
    };
    let intersect_all = |r: RelationId| -> Vec<EntityId> {
        let mut acc = hood(qe[0], r);
        for &e in &qe[1..] {
            let other = hood(e, r);
            acc.retain(|x| other.binary_search(x).is_ok());
        }
        acc
    };
    let expected_for = |anchors: &[EntityId], r: RelationId| -> Vec<EntityId> {
        if qe.len() == 1 {
            hood(qe[0], r)
        } else if anchors.len() == qe.len() {
            intersect_all(r)
        } else {
            let shared = intersect_all(r);
            hood(anchors[0], r)
                .into_iter()
                .filter(|x| shared.binary_search(x).is_err())
                .collect()
        }
    };

    let checks: Vec<SupernodeCheck> = summary
        .supernodes
        .iter()
        .map(|node| {
            let expected = expected_for(&node.anchors, node.relation);
            let matched = expected == node.members;
            SupernodeCheck {
                supernode: node.id,
                expected,
                actual: node.members.clone(),
                matched,
            }
        })
        .collect();

    // every non-empty group must be represented
    let present: BTreeSet<(RelationId, Vec<EntityId>)> = summary
        .supernodes
        .iter()
        .map(|n| (n.relation, n.anchors.clone()))
        .collect();
    let mut sorted_qe = qe.clone();
    sorted_qe.sort_unstable();
    let relations: BTreeSet<RelationId> = qe
        .iter()
        .flat_map(|&e| kg.neighbors(e).unwrap_or(&[]).iter().map(|a| a.relation))
        .collect();
    let mut missing = Vec::new();
    for r in relations {
        let mut groups: Vec<Vec<EntityId>> = Vec::new();
        if qe.len() == 1 {
            groups.push(sorted_qe.clone());
        } else {
            groups.push(sorted_qe.clone());
            groups.extend(sorted_qe.iter().map(|&e| vec![e]));
        }
        for anchors in groups {
            if !expected_for(&anchors, r).is_empty() && !present.contains(&(r, anchors.clone())) {
                missing.push((r, anchors));
            }
        }
    }

    VerificationReport { checks, missing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::TOY_MOVIES;
    use crate::kg::load_triples;
    use crate::linking::extract_subgraph;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(kg: &KnowledgeGraph, names: &[&str]) -> Vec<EntityId> {
        names.iter().map(|n| kg.entity_id(n).unwrap()).collect()
    }

    #[test]
    fn neighbour_in_two_supernodes() {
        let kg = load_triples("v\tr1\tx\nv\tr1\ty\nv\tr2\tx\n").unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["v"])).unwrap();
        let s = summarize_single(&sub).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.supernodes[0].members, ids(&kg, &["x", "y"]));
        assert_eq!(s.supernodes[0].relation, kg.relation_id("r1").unwrap());
        assert_eq!(s.supernodes[1].members, ids(&kg, &["x"]));
        assert_eq!(s.supernodes[1].relation, kg.relation_id("r2").unwrap());
    }

    #[test]
    fn single_neighbour() {
        let kg = load_triples("v\tr\tx\n").unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["v"])).unwrap();
        let s = summarize_single(&sub).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.supernodes[0].members.len(), 1);
    }

    #[test]
    fn isolated_entity_has_empty_summary() {
        let kg = load_triples("v\tr\tv\n").unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["v"])).unwrap();
        // self loop only: the question entity is never its own answer
        assert!(matches!(summarize_single(&sub), Err(Error::EmptySummary)));
    }

    #[test]
    fn toy_movies_grouping() {
        let kg = load_triples(TOY_MOVIES).unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["A", "B", "C"])).unwrap();
        let s = summarize_multi(&sub).unwrap();
        let written = kg.relation_id("written_by").unwrap();
        let directed = kg.relation_id("directed_by").unwrap();
        let abc = ids(&kg, &["A", "B", "C"]);

        assert_eq!(s.len(), 3);
        assert_eq!(s.supernodes[0].relation, written);
        assert_eq!(s.supernodes[0].anchors, abc);
        assert_eq!(s.supernodes[0].members, ids(&kg, &["1", "6"]));
        assert_eq!(s.supernodes[1].relation, written);
        assert_eq!(s.supernodes[1].anchors, ids(&kg, &["B"]));
        assert_eq!(s.supernodes[1].members, ids(&kg, &["4", "7"]));
        // only C is directed: empty intersection, full remainder
        assert_eq!(s.supernodes[2].relation, directed);
        assert_eq!(s.supernodes[2].anchors, ids(&kg, &["C"]));
        assert_eq!(s.supernodes[2].members, ids(&kg, &["1", "5"]));

        let text = s.display(&kg).to_string();
        assert_eq!(text.lines().next().unwrap(), "[0] A, B, C --written_by--> {1, 6}");
        assert!(verify_grouping(&s, &kg).passed());
    }

    #[test]
    fn identical_neighbourhoods_give_one_supernode() {
        let kg = load_triples("a\tr\tx\na\tr\ty\nb\tr\tx\nb\tr\ty\n").unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["a", "b"])).unwrap();
        let s = summarize_multi(&sub).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.supernodes[0].anchors.len(), 2);
        assert_eq!(s.edges.len(), 2);
    }

    #[test]
    fn deleted_member_is_one_mismatch() {
        let kg = load_triples(TOY_MOVIES).unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["A", "B", "C"])).unwrap();
        let mut s = summarize_multi(&sub).unwrap();
        s.supernodes[1].members.pop();
        let report = verify_grouping(&s, &kg);
        assert!(!report.passed());
        assert_eq!(report.mismatches(), 1);
        assert!(report.missing.is_empty());
    }

    #[test]
    fn dropped_supernode_is_reported_missing() {
        let kg = load_triples(TOY_MOVIES).unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["C"])).unwrap();
        let mut s = summarize_single(&sub).unwrap();
        s.supernodes.pop();
        let report = verify_grouping(&s, &kg);
        assert_eq!(report.mismatches(), 0);
        assert_eq!(report.missing.len(), 1);
    }

    #[test]
    fn singletons_cover_each_neighbour_once() {
        let kg = load_triples(TOY_MOVIES).unwrap();
        let sub = extract_subgraph(&kg, &ids(&kg, &["C"])).unwrap();
        let s = singleton_candidates(&sub).unwrap();
        // 1, 5, 6
        assert_eq!(s.len(), 3);
        assert!(s.supernodes.iter().all(|n| n.members.len() == 1));
        // 1 is linked through both relations
        let one = kg.entity_id("1").unwrap();
        let node = s.supernodes.iter().find(|n| n.members == vec![one]).unwrap();
        assert_eq!(s.edges.iter().filter(|e| e.supernode == node.id).count(), 2);
    }

    fn random_kg(rng: &mut ChaCha8Rng, n: usize, relations: usize, edges: usize) -> KnowledgeGraph {
        let mut src = String::new();
        for _ in 0..edges {
            src.push_str(&format!(
                "n{}\tr{}\tn{}\n",
                rng.gen_range(0..n),
                rng.gen_range(0..relations),
                rng.gen_range(0..n)
            ));
        }
        load_triples(&src).unwrap()
    }

    proptest! {
        #[test]
        fn grouping_matches_set_algebra(seed in 0u64..1000, k in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kg = random_kg(&mut rng, 25, 3, 80);
            let mut qe: Vec<EntityId> = Vec::new();
            while qe.len() < k.min(kg.entity_count()) {
                let e = EntityId(rng.gen_range(0..kg.entity_count()));
                if !qe.contains(&e) { qe.push(e); }
            }
            let sub = extract_subgraph(&kg, &qe).unwrap();
            let summary = match summarize(&sub) {
                Ok(s) => s,
                Err(Error::EmptySummary) => return Ok(()),
                Err(e) => panic!("{e}"),
            };

            // brute-force r-neighbourhoods from the raw triple list
            let n_of = |e: EntityId, r: RelationId| -> BTreeSet<EntityId> {
                kg.triples().iter().filter(|t| t.relation == r).filter_map(|t| {
                    if t.head == e { Some(t.tail) } else if t.tail == e { Some(t.head) } else { None }
                }).filter(|x| !qe.contains(x)).collect()
            };
            for r in (0..kg.relation_count()).map(RelationId) {
                for &e in &qe {
                    let union: BTreeSet<EntityId> = summary.supernodes.iter()
                        .filter(|s| s.relation == r && s.anchors.contains(&e))
                        .flat_map(|s| s.members.iter().copied()).collect();
                    prop_assert_eq!(&union, &n_of(e, r));
                    let mut seen = BTreeSet::new();
                    for s in summary.supernodes.iter().filter(|s| s.relation == r && s.anchors.contains(&e)) {
                        for m in &s.members { prop_assert!(seen.insert(*m), "overlap"); }
                    }
                }
            }
            if qe.len() == 1 {
                let incident: BTreeSet<RelationId> = (0..kg.relation_count()).map(RelationId)
                    .filter(|&r| !n_of(qe[0], r).is_empty()).collect();
                prop_assert_eq!(summary.len(), incident.len());
            } else {
                for s in summary.supernodes.iter().filter(|s| s.anchors.len() == qe.len()) {
                    for &e in &qe {
                        let hood = n_of(e, s.relation);
                        prop_assert!(s.members.iter().all(|m| hood.contains(m)));
                    }
                }
            }
            prop_assert!(verify_grouping(&summary, &kg).passed());
            prop_assert_eq!(summarize(&sub).unwrap(), summary);
        }
    }
}
