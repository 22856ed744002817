//! Word vectors, entity vectors, and supernode initial states.

use std::borrow::Cow;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::summary::Supernode;
use crate::text;

/// Default vector dimension.
pub const DEFAULT_DIM: usize = 150;

#[derive(Clone, Debug, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector for `{token}` has {} values, table dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        self.vectors.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Table row, or the deterministic out-of-vocabulary vector.
    pub fn vector(&self, token: &str) -> Cow<'_, [f64]> {
        match self.vectors.get(token) {
            Some(v) => Cow::Borrowed(v.as_slice()),
            None => Cow::Owned(oov_vector(token, self.dim)),
        }
    }

    pub fn sequence(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens.iter().map(|t| self.vector(t).into_owned()).collect()
    }
}

/// Pseudo-random vector seeded by a SHA-256 of the token, entries uniform in
/// `[-0.5/d, 0.5/d]`.
pub fn oov_vector(token: &str, dim: usize) -> Vec<f64> {
    let digest = Sha256::digest(token.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    let mut rng = ChaCha8Rng::from_seed(seed);
    let bound = 0.5 / dim as f64;
    (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect()
}

/// Parses `token v1 … vd` lines. A leading `count dim` header line, as
/// written by word2vec, is skipped. Later duplicates replace earlier rows.
pub fn load_word_vectors(source: &str) -> Result<WordVectorTable> {
    let mut dim: Option<usize> = None;
    let mut table = WordVectorTable::new(0);
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let values: Vec<&str> = fields.collect();
        if idx == 0 && values.len() == 1 {
            if let (Ok(_), Ok(_)) = (token.parse::<usize>(), values[0].parse::<usize>()) {
                continue;
            }
        }
        let vector = values
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{v}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match dim {
            None => {
                if vector.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "token without values".into(),
                    });
                }
                dim = Some(vector.len());
                table.dim = vector.len();
            }
            Some(d) if d != vector.len() => {
                return Err(Error::Dimension {
                    line: line_no,
                    expected: d,
                    found: vector.len(),
                });
            }
            Some(_) => {}
        }
        let key = token.to_lowercase();
        if table.vectors.contains_key(&key) {
            log::warn!("word vectors, line {line_no}: duplicate token `{key}`, keeping the later row");
        }
        table.vectors.insert(key, vector);
    }
    if table.is_empty() {
        return Err(Error::Input("word-vector file has no rows".into()));
    }
    Ok(table)
}

/// Mean of the name's token vectors.
pub fn entity_vector(name: &str, table: &WordVectorTable) -> Vec<f64> {
    let tokens = text::tokenize(name);
    let tokens = if tokens.is_empty() {
        vec![name.to_string()]
    } else {
        tokens
    };
    let mut out = vec![0.0; table.dim()];
    for t in &tokens {
        for (o, v) in out.iter_mut().zip(table.vector(t).iter()) {
            *o += v;
        }
    }
    let n = tokens.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    out
}

/// Vectors for every entity of a graph, indexed by id.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityTable {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl EntityTable {
    pub fn build(kg: &KnowledgeGraph, table: &WordVectorTable) -> Self {
        let vectors = (0..kg.entity_count())
            .map(|i| entity_vector(kg.entity_name(EntityId(i)), table))
            .collect();
        Self {
            dim: table.dim(),
            vectors,
        }
    }

    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("entity vectors differ in length".into()));
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, id: EntityId) -> &[f64] {
        &self.vectors[id.0]
    }
}

/// Initial supernode state: the arithmetic mean of its members' vectors.
pub fn supernode_init(node: &Supernode, entities: &EntityTable) -> Vec<f64> {
    let mut sum = vec![0.0; entities.dim()];
    for &m in &node.members {
        for (s, v) in sum.iter_mut().zip(entities.get(m)) {
            *s += v;
        }
    }
    let n = node.members.len() as f64;
    sum.iter_mut().for_each(|v| *v /= n);
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::RelationId;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn two_rows_of_three() {
        let t = load_word_vectors("a 1 2 3\nb 4 5 6\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("b").unwrap(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn dimension_error_names_the_line() {
        match load_word_vectors("a 1 2 3\nb 4 5\n") {
            Err(Error::Dimension { line, expected, found }) => {
                assert_eq!((line, expected, found), (2, 3, 2))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_and_duplicates() {
        let t = load_word_vectors("2 2\nA 1 1\na 2 2\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("a").unwrap(), &[2.0, 2.0]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(load_word_vectors("").is_err());
        assert!(matches!(
            load_word_vectors("a 1 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn large_file_rows_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut src = String::new();
        let mut rows = Vec::new();
        for i in 0..1000 {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cells: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            src.push_str(&format!("tok{i} {}\n", cells.join(" ")));
            rows.push(v);
        }
        let t = load_word_vectors(&src).unwrap();
        // independent re-parse of each line
        for (i, line) in src.lines().enumerate() {
            let parsed: Vec<f64> = line.split(' ').skip(1).map(|x| x.parse().unwrap()).collect();
            assert_eq!(t.get(&format!("tok{i}")).unwrap(), parsed.as_slice());
            assert_eq!(parsed, rows[i]);
        }
    }

    #[test]
    fn entity_vector_means() {
        let t = load_word_vectors("vin 1 2\ndiesel 3 6\n").unwrap();
        assert_eq!(entity_vector("Vin", &t), vec![1.0, 2.0]);
        assert_eq!(entity_vector("Vin Diesel", &t), vec![2.0, 4.0]);
    }

    #[test]
    fn oov_is_deterministic_and_small() {
        let t = WordVectorTable::new(150);
        let a = entity_vector("zzyzx", &t);
        assert_eq!(a, entity_vector("zzyzx", &t));
        assert_ne!(a, entity_vector("qwerty", &t));
        assert!(a.iter().all(|v| v.abs() <= 0.5 / 150.0));
    }

    fn node(members: Vec<usize>) -> Supernode {
        Supernode {
            id: 0,
            members: members.into_iter().map(EntityId).collect(),
            relation: RelationId(0),
            anchors: vec![],
        }
    }

    #[test]
    fn singleton_and_pair() {
        let ents = EntityTable::from_vectors(vec![vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(supernode_init(&node(vec![1]), &ents), vec![3.0, 4.0]);
        assert_eq!(supernode_init(&node(vec![0, 1]), &ents), vec![2.0, 1.0]);
    }

    proptest! {
        #[test]
        fn mean_matches_naive_sum_and_is_permutation_invariant(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vecs: Vec<Vec<f64>> = (0..7).map(|_| (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
            let ents = EntityTable::from_vectors(vecs.clone()).unwrap();
            let mut members: Vec<usize> = (0..7).collect();
            let h = supernode_init(&node(members.clone()), &ents);
            for k in 0..6 {
                let naive = (vecs[0][k] + vecs[1][k] + vecs[2][k] + vecs[3][k] + vecs[4][k] + vecs[5][k] + vecs[6][k]) / 7.0;
                prop_assert!((h[k] - naive).abs() < 1e-12);
            }
            members.shuffle(&mut rng);
            let mut shuffled = node(vec![]);
            shuffled.members = members.into_iter().map(EntityId).collect();
            let h2 = supernode_init(&shuffled, &ents);
            for k in 0..6 { prop_assert!((h[k] - h2[k]).abs() < 1e-12); }
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let max_norm = vecs.iter().map(|v| norm(v)).fold(0.0, f64::max);
            prop_assert!(norm(&h) <= max_norm + 1e-12);
        }
    }
}
