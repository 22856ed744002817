//! Seeded synthetic movie knowledge graph with templated questions.
//!
//! Movies link to persons, years and genres. Questions come from
//! per-relation templates in both directions (ask about a movie, or ask for
//! the movies sharing a value) plus two-entity templates whose answers are
//! intersections. Name tokens are drawn around one mean per entity type so
//! that entity vectors carry their type; template words are independent.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::QaExample;
use crate::embedding::{load_word_vectors, WordVectorTable, DEFAULT_DIM};
use crate::error::{Error, Result};
use crate::kg::{KgBuilder, KnowledgeGraph};
use crate::text::tokenize;

/// Lower bound on the share of questions with two or more answers.
pub const MIN_MULTI_ANSWER_FRACTION: f64 = 0.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub movies: usize,
    pub persons: usize,
    pub years: usize,
    pub genres: usize,
    /// How many of the built-in relations to use, in the order
    /// directed_by, written_by, starred_actors, release_year, has_genre.
    pub relations: usize,
    /// Cap on templates drawn per relation and direction.
    pub templates_per_relation: usize,
    pub single_entity_questions: usize,
    pub two_entity_questions: usize,
    pub multi_answer_fraction: f64,
    pub dim: usize,
    pub train_fraction: f64,
    pub dev_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            movies: 70,
            persons: 100,
            years: 18,
            genres: 12,
            relations: 5,
            templates_per_relation: 4,
            single_entity_questions: 2000,
            two_entity_questions: 500,
            multi_answer_fraction: 0.7,
            dim: DEFAULT_DIM,
            train_fraction: 0.7,
            dev_fraction: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Movie,
    Person,
    Year,
    Genre,
    Template,
}

struct RelationSpec {
    name: &'static str,
    value: Class,
    min: usize,
    max: usize,
    forward: &'static [&'static str],
    reverse: &'static [&'static str],
    /// Two movies, answer is the intersection of their values.
    pair_forward: &'static [&'static str],
    /// Two values, answer is the movies linked to both.
    pair_reverse: &'static [&'static str],
}

const RELATIONS: [RelationSpec; 5] = [
    RelationSpec {
        name: "directed_by",
        value: Class::Person,
        min: 1,
        max: 3,
        forward: &[
            "who directed {}",
            "who was the director of {}",
            "{} was directed by who",
            "who is the director of the movie {}",
        ],
        reverse: &[
            "which movies did {} direct",
            "what films were directed by {}",
            "{} directed which movies",
            "which films was {} the director of",
        ],
        pair_forward: &["who directed both {} and {}", "who was the director of {} and {}"],
        pair_reverse: &["which movies did {} and {} direct together", "what films were directed by both {} and {}"],
    },
    RelationSpec {
        name: "written_by",
        value: Class::Person,
        min: 1,
        max: 4,
        forward: &[
            "who wrote {}",
            "who was the writer of {}",
            "{} was written by who",
            "who is the screenwriter of the film {}",
        ],
        reverse: &[
            "which movies did {} write",
            "what films were written by {}",
            "{} wrote which movies",
            "which films was {} the writer of",
        ],
        pair_forward: &["who wrote both {} and {}", "who was the writer of {} and {}"],
        pair_reverse: &["which movies did {} and {} write together", "what films were written by both {} and {}"],
    },
    RelationSpec {
        name: "starred_actors",
        value: Class::Person,
        min: 1,
        max: 4,
        forward: &[
            "who starred in {}",
            "who acted in {}",
            "who are the actors in the movie {}",
            "{} starred who",
        ],
        reverse: &[
            "which movies did {} star in",
            "what films did {} act in",
            "{} appeared in which movies",
            "which films was {} an actor in",
        ],
        pair_forward: &["who starred in both {} and {}", "who acted in {} and {}"],
        pair_reverse: &["which movies did {} and {} star in together", "what films did both {} and {} act in"],
    },
    RelationSpec {
        name: "release_year",
        value: Class::Year,
        min: 1,
        max: 1,
        forward: &[
            "when was {} released",
            "what year was the movie {} released",
            "{} came out in which year",
            "in which year did the film {} come out",
        ],
        reverse: &[
            "which movies were released in {}",
            "what films came out in {}",
            "{} saw the release of which movies",
            "which films are from {}",
        ],
        pair_forward: &["what year were both {} and {} released"],
        pair_reverse: &[],
    },
    RelationSpec {
        name: "has_genre",
        value: Class::Genre,
        min: 1,
        max: 3,
        forward: &[
            "what genre is {}",
            "what kind of film is {}",
            "{} is which genre",
            "which genre does the movie {} belong to",
        ],
        reverse: &[
            "which movies are {} films",
            "what {} movies are there",
            "list {} films",
            "which films belong to the {} genre",
        ],
        pair_forward: &["what genre are both {} and {}", "which genre do {} and {} share"],
        pair_reverse: &["which movies are both {} and {}", "what films are {} and {} at once"],
    },
];

const FIRST_NAMES: [&str; 16] = [
    "Anna", "Boris", "Clara", "Dmitri", "Elena", "Felix", "Greta", "Hugo", "Irene", "Jonas",
    "Katja", "Lars", "Mara", "Nils", "Olga", "Paul",
];
const LAST_NAMES: [&str; 16] = [
    "Berg", "Castell", "Dorn", "Eckert", "Falk", "Grau", "Holm", "Iversen", "Jansen", "Keller",
    "Lund", "Moser", "Nyberg", "Ostrow", "Pauly", "Rask",
];
const TITLE_WORDS: [&str; 12] = [
    "Silent", "Crimson", "Hollow", "Golden", "Broken", "Distant", "Frozen", "Hidden", "Burning",
    "Endless", "Wicked", "Velvet",
];
const TITLE_NOUNS: [&str; 12] = [
    "River", "Harbor", "Garden", "Mirror", "Empire", "Voyage", "Orchard", "Lantern", "Canyon",
    "Meadow", "Tide", "Signal",
];
const GENRES: [&str; 16] = [
    "comedy", "drama", "thriller", "horror", "western", "romance", "documentary", "animation",
    "musical", "fantasy", "mystery", "adventure", "noir", "satire", "biopic", "crime",
];
const FIRST_YEAR: usize = 1980;
const MAX_YEARS: usize = 40;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.relations < 2 || self.relations > RELATIONS.len() {
            return fail(format!("relations must be between 2 and {}", RELATIONS.len()));
        }
        let total = self.movies + self.persons + self.years + self.genres;
        if total < 20 {
            return fail(format!("at least 20 entities are needed, the config asks for {total}"));
        }
        if self.movies < 2 {
            return fail("at least two movies are needed".into());
        }
        if self.templates_per_relation < 2 {
            return fail("at least two templates per relation are needed".into());
        }
        let limits = [
            ("persons", self.persons, FIRST_NAMES.len() * LAST_NAMES.len()),
            ("movies", self.movies, TITLE_WORDS.len() * TITLE_NOUNS.len()),
            ("genres", self.genres, GENRES.len()),
            ("years", self.years, MAX_YEARS),
        ];
        for (what, n, max) in limits {
            if n > max {
                return fail(format!("at most {max} {what} can be named, the config asks for {n}"));
            }
        }
        for spec in &RELATIONS[..self.relations] {
            let pool = self.class_size(spec.value);
            if spec.max > pool {
                return fail(format!(
                    "relation {} needs up to {} distinct values but only {pool} exist",
                    spec.name, spec.max
                ));
            }
        }
        if !(MIN_MULTI_ANSWER_FRACTION..=1.0).contains(&self.multi_answer_fraction) {
            return fail(format!(
                "multi_answer_fraction must lie in [{MIN_MULTI_ANSWER_FRACTION}, 1]"
            ));
        }
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        let splits_ok = self.train_fraction > 0.0
            && self.dev_fraction >= 0.0
            && self.train_fraction + self.dev_fraction < 1.0;
        if !splits_ok {
            return fail("train and dev fractions must be non-negative and leave room for test".into());
        }
        Ok(())
    }

    fn class_size(&self, class: Class) -> usize {
        match class {
            Class::Movie => self.movies,
            Class::Person => self.persons,
            Class::Year => self.years,
            Class::Genre => self.genres,
            Class::Template => 0,
        }
    }
}

/// Everything `generate` writes.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub kg: KnowledgeGraph,
    /// Word-vector file content; `vectors` is its parse.
    pub vectors_text: String,
    pub vectors: WordVectorTable,
    pub train: Vec<QaExample>,
    pub dev: Vec<QaExample>,
    pub test: Vec<QaExample>,
}

impl SyntheticData {
    pub fn all(&self) -> impl Iterator<Item = &QaExample> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }

    pub fn multi_answer_fraction(&self) -> f64 {
        let n = self.all().count();
        self.all().filter(|q| q.is_multi_answer()).count() as f64 / n.max(1) as f64
    }
}

fn names(rng: &mut ChaCha8Rng, a: &[&str], b: &[&str], n: usize) -> Vec<String> {
    let mut all: Vec<String> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| format!("{x} {y}")))
        .collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

fn fill(template: &str, names: &[&str]) -> String {
    let mut out = template.to_string();
    for n in names {
        out = out.replacen("{}", n, 1);
    }
    out
}

/// Candidate question before selection.
struct Candidate {
    question: String,
    entities: Vec<String>,
    relation: &'static str,
    answers: Vec<String>,
}

impl Candidate {
    fn into_example(self) -> QaExample {
        QaExample {
            question: self.question,
            entities: self.entities,
            relation: self.relation.to_string(),
            answers: self.answers,
        }
    }
}

/// Keeps `n` candidates, `fraction` of them multi-answer where possible.
fn pick(
    mut pool: Vec<Candidate>,
    n: usize,
    fraction: f64,
    what: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    if pool.len() < n {
        return Err(Error::Config(format!(
            "only {} distinct {what} questions exist, {n} requested",
            pool.len()
        )));
    }
    pool.shuffle(rng);
    let (mut multi, mut single): (Vec<_>, Vec<_>) = pool.into_iter().partition(|c| c.answers.len() >= 2);
    let want_multi = ((n as f64 * fraction).round() as usize).min(multi.len());
    let want_single = (n - want_multi).min(single.len());
    let want_multi = n - want_single;
    multi.truncate(want_multi);
    single.truncate(want_single);
    multi.extend(single);
    Ok(multi)
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<SyntheticData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let movies = names(&mut rng, &TITLE_WORDS, &TITLE_NOUNS, config.movies);
    let persons = names(&mut rng, &FIRST_NAMES, &LAST_NAMES, config.persons);
    let years: Vec<String> = (0..config.years).map(|i| (FIRST_YEAR + i).to_string()).collect();
    let genres: Vec<String> = GENRES[..config.genres].iter().map(|g| g.to_string()).collect();
    let pool_of = |c: Class| -> &Vec<String> {
        match c {
            Class::Person => &persons,
            Class::Year => &years,
            Class::Genre => &genres,
            Class::Movie | Class::Template => &movies,
        }
    };
    let specs = &RELATIONS[..config.relations];

    // relation index -> movie -> sorted values
    let mut links: Vec<BTreeMap<&str, BTreeSet<&str>>> = vec![BTreeMap::new(); specs.len()];
    let mut builder = KgBuilder::new();
    for m in &movies {
        for (ri, spec) in specs.iter().enumerate() {
            let k = rng.gen_range(spec.min..=spec.max);
            let values: Vec<&String> = pool_of(spec.value).choose_multiple(&mut rng, k).collect();
            for v in values {
                builder.add(m, spec.name, v);
                links[ri].entry(m.as_str()).or_default().insert(v.as_str());
            }
        }
    }
    let kg = builder.build()?;

    let k = config.templates_per_relation;
    let mut single_pool = Vec::new();
    let mut pair_pool = Vec::new();
    for (ri, spec) in specs.iter().enumerate() {
        let mut inverse: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (m, vs) in &links[ri] {
            for v in vs {
                inverse.entry(v).or_default().insert(m);
            }
        }
        let forward: Vec<(&str, &BTreeSet<&str>)> = links[ri].iter().map(|(a, b)| (*a, b)).collect();
        let reverse: Vec<(&str, &BTreeSet<&str>)> = inverse.iter().map(|(a, b)| (*a, b)).collect();
        for (templates, table) in [(spec.forward, &forward), (spec.reverse, &reverse)] {
            for &(anchor, answers) in table.iter() {
                for t in templates.iter().take(k) {
                    single_pool.push(Candidate {
                        question: fill(t, &[anchor]),
                        entities: vec![anchor.to_string()],
                        relation: spec.name,
                        answers: answers.iter().map(|s| s.to_string()).collect(),
                    });
                }
            }
        }
        for (templates, table) in [(spec.pair_forward, &forward), (spec.pair_reverse, &reverse)] {
            if templates.is_empty() {
                continue;
            }
            for (i, &(a, sa)) in table.iter().enumerate() {
                for &(b, sb) in &table[i + 1..] {
                    let shared: Vec<String> = sa.intersection(sb).map(|s| s.to_string()).collect();
                    if shared.is_empty() {
                        continue;
                    }
                    for t in templates.iter().take(k) {
                        pair_pool.push(Candidate {
                            question: fill(t, &[a, b]),
                            entities: vec![a.to_string(), b.to_string()],
                            relation: spec.name,
                            answers: shared.clone(),
                        });
                    }
                }
            }
        }
    }
    let mut seen = HashSet::new();
    single_pool.retain(|c| seen.insert(c.question.clone()));
    pair_pool.retain(|c| seen.insert(c.question.clone()));

    let frac = config.multi_answer_fraction;
    let mut chosen = pick(single_pool, config.single_entity_questions, frac, "single-entity", &mut rng)?;
    chosen.extend(pick(pair_pool, config.two_entity_questions, frac, "two-entity", &mut rng)?);
    let n = chosen.len();
    let multi = chosen.iter().filter(|c| c.answers.len() >= 2).count();
    if n > 0 && (multi as f64) < MIN_MULTI_ANSWER_FRACTION * n as f64 {
        return Err(Error::Config(format!(
            "only {multi} of {n} questions can have several answers with this graph"
        )));
    }
    chosen.shuffle(&mut rng);
    let n_train = (n as f64 * config.train_fraction).round() as usize;
    let n_dev = ((n as f64 * config.dev_fraction).round() as usize).min(n - n_train);
    let mut examples: Vec<QaExample> = chosen.into_iter().map(Candidate::into_example).collect();
    let test = examples.split_off(n_train + n_dev);
    let dev = examples.split_off(n_train);
    let train = examples;

    let vectors_text = word_vectors(&mut rng, config.dim, &movies, &persons, &years, &genres, specs);
    let vectors = load_word_vectors(&vectors_text)?;
    Ok(SyntheticData {
        kg,
        vectors_text,
        vectors,
        train,
        dev,
        test,
    })
}

/// One Gaussian mean per token class, per-token noise around it.
fn word_vectors(
    rng: &mut ChaCha8Rng,
    dim: usize,
    movies: &[String],
    persons: &[String],
    years: &[String],
    genres: &[String],
    specs: &[RelationSpec],
) -> String {
    let mut classes: BTreeMap<String, Class> = BTreeMap::new();
    for spec in specs {
        let templates = [spec.forward, spec.reverse, spec.pair_forward, spec.pair_reverse];
        for t in templates.iter().flat_map(|t| t.iter()) {
            for tok in tokenize(&t.replace("{}", " ")) {
                classes.insert(tok, Class::Template);
            }
        }
    }
    for (names, class) in [
        (movies, Class::Movie),
        (persons, Class::Person),
        (years, Class::Year),
        (genres, Class::Genre),
    ] {
        for n in names {
            for tok in tokenize(n) {
                classes.insert(tok, class);
            }
        }
    }
    let mean_dist = Normal::new(0.0, 0.25).expect("valid");
    let noise = Normal::new(0.0, 0.1).expect("valid");
    let means: BTreeMap<Class, Vec<f64>> = [Class::Movie, Class::Person, Class::Year, Class::Genre, Class::Template]
        .into_iter()
        .map(|c| (c, (0..dim).map(|_| mean_dist.sample(rng)).collect()))
        .collect();
    // template words are unrelated to each other, so they get no shared mean
    let word = Normal::new(0.0, 0.3).expect("valid");
    let mut out = String::new();
    for (tok, class) in &classes {
        out.push_str(tok);
        for m in &means[class] {
            let v = match class {
                Class::Template => word.sample(rng),
                _ => m + noise.sample(rng),
            };
            out.push_str(&format!(" {v:.6}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::EntityId;

    fn small() -> SynthConfig {
        SynthConfig {
            movies: 30,
            persons: 40,
            years: 8,
            genres: 6,
            single_entity_questions: 300,
            two_entity_questions: 60,
            dim: 12,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate_synthetic(&small()).unwrap();
        let b = generate_synthetic(&small()).unwrap();
        assert_eq!(a.kg.to_triple_file(), b.kg.to_triple_file());
        assert_eq!(a.vectors_text, b.vectors_text);
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let c = generate_synthetic(&SynthConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a.train, c.train);
    }

    /// Recomputes every answer set by scanning the triple list.
    #[test]
    fn answers_match_the_graph() {
        let d = generate_synthetic(&small()).unwrap();
        let kg = &d.kg;
        let hood = |e: EntityId, r: &str| -> BTreeSet<String> {
            kg.triples()
                .iter()
                .filter(|t| kg.relation_name(t.relation) == r)
                .filter_map(|t| {
                    if t.head == e {
                        Some(kg.entity_name(t.tail).to_string())
                    } else if t.tail == e {
                        Some(kg.entity_name(t.head).to_string())
                    } else {
                        None
                    }
                })
                .collect()
        };
        for q in d.all() {
            let mut expected: Option<BTreeSet<String>> = None;
            for e in &q.entities {
                let id = kg.entity_id(e).unwrap();
                let h = hood(id, &q.relation);
                expected = Some(match expected {
                    None => h,
                    Some(acc) => acc.intersection(&h).cloned().collect(),
                });
            }
            let got: BTreeSet<String> = q.answers.iter().cloned().collect();
            assert_eq!(got, expected.unwrap(), "{}", q.question);
        }
    }

    #[test]
    fn counts_splits_and_multi_answer_share() {
        let cfg = small();
        let d = generate_synthetic(&cfg).unwrap();
        let n = cfg.single_entity_questions + cfg.two_entity_questions;
        assert_eq!(d.all().count(), n);
        assert_eq!(d.train.len(), (n as f64 * 0.7).round() as usize);
        assert_eq!(d.dev.len(), (n as f64 * 0.1).round() as usize);
        let strings: HashSet<&str> = d.all().map(|q| q.question.as_str()).collect();
        assert_eq!(strings.len(), n);
        assert!(d.multi_answer_fraction() >= MIN_MULTI_ANSWER_FRACTION);
        assert_eq!(d.all().filter(|q| q.entities.len() == 2).count(), cfg.two_entity_questions);
    }

    #[test]
    fn default_benchmark_shape() {
        let d = generate_synthetic(&SynthConfig::default()).unwrap();
        assert_eq!(d.kg.relation_count(), 5);
        assert!((190..=200).contains(&d.kg.entity_count()), "{}", d.kg.entity_count());
        assert_eq!(d.all().count(), 2500);
        assert!(d.multi_answer_fraction() >= 0.6);
        assert_eq!(d.vectors.dim(), 150);
    }

    #[test]
    fn template_words_never_occur_in_names() {
        let d = generate_synthetic(&small()).unwrap();
        let mut template_words = HashSet::new();
        for spec in &RELATIONS {
            for t in [spec.forward, spec.reverse, spec.pair_forward, spec.pair_reverse].concat() {
                template_words.extend(tokenize(&t.replace("{}", " ")));
            }
        }
        for i in 0..d.kg.entity_count() {
            for tok in tokenize(d.kg.entity_name(EntityId(i))) {
                assert!(!template_words.contains(&tok), "{tok}");
            }
        }
    }

    #[test]
    fn infeasible_configs() {
        let bad = [
            SynthConfig { relations: 1, ..small() },
            SynthConfig { movies: 5, persons: 5, years: 2, genres: 2, ..small() },
            SynthConfig { persons: 3, ..small() },
            SynthConfig { single_entity_questions: 100_000, ..small() },
            SynthConfig { multi_answer_fraction: 0.3, ..small() },
        ];
        for cfg in bad {
            assert!(matches!(generate_synthetic(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }
}
