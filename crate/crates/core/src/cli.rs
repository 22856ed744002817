//! Command-line front end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::checkpoint::{load_model, save_model, ModelFile};
use crate::dataset::{parse_qa_jsonl, parse_relation_labels, parse_wikimovies, to_jsonl, QaExample};
use crate::embedding::{load_word_vectors, WordVectorTable};
use crate::error::{read_to_string, write_string, Error, Result};
use crate::eval::evaluate;
use crate::kg::{load_triples, KnowledgeGraph};
use crate::linking::{analyze_question, extract_subgraph};
use crate::pipeline::{
    answer_question, relation_labels, train_answer_selector, train_relation_classifier, AnswerMode,
    QaSystem, TrainConfig,
};
use crate::rcnn::WeightMode;
use crate::summary::{summarize, verify_grouping};
use crate::synth::{generate_synthetic, SynthConfig};

/// Contents of a `--config` file. Every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generator: SynthConfig,
    pub training: TrainConfig,
}

#[derive(Parser, Debug)]
#[command(name = "kgqa", version, about = "Knowledge-graph question answering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config file with optional `generator` and `training` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Triple file: head TAB relation TAB tail per line.
    #[arg(long)]
    kg: Option<PathBuf>,
    /// Alias file: canonical name TAB alias per line.
    #[arg(long)]
    aliases: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ModeArgs {
    /// Score every subgraph node on its own instead of summarizing.
    #[arg(long)]
    no_summarization: bool,
    /// Weigh every relation 1 instead of using classifier probabilities.
    #[arg(long)]
    uniform_relation_weights: bool,
}

impl ModeArgs {
    fn mode(&self) -> AnswerMode {
        AnswerMode {
            summarization: !self.no_summarization,
            weights: if self.uniform_relation_weights {
                WeightMode::Uniform
            } else {
                WeightMode::Rcnn
            },
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic graph, word vectors and question splits.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Load, deduplicate and normalize a triple file.
    BuildKg {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train the relation classifier, then the answer selector.
    Train {
        /// Directory written by `generate`; supplies defaults for the paths below.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Relation-label JSONL for the classifier instead of the QA labels.
        #[arg(long)]
        relation_labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Train the selector against uniform relation weights.
        #[arg(long)]
        uniform_relation_weights: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Score a trained model on a question file.
    Eval {
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// The test file is `question TAB answer, answer` lines.
        #[arg(long)]
        wikimovies: bool,
        /// Keep only questions with at least two gold answers.
        #[arg(long)]
        multi_answer_only: bool,
        #[command(flatten)]
        mode: ModeArgs,
        /// Per-question records as JSON lines.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Answer one question.
    Ask {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
        /// Print mentions, candidates, relation weights and the top three candidates.
        #[arg(long)]
        explain: bool,
        #[arg(required = true, trailing_var_arg = true)]
        question: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Show the summary graph for a question or a list of entities.
    Summarize {
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma-separated entity names, instead of linking a question.
        #[arg(long, value_delimiter = ',')]
        entities: Vec<String>,
        #[arg(trailing_var_arg = true)]
        question: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit status: 0 on success, 1 on failure, 2 on usage errors.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => serde_json::from_str(&read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
    }
}

fn emit_report(common: &Common, report: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &common.report {
        Some(p) => write_string(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve(explicit: &Option<PathBuf>, data: &Option<PathBuf>, file: &str, what: &str) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    match data {
        Some(d) => Ok(d.join(file)),
        None => Err(Error::Config(format!("missing --{what} (or --data)"))),
    }
}

fn load_graph(graph: &GraphArgs, data: &Option<PathBuf>) -> Result<KnowledgeGraph> {
    let path = resolve(&graph.kg, data, "kg.tsv", "kg")?;
    let mut kg = load_triples(&read_to_string(&path)?)?;
    if let Some(a) = &graph.aliases {
        kg.add_aliases(&read_to_string(a)?)?;
    }
    Ok(kg)
}

fn load_vectors(path: &Path) -> Result<WordVectorTable> {
    load_word_vectors(&read_to_string(path)?)
}

fn load_system(graph: &GraphArgs, data: &Option<PathBuf>, model: &Path, vectors: &Option<PathBuf>) -> Result<(QaSystem, ModelFile)> {
    let kg = load_graph(graph, data)?;
    let file = load_model(model)?;
    file.check_graph(&kg)?;
    let vec_path = match (vectors, &file.word_vectors) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => PathBuf::from(v),
        (None, None) => return Err(Error::Config("model names no word-vector file; pass --vectors".into())),
    };
    let table = load_vectors(&vec_path)?;
    let system = QaSystem::new(kg, table, file.rcnn.clone(), file.selector.clone())?;
    Ok((system, file))
}

fn relation_histogram(kg: &KnowledgeGraph) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for t in kg.triples() {
        *out.entry(kg.relation_name(t.relation).to_string()).or_insert(0) += 1;
    }
    out
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { out, seed, common } => {
            let mut cfg = load_config(common.config.as_deref())?.generator;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let data = generate_synthetic(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_string(out.join("kg.tsv"), &data.kg.to_triple_file())?;
            write_string(out.join("vectors.txt"), &data.vectors_text)?;
            write_string(out.join("train.jsonl"), &to_jsonl(&data.train)?)?;
            write_string(out.join("dev.jsonl"), &to_jsonl(&data.dev)?)?;
            write_string(out.join("test.jsonl"), &to_jsonl(&data.test)?)?;
            write_string(out.join("relation_labels.jsonl"), &to_jsonl(&relation_labels(&data.train)?)?)?;
            log::info!("wrote synthetic data to {}", out.display());
            emit_report(
                &common,
                &json!({
                    "command": "generate",
                    "seed": cfg.seed,
                    "config": cfg,
                    "entities": data.kg.entity_count(),
                    "relations": data.kg.relation_count(),
                    "triples": data.kg.triples().len(),
                    "questions": {"train": data.train.len(), "dev": data.dev.len(), "test": data.test.len()},
                    "multi_answer_fraction": data.multi_answer_fraction(),
                }),
            )
        }
        Command::BuildKg {
            triples,
            aliases,
            out,
            common,
        } => {
            let kg = load_graph(&GraphArgs { kg: Some(triples), aliases }, &None)?;
            if let Some(o) = &out {
                write_string(o, &kg.to_triple_file())?;
            }
            emit_report(
                &common,
                &json!({
                    "command": "build-kg",
                    "entities": kg.entity_count(),
                    "relations": kg.relation_names(),
                    "triples": kg.triples().len(),
                    "aliases": kg.aliases().len(),
                    "triples_per_relation": relation_histogram(&kg),
                }),
            )
        }
        Command::Train {
            data,
            graph,
            vectors,
            train,
            dev,
            relation_labels: label_file,
            out,
            seed,
            uniform_relation_weights,
            common,
        } => {
            let mut cfg = load_config(common.config.as_deref())?.training;
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            if uniform_relation_weights {
                cfg.weight_mode = WeightMode::Uniform;
            }
            let kg = load_graph(&graph, &data)?;
            let vec_path = resolve(&vectors, &data, "vectors.txt", "vectors")?;
            let table = load_vectors(&vec_path)?;
            let train_set = parse_qa_jsonl(&read_to_string(resolve(&train, &data, "train.jsonl", "train")?)?)?;
            let dev_path = dev.clone().or_else(|| data.as_ref().map(|d| d.join("dev.jsonl")));
            let dev_set = match dev_path {
                Some(p) if p.exists() || dev.is_some() => parse_qa_jsonl(&read_to_string(p)?)?,
                _ => Vec::new(),
            };
            let train_labels = match &label_file {
                Some(p) => parse_relation_labels(&read_to_string(p)?)?,
                None => relation_labels(&train_set)?,
            };
            let dev_labels = relation_labels(&dev_set)?;
            log::info!("training relation classifier on {} questions", train_labels.len());
            let (rcnn, rcnn_log, rcnn_acc, dropped) =
                train_relation_classifier(&kg, &table, &train_labels, &dev_labels, &cfg)?;
            log::info!("training answer selector on {} questions", train_set.len());
            let (selector, sel_log, hits, skipped, dropped_s) =
                train_answer_selector(&kg, &table, &rcnn, &train_set, &dev_set, &cfg)?;
            let model = ModelFile::new(&kg, cfg.clone(), rcnn, selector, Some(vec_path.to_string_lossy().into_owned()));
            save_model(&out, &model)?;
            log::info!("saved model to {}", out.display());
            emit_report(
                &common,
                &json!({
                    "command": "train",
                    "seed": cfg.selector_training.seed,
                    "config": cfg,
                    "n_train": train_set.len(),
                    "n_dev": dev_set.len(),
                    "relation_classifier": {
                        "epochs": rcnn_log.epochs.len(),
                        "best_epoch": rcnn_log.best_epoch,
                        "dev_accuracy": rcnn_acc,
                        "final_train_loss": rcnn_log.epochs.last().map(|e| e.train_loss),
                    },
                    "selector": {
                        "epochs": sel_log.epochs.len(),
                        "best_epoch": sel_log.best_epoch,
                        "dev_hits_at_1": hits,
                        "final_train_loss": sel_log.epochs.last().map(|e| e.train_loss),
                        "skipped_no_gold": skipped,
                    },
                    "dropped_questions": dropped.max(dropped_s),
                }),
            )
        }
        Command::Eval {
            data,
            graph,
            model,
            vectors,
            test,
            wikimovies,
            multi_answer_only,
            mode,
            predictions,
            common,
        } => {
            let (system, file) = load_system(&graph, &data, &model, &vectors)?;
            let text = read_to_string(resolve(&test, &data, "test.jsonl", "test")?)?;
            let questions: Vec<QaExample> = if wikimovies {
                parse_wikimovies(&text)?
            } else {
                parse_qa_jsonl(&text)?
            };
            let mode = mode.mode();
            let result = evaluate(&system, &questions, mode, multi_answer_only)?;
            if let Some(p) = &predictions {
                write_string(p, &to_jsonl(&result.records)?)?;
            }
            let m = &result.metrics;
            log::info!("hits@1 {:.4}, recall {:.4} over {} questions", m.hits_at_1, m.recall, m.n_questions);
            emit_report(
                &common,
                &json!({
                    "command": "eval",
                    "hits_at_1": m.hits_at_1,
                    "recall": m.recall,
                    "recall_all": m.recall_all,
                    "n_questions": m.n_questions,
                    "n_errors": m.n_errors,
                    "relation_accuracy": result.relation_accuracy,
                    "mode": mode.label(),
                    "multi_answer_only": multi_answer_only,
                    "seed": file.seed,
                    "config": file.config,
                }),
            )
        }
        Command::Ask {
            graph,
            model,
            vectors,
            mode,
            explain,
            question,
            common,
        } => {
            let (system, _) = load_system(&graph, &None, &model, &vectors)?;
            let question = question.join(" ");
            let answer = answer_question(&system, &question, mode.mode())?;
            if explain {
                print!("{}", answer.explain(&system.kg));
            }
            println!("{}", answer.names.join(", "));
            if common.report.is_some() {
                emit_report(
                    &common,
                    &json!({
                        "command": "ask",
                        "question": question,
                        "answers": answer.names,
                        "probability": answer.prediction.probability,
                        "mode": mode.mode().label(),
                    }),
                )?;
            }
            Ok(())
        }
        Command::Summarize {
            graph,
            entities,
            question,
            common,
        } => {
            let kg = load_graph(&graph, &None)?;
            let ids = if !entities.is_empty() {
                entities
                    .iter()
                    .map(|e| kg.resolve_entity(e.trim()))
                    .collect::<Result<Vec<_>>>()?
            } else if !question.is_empty() {
                let q = question.join(" ");
                let linked = analyze_question(&q, &kg)?;
                if linked.entities.is_empty() {
                    return Err(Error::NoEntity(q));
                }
                linked.entities
            } else {
                return Err(Error::Config("give a question or --entities".into()));
            };
            let summary = summarize(&extract_subgraph(&kg, &ids)?)?;
            print!("{}", summary.display(&kg));
            let check = verify_grouping(&summary, &kg);
            println!(
                "grouping check: {}/{} supernodes match the graph",
                check.checks.len() - check.mismatches(),
                check.checks.len()
            );
            if common.report.is_some() {
                let nodes: Vec<_> = summary
                    .supernodes
                    .iter()
                    .map(|s| {
                        json!({
                            "id": s.id,
                            "relation": kg.relation_name(s.relation),
                            "anchors": s.anchors.iter().map(|&a| kg.entity_name(a)).collect::<Vec<_>>(),
                            "members": s.members.iter().map(|&m| kg.entity_name(m)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                emit_report(
                    &common,
                    &json!({
                        "command": "summarize",
                        "question_entities": ids.iter().map(|&e| kg.entity_name(e)).collect::<Vec<_>>(),
                        "supernodes": nodes,
                        "grouping_accuracy": check.accuracy(),
                    }),
                )?;
            }
            if check.passed() {
                Ok(())
            } else {
                Err(Error::Data("summary grouping does not match the graph".into()))
            }
        }
    }
}
