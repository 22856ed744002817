//! The two ablations: answering without summarization (singleton candidates)
//! and answering with a selector trained on uniform relation weights.
//!
//! ```text
//! cargo run --release -p kgqa --example ablations -- [seed]
//! ```

use kgqa::eval::evaluate;
use kgqa::pipeline::{train_answer_selector, train_system, AnswerMode, QaSystem, TrainConfig};
use kgqa::rcnn::WeightMode;
use kgqa::synth::{generate_synthetic, SynthConfig};

fn main() -> kgqa::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let data = generate_synthetic(&SynthConfig { seed, ..SynthConfig::default() })?;
    let config = TrainConfig::default().with_seed(seed);
    let (system, _) = train_system(data.kg.clone(), data.vectors.clone(), &data.train, &data.dev, &config)?;

    println!("summarization, multi-answer test questions:");
    for (label, summarization) in [("with summarization", true), ("singleton candidates", false)] {
        let mode = AnswerMode { summarization, ..AnswerMode::default() };
        let m = evaluate(&system, &data.test, mode, true)?.metrics;
        println!("  {label:<22} hits@1 {:.3}  recall {:.3}  (n={})", m.hits_at_1, m.recall, m.n_questions);
    }

    // The uniform selector is trained from scratch on top of the same frozen
    // classifier, so only the relation weighting differs.
    let uniform_config = TrainConfig { weight_mode: WeightMode::Uniform, ..config };
    let (selector, ..) =
        train_answer_selector(&system.kg, &system.table, &system.rcnn, &data.train, &data.dev, &uniform_config)?;
    let uniform = QaSystem::new(system.kg.clone(), system.table.clone(), system.rcnn.clone(), selector)?;

    println!("relation weighting, all test questions:");
    for (label, sys, weights) in [
        ("classifier weights", &system, WeightMode::Rcnn),
        ("uniform weights", &uniform, WeightMode::Uniform),
    ] {
        let mode = AnswerMode { weights, ..AnswerMode::default() };
        let m = evaluate(sys, &data.test, mode, false)?.metrics;
        println!("  {label:<22} hits@1 {:.3}  recall {:.3}  (n={})", m.hits_at_1, m.recall, m.n_questions);
    }
    Ok(())
}
