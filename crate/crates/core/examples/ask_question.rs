//! Train on synthetic data, save the model, load it back and answer
//! questions with a full explanation of each step.
//!
//! ```text
//! cargo run --release -p kgqa --example ask_question -- "who directed <some movie>"
//! ```

use kgqa::checkpoint::{load_model, save_model, ModelFile};
use kgqa::pipeline::{answer_question, train_system, AnswerMode, QaSystem, TrainConfig};
use kgqa::synth::{generate_synthetic, SynthConfig};

fn main() -> kgqa::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let data = generate_synthetic(&SynthConfig::default())?;
    let config = TrainConfig::default();
    let (system, _) = train_system(data.kg.clone(), data.vectors.clone(), &data.train, &data.dev, &config)?;

    let dir = std::env::temp_dir().join(format!("kgqa-ask-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| kgqa::Error::io(&dir, e))?;
    let path = dir.join("model.json");
    save_model(&path, &ModelFile::new(&system.kg, config, system.rcnn.clone(), system.selector.clone(), None))?;
    let file = load_model(&path)?;
    file.check_graph(&data.kg)?;
    let loaded = QaSystem::new(data.kg.clone(), data.vectors.clone(), file.rcnn, file.selector)?;
    let _ = std::fs::remove_dir_all(&dir);

    let from_args: Vec<String> = std::env::args().skip(1).collect();
    let questions: Vec<String> = if from_args.is_empty() {
        data.test.iter().step_by(97).take(3).map(|q| q.question.clone()).collect()
    } else {
        vec![from_args.join(" ")]
    };
    for q in &questions {
        println!("Q: {q}");
        match answer_question(&loaded, q, AnswerMode::default()) {
            Ok(answer) => {
                print!("{}", answer.explain(&loaded.kg));
                println!("A: {}\n", answer.names.join(", "));
            }
            Err(e) => println!("error: {e}\n"),
        }
    }
    Ok(())
}
