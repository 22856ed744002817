//! Train only the relation classifier on synthetic questions and inspect its
//! predictions, including for questions it has never seen.
//!
//! ```text
//! cargo run --release -p kgqa --example rcnn_relation_classifier -- [seed]
//! ```

use kgqa::linking::analyze_question;
use kgqa::nn::argmax;
use kgqa::kg::RelationId;
use kgqa::pipeline::{relation_labels, train_relation_classifier, TrainConfig};
use kgqa::synth::{generate_synthetic, SynthConfig};

fn main() -> kgqa::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let data = generate_synthetic(&SynthConfig { seed, ..SynthConfig::default() })?;
    let config = TrainConfig::default().with_seed(seed);
    let (model, log, dev_accuracy, dropped) = train_relation_classifier(
        &data.kg,
        &data.vectors,
        &relation_labels(&data.train)?,
        &relation_labels(&data.dev)?,
        &config,
    )?;
    println!(
        "{} epochs (best {}), vocabulary {} tokens, dev accuracy {:.3}, {dropped} questions dropped",
        log.epochs.len(),
        log.best_epoch,
        model.vocab.len(),
        dev_accuracy.unwrap_or(0.0)
    );

    let test = relation_labels(&data.test)?;
    let mut correct = 0;
    for l in &test {
        let linked = analyze_question(&l.question, &data.kg)?;
        let best = argmax(&model.predict(&linked.masked)?);
        if data.kg.relation_name(RelationId(best)) == l.relation {
            correct += 1;
        }
    }
    println!("test accuracy {:.3} over {} questions\n", correct as f64 / test.len() as f64, test.len());

    // A few test questions plus paraphrases outside the template set.
    let movie = data.kg.entity_name(data.kg.triples()[0].head).to_string();
    let mut probes: Vec<String> = data.test.iter().take(4).map(|q| q.question.clone()).collect();
    probes.push(format!("tell me who wrote {movie}"));
    probes.push(format!("{movie} was released when"));
    for q in probes {
        let linked = analyze_question(&q, &data.kg)?;
        let probs = model.predict(&linked.masked)?;
        let mut ranked: Vec<(usize, f64)> = probs.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<String> = ranked
            .iter()
            .take(2)
            .map(|&(r, p)| format!("{} {p:.3}", data.kg.relation_name(RelationId(r))))
            .collect();
        println!("{:<60} {}", linked.masked.join(" "), top.join(", "));
    }
    Ok(())
}
