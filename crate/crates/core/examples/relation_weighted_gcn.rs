//! Supernode embeddings before and after one relation-weighted propagation
//! step, under a peaked relation distribution and under uniform weights.
//!
//! ```text
//! cargo run -p kgqa --example relation_weighted_gcn
//! ```

use kgqa::embedding::{load_word_vectors, supernode_init, EntityTable};
use kgqa::fixtures::TOY_MOVIES;
use kgqa::gcn::propagate;
use kgqa::kg::load_triples;
use kgqa::linking::extract_subgraph;
use kgqa::rcnn::{relation_weights, WeightMode};
use kgqa::summary::summarize;

// Two-dimensional vectors make the averaging easy to follow by hand.
const VECTORS: &str = "\
a 1.0 0.0
b 0.8 0.2
c 0.0 1.0
1 0.5 0.5
4 -1.0 0.0
5 0.0 -1.0
6 0.3 0.3
7 -0.5 0.5
";

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:+.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> kgqa::Result<()> {
    let kg = load_triples(TOY_MOVIES)?;
    let table = load_word_vectors(VECTORS)?;
    let entities = EntityTable::build(&kg, &table);

    let anchors = vec![kg.resolve_entity("A")?, kg.resolve_entity("C")?];
    let summary = summarize(&extract_subgraph(&kg, &anchors)?)?;
    print!("{}", summary.display(&kg));

    let inits: Vec<Vec<f64>> = summary.supernodes.iter().map(|s| supernode_init(s, &entities)).collect();
    println!("\ninitial states (member means):");
    for (node, h) in summary.supernodes.iter().zip(&inits) {
        println!("  [{}] {}", node.id, fmt(h));
    }

    // Relation order in the graph: written_by, directed_by.
    let peaked = [0.9, 0.1];
    for (label, mode) in [("classifier probabilities [0.9, 0.1]", WeightMode::Rcnn), ("uniform", WeightMode::Uniform)] {
        let weights = relation_weights(&peaked, mode);
        let h = propagate(&summary, &inits, &entities, &weights)?;
        println!("\nafter propagation, {label}:");
        for node in &summary.supernodes {
            println!("  [{}] {}", node.id, fmt(h.row(node.id)));
        }
    }
    Ok(())
}
