//! Summarize the candidate neighbourhood of one and of two question entities
//! in a hand-drawn movie graph, then check every supernode against the graph.
//!
//! ```text
//! cargo run -p kgqa --example summary_graph
//! ```

use kgqa::fixtures::TOY_MOVIES;
use kgqa::kg::load_triples;
use kgqa::linking::extract_subgraph;
use kgqa::summary::{singleton_candidates, summarize, verify_grouping};

fn main() -> kgqa::Result<()> {
    let kg = load_triples(TOY_MOVIES)?;
    println!("{} entities, {} triples\n", kg.entity_count(), kg.triples().len());

    for names in [&["C"][..], &["B"], &["A", "C"], &["A", "B", "C"]] {
        let ids = names
            .iter()
            .map(|n| kg.resolve_entity(n))
            .collect::<kgqa::Result<Vec<_>>>()?;
        let sub = extract_subgraph(&kg, &ids)?;
        let summary = summarize(&sub)?;
        let report = verify_grouping(&summary, &kg);
        println!("question entities {names:?}: {} supernodes", summary.len());
        print!("{}", summary.display(&kg));
        println!(
            "grouping check: {}/{} supernodes match the graph\n",
            report.checks.len() - report.mismatches(),
            report.checks.len()
        );
    }

    // Without summarization every neighbour is its own candidate.
    let sub = extract_subgraph(&kg, &[kg.resolve_entity("B")?])?;
    let singles = singleton_candidates(&sub)?;
    println!("no summarization, entity B: {} singleton candidates", singles.len());
    print!("{}", singles.display(&kg));
    Ok(())
}
