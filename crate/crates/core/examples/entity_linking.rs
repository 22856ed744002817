//! Dictionary entity linking: longest non-overlapping name matches, alias
//! resolution, and the masked question the classifier and selector read.
//!
//! ```text
//! cargo run -p kgqa --example entity_linking -- "who directed the dark knight"
//! ```

use kgqa::kg::load_triples;
use kgqa::linking::analyze_question;

const TRIPLES: &str = "\
The Dark Knight\tdirected_by\tChristopher Nolan
The Dark Knight\tstarred_actors\tChristian Bale
The Dark Knight Rises\tdirected_by\tChristopher Nolan
The Dark Knight Rises\tstarred_actors\tTom Hardy
Inception\tdirected_by\tChristopher Nolan
Inception\tstarred_actors\tTom Hardy
Dunkirk\tstarred_actors\tTom Hardy
Dunkirk\trelease_year\t2017
";

const ALIASES: &str = "\
Christopher Nolan\tNolan
The Dark Knight\tTDK
";

fn main() -> kgqa::Result<()> {
    let mut kg = load_triples(TRIPLES)?;
    kg.add_aliases(ALIASES)?;

    let from_args: Vec<String> = std::env::args().skip(1).collect();
    let questions: Vec<String> = if from_args.is_empty() {
        [
            "Who directed The Dark Knight Rises?",
            "who starred in TDK",
            "which films did Nolan and Tom Hardy make together",
            "what came out in 2017",
            "who directed the prestige",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    } else {
        vec![from_args.join(" ")]
    };

    for q in &questions {
        println!("question: {q}");
        match analyze_question(q, &kg) {
            Ok(linked) => {
                for m in &linked.mentions {
                    println!(
                        "  tokens {}..{} `{}` -> {}",
                        m.start,
                        m.end,
                        m.surface,
                        kg.entity_name(m.entity)
                    );
                }
                println!("  masked: {}", linked.masked.join(" "));
            }
            Err(e) => println!("  {e}"),
        }
    }

    // Names typed outside a question go through the resolver, which also
    // suggests close spellings.
    for name in ["tdk", "Inceptoin"] {
        match kg.resolve_entity(name) {
            Ok(id) => println!("resolve `{name}` -> {}", kg.entity_name(id)),
            Err(e) => println!("resolve `{name}`: {e}"),
        }
    }
    Ok(())
}
