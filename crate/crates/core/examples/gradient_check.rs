//! Compare the hand-written backward passes of the relation classifier and
//! the answer selector against central finite differences.
//!
//! ```text
//! cargo run -p kgqa --example gradient_check -- [seeds]
//! ```

use kgqa::embedding::WordVectorTable;
use kgqa::nn::{grad_check, Matrix, Parameters};
use kgqa::rcnn::{rcnn_backward, rcnn_forward, rcnn_loss, RcnnConfig, RcnnParams, Vocabulary};
use kgqa::selector::{selection_loss, selection_loss_and_grad, SelectorConfig, SelectorParams};
use kgqa::text::tokenize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOLERANCE: f64 = 1e-4;

fn main() -> kgqa::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let dim = 8;
    let question = tokenize("which films did <ENT> direct");

    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };

        let mut table = WordVectorTable::new(dim);
        for t in &question {
            table.insert(t, random(dim))?;
        }
        let vocab = Vocabulary::build([question.as_slice()]);
        let params = RcnnParams::init(&vocab, &table, RcnnConfig { context_dim: 5, hidden_dim: 6 }, 4, seed);
        let ids = vocab.encode(&question);
        let target = (seed % 4) as usize;
        let cache = rcnn_forward(&params, &ids)?;
        let mut grads = params.zeros_like();
        rcnn_backward(&params, &cache, target, 1.0, &mut grads);
        let rcnn = grad_check(|p: &RcnnParams| rcnn_loss(p, &ids, target).unwrap_or(f64::NAN), &params, &grads, TOLERANCE);

        let selector = SelectorParams::init(dim, SelectorConfig { hidden_dim: 6 }, seed);
        let inputs = table.sequence(&question);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| random(dim)).collect();
        let h = Matrix::from_rows(&rows)?;
        let (_, sgrads) = selection_loss_and_grad(&selector, &inputs, &h, 2)?;
        let sel = grad_check(|p: &SelectorParams| selection_loss(p, &inputs, &h, 2).unwrap_or(f64::NAN), &selector, &sgrads, TOLERANCE);

        println!(
            "seed {seed}: classifier {} coords, max rel err {:.2e} {}; selector {} coords, max rel err {:.2e} {}",
            rcnn.checked,
            rcnn.max_rel_error,
            if rcnn.passed() { "ok" } else { "FAIL" },
            sel.checked,
            sel.max_rel_error,
            if sel.passed() { "ok" } else { "FAIL" },
        );
    }
    Ok(())
}
