//! Shared mini-batch SGD loop with validation-based early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nn::{clip_grad_norm, sgd_step, Parameters, SgdConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches, measured before each update.
    pub train_loss: f64,
    pub dev_metric: Option<f64>,
    pub dev_loss: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Runs SGD over `n_examples` examples.
///
/// `batch_grad` receives the current parameters, the batch indices and a zeroed
/// gradient buffer; it must accumulate the batch-mean gradient into the buffer
/// and return the summed (not averaged) batch loss. `validate` returns
/// `(metric, loss)` on held-out data, higher metric is better; when it is
/// `None` the final parameters are kept.
///
/// On return `params` holds the best validated parameters: highest metric,
/// lowest loss among equals. Training stops once `patience` epochs pass
/// without a new best under that same ordering.
pub fn fit<P, G, V>(
    params: &mut P,
    n_examples: usize,
    config: &SgdConfig,
    mut batch_grad: G,
    mut validate: Option<V>,
) -> Result<TrainingLog>
where
    P: Parameters,
    G: FnMut(&P, &[usize], &mut P) -> Result<f64>,
    V: FnMut(&P) -> (f64, f64),
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n_examples).collect();
    let mut grads = params.zeros_like();
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, f64, P)> = None;
    let mut stale = 0usize;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            for t in grads.tensors_mut() {
                t.fill(0.0);
            }
            total += batch_grad(params, batch, &mut grads)?;
            clip_grad_norm(&mut grads, config.clip_norm);
            sgd_step(params, &grads, config)?;
        }
        let train_loss = total / n_examples.max(1) as f64;
        let mut record = EpochRecord {
            epoch,
            train_loss,
            dev_metric: None,
            dev_loss: None,
        };
        if let Some(validate) = validate.as_mut() {
            let (metric, loss) = validate(params);
            record.dev_metric = Some(metric);
            record.dev_loss = Some(loss);
            let better = best
                .as_ref()
                .map_or(true, |b| metric > b.0 || (metric == b.0 && loss < b.1));
            if better {
                best = Some((metric, loss, params.clone()));
                log.best_epoch = epoch;
                stale = 0;
            } else {
                stale += 1;
            }
            log::info!(
                "epoch {epoch}: train loss {train_loss:.5}, dev metric {metric:.4}, dev loss {loss:.5}"
            );
        } else {
            log.best_epoch = epoch;
            log::info!("epoch {epoch}: train loss {train_loss:.5}");
        }
        log.epochs.push(record);
        if stale >= config.patience && config.patience > 0 {
            log.stopped_early = true;
            break;
        }
    }
    if let Some((_, _, p)) = best {
        *params = p;
    }
    Ok(log)
}
