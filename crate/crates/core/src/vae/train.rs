use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{write_checkpoint, CheckpointHeader};
use super::model::{one_hot_batch, standard_normal, Hyperparams, VaeParams};
use crate::data::Grid;
use crate::error::{Error, Result};
use crate::nn::Adam;
use crate::preprocess::{canvas_grid, CANVAS_CELLS};
use crate::seed::sub_seed;

/// Largest number of corpus grids scored when no validation set is given.
const FALLBACK_VALIDATION: usize = 512;

#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    /// Receives `last.ckpt` every epoch and `best.ckpt` on improvement.
    pub checkpoint_dir: Option<PathBuf>,
    /// JSON-lines training log, one record per epoch.
    pub log_path: Option<PathBuf>,
    /// Stop early once validation accuracy reaches this value.
    pub target_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub batches: usize,
    pub loss: f64,
    pub loss_median: f64,
    pub recon: f64,
    pub kl: f64,
    pub l2: f64,
    pub val_accuracy: f64,
    pub best: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub stopped_early: bool,
}

impl TrainingLog {
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    }
}

/// Mini-batch training of the VAE on raw grids (canonicalized here).
///
/// Returns the parameters of the epoch with the best validation
/// reconstruction accuracy (deterministic decoding).
pub fn train(corpus: &[Grid], validation: &[Grid], h: &Hyperparams, opts: &TrainOptions) -> Result<(VaeParams, TrainingLog)> {
    h.validate()?;
    if corpus.is_empty() {
        return Err(Error::Training {
            epoch: 0,
            batch: 0,
            reason: "empty training corpus".into(),
        });
    }
    let labels: Vec<u8> = corpus.iter().flat_map(|g| canvas_grid(g).cells().to_vec()).collect();
    let val_canvases: Vec<Grid> = if validation.is_empty() {
        corpus.iter().take(FALLBACK_VALIDATION).map(canvas_grid).collect()
    } else {
        validation.iter().map(canvas_grid).collect()
    };
    let val_refs: Vec<&Grid> = val_canvases.iter().collect();

    if let Some(dir) = &opts.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut log_file = match &opts.log_path {
        Some(p) => Some(fs::File::create(p).map_err(|e| Error::io(p, e))?),
        None => None,
    };

    let mut params = VaeParams::new(h)?;
    let mut opt = Adam::<f32>::new(h.learning_rate);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(sub_seed(h.seed, "reparameterize", 0));
    let mut log = TrainingLog::default();
    let mut best = params.clone();
    let mut best_acc = f64::NEG_INFINITY;
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut batch_labels = Vec::with_capacity(h.batch_size * CANVAS_CELLS);

    for epoch in 1..=h.epochs {
        let started = Instant::now();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(sub_seed(h.seed, "shuffle", epoch as u64)));
        let mut sums = [0.0f64; 4];
        let mut batch_losses = Vec::new();
        for (bi, chunk) in order.chunks(h.batch_size).enumerate() {
            batch_labels.clear();
            for &i in chunk {
                batch_labels.extend_from_slice(&labels[i * CANVAS_CELLS..(i + 1) * CANVAS_CELLS]);
            }
            let x = one_hot_batch::<f32>(&batch_labels);
            let eps = standard_normal::<f32>(&mut noise_rng, h.latent_dim, chunk.len());
            let (terms, grad) = params.loss_and_grad(x.view(), &batch_labels, Some(eps.view()), h);
            if !terms.total.is_finite() {
                return Err(Error::Training {
                    epoch,
                    batch: bi,
                    reason: format!("non-finite loss {terms:?}"),
                });
            }
            let grads: Vec<Vec<f32>> = grad.params().iter().map(|p| p.data.to_vec()).collect();
            opt.step(params.params_mut(), grads.iter().map(Vec::as_slice).collect());

            let w = chunk.len() as f64;
            sums[0] += terms.total * w;
            sums[1] += terms.recon * w;
            sums[2] += terms.kl * w;
            sums[3] += terms.l2 * w;
            batch_losses.push(terms.total);
            if bi % 100 == 0 {
                log::debug!("epoch {epoch} batch {bi}: loss {:.4} (recon {:.4}, kl {:.4})", terms.total, terms.recon, terms.kl);
            }
        }
        let n = corpus.len() as f64;
        let val_accuracy = super::canvas_reconstruction_accuracy::<ChaCha8Rng>(&params, &val_refs, None);
        let improved = val_accuracy > best_acc;
        if improved {
            best_acc = val_accuracy;
            best = params.clone();
            log.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let record = EpochRecord {
            epoch,
            batches: batch_losses.len(),
            loss: sums[0] / n,
            loss_median: median(&mut batch_losses),
            recon: sums[1] / n,
            kl: sums[2] / n,
            l2: sums[3] / n,
            val_accuracy,
            best: improved,
            seconds: started.elapsed().as_secs_f64(),
        };
        log::info!(
            "epoch {epoch}: loss {:.4} recon {:.4} kl {:.3} val_acc {:.4}{} ({:.0}s)",
            record.loss,
            record.recon,
            record.kl,
            val_accuracy,
            if improved { " *" } else { "" },
            record.seconds
        );
        if let Some(f) = log_file.as_mut() {
            let line = serde_json::to_string(&record).expect("records serialize");
            writeln!(f, "{line}").map_err(|e| Error::io(opts.log_path.clone().unwrap_or_default(), e))?;
        }
        if let Some(dir) = &opts.checkpoint_dir {
            let mut metrics = BTreeMap::new();
            metrics.insert("loss".to_string(), record.loss);
            metrics.insert("val_accuracy".to_string(), val_accuracy);
            write_checkpoint(dir.join("last.ckpt"), &params, &CheckpointHeader::new(&params, h, epoch, metrics.clone()))?;
            if improved {
                write_checkpoint(dir.join("best.ckpt"), &params, &CheckpointHeader::new(&params, h, epoch, metrics))?;
            }
        }
        log.records.push(record);
        if opts.target_accuracy.is_some_and(|t| val_accuracy >= t) {
            log.stopped_early = true;
            break;
        }
        if since_best >= h.patience {
            log.stopped_early = true;
            log::info!("no improvement for {} epochs; stopping", h.patience);
            break;
        }
    }
    log.best_val_accuracy = best_acc;
    Ok((best, log))
}
