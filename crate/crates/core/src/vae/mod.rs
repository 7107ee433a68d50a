//! The variational autoencoder: encoder `f`, decoder `g`, loss, training and
//! checkpoint I/O.

mod checkpoint;
mod gradcheck;
mod model;
mod train;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, NUM_COLORS};
use crate::error::{Error, Result};
use crate::preprocess::{CanonicalGrid, ColorDistributionGrid, CANVAS, CANVAS_CELLS};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CheckpointHeader, LayerShape, CHECKPOINT_MAGIC};
pub use model::{
    argmax_labels, kl_divergence, one_hot_batch, softmax_channels, standard_normal, Hyperparams, LossTerms, ParamRef,
    Vae, VaeParams, LOGVAR_MAX, LOGVAR_MIN,
};
pub use gradcheck::{blocky_labels, check_gradients, relative_error, TensorCheck};
pub use train::{train, EpochRecord, TrainOptions, TrainingLog};

use model::{column_vec, columns_to_array, sample_probs};

/// Inference batch size.
const INFER_BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentDistribution {
    pub mu: Vec<f32>,
    pub logvar: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentVector {
    pub z: Vec<f32>,
}

impl LatentVector {
    pub fn norm(&self) -> f64 {
        self.z.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt()
    }
}

fn check_tensor(x: &CanonicalGrid) -> Result<()> {
    if x.tensor.shape() != [NUM_COLORS, CANVAS, CANVAS] {
        return Err(Error::Shape(format!(
            "encoder expects [10, 30, 30], got {:?}",
            x.tensor.shape()
        )));
    }
    Ok(())
}

pub fn encode(params: &VaeParams, x: &CanonicalGrid) -> Result<LatentDistribution> {
    check_tensor(x)?;
    let batch = x
        .tensor
        .clone()
        .insert_axis(ndarray::Axis(1));
    let (mu, logvar) = params.encode_batch(batch.view());
    Ok(LatentDistribution {
        mu: column_vec(&mu, 0),
        logvar: column_vec(&logvar, 0),
    })
}

/// Batched encoding of 30x30 canvases (see [`crate::preprocess::canvas_grid`]).
pub fn encode_canvases(params: &VaeParams, canvases: &[&Grid]) -> Vec<LatentDistribution> {
    let mut out = Vec::with_capacity(canvases.len());
    for chunk in canvases.chunks(INFER_BATCH) {
        let labels: Vec<u8> = chunk.iter().flat_map(|g| g.cells().iter().copied()).collect();
        let x = one_hot_batch::<f32>(&labels);
        let (mu, logvar) = params.encode_batch(x.view());
        for j in 0..chunk.len() {
            out.push(LatentDistribution {
                mu: column_vec(&mu, j),
                logvar: column_vec(&logvar, j),
            });
        }
    }
    out
}

/// `z = mu` without a generator, otherwise `z = mu + exp(logvar / 2) * eps`.
pub fn reparameterize<R: Rng + ?Sized>(d: &LatentDistribution, rng: Option<&mut R>) -> LatentVector {
    let z = match rng {
        None => d.mu.clone(),
        Some(rng) => d
            .mu
            .iter()
            .zip(&d.logvar)
            .map(|(&m, &lv)| {
                let lv = (lv as f64).clamp(LOGVAR_MIN, LOGVAR_MAX);
                let eps: f64 = rng.sample(rand_distr::StandardNormal);
                (m as f64 + (lv / 2.0).exp() * eps) as f32
            })
            .collect(),
    };
    LatentVector { z }
}

pub fn decode(params: &VaeParams, z: &LatentVector) -> Result<ColorDistributionGrid> {
    Ok(decode_many(params, std::slice::from_ref(z))?.remove(0))
}

pub fn decode_many(params: &VaeParams, zs: &[LatentVector]) -> Result<Vec<ColorDistributionGrid>> {
    if let Some(bad) = zs.iter().find(|z| z.z.len() != params.latent_dim) {
        return Err(Error::Shape(format!(
            "latent vector has {} entries, decoder expects {}",
            bad.z.len(),
            params.latent_dim
        )));
    }
    let mut out = Vec::with_capacity(zs.len());
    for chunk in zs.chunks(INFER_BATCH) {
        let cols: Vec<&[f32]> = chunk.iter().map(|z| z.z.as_slice()).collect();
        let probs = params.decode_batch(columns_to_array(&cols).view());
        for j in 0..chunk.len() {
            out.push(ColorDistributionGrid::new(sample_probs(&probs, j))?);
        }
    }
    Ok(out)
}

/// Loss terms for one sample given the decoder output.
pub fn loss(
    recon: &ColorDistributionGrid,
    target: &CanonicalGrid,
    d: &LatentDistribution,
    params: &VaeParams,
    h: &Hyperparams,
) -> Result<LossTerms> {
    check_tensor(target)?;
    let labels = target.labels();
    let mut ce = 0.0;
    for r in 0..CANVAS {
        for c in 0..CANVAS {
            let p = recon.tensor[[labels.get(r, c) as usize, r, c]] as f64;
            ce -= p.max(f64::MIN_POSITIVE).ln();
        }
    }
    let recon_term = ce / CANVAS_CELLS as f64;
    let mu = Array2::from_shape_vec((d.mu.len(), 1), d.mu.clone()).map_err(|e| Error::Shape(e.to_string()))?;
    let lv = Array2::from_shape_vec((d.logvar.len(), 1), d.logvar.clone()).map_err(|e| Error::Shape(e.to_string()))?;
    let kl = kl_divergence(mu.view(), lv.view());
    let l2 = h.l2_penalty * params.mean_squared_weight();
    Ok(LossTerms {
        total: recon_term + h.beta * kl + l2,
        recon: recon_term,
        kl,
        l2,
    })
}

/// Reconstructs canvases through encode -> reparameterize -> decode -> argmax.
pub fn reconstruct_canvases<R: Rng + ?Sized>(params: &VaeParams, canvases: &[&Grid], mut rng: Option<&mut R>) -> Vec<Grid> {
    let dists = encode_canvases(params, canvases);
    let zs: Vec<LatentVector> = dists.iter().map(|d| reparameterize(d, rng.as_deref_mut())).collect();
    decode_many(params, &zs)
        .expect("latent size comes from the same network")
        .iter()
        .map(ColorDistributionGrid::argmax)
        .collect()
}

fn canvas_accuracy(pred: &Grid, target: &Grid) -> f64 {
    let hits = pred.cells().iter().zip(target.cells()).filter(|(a, b)| a == b).count();
    hits as f64 / CANVAS_CELLS as f64
}

/// Mean fraction of the 900 cells reconstructed with the right color.
/// `rng = None` uses `z = mu`.
pub fn reconstruction_accuracy<R: Rng + ?Sized>(params: &VaeParams, grids: &[CanonicalGrid], rng: Option<&mut R>) -> f64 {
    let targets: Vec<Grid> = grids.iter().map(CanonicalGrid::labels).collect();
    let refs: Vec<&Grid> = targets.iter().collect();
    canvas_reconstruction_accuracy(params, &refs, rng)
}

pub fn canvas_reconstruction_accuracy<R: Rng + ?Sized>(params: &VaeParams, canvases: &[&Grid], rng: Option<&mut R>) -> f64 {
    if canvases.is_empty() {
        return 0.0;
    }
    let recon = reconstruct_canvases(params, canvases, rng);
    recon.iter().zip(canvases).map(|(p, t)| canvas_accuracy(p, t)).sum::<f64>() / canvases.len() as f64
}

/// Per-pixel count of correct deterministic reconstructions, 30x30.
pub fn pixel_heatmap(params: &VaeParams, grids: &[CanonicalGrid]) -> Array2<u32> {
    let targets: Vec<Grid> = grids.iter().map(CanonicalGrid::labels).collect();
    let refs: Vec<&Grid> = targets.iter().collect();
    canvas_heatmap(params, &refs)
}

pub fn canvas_heatmap(params: &VaeParams, canvases: &[&Grid]) -> Array2<u32> {
    let recon = reconstruct_canvases::<rand_chacha::ChaCha8Rng>(params, canvases, None);
    heatmap_from_pairs(recon.iter().zip(canvases.iter().copied()))
}

/// Mean heatmap count over the outer `border`-cell frame and over the
/// central `center`x`center` square.
pub fn border_center_means(map: &Array2<u32>, border: usize, center: usize) -> (f64, f64) {
    let (h, w) = map.dim();
    let (mut edge, mut n_edge) = (0.0, 0usize);
    for ((r, c), &v) in map.indexed_iter() {
        if r < border || c < border || r >= h - border || c >= w - border {
            edge += v as f64;
            n_edge += 1;
        }
    }
    let (top, left) = ((h - center) / 2, (w - center) / 2);
    let mid = map.slice(ndarray::s![top..top + center, left..left + center]);
    (edge / n_edge as f64, mid.iter().map(|&v| v as f64).sum::<f64>() / (center * center) as f64)
}

pub fn heatmap_from_pairs<'a>(pairs: impl Iterator<Item = (&'a Grid, &'a Grid)>) -> Array2<u32> {
    let mut map = Array2::zeros((CANVAS, CANVAS));
    for (pred, target) in pairs {
        for r in 0..CANVAS {
            for c in 0..CANVAS {
                if pred.get(r, c) == target.get(r, c) {
                    map[[r, c]] += 1;
                }
            }
        }
    }
    map
}
