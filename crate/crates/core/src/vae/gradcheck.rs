//! Finite-difference check of the analytic VAE gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{one_hot_batch, standard_normal, Hyperparams, Vae};
use crate::error::Result;
use crate::preprocess::{CANVAS, CANVAS_CELLS};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorCheck {
    pub name: String,
    /// Entries compared against central differences.
    pub checked: usize,
    /// Entries skipped because `+h` and `-h` straddled an activation kink.
    pub skipped: usize,
    pub max_rel_err: f64,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Blocky random label canvases (3x3 blocks of 10x10 cells).
pub fn blocky_labels(rng: &mut impl Rng, batch: usize) -> Vec<u8> {
    let mut labels = Vec::with_capacity(batch * CANVAS_CELLS);
    for _ in 0..batch {
        let colors: Vec<u8> = (0..9).map(|_| rng.random_range(0..10)).collect();
        for r in 0..CANVAS {
            for c in 0..CANVAS {
                labels.push(colors[(r / 10) * 3 + c / 10]);
            }
        }
    }
    labels
}

/// Compares backprop gradients of the full loss (f64) with central
/// differences of step `step` on randomly sampled parameter entries.
///
/// Each round draws a fresh single-grid input and noise sample; entries
/// whose perturbation changes any ReLU or logvar-clamp state are skipped.
/// Stops once every tensor has `per_tensor` (or all of its) entries checked.
pub fn check_gradients(h: &Hyperparams, seed: u64, step: f64, per_tensor: usize, max_rounds: usize) -> Result<Vec<TensorCheck>> {
    let mut vae = Vae::<f64>::new(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in vae.params_mut() {
        for v in p.iter_mut() {
            *v += rng.random_range(-0.05..0.05);
        }
    }
    let mut report: Vec<TensorCheck> = vae
        .params()
        .iter()
        .map(|p| TensorCheck {
            name: p.name.clone(),
            checked: 0,
            skipped: 0,
            max_rel_err: 0.0,
        })
        .collect();
    for _ in 0..max_rounds {
        let lens: Vec<usize> = vae.params().iter().map(|p| p.data.len()).collect();
        if report.iter().zip(&lens).all(|(r, &len)| r.checked >= per_tensor.min(len)) {
            break;
        }
        let labels = blocky_labels(&mut rng, 1);
        let x = one_hot_batch::<f64>(&labels);
        let eps = standard_normal::<f64>(&mut rng, h.latent_dim, 1);
        let (_, grad) = vae.loss_and_grad(x.view(), &labels, Some(eps.view()), h);
        let analytic: Vec<Vec<f64>> = grad.params().iter().map(|p| p.data.to_vec()).collect();
        for (t, entry) in report.iter_mut().enumerate() {
            for _ in 0..4 {
                if entry.checked >= per_tensor.min(lens[t]) {
                    break;
                }
                let i = rng.random_range(0..lens[t]);
                let orig = vae.params_mut()[t][i];
                vae.params_mut()[t][i] = orig + step;
                let up = vae.loss_value(x.view(), &labels, Some(eps.view()), h).total;
                let up_pattern = vae.relu_pattern(x.view(), Some(eps.view()));
                vae.params_mut()[t][i] = orig - step;
                let down = vae.loss_value(x.view(), &labels, Some(eps.view()), h).total;
                let down_pattern = vae.relu_pattern(x.view(), Some(eps.view()));
                vae.params_mut()[t][i] = orig;
                if up_pattern != down_pattern {
                    entry.skipped += 1;
                    continue;
                }
                let numeric = (up - down) / (2.0 * step);
                entry.max_rel_err = entry.max_rel_err.max(relative_error(analytic[t][i], numeric));
                entry.checked += 1;
            }
        }
    }
    Ok(report)
}
