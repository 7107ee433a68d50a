use ndarray::{s, Array1, Array2, Array4, ArrayView2, ArrayView4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::NUM_COLORS;
use crate::error::{Error, Result};
use crate::nn::{
    cast, conv_out, deconv_out, flatten_features, relu_backward_inplace, relu_inplace, unflatten_features, Conv2d,
    ConvTranspose2d, Linear, Scalar,
};
use crate::preprocess::{CANVAS, CANVAS_CELLS};

pub const LOGVAR_MIN: f64 = -10.0;
pub const LOGVAR_MAX: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
    pub latent_dim: usize,
    /// Coefficient on the mean squared weight.
    pub l2_penalty: f64,
    /// KL weight. The default 1/900 weights the KL term against the summed
    /// (not averaged) per-cell cross-entropy; at 1.0 the latent collapses to
    /// the prior and every reconstruction is the background.
    pub beta: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            filters: 128,
            kernel: 4,
            stride: 2,
            latent_dim: 128,
            l2_penalty: 0.2,
            beta: 1.0 / CANVAS_CELLS as f64,
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 60,
            patience: 10,
            seed: 0,
        }
    }
}

impl Hyperparams {
    /// Spatial sizes through the encoder, starting at the canvas.
    pub fn encoder_trace(&self) -> Vec<usize> {
        let mut trace = vec![CANVAS];
        for _ in 0..3 {
            let last = *trace.last().expect("non-empty");
            if last < self.kernel {
                break;
            }
            trace.push(conv_out(last, self.kernel, self.stride));
        }
        trace
    }

    pub fn bottleneck(&self) -> usize {
        *self.encoder_trace().last().expect("non-empty")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.filters == 0 || self.latent_dim == 0 || self.batch_size == 0 {
            return bad("filters, latent_dim and batch_size must be positive".into());
        }
        if self.kernel == 0 || self.stride == 0 {
            return bad("kernel and stride must be positive".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        let trace = self.encoder_trace();
        if trace.len() != 4 {
            return bad(format!("kernel {} / stride {} collapse the canvas early: {trace:?}", self.kernel, self.stride));
        }
        let back = (0..3).fold(self.bottleneck(), |n, _| deconv_out(n, self.kernel, self.stride));
        if back != CANVAS {
            return bad(format!(
                "kernel {} / stride {} do not map the {}x{} bottleneck back to {CANVAS}x{CANVAS} (got {back})",
                self.kernel,
                self.stride,
                self.bottleneck(),
                self.bottleneck()
            ));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.l2_penalty < 0.0 || self.beta < 0.0 {
            return bad("learning_rate must be positive; l2_penalty and beta non-negative".into());
        }
        Ok(())
    }
}

/// Convolutional VAE: three strided convolutions down to a `filters x 2 x 2`
/// bottleneck, two affine heads for `(mu, logvar)`, and a mirrored decoder
/// ending in a per-cell softmax over the ten colors.
#[derive(Clone, Debug, PartialEq)]
pub struct Vae<T> {
    pub enc: [Conv2d<T>; 3],
    pub mu_head: Linear<T>,
    pub logvar_head: Linear<T>,
    pub dec_fc: Linear<T>,
    pub dec: [ConvTranspose2d<T>; 3],
    pub filters: usize,
    pub latent_dim: usize,
    pub bottleneck: usize,
}

pub type VaeParams = Vae<f32>;

/// Named parameter tensors in declaration (and checkpoint) order.
pub struct ParamRef<'a, T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [T],
    pub is_weight: bool,
}

impl<T: Scalar> Vae<T> {
    pub fn new(h: &Hyperparams) -> Result<Self> {
        h.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::sub_seed(h.seed, "vae-init", 0));
        let (f, k, s) = (h.filters, h.kernel, h.stride);
        let b = h.bottleneck();
        let flat = f * b * b;
        Ok(Vae {
            enc: [
                Conv2d::new(NUM_COLORS, f, k, s, 2.0, &mut rng),
                Conv2d::new(f, f, k, s, 2.0, &mut rng),
                Conv2d::new(f, f, k, s, 2.0, &mut rng),
            ],
            mu_head: Linear::new(flat, h.latent_dim, 1.0, &mut rng),
            logvar_head: Linear::new(flat, h.latent_dim, 0.1, &mut rng),
            dec_fc: Linear::new(h.latent_dim, flat, 2.0, &mut rng),
            dec: [
                ConvTranspose2d::new(f, f, k, s, 2.0, &mut rng),
                ConvTranspose2d::new(f, f, k, s, 2.0, &mut rng),
                ConvTranspose2d::new(f, NUM_COLORS, k, s, 1.0, &mut rng),
            ],
            filters: f,
            latent_dim: h.latent_dim,
            bottleneck: b,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Vae {
            enc: [self.enc[0].zeros_like(), self.enc[1].zeros_like(), self.enc[2].zeros_like()],
            mu_head: self.mu_head.zeros_like(),
            logvar_head: self.logvar_head.zeros_like(),
            dec_fc: self.dec_fc.zeros_like(),
            dec: [self.dec[0].zeros_like(), self.dec[1].zeros_like(), self.dec[2].zeros_like()],
            ..*self
        }
    }

    pub fn params(&self) -> Vec<ParamRef<'_, T>> {
        fn entry<'a, T>(name: String, shape: Vec<usize>, data: &'a [T], is_weight: bool) -> ParamRef<'a, T> {
            ParamRef {
                name,
                shape,
                data,
                is_weight,
            }
        }
        let mut out = Vec::with_capacity(18);
        for (i, l) in self.enc.iter().enumerate() {
            out.push(entry(format!("enc{}.weight", i + 1), l.weight_shape(), slice(&l.weight), true));
            out.push(entry(format!("enc{}.bias", i + 1), vec![l.bias.len()], bias(&l.bias), false));
        }
        for (name, l) in [("mu", &self.mu_head), ("logvar", &self.logvar_head), ("dec_fc", &self.dec_fc)] {
            out.push(entry(format!("{name}.weight"), l.weight.shape().to_vec(), slice(&l.weight), true));
            out.push(entry(format!("{name}.bias"), vec![l.bias.len()], bias(&l.bias), false));
        }
        for (i, l) in self.dec.iter().enumerate() {
            out.push(entry(format!("dec{}.weight", i + 1), l.weight_shape(), slice(&l.weight), true));
            out.push(entry(format!("dec{}.bias", i + 1), vec![l.bias.len()], bias(&l.bias), false));
        }
        out
    }

    /// Mutable parameter slices, same order as [`Vae::params`].
    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for l in self.enc.iter_mut() {
            out.push(l.weight.as_slice_mut().expect("contiguous"));
            out.push(l.bias.as_slice_mut().expect("contiguous"));
        }
        for l in [&mut self.mu_head, &mut self.logvar_head, &mut self.dec_fc] {
            out.push(l.weight.as_slice_mut().expect("contiguous"));
            out.push(l.bias.as_slice_mut().expect("contiguous"));
        }
        for l in self.dec.iter_mut() {
            out.push(l.weight.as_slice_mut().expect("contiguous"));
            out.push(l.bias.as_slice_mut().expect("contiguous"));
        }
        out
    }

    pub fn weight_count(&self) -> usize {
        self.params().iter().filter(|p| p.is_weight).map(|p| p.data.len()).sum()
    }

    pub fn cast<U: Scalar>(&self) -> Vae<U> {
        Vae {
            enc: self.enc.clone().map(|l| Conv2d {
                weight: l.weight.mapv(|v| cast(v.to_f64().expect("finite"))),
                bias: l.bias.mapv(|v| cast(v.to_f64().expect("finite"))),
                in_channels: l.in_channels,
                out_channels: l.out_channels,
                kernel: l.kernel,
                stride: l.stride,
            }),
            mu_head: cast_linear(&self.mu_head),
            logvar_head: cast_linear(&self.logvar_head),
            dec_fc: cast_linear(&self.dec_fc),
            dec: self.dec.clone().map(|l| ConvTranspose2d {
                weight: l.weight.mapv(|v| cast(v.to_f64().expect("finite"))),
                bias: l.bias.mapv(|v| cast(v.to_f64().expect("finite"))),
                in_channels: l.in_channels,
                out_channels: l.out_channels,
                kernel: l.kernel,
                stride: l.stride,
            }),
            filters: self.filters,
            latent_dim: self.latent_dim,
            bottleneck: self.bottleneck,
        }
    }

    /// Mean of squared weights (biases excluded).
    pub fn mean_squared_weight(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for p in self.params().into_iter().filter(|p| p.is_weight) {
            sum += p.data.iter().map(|v| v.to_f64().expect("finite").powi(2)).sum::<f64>();
            n += p.data.len();
        }
        sum / n as f64
    }

    pub fn encode_batch(&self, x: ArrayView4<T>) -> (Array2<T>, Array2<T>) {
        let enc = self.encoder_forward(x);
        (enc.mu, enc.logvar)
    }

    /// Returns per-cell probabilities `[10, batch, 30, 30]`.
    pub fn decode_batch(&self, z: ArrayView2<T>) -> Array4<T> {
        let dec = self.decoder_forward(z);
        softmax_channels(&dec.logits)
    }

    fn encoder_forward(&self, x: ArrayView4<T>) -> EncoderCache<T> {
        let mut cols = Vec::with_capacity(3);
        let mut acts: Vec<Array4<T>> = Vec::with_capacity(3);
        let mut input_dims = Vec::with_capacity(3);
        let mut cur = x.to_owned();
        for layer in &self.enc {
            input_dims.push((cur.dim().2, cur.dim().3));
            let (mut y, c) = layer.forward(cur.view());
            relu_inplace(&mut y);
            cols.push(c);
            acts.push(y.clone());
            cur = y;
        }
        let feat = flatten_features(cur.view());
        let mu = self.mu_head.forward(feat.view());
        let raw_logvar = self.logvar_head.forward(feat.view());
        let (lo, hi) = (cast::<T>(LOGVAR_MIN), cast::<T>(LOGVAR_MAX));
        let logvar = raw_logvar.mapv(|v| v.max(lo).min(hi));
        EncoderCache {
            cols,
            acts,
            input_dims,
            feat,
            mu,
            raw_logvar,
            logvar,
        }
    }

    fn decoder_forward(&self, z: ArrayView2<T>) -> DecoderCache<T> {
        let mut hidden = self.dec_fc.forward(z);
        relu_inplace(&mut hidden);
        let mut cur = unflatten_features(hidden.view(), self.filters, self.bottleneck, self.bottleneck);
        let mut xms = Vec::with_capacity(3);
        let mut acts = Vec::with_capacity(2);
        let mut input_dims = Vec::with_capacity(3);
        for (i, layer) in self.dec.iter().enumerate() {
            input_dims.push((cur.dim().2, cur.dim().3));
            let (mut y, xm) = layer.forward(cur.view());
            xms.push(xm);
            if i < 2 {
                relu_inplace(&mut y);
                acts.push(y.clone());
            }
            cur = y;
        }
        DecoderCache {
            z: z.to_owned(),
            hidden,
            xms,
            acts,
            input_dims,
            logits: cur,
        }
    }

    /// Full training step: forward with the given noise (`None` means
    /// `z = mu`), loss terms, and gradients for every parameter.
    pub fn loss_and_grad(&self, x: ArrayView4<T>, labels: &[u8], eps: Option<ArrayView2<T>>, h: &Hyperparams) -> (LossTerms, Vae<T>) {
        let batch = x.dim().1;
        assert_eq!(labels.len(), batch * CANVAS_CELLS, "one label per canvas cell");
        let enc = self.encoder_forward(x);
        let std = enc.logvar.mapv(|v| (v * cast(0.5)).exp());
        let z = match eps {
            Some(e) => &enc.mu + &(&std * &e),
            None => enc.mu.clone(),
        };
        let dec = self.decoder_forward(z.view());
        let (recon, dlogits) = cross_entropy_with_grad(&dec.logits, labels);

        let bt: T = cast(batch as f64);
        let beta: T = cast(h.beta);
        let half: T = cast(0.5);
        let kl = kl_divergence(enc.mu.view(), enc.logvar.view());
        let n_weights = self.weight_count();
        let l2 = h.l2_penalty * self.mean_squared_weight();
        let terms = LossTerms {
            recon,
            kl,
            l2,
            total: recon + h.beta * kl + l2,
        };

        let mut grad = self.zeros_like();

        // decoder
        let mut d = dlogits;
        for i in (0..3).rev() {
            if i < 2 {
                relu_backward_inplace(&mut d, &dec.acts[i]);
            }
            d = self.dec[i].backward(d.view(), &dec.xms[i], dec.input_dims[i], &mut grad.dec[i]);
        }
        let mut dh = flatten_features(d.view());
        relu_backward_inplace(&mut dh, &dec.hidden);
        let dz = self.dec_fc.backward(dh.view(), dec.z.view(), &mut grad.dec_fc);

        // reparameterization + KL
        let mut dmu = dz.clone();
        let mut dlogvar = match eps {
            Some(e) => &dz * &e * &std * half,
            None => Array2::zeros(dz.dim()),
        };
        dmu.zip_mut_with(&enc.mu, |g, &m| *g += beta * m / bt);
        ndarray::Zip::from(&mut dlogvar).and(&enc.logvar).and(&enc.raw_logvar).for_each(|g, &lv, &raw| {
            *g += beta * half * (lv.exp() - T::one()) / bt;
            if raw < cast(LOGVAR_MIN) || raw > cast(LOGVAR_MAX) {
                *g = T::zero();
            }
        });
        let mut dfeat = self.mu_head.backward(dmu.view(), enc.feat.view(), &mut grad.mu_head);
        dfeat += &self.logvar_head.backward(dlogvar.view(), enc.feat.view(), &mut grad.logvar_head);

        // encoder
        let mut d = unflatten_features(dfeat.view(), self.filters, self.bottleneck, self.bottleneck);
        for i in (0..3).rev() {
            relu_backward_inplace(&mut d, &enc.acts[i]);
            match self.enc[i].backward(d.view(), &enc.cols[i], enc.input_dims[i], &mut grad.enc[i], i > 0) {
                Some(dx) => d = dx,
                None => break,
            }
        }

        // L2 on weights
        let coeff: T = cast(2.0 * h.l2_penalty / n_weights as f64);
        let weights: Vec<Vec<T>> = self.params().iter().map(|p| if p.is_weight { p.data.to_vec() } else { Vec::new() }).collect();
        for (g, w) in grad.params_mut().into_iter().zip(weights) {
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi += coeff * wi;
            }
        }
        (terms, grad)
    }

    /// On/off state of every rectified unit for this input and noise. Two
    /// parameter settings with the same pattern lie on the same linear piece.
    pub fn relu_pattern(&self, x: ArrayView4<T>, eps: Option<ArrayView2<T>>) -> Vec<bool> {
        let enc = self.encoder_forward(x);
        let z = match eps {
            Some(e) => &enc.mu + &(enc.logvar.mapv(|v| (v * cast(0.5)).exp()) * e),
            None => enc.mu.clone(),
        };
        let dec = self.decoder_forward(z.view());
        let on = |v: &T| *v > T::zero();
        let mut pattern: Vec<bool> = enc.acts.iter().flat_map(|a| a.iter().map(on).collect::<Vec<_>>()).collect();
        pattern.extend(dec.hidden.iter().map(on));
        for a in &dec.acts {
            pattern.extend(a.iter().map(on));
        }
        let (lo, hi) = (cast::<T>(LOGVAR_MIN), cast::<T>(LOGVAR_MAX));
        pattern.extend(enc.raw_logvar.iter().map(|&v| v > lo && v < hi));
        pattern
    }

    /// Scalar loss only; used by finite-difference checks.
    pub fn loss_value(&self, x: ArrayView4<T>, labels: &[u8], eps: Option<ArrayView2<T>>, h: &Hyperparams) -> LossTerms {
        let enc = self.encoder_forward(x);
        let z = match eps {
            Some(e) => &enc.mu + &(enc.logvar.mapv(|v| (v * cast(0.5)).exp()) * e),
            None => enc.mu.clone(),
        };
        let probs = self.decode_batch(z.view());
        let recon = cross_entropy_from_probs(&probs, labels);
        let kl = kl_divergence(enc.mu.view(), enc.logvar.view());
        let l2 = h.l2_penalty * self.mean_squared_weight();
        LossTerms {
            recon,
            kl,
            l2,
            total: recon + h.beta * kl + l2,
        }
    }
}

fn cast_linear<T: Scalar, U: Scalar>(l: &Linear<T>) -> Linear<U> {
    Linear {
        weight: l.weight.mapv(|v| cast(v.to_f64().expect("finite"))),
        bias: l.bias.mapv(|v| cast(v.to_f64().expect("finite"))),
    }
}

fn slice<T>(a: &Array2<T>) -> &[T] {
    a.as_slice().expect("parameters are contiguous")
}

fn bias<T>(b: &Array1<T>) -> &[T] {
    b.as_slice().expect("parameters are contiguous")
}

struct EncoderCache<T> {
    cols: Vec<Array2<T>>,
    acts: Vec<Array4<T>>,
    input_dims: Vec<(usize, usize)>,
    feat: Array2<T>,
    mu: Array2<T>,
    raw_logvar: Array2<T>,
    logvar: Array2<T>,
}

struct DecoderCache<T> {
    z: Array2<T>,
    hidden: Array2<T>,
    xms: Vec<Array2<T>>,
    acts: Vec<Array4<T>>,
    input_dims: Vec<(usize, usize)>,
    logits: Array4<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub total: f64,
    pub recon: f64,
    pub kl: f64,
    pub l2: f64,
}

/// `-1/2 sum(1 + logvar - mu^2 - exp(logvar))`, averaged over the batch columns.
pub fn kl_divergence<T: Scalar>(mu: ArrayView2<T>, logvar: ArrayView2<T>) -> f64 {
    let batch = mu.ncols().max(1) as f64;
    let mut total = 0.0;
    ndarray::Zip::from(&mu).and(&logvar).for_each(|&m, &lv| {
        let (m, lv) = (m.to_f64().expect("finite"), lv.to_f64().expect("finite"));
        total += -0.5 * (1.0 + lv - m * m - lv.exp());
    });
    total / batch
}

/// Softmax over axis 0 of `[10, b, h, w]`.
pub fn softmax_channels<T: Scalar>(logits: &Array4<T>) -> Array4<T> {
    let (c, b, h, w) = logits.dim();
    let cells = b * h * w;
    let flat = logits.view().into_shape_with_order((c, cells)).expect("contiguous");
    let mut out = Array2::zeros((c, cells));
    for j in 0..cells {
        let col = flat.column(j);
        let m = col.fold(T::neg_infinity(), |a, &v| a.max(v));
        let mut sum = T::zero();
        for ch in 0..c {
            let e = (col[ch] - m).exp();
            out[[ch, j]] = e;
            sum += e;
        }
        for ch in 0..c {
            out[[ch, j]] /= sum;
        }
    }
    out.into_shape_with_order((c, b, h, w)).expect("contiguous")
}

/// Mean per-cell cross-entropy against `labels` (sample-major, 900 per
/// sample) and its gradient with respect to the logits.
fn cross_entropy_with_grad<T: Scalar>(logits: &Array4<T>, labels: &[u8]) -> (f64, Array4<T>) {
    let (c, b, h, w) = logits.dim();
    let cells = b * h * w;
    let flat = logits.view().into_shape_with_order((c, cells)).expect("contiguous");
    let mut grad = Array2::zeros((c, cells));
    let scale: T = cast(1.0 / cells as f64);
    let mut loss = 0.0;
    for j in 0..cells {
        let col = flat.column(j);
        let m = col.fold(T::neg_infinity(), |a, &v| a.max(v));
        let sum: T = col.iter().map(|&v| (v - m).exp()).sum();
        let lse = m + sum.ln();
        let target = labels[j] as usize;
        loss -= (col[target] - lse).to_f64().expect("finite");
        for ch in 0..c {
            grad[[ch, j]] = (col[ch] - lse).exp() * scale;
        }
        grad[[target, j]] -= scale;
    }
    (loss / cells as f64, grad.into_shape_with_order((c, b, h, w)).expect("contiguous"))
}

fn cross_entropy_from_probs<T: Scalar>(probs: &Array4<T>, labels: &[u8]) -> f64 {
    let (c, b, h, w) = probs.dim();
    let cells = b * h * w;
    let flat = probs.view().into_shape_with_order((c, cells)).expect("contiguous");
    let total: f64 = (0..cells)
        .map(|j| -flat[[labels[j] as usize, j]].to_f64().expect("finite").max(1e-300).ln())
        .sum();
    total / cells as f64
}

/// One-hot batch `[10, b, 30, 30]` from sample-major 30x30 label rows.
pub fn one_hot_batch<T: Scalar>(labels: &[u8]) -> Array4<T> {
    let batch = labels.len() / CANVAS_CELLS;
    let mut x = Array4::zeros((NUM_COLORS, batch, CANVAS, CANVAS));
    {
        let xs = x.as_slice_mut().expect("fresh array");
        for (j, &l) in labels.iter().enumerate() {
            xs[l as usize * batch * CANVAS_CELLS + j] = T::one();
        }
    }
    x
}

/// Per-cell argmax labels (sample-major) of a probability batch.
pub fn argmax_labels<T: Scalar>(probs: &Array4<T>) -> Vec<u8> {
    let (c, b, h, w) = probs.dim();
    let cells = b * h * w;
    let flat = probs.view().into_shape_with_order((c, cells)).expect("contiguous");
    (0..cells)
        .map(|j| {
            let mut best = 0;
            for ch in 1..c {
                if flat[[ch, j]] > flat[[best, j]] {
                    best = ch;
                }
            }
            best as u8
        })
        .collect()
}

/// Standard-normal noise `[latent, batch]`.
pub fn standard_normal<T: Scalar>(rng: &mut impl Rng, latent: usize, batch: usize) -> Array2<T> {
    Array2::from_shape_simple_fn((latent, batch), || cast(rng.sample::<f64, _>(rand_distr::StandardNormal)))
}

pub(crate) fn column_vec<T: Scalar>(a: &Array2<T>, j: usize) -> Vec<f32> {
    a.column(j).iter().map(|v| v.to_f32().expect("finite")).collect()
}

pub(crate) fn columns_to_array(cols: &[&[f32]]) -> Array2<f32> {
    let rows = cols.first().map_or(0, |c| c.len());
    let mut a = Array2::zeros((rows, cols.len()));
    for (j, c) in cols.iter().enumerate() {
        a.column_mut(j).assign(&Array1::from(c.to_vec()));
    }
    a
}

pub(crate) fn sample_probs(probs: &Array4<f32>, j: usize) -> ndarray::Array3<f32> {
    probs.slice(s![.., j, .., ..]).to_owned()
}

impl<T: Scalar> Vae<T> {
    /// Runs one all-black sample through the network and reports the
    /// `[channels, rows, cols]` shape after every (transposed) convolution.
    pub fn trace_shapes(&self) -> (Vec<[usize; 3]>, Vec<[usize; 3]>) {
        let x = one_hot_batch::<T>(&[0u8; CANVAS_CELLS]);
        let enc = self.encoder_forward(x.view());
        let dec = self.decoder_forward(enc.mu.view());
        let dims = |a: &Array4<T>| [a.dim().0, a.dim().2, a.dim().3];
        let encoder = enc.acts.iter().map(dims).collect();
        let mut decoder: Vec<[usize; 3]> = dec.acts.iter().map(dims).collect();
        decoder.push(dims(&dec.logits));
        (encoder, decoder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn tiny() -> Hyperparams {
        Hyperparams {
            filters: 2,
            latent_dim: 4,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn kl_identities() {
        let zeros = Array2::<f64>::zeros((4, 1));
        assert_eq!(kl_divergence(zeros.view(), zeros.view()), 0.0);
        let mu = arr2(&[[1.0], [0.0], [0.0]]);
        let lv = Array2::<f64>::zeros((3, 1));
        assert!((kl_divergence(mu.view(), lv.view()) - 0.5).abs() < 1e-15);
        let mu = Array2::<f64>::ones((5, 1));
        assert!((kl_divergence(mu.view(), Array2::zeros((5, 1)).view()) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn default_shape_trace() {
        let h = Hyperparams::default();
        assert_eq!(h.encoder_trace(), vec![30, 14, 6, 2]);
        let vae = Vae::<f32>::new(&Hyperparams {
            filters: 8,
            ..Default::default()
        })
        .unwrap();
        let (enc, dec) = vae.trace_shapes();
        assert_eq!(enc, vec![[8, 14, 14], [8, 6, 6], [8, 2, 2]]);
        assert_eq!(dec, vec![[8, 6, 6], [8, 14, 14], [10, 30, 30]]);
    }

    #[test]
    fn rejects_incompatible_kernel_stride() {
        let h = Hyperparams {
            kernel: 3,
            ..Default::default()
        };
        assert!(matches!(h.validate(), Err(Error::Config(_))));
        let h = Hyperparams {
            epochs: 0,
            ..Default::default()
        };
        assert!(matches!(h.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn decoder_output_is_normalized() {
        let vae = Vae::<f32>::new(&Hyperparams {
            filters: 4,
            latent_dim: 8,
            ..Default::default()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = standard_normal::<f32>(&mut rng, 8, 5) * 3.0;
        let probs = vae.decode_batch(z.view());
        let sums = probs.sum_axis(ndarray::Axis(0));
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-5));
        assert!(probs.iter().all(|&p| p >= 0.0));
    }

    /// Relative error between an analytic and a numeric derivative.
    #[test]
    fn gradients_match_central_differences() {
        let h = Hyperparams {
            beta: 0.7,
            ..tiny()
        };
        let report = super::super::gradcheck::check_gradients(&h, 11, 1e-4, 8, 20).unwrap();
        for t in &report {
            assert!(t.checked > 0, "{}: no kink-free sample found", t.name);
            assert!(t.max_rel_err <= 1e-3, "{}: relative error {:e}", t.name, t.max_rel_err);
        }
    }

    #[test]
    fn loss_value_matches_training_terms() {
        let h = tiny();
        let vae = Vae::<f64>::new(&h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels = super::super::gradcheck::blocky_labels(&mut rng, 3);
        let x = one_hot_batch::<f64>(&labels);
        let (a, _) = vae.loss_and_grad(x.view(), &labels, None, &h);
        let b = vae.loss_value(x.view(), &labels, None, &h);
        assert!((a.total - b.total).abs() < 1e-10);
        assert!(a.kl >= 0.0);
    }
}
