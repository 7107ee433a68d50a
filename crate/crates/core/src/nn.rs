//! Dense building blocks with hand-written backward passes.
//!
//! Activations use a channel-major batch layout `[channels, batch, rows, cols]`
//! so that every convolution is a single GEMM against an im2col matrix whose
//! columns run over `(batch, row, col)`.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Array4, ArrayView2, ArrayView4, Axis, NdFloat};
use num_traits::FromPrimitive;
use rand::Rng;

/// Floating-point element type for networks (`f32` for training, `f64` for
/// gradient checks).
pub trait Scalar: NdFloat + FromPrimitive + Default + std::iter::Sum {}
impl<T: NdFloat + FromPrimitive + Default + std::iter::Sum> Scalar for T {}

#[inline]
pub(crate) fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("representable")
}

pub fn conv_out(input: usize, kernel: usize, stride: usize) -> usize {
    (input - kernel) / stride + 1
}

pub fn deconv_out(input: usize, kernel: usize, stride: usize) -> usize {
    (input - 1) * stride + kernel
}

/// `[c, b, h, w]` -> `[c * k * k, b * oh * ow]`.
pub fn im2col<T: Scalar>(x: ArrayView4<T>, k: usize, s: usize) -> Array2<T> {
    let (c, b, h, w) = x.dim();
    let (oh, ow) = (conv_out(h, k, s), conv_out(w, k, s));
    let mut cols = Array2::zeros((c * k * k, b * oh * ow));
    let x = x.as_standard_layout();
    let xs = x.as_slice().expect("standard layout");
    let out = cols.as_slice_mut().expect("fresh array");
    let ncols = b * oh * ow;
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                let dst = &mut out[row * ncols..(row + 1) * ncols];
                let mut idx = 0;
                for bi in 0..b {
                    let plane = &xs[(ci * b + bi) * h * w..(ci * b + bi + 1) * h * w];
                    for oy in 0..oh {
                        let src_row = &plane[(oy * s + ki) * w..];
                        for ox in 0..ow {
                            dst[idx] = src_row[ox * s + kj];
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatters-and-adds columns into `[c, b, h, w]`.
pub fn col2im<T: Scalar>(cols: ArrayView2<T>, c: usize, b: usize, h: usize, w: usize, k: usize, s: usize) -> Array4<T> {
    let (oh, ow) = (conv_out(h, k, s), conv_out(w, k, s));
    let ncols = b * oh * ow;
    assert_eq!(cols.dim(), (c * k * k, ncols));
    let cols = cols.as_standard_layout();
    let src = cols.as_slice().expect("standard layout");
    let mut x = Array4::zeros((c, b, h, w));
    let xs = x.as_slice_mut().expect("fresh array");
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                let col_row = &src[row * ncols..(row + 1) * ncols];
                let mut idx = 0;
                for bi in 0..b {
                    let plane = &mut xs[(ci * b + bi) * h * w..(ci * b + bi + 1) * h * w];
                    for oy in 0..oh {
                        let base = (oy * s + ki) * w + kj;
                        for ox in 0..ow {
                            plane[base + ox * s] += col_row[idx];
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    x
}

fn uniform_init<T: Scalar>(rng: &mut impl Rng, shape: (usize, usize), bound: f64) -> Array2<T> {
    Array2::from_shape_simple_fn(shape, || cast(rng.random_range(-bound..bound)))
}

/// Unpadded 2-D convolution. `weight` is stored as `[out, in * k * k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, gain: f64, rng: &mut impl Rng) -> Self {
        let fan_in = (in_channels * kernel * kernel) as f64;
        Conv2d {
            weight: uniform_init(rng, (out_channels, in_channels * kernel * kernel), (gain * 3.0 / fan_in).sqrt()),
            bias: Array1::zeros(out_channels),
            in_channels,
            out_channels,
            kernel,
            stride,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Conv2d {
            weight: Array2::zeros(self.weight.dim()),
            bias: Array1::zeros(self.bias.dim()),
            ..*self
        }
    }

    pub fn weight_shape(&self) -> Vec<usize> {
        vec![self.out_channels, self.in_channels, self.kernel, self.kernel]
    }

    /// Returns the output and the im2col matrix needed by [`Conv2d::backward`].
    pub fn forward(&self, x: ArrayView4<T>) -> (Array4<T>, Array2<T>) {
        let (c, b, h, w) = x.dim();
        assert_eq!(c, self.in_channels, "conv input channels");
        let (oh, ow) = (conv_out(h, self.kernel, self.stride), conv_out(w, self.kernel, self.stride));
        let cols = im2col(x, self.kernel, self.stride);
        let mut y = Array2::zeros((self.out_channels, b * oh * ow));
        general_mat_mul(T::one(), &self.weight, &cols, T::zero(), &mut y);
        y += &self.bias.view().insert_axis(Axis(1));
        let y = y.into_shape_with_order((self.out_channels, b, oh, ow)).expect("contiguous");
        (y, cols)
    }

    /// Accumulates parameter gradients into `grad` and returns the input
    /// gradient when `need_input_grad` is set.
    pub fn backward(
        &self,
        dy: ArrayView4<T>,
        cols: &Array2<T>,
        input_dims: (usize, usize),
        grad: &mut Conv2d<T>,
        need_input_grad: bool,
    ) -> Option<Array4<T>> {
        let (o, b, oh, ow) = dy.dim();
        let dy = dy.as_standard_layout();
        let dy_m = dy.view().into_shape_with_order((o, b * oh * ow)).expect("contiguous");
        general_mat_mul(T::one(), &dy_m, &cols.t(), T::one(), &mut grad.weight);
        grad.bias += &dy_m.sum_axis(Axis(1));
        need_input_grad.then(|| {
            let mut dcols = Array2::zeros(cols.dim());
            general_mat_mul(T::one(), &self.weight.t(), &dy_m, T::zero(), &mut dcols);
            col2im(dcols.view(), self.in_channels, b, input_dims.0, input_dims.1, self.kernel, self.stride)
        })
    }
}

/// Unpadded transposed convolution. `weight` is stored as `[in, out * k * k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvTranspose2d<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl<T: Scalar> ConvTranspose2d<T> {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, gain: f64, rng: &mut impl Rng) -> Self {
        // each output cell sees in * (k / s)^2 inputs
        let fan_in = (in_channels * kernel * kernel) as f64 / (stride * stride) as f64;
        ConvTranspose2d {
            weight: uniform_init(rng, (in_channels, out_channels * kernel * kernel), (gain * 3.0 / fan_in).sqrt()),
            bias: Array1::zeros(out_channels),
            in_channels,
            out_channels,
            kernel,
            stride,
        }
    }

    pub fn zeros_like(&self) -> Self {
        ConvTranspose2d {
            weight: Array2::zeros(self.weight.dim()),
            bias: Array1::zeros(self.bias.dim()),
            ..*self
        }
    }

    pub fn weight_shape(&self) -> Vec<usize> {
        vec![self.in_channels, self.out_channels, self.kernel, self.kernel]
    }

    /// Returns the output and the flattened input needed by the backward pass.
    pub fn forward(&self, x: ArrayView4<T>) -> (Array4<T>, Array2<T>) {
        let (c, b, h, w) = x.dim();
        assert_eq!(c, self.in_channels, "deconv input channels");
        let (oh, ow) = (deconv_out(h, self.kernel, self.stride), deconv_out(w, self.kernel, self.stride));
        let x_m = x
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((c, b * h * w))
            .expect("contiguous");
        let mut cols = Array2::zeros((self.out_channels * self.kernel * self.kernel, b * h * w));
        general_mat_mul(T::one(), &self.weight.t(), &x_m, T::zero(), &mut cols);
        let mut y = col2im(cols.view(), self.out_channels, b, oh, ow, self.kernel, self.stride);
        for (mut plane, &bias) in y.outer_iter_mut().zip(self.bias.iter()) {
            plane += bias;
        }
        (y, x_m)
    }

    pub fn backward(
        &self,
        dy: ArrayView4<T>,
        x_m: &Array2<T>,
        input_dims: (usize, usize),
        grad: &mut ConvTranspose2d<T>,
    ) -> Array4<T> {
        let (_, b, _, _) = dy.dim();
        let dcols = im2col(dy, self.kernel, self.stride);
        general_mat_mul(T::one(), x_m, &dcols.t(), T::one(), &mut grad.weight);
        for (g, plane) in grad.bias.iter_mut().zip(dy.outer_iter()) {
            *g += plane.sum();
        }
        let mut dx = Array2::zeros(x_m.dim());
        general_mat_mul(T::one(), &self.weight, &dcols, T::zero(), &mut dx);
        dx.into_shape_with_order((self.in_channels, b, input_dims.0, input_dims.1))
            .expect("contiguous")
    }
}

/// Affine map on column batches: `y = W x + b` with `x` shaped `[in, batch]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn new(inputs: usize, outputs: usize, gain: f64, rng: &mut impl Rng) -> Self {
        Linear {
            weight: uniform_init(rng, (outputs, inputs), (gain * 3.0 / inputs as f64).sqrt()),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Linear {
            weight: Array2::zeros(self.weight.dim()),
            bias: Array1::zeros(self.bias.dim()),
        }
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        let mut y = Array2::zeros((self.weight.nrows(), x.ncols()));
        general_mat_mul(T::one(), &self.weight, &x, T::zero(), &mut y);
        y += &self.bias.view().insert_axis(Axis(1));
        y
    }

    pub fn backward(&self, dy: ArrayView2<T>, x: ArrayView2<T>, grad: &mut Linear<T>) -> Array2<T> {
        general_mat_mul(T::one(), &dy, &x.t(), T::one(), &mut grad.weight);
        grad.bias += &dy.sum_axis(Axis(1));
        let mut dx = Array2::zeros(x.dim());
        general_mat_mul(T::one(), &self.weight.t(), &dy, T::zero(), &mut dx);
        dx
    }
}

pub fn relu_inplace<T: Scalar, D: ndarray::Dimension>(x: &mut ndarray::Array<T, D>) {
    x.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
}

/// Zeroes gradient entries where the forward activation was clipped.
pub fn relu_backward_inplace<T: Scalar, D: ndarray::Dimension>(dy: &mut ndarray::Array<T, D>, activated: &ndarray::Array<T, D>) {
    ndarray::Zip::from(dy).and(activated).for_each(|g, &a| {
        if a <= T::zero() {
            *g = T::zero();
        }
    });
}

/// `[c, b, h, w]` -> `[c * h * w, b]`, feature order `(c, h, w)`.
pub fn flatten_features<T: Scalar>(x: ArrayView4<T>) -> Array2<T> {
    let (c, b, h, w) = x.dim();
    x.permuted_axes([0, 2, 3, 1])
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((c * h * w, b))
        .expect("contiguous")
}

/// Inverse of [`flatten_features`].
pub fn unflatten_features<T: Scalar>(x: ArrayView2<T>, c: usize, h: usize, w: usize) -> Array4<T> {
    let b = x.ncols();
    x.as_standard_layout()
        .into_owned()
        .into_shape_with_order((c, h, w, b))
        .expect("contiguous")
        .permuted_axes([0, 3, 1, 2])
        .as_standard_layout()
        .into_owned()
}

/// Adaptive-moment optimizer over a flat list of parameter slices.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate: cast(learning_rate),
            beta1: cast(0.9),
            beta2: cast(0.999),
            epsilon: cast(1e-8),
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step(&mut self, params: Vec<&mut [T]>, grads: Vec<&[T]>) {
        assert_eq!(params.len(), grads.len());
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| vec![T::zero(); g.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.step);
        let bc2 = one - self.beta2.powi(self.step);
        let step_size = self.learning_rate / bc1;
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (one - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (one - self.beta2) * g[i] * g[i];
                p[i] -= step_size * m[i] / ((v[i] / bc2).sqrt() + self.epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random4(rng: &mut ChaCha8Rng, shape: (usize, usize, usize, usize)) -> Array4<f64> {
        Array::from_shape_simple_fn(shape, || rng.random_range(-1.0..1.0))
    }

    /// Direct (loop) convolution used as an oracle for the GEMM path.
    fn conv_direct(x: &Array4<f64>, layer: &Conv2d<f64>) -> Array4<f64> {
        let (c, b, h, w) = x.dim();
        let k = layer.kernel;
        let s = layer.stride;
        let (oh, ow) = (conv_out(h, k, s), conv_out(w, k, s));
        let mut y = Array4::zeros((layer.out_channels, b, oh, ow));
        for o in 0..layer.out_channels {
            for bi in 0..b {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = layer.bias[o];
                        for ci in 0..c {
                            for ki in 0..k {
                                for kj in 0..k {
                                    acc += layer.weight[[o, (ci * k + ki) * k + kj]] * x[[ci, bi, oy * s + ki, ox * s + kj]];
                                }
                            }
                        }
                        y[[o, bi, oy, ox]] = acc;
                    }
                }
            }
        }
        y
    }

    fn deconv_direct(x: &Array4<f64>, layer: &ConvTranspose2d<f64>) -> Array4<f64> {
        let (c, b, h, w) = x.dim();
        let k = layer.kernel;
        let s = layer.stride;
        let (oh, ow) = (deconv_out(h, k, s), deconv_out(w, k, s));
        let mut y = Array4::zeros((layer.out_channels, b, oh, ow));
        for o in 0..layer.out_channels {
            for bi in 0..b {
                for oy in 0..oh {
                    for ox in 0..ow {
                        y[[o, bi, oy, ox]] = layer.bias[o];
                    }
                }
            }
        }
        for ci in 0..c {
            for bi in 0..b {
                for iy in 0..h {
                    for ix in 0..w {
                        for o in 0..layer.out_channels {
                            for ki in 0..k {
                                for kj in 0..k {
                                    y[[o, bi, iy * s + ki, ix * s + kj]] +=
                                        layer.weight[[ci, (o * k + ki) * k + kj]] * x[[ci, bi, iy, ix]];
                                }
                            }
                        }
                    }
                }
            }
        }
        y
    }

    #[test]
    fn output_size_arithmetic() {
        let trace: Vec<usize> = [30, 14, 6].iter().map(|&n| conv_out(n, 4, 2)).collect();
        assert_eq!(trace, [14, 6, 2]);
        let trace: Vec<usize> = [2, 6, 14].iter().map(|&n| deconv_out(n, 4, 2)).collect();
        assert_eq!(trace, [6, 14, 30]);
    }

    #[test]
    fn conv_matches_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layer = Conv2d::<f64>::new(3, 4, 4, 2, 2.0, &mut rng);
        let mut layer = layer;
        layer.bias = Array1::from_shape_simple_fn(4, || rng.random_range(-1.0..1.0));
        let x = random4(&mut rng, (3, 2, 14, 14));
        let (y, _) = layer.forward(x.view());
        let oracle = conv_direct(&x, &layer);
        assert!((&y - &oracle).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn deconv_matches_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut layer = ConvTranspose2d::<f64>::new(3, 2, 4, 2, 2.0, &mut rng);
        layer.bias = Array1::from_shape_simple_fn(2, || rng.random_range(-1.0..1.0));
        let x = random4(&mut rng, (3, 2, 6, 6));
        let (y, _) = layer.forward(x.view());
        assert_eq!(y.dim(), (2, 2, 14, 14));
        let oracle = deconv_direct(&x, &layer);
        assert!((&y - &oracle).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), c> == <x, col2im(c)>
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random4(&mut rng, (2, 3, 10, 10));
        let cols = im2col(x.view(), 4, 2);
        let c = Array2::from_shape_simple_fn(cols.dim(), || rng.random_range(-1.0..1.0));
        let lhs: f64 = (&cols * &c).sum();
        let back = col2im(c.view(), 2, 3, 10, 10, 4, 2);
        let rhs: f64 = (&x * &back).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn flatten_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random4(&mut rng, (5, 3, 2, 2));
        let f = flatten_features(x.view());
        assert_eq!(f.dim(), (20, 3));
        // channel 1, row 1, column 0 of batch item 2
        assert_eq!(f[[6, 2]], x[[1, 2, 1, 0]]);
        assert_eq!(unflatten_features(f.view(), 5, 2, 2), x);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![3.0f64, -2.0];
        let mut opt = Adam::new(0.1);
        for _ in 0..500 {
            let g: Vec<f64> = p.iter().map(|v| 2.0 * v).collect();
            opt.step(vec![&mut p[..]], vec![&g[..]]);
        }
        assert!(p.iter().all(|v| v.abs() < 1e-2), "{p:?}");
    }
}
