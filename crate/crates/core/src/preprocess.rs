//! Canonicalization of variable-size grids onto the fixed 10x30x30 one-hot
//! canvas, and the inverse mappings used on decoder output.

use ndarray::{Array3, ArrayView3};

use crate::data::{Grid, MAX_SIDE, NUM_COLORS};
use crate::error::{Error, Result};

pub const CANVAS: usize = MAX_SIDE;
pub const CANVAS_CELLS: usize = CANVAS * CANVAS;

/// Isotropic Kronecker factor `min(30 / h, 30 / w)`.
pub fn scale_factor(height: usize, width: usize) -> usize {
    (CANVAS / height).min(CANVAS / width)
}

/// Top/left padding for a grid of the given (already scaled) size. Odd
/// remainders put the extra row at the bottom and the extra column on the right.
pub fn padding(height: usize, width: usize) -> (usize, usize) {
    ((CANVAS - height) / 2, (CANVAS - width) / 2)
}

/// Placement of an original grid on the canvas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub orig_height: usize,
    pub orig_width: usize,
    pub scale_k: usize,
    pub pad_top: usize,
    pub pad_left: usize,
}

impl Placement {
    pub fn for_dims(height: usize, width: usize) -> Result<Self> {
        if !(1..=CANVAS).contains(&height) || !(1..=CANVAS).contains(&width) {
            return Err(Error::Size(format!(
                "target dims {height}x{width} outside 1..={CANVAS}"
            )));
        }
        let scale_k = scale_factor(height, width);
        let (pad_top, pad_left) = padding(scale_k * height, scale_k * width);
        Ok(Placement {
            orig_height: height,
            orig_width: width,
            scale_k,
            pad_top,
            pad_left,
        })
    }

    fn check(&self) -> Result<()> {
        let expected = Placement::for_dims(self.orig_height, self.orig_width)
            .map_err(|e| Error::Metadata(e.to_string()))?;
        if expected != *self {
            return Err(Error::Metadata(format!(
                "{self:?} does not match the canonical placement {expected:?}"
            )));
        }
        Ok(())
    }
}

/// Kronecker product of `g` with a `k x k` block of ones.
pub fn kronecker_upscale(g: &Grid) -> (Grid, usize) {
    let k = scale_factor(g.height(), g.width());
    let up = Grid::from_fn(k * g.height(), k * g.width(), |r, c| g.get(r / k, c / k));
    (up, k)
}

/// Centers `g` on a black 30x30 canvas.
pub fn pad_to_canvas(g: &Grid) -> Result<(Grid, usize, usize)> {
    if g.height() > CANVAS || g.width() > CANVAS {
        return Err(Error::Size(format!(
            "{}x{} does not fit on a {CANVAS}x{CANVAS} canvas",
            g.height(),
            g.width()
        )));
    }
    let (top, left) = padding(g.height(), g.width());
    let canvas = Grid::from_fn(CANVAS, CANVAS, |r, c| {
        if (top..top + g.height()).contains(&r) && (left..left + g.width()).contains(&c) {
            g.get(r - top, c - left)
        } else {
            0
        }
    });
    Ok((canvas, top, left))
}

/// The 30x30 color grid produced by upscaling and padding, before one-hot.
pub fn canvas_grid(g: &Grid) -> Grid {
    let (up, _) = kronecker_upscale(g);
    pad_to_canvas(&up).expect("upscaled grids fit the canvas").0
}

/// One-hot `[color][row][col]` tensor plus the metadata needed to invert it.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGrid {
    pub tensor: Array3<f32>,
    pub placement: Placement,
}

impl CanonicalGrid {
    /// The 30x30 color labels (argmax of the one-hot tensor).
    pub fn labels(&self) -> Grid {
        argmax_canvas(self.tensor.view())
    }

    pub fn hot_count(&self) -> usize {
        self.tensor.iter().filter(|&&v| v == 1.0).count()
    }
}

pub fn one_hot(canvas: &Grid) -> Array3<f32> {
    let mut t = Array3::zeros((NUM_COLORS, CANVAS, CANVAS));
    for r in 0..CANVAS {
        for c in 0..CANVAS {
            t[[canvas.get(r, c) as usize, r, c]] = 1.0;
        }
    }
    t
}

pub fn canonicalize(g: &Grid) -> CanonicalGrid {
    let placement = Placement::for_dims(g.height(), g.width()).expect("grids are at most 30x30");
    CanonicalGrid {
        tensor: one_hot(&canvas_grid(g)),
        placement,
    }
}

/// Per-cell probabilities over the ten colors, as produced by the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorDistributionGrid {
    pub tensor: Array3<f32>,
}

impl ColorDistributionGrid {
    pub fn new(tensor: Array3<f32>) -> Result<Self> {
        if tensor.shape() != [NUM_COLORS, CANVAS, CANVAS] {
            return Err(Error::Shape(format!(
                "expected [10, 30, 30], got {:?}",
                tensor.shape()
            )));
        }
        Ok(ColorDistributionGrid { tensor })
    }

    /// Largest deviation of a per-cell channel sum from one.
    pub fn max_normalization_error(&self) -> f32 {
        let sums = self.tensor.sum_axis(ndarray::Axis(0));
        sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f32::max)
    }

    pub fn argmax(&self) -> Grid {
        argmax_canvas(self.tensor.view())
    }
}

#[inline]
fn argmax_lowest(values: &[f32; NUM_COLORS]) -> u8 {
    let mut best = 0;
    for c in 1..NUM_COLORS {
        if values[c] > values[best] {
            best = c;
        }
    }
    best as u8
}

/// Per-cell argmax of a `[10, 30, 30]` tensor; ties go to the lowest color.
pub fn argmax_canvas(t: ArrayView3<f32>) -> Grid {
    Grid::from_fn(CANVAS, CANVAS, |r, c| {
        let mut v = [0.0; NUM_COLORS];
        for (ch, slot) in v.iter_mut().enumerate() {
            *slot = t[[ch, r, c]];
        }
        argmax_lowest(&v)
    })
}

/// Averages channel values over each `k x k` block of the placement and takes
/// the argmax per block.
fn collapse_blocks(t: ArrayView3<f32>, p: &Placement) -> Grid {
    let k = p.scale_k;
    Grid::from_fn(p.orig_height, p.orig_width, |r, c| {
        let mut acc = [0.0f32; NUM_COLORS];
        let r0 = p.pad_top + r * k;
        let c0 = p.pad_left + c * k;
        for (ch, slot) in acc.iter_mut().enumerate() {
            let mut s = 0.0;
            for rr in r0..r0 + k {
                for cc in c0..c0 + k {
                    s += t[[ch, rr, cc]];
                }
            }
            *slot = s / (k * k) as f32;
        }
        argmax_lowest(&acc)
    })
}

pub fn decanonicalize(c: &CanonicalGrid) -> Result<Grid> {
    if c.tensor.shape() != [NUM_COLORS, CANVAS, CANVAS] {
        return Err(Error::Metadata(format!(
            "tensor shape {:?} is not [10, 30, 30]",
            c.tensor.shape()
        )));
    }
    c.placement.check()?;
    Ok(collapse_blocks(c.tensor.view(), &c.placement))
}

/// Maps a 30x30 prediction onto `target_h x target_w` using the placement
/// canonicalization would have used for those dims.
pub fn rescale_prediction(p: &ColorDistributionGrid, target_h: usize, target_w: usize) -> Result<Grid> {
    let placement = Placement::for_dims(target_h, target_w)?;
    Ok(collapse_blocks(p.tensor.view(), &placement))
}

/// Same as [`rescale_prediction`] for a hard 30x30 grid (one-hot probabilities).
pub fn rescale_grid(g: &Grid, target_h: usize, target_w: usize) -> Result<Grid> {
    if g.dims() != (CANVAS, CANVAS) {
        return Err(Error::Shape(format!("expected 30x30 grid, got {:?}", g.dims())));
    }
    rescale_prediction(&ColorDistributionGrid { tensor: one_hot(g) }, target_h, target_w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn upscale_three_by_three() {
        let g = grid(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let (up, k) = kronecker_upscale(&g);
        assert_eq!(k, 10);
        assert_eq!(up.dims(), (30, 30));
        for r in 0..30 {
            for c in 0..30 {
                assert_eq!(up.get(r, c), g.get(r / 10, c / 10));
            }
        }
    }

    #[test]
    fn upscale_single_cell() {
        let (up, k) = kronecker_upscale(&grid(&[&[5]]));
        assert_eq!(k, 30);
        assert!(up.cells().iter().all(|&c| c == 5));
        assert_eq!(up.len(), 900);
    }

    #[test]
    fn upscale_four_by_seven() {
        let g = Grid::filled(4, 7, 3).unwrap();
        let (up, k) = kronecker_upscale(&g);
        assert_eq!(k, 4);
        assert_eq!(up.dims(), (16, 28));
    }

    #[test]
    fn pad_cases() {
        let full = Grid::filled(30, 30, 2).unwrap();
        let (same, t, l) = pad_to_canvas(&full).unwrap();
        assert_eq!((t, l), (0, 0));
        assert_eq!(same, full);

        let (p, t, l) = pad_to_canvas(&Grid::filled(16, 28, 1).unwrap()).unwrap();
        assert_eq!((t, l), (7, 1));
        let ones_per_row: Vec<usize> = p.rows().map(|r| r.iter().filter(|&&c| c == 1).count()).collect();
        assert!(ones_per_row[..7].iter().all(|&n| n == 0));
        assert!(ones_per_row[7..23].iter().all(|&n| n == 28));
        assert!(ones_per_row[23..].iter().all(|&n| n == 0));
        assert_eq!(p.get(10, 0), 0);
        assert_eq!(p.get(10, 1), 1);
        assert_eq!(p.get(10, 28), 1);
        assert_eq!(p.get(10, 29), 0);

        let (p, t, l) = pad_to_canvas(&Grid::filled(29, 29, 4).unwrap()).unwrap();
        assert_eq!((t, l), (0, 0));
        assert_eq!(p.get(28, 28), 4);
        assert!((0..30).all(|i| p.get(29, i) == 0 && p.get(i, 29) == 0));
    }

    #[test]
    fn canonicalize_single_color() {
        let c = canonicalize(&grid(&[&[1]]));
        for ch in 0..NUM_COLORS {
            let plane_sum: f32 = c.tensor.index_axis(ndarray::Axis(0), ch).sum();
            assert_eq!(plane_sum, if ch == 1 { 900.0 } else { 0.0 });
        }
        assert_eq!(c.hot_count(), 900);
    }

    #[test]
    fn decanonicalize_all_zero_tensor_is_black() {
        let c = CanonicalGrid {
            tensor: Array3::zeros((10, 30, 30)),
            placement: Placement::for_dims(2, 2).unwrap(),
        };
        assert_eq!(c.placement.scale_k, 15);
        assert_eq!(decanonicalize(&c).unwrap(), Grid::filled(2, 2, 0).unwrap());
    }

    #[test]
    fn tie_goes_to_lowest_color() {
        let mut t = Array3::zeros((10, 30, 30));
        for r in 0..30 {
            for c in 0..30 {
                t[[3, r, c]] = 0.5;
                t[[7, r, c]] = 0.5;
            }
        }
        let c = CanonicalGrid {
            tensor: t,
            placement: Placement::for_dims(1, 1).unwrap(),
        };
        assert_eq!(decanonicalize(&c).unwrap().cells(), &[3]);
    }

    #[test]
    fn inconsistent_metadata_rejected() {
        let mut c = canonicalize(&grid(&[&[1, 2], &[3, 4]]));
        c.placement.scale_k = 14;
        assert!(matches!(decanonicalize(&c), Err(Error::Metadata(_))));
    }

    #[test]
    fn rescale_block_average() {
        // 3x3 target: k = 10, block (0,0) covers rows/cols 0..10.
        let mut t = Array3::zeros((10, 30, 30));
        for r in 0..10 {
            for c in 0..10 {
                // checkerboard-ish split so the per-cell argmax disagrees with the block average
                if (r + c) % 2 == 0 {
                    t[[2, r, c]] = 0.3;
                    t[[7, r, c]] = 0.5;
                    t[[0, r, c]] = 0.2;
                } else {
                    t[[2, r, c]] = 0.5;
                    t[[7, r, c]] = 0.2;
                    t[[0, r, c]] = 0.3;
                }
            }
        }
        // brute-force block means: channel 2 = 0.4, channel 7 = 0.35, channel 0 = 0.25
        let (mut m2, mut m7) = (0.0f64, 0.0f64);
        for r in 0..10 {
            for c in 0..10 {
                m2 += t[[2, r, c]] as f64;
                m7 += t[[7, r, c]] as f64;
            }
        }
        assert!((m2 / 100.0 - 0.4).abs() < 1e-6 && (m7 / 100.0 - 0.35).abs() < 1e-6);
        let p = ColorDistributionGrid::new(t).unwrap();
        let g = rescale_prediction(&p, 3, 3).unwrap();
        assert_eq!(g.get(0, 0), 2);
    }

    #[test]
    fn rescale_rejects_bad_dims() {
        let p = ColorDistributionGrid::new(Array3::zeros((10, 30, 30))).unwrap();
        assert!(matches!(rescale_prediction(&p, 0, 3), Err(Error::Size(_))));
        assert!(matches!(rescale_prediction(&p, 3, 31), Err(Error::Size(_))));
    }

    #[test]
    fn rescale_of_one_hot_roundtrips() {
        let g = grid(&[&[1, 0, 3], &[0, 2, 0], &[9, 0, 4]]);
        let c = canonicalize(&g);
        let p = ColorDistributionGrid::new(c.tensor.clone()).unwrap();
        assert_eq!(rescale_prediction(&p, 3, 3).unwrap(), g);
        assert_eq!(rescale_grid(&canvas_grid(&g), 3, 3).unwrap(), g);
    }
}
