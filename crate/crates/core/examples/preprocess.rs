//! Canonicalize a small grid to the 10x30x30 canvas and map it back.
//!
//! ```text
//! cargo run --example preprocess
//! ```

use arc_vas::data::Grid;
use arc_vas::preprocess::{canonicalize, decanonicalize, kronecker_upscale, pad_to_canvas, rescale_prediction, ColorDistributionGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Grid::from_rows(&[[0u8, 2, 0, 0, 0, 0, 0], [0, 0, 0, 3, 0, 0, 0], [0, 0, 0, 0, 0, 0, 1], [4, 0, 0, 0, 0, 0, 0]])?;
    let (up, k) = kronecker_upscale(&g);
    let (_, top, left) = pad_to_canvas(&up)?;
    println!("{}x{} grid: k = {k}, upscaled {}x{}, padding top {top} left {left}", g.height(), g.width(), up.height(), up.width());

    let c = canonicalize(&g);
    println!("hot entries: {}", c.hot_count());
    println!("roundtrip exact: {}", decanonicalize(&c)? == g);

    // blur the one-hot tensor towards uniform and rescale: block averaging
    // recovers the original grid
    let noisy = c.tensor.mapv(|v| 0.6 * v + 0.04);
    let recovered = rescale_prediction(&ColorDistributionGrid::new(noisy)?, g.height(), g.width())?;
    println!("rescaled from a noisy distribution matches: {}", recovered == g);
    for row in recovered.rows() {
        println!("  {row:?}");
    }
    Ok(())
}
