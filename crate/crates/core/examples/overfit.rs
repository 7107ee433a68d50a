//! Memorize a single grid: 50 copies, full-size network, until the
//! reconstruction is exact.
//!
//! ```text
//! cargo run --release --example overfit
//! ```

use arc_vas::data::Grid;
use arc_vas::preprocess::canvas_grid;
use arc_vas::vae::{canvas_reconstruction_accuracy, train, Hyperparams, TrainOptions};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let g = Grid::from_rows(&[[0u8, 0, 3, 3, 0], [0, 1, 1, 0, 0], [2, 0, 0, 0, 4], [0, 0, 5, 0, 0]])?;
    let corpus = vec![g.clone(); 50];
    let h = Hyperparams { epochs: 200, ..Default::default() };
    let opts = TrainOptions { target_accuracy: Some(1.0), ..Default::default() };
    let (params, log) = train(&corpus, std::slice::from_ref(&g), &h, &opts)?;
    let canvas = canvas_grid(&g);
    let acc = canvas_reconstruction_accuracy::<ChaCha8Rng>(&params, &[&canvas], None);
    println!("epochs run: {}, reconstruction accuracy {acc:.4}", log.records.len());
    Ok(())
}
