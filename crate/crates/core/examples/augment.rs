//! Build the augmented training corpus and print its composition.
//!
//! ```text
//! cargo run --release --example augment -- <arc-dir> [seed]
//! ```

use arc_vas::augment::{build_training_corpus, mirror_pair, permute_colors, rotate_pair, AugmentConfig, ColorPermutation};
use arc_vas::data::{load_dataset, split_train_validation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let data = args.next().unwrap_or_else(|| "data/arc".into());
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let items = load_dataset(std::path::Path::new(&data).join("training"))?;
    let split = split_train_validation(&items, seed)?;

    let pair = &split.train_items[0].train[0];
    let swapped = permute_colors(pair, &ColorPermutation::swap(1, 2)?);
    println!("item {}: first pair input {:?}", split.train_items[0].id, pair.input.dims());
    println!("  mirrored input dims {:?}", mirror_pair(pair).input.dims());
    println!("  rotated 90 input dims {:?}", rotate_pair(pair, 90)?.input.dims());
    println!("  1<->2 swap changes {} input cells", pair.input.cells().iter().zip(swapped.input.cells()).filter(|(a, b)| a != b).count());

    let corpus = build_training_corpus(&split.train_items, &AugmentConfig { seed, ..Default::default() })?;
    println!("{}", serde_json::to_string_pretty(&corpus.report)?);
    Ok(())
}
