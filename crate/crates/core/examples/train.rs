//! Train the VAE on the 300-item split of the ARC training set.
//!
//! ```text
//! cargo run --release --example train -- <arc-dir> <out-dir> [epochs]
//! ```
//! `<arc-dir>` must contain `training/` with the 400 official items.

use std::path::PathBuf;

use arc_vas::augment::{build_training_corpus, AugmentConfig};
use arc_vas::data::{load_dataset, split_train_validation, Grid};
use arc_vas::vae::{train, Hyperparams, TrainOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let data = PathBuf::from(args.next().unwrap_or_else(|| "data/arc".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "artifacts".into()));
    let mut h = Hyperparams::default();
    if let Some(e) = args.next() {
        h.epochs = e.parse()?;
    }

    let items = load_dataset(data.join("training"))?;
    let split = split_train_validation(&items, h.seed)?;
    let corpus = build_training_corpus(&split.train_items, &AugmentConfig { seed: h.seed, ..Default::default() })?;
    println!("{}", serde_json::to_string_pretty(&corpus.report)?);
    let validation: Vec<Grid> = split
        .validation_items
        .iter()
        .flat_map(|it| it.train.iter().chain(&it.test).flat_map(|p| p.grids()))
        .cloned()
        .collect();

    std::fs::create_dir_all(&out)?;
    let opts = TrainOptions {
        checkpoint_dir: Some(out.clone()),
        log_path: Some(out.join("train_log.jsonl")),
        target_accuracy: None,
    };
    let (_, log) = train(&corpus.grids, &validation, &h, &opts)?;
    println!(
        "best epoch {} with validation accuracy {:.4}; checkpoint in {}",
        log.best_epoch,
        log.best_val_accuracy,
        out.join("best.ckpt").display()
    );
    Ok(())
}
