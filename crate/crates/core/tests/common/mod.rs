#![allow(dead_code)]

use std::path::PathBuf;

use arc_vas::data::{Grid, Item, Pair};
use rand::Rng;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// ARC root from `ARC_VAS_DATA`, else `<workspace>/data/arc`.
pub fn arc_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("ARC_VAS_DATA").map(PathBuf::from).unwrap_or_else(|| workspace_root().join("data/arc"));
    dir.join("training").is_dir().then_some(dir)
}

/// Trained checkpoint from `ARC_VAS_CHECKPOINT`, else `<workspace>/artifacts/best.ckpt`.
pub fn checkpoint() -> Option<PathBuf> {
    let p = std::env::var_os("ARC_VAS_CHECKPOINT").map(PathBuf::from).unwrap_or_else(|| workspace_root().join("artifacts/best.ckpt"));
    p.is_file().then_some(p)
}

pub fn conceptarc_dir() -> Option<PathBuf> {
    std::env::var_os("ARC_VAS_CONCEPTARC").map(PathBuf::from).filter(|p| p.is_dir())
}

pub fn random_grid(rng: &mut impl Rng, max_side: usize, colors: u8) -> Grid {
    let h = rng.random_range(1..=max_side);
    let w = rng.random_range(1..=max_side);
    let cells = (0..h * w).map(|_| if rng.random_bool(0.5) { 0 } else { rng.random_range(1..colors.max(2)) }).collect();
    Grid::new(h, w, cells).unwrap()
}

pub fn random_item(rng: &mut impl Rng, id: &str) -> Item {
    let n = rng.random_range(2..=4);
    let mut pair = || Pair {
        input: random_grid(rng, 8, 10),
        output: random_grid(rng, 8, 10),
    };
    let train = (0..n).map(|_| pair()).collect();
    let test = vec![pair()];
    Item { id: id.into(), train, test }
}
