//! Per-pixel count of correct reconstructions over the validation split.
//!
//! ```text
//! cargo run --release --example heatmap -- <checkpoint> <arc-dir> [seed]
//! ```

use std::path::Path;

use arc_vas::data::{load_dataset, split_train_validation, Grid};
use arc_vas::preprocess::canvas_grid;
use arc_vas::vae::{border_center_means, canvas_heatmap, read_checkpoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [ckpt, data, rest @ ..] = args.as_slice() else {
        return Err("usage: heatmap <checkpoint> <arc-dir> [seed]".into());
    };
    let seed: u64 = rest.first().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let (params, _) = read_checkpoint(ckpt)?;
    let split = split_train_validation(&load_dataset(Path::new(data).join("training"))?, seed)?;
    let canvases: Vec<Grid> = split
        .validation_items
        .iter()
        .flat_map(|it| it.train.iter().chain(&it.test).flat_map(|p| p.grids()))
        .map(canvas_grid)
        .collect();
    let refs: Vec<&Grid> = canvases.iter().collect();
    let map = canvas_heatmap(&params, &refs);

    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for row in map.rows() {
        let line: String = row.iter().map(|&v| shades[(v as usize * 9) / refs.len().max(1)]).collect();
        println!("|{line}|");
    }
    let (border, center) = border_center_means(&map, 4, 10);
    println!("{} grids; border mean {border:.1}, center mean {center:.1}", refs.len());
    Ok(())
}
