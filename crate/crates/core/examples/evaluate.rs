//! Cell accuracy under the four conditions and exact-match scores with
//! three sampled attempts.
//!
//! ```text
//! cargo run --release --example evaluate -- <checkpoint> <arc-dir> [seed]
//! ```

use std::path::Path;

use arc_vas::data::load_dataset;
use arc_vas::eval::{accuracy_table_csv, evaluate_dataset, score_official};
use arc_vas::solver::Strategy;
use arc_vas::vae::read_checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [ckpt, data, rest @ ..] = args.as_slice() else {
        return Err("usage: evaluate <checkpoint> <arc-dir> [seed]".into());
    };
    let seed: u64 = rest.first().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let (params, _) = read_checkpoint(ckpt)?;
    let evaluation = load_dataset(Path::new(data).join("evaluation"))?;
    let training = load_dataset(Path::new(data).join("training"))?;

    let reports = Strategy::ALL
        .into_iter()
        .map(|s| evaluate_dataset(&params, &evaluation, s, true))
        .collect::<Result<Vec<_>, _>>()?;
    let columns: Vec<(String, _)> = reports.iter().map(|r| (r.strategy.to_string(), r)).collect();
    print!("{}", accuracy_table_csv(&columns)?);

    for s in Strategy::ALL {
        let e = score_official(&params, &evaluation, s, 3, seed)?;
        let t = score_official(&params, &training, s, 3, seed)?;
        println!("{s}: solved {}/{} evaluation {:?}, {}/{} training", e.solved, e.total, e.solved_ids, t.solved, t.total);
    }
    Ok(())
}
