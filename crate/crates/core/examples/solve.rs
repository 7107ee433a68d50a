//! Solve one ARC item with both rule-vector strategies.
//!
//! ```text
//! cargo run --release --example solve -- <checkpoint> <item.json> [attempts] [seed]
//! ```

use std::path::Path;

use arc_vas::data::parse_item;
use arc_vas::solver::{solve, SolveRequest, Strategy};
use arc_vas::vae::read_checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [ckpt, item_path, rest @ ..] = args.as_slice() else {
        return Err("usage: solve <checkpoint> <item.json> [attempts] [seed]".into());
    };
    let attempts: usize = rest.first().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let seed: u64 = rest.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0);

    let (params, header) = read_checkpoint(ckpt)?;
    println!("checkpoint from epoch {}", header.epoch);
    let id = Path::new(item_path).file_stem().and_then(|s| s.to_str()).unwrap_or("item");
    let item = parse_item(&std::fs::read(item_path)?, id)?;
    let expected = &item.first_test().output;

    for strategy in Strategy::ALL {
        for deterministic in [true, false] {
            let req = SolveRequest {
                strategy,
                deterministic,
                attempts: if deterministic { 1 } else { attempts },
                expected_dims: expected.dims(),
                seed,
            };
            for p in solve(&params, &item, &req)? {
                println!(
                    "{strategy:<10} {} attempt {}: |r| = {:.2}, |z_c| = {:.2}, exact = {}",
                    if deterministic { "mean  " } else { "sample" },
                    p.attempt,
                    p.rule_norm,
                    p.latent_norm,
                    p.rescaled == *expected
                );
                if deterministic {
                    for row in p.rescaled.rows() {
                        println!("    {row:?}");
                    }
                }
            }
        }
    }
    Ok(())
}
