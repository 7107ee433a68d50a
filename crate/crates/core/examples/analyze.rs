//! Regress per-item accuracy on the item features (OLS, LASSO, stepwise).
//!
//! ```text
//! cargo run --release --example analyze -- <checkpoint> <arc-dir>
//! ```

use std::path::Path;

use arc_vas::analysis::{extract_features, run_regressions};
use arc_vas::data::load_dataset;
use arc_vas::eval::evaluate_dataset;
use arc_vas::solver::Strategy;
use arc_vas::vae::read_checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [ckpt, data, ..] = args.as_slice() else {
        return Err("usage: analyze <checkpoint> <arc-dir>".into());
    };
    let (params, _) = read_checkpoint(ckpt)?;
    let items = load_dataset(Path::new(data).join("evaluation"))?;
    let features: Vec<_> = items.iter().map(|it| extract_features(&params, it)).collect();
    let report = evaluate_dataset(&params, &items, Strategy::AverageRule, true)?;
    let accuracy: Vec<f64> = report.per_item.iter().map(|r| r.predicted_30).collect();

    let suite = run_regressions("average/predicted_30", &features, &accuracy, 1.0, 0.01)?;
    println!("OLS (standardized), n = {}, R^2 = {:.3}", suite.ols.n, suite.ols.r_squared);
    print!("{}", suite.ols.to_csv()?);
    println!("LASSO(1.0) keeps {:?}", suite.lasso.selected);
    println!("stepwise(0.01) picks {:?}", suite.stepwise.iter().map(|s| &s.name).collect::<Vec<_>>());
    Ok(())
}
