mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use arc_vas::data::{load_dataset, Grid, Item, Pair};
use arc_vas::eval::{evaluate_with, score_official_with, OraclePredictor};
use arc_vas::preprocess::{canonicalize, padding, scale_factor};
use arc_vas::solver::{solve, SolveRequest, Strategy};
use arc_vas::vae::{decode, encode, reparameterize, Hyperparams, LatentDistribution, VaeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_model(seed: u64) -> VaeParams {
    VaeParams::new(&Hyperparams {
        filters: 4,
        latent_dim: 8,
        seed,
        ..Default::default()
    })
    .unwrap()
}

fn identity_item(rng: &mut ChaCha8Rng) -> Item {
    let mut pair = || {
        let g = common::random_grid(rng, 10, 6);
        Pair { input: g.clone(), output: g }
    };
    Item {
        id: "identity".into(),
        train: vec![pair(), pair(), pair()],
        test: vec![pair()],
    }
}

#[test]
fn zero_rule_prediction_is_the_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = small_model(2);
    for _ in 0..5 {
        let item = identity_item(&mut rng);
        let c = &item.first_test().input;
        let mu = encode(&params, &canonicalize(c)).unwrap();
        let recon = decode(&params, &reparameterize::<ChaCha8Rng>(&mu, None)).unwrap();
        for strategy in Strategy::ALL {
            let req = SolveRequest {
                strategy,
                deterministic: true,
                attempts: 1,
                expected_dims: c.dims(),
                seed: 0,
            };
            let pred = &solve(&params, &item, &req).unwrap()[0];
            assert_eq!(pred.rule_norm, 0.0);
            assert_eq!(pred.raw.tensor, recon.tensor);
        }
    }
}

#[test]
fn solving_is_reproducible_and_sampling_varies() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = small_model(4);
    let item = common::random_item(&mut rng, "r");
    let mut req = SolveRequest {
        strategy: Strategy::AverageRule,
        deterministic: true,
        attempts: 3,
        expected_dims: item.first_test().output.dims(),
        seed: 9,
    };
    let a = solve(&params, &item, &req).unwrap();
    let b = solve(&params, &item, &req).unwrap();
    assert_eq!(a[0].raw.tensor, b[0].raw.tensor);
    assert!(a.iter().all(|p| p.raw.tensor == a[0].raw.tensor));

    req.deterministic = false;
    let s1 = solve(&params, &item, &req).unwrap();
    let s2 = solve(&params, &item, &req).unwrap();
    for (x, y) in s1.iter().zip(&s2) {
        assert_eq!(x.raw.tensor, y.raw.tensor);
    }
    assert_ne!(s1[0].raw.tensor, s1[1].raw.tensor);
    assert!(s1.iter().all(|p| p.rescaled.dims() == item.first_test().output.dims()));
}

#[test]
fn strategies_differ_only_in_rule_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = small_model(6);
    // a single example makes both strategies pick the same rule vector
    let mut item = common::random_item(&mut rng, "one");
    item.train.truncate(1);
    let req = |strategy| SolveRequest {
        strategy,
        deterministic: true,
        attempts: 1,
        expected_dims: (3, 3),
        seed: 0,
    };
    let a = solve(&params, &item, &req(Strategy::AverageRule)).unwrap();
    let s = solve(&params, &item, &req(Strategy::SimilarityRule)).unwrap();
    assert_eq!(a[0].raw.tensor, s[0].raw.tensor);
}

#[test]
fn vanishing_variance_sample_stays_at_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mu: Vec<f32> = (0..128).map(|i| (i as f32 - 64.0) / 16.0).collect();
    let d = LatentDistribution {
        mu: mu.clone(),
        logvar: vec![-10.0; 128],
    };
    let z = reparameterize(&d, Some(&mut rng)).z;
    let norm_mu = mu.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
    let diff = z.iter().zip(&mu).map(|(a, b)| ((a - b) as f64).powi(2)).sum::<f64>().sqrt();
    assert!(diff <= 0.01 * norm_mu + 0.01);
    assert_eq!(reparameterize::<ChaCha8Rng>(&d, None).z, mu);
}

/// Black mass of the canvas recomputed from the raw grid, `k` and padding.
fn black_mass_oracle(g: &Grid) -> f64 {
    let k = scale_factor(g.height(), g.width());
    let (top, left) = padding(k * g.height(), k * g.width());
    let pad_cells = 900 - (k * g.height()) * (k * g.width());
    assert!(top <= 15 && left <= 15);
    let zeros = g.cells().iter().filter(|&&c| c == 0).count();
    (zeros * k * k + pad_cells) as f64
}

#[test]
fn channel_zero_mass_matches_scaled_black_fraction() {
    let three_example_item = common::arc_dir()
        .and_then(|d| load_dataset(d.join("training")).ok())
        .and_then(|items| items.into_iter().find(|it| it.train.len() == 3));
    let grids: Vec<Grid> = match &three_example_item {
        Some(item) => item.example_grids().cloned().collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            (0..6).map(|_| common::random_grid(&mut rng, 30, 10)).collect()
        }
    };
    for g in &grids {
        let c = canonicalize(g);
        let mass: f64 = c.tensor.index_axis(ndarray::Axis(0), 0).iter().map(|&v| v as f64).sum();
        assert_eq!(mass, black_mass_oracle(g));
    }
}

#[test]
fn oracle_predictor_on_the_official_sets() {
    let Some(dir) = common::arc_dir() else {
        eprintln!("ARC data not found; skipping");
        return;
    };
    for set in ["training", "evaluation"] {
        let items = load_dataset(dir.join(set)).unwrap();
        assert_eq!(items.len(), 400);
        let r = evaluate_with(&OraclePredictor, &items, Strategy::AverageRule, true, 0).unwrap();
        assert_eq!(
            [r.predicted_30, r.predicted_rescaled, r.zero_filtered_30, r.zero_filtered_rescaled],
            [1.0; 4]
        );
        let s = score_official_with(&OraclePredictor, &items, Strategy::SimilarityRule, 3, 0).unwrap();
        assert_eq!(s.solved, 400);
    }
}

fn write_items(dir: &Path, items: &[Item]) {
    fs::create_dir_all(dir).unwrap();
    for it in items {
        fs::write(dir.join(format!("{}.json", it.id)), it.to_json()).unwrap();
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_arc-vas")).args(args).env("ARC_VAS_LOG", "warn").output().unwrap()
}

#[test]
fn command_line_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("arc");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let train: Vec<Item> = (0..400).map(|i| common::random_item(&mut rng, &format!("t{i:03}"))).collect();
    let eval: Vec<Item> = (0..40).map(|i| common::random_item(&mut rng, &format!("e{i:03}"))).collect();
    write_items(&data.join("training"), &train);
    write_items(&data.join("evaluation"), &eval);
    let out = tmp.path().join("out");
    let config = tmp.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "data = {:?}\nout = {:?}\nseed = 3\n[augment]\ncolor_copies = 0\nmirror = false\nrotate_fraction = 0.0\n[hyperparams]\nfilters = 4\nlatent_dim = 8\n",
            data, out
        ),
    )
    .unwrap();
    let cfg = config.to_str().unwrap();

    let r = cli(&["--config", cfg, "train", "--epochs", "0"]);
    assert_eq!(r.status.code(), Some(2));

    let r = cli(&["--config", cfg, "train", "--epochs", "1"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["best.ckpt", "last.ckpt", "train_log.jsonl", "corpus_report.json", "split.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let split: serde_json::Value = serde_json::from_slice(&fs::read(out.join("split.json")).unwrap()).unwrap();
    assert_eq!(split["train_ids"].as_array().unwrap().len(), 300);
    assert_eq!(split["validation_ids"].as_array().unwrap().len(), 100);

    let a = cli(&["--config", cfg, "--deterministic", "solve", "e007"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = cli(&["--config", cfg, "--deterministic", "solve", "e007"]);
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["provenance"]["seed"], 3);
    assert!(json["provenance"]["checkpoint_hash"].is_string());
    let strategies: Vec<&str> = json["predictions"].as_array().unwrap().iter().map(|p| p["strategy"].as_str().unwrap()).collect();
    assert!(strategies.contains(&"average") && strategies.contains(&"similarity"));

    assert_eq!(cli(&["--config", cfg, "solve", "missing"]).status.code(), Some(3));
    assert_eq!(cli(&["--data", "/nonexistent", "corpus-report"]).status.code(), Some(2));

    let r = cli(&["--config", cfg, "eval"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let table = fs::read_to_string(out.join("accuracy_table.csv")).unwrap();
    assert!(table.starts_with("# config_hash="));
    for label in ["Predicted 30x30", "Predicted Rescaled", "Zero Filtered 30x30", "Zero Filtered Rescaled"] {
        assert!(table.contains(label));
    }
    let pgm = fs::read_to_string(out.join("heatmap.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n# config_hash="));

    let r = cli(&["--config", cfg, "analyze"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let regs: serde_json::Value = serde_json::from_slice(&fs::read(out.join("regressions.json")).unwrap()).unwrap();
    let body = regs.as_object().unwrap();
    assert!(body.contains_key("provenance"));
}
