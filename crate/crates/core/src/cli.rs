//! Command-line front end: argument parsing, run configuration and the
//! subcommands behind the `arc-vas` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::analysis::{extract_features, features_csv, run_regressions, ItemFeatures, RegressionSuite};
use crate::augment::{build_training_corpus, AugmentConfig, CorpusReport};
use crate::data::{load_dataset, split_train_validation, DatasetSplit, Grid, Item};
use crate::error::{Error, Result};
use crate::eval::{
    accuracy_table_csv, concept_table_csv, evaluate_with, load_conceptarc, score_conceptarc, score_official, AccuracyReport, OfficialScore, VaePredictor,
};
use crate::preprocess::canvas_grid;
use crate::seed::digest_hex;
use crate::solver::{solve, Prediction, SolveRequest, Strategy};
use crate::vae::{border_center_means, canvas_heatmap, decode_checkpoint, train, Hyperparams, TrainOptions, VaeParams};

/// Environment variable holding the log filter (e.g. `debug`).
pub const LOG_ENV: &str = "ARC_VAS_LOG";

#[derive(Debug, Parser)]
#[command(name = "arc-vas", version, about = "Solve ARC items by latent vector arithmetic in a VAE")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// ARC root holding `training/` and `evaluation/`.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Directory receiving all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    #[arg(long, global = true)]
    pub attempts: Option<usize>,
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker threads for item-parallel work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML file whose keys are the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// ConceptARC root with one sub-directory per concept.
    #[arg(long, global = true)]
    pub conceptarc: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split, augment and train; writes checkpoints, log and corpus report.
    Train {
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Solve one item by id and print the prediction JSON.
    Solve { item_id: String },
    /// Cell-accuracy table, exact-match scores and the reconstruction heatmap.
    Eval,
    /// Item features and regressions of accuracy on them.
    Analyze,
    /// Per-pixel reconstruction heatmap over the validation split.
    Heatmap,
    /// Counts of the augmented training corpus.
    CorpusReport,
}

/// Fully resolved settings; CLI flags override the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    pub conceptarc: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub strategy: Option<Strategy>,
    pub attempts: usize,
    pub deterministic: bool,
    pub jobs: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub augment: AugmentConfig,
    pub hyperparams: Hyperparams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: PathBuf::from("data/arc"),
            conceptarc: None,
            out: PathBuf::from("artifacts"),
            seed: 0,
            strategy: None,
            attempts: 3,
            deterministic: false,
            jobs: None,
            checkpoint: None,
            epochs: None,
            augment: AugmentConfig::default(),
            hyperparams: Hyperparams::default(),
        }
    }
}

impl RunConfig {
    pub fn resolve(common: &CommonArgs, epochs: Option<usize>) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &common.data {
            cfg.data = v.clone();
        }
        if let Some(v) = &common.out {
            cfg.out = v.clone();
        }
        if let Some(v) = common.seed {
            cfg.seed = v;
        }
        if common.strategy.is_some() {
            cfg.strategy = common.strategy;
        }
        if let Some(v) = common.attempts {
            cfg.attempts = v;
        }
        cfg.deterministic |= common.deterministic;
        if common.jobs.is_some() {
            cfg.jobs = common.jobs;
        }
        if common.checkpoint.is_some() {
            cfg.checkpoint = common.checkpoint.clone();
        }
        if common.conceptarc.is_some() {
            cfg.conceptarc = common.conceptarc.clone();
        }
        if epochs.is_some() {
            cfg.epochs = epochs;
        }
        cfg.augment.seed = cfg.seed;
        cfg.hyperparams.seed = cfg.seed;
        if let Some(e) = cfg.epochs {
            cfg.hyperparams.epochs = e;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        self.augment.validate()?;
        if self.attempts == 0 {
            return Err(Error::Config("attempts must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if !self.data.is_dir() {
            return Err(Error::Config(format!("data directory {} does not exist", self.data.display())));
        }
        if let Some(c) = &self.conceptarc {
            if !c.is_dir() {
                return Err(Error::Config(format!("ConceptARC directory {} does not exist", c.display())));
            }
        }
        if let Some(c) = &self.checkpoint {
            if !c.is_file() {
                return Err(Error::Config(format!("checkpoint {} does not exist", c.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        digest_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn strategies(&self) -> Vec<Strategy> {
        match self.strategy {
            Some(s) => vec![s],
            None => Strategy::ALL.to_vec(),
        }
    }

    fn training_items(&self) -> Result<Vec<Item>> {
        load_dataset(self.data.join("training"))
    }

    fn evaluation_items(&self) -> Result<Vec<Item>> {
        load_dataset(self.data.join("evaluation"))
    }

    fn split(&self) -> Result<DatasetSplit> {
        split_train_validation(&self.training_items()?, self.seed)
    }

    fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| self.out.join("best.ckpt"))
    }
}

/// Identifies the inputs an artifact was produced from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub checkpoint_hash: Option<String>,
    pub seed: u64,
}

impl Provenance {
    pub fn comment(&self) -> String {
        format!(
            "config_hash={} checkpoint_hash={} seed={}",
            self.config_hash,
            self.checkpoint_hash.as_deref().unwrap_or("none"),
            self.seed
        )
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, prov: &Provenance, body: T) -> Result<String> {
    let text = serde_json::to_string_pretty(&Stamped { provenance: prov, body }).expect("artifacts serialize") + "\n";
    write_text(path, &text)?;
    Ok(text)
}

/// CSV with a leading `#` provenance line.
fn write_csv(path: &Path, prov: &Provenance, csv: &str) -> Result<()> {
    write_text(path, &format!("# {}\n{csv}", prov.comment()))
}

/// Plain (ASCII) PGM with max value `max(count, 1)`.
pub fn heatmap_pgm(map: &Array2<u32>, count: usize, comment: &str) -> String {
    let (h, w) = map.dim();
    let mut s = format!("P2\n# {comment}\n{w} {h}\n{}\n", count.clamp(1, 65535));
    for row in map.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn heatmap_csv(map: &Array2<u32>) -> String {
    let mut s = String::new();
    for row in map.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

fn load_model(cfg: &RunConfig) -> Result<(VaeParams, Provenance)> {
    let path = cfg.checkpoint_path();
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let (params, _) = decode_checkpoint(&bytes)?;
    let prov = Provenance {
        config_hash: cfg.hash(),
        checkpoint_hash: Some(digest_hex(&bytes)),
        seed: cfg.seed,
    };
    Ok((params, prov))
}

fn no_model_provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        config_hash: cfg.hash(),
        checkpoint_hash: None,
        seed: cfg.seed,
    }
}

fn corpus(cfg: &RunConfig, split: &DatasetSplit) -> Result<crate::augment::TrainingCorpus> {
    build_training_corpus(&split.train_items, &cfg.augment)
}

/// Every grid of the validation items (example and test pairs).
pub fn validation_grids(split: &DatasetSplit) -> Vec<Grid> {
    split
        .validation_items
        .iter()
        .flat_map(|it| it.train.iter().chain(&it.test).flat_map(|p| p.grids()))
        .cloned()
        .collect()
}

#[derive(Serialize)]
struct SplitRecord<'a> {
    seed: u64,
    train_ids: Vec<&'a str>,
    validation_ids: Vec<&'a str>,
}

pub fn cmd_corpus_report(cfg: &RunConfig) -> Result<CorpusReport> {
    let split = cfg.split()?;
    let report = corpus(cfg, &split)?.report;
    write_json(&cfg.out.join("corpus_report.json"), &no_model_provenance(cfg), &report)?;
    Ok(report)
}

pub fn cmd_train(cfg: &RunConfig) -> Result<PathBuf> {
    let split = cfg.split()?;
    let prov = no_model_provenance(cfg);
    write_json(
        &cfg.out.join("split.json"),
        &prov,
        SplitRecord {
            seed: split.seed,
            train_ids: split.train_ids(),
            validation_ids: split.validation_ids(),
        },
    )?;
    let corpus = corpus(cfg, &split)?;
    write_json(&cfg.out.join("corpus_report.json"), &prov, &corpus.report)?;
    log::info!("training on {} grids", corpus.grids.len());
    let opts = TrainOptions {
        checkpoint_dir: Some(cfg.out.clone()),
        log_path: Some(cfg.out.join("train_log.jsonl")),
        target_accuracy: None,
    };
    let (_, log) = train(&corpus.grids, &validation_grids(&split), &cfg.hyperparams, &opts)?;
    log::info!("best epoch {} (validation accuracy {:.4})", log.best_epoch, log.best_val_accuracy);
    Ok(cfg.out.join("best.ckpt"))
}

fn find_item(cfg: &RunConfig, id: &str) -> Result<Item> {
    for set in ["evaluation", "training"] {
        let dir = cfg.data.join(set);
        if dir.is_dir() {
            if let Some(item) = load_dataset(&dir)?.into_iter().find(|it| it.id == id) {
                return Ok(item);
            }
        }
    }
    Err(Error::Lookup(format!("no item with id {id}")))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    item_id: &'a str,
    expected_dims: (usize, usize),
    predictions: Vec<Prediction>,
}

pub fn cmd_solve(cfg: &RunConfig, item_id: &str) -> Result<String> {
    let item = find_item(cfg, item_id)?;
    let (params, prov) = load_model(cfg)?;
    let expected_dims = item.first_test().output.dims();
    let mut predictions = Vec::new();
    for strategy in cfg.strategies() {
        let req = SolveRequest {
            strategy,
            deterministic: cfg.deterministic,
            attempts: cfg.attempts,
            expected_dims,
            seed: cfg.seed,
        };
        predictions.extend(solve(&params, &item, &req)?);
    }
    write_json(
        &cfg.out.join(format!("solve_{item_id}.json")),
        &prov,
        SolveOutput {
            item_id,
            expected_dims,
            predictions,
        },
    )
}

fn write_heatmap(cfg: &RunConfig, params: &VaeParams, prov: &Provenance) -> Result<(f64, f64)> {
    let split = cfg.split()?;
    let canvases: Vec<Grid> = validation_grids(&split).iter().map(canvas_grid).collect();
    let refs: Vec<&Grid> = canvases.iter().collect();
    let map = canvas_heatmap(params, &refs);
    write_text(&cfg.out.join("heatmap.pgm"), &heatmap_pgm(&map, refs.len(), &prov.comment()))?;
    write_csv(&cfg.out.join("heatmap.csv"), prov, &heatmap_csv(&map))?;
    let (border, center) = border_center_means(&map, 4, 10);
    log::info!("heatmap over {} grids: border mean {border:.1}, center mean {center:.1}", refs.len());
    Ok((border, center))
}

pub fn cmd_heatmap(cfg: &RunConfig) -> Result<(f64, f64)> {
    let (params, prov) = load_model(cfg)?;
    write_heatmap(cfg, &params, &prov)
}

#[derive(Serialize)]
struct Scores<'a> {
    scores: &'a [OfficialScore],
}

#[derive(Serialize)]
struct Suites<'a> {
    suites: &'a [RegressionSuite],
}

#[derive(Serialize)]
pub struct EvalSummary {
    pub accuracy: Vec<AccuracyReport>,
    pub official_evaluation: Vec<OfficialScore>,
    pub official_training: Vec<OfficialScore>,
    pub heatmap_border_mean: f64,
    pub heatmap_center_mean: f64,
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalSummary> {
    let (params, prov) = load_model(cfg)?;
    let eval_items = cfg.evaluation_items()?;
    let train_items = cfg.training_items()?;
    let predictor = VaePredictor { params: &params };
    let mut accuracy = Vec::new();
    let mut official_evaluation = Vec::new();
    let mut official_training = Vec::new();
    for strategy in cfg.strategies() {
        let report = evaluate_with(&predictor, &eval_items, strategy, true, cfg.seed)?;
        write_json(&cfg.out.join(format!("accuracy_{strategy}.json")), &prov, &report)?;
        accuracy.push(report);
        let score = score_official(&params, &eval_items, strategy, cfg.attempts, cfg.seed)?;
        log::info!("{strategy}: solved {}/{} evaluation items", score.solved, score.total);
        official_evaluation.push(score);
        let score = score_official(&params, &train_items, strategy, cfg.attempts, cfg.seed)?;
        log::info!("{strategy}: solved {}/{} training items", score.solved, score.total);
        official_training.push(score);
    }
    let columns: Vec<(String, &AccuracyReport)> = accuracy.iter().map(|r| (format!("evaluation/{}", r.strategy), r)).collect();
    write_csv(&cfg.out.join("accuracy_table.csv"), &prov, &accuracy_table_csv(&columns)?)?;
    write_json(&cfg.out.join("official_evaluation.json"), &prov, Scores { scores: &official_evaluation })?;
    write_json(&cfg.out.join("official_training.json"), &prov, Scores { scores: &official_training })?;

    if let Some(dir) = &cfg.conceptarc {
        let items = load_conceptarc(dir)?;
        let avg = score_conceptarc(&params, &items, Strategy::AverageRule, cfg.attempts, cfg.seed)?;
        let sim = score_conceptarc(&params, &items, Strategy::SimilarityRule, cfg.attempts, cfg.seed)?;
        write_csv(&cfg.out.join("conceptarc.csv"), &prov, &concept_table_csv(&avg, &sim)?)?;
    }
    let (heatmap_border_mean, heatmap_center_mean) = write_heatmap(cfg, &params, &prov)?;
    Ok(EvalSummary {
        accuracy,
        official_evaluation,
        official_training,
        heatmap_border_mean,
        heatmap_center_mean,
    })
}

/// Four regressions: each strategy against 30x30 and rescaled accuracy.
pub fn regression_suites(features: &[ItemFeatures], reports: &[AccuracyReport]) -> Result<Vec<RegressionSuite>> {
    let mut suites = Vec::new();
    for report in reports {
        let acc30: Vec<f64> = report.per_item.iter().map(|r| r.predicted_30).collect();
        let acc_rs: Vec<f64> = report.per_item.iter().map(|r| r.predicted_rescaled).collect();
        suites.push(run_regressions(&format!("{}/predicted_30", report.strategy), features, &acc30, 1.0, 0.01)?);
        suites.push(run_regressions(&format!("{}/predicted_rescaled", report.strategy), features, &acc_rs, 1.0, 0.01)?);
    }
    Ok(suites)
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<RegressionSuite>> {
    let (params, prov) = load_model(cfg)?;
    let items = cfg.evaluation_items()?;
    let features: Vec<ItemFeatures> = {
        use rayon::prelude::*;
        items.par_iter().map(|it| extract_features(&params, it)).collect()
    };
    write_csv(&cfg.out.join("features.csv"), &prov, &features_csv(&features)?)?;
    let predictor = VaePredictor { params: &params };
    let reports = Strategy::ALL
        .into_iter()
        .map(|s| evaluate_with(&predictor, &items, s, true, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    let suites = regression_suites(&features, &reports)?;
    for suite in &suites {
        let stem = suite.target.replace('/', "_");
        write_csv(&cfg.out.join(format!("ols_{stem}.csv")), &prov, &suite.ols.to_csv()?)?;
    }
    write_json(&cfg.out.join("regressions.json"), &prov, Suites { suites: &suites })?;
    Ok(suites)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io { .. } => 2,
        Error::Lookup(_) => 3,
        _ => 1,
    }
}

/// Parses already-split arguments and runs the command; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let epochs = match &cli.command {
        Command::Train { epochs } => *epochs,
        _ => None,
    };
    let result = RunConfig::resolve(&cli.common, epochs).and_then(|cfg| {
        cfg.validate()?;
        if let Some(n) = cfg.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        match &cli.command {
            Command::Train { .. } => cmd_train(&cfg).map(|p| println!("{}", p.display())),
            Command::Solve { item_id } => cmd_solve(&cfg, item_id).map(|json| print!("{json}")),
            Command::Eval => cmd_eval(&cfg).map(|s| {
                for r in &s.accuracy {
                    println!(
                        "{}: 30x30 {:.2}%  rescaled {:.2}%  zero-filtered 30x30 {:.2}%  zero-filtered rescaled {:.2}%",
                        r.strategy,
                        100.0 * r.predicted_30,
                        100.0 * r.predicted_rescaled,
                        100.0 * r.zero_filtered_30,
                        100.0 * r.zero_filtered_rescaled
                    );
                }
                for (e, t) in s.official_evaluation.iter().zip(&s.official_training) {
                    println!("{}: exact {}/{} evaluation, {}/{} training", e.strategy, e.solved, e.total, t.solved, t.total);
                }
            }),
            Command::Analyze => cmd_analyze(&cfg).map(|suites| {
                for s in suites {
                    let picked: Vec<&str> = s.stepwise.iter().map(|st| st.name.as_str()).collect();
                    println!("{}: R^2 {:.3}, lasso {:?}, stepwise {:?}", s.target, s.ols.r_squared, s.lasso.selected, picked);
                }
            }),
            Command::Heatmap => cmd_heatmap(&cfg).map(|(b, c)| println!("border mean {b:.1}, center mean {c:.1}")),
            Command::CorpusReport => cmd_corpus_report(&cfg).map(|r| println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"))),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("arc-vas").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 4\nattempts = 5\nstrategy = \"similarity\"\n[hyperparams]\nfilters = 8\n").unwrap();
        let cli = parse(&["--config", path.to_str().unwrap(), "--seed", "9", "train", "--epochs", "2"]);
        let cfg = RunConfig::resolve(&cli.common, Some(2)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.hyperparams.seed, 9);
        assert_eq!(cfg.augment.seed, 9);
        assert_eq!(cfg.attempts, 5);
        assert_eq!(cfg.strategy, Some(Strategy::SimilarityRule));
        assert_eq!(cfg.hyperparams.filters, 8);
        assert_eq!(cfg.hyperparams.epochs, 2);
    }

    #[test]
    fn zero_epochs_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cli = parse(&["--data", dir.path().to_str().unwrap(), "train", "--epochs", "0"]);
        let cfg = RunConfig::resolve(&cli.common, Some(0)).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn missing_data_dir_exits_with_2() {
        let cli = parse(&["--data", "/nonexistent/arc", "corpus-report"]);
        assert_eq!(run(cli), 2);
    }

    #[test]
    fn unknown_item_exits_with_3() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("evaluation")).unwrap();
        let cli = parse(&["--data", dir.path().to_str().unwrap(), "solve", "nope"]);
        assert_eq!(run(cli), 3);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "sed = 4\n").unwrap();
        let cli = parse(&["--config", path.to_str().unwrap(), "heatmap"]);
        assert!(matches!(RunConfig::resolve(&cli.common, None), Err(Error::Config(_))));
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn heatmap_formats() {
        let mut map = Array2::zeros((2, 3));
        map[[0, 1]] = 4;
        map[[1, 2]] = 7;
        let pgm = heatmap_pgm(&map, 7, "x");
        assert_eq!(pgm, "P2\n# x\n3 2\n7\n0 4 0\n0 0 7\n");
        assert_eq!(heatmap_csv(&map), "0,4,0\n0,0,7\n");
        assert!(heatmap_pgm(&map, 0, "x").contains("\n1\n"));
    }
}
