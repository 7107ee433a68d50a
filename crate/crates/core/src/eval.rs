//! Scoring: four-condition cell accuracy, exact-match scoring over several
//! attempts, and per-concept ConceptARC tables.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_dataset, Grid, Item};
use crate::error::{Error, Result};
use crate::preprocess::{canvas_grid, CANVAS};
use crate::solver::{solve, SolveRequest, Strategy};
use crate::vae::VaeParams;

fn matching(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

fn check_canvas(pred: &Grid) -> Result<()> {
    if pred.dims() != (CANVAS, CANVAS) {
        return Err(Error::Shape(format!("expected a 30x30 prediction, got {}x{}", pred.height(), pred.width())));
    }
    Ok(())
}

fn check_same_dims(pred: &Grid, expected: &Grid) -> Result<()> {
    if pred.dims() != expected.dims() {
        return Err(Error::Shape(format!(
            "prediction is {}x{} but expected output is {}x{}",
            pred.height(),
            pred.width(),
            expected.height(),
            expected.width()
        )));
    }
    Ok(())
}

/// Share of the 900 canvas cells matching the canonicalized expected grid.
pub fn cell_accuracy_30(pred: &Grid, expected: &Grid) -> Result<f64> {
    check_canvas(pred)?;
    let target = canvas_grid(expected);
    Ok(matching(pred.cells(), target.cells()) as f64 / target.len() as f64)
}

pub fn cell_accuracy_rescaled(pred: &Grid, expected: &Grid) -> Result<f64> {
    check_same_dims(pred, expected)?;
    Ok(matching(pred.cells(), expected.cells()) as f64 / expected.len() as f64)
}

/// Accuracy over the cells that are non-black in the expected grid.
///
/// With `canvas30` the expected grid is canonicalized first and `pred` must
/// be 30x30. Returns `None` when the expected grid is entirely black.
pub fn zero_filtered_accuracy(pred: &Grid, expected: &Grid, canvas30: bool) -> Result<Option<f64>> {
    let target = if canvas30 {
        check_canvas(pred)?;
        canvas_grid(expected)
    } else {
        check_same_dims(pred, expected)?;
        expected.clone()
    };
    let mut colored = 0usize;
    let mut hits = 0usize;
    for (&p, &t) in pred.cells().iter().zip(target.cells()) {
        if t != 0 {
            colored += 1;
            hits += usize::from(p == t);
        }
    }
    Ok((colored > 0).then(|| hits as f64 / colored as f64))
}

/// One attempt's output: the raw canvas argmax and its rescaled version.
#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub grid30: Grid,
    pub rescaled: Grid,
}

/// Anything that can answer an item's first test input.
pub trait Predictor: Sync {
    fn predict(&self, item: &Item, req: &SolveRequest) -> Result<Vec<Attempt>>;
}

/// The latent-arithmetic solver backed by trained parameters.
pub struct VaePredictor<'a> {
    pub params: &'a VaeParams,
}

impl Predictor for VaePredictor<'_> {
    fn predict(&self, item: &Item, req: &SolveRequest) -> Result<Vec<Attempt>> {
        Ok(solve(self.params, item, req)?
            .into_iter()
            .map(|p| Attempt {
                grid30: p.grid30,
                rescaled: p.rescaled,
            })
            .collect())
    }
}

/// Answers with the expected output itself; every metric should read 1.0.
pub struct OraclePredictor;

impl Predictor for OraclePredictor {
    fn predict(&self, item: &Item, req: &SolveRequest) -> Result<Vec<Attempt>> {
        let expected = &item.first_test().output;
        Ok((0..req.attempts)
            .map(|_| Attempt {
                grid30: canvas_grid(expected),
                rescaled: expected.clone(),
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemAccuracy {
    pub id: String,
    pub predicted_30: f64,
    pub predicted_rescaled: f64,
    pub zero_filtered_30: Option<f64>,
    pub zero_filtered_rescaled: Option<f64>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub strategy: Strategy,
    pub deterministic: bool,
    pub n: usize,
    pub predicted_30: f64,
    pub predicted_rescaled: f64,
    pub zero_filtered_30: f64,
    pub zero_filtered_rescaled: f64,
    /// Items contributing to the zero-filtered means (expected output not all black).
    pub zero_filtered_n: usize,
    pub per_item: Vec<ItemAccuracy>,
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        (0.0, 0)
    } else {
        (sum / n as f64, n)
    }
}

pub fn item_accuracy(item: &Item, attempt: &Attempt) -> Result<ItemAccuracy> {
    let expected = &item.first_test().output;
    Ok(ItemAccuracy {
        id: item.id.clone(),
        predicted_30: cell_accuracy_30(&attempt.grid30, expected)?,
        predicted_rescaled: cell_accuracy_rescaled(&attempt.rescaled, expected)?,
        zero_filtered_30: zero_filtered_accuracy(&attempt.grid30, expected, true)?,
        zero_filtered_rescaled: zero_filtered_accuracy(&attempt.rescaled, expected, false)?,
        exact: attempt.rescaled == *expected,
    })
}

/// Scores the first attempt of every item on the four cell-accuracy
/// conditions; per-item values are averaged with equal item weight.
pub fn evaluate_with(predictor: &dyn Predictor, items: &[Item], strategy: Strategy, deterministic: bool, seed: u64) -> Result<AccuracyReport> {
    let per_item = items
        .par_iter()
        .map(|item| {
            let req = SolveRequest {
                strategy,
                deterministic,
                attempts: 1,
                expected_dims: item.first_test().output.dims(),
                seed,
            };
            let attempts = predictor.predict(item, &req)?;
            let first = attempts.first().ok_or_else(|| Error::Solver(format!("no prediction for {}", item.id)))?;
            item_accuracy(item, first)
        })
        .collect::<Result<Vec<_>>>()?;
    let (predicted_30, n) = mean(per_item.iter().map(|r| r.predicted_30));
    let (predicted_rescaled, _) = mean(per_item.iter().map(|r| r.predicted_rescaled));
    let (zero_filtered_30, zero_filtered_n) = mean(per_item.iter().filter_map(|r| r.zero_filtered_30));
    let (zero_filtered_rescaled, _) = mean(per_item.iter().filter_map(|r| r.zero_filtered_rescaled));
    Ok(AccuracyReport {
        strategy,
        deterministic,
        n,
        predicted_30,
        predicted_rescaled,
        zero_filtered_30,
        zero_filtered_rescaled,
        zero_filtered_n,
        per_item,
    })
}

pub fn evaluate_dataset(params: &VaeParams, items: &[Item], strategy: Strategy, deterministic: bool) -> Result<AccuracyReport> {
    evaluate_with(&VaePredictor { params }, items, strategy, deterministic, 0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfficialScore {
    pub strategy: Strategy,
    pub seed: u64,
    pub solved: usize,
    pub total: usize,
    pub attempts_per_item: usize,
    pub solved_ids: Vec<String>,
}

impl OfficialScore {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.solved as f64 / self.total as f64
        }
    }
}

/// Whether any of `attempts` sampled, rescaled predictions equals the
/// expected first test output.
pub fn solves_item(predictor: &dyn Predictor, item: &Item, strategy: Strategy, attempts: usize, seed: u64) -> Result<bool> {
    let expected = &item.first_test().output;
    let req = SolveRequest {
        strategy,
        deterministic: false,
        attempts,
        expected_dims: expected.dims(),
        seed,
    };
    Ok(predictor.predict(item, &req)?.iter().any(|a| a.rescaled == *expected))
}

pub fn score_official_with(predictor: &dyn Predictor, items: &[Item], strategy: Strategy, attempts: usize, seed: u64) -> Result<OfficialScore> {
    let solved: Vec<bool> = items
        .par_iter()
        .map(|item| solves_item(predictor, item, strategy, attempts, seed))
        .collect::<Result<_>>()?;
    let solved_ids: Vec<String> = items.iter().zip(&solved).filter(|(_, &s)| s).map(|(it, _)| it.id.clone()).collect();
    Ok(OfficialScore {
        strategy,
        seed,
        solved: solved_ids.len(),
        total: items.len(),
        attempts_per_item: attempts,
        solved_ids,
    })
}

pub fn score_official(params: &VaeParams, items: &[Item], strategy: Strategy, attempts: usize, seed: u64) -> Result<OfficialScore> {
    score_official_with(&VaePredictor { params }, items, strategy, attempts, seed)
}

/// The sixteen ConceptARC concept groups, named as their corpus directories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Concept {
    AboveBelow,
    Center,
    CleanUp,
    CompleteShape,
    Copy,
    Count,
    ExtendToBoundary,
    ExtractObjects,
    FilledNotFilled,
    HorizontalVertical,
    InsideOutside,
    MoveToBoundary,
    Order,
    SameDifferent,
    TopBottom2D,
    TopBottom3D,
}

impl Concept {
    pub const ALL: [Concept; 16] = [
        Concept::AboveBelow,
        Concept::Center,
        Concept::CleanUp,
        Concept::CompleteShape,
        Concept::Copy,
        Concept::Count,
        Concept::ExtendToBoundary,
        Concept::ExtractObjects,
        Concept::FilledNotFilled,
        Concept::HorizontalVertical,
        Concept::InsideOutside,
        Concept::MoveToBoundary,
        Concept::Order,
        Concept::SameDifferent,
        Concept::TopBottom2D,
        Concept::TopBottom3D,
    ];

    pub fn dir_name(self) -> &'static str {
        match self {
            Concept::AboveBelow => "AboveBelow",
            Concept::Center => "Center",
            Concept::CleanUp => "CleanUp",
            Concept::CompleteShape => "CompleteShape",
            Concept::Copy => "Copy",
            Concept::Count => "Count",
            Concept::ExtendToBoundary => "ExtendToBoundary",
            Concept::ExtractObjects => "ExtractObjects",
            Concept::FilledNotFilled => "FilledNotFilled",
            Concept::HorizontalVertical => "HorizontalVertical",
            Concept::InsideOutside => "InsideOutside",
            Concept::MoveToBoundary => "MoveToBoundary",
            Concept::Order => "Order",
            Concept::SameDifferent => "SameDifferent",
            Concept::TopBottom2D => "TopBottom2D",
            Concept::TopBottom3D => "TopBottom3D",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Concept::AboveBelow => "Above and Below",
            Concept::Center => "Center",
            Concept::CleanUp => "Clean Up",
            Concept::CompleteShape => "Complete Shape",
            Concept::Copy => "Copy",
            Concept::Count => "Count",
            Concept::ExtendToBoundary => "Extend To Boundary",
            Concept::ExtractObjects => "Extract Objects",
            Concept::FilledNotFilled => "Filled and Not Filled",
            Concept::HorizontalVertical => "Horizontal and Vertical",
            Concept::InsideOutside => "Inside and Outside",
            Concept::MoveToBoundary => "Move To Boundary",
            Concept::Order => "Order",
            Concept::SameDifferent => "Same and Different",
            Concept::TopBottom2D => "Top and Bottom 2D",
            Concept::TopBottom3D => "Top and Bottom 3D",
        }
    }

    /// Published human accuracy on the concept group.
    pub fn human_accuracy(self) -> f64 {
        match self {
            Concept::AboveBelow => 0.90,
            Concept::Center => 0.94,
            Concept::CleanUp => 0.97,
            Concept::CompleteShape => 0.85,
            Concept::Copy => 0.94,
            Concept::Count => 0.88,
            Concept::ExtendToBoundary => 0.93,
            Concept::ExtractObjects => 0.86,
            Concept::FilledNotFilled => 0.96,
            Concept::HorizontalVertical => 0.91,
            Concept::InsideOutside => 0.91,
            Concept::MoveToBoundary => 0.91,
            Concept::Order => 0.83,
            Concept::SameDifferent => 0.88,
            Concept::TopBottom2D => 0.95,
            Concept::TopBottom3D => 0.93,
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl FromStr for Concept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Concept::ALL
            .into_iter()
            .find(|c| c.dir_name() == s)
            .ok_or_else(|| Error::validation(s, "unknown concept tag"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptItem {
    pub concept: Concept,
    pub item: Item,
}

/// Loads a ConceptARC corpus laid out as one sub-directory per concept.
pub fn load_conceptarc(directory: impl AsRef<Path>) -> Result<Vec<ConceptItem>> {
    let dir = directory.as_ref();
    let mut subdirs: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut out = Vec::new();
    for sub in subdirs {
        let name = sub.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let concept: Concept = name.parse()?;
        out.extend(load_dataset(&sub)?.into_iter().map(|item| ConceptItem { concept, item }));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub concept: Concept,
    pub items: usize,
    pub solved: usize,
    pub accuracy: f64,
}

/// Per-concept solved fraction (first test input, `attempts` samples), in
/// [`Concept::ALL`] order; concepts without items score 0.
pub fn score_conceptarc_with(predictor: &dyn Predictor, items: &[ConceptItem], strategy: Strategy, attempts: usize, seed: u64) -> Result<Vec<ConceptScore>> {
    let solved: Vec<bool> = items
        .par_iter()
        .map(|ci| solves_item(predictor, &ci.item, strategy, attempts, seed))
        .collect::<Result<_>>()?;
    Ok(Concept::ALL
        .into_iter()
        .map(|concept| {
            let (n, s) = items
                .iter()
                .zip(&solved)
                .filter(|(ci, _)| ci.concept == concept)
                .fold((0, 0), |(n, s), (_, &ok)| (n + 1, s + usize::from(ok)));
            ConceptScore {
                concept,
                items: n,
                solved: s,
                accuracy: if n == 0 { 0.0 } else { s as f64 / n as f64 },
            }
        })
        .collect())
}

pub fn score_conceptarc(params: &VaeParams, items: &[ConceptItem], strategy: Strategy, attempts: usize, seed: u64) -> Result<Vec<ConceptScore>> {
    score_conceptarc_with(&VaePredictor { params }, items, strategy, attempts, seed)
}

/// Concept table with columns concept, human, average_rv, similarity_rv.
pub fn concept_table_csv(average: &[ConceptScore], similarity: &[ConceptScore]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(["concept", "human", "average_rv", "similarity_rv"]).map_err(io)?;
    for concept in Concept::ALL {
        let find = |rows: &[ConceptScore]| rows.iter().find(|r| r.concept == concept).map_or(0.0, |r| r.accuracy);
        w.write_record([
            concept.label().to_string(),
            format!("{:.2}", concept.human_accuracy()),
            format!("{:.2}", find(average)),
            format!("{:.2}", find(similarity)),
        ])
        .map_err(io)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?).expect("csv output is utf-8"))
}

pub const TABLE_ROWS: [&str; 4] = ["Predicted 30x30", "Predicted Rescaled", "Zero Filtered 30x30", "Zero Filtered Rescaled"];

/// Cell-accuracy table: one row per condition, one column per report
/// (labelled `<dataset>/<strategy>`), values in percent.
pub fn accuracy_table_csv(columns: &[(String, &AccuracyReport)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let mut header = vec!["condition".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    w.write_record(&header).map_err(io)?;
    for (i, label) in TABLE_ROWS.iter().enumerate() {
        let mut row = vec![label.to_string()];
        for (_, r) in columns {
            let v = [r.predicted_30, r.predicted_rescaled, r.zero_filtered_30, r.zero_filtered_rescaled][i];
            row.push(format!("{:.2}", 100.0 * v));
        }
        w.write_record(&row).map_err(io)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?).expect("csv output is utf-8"))
}
