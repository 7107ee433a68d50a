//! Per-item complexity features and the regressions relating them to solver
//! accuracy: OLS with t-based inference, LASSO by coordinate descent, and
//! forward stepwise selection.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{Grid, Item};
use crate::error::{Error, Result};
use crate::preprocess::{canvas_grid, scale_factor};
use crate::vae::{canvas_reconstruction_accuracy, VaeParams};

pub const FEATURE_NAMES: [&str; 18] = [
    "Number_Examples",
    "Size_Differences",
    "Grid_Size_Change",
    "Grid_Size_Change_T",
    "Color_Change",
    "Color_Change_T",
    "Average_Size_X",
    "Average_Size_Y",
    "Average_Colors_X",
    "Average_Colors_Y",
    "Average_RoC_X",
    "Average_RoC_Y",
    "Average_Zeros_X",
    "Average_Zeros_Y",
    "Average_Similarity",
    "Average_Scale_X",
    "Average_Scale_Y",
    "Average_Reconstruction",
];

/// Descriptors of one item; `_x` fields describe example inputs and `_y`
/// fields example outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemFeatures {
    pub id: String,
    pub number_examples: f64,
    /// Example inputs do not all share one size.
    pub size_differences: f64,
    /// Some example output differs in size from its input.
    pub grid_size_change: f64,
    /// The test input size matches no example input.
    pub grid_size_change_t: f64,
    /// Some example output uses a different color set than its input.
    pub color_change: f64,
    /// The test input color set matches no example input.
    pub color_change_t: f64,
    /// Mean cell count.
    pub average_size_x: f64,
    pub average_size_y: f64,
    /// Mean number of distinct non-black colors.
    pub average_colors_x: f64,
    pub average_colors_y: f64,
    /// Mean share of adjacent cell pairs with differing colors.
    pub average_roc_x: f64,
    pub average_roc_y: f64,
    /// Mean share of black cells.
    pub average_zeros_x: f64,
    pub average_zeros_y: f64,
    /// Mean share of matching cells between canonicalized input and output.
    pub average_similarity: f64,
    /// Mean Kronecker upscaling factor.
    pub average_scale_x: f64,
    pub average_scale_y: f64,
    /// Deterministic VAE reconstruction accuracy over the example grids and
    /// the test input.
    pub average_reconstruction: f64,
}

impl ItemFeatures {
    pub fn values(&self) -> [f64; 18] {
        [
            self.number_examples,
            self.size_differences,
            self.grid_size_change,
            self.grid_size_change_t,
            self.color_change,
            self.color_change_t,
            self.average_size_x,
            self.average_size_y,
            self.average_colors_x,
            self.average_colors_y,
            self.average_roc_x,
            self.average_roc_y,
            self.average_zeros_x,
            self.average_zeros_y,
            self.average_similarity,
            self.average_scale_x,
            self.average_scale_y,
            self.average_reconstruction,
        ]
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn mean_of<'a>(grids: impl Iterator<Item = &'a Grid>, f: impl Fn(&Grid) -> f64) -> f64 {
    let (s, n) = grids.fold((0.0, 0usize), |(s, n), g| (s + f(g), n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Share of horizontally or vertically adjacent cell pairs whose colors differ.
pub fn rate_of_change(g: &Grid) -> f64 {
    let (h, w) = g.dims();
    let pairs = h * (w - 1) + w * (h - 1);
    if pairs == 0 {
        return 0.0;
    }
    let mut diff = 0;
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w && g.get(r, c) != g.get(r, c + 1) {
                diff += 1;
            }
            if r + 1 < h && g.get(r, c) != g.get(r + 1, c) {
                diff += 1;
            }
        }
    }
    diff as f64 / pairs as f64
}

pub fn zero_fraction(g: &Grid) -> f64 {
    g.histogram()[0] as f64 / g.len() as f64
}

pub fn nonzero_colors(g: &Grid) -> usize {
    g.color_set().into_iter().filter(|&c| c != 0).count()
}

/// Share of matching cells once both grids are mapped to the 30x30 canvas.
pub fn canvas_similarity(a: &Grid, b: &Grid) -> f64 {
    let (ca, cb) = (canvas_grid(a), canvas_grid(b));
    ca.cells().iter().zip(cb.cells()).filter(|(x, y)| x == y).count() as f64 / ca.len() as f64
}

/// All features except the model-dependent one, which is supplied.
pub fn extract_features_with(item: &Item, average_reconstruction: f64) -> ItemFeatures {
    let inputs = || item.train.iter().map(|p| &p.input);
    let outputs = || item.train.iter().map(|p| &p.output);
    let test = &item.first_test().input;
    let first_dims = item.train[0].input.dims();
    ItemFeatures {
        id: item.id.clone(),
        number_examples: item.train.len() as f64,
        size_differences: flag(inputs().any(|g| g.dims() != first_dims)),
        grid_size_change: flag(item.train.iter().any(|p| p.input.dims() != p.output.dims())),
        grid_size_change_t: flag(inputs().all(|g| g.dims() != test.dims())),
        color_change: flag(item.train.iter().any(|p| p.input.color_set() != p.output.color_set())),
        color_change_t: flag(inputs().all(|g| g.color_set() != test.color_set())),
        average_size_x: mean_of(inputs(), |g| g.len() as f64),
        average_size_y: mean_of(outputs(), |g| g.len() as f64),
        average_colors_x: mean_of(inputs(), |g| nonzero_colors(g) as f64),
        average_colors_y: mean_of(outputs(), |g| nonzero_colors(g) as f64),
        average_roc_x: mean_of(inputs(), rate_of_change),
        average_roc_y: mean_of(outputs(), rate_of_change),
        average_zeros_x: mean_of(inputs(), zero_fraction),
        average_zeros_y: mean_of(outputs(), zero_fraction),
        average_similarity: item.train.iter().map(|p| canvas_similarity(&p.input, &p.output)).sum::<f64>() / item.train.len() as f64,
        average_scale_x: mean_of(inputs(), |g| scale_factor(g.height(), g.width()) as f64),
        average_scale_y: mean_of(outputs(), |g| scale_factor(g.height(), g.width()) as f64),
        average_reconstruction,
    }
}

pub fn extract_features(params: &VaeParams, item: &Item) -> ItemFeatures {
    let canvases: Vec<Grid> = item.example_grids().chain(std::iter::once(&item.first_test().input)).map(canvas_grid).collect();
    let refs: Vec<&Grid> = canvases.iter().collect();
    let recon = canvas_reconstruction_accuracy::<ChaCha8Rng>(params, &refs, None);
    extract_features_with(item, recon)
}

pub fn features_csv(rows: &[ItemFeatures]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let mut header = vec!["id"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let mut rec = vec![r.id.clone()];
        rec.extend(r.values().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?).expect("csv output is utf-8"))
}

/// Rows of the feature matrix in [`FEATURE_NAMES`] column order.
pub fn feature_matrix(rows: &[ItemFeatures]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), FEATURE_NAMES.len(), |i, j| rows[i].values()[j])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Constant columns removed before fitting.
    pub dropped: Vec<String>,
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Z-scores every column (sample standard deviation); constant columns are
/// dropped with a warning.
pub fn standardize(x: &DMatrix<f64>, names: &[String]) -> Standardized {
    let mut cols = Vec::new();
    let mut out = Standardized {
        x: DMatrix::zeros(x.nrows(), 0),
        names: Vec::new(),
        means: Vec::new(),
        sds: Vec::new(),
        dropped: Vec::new(),
    };
    for (j, name) in names.iter().enumerate() {
        let col = x.column(j);
        let (mean, sd) = mean_sd(col.iter().copied());
        if sd.is_nan() || sd <= 1e-12 * mean.abs().max(1.0) {
            log::warn!("dropping constant feature column {name}");
            out.dropped.push(name.clone());
            continue;
        }
        cols.push(col.map(|v| (v - mean) / sd));
        out.names.push(name.clone());
        out.means.push(mean);
        out.sds.push(sd);
    }
    out.x = if cols.is_empty() { DMatrix::zeros(x.nrows(), 0) } else { DMatrix::from_columns(&cols) };
    out
}

pub fn standardize_vector(y: &[f64]) -> Vec<f64> {
    let (mean, sd) = mean_sd(y.iter().copied());
    let sd = if sd > 0.0 { sd } else { 1.0 };
    y.iter().map(|v| (v - mean) / sd).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub t: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub n: usize,
    pub df: usize,
    pub intercept: f64,
    pub r_squared: f64,
    pub sigma2: f64,
    pub coefficients: Vec<Coefficient>,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Feature, estimate, SE, 95% CI and p, ordered by p-value.
    pub fn to_csv(&self) -> Result<String> {
        let mut rows: Vec<&Coefficient> = self.coefficients.iter().collect();
        rows.sort_by(|a, b| a.p_value.total_cmp(&b.p_value));
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(["feature", "estimate", "se", "ci_lower", "ci_upper", "p"]).map_err(err)?;
        for c in rows {
            w.write_record([
                c.name.clone(),
                format!("{:.4}", c.estimate),
                format!("{:.3}", c.se),
                format!("{:.3}", c.ci_lower),
                format!("{:.3}", c.ci_upper),
                format!("{:.3}", c.p_value),
            ])
            .map_err(err)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?).expect("csv output is utf-8"))
    }
}

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::from_element(x.nrows(), x.ncols() + 1, 1.0);
    d.columns_mut(1, x.ncols()).copy_from(x);
    d
}

/// Columns (by name) that are linear combinations of earlier columns or
/// the intercept, found by modified Gram-Schmidt.
fn collinear_columns(design: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut flagged = Vec::new();
    for j in 0..design.ncols() {
        let orig = design.column(j).into_owned();
        let mut v = orig.clone();
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm <= 1e-9 * orig.norm().max(1e-300) {
            flagged.push(if j == 0 { "(intercept)".to_string() } else { names[j - 1].clone() });
        } else {
            basis.push(v / norm);
        }
    }
    flagged
}

/// Ordinary least squares with an intercept via the normal equations.
///
/// Standard errors come from `sigma^2 (X'X)^-1` with `n - p - 1` degrees of
/// freedom; p-values are two-sided t-tests.
pub fn ols_fit(x: &DMatrix<f64>, y: &[f64], names: &[String]) -> Result<RegressionResult> {
    let (n, p) = x.shape();
    if names.len() != p || y.len() != n {
        return Err(Error::Shape(format!("{n}x{p} design with {} names and {} targets", names.len(), y.len())));
    }
    if n <= p + 1 {
        return Err(Error::Shape(format!("need more than {} observations for {p} features, got {n}", p + 1)));
    }
    let design = with_intercept(x);
    let collinear = collinear_columns(&design, names);
    if !collinear.is_empty() {
        return Err(Error::Rank { columns: collinear });
    }
    let yv = DVector::from_column_slice(y);
    let xtx = design.transpose() * &design;
    let chol = xtx.clone().cholesky().ok_or_else(|| Error::Rank { columns: names.to_vec() })?;
    let beta = chol.solve(&(design.transpose() * &yv));
    let inv = chol.inverse();
    let resid = &yv - &design * &beta;
    let rss = resid.norm_squared();
    let ybar = yv.mean();
    let tss = yv.iter().map(|v| (v - ybar).powi(2)).sum::<f64>();
    let df = n - p - 1;
    let sigma2 = rss / df as f64;
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    let tcrit = dist.inverse_cdf(0.975);
    let coefficients = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let estimate = beta[j + 1];
            let se = (sigma2 * inv[(j + 1, j + 1)]).max(0.0).sqrt();
            let t = estimate / se;
            let p_value = if t.is_nan() { f64::NAN } else { (2.0 * dist.sf(t.abs())).min(1.0) };
            Coefficient {
                name: name.clone(),
                estimate,
                se,
                ci_lower: estimate - tcrit * se,
                ci_upper: estimate + tcrit * se,
                t,
                p_value,
            }
        })
        .collect();
    Ok(RegressionResult {
        n,
        df,
        intercept: beta[0],
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        sigma2,
        coefficients,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoResult {
    pub penalty: f64,
    pub intercept: f64,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub selected: Vec<String>,
    pub iterations: usize,
}

pub const LASSO_TOLERANCE: f64 = 1e-6;
pub const LASSO_MAX_ITERATIONS: usize = 100_000;

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Minimizes `(1/2n)||y - b0 - X b||^2 + penalty * ||b||_1` by cyclic
/// coordinate descent; the intercept is not penalized.
pub fn lasso_fit(x: &DMatrix<f64>, y: &[f64], names: &[String], penalty: f64) -> Result<LassoResult> {
    lasso_fit_with(x, y, names, penalty, LASSO_TOLERANCE, LASSO_MAX_ITERATIONS)
}

pub fn lasso_fit_with(x: &DMatrix<f64>, y: &[f64], names: &[String], penalty: f64, tol: f64, max_iter: usize) -> Result<LassoResult> {
    let (n, p) = x.shape();
    if names.len() != p || y.len() != n {
        return Err(Error::Shape(format!("{n}x{p} design with {} names and {} targets", names.len(), y.len())));
    }
    if penalty < 0.0 {
        return Err(Error::Config(format!("negative lasso penalty {penalty}")));
    }
    let nf = n as f64;
    let col_means: Vec<f64> = (0..p).map(|j| x.column(j).mean()).collect();
    let ybar = y.iter().sum::<f64>() / nf;
    let xc = DMatrix::from_fn(n, p, |i, j| x[(i, j)] - col_means[j]);
    let sq: Vec<f64> = (0..p).map(|j| xc.column(j).norm_squared() / nf).collect();
    let mut resid = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let mut beta = vec![0.0; p];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            if sq[j] == 0.0 {
                continue;
            }
            let col = xc.column(j);
            let rho = col.dot(&resid) / nf + sq[j] * beta[j];
            let new = soft_threshold(rho, penalty) / sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                resid.axpy(-delta, &col, 1.0);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, max_change });
        }
    }
    let intercept = ybar - col_means.iter().zip(&beta).map(|(m, b)| m * b).sum::<f64>();
    Ok(LassoResult {
        penalty,
        intercept,
        names: names.to_vec(),
        selected: names.iter().zip(&beta).filter(|(_, &b)| b != 0.0).map(|(n, _)| n.clone()).collect(),
        coefficients: beta,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepwiseStep {
    pub name: String,
    pub p_value: f64,
}

/// Forward selection: repeatedly adds the candidate with the smallest joint
/// p-value while that p-value is below `p_threshold`.
pub fn stepwise_forward(x: &DMatrix<f64>, y: &[f64], names: &[String], p_threshold: f64) -> Result<Vec<StepwiseStep>> {
    let (n, p) = x.shape();
    if names.len() != p || y.len() != n {
        return Err(Error::Shape(format!("{n}x{p} design with {} names and {} targets", names.len(), y.len())));
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let mut chosen: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    loop {
        if n <= chosen.len() + 2 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|j| !chosen.contains(j)) {
            let cols: Vec<usize> = chosen.iter().copied().chain(std::iter::once(j)).collect();
            let sub = x.select_columns(&cols);
            let sub_names: Vec<String> = cols.iter().map(|&c| names[c].clone()).collect();
            let fit = match ols_fit(&sub, y, &sub_names) {
                Ok(f) => f,
                Err(Error::Rank { .. }) => continue,
                Err(e) => return Err(e),
            };
            let pv = fit.coefficients.last().expect("candidate column").p_value;
            if pv.is_finite() && best.is_none_or(|(_, b)| pv < b) {
                best = Some((j, pv));
            }
        }
        match best {
            Some((j, pv)) if pv < p_threshold => {
                chosen.push(j);
                steps.push(StepwiseStep {
                    name: names[j].clone(),
                    p_value: pv,
                });
                // nothing left to explain once the fit is exact
                let sub = x.select_columns(&chosen);
                let sub_names: Vec<String> = chosen.iter().map(|&c| names[c].clone()).collect();
                let fit = ols_fit(&sub, y, &sub_names)?;
                if (1.0 - fit.r_squared) * tss <= 1e-20 * tss.max(1.0) {
                    break;
                }
            }
            _ => break,
        }
    }
    Ok(steps)
}

/// OLS, LASSO and stepwise results for one accuracy target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionSuite {
    pub target: String,
    pub dropped: Vec<String>,
    pub ols: RegressionResult,
    pub lasso: LassoResult,
    pub stepwise: Vec<StepwiseStep>,
}

/// Regresses per-item accuracy (fractions in `[0, 1]`) on the features.
///
/// Features are z-scored. The OLS fit also z-scores the target, so its
/// estimates are standardized coefficients; the LASSO fit uses accuracy in
/// percentage points so that its penalty is on the same scale as the
/// feature-target covariances.
pub fn run_regressions(target: &str, features: &[ItemFeatures], accuracy: &[f64], lasso_penalty: f64, p_threshold: f64) -> Result<RegressionSuite> {
    let names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let std = standardize(&feature_matrix(features), &names);
    let y_std = standardize_vector(accuracy);
    let y_pct: Vec<f64> = accuracy.iter().map(|a| 100.0 * a).collect();
    Ok(RegressionSuite {
        target: target.to_string(),
        ols: ols_fit(&std.x, &y_std, &std.names)?,
        lasso: lasso_fit(&std.x, &y_pct, &std.names, lasso_penalty)?,
        stepwise: stepwise_forward(&std.x, &y_std, &std.names, p_threshold)?,
        dropped: std.dropped,
    })
}
