//! The visual analogy solver: `d = g(f(c) + r)` where `r` combines the
//! per-example rule vectors `f(b) - f(a)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, Item};
use crate::error::{Error, Result};
use crate::preprocess::{canvas_grid, rescale_prediction, ColorDistributionGrid};
use crate::seed::sub_seed;
use crate::vae::{decode_many, encode_canvases, reparameterize, LatentDistribution, LatentVector, VaeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleVector {
    pub v: Vec<f32>,
    pub source_example_index: Option<usize>,
}

impl RuleVector {
    pub fn norm(&self) -> f64 {
        euclidean(&self.v, &vec![0.0; self.v.len()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Elementwise mean of all rule vectors.
    #[serde(rename = "average")]
    AverageRule,
    /// Rule vector of the example whose input embedding is nearest to the test input.
    #[serde(rename = "similarity")]
    SimilarityRule,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::AverageRule, Strategy::SimilarityRule];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::AverageRule => "average",
            Strategy::SimilarityRule => "similarity",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Strategy::AverageRule),
            "similarity" => Ok(Strategy::SimilarityRule),
            other => Err(Error::Config(format!("unknown strategy `{other}` (average | similarity)"))),
        }
    }
}

pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Latent encodings of every grid the solver touches for one item.
#[derive(Clone, Debug)]
pub struct ItemEmbeddings {
    pub example_inputs: Vec<LatentDistribution>,
    pub example_outputs: Vec<LatentDistribution>,
    pub test_input: LatentDistribution,
}

impl ItemEmbeddings {
    pub fn compute(params: &VaeParams, item: &Item) -> Self {
        let canvases: Vec<Grid> = item
            .train
            .iter()
            .map(|p| canvas_grid(&p.input))
            .chain(item.train.iter().map(|p| canvas_grid(&p.output)))
            .chain(std::iter::once(canvas_grid(&item.first_test().input)))
            .collect();
        let refs: Vec<&Grid> = canvases.iter().collect();
        let mut dists = encode_canvases(params, &refs);
        let n = item.train.len();
        let test_input = dists.pop().expect("test input encoded");
        let example_outputs = dists.split_off(n);
        ItemEmbeddings {
            example_inputs: dists,
            example_outputs,
            test_input,
        }
    }

    pub fn rule_vectors(&self) -> Vec<RuleVector> {
        self.example_inputs
            .iter()
            .zip(&self.example_outputs)
            .enumerate()
            .map(|(i, (a, b))| RuleVector {
                v: b.mu.iter().zip(&a.mu).map(|(y, x)| y - x).collect(),
                source_example_index: Some(i),
            })
            .collect()
    }

    pub fn combined_rule(&self, strategy: Strategy) -> Result<RuleVector> {
        let rvs = self.rule_vectors();
        match strategy {
            Strategy::AverageRule => combine_average(&rvs),
            Strategy::SimilarityRule => {
                let inputs: Vec<Vec<f32>> = self.example_inputs.iter().map(|d| d.mu.clone()).collect();
                combine_similarity(&rvs, &inputs, &self.test_input.mu)
            }
        }
    }
}

/// `mu(f(b_i)) - mu(f(a_i))` for every example pair, in order.
pub fn rule_vectors(params: &VaeParams, item: &Item) -> Vec<RuleVector> {
    ItemEmbeddings::compute(params, item).rule_vectors()
}

pub fn combine_average(rvs: &[RuleVector]) -> Result<RuleVector> {
    let first = rvs.first().ok_or_else(|| Error::Solver("no rule vectors to average".into()))?;
    let dim = first.v.len();
    if rvs.iter().any(|r| r.v.len() != dim) {
        return Err(Error::Solver("rule vectors differ in length".into()));
    }
    let mut acc = vec![0.0f64; dim];
    for r in rvs {
        for (a, &v) in acc.iter_mut().zip(&r.v) {
            *a += v as f64;
        }
    }
    Ok(RuleVector {
        v: acc.into_iter().map(|a| (a / rvs.len() as f64) as f32).collect(),
        source_example_index: None,
    })
}

/// Picks the rule vector whose example input is nearest (Euclidean) to the
/// test embedding; the lowest index wins ties.
pub fn combine_similarity(rvs: &[RuleVector], example_input_embeddings: &[Vec<f32>], test_embedding: &[f32]) -> Result<RuleVector> {
    if rvs.is_empty() || rvs.len() != example_input_embeddings.len() {
        return Err(Error::Solver(format!(
            "{} rule vectors for {} example embeddings",
            rvs.len(),
            example_input_embeddings.len()
        )));
    }
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, e) in example_input_embeddings.iter().enumerate() {
        let d = euclidean(e, test_embedding);
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    Ok(RuleVector {
        v: rvs[best].v.clone(),
        source_example_index: Some(best),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub strategy: Strategy,
    pub deterministic: bool,
    pub attempts: usize,
    /// Output size used for rescaling; the only information taken from the
    /// expected test output.
    pub expected_dims: (usize, usize),
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    #[serde(skip)]
    pub raw: ColorDistributionGrid,
    pub grid30: Grid,
    pub rescaled: Grid,
    pub strategy: Strategy,
    pub attempt: usize,
    pub deterministic: bool,
    pub rule_norm: f64,
    pub latent_norm: f64,
    pub rule_source_example: Option<usize>,
}

fn check_params(params: &VaeParams) -> Result<()> {
    let finite = params.params().iter().all(|p| p.data.iter().all(|v| v.is_finite()));
    if !finite {
        return Err(Error::Solver("model parameters contain non-finite values".into()));
    }
    Ok(())
}

pub fn solve(params: &VaeParams, item: &Item, req: &SolveRequest) -> Result<Vec<Prediction>> {
    check_params(params)?;
    let emb = ItemEmbeddings::compute(params, item);
    solve_with_embeddings(params, &item.id, &emb, req)
}

/// Same as [`solve`] with precomputed embeddings.
pub fn solve_with_embeddings(params: &VaeParams, item_id: &str, emb: &ItemEmbeddings, req: &SolveRequest) -> Result<Vec<Prediction>> {
    if req.attempts == 0 {
        return Err(Error::Solver("attempts must be at least 1".into()));
    }
    let rule = emb.combined_rule(req.strategy)?;
    let starts: Vec<LatentVector> = (0..req.attempts)
        .map(|attempt| {
            if req.deterministic {
                reparameterize::<ChaCha8Rng>(&emb.test_input, None)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(req.seed, &format!("solve/{item_id}"), attempt as u64));
                reparameterize(&emb.test_input, Some(&mut rng))
            }
        })
        .collect();
    let shifted: Vec<LatentVector> = starts
        .iter()
        .map(|zc| LatentVector {
            z: zc.z.iter().zip(&rule.v).map(|(a, b)| a + b).collect(),
        })
        .collect();
    let decoded = decode_many(params, &shifted)?;
    let rule_norm = rule.norm();
    decoded
        .into_iter()
        .zip(starts)
        .enumerate()
        .map(|(attempt, (raw, zc))| {
            let rescaled = rescale_prediction(&raw, req.expected_dims.0, req.expected_dims.1)?;
            Ok(Prediction {
                grid30: raw.argmax(),
                rescaled,
                raw,
                strategy: req.strategy,
                attempt,
                deterministic: req.deterministic,
                rule_norm,
                latent_norm: zc.norm(),
                rule_source_example: rule.source_example_index,
            })
        })
        .collect()
}
