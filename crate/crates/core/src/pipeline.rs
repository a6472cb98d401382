//! Split, search, held-out evaluation and repeated trials.
//!
//! Trial `i` of a run uses seed `base_seed + i` for its split, so any single
//! trial can be replayed on its own.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{split, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{Region, RegionSpec};
use crate::search::{SearchOptions, SearchParams, Searcher};
use crate::uncertainty::{lu_scores, mean_lu};

/// Share of examples that goes to the training split.
pub const TRAIN_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub risk: f64,
    pub adv_risk: f64,
    pub region_lu: Option<f64>,
}

pub fn evaluate_region(region: &Region, eval: &Dataset, epsilon: f64) -> Result<Evaluation> {
    region.check_dim(eval.dim())?;
    let points = eval.points();
    let m = points.len();
    let mut inside = Vec::new();
    let mut expanded = 0usize;
    for i in 0..m {
        let x = points.row(i);
        if region.contains(x, 0.0) {
            inside.push(i);
            expanded += 1;
        } else if region.contains(x, epsilon) {
            expanded += 1;
        }
    }
    let region_lu = match (eval.soft(), inside.is_empty()) {
        (Some(_), false) => Some(mean_lu(&lu_scores(eval)?, &inside)?),
        _ => None,
    };
    Ok(Evaluation {
        risk: inside.len() as f64 / m as f64,
        adv_risk: expanded as f64 / m as f64,
        region_lu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub train_risk: f64,
    pub test_risk: f64,
    pub train_adv_risk: f64,
    pub test_adv_risk: f64,
    pub intrinsic_robustness_train: f64,
    pub intrinsic_robustness_test: f64,
    pub train_region_lu: Option<f64>,
    pub test_region_lu: Option<f64>,
    pub region: RegionSpec,
}

impl TrialReport {
    /// Scalar fields summarized across trials, in report order.
    fn scalars(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("train_risk", Some(self.train_risk)),
            ("test_risk", Some(self.test_risk)),
            ("train_adv_risk", Some(self.train_adv_risk)),
            ("test_adv_risk", Some(self.test_adv_risk)),
            (
                "intrinsic_robustness_train",
                Some(self.intrinsic_robustness_train),
            ),
            (
                "intrinsic_robustness_test",
                Some(self.intrinsic_robustness_test),
            ),
            ("train_region_lu", self.train_region_lu),
            ("test_region_lu", self.test_region_lu),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub metric: crate::geometry::Metric,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub balls: usize,
    pub trials: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub params: ParamsEcho,
    pub trials: Vec<TrialReport>,
    pub summary: BTreeMap<String, Stat>,
}

impl SummaryReport {
    pub fn from_trials(params: &SearchParams, base_seed: u64, trials: Vec<TrialReport>) -> Self {
        let mut summary = BTreeMap::new();
        if let Some(first) = trials.first() {
            for (j, (name, _)) in first.scalars().iter().enumerate() {
                let values: Vec<f64> = trials.iter().filter_map(|t| t.scalars()[j].1).collect();
                if let Some(stat) = Stat::of(&values) {
                    summary.insert(name.to_string(), stat);
                }
            }
        }
        SummaryReport {
            params: ParamsEcho {
                metric: params.metric,
                epsilon: params.epsilon,
                alpha: params.alpha,
                gamma: params.gamma,
                balls: params.balls,
                trials: trials.len(),
                base_seed,
            },
            trials,
            summary,
        }
    }

    pub fn stat(&self, field: &str) -> Option<Stat> {
        self.summary.get(field).copied()
    }
}

pub fn run_trial(
    d: &Dataset,
    params: SearchParams,
    seed: u64,
    options: SearchOptions,
) -> Result<TrialReport> {
    let with_seed = |e: Error| Error::Trial {
        seed,
        source: Box::new(e),
    };
    let (train, test) = split(d, TRAIN_FRACTION, seed).map_err(with_seed)?;
    let outcome = Searcher::new(&train, params, options)
        .and_then(|s| s.run())
        .map_err(with_seed)?;
    let on_train = evaluate_region(&outcome.region, &train, params.epsilon).map_err(with_seed)?;
    let on_test = evaluate_region(&outcome.region, &test, params.epsilon).map_err(with_seed)?;
    Ok(TrialReport {
        seed,
        train_risk: on_train.risk,
        test_risk: on_test.risk,
        train_adv_risk: on_train.adv_risk,
        test_adv_risk: on_test.adv_risk,
        intrinsic_robustness_train: 1.0 - on_train.adv_risk,
        intrinsic_robustness_test: 1.0 - on_test.adv_risk,
        train_region_lu: on_train.region_lu,
        test_region_lu: on_test.region_lu,
        region: outcome.region.to_spec(),
    })
}

pub fn repeated_trials(
    d: &Dataset,
    params: SearchParams,
    n_trials: usize,
    base_seed: u64,
    options: SearchOptions,
) -> Result<SummaryReport> {
    if n_trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let results: Vec<Result<TrialReport>> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(d, params, base_seed.wrapping_add(i as u64), options))
        .collect();
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SummaryReport::from_trials(&params, base_seed, trials))
}

#[derive(Debug)]
pub struct SweepEntry {
    pub alpha: f64,
    pub result: Result<SummaryReport>,
}

/// One summary per `alpha`; infeasible values are recorded and skipped.
pub fn alpha_sweep(
    d: &Dataset,
    params: SearchParams,
    alphas: &[f64],
    n_trials: usize,
    base_seed: u64,
    options: SearchOptions,
) -> Vec<SweepEntry> {
    alphas
        .iter()
        .map(|&alpha| {
            let result = repeated_trials(
                d,
                SearchParams { alpha, ..params },
                n_trials,
                base_seed,
                options,
            );
            if let Err(e) = &result {
                log::warn!("alpha {alpha}: {e}");
            }
            SweepEntry { alpha, result }
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str =
    "alpha,test_risk_mean,test_risk_std,intrinsic_robustness_mean,intrinsic_robustness_std,gamma";

/// Failed entries keep their row with empty statistic fields.
pub fn sweep_csv(entries: &[SweepEntry], gamma: f64) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for e in entries {
        match &e.result {
            Ok(r) => {
                let risk = r.stat("test_risk").expect("test_risk always present");
                let rob = r
                    .stat("intrinsic_robustness_test")
                    .expect("robustness always present");
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    e.alpha, risk.mean, risk.std, rob.mean, rob.std, gamma
                ));
            }
            Err(_) => out.push_str(&format!("{},,,,,{}\n", e.alpha, gamma)),
        }
    }
    out
}
