//! Greedy search for a union of balls that captures at least an `alpha`
//! share of the training points, has mean label uncertainty at least
//! `gamma`, and whose `epsilon`-expansion grows as little as possible.
//!
//! Each iteration enumerates every center `u` and every neighbor count `k`
//! in `[k_lower, k_upper]`, places the ball reaching the k-th nearest
//! not-yet-captured point, and keeps the feasible candidate whose expansion
//! adds the fewest points beyond the ones it captures. Ties are broken by
//! `(objective, center_index, k)` ascending.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{canonical_distance, distance, Ball, DistanceCache, Metric, Region};
use crate::uncertainty::{lu_scores, mean_lu, LuSum};

/// Default memory budget for the distance table.
pub const DEFAULT_MEM_CAP_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub balls: usize,
    pub metric: Metric,
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if !(0.0..=2.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} not in [0, 2]", self.gamma)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon {} must be finite and >= 0",
                self.epsilon
            )));
        }
        if self.balls == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks the parameters against a training set of `m` points.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        self.validate()?;
        let target = capture_target(self.alpha, m);
        if target < self.balls {
            return Err(Error::Config(format!(
                "alpha * m = {target} points cannot be split over T = {} balls",
                self.balls
            )));
        }
        Ok(())
    }
}

/// Smallest count `j` with `j / m >= alpha` in binary64, i.e. `ceil(alpha * m)`
/// without the rounding error of the product.
pub fn capture_target(alpha: f64, m: usize) -> usize {
    let mf = m as f64;
    let mut j = ((alpha * mf).ceil().max(0.0) as usize).min(m);
    while j > 0 && (j - 1) as f64 / mf >= alpha {
        j -= 1;
    }
    while j < m && (j as f64) / mf < alpha {
        j += 1;
    }
    j
}

#[derive(Debug, Clone)]
pub struct SearchState {
    captured_init: Vec<bool>,
    captured_exp: Vec<bool>,
    init_count: usize,
    exp_count: usize,
    balls: Vec<Ball>,
}

impl SearchState {
    pub fn new(m: usize) -> Self {
        SearchState {
            captured_init: vec![false; m],
            captured_exp: vec![false; m],
            init_count: 0,
            exp_count: 0,
            balls: Vec::new(),
        }
    }

    /// 1-based index of the next iteration.
    pub fn iteration(&self) -> usize {
        self.balls.len() + 1
    }

    pub fn captured_count(&self) -> usize {
        self.init_count
    }

    pub fn expanded_count(&self) -> usize {
        self.exp_count
    }

    pub fn is_captured(&self, i: usize) -> bool {
        self.captured_init[i]
    }

    pub fn captured(&self) -> Vec<usize> {
        indices_where(&self.captured_init)
    }

    pub fn expanded(&self) -> Vec<usize> {
        indices_where(&self.captured_exp)
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }
}

fn indices_where(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub center_index: usize,
    pub k: usize,
    pub radius: f64,
    /// Newly expanded minus newly captured points.
    pub objective: i64,
    pub init_count: usize,
    pub exp_count: usize,
    /// Mean label uncertainty of the newly captured points, when soft labels exist.
    pub lu: Option<f64>,
}

impl Placement {
    fn key(&self) -> (i64, usize, usize) {
        (self.objective, self.center_index, self.k)
    }
}

/// `(k_lower, k_upper)` for the state's next iteration, or `(0, 0)` once the
/// capture target is met.
pub fn k_bounds(state: &SearchState, params: &SearchParams, m_train: usize) -> (usize, usize) {
    let target = capture_target(params.alpha, m_train);
    let remaining = target.saturating_sub(state.init_count);
    let t = state.iteration();
    if remaining == 0 || t > params.balls {
        return (0, 0);
    }
    let left = params.balls - t + 1;
    (remaining.div_ceil(left), remaining)
}

fn feasible(gamma: f64, lu: Option<f64>) -> bool {
    gamma <= 0.0 || lu.is_some_and(|v| v >= gamma)
}

/// Best candidate of one step plus the largest candidate LU seen.
#[derive(Debug, Clone)]
struct StepBest {
    best: Option<Placement>,
    max_lu: f64,
}

impl StepBest {
    fn empty() -> Self {
        StepBest {
            best: None,
            max_lu: f64::NEG_INFINITY,
        }
    }

    fn offer(&mut self, p: Placement, gamma: f64) {
        if let Some(lu) = p.lu {
            self.max_lu = self.max_lu.max(lu);
        }
        if !feasible(gamma, p.lu) {
            return;
        }
        if self.best.as_ref().is_none_or(|b| p.key() < b.key()) {
            self.best = Some(p);
        }
    }

    fn merge(mut self, other: StepBest) -> StepBest {
        self.max_lu = self.max_lu.max(other.max_lu);
        self.best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(if b.key() < a.key() { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }

    fn finish(self, state: &SearchState) -> Result<Placement> {
        self.best.ok_or(Error::Infeasible {
            iteration: state.iteration(),
            max_lu: self.max_lu.max(0.0),
            placed: state.balls.len(),
            captured: state.init_count,
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    pub mem_cap_bytes: Option<usize>,
}

/// Training data, parameters and the distance cache shared by all steps of
/// one search.
pub struct Searcher<'a> {
    train: &'a Dataset,
    params: SearchParams,
    scores: Option<Vec<f64>>,
    units: Option<Vec<u128>>,
    cache: DistanceCache<'a>,
}

impl<'a> Searcher<'a> {
    pub fn new(train: &'a Dataset, params: SearchParams, options: SearchOptions) -> Result<Self> {
        params.validate_for(train.len())?;
        if params.gamma > 0.0 && train.soft().is_none() {
            return Err(Error::Config(format!(
                "gamma = {} requires soft labels",
                params.gamma
            )));
        }
        let scores = train.soft().map(|_| lu_scores(train)).transpose()?;
        let units = scores
            .as_ref()
            .map(|s| s.iter().map(|&v| LuSum::quantize(v)).collect());
        let cache = DistanceCache::new(
            train.points(),
            params.metric,
            options.mem_cap_bytes.unwrap_or(DEFAULT_MEM_CAP_BYTES),
        );
        Ok(Searcher {
            train,
            params,
            scores,
            units,
            cache,
        })
    }

    pub fn params(&self) -> &SearchParams {
        &self.params
    }

    pub fn new_state(&self) -> SearchState {
        SearchState::new(self.train.len())
    }

    /// Best feasible placement for the state's next iteration.
    pub fn greedy_step(&self, state: &SearchState) -> Result<Placement> {
        let (k_lower, k_upper) = k_bounds(state, &self.params, self.train.len());
        if k_upper == 0 {
            return Err(Error::Domain("capture target already reached".into()));
        }
        (0..self.train.len())
            .into_par_iter()
            .fold(StepBest::empty, |acc, u| {
                self.scan_center(state, u, k_lower, k_upper, acc)
            })
            .reduce(StepBest::empty, StepBest::merge)
            .finish(state)
    }

    fn scan_center(
        &self,
        state: &SearchState,
        u: usize,
        k_lower: usize,
        k_upper: usize,
        mut acc: StepBest,
    ) -> StepBest {
        let row = self.cache.row(u);
        let mut init = Vec::with_capacity(row.len() - state.init_count);
        let mut prefix = Vec::with_capacity(row.len() - state.init_count + 1);
        let mut exp = Vec::with_capacity(row.len() - state.exp_count);
        prefix.push(0u128);
        for nb in row.iter() {
            let i = nb.index as usize;
            if !state.captured_init[i] {
                init.push(nb.dist as f64);
                if let Some(units) = &self.units {
                    prefix.push(prefix.last().unwrap() + units[i]);
                }
            }
            if !state.captured_exp[i] {
                exp.push(nb.dist as f64);
            }
        }
        let eps = self.params.epsilon;
        let (mut p, mut q) = (0usize, 0usize);
        for k in k_lower..=k_upper.min(init.len()) {
            let r = init[k - 1];
            while p < init.len() && init[p] <= r {
                p += 1;
            }
            while q < exp.len() && exp[q] <= r + eps {
                q += 1;
            }
            let lu = self
                .units
                .as_ref()
                .and_then(|_| LuSum::from_parts(prefix[p], p as u64).mean());
            acc.offer(
                Placement {
                    center_index: u,
                    k,
                    radius: r,
                    objective: q as i64 - p as i64,
                    init_count: p,
                    exp_count: q,
                    lu,
                },
                self.params.gamma,
            );
        }
        acc
    }

    /// Adds the placement's ball and its captured/expanded points to `state`.
    pub fn apply(&self, state: &mut SearchState, placement: &Placement) {
        let points = self.train.points();
        let center = points.row(placement.center_index);
        let reach = placement.radius + self.params.epsilon;
        let mut new_init = 0;
        let mut new_exp = 0;
        for i in 0..points.len() {
            let d = canonical_distance(self.params.metric, points.row(i), center) as f64;
            if !state.captured_init[i] && d <= placement.radius {
                state.captured_init[i] = true;
                new_init += 1;
            }
            if !state.captured_exp[i] && d <= reach {
                state.captured_exp[i] = true;
                new_exp += 1;
            }
        }
        debug_assert_eq!(new_init, placement.init_count);
        debug_assert_eq!(new_exp, placement.exp_count);
        state.init_count += new_init;
        state.exp_count += new_exp;
        state.balls.push(Ball {
            center_index: placement.center_index,
            center: center.to_vec(),
            radius: placement.radius,
        });
    }

    pub fn run(&self) -> Result<SearchOutcome> {
        let mut state = self.new_state();
        let m = self.train.len();
        let mut placements = Vec::with_capacity(self.params.balls);
        while state.iteration() <= self.params.balls {
            let (k_lower, k_upper) = k_bounds(&state, &self.params, m);
            if k_upper == 0 {
                log::info!("capture target reached after {} balls", state.balls.len());
                break;
            }
            let placement = self.greedy_step(&state)?;
            log::info!(
                "iteration {}: k in [{k_lower}, {k_upper}], center {} k {} radius {:.6} objective {} (+{} captured, +{} expanded)",
                state.iteration(),
                placement.center_index,
                placement.k,
                placement.radius,
                placement.objective,
                placement.init_count,
                placement.exp_count,
            );
            self.apply(&mut state, &placement);
            placements.push(placement);
        }
        let captured = state.captured();
        let lu = match &self.scores {
            Some(s) => Some(mean_lu(s, &captured)?),
            None => None,
        };
        Ok(SearchOutcome {
            region: Region {
                metric: self.params.metric,
                balls: state.balls.clone(),
            },
            captured,
            expanded: state.expanded(),
            placements,
            lu,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub region: Region,
    /// Training points inside the region.
    pub captured: Vec<usize>,
    /// Union of the per-step expansion sets.
    pub expanded: Vec<usize>,
    pub placements: Vec<Placement>,
    /// Mean label uncertainty of the captured points.
    pub lu: Option<f64>,
}

/// Runs the full search with default options.
pub fn run_search(train: &Dataset, params: SearchParams) -> Result<SearchOutcome> {
    Searcher::new(train, params, SearchOptions::default())?.run()
}

pub fn greedy_step(
    state: &SearchState,
    params: SearchParams,
    train: &Dataset,
) -> Result<Placement> {
    Searcher::new(train, params, SearchOptions::default())?.greedy_step(state)
}

/// Naive re-enumeration of one step: every `(u, k)` pair recomputes and
/// re-sorts its distances from scratch. Used to cross-check `greedy_step`.
pub fn reference_step(
    state: &SearchState,
    params: SearchParams,
    train: &Dataset,
) -> Result<Placement> {
    params.validate_for(train.len())?;
    if params.gamma > 0.0 && train.soft().is_none() {
        return Err(Error::Config("gamma > 0 requires soft labels".into()));
    }
    let m = train.len();
    let (k_lower, k_upper) = k_bounds(state, &params, m);
    if k_upper == 0 {
        return Err(Error::Domain("capture target already reached".into()));
    }
    let scores = train.soft().map(|_| lu_scores(train)).transpose()?;
    let points = train.points();
    let dist = |a: usize, b: usize| -> f64 {
        distance(params.metric, points.row(a), points.row(b)).expect("same dimension") as f32 as f64
    };
    let active: Vec<usize> = (0..m).filter(|&i| !state.is_captured(i)).collect();
    let mut acc = StepBest::empty();
    for u in 0..m {
        for k in k_lower..=k_upper {
            if k > active.len() {
                continue;
            }
            let mut sorted: Vec<f64> = active.iter().map(|&i| dist(u, i)).collect();
            sorted.sort_by(f64::total_cmp);
            let r = sorted[k - 1];
            let init: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&i| dist(u, i) <= r)
                .collect();
            let exp_count = (0..m)
                .filter(|&i| !state.captured_exp[i] && dist(u, i) <= r + params.epsilon)
                .count();
            let lu = match &scores {
                Some(s) => Some(mean_lu(s, &init)?),
                None => None,
            };
            acc.offer(
                Placement {
                    center_index: u,
                    k,
                    radius: r,
                    objective: exp_count as i64 - init.len() as i64,
                    init_count: init.len(),
                    exp_count,
                    lu,
                },
                params.gamma,
            );
        }
    }
    acc.finish(state)
}
