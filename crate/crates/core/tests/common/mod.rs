#![allow(dead_code)]

use luconc::dataset::{Dataset, LabelSet, PointSet, SoftLabelSet};
use luconc::geometry::Metric;
use luconc::search::SearchParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random points; on a coarse integer grid when `grid` is set, so that
/// distance ties and duplicate points are common.
pub fn random_points(r: &mut ChaCha8Rng, m: usize, n: usize, grid: bool) -> PointSet {
    let coords = (0..m * n)
        .map(|_| {
            if grid {
                r.random_range(0..4) as f32
            } else {
                r.random::<f32>()
            }
        })
        .collect();
    PointSet::new(m, n, coords).unwrap()
}

/// Labels over `k` classes; a `noisy` share of rows get a random soft
/// distribution, the rest are one-hot on the assigned label.
pub fn random_labeled(r: &mut ChaCha8Rng, points: PointSet, k: usize, noisy: f64) -> Dataset {
    let m = points.len();
    let mut labels = Vec::with_capacity(m);
    let mut soft = Vec::with_capacity(m * k);
    for _ in 0..m {
        let c = r.random_range(0..k);
        labels.push(c as u32);
        if r.random_bool(noisy) {
            let raw: Vec<f64> = (0..k).map(|_| r.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            soft.extend(raw.iter().map(|v| v / total));
        } else {
            soft.extend((0..k).map(|j| if j == c { 1.0 } else { 0.0 }));
        }
    }
    Dataset::with_index_ids(
        points,
        LabelSet::new(labels, k).unwrap(),
        Some(SoftLabelSet::new(k, soft).unwrap()),
    )
    .unwrap()
}

pub struct Instance {
    pub data: Dataset,
    pub params: SearchParams,
}

/// m in [20, 200], n in [1, 8], both metrics, gamma from `gammas`.
pub fn random_instance(seed: u64, gammas: &[f64]) -> Instance {
    let mut r = rng(seed);
    let m = r.random_range(20..=200);
    let n = r.random_range(1..=8);
    let grid = r.random_bool(0.5);
    let points = random_points(&mut r, m, n, grid);
    let data = random_labeled(&mut r, points, 3, 0.35);
    let metric = if r.random_bool(0.5) {
        Metric::L2
    } else {
        Metric::Linf
    };
    let gamma = gammas[r.random_range(0..gammas.len())];
    let alpha = r.random_range(0.05..0.3);
    let max_t = ((alpha * m as f64).floor() as usize).clamp(1, 4);
    let balls = r.random_range(1..=max_t);
    let epsilon = if grid {
        r.random_range(0..3) as f64
    } else {
        r.random_range(0.0..0.3)
    };
    Instance {
        data,
        params: SearchParams {
            alpha,
            gamma,
            epsilon,
            balls,
            metric,
        },
    }
}

/// Brute-force Euclidean / max-norm distance in f64.
pub fn naive_distance(metric: Metric, a: &[f32], b: &[f32]) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).abs());
    match metric {
        Metric::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Metric::Linf => diffs.fold(0.0, f64::max),
    }
}

/// Plain definition of one example's label uncertainty.
pub fn naive_lu(row: &[f64], label: usize) -> f64 {
    let mut other = 0.0f64;
    for (j, p) in row.iter().enumerate() {
        if j != label && *p > other {
            other = *p;
        }
    }
    1.0 - row[label] + other
}

/// Steps greedy and reference side by side from an empty state until the
/// search ends; returns the number of steps compared or the first mismatch.
pub fn differential_walk(inst: &Instance) -> Result<usize, String> {
    use luconc::search::{reference_step, SearchOptions, Searcher};
    use luconc::Error;

    let searcher = Searcher::new(&inst.data, inst.params, SearchOptions::default())
        .map_err(|e| format!("setup: {e}"))?;
    let mut state = searcher.new_state();
    let mut steps = 0;
    while state.iteration() <= inst.params.balls
        && luconc::search::k_bounds(&state, &inst.params, inst.data.len()).1 > 0
    {
        let fast = searcher.greedy_step(&state);
        let slow = reference_step(&state, inst.params, &inst.data);
        steps += 1;
        match (fast, slow) {
            (Ok(a), Ok(b)) => {
                if a != b {
                    return Err(format!("step {steps}: greedy {a:?} vs reference {b:?}"));
                }
                searcher.apply(&mut state, &a);
            }
            (Err(a), Err(b)) => {
                return match (&a, &b) {
                    (
                        Error::Infeasible {
                            iteration: i1,
                            max_lu: l1,
                            placed: p1,
                            captured: c1,
                        },
                        Error::Infeasible {
                            iteration: i2,
                            max_lu: l2,
                            placed: p2,
                            captured: c2,
                        },
                    ) if (i1, l1.to_bits(), p1, c1) == (i2, l2.to_bits(), p2, c2) => Ok(steps),
                    _ => Err(format!("step {steps}: errors differ: {a} vs {b}")),
                };
            }
            (a, b) => return Err(format!("step {steps}: {a:?} vs {b:?}")),
        }
    }
    Ok(steps)
}
