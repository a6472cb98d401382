//! Distances, nearest-neighbor radii and unions of metric balls.
//!
//! Distances are accumulated in binary64 and then rounded once to binary32,
//! the precision the distance cache stores. Every membership test compares
//! that rounded value (widened back to binary64) against a binary64
//! threshold, so cached and uncached paths classify points identically.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::PointSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L2,
    Linf,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Metric::L2),
            "linf" => Ok(Metric::Linf),
            other => Err(Error::Config(format!(
                "unknown metric `{other}` (use l2 or linf)"
            ))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::L2 => "l2",
            Metric::Linf => "linf",
        })
    }
}

pub fn distance(metric: Metric, x: &[f32], u: &[f32]) -> Result<f64> {
    if x.len() != u.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            found: x.len(),
        });
    }
    Ok(raw_distance(metric, x, u))
}

fn raw_distance(metric: Metric, x: &[f32], u: &[f32]) -> f64 {
    match metric {
        Metric::L2 => x
            .iter()
            .zip(u)
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
        Metric::Linf => x
            .iter()
            .zip(u)
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .fold(0.0, f64::max),
    }
}

/// The distance value all membership comparisons use.
#[inline]
pub fn canonical_distance(metric: Metric, x: &[f32], u: &[f32]) -> f32 {
    raw_distance(metric, x, u) as f32
}

/// Share of `total` examples that `member_count` represents.
pub fn empirical_measure(total: usize, member_count: usize) -> f64 {
    member_count as f64 / total as f64
}

/// k-th smallest distance from `center` to the points indexed by `active`,
/// counting multiplicity.
pub fn kth_radius_from(
    points: &PointSet,
    active: &[usize],
    center: &[f32],
    k: usize,
    metric: Metric,
) -> Result<f64> {
    if k == 0 || k > active.len() {
        return Err(Error::Domain(format!(
            "neighbor rank {k} outside 1..={}",
            active.len()
        )));
    }
    if center.len() != points.dim() {
        return Err(Error::Dimension {
            expected: points.dim(),
            found: center.len(),
        });
    }
    let mut d: Vec<f32> = active
        .iter()
        .map(|&i| canonical_distance(metric, points.row(i), center))
        .collect();
    let (_, kth, _) = d.select_nth_unstable_by(k - 1, f32::total_cmp);
    Ok(*kth as f64)
}

/// Radius to the k-th nearest active neighbor of active point `u`; `u`
/// itself is its own first neighbor at distance zero.
pub fn kth_neighbor_radius(
    points: &PointSet,
    active: &[usize],
    u: usize,
    k: usize,
    metric: Metric,
) -> Result<f64> {
    if !active.contains(&u) {
        return Err(Error::Domain(format!("center {u} is not an active point")));
    }
    kth_radius_from(points, active, points.row(u), k, metric)
}

/// Active indices within `radius` of `center`, boundary included.
pub fn ball_members(
    points: &PointSet,
    active: &[usize],
    center: &[f32],
    radius: f64,
    metric: Metric,
) -> Vec<usize> {
    active
        .iter()
        .copied()
        .filter(|&i| canonical_distance(metric, points.row(i), center) as f64 <= radius)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    /// Index of the center in the point set the region was built on.
    pub center_index: usize,
    pub center: Vec<f32>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub metric: Metric,
    pub balls: Vec<Ball>,
}

impl Region {
    pub fn new(metric: Metric) -> Self {
        Region {
            metric,
            balls: Vec::new(),
        }
    }

    /// Whether `x` lies in the `epsilon`-expansion of the region.
    pub fn contains(&self, x: &[f32], epsilon: f64) -> bool {
        self.balls
            .iter()
            .any(|b| canonical_distance(self.metric, x, &b.center) as f64 <= b.radius + epsilon)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.balls.iter().find(|b| b.center.len() != dim) {
            Some(b) => Err(Error::Dimension {
                expected: b.center.len(),
                found: dim,
            }),
            None => Ok(()),
        }
    }

    pub fn to_spec(&self) -> RegionSpec {
        RegionSpec {
            metric: self.metric,
            balls: self
                .balls
                .iter()
                .map(|b| BallSpec {
                    center_index: b.center_index,
                    radius: b.radius,
                })
                .collect(),
        }
    }

    /// Rebuilds a region whose centers index into `points`.
    pub fn from_spec(spec: &RegionSpec, points: &PointSet) -> Result<Self> {
        let balls = spec
            .balls
            .iter()
            .map(|b| {
                if b.center_index >= points.len() {
                    return Err(Error::Domain(format!(
                        "center index {} outside the {} training points",
                        b.center_index,
                        points.len()
                    )));
                }
                if !(b.radius >= 0.0) {
                    return Err(Error::Domain(format!("negative radius {}", b.radius)));
                }
                Ok(Ball {
                    center_index: b.center_index,
                    center: points.row(b.center_index).to_vec(),
                    radius: b.radius,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Region {
            metric: spec.metric,
            balls,
        })
    }
}

/// Serialized form: `{"metric":"l2"|"linf","balls":[{"center_index":..,"radius":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub metric: Metric,
    pub balls: Vec<BallSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center_index: usize,
    pub radius: f64,
}

/// Indices of `points` inside the `epsilon`-expansion of `region`.
pub fn expansion_members(region: &Region, points: &PointSet, epsilon: f64) -> Vec<usize> {
    (0..points.len())
        .into_par_iter()
        .filter(|&i| region.contains(points.row(i), epsilon))
        .collect()
}

/// One entry of a center's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub dist: f32,
    pub index: u32,
}

fn sorted_row(points: &PointSet, u: usize, metric: Metric) -> Vec<Neighbor> {
    let center = points.row(u);
    let mut row: Vec<Neighbor> = (0..points.len())
        .map(|i| Neighbor {
            dist: canonical_distance(metric, points.row(i), center),
            index: i as u32,
        })
        .collect();
    row.sort_unstable_by(|a, b| a.dist.total_cmp(&b.dist).then(a.index.cmp(&b.index)));
    row
}

/// Per-center neighbor lists sorted by `(distance, index)`.
///
/// Rows are materialized when the full table fits under the memory cap;
/// otherwise each lookup recomputes and sorts the row.
#[derive(Debug)]
pub struct DistanceCache<'a> {
    points: &'a PointSet,
    metric: Metric,
    rows: Option<Vec<Vec<Neighbor>>>,
}

impl<'a> DistanceCache<'a> {
    pub fn table_bytes(m: usize) -> usize {
        m.saturating_mul(m)
            .saturating_mul(std::mem::size_of::<Neighbor>())
    }

    pub fn new(points: &'a PointSet, metric: Metric, mem_cap_bytes: usize) -> Self {
        let rows = (Self::table_bytes(points.len()) <= mem_cap_bytes).then(|| {
            (0..points.len())
                .into_par_iter()
                .map(|u| sorted_row(points, u, metric))
                .collect()
        });
        if rows.is_none() {
            log::info!(
                "distance table for {} points exceeds the memory cap; computing rows on demand",
                points.len()
            );
        }
        DistanceCache {
            points,
            metric,
            rows,
        }
    }

    pub fn is_materialized(&self) -> bool {
        self.rows.is_some()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn row(&self, u: usize) -> Cow<'_, [Neighbor]> {
        match &self.rows {
            Some(rows) => Cow::Borrowed(&rows[u]),
            None => Cow::Owned(sorted_row(self.points, u, self.metric)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f32]) -> PointSet {
        PointSet::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, m: usize, n: usize) -> PointSet {
        let coords = (0..m * n).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        PointSet::new(m, n, coords).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Metric::L2, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(distance(Metric::L2, &[0.0], &[3.0]).unwrap(), 3.0);
        assert_eq!(distance(Metric::Linf, &[0.0], &[3.0]).unwrap(), 3.0);
        assert_eq!(distance(Metric::L2, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(
            distance(Metric::Linf, &[0.0, 0.0], &[3.0, 4.0]).unwrap(),
            4.0
        );
        assert!(matches!(
            distance(Metric::L2, &[0.0], &[0.0, 1.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn kth_radius_examples() {
        let p = line(&[0.0, 1.0, 3.0]);
        let active = [0, 1, 2];
        let r = |k| kth_neighbor_radius(&p, &active, 0, k, Metric::L2).unwrap();
        assert_eq!(r(1), 0.0);
        assert_eq!(r(2), 1.0);
        assert_eq!(r(3), 3.0);
        assert!(matches!(
            kth_neighbor_radius(&p, &active, 0, 4, Metric::L2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn kth_radius_matches_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let p = random_points(&mut rng, 50, 3);
            let active: Vec<usize> = (0..50)
                .filter(|_| rng.random_bool(0.7))
                .chain([0])
                .collect();
            let mut active = active;
            active.sort_unstable();
            active.dedup();
            for metric in [Metric::L2, Metric::Linf] {
                let mut all: Vec<f64> = active
                    .iter()
                    .map(|&i| distance(metric, p.row(i), p.row(0)).unwrap() as f32 as f64)
                    .collect();
                all.sort_by(f64::total_cmp);
                for k in 1..=active.len() {
                    assert_eq!(
                        kth_neighbor_radius(&p, &active, 0, k, metric).unwrap(),
                        all[k - 1]
                    );
                }
            }
        }
    }

    #[test]
    fn ball_members_cardinality_and_zero_radius() {
        let p = line(&[0.0, 1.0, 3.0, 7.0]);
        let active = [0, 1, 2, 3];
        for k in 1..=4 {
            let r = kth_neighbor_radius(&p, &active, 0, k, Metric::L2).unwrap();
            assert_eq!(ball_members(&p, &active, p.row(0), r, Metric::L2).len(), k);
        }
        assert_eq!(
            ball_members(&p, &active, p.row(2), 0.0, Metric::L2),
            vec![2]
        );
    }

    #[test]
    fn boundary_duplicates_are_all_included() {
        let p = line(&[0.0, 2.0, 2.0, 2.0, 5.0]);
        let active: Vec<usize> = (0..5).collect();
        let r = kth_neighbor_radius(&p, &active, 0, 2, Metric::Linf).unwrap();
        let members = ball_members(&p, &active, p.row(0), r, Metric::Linf);
        let brute: Vec<usize> = (0..5)
            .filter(|&i| (p.row(i)[0] - 0.0).abs() <= 2.0)
            .collect();
        assert_eq!(members, brute);
        assert_eq!(members.len(), 4);
    }

    #[test]
    fn expansion_examples() {
        let p = line(&[0.0, 1.0, 1.5, 3.0]);
        let region = Region {
            metric: Metric::L2,
            balls: vec![Ball {
                center_index: 0,
                center: vec![0.0],
                radius: 1.0,
            }],
        };
        assert_eq!(expansion_members(&region, &p, 0.0), vec![0, 1]);
        assert_eq!(expansion_members(&region, &p, 0.5), vec![0, 1, 2]);
    }

    #[test]
    fn empirical_measure_examples() {
        assert_eq!(empirical_measure(100, 0), 0.0);
        assert_eq!(empirical_measure(100, 100), 1.0);
        assert_eq!(empirical_measure(50, 5), 0.1);
    }

    #[test]
    fn region_spec_json_shape() {
        let p = line(&[0.0, 4.0]);
        let spec: RegionSpec =
            serde_json::from_str(r#"{"metric":"linf","balls":[{"center_index":1,"radius":0.5}]}"#)
                .unwrap();
        let region = Region::from_spec(&spec, &p).unwrap();
        assert_eq!(region.balls[0].center, vec![4.0]);
        assert_eq!(
            serde_json::to_string(&region.to_spec()).unwrap(),
            r#"{"metric":"linf","balls":[{"center_index":1,"radius":0.5}]}"#
        );
        let bad = RegionSpec {
            metric: Metric::L2,
            balls: vec![BallSpec {
                center_index: 2,
                radius: 1.0,
            }],
        };
        assert!(Region::from_spec(&bad, &p).is_err());
    }

    #[test]
    fn cache_rows_agree_with_on_demand_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_points(&mut rng, 30, 4);
        let eager = DistanceCache::new(&p, Metric::L2, usize::MAX);
        let lazy = DistanceCache::new(&p, Metric::L2, 0);
        assert!(eager.is_materialized() && !lazy.is_materialized());
        for u in 0..30 {
            let row = eager.row(u);
            assert_eq!(row.as_ref(), lazy.row(u).as_ref());
            assert_eq!(row[0].index as usize, u);
            assert!(row.windows(2).all(|w| w[0].dist <= w[1].dist));
        }
    }

    proptest! {
        #[test]
        fn metric_axioms(a in proptest::collection::vec(-10.0f32..10.0, 4),
                         b in proptest::collection::vec(-10.0f32..10.0, 4),
                         c in proptest::collection::vec(-10.0f32..10.0, 4)) {
            for metric in [Metric::L2, Metric::Linf] {
                let ab = distance(metric, &a, &b).unwrap();
                let ba = distance(metric, &b, &a).unwrap();
                let bc = distance(metric, &b, &c).unwrap();
                let ac = distance(metric, &a, &c).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, ba);
                prop_assert!(ac <= ab + bc + 1e-9);
            }
        }
    }
}
