//! Label uncertainty of single examples and of regions.
//!
//! For an example with soft label `p` and assigned class `c`, the score is
//! `1 - p[c] + max_{j != c} p[j]`, which lies in `[0, 2]`. A region's score
//! is the mean over its members.
//!
//! Region means go through [`LuSum`], an exact fixed-point accumulator, so a
//! mean does not depend on the order members are visited in and the final
//! rounding to `f64` is correct. Two routes that see the same member set
//! therefore agree bit-for-bit, and a union of regions whose means are all
//! `>= gamma` also has a mean `>= gamma`.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Fractional bits of the fixed-point representation used by [`LuSum`].
const FRAC_BITS: i32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LuScore(f64);

impl LuScore {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=2.0).contains(&value) {
            Ok(LuScore(value))
        } else {
            Err(Error::Domain(format!(
                "label uncertainty {value} outside [0, 2]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn example_lu(soft_row: &[f64], label: usize) -> Result<LuScore> {
    if label >= soft_row.len() {
        return Err(Error::Domain(format!(
            "label {label} is not below the class count {}",
            soft_row.len()
        )));
    }
    let other = soft_row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label)
        .map(|(_, &p)| p)
        .fold(0.0f64, f64::max);
    let v = 1.0 - soft_row[label] + other;
    Ok(LuScore(v.clamp(0.0, 2.0)))
}

/// Scores for every example, in dataset order.
pub fn lu_scores(d: &Dataset) -> Result<Vec<f64>> {
    let soft = d
        .soft()
        .ok_or_else(|| Error::Config("label uncertainty needs soft labels".into()))?;
    (0..d.len())
        .map(|i| example_lu(soft.row(i), d.labels().get(i)).map(LuScore::value))
        .collect()
}

/// Exact, order-independent sum of scores in `[0, 2]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LuSum {
    units: u128,
    count: u64,
}

impl LuSum {
    pub fn quantize(score: f64) -> u128 {
        (score * 2f64.powi(FRAC_BITS)).round() as u128
    }

    pub fn add(&mut self, score: f64) {
        self.add_units(Self::quantize(score));
    }

    pub fn add_units(&mut self, units: u128) {
        self.units += units;
        self.count += 1;
    }

    pub fn merge(&mut self, other: LuSum) {
        self.units += other.units;
        self.count += other.count;
    }

    pub fn from_parts(units: u128, count: u64) -> Self {
        LuSum { units, count }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Correctly rounded mean, or `None` for an empty sum.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| ratio_to_f64(self.units, self.count) * 2f64.powi(-FRAC_BITS))
    }
}

impl FromIterator<f64> for LuSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = LuSum::default();
        iter.into_iter().for_each(|v| s.add(v));
        s
    }
}

/// `num / den` rounded to nearest-even.
fn ratio_to_f64(num: u128, den: u64) -> f64 {
    if num == 0 {
        return 0.0;
    }
    let den = den as u128;
    let bits = |x: u128| 128 - x.leading_zeros();
    // scale so the integer quotient carries at least 64 significant bits
    let shift = (65 + bits(den)).saturating_sub(bits(num));
    let scaled = num << shift;
    let q = scaled / den;
    let sticky = !scaled.is_multiple_of(den);
    round_u128(q, sticky) * 2f64.powi(-(shift as i32))
}

/// Rounds `x` (with `sticky` set when nonzero bits were dropped below it)
/// to a 53-bit significand. Requires `x >= 2^53`.
fn round_u128(x: u128, sticky: bool) -> f64 {
    let shift = 128 - x.leading_zeros() - 53;
    let mut mant = x >> shift;
    let rem = x & ((1u128 << shift) - 1);
    let half = 1u128 << (shift - 1);
    if rem > half || (rem == half && (sticky || mant & 1 == 1)) {
        mant += 1;
    }
    mant as f64 * 2f64.powi(shift as i32)
}

/// Mean label uncertainty of `members`.
pub fn region_lu(d: &Dataset, members: &[usize]) -> Result<LuScore> {
    let soft = d
        .soft()
        .ok_or_else(|| Error::Config("label uncertainty needs soft labels".into()))?;
    let mut sum = LuSum::default();
    for &i in members {
        sum.add(example_lu(soft.row(i), d.labels().get(i))?.value());
    }
    sum.mean().map(LuScore).ok_or(Error::EmptyRegion)
}

/// Same as [`region_lu`] over precomputed scores.
pub fn mean_lu(scores: &[f64], members: &[usize]) -> Result<f64> {
    members
        .iter()
        .map(|&i| scores[i])
        .collect::<LuSum>()
        .mean()
        .ok_or(Error::EmptyRegion)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins are `[e_i, e_{i+1})` except the last, which is closed. Values
    /// outside the edges land in the nearest end bin.
    pub fn build(bin_edges: Vec<f64>, values: &[f64]) -> Result<Self> {
        if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(
                "histogram edges must be strictly ascending with at least two entries".into(),
            ));
        }
        let nbins = bin_edges.len() - 1;
        let mut counts = vec![0u64; nbins];
        for &v in values {
            let idx = bin_edges.partition_point(|&e| e <= v);
            counts[idx.saturating_sub(1).min(nbins - 1)] += 1;
        }
        Ok(Histogram { bin_edges, counts })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize, values: &[f64]) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Domain("histogram needs at least one bin".into()));
        }
        let edges = (0..=bins)
            .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
            .collect();
        Histogram::build(edges, values)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LuStats {
    pub histogram: Histogram,
    pub mean: f64,
    pub count: usize,
    /// Fraction of examples strictly below / above a few reference levels.
    pub fraction_below_0_1: f64,
    pub fraction_above_0_7: f64,
    pub count_above_1_2: usize,
    #[serde(skip)]
    pub rows: Vec<(String, f64)>,
}

pub fn lu_stats(d: &Dataset, bin_edges: Vec<f64>) -> Result<LuStats> {
    let scores = lu_scores(d)?;
    let histogram = Histogram::build(bin_edges, &scores)?;
    let n = scores.len();
    let mean = scores
        .iter()
        .copied()
        .collect::<LuSum>()
        .mean()
        .unwrap_or(0.0);
    let below = scores.iter().filter(|&&v| v < 0.1).count();
    let above = scores.iter().filter(|&&v| v > 0.7).count();
    let count_above_1_2 = scores.iter().filter(|&&v| v > 1.2).count();
    Ok(LuStats {
        histogram,
        mean,
        count: n,
        fraction_below_0_1: below as f64 / n as f64,
        fraction_above_0_7: above as f64 / n as f64,
        count_above_1_2,
        rows: d.ids().iter().cloned().zip(scores).collect(),
    })
}

/// Formats `v` with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..=5).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        format!("{:.*}", (5 - exp) as usize, rounded)
    } else {
        format!("{mant}e{exp}")
    }
}

/// Per-example CSV with header `id,lu`.
pub fn lu_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("id,lu\n");
    for (id, v) in rows {
        out.push_str(id);
        out.push(',');
        out.push_str(&format_sig6(*v));
        out.push('\n');
    }
    out
}
