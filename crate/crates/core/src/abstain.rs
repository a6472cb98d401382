//! Abstention on high label-uncertainty examples, given externally
//! produced per-example correctness records.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionRecord {
    pub id: String,
    pub clean_correct: bool,
    pub robust_correct: bool,
}

fn parse_flag(tok: &str, row: usize, col: &str) -> Result<bool> {
    match tok.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::format(
            "predictions",
            format!("row {row}: {col} must be 0 or 1, got `{other}`"),
        )),
    }
}

pub fn parse_predictions(text: &str, known_ids: &HashSet<&str>) -> Result<Vec<PredictionRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::format("predictions", e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["id", "clean_correct", "robust_correct"] {
        return Err(Error::format(
            "predictions",
            "expected header `id,clean_correct,robust_correct`",
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format("predictions", e.to_string()))?;
        let id = rec[0].to_string();
        if !known_ids.contains(id.as_str()) {
            return Err(Error::UnknownId(id));
        }
        out.push(PredictionRecord {
            clean_correct: parse_flag(&rec[1], i, "clean_correct")?,
            robust_correct: parse_flag(&rec[2], i, "robust_correct")?,
            id,
        });
    }
    Ok(out)
}

/// Reads `id,clean_correct,robust_correct` with 0/1 values.
pub fn load_predictions(path: &Path, known_ids: &HashSet<&str>) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text, known_ids)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbstainReport {
    pub tau: f64,
    pub abstained_count: usize,
    pub retained_count: usize,
    pub abstain_fraction: f64,
    pub clean_accuracy_all: f64,
    pub robust_accuracy_all: f64,
    pub clean_accuracy_retained: f64,
    pub robust_accuracy_retained: f64,
    pub clean_correct_retained: usize,
    pub robust_correct_retained: usize,
    pub clean_correct_abstained: usize,
    pub robust_correct_abstained: usize,
    /// `robust_accuracy_all / (1 - abstain_fraction)`.
    pub ceiling: f64,
}

/// Robust accuracy if every abstained example had been a robust error.
pub fn abstain_ceiling(robust_accuracy_all: f64, abstain_fraction: f64) -> f64 {
    robust_accuracy_all / (1.0 - abstain_fraction)
}

fn score_of(lu: &HashMap<String, f64>, id: &str) -> Result<f64> {
    lu.get(id)
        .copied()
        .ok_or_else(|| Error::UnknownId(id.to_string()))
}

/// Keeps examples with `lu <= tau`.
pub fn abstain_at_threshold(
    records: &[PredictionRecord],
    lu: &HashMap<String, f64>,
    tau: f64,
) -> Result<AbstainReport> {
    let m = records.len();
    let mut retained = 0;
    let (mut clean_r, mut robust_r, mut clean_a, mut robust_a) = (0, 0, 0, 0);
    for r in records {
        if score_of(lu, &r.id)? <= tau {
            retained += 1;
            clean_r += usize::from(r.clean_correct);
            robust_r += usize::from(r.robust_correct);
        } else {
            clean_a += usize::from(r.clean_correct);
            robust_a += usize::from(r.robust_correct);
        }
    }
    if retained == 0 {
        return Err(Error::EmptyRetained(tau));
    }
    let mf = m as f64;
    let abstain_fraction = (m - retained) as f64 / mf;
    let robust_all = (robust_r + robust_a) as f64 / mf;
    Ok(AbstainReport {
        tau,
        abstained_count: m - retained,
        retained_count: retained,
        abstain_fraction,
        clean_accuracy_all: (clean_r + clean_a) as f64 / mf,
        robust_accuracy_all: robust_all,
        clean_accuracy_retained: clean_r as f64 / retained as f64,
        robust_accuracy_retained: robust_r as f64 / retained as f64,
        clean_correct_retained: clean_r,
        robust_correct_retained: robust_r,
        clean_correct_abstained: clean_a,
        robust_correct_abstained: robust_a,
        ceiling: abstain_ceiling(robust_all, abstain_fraction),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageOrder {
    LowestFirst,
    HighestFirst,
}

impl std::str::FromStr for CoverageOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest_first" | "lowest-first" => Ok(CoverageOrder::LowestFirst),
            "highest_first" | "highest-first" => Ok(CoverageOrder::HighestFirst),
            other => Err(Error::Config(format!("unknown coverage order `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub included: usize,
    pub lu_cut: f64,
    pub clean_accuracy: f64,
    pub robust_accuracy: f64,
}

/// Numeric ids compare as numbers, everything else lexicographically.
fn id_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// For each fraction `f`, the accuracies over the `floor(f * m)` examples
/// with the lowest (or highest) label uncertainty, ties broken by id.
/// Points that include no example report NaN.
pub fn coverage_curve(
    records: &[PredictionRecord],
    lu: &HashMap<String, f64>,
    order: CoverageOrder,
    grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    if let Some(f) = grid.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::Domain(format!(
            "coverage fraction {f} not in (0, 1]"
        )));
    }
    let mut ranked: Vec<(f64, &PredictionRecord)> = records
        .iter()
        .map(|r| score_of(lu, &r.id).map(|s| (s, r)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|(sa, ra), (sb, rb)| {
        let by_score = match order {
            CoverageOrder::LowestFirst => sa.total_cmp(sb),
            CoverageOrder::HighestFirst => sb.total_cmp(sa),
        };
        by_score.then_with(|| id_cmp(&ra.id, &rb.id))
    });
    let mut clean_prefix = vec![0usize; ranked.len() + 1];
    let mut robust_prefix = vec![0usize; ranked.len() + 1];
    for (i, (_, r)) in ranked.iter().enumerate() {
        clean_prefix[i + 1] = clean_prefix[i] + usize::from(r.clean_correct);
        robust_prefix[i + 1] = robust_prefix[i] + usize::from(r.robust_correct);
    }
    let m = ranked.len();
    Ok(grid
        .iter()
        .map(|&fraction| {
            let n = ((fraction * m as f64).floor() as usize).min(m);
            if n == 0 {
                return CurvePoint {
                    fraction,
                    included: 0,
                    lu_cut: f64::NAN,
                    clean_accuracy: f64::NAN,
                    robust_accuracy: f64::NAN,
                };
            }
            CurvePoint {
                fraction,
                included: n,
                lu_cut: ranked[n - 1].0,
                clean_accuracy: clean_prefix[n] as f64 / n as f64,
                robust_accuracy: robust_prefix[n] as f64 / n as f64,
            }
        })
        .collect())
}

pub const CURVE_CSV_HEADER: &str = "fraction,lu_cut,clean_accuracy,robust_accuracy";

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.fraction, p.lu_cut, p.clean_accuracy, p.robust_accuracy
        ));
    }
    out
}
