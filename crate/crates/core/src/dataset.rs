//! Point sets, hard labels and soft-label distributions, plus the on-disk
//! formats every other module reads.
//!
//! Binary point files are `CPTS`, then little-endian `u32` row count and
//! `u32` dimension, then `m * n` little-endian binary32 values in row-major
//! order. Label files are CSV with header `id,label`; soft-label files are
//! CSV with header `id,p0,...,p{k-1}`.
//!
//! Splits shuffle indices with ChaCha8 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`, which is specified bit-for-bit and does not
//! depend on the platform.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const POINTS_MAGIC: &[u8; 4] = b"CPTS";

/// Soft-label rows must sum to one within this absolute tolerance.
pub const SOFT_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    Binary,
    Csv,
}

impl PointFormat {
    /// Picks CSV for `.csv` files and the binary format otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => PointFormat::Csv,
            _ => PointFormat::Binary,
        }
    }
}

/// `m` points of dimension `n`, stored row-major as binary32.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    m: usize,
    n: usize,
    coords: Vec<f32>,
}

impl PointSet {
    pub fn new(m: usize, n: usize, coords: Vec<f32>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain(format!(
                "point sets need at least one point and one dimension (got m={m}, n={n})"
            )));
        }
        if coords.len() != m * n {
            return Err(Error::Dimension {
                expected: m * n,
                found: coords.len(),
            });
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(
                "points",
                format!("non-finite value at row {}, column {}", pos / n, pos % n),
            ));
        }
        Ok(PointSet { m, n, coords })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::format(
                    "points",
                    format!("row {i} has {} values, expected {n}", row.len()),
                ));
            }
            coords.extend_from_slice(row);
        }
        PointSet::new(rows.len(), n, coords)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn coords(&self) -> &[f32] {
        &self.coords
    }

    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.n);
        for &i in indices {
            coords.extend_from_slice(self.row(i));
        }
        PointSet {
            m: indices.len(),
            n: self.n,
            coords,
        }
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.coords.len());
        out.extend_from_slice(POINTS_MAGIC);
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for v in &self.coords {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..4] != POINTS_MAGIC {
            return Err(Error::format("points", "missing CPTS magic header"));
        }
        let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        let expected = m
            .checked_mul(n)
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| Error::format("points", "header shape overflows"))?;
        if body.len() != expected {
            return Err(Error::format(
                "points",
                format!(
                    "header declares m={m}, n={n} ({expected} bytes of data) but file has {} bytes",
                    body.len()
                ),
            ));
        }
        let coords = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        PointSet::new(m, n, coords)
    }

    /// One point per line, comma-separated, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.m {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f32>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f32>().map_err(|e| {
                        Error::format("points", format!("row {i}: cannot parse `{tok}`: {e}"))
                    })
                })
                .collect::<Result<Vec<f32>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::format(
                        "points",
                        format!("row {i} has {} values, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::format("points", "no rows"));
        }
        PointSet::from_rows(&rows)
    }
}

/// Hard labels in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<u32>,
    k: usize,
}

impl LabelSet {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= k) {
            return Err(Error::format(
                "labels",
                format!("row {i}: label {l} is not below the class count {k}"),
            ));
        }
        Ok(LabelSet { labels, k })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }
}

/// Per-example probability vectors over `k` classes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelSet {
    k: usize,
    dist: Vec<f64>,
}

impl SoftLabelSet {
    /// Validates each row; rows within [`SOFT_SUM_TOLERANCE`] of one are
    /// renormalized, anything further off is rejected.
    pub fn new(k: usize, mut dist: Vec<f64>) -> Result<Self> {
        if k == 0 || !dist.len().is_multiple_of(k) {
            return Err(Error::format(
                "soft labels",
                format!("{} values do not form rows of width {k}", dist.len()),
            ));
        }
        for (i, row) in dist.chunks_exact_mut(k).enumerate() {
            if let Some(v) = row
                .iter()
                .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
            {
                return Err(Error::format(
                    "soft labels",
                    format!("row {i}: probability {v} outside [0, 1]"),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SOFT_SUM_TOLERANCE {
                return Err(Error::format(
                    "soft labels",
                    format!("row {i}: probabilities sum to {sum}, not 1"),
                ));
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(SoftLabelSet { k, dist })
    }

    pub fn len(&self) -> usize {
        self.dist.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.k..(i + 1) * self.k]
    }

    fn subset(&self, indices: &[usize]) -> SoftLabelSet {
        let mut dist = Vec::with_capacity(indices.len() * self.k);
        for &i in indices {
            dist.extend_from_slice(self.row(i));
        }
        SoftLabelSet { k: self.k, dist }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: PointSet,
    labels: LabelSet,
    soft: Option<SoftLabelSet>,
    ids: Vec<String>,
}

impl Dataset {
    pub fn new(
        points: PointSet,
        labels: LabelSet,
        soft: Option<SoftLabelSet>,
        ids: Vec<String>,
    ) -> Result<Self> {
        let m = points.len();
        for (what, len) in [("labels", labels.len()), ("ids", ids.len())]
            .into_iter()
            .chain(soft.as_ref().map(|s| ("soft labels", s.len())))
        {
            if len != m {
                return Err(Error::format(what, format!("{len} rows for {m} points")));
            }
        }
        let mut seen = HashSet::with_capacity(m);
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::format("ids", format!("duplicate id `{dup}`")));
        }
        let labels = match &soft {
            Some(s) if s.classes() != labels.classes() => {
                LabelSet::new(labels.labels, s.classes())?
            }
            _ => labels,
        };
        Ok(Dataset {
            points,
            labels,
            soft,
            ids,
        })
    }

    /// Dataset with ids `0..m`.
    pub fn with_index_ids(
        points: PointSet,
        labels: LabelSet,
        soft: Option<SoftLabelSet>,
    ) -> Result<Self> {
        let ids = (0..points.len()).map(|i| i.to_string()).collect();
        Dataset::new(points, labels, soft, ids)
    }

    /// Loads points, labels and optional soft labels. Labels follow the
    /// point file's row order; soft-label rows are matched to labels by id.
    pub fn load(
        points_path: &Path,
        format: PointFormat,
        labels_path: &Path,
        soft_path: Option<&Path>,
    ) -> Result<Self> {
        let points = load_points(points_path, format)?;
        let (ids, labels) = load_labels(labels_path)?;
        let soft = match soft_path {
            None => None,
            Some(p) => {
                let (soft_ids, soft) = load_soft_labels(p)?;
                Some(align_soft(&ids, &soft_ids, soft)?)
            }
        };
        Dataset::new(points, labels, soft, ids)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn soft(&self) -> Option<&SoftLabelSet> {
        self.soft.as_ref()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            points: self.points.subset(indices),
            labels: LabelSet {
                labels: indices.iter().map(|&i| self.labels.labels[i]).collect(),
                k: self.labels.k,
            },
            soft: self.soft.as_ref().map(|s| s.subset(indices)),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }
}

fn align_soft(ids: &[String], soft_ids: &[String], soft: SoftLabelSet) -> Result<SoftLabelSet> {
    if ids == soft_ids {
        return Ok(soft);
    }
    let index: HashMap<&str, usize> = soft_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let order = ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::format("soft labels", format!("no row for id `{id}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if soft_ids.len() != ids.len() {
        return Err(Error::format(
            "soft labels",
            format!("{} rows for {} labeled examples", soft_ids.len(), ids.len()),
        ));
    }
    Ok(soft.subset(&order))
}

pub fn load_points(path: &Path, format: PointFormat) -> Result<PointSet> {
    let with_path = |e: Error| match e {
        Error::Format { message, .. } => Error::format(path.display().to_string(), message),
        other => other,
    };
    match format {
        PointFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            PointSet::from_binary(&bytes).map_err(with_path)
        }
        PointFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            PointSet::from_csv(&text).map_err(with_path)
        }
    }
}

pub fn write_points(path: &Path, points: &PointSet, format: PointFormat) -> Result<()> {
    let bytes = match format {
        PointFormat::Binary => points.to_binary(),
        PointFormat::Csv => points.to_csv().into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::format(path.display().to_string(), e.to_string())
}

/// Reads an `id,label` CSV; the class count is `max(label) + 1`.
pub fn load_labels(path: &Path) -> Result<(Vec<String>, LabelSet)> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(Error::format(
            path.display().to_string(),
            "expected header `id,label`",
        ));
    }
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let label: u32 = rec[1].trim().parse().map_err(|_| {
            Error::format(
                path.display().to_string(),
                format!("row {i}: label `{}` is not a non-negative integer", &rec[1]),
            )
        })?;
        ids.push(rec[0].to_string());
        labels.push(label);
    }
    let k = labels.iter().max().map_or(1, |&l| l as usize + 1);
    Ok((ids, LabelSet::new(labels, k)?))
}

pub fn load_soft_labels(path: &Path) -> Result<(Vec<String>, SoftLabelSet)> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let k = headers.len().saturating_sub(1);
    let header_ok = k >= 1
        && &headers[0] == "id"
        && headers
            .iter()
            .skip(1)
            .enumerate()
            .all(|(j, h)| h == format!("p{j}"));
    if !header_ok {
        return Err(Error::format(
            path.display().to_string(),
            "expected header `id,p0,...,p{k-1}`",
        ));
    }
    let mut ids = Vec::new();
    let mut dist = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        ids.push(rec[0].to_string());
        for tok in rec.iter().skip(1) {
            let v: f64 = tok.trim().parse().map_err(|_| {
                Error::format(
                    path.display().to_string(),
                    format!("row {i}: cannot parse probability `{tok}`"),
                )
            })?;
            dist.push(v);
        }
    }
    let soft = SoftLabelSet::new(k, dist).map_err(|e| match e {
        Error::Format { message, .. } => Error::format(path.display().to_string(), message),
        other => other,
    })?;
    Ok((ids, soft))
}

pub fn write_labels(path: &Path, ids: &[String], labels: &LabelSet) -> Result<()> {
    let mut out = String::from("id,label\n");
    for (id, l) in ids.iter().zip(labels.as_slice()) {
        out.push_str(&format!("{id},{l}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_soft_labels(path: &Path, ids: &[String], soft: &SoftLabelSet) -> Result<()> {
    let mut out = String::from("id");
    for j in 0..soft.classes() {
        out.push_str(&format!(",p{j}"));
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for v in soft.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Deterministic partition into `floor(fraction * m)` and the remaining
/// examples. Both parts keep the original relative order.
pub fn split(d: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (first, second) = split_indices(d.len(), fraction, seed)?;
    Ok((d.subset(&first), d.subset(&second)))
}

pub fn split_indices(m: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!(
            "split fraction {fraction} not in (0, 1)"
        )));
    }
    let take = (fraction * m as f64).floor() as usize;
    if take < 1 {
        return Err(Error::Domain(format!(
            "split fraction {fraction} of {m} examples leaves the first part empty"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut first = order[..take].to_vec();
    let mut second = order[take..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(m: usize) -> Dataset {
        let rows: Vec<Vec<f32>> = (0..m).map(|i| vec![i as f32, 0.5]).collect();
        let points = PointSet::from_rows(&rows).unwrap();
        let labels = LabelSet::new((0..m as u32).map(|i| i % 3).collect(), 3).unwrap();
        Dataset::with_index_ids(points, labels, None).unwrap()
    }

    #[test]
    fn binary_header_shape() {
        let p = PointSet::new(2, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let bytes = p.to_binary();
        assert_eq!(&bytes[..4], b"CPTS");
        assert_eq!(bytes.len(), 12 + 24);
        let back = PointSet::from_binary(&bytes).unwrap();
        assert_eq!((back.len(), back.dim()), (2, 3));
        assert_eq!(back, p);
    }

    #[test]
    fn binary_rejects_bad_magic_and_shape() {
        let p = PointSet::new(1, 2, vec![1.0, 2.0]).unwrap();
        let mut bytes = p.to_binary();
        bytes[0] = b'X';
        assert!(matches!(
            PointSet::from_binary(&bytes),
            Err(Error::Format { .. })
        ));
        let mut bytes = p.to_binary();
        bytes.pop();
        assert!(matches!(
            PointSet::from_binary(&bytes),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn binary_rejects_non_finite_with_row() {
        let mut bytes = PointSet::new(2, 2, vec![0.0; 4]).unwrap().to_binary();
        bytes[12 + 12..12 + 16].copy_from_slice(&f32::NAN.to_le_bytes());
        match PointSet::from_binary(&bytes) {
            Err(Error::Format { message, .. }) => assert!(message.contains("row 1"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_ragged_row_names_row() {
        let err = PointSet::from_csv("1,2,3\n4,5,6\n7,8\n").unwrap_err();
        match err {
            Error::Format { message, .. } => assert!(message.contains("row 2"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn soft_rows_validation() {
        assert!(SoftLabelSet::new(3, vec![0.5, 0.5, 0.0]).is_ok());
        assert!(matches!(
            SoftLabelSet::new(3, vec![0.6, 0.6, 0.0]),
            Err(Error::Format { .. })
        ));
        let s = SoftLabelSet::new(2, vec![0.5, 0.5000004]).unwrap();
        assert!((s.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(SoftLabelSet::new(2, vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn label_out_of_range() {
        assert!(LabelSet::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_ids_and_length_mismatch() {
        let points = PointSet::new(2, 1, vec![0.0, 1.0]).unwrap();
        let labels = LabelSet::new(vec![0, 1], 2).unwrap();
        let dup = Dataset::new(
            points.clone(),
            labels.clone(),
            None,
            vec!["a".into(), "a".into()],
        );
        assert!(dup.is_err());
        let short = LabelSet::new(vec![0], 2).unwrap();
        assert!(Dataset::with_index_ids(points, short, None).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = toy(10);
        let (a, b) = split(&d, 0.5, 7).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let (a2, b2) = split(&d, 0.5, 7).unwrap();
        assert_eq!(a.ids(), a2.ids());
        assert_eq!(b.ids(), b2.ids());
        let all: HashSet<&String> = a.ids().iter().chain(b.ids()).collect();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn split_full_test_set_scale() {
        let (a, b) = split_indices(10_000, 0.5, 1).unwrap();
        assert_eq!((a.len(), b.len()), (5000, 5000));
    }

    #[test]
    fn split_rejects_empty_part() {
        assert!(split_indices(1, 0.5, 0).is_err());
        assert!(split_indices(10, 1.0, 0).is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = toy(4);
        let soft = SoftLabelSet::new(
            3,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.2, 0.3, 0.5],
        )
        .unwrap();
        let pp = dir.path().join("p.bin");
        let lp = dir.path().join("l.csv");
        let sp = dir.path().join("s.csv");
        write_points(&pp, d.points(), PointFormat::Binary).unwrap();
        write_labels(&lp, d.ids(), d.labels()).unwrap();
        // reversed order on disk must still align by id
        let rev: Vec<usize> = (0..4).rev().collect();
        let rev_ids: Vec<String> = rev.iter().map(|&i| d.ids()[i].clone()).collect();
        write_soft_labels(&sp, &rev_ids, &soft.subset(&rev)).unwrap();
        let back = Dataset::load(&pp, PointFormat::Binary, &lp, Some(&sp)).unwrap();
        assert_eq!(back.points(), d.points());
        assert_eq!(back.labels().as_slice(), d.labels().as_slice());
        assert_eq!(back.soft().unwrap().row(3), &[0.2, 0.3, 0.5]);
    }

    proptest! {
        #[test]
        fn binary_write_load_is_identity(m in 1usize..20, n in 1usize..6, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coords: Vec<f32> = (0..m * n).map(|_| rng.random_range(-1e3f32..1e3)).collect();
            let p = PointSet::new(m, n, coords).unwrap();
            let bytes = p.to_binary();
            let q = PointSet::from_binary(&bytes).unwrap();
            prop_assert_eq!(q.to_binary(), bytes);
            let c = PointSet::from_csv(&p.to_csv()).unwrap();
            prop_assert_eq!(c, p);
        }

        #[test]
        fn split_is_partition(m in 2usize..300, frac in 0.05f64..0.95, seed in any::<u64>()) {
            prop_assume!((frac * m as f64).floor() >= 1.0);
            let (a, b) = split_indices(m, frac, seed).unwrap();
            prop_assert_eq!(a.len(), (frac * m as f64).floor() as usize);
            let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
        }
    }
}
