//! Regression datasets: CSV ingestion, min-max normalization and k-fold
//! partitioning.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// A dense regression dataset. Features are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Vec<f64>,
    targets: Vec<f64>,
    n_features: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        targets: Vec<f64>,
        n_features: usize,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != targets.len() * n_features {
            return Err(Error::invalid(format!(
                "feature buffer has {} values, expected {} rows x {} features",
                features.len(),
                targets.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().chain(&targets).position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at flat position {pos}")));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            targets,
            n_features,
        })
    }

    pub fn from_rows(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let n_features = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: n_features,
                    found: r.len(),
                });
            }
        }
        Dataset::new(name, rows.into_iter().flatten().collect(), targets, n_features)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_instances(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_instances()).map(move |i| self.row(i))
    }

    #[inline]
    pub fn feature(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_features + col]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Copies the given rows (in order, duplicates allowed) into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_instances() {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} instances",
                    self.n_instances()
                )));
            }
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Ok(Dataset {
            name: self.name.clone(),
            features,
            targets,
            n_features: self.n_features,
        })
    }

    /// Column `c` where `c == n_features` denotes the target.
    fn column(&self, c: usize) -> Vec<f64> {
        if c == self.n_features {
            self.targets.clone()
        } else {
            (0..self.n_instances()).map(|r| self.feature(r, c)).collect()
        }
    }
}

/// Which CSV column holds the regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetColumn {
    #[default]
    Last,
    /// 0-based column index.
    Index(usize),
}

impl FromStr for TargetColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("last") {
            return Ok(TargetColumn::Last);
        }
        s.parse::<usize>()
            .map(TargetColumn::Index)
            .map_err(|_| format!("expected `last` or a 0-based column index, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Header present iff some cell of the first line is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

impl FromStr for HeaderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(HeaderMode::Auto),
            "yes" | "true" | "present" => Ok(HeaderMode::Present),
            "no" | "false" | "absent" => Ok(HeaderMode::Absent),
            _ => Err(format!("expected auto, yes or no, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub target: TargetColumn,
    pub header: HeaderMode,
}

/// Loads a numeric CSV file. The dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_csv(&name, &text, opts)
}

/// Parses numeric CSV text. Rows keep their file order.
pub fn parse_csv(name: &str, text: &str, opts: &CsvOptions) -> Result<Dataset> {
    let (cells, width) = parse_matrix(text, opts.header)?;
    if width < 2 {
        return Err(Error::invalid(format!(
            "need at least one feature and one target column, found {width} column(s)"
        )));
    }
    let target_col = match opts.target {
        TargetColumn::Last => width - 1,
        TargetColumn::Index(i) if i < width => i,
        TargetColumn::Index(i) => {
            return Err(Error::invalid(format!(
                "target column {i} out of range for {width} columns"
            )))
        }
    };
    let mut features = Vec::with_capacity(cells.len() - cells.len() / width);
    let mut targets = Vec::with_capacity(cells.len() / width);
    for (i, v) in cells.into_iter().enumerate() {
        if i % width == target_col {
            targets.push(v);
        } else {
            features.push(v);
        }
    }
    Dataset::new(name, features, targets, width - 1)
}

/// Loads a CSV of feature rows only (no target column).
pub fn load_feature_rows(path: impl AsRef<Path>, header: HeaderMode) -> Result<Vec<Vec<f64>>> {
    let (cells, width) = parse_matrix(&read_text(path.as_ref())?, header)?;
    Ok(cells.chunks(width).map(<[f64]>::to_vec).collect())
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(text)
}

/// Row-major numeric cells and the row width.
fn parse_matrix(text: &str, header: HeaderMode) -> Result<(Vec<f64>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec);
    }

    let skip_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => records
            .first()
            .is_some_and(|r| r.iter().any(|c| c.parse::<f64>().is_err())),
    };
    let first_data = usize::from(skip_header);
    let data = &records[first_data.min(records.len())..];
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let width = data[0].len();
    let mut cells = Vec::with_capacity(data.len() * width);
    for (r, rec) in data.iter().enumerate() {
        let line = r + first_data + 1;
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: line,
                expected: width,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    row: line,
                    column: c + 1,
                    value: cell.to_string(),
                })?;
            cells.push(value);
        }
    }
    Ok((cells, width))
}

/// Per-column `(min, max)` pairs; the last entry belongs to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    pub columns: Vec<(f64, f64)>,
}

impl NormalizationParams {
    pub fn fit(d: &Dataset) -> Self {
        let columns = (0..=d.n_features())
            .map(|c| {
                d.column(c)
                    .into_iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect();
        NormalizationParams { columns }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }

    fn scale(&self, c: usize, v: f64) -> f64 {
        let (lo, hi) = self.columns[c];
        let span = hi - lo;
        if span > 0.0 {
            (v - lo) / span
        } else {
            0.0
        }
    }

    fn unscale(&self, c: usize, v: f64) -> f64 {
        let (lo, hi) = self.columns[c];
        lo + v * (hi - lo)
    }

    /// Maps a dataset with the stored ranges. Values outside the fitted range
    /// land outside `[0, 1]`.
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        self.check_width(d.n_features())?;
        let nf = d.n_features();
        let features = d
            .features
            .iter()
            .enumerate()
            .map(|(i, &v)| self.scale(i % nf.max(1), v))
            .collect();
        let targets = d.targets.iter().map(|&v| self.scale(nf, v)).collect();
        Dataset::new(d.name.clone(), features, targets, nf)
    }

    pub fn apply_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_width(x.len())?;
        Ok(x.iter().enumerate().map(|(c, &v)| self.scale(c, v)).collect())
    }

    pub fn denormalize(&self, d: &Dataset) -> Result<Dataset> {
        self.check_width(d.n_features())?;
        let nf = d.n_features();
        let features = d
            .features
            .iter()
            .enumerate()
            .map(|(i, &v)| self.unscale(i % nf.max(1), v))
            .collect();
        let targets = d.targets.iter().map(|&v| self.unscale(nf, v)).collect();
        Dataset::new(d.name.clone(), features, targets, nf)
    }

    pub fn denormalize_target(&self, v: f64) -> f64 {
        self.unscale(self.n_features(), v)
    }

    fn check_width(&self, n_features: usize) -> Result<()> {
        if n_features != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: n_features,
            });
        }
        Ok(())
    }

    /// Writes `column,min,max` lines. Feature columns are numbered from 0 and
    /// the target column is named `target`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "column,min,max")?;
        for (c, (lo, hi)) in self.columns.iter().enumerate() {
            if c == self.n_features() {
                writeln!(out, "target,{lo:?},{hi:?}")?;
            } else {
                writeln!(out, "{c},{lo:?},{hi:?}")?;
            }
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 3 {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: 3,
                    found: cells.len(),
                });
            }
            let parse = |c: usize| {
                cells[c].parse::<f64>().map_err(|_| Error::NonNumeric {
                    row: i + 1,
                    column: c + 1,
                    value: cells[c].to_string(),
                })
            };
            columns.push((parse(1)?, parse(2)?));
        }
        if columns.len() < 2 {
            return Err(Error::EmptyDataset);
        }
        Ok(NormalizationParams { columns })
    }
}

/// Min-max normalizes every feature column and the target into `[0, 1]`.
/// Constant columns map to `0.0`.
pub fn normalize_minmax(d: &Dataset) -> (Dataset, NormalizationParams) {
    let params = NormalizationParams::fit(d);
    let normalized = params
        .apply(d)
        .expect("params fitted on the same dataset have matching width");
    (normalized, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizeMode {
    /// Fit on the full dataset before splitting.
    #[default]
    Global,
    /// Fit on each training fold and apply to its test fold.
    Fold,
    None,
}

impl FromStr for NormalizeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(NormalizeMode::Global),
            "fold" => Ok(NormalizeMode::Fold),
            "none" => Ok(NormalizeMode::None),
            _ => Err(format!("expected global, fold or none, got {s:?}")),
        }
    }
}

impl fmt::Display for NormalizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizeMode::Global => "global",
            NormalizeMode::Fold => "fold",
            NormalizeMode::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Shuffles `0..n` with the seeded generator and deals it into `folds`
/// contiguous chunks; the first `n % folds` chunks get one extra instance.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if folds < 2 {
        return Err(Error::invalid(format!("folds must be at least 2, got {folds}")));
    }
    if folds > n {
        return Err(Error::invalid(format!(
            "cannot split {n} instances into {folds} folds"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(seed));

    let base = n / folds;
    let extra = n % folds;
    let mut bounds = Vec::with_capacity(folds + 1);
    bounds.push(0);
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        bounds.push(bounds[f] + size);
    }

    Ok((0..folds)
        .map(|f| {
            let (lo, hi) = (bounds[f], bounds[f + 1]);
            let test_indices = perm[lo..hi].to_vec();
            let train_indices = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
            FoldSplit {
                fold_id: f,
                train_indices,
                test_indices,
            }
        })
        .collect())
}
