//! Replicated k-fold cross-validation benchmark and its reports.
//!
//! For every replication the data is shuffled into folds; on each training
//! fold a bagged ensemble and a single tree are fitted, and every test pattern
//! is predicted by every configured method. All methods of one fold share the
//! same ensemble and the same regions of competence, so differences between
//! columns come from the combiner and the measure alone.
//!
//! Outputs (see [`write_outputs`]):
//!
//! * `results.csv`: `dataset,algorithm,measure,mse_mean,mse_std,scale`
//! * `wtl.csv`: Win/Tie/Loss counts per table column
//! * `diff_m7.csv`: per dataset, `m7` error minus the best measure's error
//! * `agreement.csv`: per replication, how often DS picks the same member
//!   under `m3` and `m7`
//! * `tables.txt`: the rendered `mean(std)` tables

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataset::{kfold_split, load_csv, normalize_minmax, CsvOptions, Dataset, NormalizationParams, NormalizeMode};
use crate::learners::{fit_individual, generate_ensemble, Regressor, TreeParams};
use crate::measures::{score_all, CompetenceScore, Measure};
use crate::region::RegionBuilder;
use crate::rng::{derive_seed, DEFAULT_SEED};
use crate::selection::{argmin, ds_predict, dw_predict, dw_weights, dws_predict, static_mean, static_median, Algorithm, DwsThreshold};
use crate::{Error, Result};

/// One results column: an algorithm, plus a measure for the dynamic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Method {
    pub algorithm: Algorithm,
    pub measure: Option<Measure>,
}

impl Method {
    pub fn dynamic(algorithm: Algorithm, measure: Measure) -> Self {
        Method {
            algorithm,
            measure: Some(measure),
        }
    }

    pub fn fixed(algorithm: Algorithm) -> Self {
        Method {
            algorithm,
            measure: None,
        }
    }

    /// Dynamic algorithms crossed with every measure, static ones once.
    pub fn expand(algorithms: &[Algorithm], measures: &[Measure]) -> Vec<Method> {
        let mut out = Vec::new();
        for &a in algorithms {
            if a.is_dynamic() {
                out.extend(measures.iter().map(|&m| Method::dynamic(a, m)));
            } else {
                out.push(Method::fixed(a));
            }
        }
        out.dedup();
        out
    }

    /// Column header as printed in the rendered tables.
    pub fn header(&self) -> String {
        match (self.algorithm, self.measure) {
            (_, Some(m)) => m.to_string(),
            (Algorithm::Single, None) => "Individual".to_string(),
            (Algorithm::Mean, None) => "Mean".to_string(),
            (Algorithm::Median, None) => "Median".to_string(),
            (a, None) => a.to_string(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.measure {
            Some(m) => write!(f, "{}:{}", self.algorithm, m),
            None => write!(f, "{}", self.algorithm),
        }
    }
}

/// Scale at which MSE values are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Multiplied by 10^4, two decimals.
    #[default]
    E4,
    /// Unscaled, six decimals.
    Raw,
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::E4 => 1e4,
            Scale::Raw => 1.0,
        }
    }

    pub fn decimals(self) -> usize {
        match self {
            Scale::E4 => 2,
            Scale::Raw => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scale::E4 => "1e-4",
            Scale::Raw => "raw",
        }
    }

    pub fn render(self, v: f64) -> String {
        format!("{:.*}", self.decimals(), v * self.factor())
    }

    /// `mean(std)` at this scale, e.g. `3.00(1.41)`.
    pub fn render_cell(self, mean: f64, std: f64) -> String {
        format!("{}({})", self.render(mean), self.render(std))
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "1e-4" | "e4" | "1e4" => Ok(Scale::E4),
            "raw" | "1" => Ok(Scale::Raw),
            _ => Err(format!("expected 1e-4 or raw, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    pub csv: CsvOptions,
    pub algorithms: Vec<Algorithm>,
    pub measures: Vec<Measure>,
    /// Size of the region of competence.
    pub k: usize,
    pub n_members: usize,
    pub folds: usize,
    pub replications: usize,
    pub seed: u64,
    pub tree: TreeParams,
    pub normalize: NormalizeMode,
    pub dws_threshold: DwsThreshold,
    pub scale: Scale,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: Vec::new(),
            csv: CsvOptions::default(),
            algorithms: Algorithm::ALL.to_vec(),
            measures: Measure::ALL.to_vec(),
            k: 10,
            n_members: 100,
            folds: 10,
            replications: 3,
            seed: DEFAULT_SEED,
            tree: TreeParams::default(),
            normalize: NormalizeMode::Global,
            dws_threshold: DwsThreshold::Midpoint,
            scale: Scale::E4,
            jobs: None,
            out_dir: PathBuf::from("drs-out"),
        }
    }
}

impl RunConfig {
    pub fn methods(&self) -> Vec<Method> {
        Method::expand(&self.algorithms, &self.measures)
    }

    fn uses_dynamic(&self) -> bool {
        self.algorithms.iter().any(|a| a.is_dynamic())
    }

    /// Checks everything that does not depend on the data. Messages name the
    /// offending command-line flag.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("--k", self.k),
            ("--members", self.n_members),
            ("--reps", self.replications),
        ];
        for (flag, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("{flag} must be at least 1")));
            }
        }
        if self.folds < 2 {
            return Err(Error::invalid("--folds must be at least 2"));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("--algo selects no algorithm"));
        }
        if self.uses_dynamic() && self.measures.is_empty() {
            return Err(Error::invalid("--measures selects no measure"));
        }
        if self.uses_dynamic() && self.measures.contains(&Measure::M1) && self.k < 2 {
            return Err(Error::invalid("--k must be at least 2 when m1 (variance) is selected"));
        }
        self.tree.validate()
    }

    /// The data-dependent check: every training fold must hold `k` patterns.
    pub fn check_dataset(&self, d: &Dataset) -> Result<()> {
        let n = d.n_instances();
        if n < self.folds {
            return Err(Error::invalid(format!(
                "{}: {n} instances cannot be split into --folds {}",
                d.name(),
                self.folds
            )));
        }
        let smallest_train = n - n.div_ceil(self.folds);
        if self.k > smallest_train {
            return Err(Error::invalid(format!(
                "--k {} exceeds the smallest training fold ({smallest_train} instances) of {}",
                self.k,
                d.name()
            )));
        }
        Ok(())
    }
}

/// Mean squared error.
pub fn mse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / predictions.len() as f64)
}

/// Outcome of one replication of k-fold cross-validation on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    /// Per method, the mean over folds of the test-fold MSE.
    pub mse: Vec<f64>,
    /// Fraction of test patterns where DS picks the same member under `m3`
    /// and `m7`.
    pub m3_m7_agreement: f64,
}

struct PatternOutcome {
    predictions: Vec<f64>,
    m3_m7_agree: bool,
}

fn needed_measures(methods: &[Method]) -> Vec<Measure> {
    let mut ms: Vec<Measure> = methods.iter().filter_map(|m| m.measure).collect();
    ms.extend([Measure::M3, Measure::M7]);
    ms.sort();
    ms.dedup();
    ms
}

/// Runs one replication. `dataset` must already be normalized when the
/// configuration asks for global normalization.
pub fn run_replication(
    config: &RunConfig,
    methods: &[Method],
    dataset: &Dataset,
    replication_seed: u64,
) -> Result<ReplicationResult> {
    if methods.is_empty() {
        return Err(Error::invalid("no methods to evaluate"));
    }
    config.check_dataset(dataset)?;
    let measures = needed_measures(methods);
    let splits = kfold_split(dataset.n_instances(), config.folds, derive_seed(replication_seed, 0))?;

    let mut fold_mse = vec![0.0; methods.len()];
    let mut agree = 0usize;
    let mut total = 0usize;

    for split in &splits {
        let mut train = dataset.select(&split.train_indices)?;
        let mut test = dataset.select(&split.test_indices)?;
        if config.normalize == NormalizeMode::Fold {
            let params = NormalizationParams::fit(&train);
            train = params.apply(&train)?;
            test = params.apply(&test)?;
        }

        let fold_seed = derive_seed(replication_seed, 1 + split.fold_id as u64);
        let ensemble = generate_ensemble(&train, config.n_members, &config.tree, fold_seed)?;
        let individual = fit_individual(&train, &config.tree)?;
        let builder = RegionBuilder::new(&train, &ensemble)?;

        let outcomes: Vec<PatternOutcome> = (0..test.n_instances())
            .into_par_iter()
            .map(|j| -> Result<PatternOutcome> {
                let x = test.row(j);
                let q = ensemble.predict_all(x)?;
                let region = builder.build(x, config.k)?;
                let mut scores: [Option<CompetenceScore>; 8] = Default::default();
                for &m in &measures {
                    scores[m as usize] = Some(score_all(m, &region, &q)?);
                }
                let score = |m: Measure| scores[m as usize].as_ref().expect("measure scored above");
                let predictions = methods
                    .iter()
                    .map(|method| match (method.algorithm, method.measure) {
                        (Algorithm::Ds, Some(m)) => ds_predict(score(m), &q).0,
                        (Algorithm::Dw, Some(m)) => dw_predict(&dw_weights(score(m)), &q),
                        (Algorithm::Dws, Some(m)) => dws_predict(score(m), &q, config.dws_threshold).0,
                        (Algorithm::Mean, _) => static_mean(&q),
                        (Algorithm::Median, _) => static_median(&q),
                        (Algorithm::Single, _) => individual.evaluate(x),
                        (a, None) => unreachable!("{a} requires a measure"),
                    })
                    .collect();
                Ok(PatternOutcome {
                    predictions,
                    m3_m7_agree: argmin(score(Measure::M3)) == argmin(score(Measure::M7)),
                })
            })
            .collect::<Result<_>>()?;

        for (mi, acc) in fold_mse.iter_mut().enumerate() {
            let preds: Vec<f64> = outcomes.iter().map(|o| o.predictions[mi]).collect();
            *acc += mse(&preds, test.targets())?;
        }
        agree += outcomes.iter().filter(|o| o.m3_m7_agree).count();
        total += outcomes.len();
    }

    let n_folds = splits.len() as f64;
    Ok(ReplicationResult {
        mse: fold_mse.into_iter().map(|s| s / n_folds).collect(),
        m3_m7_agreement: agree as f64 / total as f64,
    })
}

/// Mean and spread of one (dataset, method) cell across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub method: Method,
    pub mse_mean: f64,
    /// Sample standard deviation; `0` for a single replication.
    pub mse_std: f64,
    pub per_replication: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResult {
    pub name: String,
    pub n_instances: usize,
    pub n_features: usize,
    pub cells: Vec<CellStats>,
    pub agreement: Vec<f64>,
}

impl DatasetResult {
    pub fn cell(&self, method: Method) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub methods: Vec<Method>,
    pub datasets: Vec<DatasetResult>,
}

/// Sample mean and standard deviation (divisor `n - 1`).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Collapses per-replication results into per-method statistics.
pub fn aggregate(
    dataset: &Dataset,
    methods: &[Method],
    replications: &[ReplicationResult],
) -> Result<DatasetResult> {
    if methods.is_empty() {
        return Err(Error::invalid("no methods to aggregate"));
    }
    if replications.is_empty() {
        return Err(Error::invalid("no replications to aggregate"));
    }
    if let Some(r) = replications.iter().find(|r| r.mse.len() != methods.len()) {
        return Err(Error::invalid(format!(
            "replication has {} results for {} methods",
            r.mse.len(),
            methods.len()
        )));
    }
    let cells = methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let per_replication: Vec<f64> = replications.iter().map(|r| r.mse[mi]).collect();
            let (mse_mean, mse_std) = mean_std(&per_replication);
            CellStats {
                method,
                mse_mean,
                mse_std,
                per_replication,
            }
        })
        .collect();
    Ok(DatasetResult {
        name: dataset.name().to_string(),
        n_instances: dataset.n_instances(),
        n_features: dataset.n_features(),
        cells,
        agreement: replications.iter().map(|r| r.m3_m7_agreement).collect(),
    })
}

/// Runs every replication on an already loaded dataset.
pub fn run_dataset(config: &RunConfig, dataset: &Dataset) -> Result<DatasetResult> {
    config.validate()?;
    let methods = config.methods();
    let prepared = match config.normalize {
        NormalizeMode::Global => normalize_minmax(dataset).0,
        NormalizeMode::Fold | NormalizeMode::None => dataset.clone(),
    };
    config.check_dataset(&prepared)?;
    let reps: Vec<ReplicationResult> = (0..config.replications)
        .into_par_iter()
        .map(|r| run_replication(config, &methods, &prepared, derive_seed(config.seed, r as u64)))
        .collect::<Result<_>>()?;
    aggregate(&prepared, &methods, &reps)
}

/// Loads every configured dataset and runs the full protocol on each.
pub fn run_bench(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    if config.datasets.is_empty() {
        return Err(Error::invalid("--data names no dataset"));
    }
    let datasets = config
        .datasets
        .iter()
        .map(|p| load_csv(p, &config.csv))
        .collect::<Result<Vec<_>>>()?;
    for d in &datasets {
        config.check_dataset(d)?;
    }
    let run = || -> Result<RunResult> {
        Ok(RunResult {
            methods: config.methods(),
            datasets: datasets
                .iter()
                .map(|d| run_dataset(config, d))
                .collect::<Result<_>>()?,
        })
    };
    match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// A group of columns rendered and ranked together.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<Method>,
}

/// Groups methods the way the result tables do: DS next to the individual
/// regressor; DW and DWS each next to Mean and Median. Static methods that
/// end up in no group get a table of their own.
pub fn tables(methods: &[Method]) -> Vec<Table> {
    let has = |a: Algorithm| methods.iter().any(|m| m.algorithm == a);
    let of = |a: Algorithm| methods.iter().filter(move |m| m.algorithm == a).copied();
    let mut out = Vec::new();
    let mut placed: Vec<Algorithm> = Vec::new();
    for (dynamic, baselines) in [
        (Algorithm::Ds, &[Algorithm::Single][..]),
        (Algorithm::Dw, &[Algorithm::Mean, Algorithm::Median][..]),
        (Algorithm::Dws, &[Algorithm::Mean, Algorithm::Median][..]),
    ] {
        if !has(dynamic) {
            continue;
        }
        let mut columns: Vec<Method> = baselines.iter().flat_map(|&b| of(b)).collect();
        columns.extend(of(dynamic));
        placed.extend(baselines.iter().filter(|&&b| has(b)));
        out.push(Table {
            title: dynamic.as_str().to_uppercase(),
            columns,
        });
    }
    let rest: Vec<Method> = methods
        .iter()
        .filter(|m| !m.algorithm.is_dynamic() && !placed.contains(&m.algorithm))
        .copied()
        .collect();
    if !rest.is_empty() {
        out.push(Table {
            title: "Static".to_string(),
            columns: rest,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinTieLoss {
    pub win: usize,
    pub tie: usize,
    pub loss: usize,
}

/// Win/Tie/Loss per column. `rows[d][c]` is the value of column `c` on
/// dataset `d`; values are compared after rounding to `decimals` digits. A
/// column wins a dataset when it alone holds the lowest value, ties when it
/// shares the lowest value, and loses otherwise.
pub fn win_tie_loss(rows: &[Vec<f64>], decimals: usize) -> Vec<WinTieLoss> {
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut out = vec![WinTieLoss::default(); n_cols];
    let unit = 10f64.powi(decimals as i32);
    for row in rows {
        assert_eq!(row.len(), n_cols, "ragged results table");
        let keys: Vec<i64> = row.iter().map(|v| (v * unit).round() as i64).collect();
        let Some(&best) = keys.iter().min() else { continue };
        let n_best = keys.iter().filter(|&&k| k == best).count();
        for (c, &key) in keys.iter().enumerate() {
            match (key == best, n_best == 1) {
                (true, true) => out[c].win += 1,
                (true, false) => out[c].tie += 1,
                (false, _) => out[c].loss += 1,
            }
        }
    }
    out
}

/// Win/Tie/Loss of one table, compared at the displayed precision.
pub fn table_win_tie_loss(result: &RunResult, table: &Table, scale: Scale) -> Vec<WinTieLoss> {
    let rows: Vec<Vec<f64>> = result
        .datasets
        .iter()
        .map(|d| {
            table
                .columns
                .iter()
                .map(|&m| d.cell(m).map_or(f64::INFINITY, |c| c.mse_mean * scale.factor()))
                .collect()
        })
        .collect();
    win_tie_loss(&rows, scale.decimals())
}

#[derive(Debug, Clone, PartialEq)]
pub struct M7Difference {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub best_measure: Measure,
    pub m7: f64,
    pub best: f64,
    /// `m7 - best`; never negative since `m7` is one of the candidates.
    pub diff: f64,
}

/// For each dataset, the gap between `m7` and the best measure under
/// `algorithm`. Empty when `m7` was not run.
pub fn diff_vs_m7(result: &RunResult, algorithm: Algorithm) -> Vec<M7Difference> {
    result
        .datasets
        .iter()
        .filter_map(|d| {
            let m7 = d.cell(Method::dynamic(algorithm, Measure::M7))?.mse_mean;
            let best = d
                .cells
                .iter()
                .filter(|c| c.method.algorithm == algorithm)
                .filter_map(|c| Some((c.method.measure?, c.mse_mean)))
                .fold(None, |acc: Option<(Measure, f64)>, (m, v)| match acc {
                    Some((_, bv)) if bv <= v => acc,
                    _ => Some((m, v)),
                })?;
            Some(M7Difference {
                dataset: d.name.clone(),
                algorithm,
                best_measure: best.0,
                m7,
                best: best.1,
                diff: m7 - best.1,
            })
        })
        .collect()
}

pub fn results_csv(result: &RunResult, scale: Scale) -> String {
    let mut out = String::from("dataset,algorithm,measure,mse_mean,mse_std,scale\n");
    for d in &result.datasets {
        for c in &d.cells {
            let measure = c.method.measure.map_or_else(|| "-".to_string(), |m| m.to_string());
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{}",
                d.name,
                c.method.algorithm,
                measure,
                c.mse_mean * scale.factor(),
                c.mse_std * scale.factor(),
                scale.label()
            )
            .unwrap();
        }
    }
    out
}

pub fn wtl_csv(result: &RunResult, scale: Scale) -> String {
    let mut out = String::from("table,column,win,tie,loss\n");
    for t in tables(&result.methods) {
        for (m, w) in t.columns.iter().zip(table_win_tie_loss(result, &t, scale)) {
            writeln!(out, "{},{},{},{},{}", t.title, m, w.win, w.tie, w.loss).unwrap();
        }
    }
    out
}

pub fn diff_m7_csv(result: &RunResult, scale: Scale) -> String {
    let mut out = String::from("algorithm,dataset,best_measure,m7,best,diff,scale\n");
    for a in [Algorithm::Ds, Algorithm::Dw, Algorithm::Dws] {
        for d in diff_vs_m7(result, a) {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                a,
                d.dataset,
                d.best_measure,
                scale.render(d.m7),
                scale.render(d.best),
                scale.render(d.diff),
                scale.label()
            )
            .unwrap();
        }
    }
    out
}

pub fn agreement_csv(result: &RunResult) -> String {
    let mut out = String::from("dataset,replication,ds_m3_m7_agreement\n");
    for d in &result.datasets {
        for (r, a) in d.agreement.iter().enumerate() {
            writeln!(out, "{},{},{:.6}", d.name, r, a).unwrap();
        }
    }
    out
}

/// Plain-text rendering of every table: one row per dataset with
/// `mean(std)` cells, the best cell marked with `*`, and a Win/Tie/Loss row.
pub fn render_tables(result: &RunResult, scale: Scale) -> String {
    let mut out = String::new();
    for t in tables(&result.methods) {
        let header: Vec<String> = std::iter::once("Dataset".to_string())
            .chain(t.columns.iter().map(Method::header))
            .collect();
        let mut rows = vec![header];
        for d in &result.datasets {
            let cells: Vec<Option<&CellStats>> = t.columns.iter().map(|&m| d.cell(m)).collect();
            let rendered: Vec<String> = cells
                .iter()
                .map(|c| c.map_or("-".to_string(), |c| scale.render_cell(c.mse_mean, c.mse_std)))
                .collect();
            let best = cells
                .iter()
                .filter_map(|c| c.map(|c| scale.render(c.mse_mean).parse::<f64>().unwrap()))
                .fold(f64::INFINITY, f64::min);
            let mut row = vec![d.name.clone()];
            for (c, text) in cells.iter().zip(rendered) {
                let is_best = c.is_some_and(|c| scale.render(c.mse_mean).parse::<f64>().unwrap() == best);
                row.push(if is_best { format!("*{text}") } else { text });
            }
            rows.push(row);
        }
        let wtl = table_win_tie_loss(result, &t, scale);
        rows.push(
            std::iter::once("Win/Tie/Loss".to_string())
                .chain(wtl.iter().map(|w| format!("{}/{}/{}", w.win, w.tie, w.loss)))
                .collect(),
        );

        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        writeln!(out, "{} (MSE, scale {}; * marks the best)", t.title, scale.label()).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
            if i == 0 || i == rows.len() - 2 {
                writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))).unwrap();
            }
        }
        out.push('\n');
    }
    for d in &result.datasets {
        let (mean, _) = mean_std(&d.agreement);
        writeln!(out, "DS winner agreement m3 vs m7 on {}: {:.4}", d.name, mean).unwrap();
    }
    out
}

/// Writes every report into `dir`, creating it if needed.
pub fn write_outputs(result: &RunResult, dir: &Path, scale: Scale) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = [
        ("results.csv", results_csv(result, scale)),
        ("wtl.csv", wtl_csv(result, scale)),
        ("diff_m7.csv", diff_m7_csv(result, scale)),
        ("agreement.csv", agreement_csv(result)),
        ("tables.txt", render_tables(result, scale)),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| Error::Write { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, constant: Option<f64>) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64 * 0.618).fract(), (i as f64 * 0.414).fract()])
            .collect();
        let ys = rows
            .iter()
            .map(|r| constant.unwrap_or_else(|| (3.0 * r[0]).sin() + r[1] * r[1]))
            .collect();
        Dataset::from_rows("syn", rows, ys).unwrap()
    }

    fn small_config() -> RunConfig {
        RunConfig {
            k: 5,
            n_members: 8,
            folds: 4,
            replications: 2,
            ..RunConfig::default()
        }
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 4.0]).unwrap(), 2.0);
        assert_eq!(mse(&[2.0, 1.0], &[4.0, 1.0]).unwrap(), 2.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn cell_rendering() {
        let (m, s) = mean_std(&[2e-4, 4e-4]);
        assert_eq!(Scale::E4.render_cell(m, s), "3.00(1.41)");
        let (m, s) = mean_std(&[5e-4]);
        assert_eq!(s, 0.0);
        assert_eq!(Scale::E4.render_cell(m, s), "5.00(0.00)");
    }

    #[test]
    fn aggregate_rejects_empty_method_set() {
        let d = synthetic(10, None);
        let reps = [ReplicationResult { mse: vec![], m3_m7_agreement: 1.0 }];
        assert!(aggregate(&d, &[], &reps).is_err());
    }

    #[test]
    fn wtl_examples() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 1.0]];
        let w = win_tie_loss(&rows, 2);
        assert_eq!(w[0], WinTieLoss { win: 1, tie: 1, loss: 0 });
        assert_eq!(w[1], WinTieLoss { win: 0, tie: 1, loss: 1 });

        let w = win_tie_loss(&[vec![3.0, 3.0], vec![1.5, 1.5]], 2);
        assert!(w.iter().all(|x| *x == WinTieLoss { win: 0, tie: 2, loss: 0 }));

        let w = win_tie_loss(&[vec![3.0], vec![7.0], vec![1.0]], 2);
        assert_eq!(w[0], WinTieLoss { win: 3, tie: 0, loss: 0 });

        // equal once rounded to display precision
        let w = win_tie_loss(&[vec![1.851, 1.849]], 2);
        assert_eq!(w[0].tie + w[1].tie, 2);
    }

    #[test]
    fn m7_difference() {
        let method_cells = |vals: &[(Measure, f64)]| {
            vals.iter()
                .map(|&(m, v)| CellStats {
                    method: Method::dynamic(Algorithm::Ds, m),
                    mse_mean: v,
                    mse_std: 0.0,
                    per_replication: vec![v],
                })
                .collect()
        };
        let result = RunResult {
            methods: vec![],
            datasets: vec![
                DatasetResult {
                    name: "airfoil".into(),
                    n_instances: 0,
                    n_features: 0,
                    cells: method_cells(&[(Measure::M2, 4.58e-4), (Measure::M7, 6.65e-4), (Measure::M3, 4.66e-4)]),
                    agreement: vec![],
                },
                DatasetResult {
                    name: "m7best".into(),
                    n_instances: 0,
                    n_features: 0,
                    cells: method_cells(&[(Measure::M1, 2e-4), (Measure::M7, 1e-4)]),
                    agreement: vec![],
                },
            ],
        };
        let diffs = diff_vs_m7(&result, Algorithm::Ds);
        assert_eq!(diffs[0].best_measure, Measure::M2);
        assert_eq!(Scale::E4.render(diffs[0].diff), "2.07");
        assert_eq!(diffs[1].diff, 0.0);
        assert!(diff_vs_m7(&result, Algorithm::Dw).is_empty());
    }

    #[test]
    fn method_expansion_and_tables() {
        let methods = Method::expand(&Algorithm::ALL, &[Measure::M2, Measure::M7]);
        assert_eq!(methods.len(), 3 * 2 + 3);
        assert_eq!(methods[0].to_string(), "ds:m2");
        let t = tables(&methods);
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].columns[0], Method::fixed(Algorithm::Single));
        assert_eq!(t[1].columns.len(), 4);

        let only_static = tables(&[Method::fixed(Algorithm::Mean), Method::fixed(Algorithm::Single)]);
        assert_eq!(only_static.len(), 1);
        assert_eq!(only_static[0].title, "Static");
    }

    #[test]
    fn constant_target_gives_zero_mse() {
        let d = synthetic(40, Some(3.5));
        let cfg = RunConfig {
            algorithms: vec![Algorithm::Mean],
            ..small_config()
        };
        let r = run_dataset(&cfg, &d).unwrap();
        assert_eq!(r.cells[0].mse_mean, 0.0);
    }

    #[test]
    fn replication_is_deterministic() {
        let d = normalize_minmax(&synthetic(60, None)).0;
        let cfg = small_config();
        let methods = cfg.methods();
        let a = run_replication(&cfg, &methods, &d, 99).unwrap();
        let b = run_replication(&cfg, &methods, &d, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mse.len(), methods.len());
        assert!(a.mse.iter().all(|&v| v >= 0.0));
        assert!((0.0..=1.0).contains(&a.m3_m7_agreement));
        let c = run_replication(&cfg, &methods, &d, 100).unwrap();
        assert_ne!(a.mse, c.mse);
    }

    #[test]
    fn fold_normalization_runs() {
        let d = synthetic(60, None);
        for mode in [NormalizeMode::Fold, NormalizeMode::None] {
            let cfg = RunConfig {
                normalize: mode,
                ..small_config()
            };
            let r = run_dataset(&cfg, &d).unwrap();
            assert!(r.cells.iter().all(|c| c.mse_mean >= 0.0 && c.mse_std >= 0.0));
        }
    }

    #[test]
    fn k_larger_than_train_fold_rejected() {
        let d = synthetic(20, None);
        let cfg = RunConfig {
            k: 16,
            ..small_config()
        };
        let err = run_dataset(&cfg, &d).unwrap_err().to_string();
        assert!(err.contains("--k"), "{err}");
        let ok = RunConfig { k: 15, ..small_config() };
        assert!(run_dataset(&ok, &d).is_ok());
    }

    #[test]
    fn config_validation_names_flags() {
        for (cfg, flag) in [
            (RunConfig { k: 0, ..RunConfig::default() }, "--k"),
            (RunConfig { n_members: 0, ..RunConfig::default() }, "--members"),
            (RunConfig { replications: 0, ..RunConfig::default() }, "--reps"),
            (RunConfig { folds: 1, ..RunConfig::default() }, "--folds"),
            (RunConfig { k: 1, ..RunConfig::default() }, "--k"),
            (RunConfig { jobs: Some(0), ..RunConfig::default() }, "--jobs"),
        ] {
            let msg = cfg.validate().unwrap_err().to_string();
            assert!(msg.contains(flag), "{msg}");
        }
        let k1 = RunConfig {
            k: 1,
            measures: vec![Measure::M3],
            ..RunConfig::default()
        };
        assert!(k1.validate().is_ok());
    }

    #[test]
    fn reports_are_consistent() {
        let d = synthetic(60, None);
        let cfg = small_config();
        let result = RunResult {
            methods: cfg.methods(),
            datasets: vec![run_dataset(&cfg, &d).unwrap()],
        };
        let csv = results_csv(&result, Scale::E4);
        assert_eq!(csv.lines().count(), 1 + cfg.methods().len());
        for t in tables(&result.methods) {
            for w in table_win_tie_loss(&result, &t, Scale::E4) {
                assert_eq!(w.win + w.tie + w.loss, 1);
            }
        }
        for a in [Algorithm::Ds, Algorithm::Dw, Algorithm::Dws] {
            assert!(diff_vs_m7(&result, a).iter().all(|x| x.diff >= 0.0));
        }
        let text = render_tables(&result, Scale::E4);
        assert!(text.contains("Win/Tie/Loss"));
        assert!(text.contains("Individual"));

        let dir = tempfile::tempdir().unwrap();
        write_outputs(&result, dir.path(), Scale::E4).unwrap();
        for f in ["results.csv", "wtl.csv", "diff_m7.csv", "agreement.csv", "tables.txt"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
