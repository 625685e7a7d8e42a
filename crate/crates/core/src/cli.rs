//! Command-line front end: `drs bench`, `drs predict` and `drs inspect`.
//!
//! Exit codes: `0` success, `1` I/O or data failure, `2` invalid arguments.
//!
//! Every flag can also be given in a `--config` file of `key=value` lines,
//! where the key is the flag name without the leading dashes (`k=10`,
//! `measures=m1..m8`, `data=a.csv,b.csv`). Lines starting with `#` are
//! ignored. Flags given on the command line override the file.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::{Display, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bench::{render_tables, run_bench, write_outputs, RunConfig, Scale};
use crate::dataset::{
    load_csv, load_feature_rows, CsvOptions, Dataset, HeaderMode, NormalizationParams, NormalizeMode, TargetColumn,
};
use crate::learners::{generate_ensemble, fit_individual, Regressor, TreeParams};
use crate::measures::{score_member, Measure};
use crate::region::RegionBuilder;
use crate::rng::DEFAULT_SEED;
use crate::selection::{ds_predict, dw_predict, dw_weights, dws_predict, static_mean, static_median, Algorithm, DwsThreshold, MemberWeights};
use crate::measures::score_all;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "drs", version, about = "Dynamic regressor selection over bagged regression trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replicated k-fold cross-validation over datasets, algorithms and measures.
    Bench(BenchArgs),
    /// Train on one CSV and predict the rows of another.
    Predict(PredictArgs),
    /// Dump the region of competence and all eight scores for one query.
    Inspect(InspectArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// key=value file mirroring the command-line flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target column: `last` or a 0-based index
    #[arg(long = "target-col")]
    pub target_col: Option<String>,
    /// Whether CSV files start with a header line: auto, yes or no
    #[arg(long)]
    pub header: Option<String>,
    /// Size K of the region of competence [default: 10]
    #[arg(long)]
    pub k: Option<usize>,
    /// Ensemble size N [default: 100]
    #[arg(long)]
    pub members: Option<usize>,
    /// Seed for every random choice [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// global, fold or none [default: global]
    #[arg(long)]
    pub normalize: Option<String>,
    /// Minimum node size for a split attempt [default: 10]
    #[arg(long = "min-parent")]
    pub min_parent: Option<usize>,
    /// Minimum leaf size [default: 1]
    #[arg(long = "min-leaf")]
    pub min_leaf: Option<usize>,
    /// Maximum tree depth [default: unlimited]
    #[arg(long = "max-depth")]
    pub max_depth: Option<usize>,
    /// Discard DWS members above (E_max - E_min)/2 instead of the midpoint
    #[arg(long = "dws-literal-threshold", hide = true)]
    pub dws_literal_threshold: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dataset CSV file; repeat for several datasets
    #[arg(long)]
    pub data: Vec<PathBuf>,
    /// Comma-separated algorithms: ds, dw, dws, mean, median, single [default: all]
    #[arg(long)]
    pub algo: Option<String>,
    /// Comma-separated measures or ranges, e.g. m1..m8 [default: m1..m8]
    #[arg(long)]
    pub measures: Option<String>,
    /// Number of folds [default: 10]
    #[arg(long)]
    pub folds: Option<usize>,
    /// Number of replications [default: 3]
    #[arg(long)]
    pub reps: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory [default: drs-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reporting scale: 1e-4 or raw [default: 1e-4]
    #[arg(long)]
    pub scale: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training CSV (features and target)
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Query CSV (features only)
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// ds, dw, dws, mean, median or single [default: ds]
    #[arg(long)]
    pub algo: Option<String>,
    /// Competence measure for ds/dw/dws [default: m3]
    #[arg(long)]
    pub measure: Option<String>,
    /// Output CSV [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Reference CSV (features and target)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Query CSV (features only). Without it the query is row `--row` of
    /// `--data`, left out of the reference set.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// 0-based query row
    #[arg(long)]
    pub row: Option<usize>,
    /// Directory for region.csv and scores.csv [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_IO,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Values read from a `--config` file.
#[derive(Debug, Default)]
struct ConfigFile {
    values: HashMap<String, Vec<String>>,
}

impl ConfigFile {
    fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Failure(format!("cannot read {}: {e}", path.display())))?;
        let mut values: HashMap<String, Vec<String>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!("{}:{}: expected key=value", path.display(), i + 1))
            })?;
            let key = key.trim().trim_start_matches("--").to_string();
            if !allowed.contains(&key.as_str()) {
                return Err(usage(format!("{}:{}: unknown key {key:?}", path.display(), i + 1)));
            }
            values.entry(key).or_default().push(value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.values.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.values
            .get(key)
            .into_iter()
            .flatten()
            .flat_map(|v| v.split(','))
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect()
    }

    /// Command-line value if present, else the file's, parsed.
    fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.last(key)
            .map(|v| v.parse::<T>().map_err(|e| usage(format!("invalid value for --{key}: {e}"))))
            .transpose()
    }

    fn pick_parsed<T>(&self, flag: Option<String>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.pick::<String>(flag, key)?
            .map(|v| v.parse::<T>().map_err(|e| usage(format!("invalid value for --{key}: {e}"))))
            .transpose()
    }

    fn pick_flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

const MODEL_KEYS: [&str; 11] = [
    "target-col",
    "header",
    "k",
    "members",
    "seed",
    "normalize",
    "min-parent",
    "min-leaf",
    "max-depth",
    "dws-literal-threshold",
    "config",
];

/// Shared model settings after merging flags and config file.
struct ModelSettings {
    csv: CsvOptions,
    k: usize,
    members: usize,
    seed: u64,
    normalize: NormalizeMode,
    tree: TreeParams,
    dws_threshold: DwsThreshold,
}

fn resolve_model(args: ModelArgs, file: &ConfigFile) -> Result<ModelSettings, CliError> {
    let defaults = TreeParams::default();
    let tree = TreeParams {
        min_parent_size: file.pick(args.min_parent, "min-parent")?.unwrap_or(defaults.min_parent_size),
        min_leaf_size: file.pick(args.min_leaf, "min-leaf")?.unwrap_or(defaults.min_leaf_size),
        max_depth: file.pick(args.max_depth, "max-depth")?,
    };
    tree.validate().map_err(|e| usage(format!("invalid tree flags (--min-parent/--min-leaf): {e}")))?;
    let k = file.pick(args.k, "k")?.unwrap_or(10);
    if k == 0 {
        return Err(usage("invalid value for --k: must be at least 1"));
    }
    let members = file.pick(args.members, "members")?.unwrap_or(100);
    if members == 0 {
        return Err(usage("invalid value for --members: must be at least 1"));
    }
    Ok(ModelSettings {
        csv: CsvOptions {
            target: file.pick_parsed::<TargetColumn>(args.target_col, "target-col")?.unwrap_or_default(),
            header: file.pick_parsed::<HeaderMode>(args.header, "header")?.unwrap_or_default(),
        },
        k,
        members,
        seed: file.pick(args.seed, "seed")?.unwrap_or(DEFAULT_SEED),
        normalize: file.pick_parsed::<NormalizeMode>(args.normalize, "normalize")?.unwrap_or_default(),
        tree,
        dws_threshold: if file.pick_flag(args.dws_literal_threshold, "dws-literal-threshold")? {
            DwsThreshold::Literal
        } else {
            DwsThreshold::Midpoint
        },
    })
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let a = part.parse::<Algorithm>().map_err(|e| usage(format!("invalid value for --algo: {e}")))?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(usage("invalid value for --algo: no algorithm given"));
    }
    Ok(out)
}

/// Assembles the benchmark configuration from flags and the config file.
pub fn bench_config(args: BenchArgs) -> Result<RunConfig, CliError> {
    let mut allowed = vec!["data", "algo", "measures", "folds", "reps", "jobs", "out", "scale"];
    allowed.extend(MODEL_KEYS);
    let file = ConfigFile::load(args.model.config.as_deref(), &allowed)?;

    let datasets = if args.data.is_empty() {
        file.list("data").into_iter().map(PathBuf::from).collect()
    } else {
        args.data
    };
    if datasets.is_empty() {
        return Err(usage("missing --data"));
    }
    let algorithms = match file.pick::<String>(args.algo, "algo")? {
        Some(s) => parse_algorithms(&s)?,
        None => Algorithm::ALL.to_vec(),
    };
    let measures = match file.pick::<String>(args.measures, "measures")? {
        Some(s) => Measure::parse_list(&s).map_err(|e| usage(format!("invalid value for --measures: {e}")))?,
        None => Measure::ALL.to_vec(),
    };
    let folds = file.pick(args.folds, "folds")?;
    let reps = file.pick(args.reps, "reps")?;
    let jobs = file.pick(args.jobs, "jobs")?;
    let out_dir = file.pick(args.out, "out")?;
    let scale = file.pick_parsed::<Scale>(args.scale, "scale")?;
    let model = resolve_model(args.model, &file)?;

    let defaults = RunConfig::default();
    let config = RunConfig {
        datasets,
        csv: model.csv,
        algorithms,
        measures,
        k: model.k,
        n_members: model.members,
        folds: folds.unwrap_or(defaults.folds),
        replications: reps.unwrap_or(defaults.replications),
        seed: model.seed,
        tree: model.tree,
        normalize: model.normalize,
        dws_threshold: model.dws_threshold,
        scale: scale.unwrap_or(defaults.scale),
        jobs,
        out_dir: out_dir.unwrap_or(defaults.out_dir),
    };
    config.validate()?;
    Ok(config)
}

pub fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let config = bench_config(args)?;
    let result = run_bench(&config)?;
    write_outputs(&result, &config.out_dir, config.scale)?;
    print!("{}", render_tables(&result, config.scale));
    eprintln!("wrote results to {}", config.out_dir.display());
    Ok(())
}

/// Training data plus the normalization that was applied to it.
struct Prepared {
    train: Dataset,
    params: Option<NormalizationParams>,
}

fn prepare(train: &Dataset, mode: NormalizeMode) -> Prepared {
    match mode {
        NormalizeMode::None => Prepared {
            train: train.clone(),
            params: None,
        },
        // a single training set: fitting globally or per fold is the same
        NormalizeMode::Global | NormalizeMode::Fold => {
            let params = NormalizationParams::fit(train);
            Prepared {
                train: params.apply(train).expect("fitted on the same data"),
                params: Some(params),
            }
        }
    }
}

fn load_queries(path: &Path, header: HeaderMode, n_features: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let rows = load_feature_rows(path, header)?;
    if let Some(r) = rows.first().filter(|r| r.len() != n_features) {
        return Err(usage(format!(
            "dimension mismatch: training data has {n_features} features but {} has {} columns",
            path.display(),
            r.len()
        )));
    }
    Ok(rows)
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Failure(format!("cannot write to stdout: {e}"))),
    }
}

fn join<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

pub fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let mut allowed = vec!["train", "query", "algo", "measure", "out"];
    allowed.extend(MODEL_KEYS);
    let file = ConfigFile::load(args.model.config.as_deref(), &allowed)?;
    let train_path: PathBuf = file.pick(args.train, "train")?.ok_or_else(|| usage("missing --train"))?;
    let query_path: PathBuf = file.pick(args.query, "query")?.ok_or_else(|| usage("missing --query"))?;
    let algorithm = file
        .pick_parsed::<Algorithm>(args.algo, "algo")?
        .unwrap_or(Algorithm::Ds);
    let measure = file
        .pick_parsed::<Measure>(args.measure, "measure")?
        .unwrap_or(Measure::M3);
    let out = file.pick(args.out, "out")?;
    let model = resolve_model(args.model, &file)?;
    if algorithm.is_dynamic() && measure == Measure::M1 && model.k < 2 {
        return Err(usage("invalid value for --k: m1 needs at least 2 neighbors"));
    }

    let raw = load_csv(&train_path, &model.csv)?;
    if model.k > raw.n_instances() {
        return Err(usage(format!(
            "invalid value for --k: {} exceeds the {} training instances",
            model.k,
            raw.n_instances()
        )));
    }
    let queries = load_queries(&query_path, model.csv.header, raw.n_features())?;
    let prep = prepare(&raw, model.normalize);
    let ensemble = generate_ensemble(&prep.train, model.members, &model.tree, model.seed)?;
    let individual = fit_individual(&prep.train, &model.tree)?;
    let builder = RegionBuilder::new(&prep.train, &ensemble)?;

    let mut body = String::from("row,prediction,winner,survivors,alphas\n");
    for (i, q) in queries.iter().enumerate() {
        let x = match &prep.params {
            Some(p) => p.apply_features(q)?,
            None => q.clone(),
        };
        let preds = ensemble.predict_all(&x)?;
        let (value, winner, weights): (f64, Option<usize>, Option<MemberWeights>) = match algorithm {
            Algorithm::Mean => (static_mean(&preds), None, None),
            Algorithm::Median => (static_median(&preds), None, None),
            Algorithm::Single => (individual.evaluate(&x), None, None),
            dynamic => {
                let region = builder.build(&x, model.k)?;
                let scores = score_all(measure, &region, &preds)?;
                match dynamic {
                    Algorithm::Ds => {
                        let (v, w) = ds_predict(&scores, &preds);
                        (v, Some(w), None)
                    }
                    Algorithm::Dw => {
                        let w = dw_weights(&scores);
                        (dw_predict(&w, &preds), None, Some(w))
                    }
                    _ => {
                        let (v, w) = dws_predict(&scores, &preds, model.dws_threshold);
                        (v, None, Some(w))
                    }
                }
            }
        };
        let value = prep.params.as_ref().map_or(value, |p| p.denormalize_target(value));
        let (survivors, alphas) = weights.map_or((String::new(), String::new()), |w| {
            let s: Vec<usize> = w.survivors().collect();
            (join(&s), join(s.iter().map(|&j| w.alpha[j])))
        });
        writeln!(
            body,
            "{i},{value},{},{survivors},{alphas}",
            winner.map_or(String::new(), |w| w.to_string())
        )
        .unwrap();
    }
    write_or_print(out.as_deref(), &body)
}

pub fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let mut allowed = vec!["data", "query", "row", "out"];
    allowed.extend(MODEL_KEYS);
    let file = ConfigFile::load(args.model.config.as_deref(), &allowed)?;
    let data_path: PathBuf = file.pick(args.data, "data")?.ok_or_else(|| usage("missing --data"))?;
    let query_path: Option<PathBuf> = file.pick(args.query, "query")?;
    let row: usize = file.pick(args.row, "row")?.ok_or_else(|| usage("missing --row"))?;
    let out: Option<PathBuf> = file.pick(args.out, "out")?;
    let model = resolve_model(args.model, &file)?;

    let raw = load_csv(&data_path, &model.csv)?;
    // (reference dataset, query features, map from reference row to data row)
    let (reference, query, original_index): (Dataset, Vec<f64>, Vec<usize>) = match &query_path {
        Some(qp) => {
            let queries = load_queries(qp, model.csv.header, raw.n_features())?;
            let q = queries
                .get(row)
                .ok_or_else(|| usage(format!("invalid value for --row: {row} out of range for {} query rows", queries.len())))?;
            (raw.clone(), q.clone(), (0..raw.n_instances()).collect())
        }
        None => {
            if row >= raw.n_instances() {
                return Err(usage(format!(
                    "invalid value for --row: {row} out of range for {} rows",
                    raw.n_instances()
                )));
            }
            let keep: Vec<usize> = (0..raw.n_instances()).filter(|&i| i != row).collect();
            (raw.select(&keep)?, raw.row(row).to_vec(), keep)
        }
    };
    if model.k > reference.n_instances() {
        return Err(usage(format!(
            "invalid value for --k: {} exceeds the {} reference instances",
            model.k,
            reference.n_instances()
        )));
    }

    let prep = prepare(&reference, model.normalize);
    let x = match &prep.params {
        Some(p) => p.apply_features(&query)?,
        None => query,
    };
    let ensemble = generate_ensemble(&prep.train, model.members, &model.tree, model.seed)?;
    let region = RegionBuilder::new(&prep.train, &ensemble)?.build(&x, model.k)?;
    let preds = ensemble.predict_all(&x)?;

    let mut region_csv = String::from("rank,neighbor,distance,d_k,observed\n");
    for k in 0..region.k() {
        writeln!(
            region_csv,
            "{},{},{},{},{}",
            k + 1,
            original_index[region.neighbor_indices()[k]],
            region.distances()[k],
            region.d_weights()[k],
            region.observed()[k]
        )
        .unwrap();
    }
    let mut scores_csv = String::from("member,query_prediction");
    for m in Measure::ALL {
        write!(scores_csv, ",{m}").unwrap();
    }
    scores_csv.push('\n');
    for (n, &q) in preds.iter().enumerate() {
        write!(scores_csv, "{n},{q}").unwrap();
        for m in Measure::ALL {
            // m1 is undefined for a single neighbor
            match score_member(m, &region, n, q) {
                Ok(s) => write!(scores_csv, ",{s}").unwrap(),
                Err(_) => scores_csv.push(','),
            }
        }
        scores_csv.push('\n');
    }

    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(|e| CliError::Failure(format!("cannot create {}: {e}", dir.display())))?;
            write_or_print(Some(&dir.join("region.csv")), &region_csv)?;
            write_or_print(Some(&dir.join("scores.csv")), &scores_csv)
        }
        None => write_or_print(None, &format!("{region_csv}\n{scores_csv}")),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Bench(a) => cmd_bench(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench_args(argv: &[&str]) -> BenchArgs {
        let mut full = vec!["drs", "bench"];
        full.extend(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Bench(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn bench_flags_resolve() {
        let cfg = bench_config(bench_args(&[
            "--data", "a.csv", "--data", "b.csv", "--algo", "dw,ds", "--measures", "m1..m8", "--k", "7",
            "--members", "20", "--reps", "2", "--seed", "9", "--normalize", "fold", "--scale", "raw",
        ]))
        .unwrap();
        assert_eq!(cfg.datasets.len(), 2);
        assert_eq!(cfg.algorithms, vec![Algorithm::Dw, Algorithm::Ds]);
        assert_eq!(cfg.measures.len(), 8);
        assert_eq!((cfg.k, cfg.n_members, cfg.replications, cfg.seed), (7, 20, 2, 9));
        assert_eq!(cfg.normalize, NormalizeMode::Fold);
        assert_eq!(cfg.scale, Scale::Raw);
        assert_eq!(cfg.folds, 10);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for argv in [
            &["--data", "a.csv", "--k", "0"][..],
            &["--data", "a.csv", "--algo", "oracle"],
            &["--data", "a.csv", "--measures", "m9"],
            &["--data", "a.csv", "--folds", "1"],
            &["--data", "a.csv", "--min-parent", "1"],
            &["--k", "3"],
        ] {
            let err = bench_config(bench_args(argv)).unwrap_err();
            assert_eq!(err.exit_code(), EXIT_USAGE, "{argv:?}: {err}");
        }
        let err = bench_config(bench_args(&["--data", "a.csv", "--k", "0"])).unwrap_err();
        assert!(err.to_string().contains("--k"));
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# experiment\ndata=x.csv,y.csv\nk=4\nmembers=12\nmeasures=m2,m3\nseed=5\n").unwrap();
        let cfg = bench_config(bench_args(&["--config", path.to_str().unwrap(), "--k", "6"])).unwrap();
        assert_eq!(cfg.datasets, vec![PathBuf::from("x.csv"), PathBuf::from("y.csv")]);
        assert_eq!(cfg.k, 6);
        assert_eq!(cfg.n_members, 12);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.measures, vec![Measure::M2, Measure::M3]);

        fs::write(&path, "bogus=1\n").unwrap();
        let err = bench_config(bench_args(&["--config", path.to_str().unwrap(), "--data", "a.csv"])).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn unknown_flag_rejected() {
        assert_eq!(run(["drs", "bench", "--data", "a.csv", "--frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["drs"]), EXIT_USAGE);
    }

    #[test]
    fn missing_dataset_is_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let code = run([
            "drs", "bench", "--data", "/no/such/file.csv", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_IO);
    }
}
