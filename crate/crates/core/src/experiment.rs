//! Orchestration of the three-way comparisons (DRIFT vs PCA vs full pixels):
//! single runs, sweep grids with full-model deduplication, generalization-gap
//! statistics, and the CSV output format.

use crate::dataset::{self, Dataset};
use crate::error::{Error, ParseKind, Result};
use crate::mlp::{self, EpochMetrics, TrainConfig};
use crate::modal::{build_basis, ModalBasis};
use crate::scalar::Scalar;
use crate::transform::{
    drift_transform, full_transform, pca_fit, standardizer_fit, ChannelPolicy, FeatureMatrix,
    PcaModel, Standardizer,
};
use ndarray::Array2;
use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetKind {
    Mnist,
    Cifar100,
}

impl DatasetKind {
    /// Default epoch counts for desk-scale runs.
    pub fn default_epochs(&self) -> usize {
        match self {
            DatasetKind::Mnist => 30,
            DatasetKind::Cifar100 => 50,
        }
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "cifar100" => Ok(DatasetKind::Cifar100),
            other => Err(Error::invalid(format!(
                "unknown dataset `{other}` (expected mnist or cifar100)"
            ))),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Cifar100 => "cifar100",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Drift,
    Pca,
    Full,
}

pub const ALL_METHODS: [Method; 3] = [Method::Drift, Method::Pca, Method::Full];

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drift" => Ok(Method::Drift),
            "pca" => Ok(Method::Pca),
            "full" => Ok(Method::Full),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected drift, pca, or full)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Drift => "drift",
            Method::Pca => "pca",
            Method::Full => "full",
        })
    }
}

/// Everything that defines one run. `modes` is ignored by the full method;
/// `standardize` applies to drift/pca features only (the full baseline trains
/// on raw `[0, 1]` pixels either way).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub method: Method,
    pub modes: usize,
    pub channel_policy: ChannelPolicy,
    pub resize: Option<(usize, usize)>,
    pub hidden_layers: Vec<usize>,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub subsample_per_class: Option<usize>,
    pub standardize: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.method != Method::Full && self.modes == 0 {
            return Err(Error::invalid("config: modes must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("config: batch_size must be at least 1"));
        }
        if let Some((w, h)) = self.resize {
            if w == 0 || h == 0 {
                return Err(Error::invalid("config: resize dimensions must be positive"));
            }
        }
        if let Some(k) = self.subsample_per_class {
            if k == 0 {
                return Err(Error::invalid("config: subsample must be at least 1"));
            }
        }
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return Err(Error::invalid("config: hidden layer sizes must be positive"));
        }
        Ok(())
    }
}

/// `hidden` column encoding: dash-joined sizes, e.g. `64-128-64`.
pub fn hidden_string(hidden: &[usize]) -> String {
    hidden
        .iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// The feature-extraction half of a run, fitted on the training split only.
///
/// Holding the fitted pieces separately makes the no-leakage property
/// checkable: fitting against different test splits must produce identical
/// parameters here.
#[derive(Debug, Clone)]
pub struct FittedPipeline<T: Scalar> {
    method: Method,
    policy: ChannelPolicy,
    basis: Option<ModalBasis<T>>,
    pca: Option<PcaModel<T>>,
    standardizer: Option<Standardizer<T>>,
    feature_dim: usize,
}

impl<T: Scalar> FittedPipeline<T> {
    /// Fit the transform for `cfg.method` on the training split.
    pub fn fit(cfg: &ExperimentConfig, train: &Dataset<T>) -> Result<Self> {
        cfg.validate()?;
        let (basis, pca, feature_dim) = match cfg.method {
            Method::Drift => {
                let basis = build_basis::<T>(cfg.modes, train.width(), train.height())?;
                let dim = cfg.channel_policy.feature_dim(train.channels(), cfg.modes);
                (Some(basis), None, dim)
            }
            Method::Pca => {
                let pixels = full_transform(train);
                let limit = pixels.nrows().min(pixels.ncols());
                if cfg.modes > limit {
                    return Err(Error::invalid(format!(
                        "pca: k = {} exceeds min(samples, dimension) = {limit}",
                        cfg.modes
                    )));
                }
                let model = pca_fit(&pixels, cfg.modes)?;
                (None, Some(model), cfg.modes)
            }
            Method::Full => (None, None, train.feature_len()),
        };
        let mut pipeline = FittedPipeline {
            method: cfg.method,
            policy: cfg.channel_policy,
            basis,
            pca,
            standardizer: None,
            feature_dim,
        };
        if cfg.standardize && cfg.method != Method::Full {
            let train_feats = pipeline.transform_unstandardized(train)?;
            pipeline.standardizer = Some(standardizer_fit(&train_feats)?);
        }
        Ok(pipeline)
    }

    fn transform_unstandardized(&self, ds: &Dataset<T>) -> Result<FeatureMatrix<T>> {
        match self.method {
            Method::Drift => drift_transform(ds, self.basis.as_ref().unwrap(), self.policy),
            Method::Pca => self.pca.as_ref().unwrap().transform(&full_transform(ds)),
            Method::Full => Ok(full_transform(ds)),
        }
    }

    /// Apply the fitted transform (plus standardization, when fitted) to any
    /// split.
    pub fn transform(&self, ds: &Dataset<T>) -> Result<FeatureMatrix<T>> {
        let feats = self.transform_unstandardized(ds)?;
        match &self.standardizer {
            Some(s) => s.apply(&feats),
            None => Ok(feats),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn basis(&self) -> Option<&ModalBasis<T>> {
        self.basis.as_ref()
    }

    pub fn pca(&self) -> Option<&PcaModel<T>> {
        self.pca.as_ref()
    }

    pub fn standardizer(&self) -> Option<&Standardizer<T>> {
        self.standardizer.as_ref()
    }
}

/// One executed run: its config, per-epoch metrics, wall time, and the
/// feature dimensionality that was fed to the classifier.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub metrics: Vec<EpochMetrics>,
    pub wall_time_s: f64,
    pub feature_dim: usize,
}

/// Run the full pipeline on already-loaded splits:
/// resize -> subsample -> fit features on train -> transform both ->
/// train the classifier. PCA and standardization never see the test split.
pub fn run_experiment_on<T: Scalar>(
    cfg: &ExperimentConfig,
    train: &Dataset<T>,
    test: &Dataset<T>,
) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();

    // Subsampling selects rows independently of pixel content and resizing is
    // per-image, so the two commute exactly; subsampling first avoids
    // resizing images that are about to be dropped.
    let (mut train_ds, mut test_ds) = (None, None);
    if let Some(per_class) = cfg.subsample_per_class {
        // Train is strict; the held-out split caps at whatever each class has.
        train_ds = Some(dataset::subsample(train, per_class, cfg.seed)?);
        test_ds = Some(dataset::subsample_capped(test, per_class, cfg.seed)?);
    }
    if let Some((w, h)) = cfg.resize {
        train_ds = Some(dataset::resize_bilinear(
            train_ds.as_ref().unwrap_or(train),
            w,
            h,
        )?);
        test_ds = Some(dataset::resize_bilinear(
            test_ds.as_ref().unwrap_or(test),
            w,
            h,
        )?);
    }
    let train = train_ds.as_ref().unwrap_or(train);
    let test = test_ds.as_ref().unwrap_or(test);

    let pipeline = FittedPipeline::fit(cfg, train)?;
    let train_feats = pipeline.transform(train)?;
    let test_feats = pipeline.transform(test)?;

    let mut layer_sizes = Vec::with_capacity(cfg.hidden_layers.len() + 2);
    layer_sizes.push(pipeline.feature_dim());
    layer_sizes.extend_from_slice(&cfg.hidden_layers);
    layer_sizes.push(train.num_classes());

    let mut model = mlp::init_model::<T>(&layer_sizes, cfg.seed)?;
    let train_cfg = TrainConfig {
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        seed: cfg.seed,
        ..TrainConfig::default()
    };
    let metrics = mlp::train(
        &mut model,
        &train_feats,
        train.labels(),
        &test_feats,
        test.labels(),
        &train_cfg,
    )?;

    Ok(RunRecord {
        config: cfg.clone(),
        metrics,
        wall_time_s: started.elapsed().as_secs_f64(),
        feature_dim: pipeline.feature_dim(),
    })
}

/// Load the standard-named splits for `kind` under `data_dir`.
pub fn load_splits<T: Scalar>(
    kind: DatasetKind,
    data_dir: &Path,
) -> Result<(Dataset<T>, Dataset<T>)> {
    match kind {
        DatasetKind::Mnist => dataset::load_mnist_dir(data_dir),
        DatasetKind::Cifar100 => dataset::load_cifar100_dir(data_dir),
    }
}

/// Load data per the config and run. Fails fast (before training) on missing
/// files or invalid configuration.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig, data_dir: &Path) -> Result<RunRecord> {
    cfg.validate()?;
    let (train, test) = load_splits::<T>(cfg.dataset, data_dir)?;
    run_experiment_on(cfg, &train, &test)
}

/// One axis of a sweep grid: a config field and the values to try.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Modes(Vec<usize>),
    BatchSize(Vec<usize>),
    Resize(Vec<Option<(usize, usize)>>),
    HiddenLayers(Vec<Vec<usize>>),
    Epochs(Vec<usize>),
    Seed(Vec<u64>),
}

impl SweepAxis {
    /// Parse an axis from a field name and comma-separated values.
    ///
    /// Value syntax: integers for `modes` / `batch_size` / `epochs` / `seed`;
    /// `WxH` or `none` for `resize`; dash-joined sizes for `hidden_layers`
    /// (e.g. `64-128-64`). Unknown field names are rejected.
    pub fn parse(key: &str, values: &str) -> Result<SweepAxis> {
        fn ints<N: FromStr>(values: &str, key: &str) -> Result<Vec<N>> {
            values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<N>()
                        .map_err(|_| Error::invalid(format!("sweep {key}: bad value `{v}`")))
                })
                .collect()
        }
        match key {
            "modes" => Ok(SweepAxis::Modes(ints(values, key)?)),
            "batch_size" => Ok(SweepAxis::BatchSize(ints(values, key)?)),
            "epochs" => Ok(SweepAxis::Epochs(ints(values, key)?)),
            "seed" => Ok(SweepAxis::Seed(ints(values, key)?)),
            "resize" => values
                .split(',')
                .map(|v| {
                    let v = v.trim();
                    if v == "none" {
                        Ok(None)
                    } else {
                        parse_resize(v).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(SweepAxis::Resize),
            "hidden_layers" => values
                .split(',')
                .map(|v| {
                    v.trim()
                        .split('-')
                        .map(|h| {
                            h.parse::<usize>().map_err(|_| {
                                Error::invalid(format!("sweep hidden_layers: bad size `{h}`"))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()
                })
                .collect::<Result<Vec<_>>>()
                .map(SweepAxis::HiddenLayers),
            other => Err(Error::invalid(format!("unknown sweep key `{other}`"))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SweepAxis::Modes(_) => "modes",
            SweepAxis::BatchSize(_) => "batch_size",
            SweepAxis::Resize(_) => "resize",
            SweepAxis::HiddenLayers(_) => "hidden_layers",
            SweepAxis::Epochs(_) => "epochs",
            SweepAxis::Seed(_) => "seed",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepAxis::Modes(v) => v.len(),
            SweepAxis::BatchSize(v) => v.len(),
            SweepAxis::Resize(v) => v.len(),
            SweepAxis::HiddenLayers(v) => v.len(),
            SweepAxis::Epochs(v) => v.len(),
            SweepAxis::Seed(v) => v.len(),
        }
    }

    fn apply(&self, idx: usize, cfg: &mut ExperimentConfig) -> String {
        match self {
            SweepAxis::Modes(v) => {
                cfg.modes = v[idx];
                v[idx].to_string()
            }
            SweepAxis::BatchSize(v) => {
                cfg.batch_size = v[idx];
                v[idx].to_string()
            }
            SweepAxis::Resize(v) => {
                cfg.resize = v[idx];
                match v[idx] {
                    Some((w, h)) => format!("{w}x{h}"),
                    None => "none".to_string(),
                }
            }
            SweepAxis::HiddenLayers(v) => {
                cfg.hidden_layers = v[idx].clone();
                hidden_string(&v[idx])
            }
            SweepAxis::Epochs(v) => {
                cfg.epochs = v[idx];
                v[idx].to_string()
            }
            SweepAxis::Seed(v) => {
                cfg.seed = v[idx];
                v[idx].to_string()
            }
        }
    }
}

/// `WxH`, e.g. `80x80`.
pub fn parse_resize(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::invalid(format!("bad resize `{s}` (expected WxH)")))?;
    let w = w
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("bad resize width `{w}`")))?;
    let h = h
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("bad resize height `{h}`")))?;
    if w == 0 || h == 0 {
        return Err(Error::invalid("resize dimensions must be positive"));
    }
    Ok((w, h))
}

/// One grid cell: the config it was asked to run and what happened.
#[derive(Debug)]
pub struct GridRun {
    pub config: ExperimentConfig,
    pub outcome: Result<RunRecord>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Record seed: the configured base seed plus a stable hash of the swept
/// values that actually affect the method. `modes` does not affect the full
/// baseline, so full records across a modes sweep share one seed (and one
/// training — see the dedup in [`run_grid_on`]). A swept `seed` axis replaces
/// the base instead of being hashed.
fn derive_seed(base: u64, hashed_parts: &[(&'static str, String)]) -> u64 {
    if hashed_parts.is_empty() {
        return base;
    }
    let desc = hashed_parts
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";");
    base.wrapping_add(fnv1a64(desc.as_bytes()))
}

/// Canonical description of what a run computes, with method-irrelevant
/// fields normalized out; identical descriptors get one training.
fn effective_descriptor(cfg: &ExperimentConfig) -> String {
    let modes = if cfg.method == Method::Full { 0 } else { cfg.modes };
    let policy = if cfg.method == Method::Drift {
        cfg.channel_policy.to_string()
    } else {
        "-".to_string()
    };
    format!(
        "{}|{}|{}|{}|{:?}|{}|{}|{}|{}|{:?}|{}",
        cfg.dataset,
        cfg.method,
        modes,
        policy,
        cfg.resize,
        hidden_string(&cfg.hidden_layers),
        cfg.batch_size,
        cfg.epochs,
        cfg.seed,
        cfg.subsample_per_class,
        cfg.standardize,
    )
}

/// Cartesian product of the sweep axes, crossed with all three methods, on
/// already-loaded splits. Runs execute in deterministic order (axes vary
/// slowest-first, methods drift/pca/full innermost); failures are recorded
/// per cell without aborting the grid.
pub fn run_grid_on<T: Scalar>(
    base: &ExperimentConfig,
    sweep: &[SweepAxis],
    train: &Dataset<T>,
    test: &Dataset<T>,
) -> Vec<GridRun> {
    let mut runs = Vec::new();
    let mut done: HashMap<String, RunRecord> = HashMap::new();
    let total: usize = sweep.iter().map(SweepAxis::len).product();
    if total == 0 {
        return runs;
    }

    for combo in 0..total {
        let mut cfg = base.clone();
        let mut applied: Vec<(&'static str, String)> = Vec::new();
        let mut rest = combo;
        for axis in sweep.iter().rev() {
            let idx = rest % axis.len();
            rest /= axis.len();
            let shown = axis.apply(idx, &mut cfg);
            applied.push((axis.name(), shown));
        }
        applied.reverse();
        let seed_base = cfg.seed;
        for method in ALL_METHODS {
            let mut run_cfg = cfg.clone();
            run_cfg.method = method;
            let hashed: Vec<(&'static str, String)> = applied
                .iter()
                .filter(|(k, _)| *k != "seed" && !(*k == "modes" && method == Method::Full))
                .cloned()
                .collect();
            run_cfg.seed = derive_seed(seed_base, &hashed);

            let key = effective_descriptor(&run_cfg);
            let outcome = if let Some(existing) = done.get(&key) {
                Ok(RunRecord {
                    config: run_cfg.clone(),
                    ..existing.clone()
                })
            } else {
                let result = run_experiment_on(&run_cfg, train, test);
                if let Ok(rec) = &result {
                    done.insert(key, rec.clone());
                }
                result
            };
            runs.push(GridRun {
                config: run_cfg,
                outcome,
            });
        }
    }
    runs
}

/// Load data once and run the grid. See [`run_grid_on`].
pub fn run_grid<T: Scalar>(
    base: &ExperimentConfig,
    sweep: &[SweepAxis],
    data_dir: &Path,
) -> Result<Vec<GridRun>> {
    let (train, test) = load_splits::<T>(base.dataset, data_dir)?;
    Ok(run_grid_on(base, sweep, &train, &test))
}

/// Generalization-gap statistics of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStats {
    /// Final train accuracy minus final test accuracy.
    pub final_gap: f64,
    /// Final test loss minus final train loss.
    pub loss_gap: f64,
    /// Population standard deviation of the first differences of test loss
    /// over the last half of the epochs; lower is smoother.
    pub stability: f64,
}

/// Compute [`GapStats`] from per-epoch metrics.
pub fn gap_stats(metrics: &[EpochMetrics]) -> Result<GapStats> {
    let last = metrics
        .last()
        .ok_or_else(|| Error::invalid("gap_stats: empty metrics"))?;
    let tail = &metrics[metrics.len() / 2..];
    let diffs: Vec<f64> = tail
        .windows(2)
        .map(|w| w[1].test_loss - w[0].test_loss)
        .collect();
    let stability = if diffs.is_empty() {
        0.0
    } else {
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        (diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64).sqrt()
    };
    Ok(GapStats {
        final_gap: last.train_acc - last.test_acc,
        loss_gap: last.test_loss - last.train_loss,
        stability,
    })
}

/// Format with `digits` significant digits, plain decimal notation in the
/// usual range and scientific outside it (the conventional `%g` behavior).
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let epos = sci.find('e').expect("exponent marker");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent parses");
    if exp >= -4 && exp < digits as i32 {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_trailing_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_trailing_zeros(&sci[..epos]))
    }
}

fn trim_trailing_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "run_id,dataset,method,modes,feature_dim,batch_size,hidden,seed,\
                              epoch,train_loss,train_acc,test_loss,test_acc";

/// Write one CSV row per (run, epoch). Floats carry 6 significant digits; the
/// header is always present, so zero records produce a header-only file.
pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{CSV_HEADER}").map_err(io)?;
    for (run_id, rec) in records.iter().enumerate() {
        let cfg = &rec.config;
        for m in &rec.metrics {
            writeln!(
                w,
                "{run_id},{},{},{},{},{},{},{},{},{},{},{},{}",
                cfg.dataset,
                cfg.method,
                cfg.modes,
                rec.feature_dim,
                cfg.batch_size,
                hidden_string(&cfg.hidden_layers),
                cfg.seed,
                m.epoch,
                format_significant(m.train_loss, 6),
                format_significant(m.train_acc, 6),
                format_significant(m.test_loss, 6),
                format_significant(m.test_acc, 6),
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// One parsed CSV row (see [`CSV_HEADER`]).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub run_id: usize,
    pub dataset: String,
    pub method: String,
    pub modes: usize,
    pub feature_dim: usize,
    pub batch_size: usize,
    pub hidden: String,
    pub seed: u64,
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: f64,
    pub test_acc: f64,
}

impl CsvRow {
    pub fn metrics(&self) -> EpochMetrics {
        EpochMetrics {
            epoch: self.epoch,
            train_loss: self.train_loss,
            train_acc: self.train_acc,
            test_loss: self.test_loss,
            test_acc: self.test_acc,
        }
    }
}

/// Parse a metrics CSV back into rows. Errors name the 1-based line number.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: String| {
        Error::parse(path, ParseKind::BadValue(format!("line {line}: {msg}")))
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(bad(1, format!("unexpected header `{header}`")));
        }
        None => return Err(bad(1, "empty file".to_string())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(bad(lineno, format!("expected 13 fields, found {}", fields.len())));
        }
        fn field<F: FromStr>(value: &str, what: &str, lineno: usize, path: &Path) -> Result<F> {
            value.parse::<F>().map_err(|_| {
                Error::parse(
                    path,
                    ParseKind::BadValue(format!("line {lineno}: bad {what} `{value}`")),
                )
            })
        }
        rows.push(CsvRow {
            run_id: field(fields[0], "run_id", lineno, path)?,
            dataset: fields[1].to_string(),
            method: fields[2].to_string(),
            modes: field(fields[3], "modes", lineno, path)?,
            feature_dim: field(fields[4], "feature_dim", lineno, path)?,
            batch_size: field(fields[5], "batch_size", lineno, path)?,
            hidden: fields[6].to_string(),
            seed: field(fields[7], "seed", lineno, path)?,
            epoch: field(fields[8], "epoch", lineno, path)?,
            train_loss: field(fields[9], "train_loss", lineno, path)?,
            train_acc: field(fields[10], "train_acc", lineno, path)?,
            test_loss: field(fields[11], "test_loss", lineno, path)?,
            test_acc: field(fields[12], "test_acc", lineno, path)?,
        });
    }
    Ok(rows)
}

/// Plain-text per-run summary of final metrics and gap statistics.
pub fn summarize_records(records: &[RunRecord]) -> String {
    let mut out = String::new();
    out.push_str(
        "run_id  dataset   method  modes  feat  batch  hidden      seed                  \
         final_train_acc  final_test_acc  final_gap  loss_gap  stability\n",
    );
    for (run_id, rec) in records.iter().enumerate() {
        let cfg = &rec.config;
        match gap_stats(&rec.metrics) {
            Ok(stats) => {
                let last = rec.metrics.last().unwrap();
                out.push_str(&format!(
                    "{run_id:<7} {:<9} {:<7} {:<6} {:<5} {:<6} {:<11} {:<21} {:<16} {:<15} {:<10} {:<9} {}\n",
                    cfg.dataset,
                    cfg.method,
                    cfg.modes,
                    rec.feature_dim,
                    cfg.batch_size,
                    hidden_string(&cfg.hidden_layers),
                    cfg.seed,
                    format_significant(last.train_acc, 6),
                    format_significant(last.test_acc, 6),
                    format_significant(stats.final_gap, 6),
                    format_significant(stats.loss_gap, 6),
                    format_significant(stats.stability, 6),
                ));
            }
            Err(_) => {
                out.push_str(&format!("{run_id:<7} (no epochs recorded)\n"));
            }
        }
    }
    out
}

/// `Array2` re-export point for downstream signatures.
pub type Matrix<T> = Array2<T>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_significant_covers_ranges() {
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(0.9, 6), "0.9");
        assert_eq!(format_significant(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_significant(123456789.0, 6), "1.23457e8");
        assert_eq!(format_significant(0.0001234567, 6), "0.000123457");
        assert_eq!(format_significant(0.00001234567, 6), "1.23457e-5");
        assert_eq!(format_significant(-2.5, 6), "-2.5");
        assert_eq!(format_significant(999999.9, 6), "1e6");
    }

    #[test]
    fn format_significant_is_idempotent_under_reparse() {
        for &x in &[
            0.0,
            0.9,
            1.0 / 3.0,
            2.0f64.sqrt(),
            123456789.0,
            0.0001234567,
            -3.25e-9,
            6.9314718e-1,
        ] {
            let s1 = format_significant(x, 6);
            let y: f64 = s1.parse().unwrap();
            let s2 = format_significant(y, 6);
            assert_eq!(s1, s2, "not idempotent for {x}");
        }
    }

    #[test]
    fn derive_seed_is_stable_and_respects_empty() {
        assert_eq!(derive_seed(42, &[]), 42);
        let parts = vec![("modes", "30".to_string())];
        let a = derive_seed(42, &parts);
        let b = derive_seed(42, &parts);
        assert_eq!(a, b);
        assert_ne!(a, 42);
        let other = vec![("modes", "50".to_string())];
        assert_ne!(derive_seed(42, &parts), derive_seed(42, &other));
    }

    #[test]
    fn gap_stats_matches_hand_computed_fixture() {
        // test_loss tail (last 3 of 6): [0.65, 0.60, 0.58]
        // diffs [-0.05, -0.02], population std = 0.015
        let losses = [1.00, 0.90, 0.70, 0.65, 0.60, 0.58];
        let metrics: Vec<EpochMetrics> = losses
            .iter()
            .enumerate()
            .map(|(i, &tl)| EpochMetrics {
                epoch: i + 1,
                train_loss: 0.40 - 0.01 * i as f64,
                train_acc: 0.80 + 0.02 * i as f64,
                test_loss: tl,
                test_acc: 0.70 + 0.01 * i as f64,
            })
            .collect();
        let stats = gap_stats(&metrics).unwrap();
        assert!((stats.final_gap - (0.90 - 0.75)).abs() < 1e-12);
        assert!((stats.loss_gap - (0.58 - 0.35)).abs() < 1e-12);
        assert!((stats.stability - 0.015).abs() < 1e-12);
    }

    #[test]
    fn gap_stats_trivial_cases() {
        let flat: Vec<EpochMetrics> = (1..=4)
            .map(|epoch| EpochMetrics {
                epoch,
                train_loss: 0.5,
                train_acc: 0.9,
                test_loss: 0.5,
                test_acc: 0.9,
            })
            .collect();
        let stats = gap_stats(&flat).unwrap();
        assert_eq!(stats.final_gap, 0.0);
        assert_eq!(stats.loss_gap, 0.0);
        assert_eq!(stats.stability, 0.0);
        assert!(gap_stats(&[]).is_err());
        let single = &flat[..1];
        assert_eq!(gap_stats(single).unwrap().stability, 0.0);
    }

    #[test]
    fn sweep_axis_parse_rejects_unknown_keys() {
        assert!(SweepAxis::parse("modes", "20,30,50").is_ok());
        assert!(SweepAxis::parse("resize", "none,80x80").is_ok());
        assert!(SweepAxis::parse("hidden_layers", "64-128-64,64").is_ok());
        let err = SweepAxis::parse("momentum", "0.9").unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
