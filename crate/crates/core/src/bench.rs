//! Repeated-trial studies comparing MSI trees with the greedy baseline.
//!
//! Every study is a pure function of its configuration: per-trial seeds
//! are derived from a base seed and trial coordinates, trials run in
//! parallel, and rows are collected in trial order so reports are
//! byte-identical across runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::{build_greedy_tree, GreedyConfig};
use crate::complexity::{CombinerKind, CompressorKind};
use crate::data::{
    load_csv, make_blobs, make_error_point_dataset, train_test_split, Dataset, LabelColumn,
    SplitRatio,
};
use crate::error::{Error, Result};
use crate::msi::{build_tree, MsiConfig};
use crate::tree::{NodeId, Tree};

pub const MSI: &str = "msi";
pub const GREEDY: &str = "greedy";

/// Candidate minimum leaf sizes searched when tuning the greedy baseline.
pub const MIN_LEAF_GRID: [usize; 6] = [1, 5, 10, 20, 26, 30];

const TUNING_STREAM: u64 = 0x7475_6e65;

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(base), |acc, &c| mix(acc ^ mix(c)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSweepConfig {
    pub std_start: f64,
    pub std_end: f64,
    pub std_step: f64,
    pub trials_per_std: usize,
    pub points_per_blob: usize,
    pub base_seed: u64,
}

impl Default for BlobSweepConfig {
    /// Desk scale: 9 standard deviations, 20 trials each.
    fn default() -> Self {
        BlobSweepConfig {
            std_start: 2.5,
            std_end: 4.5,
            std_step: 0.25,
            trials_per_std: 20,
            points_per_blob: 50,
            base_seed: 0,
        }
    }
}

impl BlobSweepConfig {
    /// 201 standard deviations, 100 trials each.
    pub fn full_scale() -> Self {
        BlobSweepConfig {
            std_step: 0.01,
            trials_per_std: 100,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.std_start, self.std_end, self.std_step]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.std_start <= 0.0 || self.std_start >= self.std_end {
            return Err(Error::InvalidConfig("need 0 < std_start < std_end".into()));
        }
        if self.std_step <= 0.0 {
            return Err(Error::InvalidConfig("std_step must be positive".into()));
        }
        if self.trials_per_std == 0 || self.points_per_blob == 0 {
            return Err(Error::InvalidConfig(
                "trials_per_std and points_per_blob must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The swept standard deviations, endpoints included.
    pub fn std_values(&self) -> Vec<f64> {
        let n = ((self.std_end - self.std_start) / self.std_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let v = self.std_start + i as f64 * self.std_step;
                (v * 1e9).round() / 1e9
            })
            .collect()
    }

    fn tasks(&self) -> Vec<BlobTask> {
        let mut out = Vec::new();
        for (si, std) in self.std_values().into_iter().enumerate() {
            for trial in 0..self.trials_per_std {
                out.push(BlobTask {
                    std,
                    trial,
                    seed: derive_seed(self.base_seed, &[si as u64, trial as u64]),
                });
            }
        }
        out
    }

    fn manifest(&self) -> Vec<(String, String)> {
        vec![
            ("std_start".into(), self.std_start.to_string()),
            ("std_end".into(), self.std_end.to_string()),
            ("std_step".into(), self.std_step.to_string()),
            ("trials_per_std".into(), self.trials_per_std.to_string()),
            ("points_per_blob".into(), self.points_per_blob.to_string()),
            ("base_seed".into(), self.base_seed.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct BlobTask {
    std: f64,
    trial: usize,
    seed: u64,
}

impl BlobTask {
    fn datasets(&self, points: usize) -> Result<(Dataset, Dataset)> {
        Ok((
            make_blobs(self.std, points, derive_seed(self.seed, &[0]))?,
            make_blobs(self.std, points, derive_seed(self.seed, &[1]))?,
        ))
    }
}

/// One tree trained and scored in one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub algorithm: String,
    pub variant: String,
    /// Study parameter, e.g. the blob standard deviation; 0 when unused.
    pub parameter: f64,
    pub trial: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub nodes: usize,
    pub internal_nodes: usize,
    pub depth: usize,
    pub root_feature: Option<usize>,
    pub root_threshold: Option<f64>,
}

impl TrialRow {
    fn new(
        algorithm: &str,
        variant: impl Into<String>,
        parameter: f64,
        trial: usize,
        seed: u64,
        tree: &Tree,
        test: &Dataset,
    ) -> Result<Self> {
        let root = tree.node(NodeId::ROOT).split();
        Ok(TrialRow {
            algorithm: algorithm.into(),
            variant: variant.into(),
            parameter,
            trial,
            seed,
            accuracy: tree.accuracy(test)?,
            nodes: tree.node_count(),
            internal_nodes: tree.internal_count(),
            depth: tree.max_depth(),
            root_feature: root.map(|s| s.feature),
            root_threshold: root.map(|s| s.threshold),
        })
    }
}

/// Statistics over the trials of one (algorithm, variant, parameter) group.
/// `parameter` is `"all"` for groups pooled over every parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub variant: String,
    pub parameter: String,
    pub trials: usize,
    pub mean_accuracy: f64,
    /// `mean_accuracy` minus the mean over all groups with this parameter.
    pub centered_accuracy: f64,
    pub mean_nodes: f64,
    pub std_nodes: f64,
    pub mean_depth: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Population standard deviation.
fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs.iter().copied());
    mean(xs.iter().map(|x| (x - m) * (x - m))).sqrt()
}

fn summarize(
    algorithm: &str,
    variant: &str,
    parameter: String,
    rows: &[&TrialRow],
) -> AggregateRow {
    let nodes: Vec<f64> = rows.iter().map(|r| r.nodes as f64).collect();
    AggregateRow {
        algorithm: algorithm.into(),
        variant: variant.into(),
        parameter,
        trials: rows.len(),
        mean_accuracy: mean(rows.iter().map(|r| r.accuracy)),
        centered_accuracy: 0.0,
        mean_nodes: mean(nodes.iter().copied()),
        std_nodes: std_dev(&nodes),
        mean_depth: mean(rows.iter().map(|r| r.depth as f64)),
    }
}

/// Aggregates trial rows per group in first-appearance order. With
/// `per_parameter`, one row per parameter value precedes the pooled rows.
pub fn aggregate(trials: &[TrialRow], per_parameter: bool) -> Vec<AggregateRow> {
    let mut groups: Vec<(&str, &str)> = Vec::new();
    let mut params: Vec<f64> = Vec::new();
    for t in trials {
        if !groups.contains(&(t.algorithm.as_str(), t.variant.as_str())) {
            groups.push((&t.algorithm, &t.variant));
        }
        if !params.contains(&t.parameter) {
            params.push(t.parameter);
        }
    }

    let mut out = Vec::new();
    let mut emit = |param: Option<f64>| {
        let start = out.len();
        for &(a, v) in &groups {
            let rows: Vec<&TrialRow> = trials
                .iter()
                .filter(|t| {
                    t.algorithm == a && t.variant == v && param.is_none_or(|p| t.parameter == p)
                })
                .collect();
            if !rows.is_empty() {
                let label = param.map_or_else(|| "all".to_string(), |p| p.to_string());
                out.push(summarize(a, v, label, &rows));
            }
        }
        let center = mean(out[start..].iter().map(|r| r.mean_accuracy));
        for r in &mut out[start..] {
            r.centered_accuracy = r.mean_accuracy - center;
        }
    };
    if per_parameter {
        for &p in &params {
            emit(Some(p));
        }
    }
    emit(None);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub study: String,
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    /// Configuration echoed as key/value pairs.
    pub manifest: Vec<(String, String)>,
}

impl ExperimentReport {
    fn new(
        study: &str,
        trials: Vec<TrialRow>,
        per_parameter: bool,
        manifest: Vec<(String, String)>,
    ) -> Self {
        let aggregates = aggregate(&trials, per_parameter);
        let mut m = vec![
            ("study".to_string(), study.to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ];
        m.extend(manifest);
        ExperimentReport {
            study: study.into(),
            trials,
            aggregates,
            manifest: m,
        }
    }

    /// The pooled aggregate of one algorithm/variant.
    pub fn overall(&self, algorithm: &str, variant: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|r| r.algorithm == algorithm && r.variant == variant && r.parameter == "all")
    }

    /// Pooled aggregates in order.
    pub fn overall_rows(&self) -> impl Iterator<Item = &AggregateRow> {
        self.aggregates.iter().filter(|r| r.parameter == "all")
    }

    pub fn trials_csv(&self) -> Result<String> {
        to_csv(&self.trials)
    }

    pub fn aggregates_csv(&self) -> Result<String> {
        to_csv(&self.aggregates)
    }

    pub fn manifest_text(&self) -> String {
        self.manifest
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Writes `<study>_trials.csv`, `<study>_aggregate.csv` and
    /// `<study>_manifest.txt` into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (format!("{}_trials.csv", self.study), self.trials_csv()?),
            (
                format!("{}_aggregate.csv", self.study),
                self.aggregates_csv()?,
            ),
            (format!("{}_manifest.txt", self.study), self.manifest_text()),
        ];
        let mut paths = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
            paths.push(p);
        }
        Ok(paths)
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn msi_variant(cfg: MsiConfig) -> String {
    format!("{}/{}", cfg.compressor, cfg.combiner)
}

fn greedy_variant(cfg: GreedyConfig) -> String {
    let mut s = format!(
        "min_split={},min_leaf={}",
        cfg.min_samples_split, cfg.min_samples_leaf
    );
    if let Some(d) = cfg.max_depth {
        s.push_str(&format!(",max_depth={d}"));
    }
    s
}

fn config_manifest(msi: Option<MsiConfig>, greedy: Option<GreedyConfig>) -> Vec<(String, String)> {
    let mut m = Vec::new();
    if let Some(c) = msi {
        m.push(("compressor".into(), c.compressor.to_string()));
        m.push(("combiner".into(), c.combiner.to_string()));
    }
    if let Some(g) = greedy {
        m.push(("greedy".into(), greedy_variant(g)));
    }
    m
}

fn flatten(rows: Result<Vec<Vec<TrialRow>>>) -> Result<Vec<TrialRow>> {
    Ok(rows?.into_iter().flatten().collect())
}

/// MSI and greedy trees on the error-point dataset, scored on training data.
pub fn run_error_point_study(
    seeds: &[u64],
    msi: MsiConfig,
    greedy: GreedyConfig,
) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one seed".into()));
    }
    let rows = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let d = make_error_point_dataset(seed);
            let (m, _) = build_tree(&d, msi)?;
            let g = build_greedy_tree(&d, greedy)?;
            Ok(vec![
                TrialRow::new(MSI, msi_variant(msi), 0.0, i, seed, &m, &d)?,
                TrialRow::new(GREEDY, greedy_variant(greedy), 0.0, i, seed, &g, &d)?,
            ])
        })
        .collect();
    let mut manifest = config_manifest(Some(msi), Some(greedy));
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    manifest.push(("seeds".into(), seeds.join(",")));
    Ok(ExperimentReport::new(
        "error-point",
        flatten(rows)?,
        false,
        manifest,
    ))
}

/// MSI and greedy trees on fresh blob train/test samples for every swept
/// standard deviation and trial.
pub fn run_blob_sweep(
    cfg: &BlobSweepConfig,
    msi: MsiConfig,
    greedy: GreedyConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    greedy.validate()?;
    let rows = cfg
        .tasks()
        .par_iter()
        .map(|t| {
            let (train, test) = t.datasets(cfg.points_per_blob)?;
            let (m, _) = build_tree(&train, msi)?;
            let g = build_greedy_tree(&train, greedy)?;
            Ok(vec![
                TrialRow::new(MSI, msi_variant(msi), t.std, t.trial, t.seed, &m, &test)?,
                TrialRow::new(
                    GREEDY,
                    greedy_variant(greedy),
                    t.std,
                    t.trial,
                    t.seed,
                    &g,
                    &test,
                )?,
            ])
        })
        .collect();
    let mut manifest = cfg.manifest();
    manifest.extend(config_manifest(Some(msi), Some(greedy)));
    Ok(ExperimentReport::new(
        "blobs",
        flatten(rows)?,
        true,
        manifest,
    ))
}

/// Picks the greedy minimum leaf size from `grid` with the best mean test
/// accuracy on a blob sweep drawn from a seed stream separate from
/// `cfg.base_seed`'s. Ties go to the smaller value. Also returns every
/// grid value's accuracy.
pub fn tune_greedy_min_leaf(
    cfg: &BlobSweepConfig,
    base: GreedyConfig,
    grid: &[usize],
) -> Result<(usize, Vec<(usize, f64)>)> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty tuning grid".into()));
    }
    let tuning = BlobSweepConfig {
        base_seed: derive_seed(cfg.base_seed, &[TUNING_STREAM]),
        ..cfg.clone()
    };
    let tasks = tuning.tasks();
    let scores: Vec<Result<(usize, f64)>> = grid
        .iter()
        .map(|&leaf| {
            let g = base.with_min_samples_leaf(leaf);
            g.validate()?;
            let acc: Result<Vec<f64>> = tasks
                .par_iter()
                .map(|t| {
                    let (train, test) = t.datasets(tuning.points_per_blob)?;
                    build_greedy_tree(&train, g)?.accuracy(&test)
                })
                .collect();
            Ok((leaf, mean(acc?.into_iter())))
        })
        .collect();
    let scores: Vec<(usize, f64)> = scores.into_iter().collect::<Result<_>>()?;
    let best = scores
        .iter()
        .fold(None::<(usize, f64)>, |b, &(l, a)| match b {
            Some((bl, ba)) if ba > a || (ba == a && bl < l) => Some((bl, ba)),
            _ => Some((l, a)),
        })
        .expect("grid is non-empty")
        .0;
    Ok((best, scores))
}

fn ablation(
    study: &str,
    cfg: &BlobSweepConfig,
    variants: &[MsiConfig],
    label: impl Fn(MsiConfig) -> String + Sync,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let rows = cfg
        .tasks()
        .par_iter()
        .map(|t| {
            let (train, test) = t.datasets(cfg.points_per_blob)?;
            variants
                .iter()
                .map(|&v| {
                    let (tree, _) = build_tree(&train, v)?;
                    TrialRow::new(MSI, label(v), t.std, t.trial, t.seed, &tree, &test)
                })
                .collect()
        })
        .collect();
    Ok(ExperimentReport::new(
        study,
        flatten(rows)?,
        false,
        cfg.manifest(),
    ))
}

/// MSI under every combiner on identical per-trial blob datasets.
pub fn run_combiner_ablation(cfg: &BlobSweepConfig, base: MsiConfig) -> Result<ExperimentReport> {
    let variants: Vec<MsiConfig> = CombinerKind::ALL
        .iter()
        .map(|&combiner| MsiConfig { combiner, ..base })
        .collect();
    let mut r = ablation("combiners", cfg, &variants, |v| v.combiner.to_string())?;
    r.manifest
        .push(("compressor".into(), base.compressor.to_string()));
    Ok(r)
}

/// MSI under every compressor on identical per-trial blob datasets.
pub fn run_compressor_ablation(cfg: &BlobSweepConfig, base: MsiConfig) -> Result<ExperimentReport> {
    let variants: Vec<MsiConfig> = CompressorKind::ALL
        .iter()
        .map(|&compressor| MsiConfig { compressor, ..base })
        .collect();
    let mut r = ablation("compressors", cfg, &variants, |v| v.compressor.to_string())?;
    r.manifest
        .push(("combiner".into(), base.combiner.to_string()));
    Ok(r)
}

/// Repeated random train/test evaluations of both algorithms on `data`.
/// Repetition `i` splits with seed `derive_seed(ratio.seed, [i])`.
pub fn run_split_study(
    data: &Dataset,
    repetitions: usize,
    ratio: SplitRatio,
    msi: MsiConfig,
    greedy: GreedyConfig,
) -> Result<ExperimentReport> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("need at least one repetition".into()));
    }
    greedy.validate()?;
    let rows = (0..repetitions)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ratio.seed, &[i as u64]);
            let (train, test) = train_test_split(data, ratio.with_seed(seed))?;
            let (m, _) = build_tree(&train, msi)?;
            let g = build_greedy_tree(&train, greedy)?;
            Ok(vec![
                TrialRow::new(MSI, msi_variant(msi), 0.0, i, seed, &m, &test)?,
                TrialRow::new(GREEDY, greedy_variant(greedy), 0.0, i, seed, &g, &test)?,
            ])
        })
        .collect();
    let mut manifest = vec![
        ("rows".into(), data.n_rows().to_string()),
        ("repetitions".into(), repetitions.to_string()),
        ("train_fraction".into(), ratio.train_fraction().to_string()),
        ("seed".into(), ratio.seed.to_string()),
    ];
    manifest.extend(config_manifest(Some(msi), Some(greedy)));
    Ok(ExperimentReport::new(
        "csv",
        flatten(rows)?,
        false,
        manifest,
    ))
}

/// [`run_split_study`] on a CSV file.
pub fn run_csv_study(
    path: impl AsRef<Path>,
    label: &LabelColumn,
    has_header: bool,
    repetitions: usize,
    ratio: SplitRatio,
    msi: MsiConfig,
    greedy: GreedyConfig,
) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let data = load_csv(path, label, has_header)?;
    let mut r = run_split_study(&data, repetitions, ratio, msi, greedy)?;
    r.manifest
        .insert(2, ("data".into(), path.display().to_string()));
    Ok(r)
}

/// Mean of each pooled aggregate's `mean_accuracy`, keyed by variant.
pub fn accuracy_by_variant(report: &ExperimentReport) -> BTreeMap<String, f64> {
    report
        .overall_rows()
        .map(|r| (r.variant.clone(), r.mean_accuracy))
        .collect()
}
