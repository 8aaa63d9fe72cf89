//! Seeded surrogate-training experiments over exclusion manifests.

mod surrogate;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use surrogate::{
    evaluate, loss_and_gradient, train_surrogate, Evaluation, SurrogateConfig, SurrogateModel,
};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exclusion::{apply_manifest, class_geometry, select_exclusions, ExclusionManifest, Strategy};
use crate::json;
use crate::reduction::{reduce, Embedding, ReductionParams};
use crate::stats::{self, compare_strategies, summarize, Comparison, StrategyComparisons, TrialSet};

pub const DEFAULT_PERCENTS: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0];
pub const DEFAULT_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Name used in table captions.
    pub dataset: String,
    pub reduction: ReductionParams,
    /// Column order of the rendered table.
    pub strategies: Vec<Strategy>,
    pub percents: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    /// Training hyperparameters; the seed is replaced per trial.
    pub surrogate: SurrogateConfig,
    pub alpha: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            dataset: "dataset".into(),
            reduction: ReductionParams::default(),
            strategies: vec![Strategy::Lateral, Strategy::Central, Strategy::Random],
            percents: DEFAULT_PERCENTS.to_vec(),
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            surrogate: SurrogateConfig::default(),
            alpha: stats::DEFAULT_ALPHA,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("an experiment needs at least one trial".into()));
        }
        for (i, &p) in self.percents.iter().enumerate() {
            if !(p > 0.0 && p < 100.0) {
                return Err(Error::Parameter(format!("exclusion percent must lie in (0, 100), got {p}")));
            }
            if self.percents[..i].contains(&p) {
                return Err(Error::Parameter(format!("percent {p} listed twice")));
            }
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::Parameter(format!("strategy {s} listed twice")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.reduction.validate()?;
        self.surrogate.validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

/// One training run: everything needed to repeat it in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRun {
    /// `None` for the baseline run.
    pub strategy: Option<Strategy>,
    pub percent: f64,
    pub trial: usize,
    pub training_seed: u64,
    pub manifest_seed: Option<u64>,
    pub train_size: usize,
    pub test_size: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl CellRun {
    fn key(strategy: Option<Strategy>, percent: f64, trial: usize, seed: u64) -> String {
        match strategy {
            None => format!("baseline trial={trial} seed={seed}"),
            Some(s) => format!("{s} percent={percent} trial={trial} seed={seed}"),
        }
    }
}

/// The trials of one `(strategy, percent)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: Strategy,
    pub percent: f64,
    pub trials: TrialSet,
    pub excluded: usize,
    /// Absent when there are fewer than two trials.
    pub versus_baseline: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentComparisons {
    pub percent: f64,
    pub comparisons: StrategyComparisons,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub train_source: String,
    #[serde(with = "crate::json::hex_u64")]
    pub train_hash: u64,
    pub test_source: String,
    #[serde(with = "crate::json::hex_u64")]
    pub test_hash: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub embedding_params: String,
    pub trial_seeds: Vec<u64>,
    pub test: String,
    pub surrogate: String,
}

impl Provenance {
    fn new(train: &Dataset, test: &Dataset, params: &ReductionParams, plan: &ExperimentPlan) -> Self {
        Provenance {
            tool_version: crate::TOOL_VERSION.into(),
            train_source: train.source_id().into(),
            train_hash: train.content_hash(),
            test_source: test.source_id().into(),
            test_hash: test.content_hash(),
            train_size: train.len(),
            test_size: test.len(),
            embedding_params: params.canonical(),
            trial_seeds: (0..plan.trials).map(|t| plan.trial_seed(t)).collect(),
            test: "welch-two-tailed".into(),
            surrogate: "multinomial-logistic-regression/minibatch-sgd".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub plan: ExperimentPlan,
    pub baseline: TrialSet,
    pub cells: Vec<Cell>,
    /// Per percent, when at least two strategies and two trials exist.
    pub comparisons: Vec<PercentComparisons>,
    pub runs: Vec<CellRun>,
    pub provenance: Provenance,
}

impl ExperimentTable {
    /// Baseline plus one per `(strategy, percent)`.
    pub fn cell_count(&self) -> usize {
        1 + self.cells.len()
    }

    pub fn cell(&self, strategy: Strategy, percent: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.percent == percent)
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_canonical_string(self)
    }

    /// Plain-text rendering: one row per percent with accuracy and standard
    /// deviation per strategy, the best mean per row starred, then the
    /// baseline and the significance tests.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Data Reduction Strategy Experimental Results - {}", self.plan.dataset);
        let _ = writeln!(
            out,
            "surrogate: {}; {} trial(s) per cell; test samples: {}; train samples: {}",
            self.provenance.surrogate, self.plan.trials, self.provenance.test_size, self.provenance.train_size
        );
        let _ = writeln!(out);
        let mut head1 = format!("{:<9}", "");
        let mut head2 = format!("{:<9}", "Excl. %");
        for s in &self.plan.strategies {
            let _ = write!(head1, "  {:>22}", s.title());
            let _ = write!(head2, "  {:>10} {:>11}", "Acc.", "Std. Dev.");
        }
        let _ = writeln!(out, "{}", head1.trim_end());
        let _ = writeln!(out, "{head2}");
        for &p in &self.plan.percents {
            let row: Vec<&Cell> = self
                .plan
                .strategies
                .iter()
                .filter_map(|&s| self.cell(s, p))
                .collect();
            let best = row.iter().map(|c| c.trials.mean).fold(f64::NEG_INFINITY, f64::max);
            let mut line = format!("{:<9}", format!("{p}%"));
            for c in row {
                let star = if c.trials.mean == best && self.plan.strategies.len() > 1 { "*" } else { " " };
                let _ = write!(
                    line,
                    "  {:>9}{star} {:>11}",
                    format!("{:.3}%", 100.0 * c.trials.mean),
                    format!("{:.2e}", c.trials.std)
                );
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "The baseline accuracy, excluding no samples, for this dataset was {:.3}% (std. dev. {:.2e})",
            100.0 * self.baseline.mean,
            self.baseline.std
        );
        if self.comparisons.is_empty() && self.cells.iter().all(|c| c.versus_baseline.is_none()) {
            let _ = writeln!(out, "No significance tests: they need at least two trials per cell.");
            return out;
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Welch two-tailed t-tests at alpha = {}", self.plan.alpha);
        let _ = writeln!(
            out,
            "{:<9}  {:<8}  {:<8}  {:>10}  {:>9}  {:>11}  {}",
            "Excl. %", "First", "Second", "t", "df", "p-value", "Significant"
        );
        let mut row = |p: f64, first: &str, second: &str, c: &Comparison, winner: Option<&str>| {
            let verdict = match winner {
                Some(w) => format!("yes ({w} higher)"),
                None => "no".into(),
            };
            let _ = writeln!(
                out,
                "{:<9}  {:<8}  {:<8}  {:>10.4}  {:>9.3}  {:>11.9}  {}",
                format!("{p}%"),
                first,
                second,
                c.t,
                c.df,
                c.p,
                verdict
            );
        };
        for pc in &self.comparisons {
            for r in pc.comparisons.pairwise.iter().chain(&pc.comparisons.versus_baseline) {
                row(pc.percent, &r.first, &r.second, &r.comparison, r.winner.as_deref());
            }
        }
        if self.comparisons.is_empty() {
            for c in &self.cells {
                if let Some(cmp) = &c.versus_baseline {
                    let winner = cmp.significant.then(|| {
                        if cmp.a.mean > cmp.b.mean { c.strategy.name() } else { "baseline" }
                    });
                    row(c.percent, c.strategy.name(), "baseline", cmp, winner);
                }
            }
        }
        out
    }
}

enum Job {
    Baseline { trial: usize },
    Fixed { trial: usize, manifest: usize },
    Random { trial: usize, percent: f64 },
}

/// Runs the plan: for every trial a baseline and one training run per
/// `(strategy, percent)`, all evaluated on the whole test set.
///
/// The embedding is computed from `train` with the plan's reduction
/// parameters unless one is supplied. Central and Lateral manifests are
/// built once; Random manifests are redrawn per trial with the trial seed.
pub fn run_experiment(
    plan: &ExperimentPlan,
    train: &Dataset,
    test: &Dataset,
    embedding: Option<&Embedding>,
) -> Result<ExperimentTable> {
    plan.validate()?;
    if train.dim() != test.dim() {
        return Err(Error::Parameter(format!(
            "train dimension {} differs from test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    let computed;
    let embedding = match embedding {
        Some(e) => {
            if e.dataset_hash != train.content_hash() {
                return Err(Error::Provenance {
                    expected: e.dataset_hash,
                    found: train.content_hash(),
                });
            }
            e
        }
        None => {
            computed = reduce(train, &plan.reduction)?;
            &computed
        }
    };
    let geometry = class_geometry(embedding, train.labels(), train.num_classes())?;

    let mut fixed: Vec<ExclusionManifest> = Vec::new();
    for &s in &plan.strategies {
        if s != Strategy::Random {
            for &p in &plan.percents {
                fixed.push(select_exclusions(&geometry, s, p, 0)?);
            }
        }
    }

    let mut jobs = Vec::new();
    for trial in 0..plan.trials {
        jobs.push(Job::Baseline { trial });
        for &s in &plan.strategies {
            for &p in &plan.percents {
                jobs.push(if s == Strategy::Random {
                    Job::Random { trial, percent: p }
                } else {
                    let manifest = fixed
                        .iter()
                        .position(|m| m.strategy == s && m.percent == p)
                        .expect("fixed manifests cover every pair");
                    Job::Fixed { trial, manifest }
                });
            }
        }
    }

    let run_one = |job: &Job| -> Result<CellRun> {
        let (trial, strategy, percent) = match *job {
            Job::Baseline { trial } => (trial, None, 0.0),
            Job::Fixed { trial, manifest } => (trial, Some(fixed[manifest].strategy), fixed[manifest].percent),
            Job::Random { trial, percent } => (trial, Some(Strategy::Random), percent),
        };
        let seed = plan.trial_seed(trial);
        let key = CellRun::key(strategy, percent, trial, seed);
        let wrap = |e: Error| Error::Cell {
            cell: format!("{key} train={:016x} test={:016x}", train.content_hash(), test.content_hash()),
            source: Box::new(e),
        };
        let random_manifest;
        let (view, manifest_seed) = match *job {
            Job::Baseline { .. } => (train.full_view(), None),
            Job::Fixed { manifest, .. } => (apply_manifest(train, &fixed[manifest]).map_err(wrap)?, None),
            Job::Random { percent, .. } => {
                random_manifest = select_exclusions(&geometry, Strategy::Random, percent, seed).map_err(wrap)?;
                (apply_manifest(train, &random_manifest).map_err(wrap)?, Some(seed))
            }
        };
        let model = train_surrogate(&view, &plan.surrogate.with_seed(seed)).map_err(wrap)?;
        let eval = evaluate(&model, test).map_err(wrap)?;
        Ok(CellRun {
            strategy,
            percent,
            trial,
            training_seed: seed,
            manifest_seed,
            train_size: view.len(),
            test_size: eval.total,
            correct: eval.correct,
            accuracy: eval.accuracy,
        })
    };
    let results: Vec<Result<CellRun>> = jobs.par_iter().map(run_one).collect();
    // first failure in job order, so the reported error is deterministic
    let runs: Vec<CellRun> = results.into_iter().collect::<Result<_>>()?;
    debug_assert!(runs.iter().all(|r| r.test_size == test.len()));

    assemble(plan, runs, &fixed, train, test, &embedding.params)
}

fn assemble(
    plan: &ExperimentPlan,
    runs: Vec<CellRun>,
    fixed: &[ExclusionManifest],
    train: &Dataset,
    test: &Dataset,
    params: &ReductionParams,
) -> Result<ExperimentTable> {
    let accuracies = |strategy: Option<Strategy>, percent: f64| -> Vec<f64> {
        let mut rows: Vec<&CellRun> = runs
            .iter()
            .filter(|r| r.strategy == strategy && (strategy.is_none() || r.percent == percent))
            .collect();
        rows.sort_by_key(|r| r.trial);
        rows.iter().map(|r| r.accuracy).collect()
    };
    let baseline = summarize("baseline", &accuracies(None, 0.0))?;
    let compare = plan.trials >= 2;

    let mut cells = Vec::new();
    for &s in &plan.strategies {
        for &p in &plan.percents {
            let trials = summarize(format!("{s}@{p}%"), &accuracies(Some(s), p))?;
            let versus_baseline = if compare {
                Some(stats::welch_t_test_at(&trials, &baseline, plan.alpha)?)
            } else {
                None
            };
            let excluded = match fixed.iter().find(|m| m.strategy == s && m.percent == p) {
                Some(m) => m.excluded.len(),
                None => {
                    let r = runs
                        .iter()
                        .find(|r| r.strategy == Some(s) && r.percent == p)
                        .expect("every cell has runs");
                    train.len() - r.train_size
                }
            };
            cells.push(Cell {
                strategy: s,
                percent: p,
                trials,
                excluded,
                versus_baseline,
            });
        }
    }

    let mut comparisons = Vec::new();
    if compare && plan.strategies.len() >= 2 {
        for &p in &plan.percents {
            let table: BTreeMap<String, TrialSet> = cells
                .iter()
                .filter(|c| c.percent == p)
                .map(|c| (c.strategy.name().to_string(), c.trials.clone()))
                .collect();
            comparisons.push(PercentComparisons {
                percent: p,
                comparisons: compare_strategies(&table, &baseline, plan.alpha)?,
            });
        }
    }

    Ok(ExperimentTable {
        plan: plan.clone(),
        baseline,
        cells,
        comparisons,
        runs,
        provenance: Provenance::new(train, test, params, plan),
    })
}

/// One row of the dimension comparison: a dimensionality's pooled trials
/// against the pooled trials of the three-dimensional reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub dims: usize,
    pub pooled: TrialSet,
    pub reference: TrialSet,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub dataset: String,
    pub reference_dims: usize,
    pub rows: Vec<DimensionRow>,
    pub experiments: Vec<ExperimentTable>,
}

impl DimensionTable {
    pub fn to_json(&self) -> Result<String> {
        json::to_canonical_string(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Comparison of Mean Accuracies for Exclusions Based on Differing Dimensional Reductions"
        );
        let _ = writeln!(
            out,
            "Central exclusion pooled over every percent and trial; Welch two-tailed t-test"
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<14} {:>10} {:>11} {:>12} {:>12}",
            "Dataset", "Dimensions", "Accuracy", "3D Accuracy", "p-value"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14} {:>10} {:>11} {:>12} {:>12.9}",
                self.dataset,
                r.dims,
                format!("{:.4}%", 100.0 * r.pooled.mean),
                format!("{:.4}%", 100.0 * r.reference.mean),
                r.comparison.p
            );
        }
        let _ = writeln!(out);
        for e in &self.experiments {
            let _ = writeln!(
                out,
                "m={}: {} pooled trials, embedding {}",
                e.plan.reduction.m,
                e.cells.iter().map(|c| c.trials.len()).sum::<usize>(),
                e.provenance.embedding_params
            );
        }
        out
    }
}

pub const REFERENCE_DIMS: usize = 3;

/// For every dimensionality, runs the Central-strategy experiment over all
/// of the plan's percents and trials, pools the accuracies, and compares
/// each pool with the three-dimensional one. Rows follow the order of
/// `dims`; the reference gets a row of its own only when it is the sole
/// entry.
pub fn run_dimension_study(
    plan: &ExperimentPlan,
    dims: &[usize],
    train: &Dataset,
    test: &Dataset,
) -> Result<DimensionTable> {
    if dims.is_empty() {
        return Err(Error::Parameter("dimension study needs at least one dimensionality".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Parameter("embedding dimensionality must be ≥ 1".into()));
    }
    let mut all: Vec<usize> = dims.to_vec();
    all.push(REFERENCE_DIMS);
    all.sort_unstable();
    all.dedup();

    let mut experiments = Vec::new();
    let mut pools = BTreeMap::new();
    for &m in &all {
        let sub = ExperimentPlan {
            reduction: plan.reduction.clone().with_dims(m),
            strategies: vec![Strategy::Central],
            ..plan.clone()
        };
        let table = run_experiment(&sub, train, test, None)?;
        let pooled: Vec<f64> = table
            .cells
            .iter()
            .flat_map(|c| c.trials.accuracies.iter().copied())
            .collect();
        pools.insert(m, summarize(format!("m={m}"), &pooled)?);
        experiments.push(table);
    }
    let reference = pools[&REFERENCE_DIMS].clone();
    // the reference is compared with itself only when it is all there is
    let compared: Vec<usize> = if dims.iter().all(|&m| m == REFERENCE_DIMS) {
        vec![REFERENCE_DIMS]
    } else {
        let mut seen = Vec::new();
        for &m in dims {
            if m != REFERENCE_DIMS && !seen.contains(&m) {
                seen.push(m);
            }
        }
        seen
    };
    let rows = compared
        .iter()
        .map(|&m| {
            let pooled = pools[&m].clone();
            let comparison = stats::welch_t_test_at(&pooled, &reference, plan.alpha)?;
            Ok(DimensionRow {
                dims: m,
                pooled,
                reference: reference.clone(),
                comparison,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DimensionTable {
        dataset: plan.dataset.clone(),
        reference_dims: REFERENCE_DIMS,
        rows,
        experiments,
    })
}
