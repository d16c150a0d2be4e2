//! Exhaustive multi-resolution feature selection.
//!
//! The outer space is the lattice of feature subsets; inside each subset the
//! inner space is the lattice of windows over its observed range, or its
//! single points (profiles). Three selectors score that space:
//!
//! - [`select_global`]: subsets by global η;
//! - [`select_window`]: (subset, window) pairs by windowed η;
//! - [`select_profile`]: (subset, profile) pairs by lift at a fixed target value.
//!
//! Subsets are evaluated in parallel. Rankings use a total order (quantized
//! score, then cardinality, then window size, then lexicographic) so the
//! reduction is independent of worker count and scheduling.

mod oracle;

pub use oracle::{brute_force_oracle, Resolution};

use std::cmp::Ordering;

use itertools::Itertools;
use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{discretize_joint, DiscretizationModel, GroupKey, QuantileSpec};
use crate::distribution::{build_table, CategoricalColumn, Column, Dataset, JointTable};
use crate::error::{Error, Result};
use crate::metrics::{eta_global, lift, Window, WindowScorer};

/// Windows enumerated per subset above this count are skipped with a diagnostic.
pub const MAX_WINDOWS_PER_SUBSET: u128 = 1 << 22;

/// Scores closer than this are ranked as ties.
const SCORE_RESOLUTION: f64 = 1e-12;

/// Sorted, duplicate-free column indices of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSubset(Vec<usize>);

impl FeatureSubset {
    pub fn new(mut columns: Vec<usize>) -> Result<Self> {
        columns.sort_unstable();
        columns.dedup();
        if columns.is_empty() {
            return Err(Error::InvalidConfig("feature subset must be nonempty".into()));
        }
        Ok(FeatureSubset(columns))
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self, data: &Dataset) -> Vec<String> {
        self.0.iter().map(|&c| data.name(c).to_string()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// Features are categorical; a subset's range is its observed Cartesian range.
    Categorical,
    /// Features are continuous; each subset is collapsed to one ordinal column
    /// by per-group quantiles of the Mahalanobis distance to the origin.
    JointDiscretized { quantiles: QuantileSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_k: usize,
    /// Windows and profiles need relative frequency strictly above this.
    pub min_support: f64,
    pub max_window_cells: Option<usize>,
    pub mode: Mode,
    pub top_n: usize,
    /// Not part of the result: any worker count gives the same ranking.
    #[serde(skip, default = "one_worker")]
    pub workers: usize,
}

fn one_worker() -> usize {
    1
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_k: usize::MAX,
            min_support: 0.0,
            max_window_cells: None,
            mode: Mode::Categorical,
            top_n: 10,
            workers: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_k == 0 {
            return Err(Error::InvalidConfig("max_k must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.min_support) {
            return Err(Error::InvalidConfig(format!(
                "min_support must lie in [0, 1), got {}",
                self.min_support
            )));
        }
        if self.max_window_cells == Some(0) {
            return Err(Error::InvalidConfig("max_window_cells must be positive".into()));
        }
        if self.top_n == 0 {
            return Err(Error::InvalidConfig("top_n must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        Ok(())
    }

    /// Strict support restriction on integer counts.
    pub fn admits(&self, support: u64, total: u64) -> bool {
        support as f64 > self.min_support * total as f64
    }
}

/// Where inside a subset's range a candidate was scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Locus {
    WholeRange,
    Window {
        levels: Vec<Vec<u32>>,
        labels: Vec<String>,
    },
    Profile {
        level: Vec<u32>,
        label: String,
    },
}

impl Locus {
    fn size(&self) -> usize {
        match self {
            Locus::WholeRange => 0,
            Locus::Window { levels, .. } => levels.len(),
            Locus::Profile { .. } => 1,
        }
    }

    fn codes(&self) -> &[Vec<u32>] {
        match self {
            Locus::WholeRange => &[],
            Locus::Window { levels, .. } => levels,
            Locus::Profile { level, .. } => std::slice::from_ref(level),
        }
    }

    /// Human-readable description, e.g. `Quintile 1 & Quintile 5`.
    pub fn describe(&self) -> String {
        match self {
            Locus::WholeRange => "whole range".to_string(),
            Locus::Window { labels, .. } => labels.join(" & "),
            Locus::Profile { label, .. } => label.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub subset: FeatureSubset,
    pub features: Vec<String>,
    pub locus: Locus,
    pub score: f64,
    /// Complete cases falling in the locus (the whole table for `WholeRange`).
    pub support_count: u64,
    /// Complete cases of the subset.
    pub table_total: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<DiscretizationModel>,
}

/// Scores are compared on a 1e-12 grid so that mathematically equal values
/// reached through different arithmetic rank as ties.
pub fn score_key(score: f64) -> f64 {
    (score / SCORE_RESOLUTION).round()
}

/// Ranking order: higher score first, then fewer features, then smaller
/// locus, then lexicographic subset and locus.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    score_key(b.score)
        .total_cmp(&score_key(a.score))
        .then_with(|| a.subset.len().cmp(&b.subset.len()))
        .then_with(|| a.locus.size().cmp(&b.locus.size()))
        .then_with(|| a.subset.columns().cmp(b.subset.columns()))
        .then_with(|| a.locus.codes().cmp(b.locus.codes()))
}

/// Sorts and keeps the top `n`, extended to every candidate tied at the top score.
fn keep_top(mut candidates: Vec<Candidate>, n: usize) -> Vec<Candidate> {
    candidates.sort_by(rank_order);
    let ties = match candidates.first() {
        Some(best) => {
            let key = score_key(best.score);
            candidates.iter().take_while(|c| score_key(c.score) == key).count()
        }
        None => 0,
    };
    candidates.truncate(n.max(ties));
    candidates
}

/// A subset that could not be scored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub features: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub candidates: Vec<Candidate>,
    pub skipped: Vec<Skipped>,
    pub subsets_evaluated: usize,
}

/// All nonempty subsets of `features` of size at most `max_k`, in
/// (size, lexicographic) order.
pub fn enumerate_subsets(features: &[usize], max_k: usize) -> impl Iterator<Item = FeatureSubset> + '_ {
    let mut sorted = features.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let max_k = max_k.min(sorted.len());
    (1..=max_k).flat_map(move |k| {
        sorted
            .clone()
            .into_iter()
            .combinations(k)
            .map(FeatureSubset)
    })
}

/// Number of windows of at most `cap` members over `levels` levels.
pub fn window_space_size(levels: usize, cap: Option<usize>) -> u128 {
    let cap = cap.unwrap_or(levels).min(levels);
    let mut total = 0u128;
    let mut binom = 1u128;
    for j in 1..=cap {
        binom = binom.saturating_mul((levels - j + 1) as u128) / j as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// Windows over a table's observed levels that pass the cardinality cap and
/// the support restriction, in (size, lexicographic) order.
pub fn enumerate_windows<'a>(
    t: &'a JointTable,
    config: &'a SearchConfig,
) -> impl Iterator<Item = Window> + 'a {
    let n = t.n_x();
    let cap = config.max_window_cells.unwrap_or(n).min(n);
    let rows = t.row_sums();
    let total = t.total();
    (1..=cap).flat_map(move |k| {
        let rows = rows.clone();
        (0..n).combinations(k).filter_map(move |members| {
            let support: u64 = members.iter().map(|&x| rows[x]).sum();
            config
                .admits(support, total)
                .then(|| Window::new(members).expect("combinations are nonempty"))
        })
    })
}

/// Shared state for evaluating subsets of one dataset.
struct Evaluator<'a> {
    data: &'a Dataset,
    config: &'a SearchConfig,
    groups: Vec<Option<GroupKey>>,
}

impl<'a> Evaluator<'a> {
    fn new(data: &'a Dataset, features: &[usize], config: &'a SearchConfig) -> Result<Self> {
        config.validate()?;
        if features.is_empty() {
            return Err(Error::InvalidConfig("no feature columns to search".into()));
        }
        for &f in features {
            if f >= data.names().len() || f == data.target() {
                return Err(Error::InvalidConfig(format!("invalid feature column index {f}")));
            }
            match (&config.mode, data.column(f)) {
                (Mode::Categorical, Column::Categorical(_)) => {}
                (Mode::JointDiscretized { .. }, Column::Continuous(_)) => {}
                (Mode::Categorical, Column::Continuous(_)) => {
                    return Err(Error::SchemaMismatch(format!(
                        "column '{}' is continuous; use joint discretization",
                        data.name(f)
                    )))
                }
                (Mode::JointDiscretized { .. }, Column::Categorical(_)) => {
                    return Err(Error::SchemaMismatch(format!(
                        "column '{}' is categorical; joint discretization needs continuous columns",
                        data.name(f)
                    )))
                }
            }
        }
        Ok(Evaluator {
            data,
            config,
            groups: data.group_keys(),
        })
    }

    fn table(&self, subset: &FeatureSubset) -> Result<(JointTable, Option<DiscretizationModel>)> {
        match &self.config.mode {
            Mode::Categorical => Ok((build_table(self.data, subset, self.data.target())?, None)),
            Mode::JointDiscretized { quantiles } => {
                let columns: Vec<&[Option<f64>]> = subset
                    .columns()
                    .iter()
                    .map(|&c| self.data.column(c).as_continuous().expect("checked continuous"))
                    .collect();
                let rows: Vec<Vec<Option<f64>>> = (0..self.data.n_rows())
                    .map(|i| columns.iter().map(|c| c[i]).collect())
                    .collect();
                let (labels, mut model) = discretize_joint(&rows, &self.groups, quantiles)?;
                model.features = subset.names(self.data);
                let column = CategoricalColumn::from_codes(labels, quantiles.level_names())?;
                let table = JointTable::tabulate(&[&column], self.data.target_column())?;
                Ok((table, Some(model)))
            }
        }
    }

    fn candidate(&self, subset: &FeatureSubset, locus: Locus, score: f64, support: u64, total: u64) -> Candidate {
        Candidate {
            subset: subset.clone(),
            features: subset.names(self.data),
            locus,
            score,
            support_count: support,
            table_total: total,
            model: None,
        }
    }

    fn run<F>(&self, features: &[usize], score: F) -> Result<SearchOutcome>
    where
        F: Fn(&Self, &FeatureSubset, &JointTable) -> std::result::Result<Vec<Candidate>, String> + Sync,
    {
        let subsets: Vec<FeatureSubset> = enumerate_subsets(features, self.config.max_k).collect();
        let top_n = self.config.top_n;
        let evaluate = |subset: &FeatureSubset| -> (Vec<Candidate>, Vec<Skipped>) {
            let result = self
                .table(subset)
                .map_err(|e| e.to_string())
                .and_then(|(table, model)| {
                    let mut found = keep_top(score(self, subset, &table)?, top_n);
                    if model.is_some() {
                        for c in &mut found {
                            c.model = model.clone();
                        }
                    }
                    Ok(found)
                });
            match result {
                Ok(found) => (found, Vec::new()),
                Err(reason) => {
                    let features = subset.names(self.data);
                    debug!("skipped {features:?}: {reason}");
                    (Vec::new(), vec![Skipped { features, reason }])
                }
            }
        };
        let merge = |(mut a, mut sa): (Vec<Candidate>, Vec<Skipped>), (b, sb): (Vec<Candidate>, Vec<Skipped>)| {
            a.extend(b);
            sa.extend(sb);
            (keep_top(a, top_n), sa)
        };

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        let (candidates, skipped) = pool.install(|| {
            subsets
                .par_iter()
                .map(evaluate)
                .reduce(|| (Vec::new(), Vec::new()), merge)
        });
        // Reduction order of diagnostics follows the subset order already, but
        // make it explicit.
        let mut skipped = skipped;
        skipped.sort_by(|a, b| {
            a.features
                .len()
                .cmp(&b.features.len())
                .then_with(|| a.features.cmp(&b.features))
        });
        Ok(SearchOutcome {
            candidates,
            skipped,
            subsets_evaluated: subsets.len(),
        })
    }
}

/// The table a selector scores for `subset`, with its discretization model
/// in joint mode.
pub fn subset_table(
    data: &Dataset,
    subset: &FeatureSubset,
    config: &SearchConfig,
) -> Result<(JointTable, Option<DiscretizationModel>)> {
    Evaluator::new(data, subset.columns(), config)?.table(subset)
}

/// Subsets ranked by global η (the classical selector with cost 1/η).
pub fn select_global(data: &Dataset, features: &[usize], config: &SearchConfig) -> Result<SearchOutcome> {
    let ev = Evaluator::new(data, features, config)?;
    ev.run(features, |ev, subset, table| {
        let eta = eta_global(table).map_err(|e| e.to_string())?;
        Ok(vec![ev.candidate(subset, Locus::WholeRange, eta, table.total(), table.total())])
    })
}

/// (subset, window) pairs ranked by windowed η.
pub fn select_window(data: &Dataset, features: &[usize], config: &SearchConfig) -> Result<SearchOutcome> {
    let ev = Evaluator::new(data, features, config)?;
    ev.run(features, |ev, subset, table| {
        let space = window_space_size(table.n_x(), ev.config.max_window_cells);
        if space > MAX_WINDOWS_PER_SUBSET {
            return Err(format!(
                "window space of {space} windows over {} levels exceeds {MAX_WINDOWS_PER_SUBSET}; lower max_window_cells",
                table.n_x()
            ));
        }
        let scorer = WindowScorer::new(table).map_err(|e| e.to_string())?;
        let mut found = Vec::new();
        for w in enumerate_windows(table, ev.config) {
            let eta = match scorer.eta(&w) {
                Ok(v) => v,
                Err(e) => {
                    debug!("window {:?} of {:?}: {e}", w.members(), subset.columns());
                    continue;
                }
            };
            let levels = w.members().iter().map(|&x| table.x_levels()[x].clone()).collect();
            let labels = w.members().iter().map(|&x| table.x_labels()[x].clone()).collect();
            found.push(ev.candidate(
                subset,
                Locus::Window { levels, labels },
                eta,
                scorer.support_count(&w),
                table.total(),
            ));
        }
        Ok(found)
    })
}

/// (subset, profile) pairs ranked by the lift at target value `y`.
pub fn select_profile(
    data: &Dataset,
    features: &[usize],
    y: &str,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let code = data.target_column().code_of(y).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "target value '{y}' is not observed in column '{}'",
            data.name(data.target())
        ))
    })?;
    let ev = Evaluator::new(data, features, config)?;
    let outcome = ev.run(features, |ev, subset, table| {
        // The value can vanish from a subset's complete cases.
        let Some(yi) = table.y_index(code) else {
            return Ok(Vec::new());
        };
        let lifts = lift(table).map_err(|e| e.to_string())?;
        let mut found = Vec::new();
        for x in 0..table.n_x() {
            let support = table.row_sum(x);
            if !ev.config.admits(support, table.total()) {
                continue;
            }
            found.push(ev.candidate(
                subset,
                Locus::Profile {
                    level: table.x_levels()[x].clone(),
                    label: table.x_labels()[x].clone(),
                },
                lifts.get(x, yi),
                support,
                table.total(),
            ));
        }
        Ok(found)
    })?;
    if outcome.candidates.is_empty() {
        return Err(Error::NoFeasibleProfile);
    }
    Ok(outcome)
}
