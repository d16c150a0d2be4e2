//! Empirical joint distributions of a feature tuple against a target.
//!
//! A [`JointTable`] holds exact integer counts over the *observed* levels only;
//! every probability is a plug-in relative frequency derived on demand. Level
//! order is lexicographic on level-code tuples, where each column's codes
//! follow its dictionary order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::FeatureSubset;

/// A categorical column: one optional code per row plus the code dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoricalColumn {
    codes: Vec<Option<u32>>,
    levels: Vec<String>,
}

impl CategoricalColumn {
    /// Builds a column from raw values; the dictionary is the sorted set of
    /// distinct non-missing values.
    pub fn from_values<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = Option<&'a str>>,
    {
        let raw: Vec<Option<&str>> = values.into_iter().collect();
        let mut levels: Vec<String> = raw.iter().flatten().map(|s| s.to_string()).collect();
        levels.sort();
        levels.dedup();
        let lookup: HashMap<&str, u32> = levels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let codes = raw.iter().map(|v| v.map(|s| lookup[s])).collect();
        CategoricalColumn { codes, levels }
    }

    /// Builds a column from codes that index into `levels`.
    pub fn from_codes(codes: Vec<Option<u32>>, levels: Vec<String>) -> Result<Self> {
        if let Some(bad) = codes.iter().flatten().find(|&&c| c as usize >= levels.len()) {
            return Err(Error::InvalidConfig(format!(
                "code {bad} outside dictionary of {} levels",
                levels.len()
            )));
        }
        Ok(CategoricalColumn { codes, levels })
    }

    pub fn codes(&self) -> &[Option<u32>] {
        &self.codes
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code_of(&self, value: &str) -> Option<u32> {
        self.levels.iter().position(|l| l == value).map(|i| i as u32)
    }

    pub fn missing_count(&self) -> usize {
        self.codes.iter().filter(|c| c.is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Categorical(CategoricalColumn),
    Continuous(Vec<Option<f64>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Categorical(c) => c.len(),
            Column::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_categorical(&self) -> Option<&CategoricalColumn> {
        match self {
            Column::Categorical(c) => Some(c),
            Column::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&[Option<f64>]> {
        match self {
            Column::Continuous(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }
}

/// A row set: named columns, one categorical target without missing values,
/// and optional grouping columns.
#[derive(Clone, Debug)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Column>,
    target: usize,
    groups: Vec<usize>,
    rejected_rows: usize,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Column>,
        target: usize,
        groups: Vec<usize>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map(Column::len).unwrap_or(0);
        if let Some(i) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::SchemaMismatch(format!(
                "column '{}' has {} rows, expected {rows}",
                names[i],
                columns[i].len()
            )));
        }
        let target_col = columns
            .get(target)
            .ok_or_else(|| Error::SchemaMismatch(format!("target index {target} out of range")))?;
        match target_col {
            Column::Categorical(c) if c.missing_count() == 0 => {}
            Column::Categorical(_) => {
                return Err(Error::SchemaMismatch(format!(
                    "target '{}' has missing values",
                    names[target]
                )))
            }
            Column::Continuous(_) => {
                return Err(Error::SchemaMismatch(format!(
                    "target '{}' must be categorical",
                    names[target]
                )))
            }
        }
        if let Some(&g) = groups.iter().find(|&&g| g >= columns.len() || g == target) {
            return Err(Error::SchemaMismatch(format!("invalid group column index {g}")));
        }
        Ok(Dataset {
            names,
            columns,
            target,
            groups,
            rejected_rows: 0,
        })
    }

    pub(crate) fn with_rejected_rows(mut self, rejected: usize) -> Self {
        self.rejected_rows = rejected;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map(Column::len).unwrap_or(0)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, column: usize) -> &str {
        &self.names[column]
    }

    pub fn column(&self, column: usize) -> &Column {
        &self.columns[column]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn target_column(&self) -> &CategoricalColumn {
        self.columns[self.target]
            .as_categorical()
            .expect("target checked categorical at construction")
    }

    pub fn group_columns(&self) -> &[usize] {
        &self.groups
    }

    /// Rows dropped at ingestion because the target was missing.
    pub fn rejected_rows(&self) -> usize {
        self.rejected_rows
    }

    /// Group key per row, built from the group columns (empty key when there
    /// are none). Rows with a missing group value get `None`.
    pub fn group_keys(&self) -> Vec<Option<Vec<String>>> {
        (0..self.n_rows())
            .map(|row| {
                self.groups
                    .iter()
                    .map(|&g| match &self.columns[g] {
                        Column::Categorical(c) => c.codes[row].map(|k| c.levels[k as usize].clone()),
                        Column::Continuous(v) => v[row].map(|x| x.to_string()),
                    })
                    .collect::<Option<Vec<String>>>()
            })
            .collect()
    }

    /// Every column that is neither the target nor a group column.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|c| *c != self.target && !self.groups.contains(c))
            .collect()
    }
}

/// Counts over the observed range of a feature tuple crossed with the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    x_levels: Vec<Vec<u32>>,
    y_levels: Vec<u32>,
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    /// Row-major, `x_levels.len() * y_levels.len()`.
    counts: Vec<u64>,
    total: u64,
}

impl JointTable {
    /// Tallies complete cases of `features` against `target`.
    pub fn tabulate(features: &[&CategoricalColumn], target: &CategoricalColumn) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidConfig("empty feature subset".into()));
        }
        let n = target.len();
        if let Some(f) = features.iter().find(|f| f.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: f.len(),
            });
        }
        // Mixed-radix key, first feature most significant, so numeric key
        // order is lexicographic tuple order.
        let mut radix: Vec<u128> = Vec::with_capacity(features.len());
        let mut span: u128 = 1;
        for f in features.iter().rev() {
            radix.push(span);
            span = span
                .checked_mul(f.levels.len().max(1) as u128)
                .ok_or_else(|| Error::InvalidConfig("feature level space too large".into()))?;
        }
        radix.reverse();

        let n_y = target.levels.len();
        let mut rows: HashMap<u128, Vec<u64>> = HashMap::new();
        'row: for i in 0..n {
            let Some(y) = target.codes[i] else { continue };
            let mut key = 0u128;
            for (f, r) in features.iter().zip(&radix) {
                match f.codes[i] {
                    Some(c) => key += c as u128 * r,
                    None => continue 'row,
                }
            }
            rows.entry(key).or_insert_with(|| vec![0; n_y])[y as usize] += 1;
        }
        if rows.is_empty() {
            return Err(Error::EmptySupport);
        }

        let mut keys: Vec<u128> = rows.keys().copied().collect();
        keys.sort_unstable();
        let mut col_totals = vec![0u64; n_y];
        for r in rows.values() {
            for (t, c) in col_totals.iter_mut().zip(r) {
                *t += c;
            }
        }
        let y_keep: Vec<usize> = (0..n_y).filter(|&j| col_totals[j] > 0).collect();

        let mut x_levels = Vec::with_capacity(keys.len());
        let mut x_labels = Vec::with_capacity(keys.len());
        let mut counts = Vec::with_capacity(keys.len() * y_keep.len());
        for key in keys {
            let tuple: Vec<u32> = radix
                .iter()
                .zip(features)
                .map(|(r, f)| ((key / r) % f.levels.len().max(1) as u128) as u32)
                .collect();
            let names: Vec<&str> = tuple
                .iter()
                .zip(features)
                .map(|(&c, f)| f.levels[c as usize].as_str())
                .collect();
            x_labels.push(tuple_label(&names));
            x_levels.push(tuple);
            let row = &rows[&key];
            counts.extend(y_keep.iter().map(|&j| row[j]));
        }
        let total = counts.iter().sum();
        Ok(JointTable {
            x_levels,
            y_levels: y_keep.iter().map(|&j| j as u32).collect(),
            x_labels,
            y_labels: y_keep.iter().map(|&j| target.levels[j].clone()).collect(),
            counts,
            total,
        })
    }

    /// Builds a table from a dense count matrix; level codes are positional.
    /// All-zero rows and columns are dropped.
    pub fn from_counts(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        counts: &[Vec<u64>],
    ) -> Result<Self> {
        if counts.len() != x_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: x_labels.len(),
                actual: counts.len(),
            });
        }
        if let Some(r) = counts.iter().find(|r| r.len() != y_labels.len()) {
            return Err(Error::DimensionMismatch {
                expected: y_labels.len(),
                actual: r.len(),
            });
        }
        let x_keep: Vec<usize> = (0..x_labels.len())
            .filter(|&i| counts[i].iter().any(|&c| c > 0))
            .collect();
        let y_keep: Vec<usize> = (0..y_labels.len())
            .filter(|&j| counts.iter().any(|r| r[j] > 0))
            .collect();
        if x_keep.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut flat = Vec::with_capacity(x_keep.len() * y_keep.len());
        for &i in &x_keep {
            flat.extend(y_keep.iter().map(|&j| counts[i][j]));
        }
        Ok(JointTable {
            x_levels: x_keep.iter().map(|&i| vec![i as u32]).collect(),
            y_levels: y_keep.iter().map(|&j| j as u32).collect(),
            x_labels: x_keep.iter().map(|&i| x_labels[i].clone()).collect(),
            y_labels: y_keep.iter().map(|&j| y_labels[j].clone()).collect(),
            total: flat.iter().sum(),
            counts: flat,
        })
    }

    pub fn x_levels(&self) -> &[Vec<u32>] {
        &self.x_levels
    }

    pub fn y_levels(&self) -> &[u32] {
        &self.y_levels
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn n_x(&self) -> usize {
        self.x_levels.len()
    }

    pub fn n_y(&self) -> usize {
        self.y_levels.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.n_y() + y]
    }

    pub fn row(&self, x: usize) -> &[u64] {
        let n_y = self.n_y();
        &self.counts[x * n_y..(x + 1) * n_y]
    }

    pub fn row_sum(&self, x: usize) -> u64 {
        self.row(x).iter().sum()
    }

    pub fn col_sum(&self, y: usize) -> u64 {
        (0..self.n_x()).map(|x| self.count(x, y)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.n_x()).map(|x| self.row_sum(x)).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n_y()];
        for x in 0..self.n_x() {
            for (s, c) in sums.iter_mut().zip(self.row(x)) {
                *s += c;
            }
        }
        sums
    }

    /// Counts as a dense matrix, one inner vector per x level.
    pub fn count_matrix(&self) -> Vec<Vec<u64>> {
        (0..self.n_x()).map(|x| self.row(x).to_vec()).collect()
    }

    pub fn x_index(&self, level: &[u32]) -> Option<usize> {
        self.x_levels.binary_search_by(|l| l.as_slice().cmp(level)).ok()
    }

    pub fn y_index(&self, code: u32) -> Option<usize> {
        self.y_levels.binary_search(&code).ok()
    }

    pub fn y_index_by_label(&self, label: &str) -> Option<usize> {
        self.y_labels.iter().position(|l| l == label)
    }

    fn nonempty(&self) -> Result<f64> {
        if self.total == 0 {
            Err(Error::EmptySupport)
        } else {
            Ok(self.total as f64)
        }
    }

    /// f(x, y).
    pub fn joint(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.count(x, y) as f64 / self.nonempty()?)
    }

    /// g(x) over `x_levels`.
    pub fn marginal_x(&self) -> Result<Vec<f64>> {
        let n = self.nonempty()?;
        Ok(self.row_sums().into_iter().map(|r| r as f64 / n).collect())
    }

    /// h(y) over `y_levels`.
    pub fn marginal_y(&self) -> Result<Vec<f64>> {
        let n = self.nonempty()?;
        Ok(self.col_sums().into_iter().map(|c| c as f64 / n).collect())
    }

    /// f(y | x) for the x level at index `x`.
    pub fn conditional_y_given_x(&self, x: usize) -> Result<Vec<f64>> {
        let row = self.row(x);
        let r: u64 = row.iter().sum();
        if r == 0 {
            return Err(Error::ZeroConditioningEvent);
        }
        Ok(row.iter().map(|&c| c as f64 / r as f64).collect())
    }
}

fn tuple_label(names: &[&str]) -> String {
    if names.len() == 1 {
        names[0].to_string()
    } else {
        format!("({})", names.join(","))
    }
}

/// Builds the joint table of `subset` against `target` over complete cases.
/// Every column involved must be categorical.
pub fn build_table(data: &Dataset, subset: &FeatureSubset, target: usize) -> Result<JointTable> {
    let features = subset
        .columns()
        .iter()
        .map(|&c| {
            data.column(c).as_categorical().ok_or_else(|| {
                Error::SchemaMismatch(format!("column '{}' is not categorical", data.name(c)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let target = data
        .column(target)
        .as_categorical()
        .ok_or_else(|| Error::SchemaMismatch("target is not categorical".into()))?;
    JointTable::tabulate(&features, target)
}
