//! Dependence measures of the local lift dependence scale.
//!
//! Three resolutions over one [`JointTable`]:
//! - global: normalized mutual information `η = I(X,Y) / H(Y)`;
//! - window: `η(Y | W)`, the expected Kullback–Leibler divergence of
//!   `f(·|x)` from `h` over `x ∈ W`, divided by the expected cross-entropy;
//! - point: the lift `L(x, y) = f(x, y) / (g(x) h(y))`.
//!
//! Everything is in nats. Terms with zero probability contribute zero.

use crate::distribution::JointTable;
use crate::error::{Error, Result};

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Shannon entropy `−Σ p log p` of a probability vector.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".into()));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("sums to {sum}")));
    }
    Ok(-p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>())
}

fn require_support(t: &JointTable) -> Result<f64> {
    if t.total() == 0 {
        Err(Error::EmptySupport)
    } else {
        Ok(t.total() as f64)
    }
}

/// Ratio `c·N / (r·s)` from integer counts; exact when the true lift is 1.
fn lift_from_counts(cell: u64, row: u64, col: u64, total: u64) -> f64 {
    if cell == 0 || row == 0 || col == 0 {
        return 0.0;
    }
    (cell as f64 * total as f64) / (row as f64 * col as f64)
}

/// `H(Y | X) = −Σ f(x,y) log f(y|x)`.
pub fn conditional_entropy(t: &JointTable) -> Result<f64> {
    let n = require_support(t)?;
    let mut acc = 0.0;
    for x in 0..t.n_x() {
        let r = t.row_sum(x) as f64;
        for &c in t.row(x).iter().filter(|&&c| c > 0) {
            let c = c as f64;
            acc -= c / n * (c / r).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// `I(X, Y) = Σ f(x,y) log(f(x,y) / (g(x) h(y)))`.
pub fn mutual_information(t: &JointTable) -> Result<f64> {
    let n = require_support(t)?;
    let rows = t.row_sums();
    let cols = t.col_sums();
    let mut acc = 0.0;
    for (x, &r) in rows.iter().enumerate() {
        for (y, &s) in cols.iter().enumerate() {
            let c = t.count(x, y);
            if c > 0 {
                acc += c as f64 / n * lift_from_counts(c, r, s, t.total()).ln();
            }
        }
    }
    Ok(acc.max(0.0))
}

/// Global `η = I(X,Y) / H(Y)`; 1 when `H(Y) = 0`.
pub fn eta_global(t: &JointTable) -> Result<f64> {
    let h = entropy(&t.marginal_y()?)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    let mi = mutual_information(t)?;
    // Rounding can push a perfect dependence a ulp past 1.
    Ok((mi / h).clamp(0.0, 1.0))
}

/// The lift function over every observed cell of a table.
#[derive(Clone, Debug)]
pub struct LiftTable<'a> {
    base: &'a JointTable,
    values: Vec<f64>,
}

impl<'a> LiftTable<'a> {
    pub fn base(&self) -> &'a JointTable {
        self.base
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.base.n_y() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let n_y = self.base.n_y();
        &self.values[x * n_y..(x + 1) * n_y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the x level with the largest lift at column `y`; ties go to
    /// the earliest level.
    pub fn argmax_at(&self, y: usize) -> Option<(usize, f64)> {
        (0..self.base.n_x()).fold(None, |best, x| {
            let v = self.get(x, y);
            match best {
                Some((_, b)) if b >= v => best,
                _ => Some((x, v)),
            }
        })
    }
}

/// `L(x, y)` for every observed cell; zero-count cells get 0.
pub fn lift(t: &JointTable) -> Result<LiftTable<'_>> {
    require_support(t)?;
    let rows = t.row_sums();
    let cols = t.col_sums();
    let mut values = Vec::with_capacity(t.n_x() * t.n_y());
    for (x, &r) in rows.iter().enumerate() {
        for (y, &s) in cols.iter().enumerate() {
            values.push(lift_from_counts(t.count(x, y), r, s, t.total()));
        }
    }
    Ok(LiftTable { base: t, values })
}

/// A nonempty set of x levels of one table, stored as sorted level indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window {
    members: Vec<usize>,
}

impl Window {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidConfig("window must be nonempty".into()));
        }
        Ok(Window { members })
    }

    /// The whole observed range of a table with `n_levels` x levels.
    pub fn full(n_levels: usize) -> Self {
        Window {
            members: (0..n_levels).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-level numerator and denominator terms of the windowed η, so that a
/// window's score is a pair of sums over its members.
#[derive(Clone, Debug)]
pub struct WindowScorer {
    divergence: Vec<f64>,
    cross_entropy: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl WindowScorer {
    pub fn new(t: &JointTable) -> Result<Self> {
        let n = require_support(t)?;
        let rows = t.row_sums();
        let cols = t.col_sums();
        let mut divergence = Vec::with_capacity(t.n_x());
        let mut cross_entropy = Vec::with_capacity(t.n_x());
        for (x, &r) in rows.iter().enumerate() {
            let (mut kl, mut ce) = (0.0, 0.0);
            for (y, &s) in cols.iter().enumerate() {
                let c = t.count(x, y);
                if c == 0 {
                    continue;
                }
                let f = c as f64 / n;
                kl += f * lift_from_counts(c, r, s, t.total()).ln();
                ce -= f * (s as f64 / n).ln();
            }
            divergence.push(kl);
            cross_entropy.push(ce);
        }
        Ok(WindowScorer {
            divergence,
            cross_entropy,
            counts: rows,
            total: t.total(),
        })
    }

    pub fn n_levels(&self) -> usize {
        self.counts.len()
    }

    /// Number of complete cases whose x level lies in `w`.
    pub fn support_count(&self, w: &Window) -> u64 {
        w.members().iter().map(|&x| self.counts[x]).sum()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn eta(&self, w: &Window) -> Result<f64> {
        if let Some(&bad) = w.members().iter().find(|&&x| x >= self.n_levels()) {
            return Err(Error::InvalidConfig(format!(
                "window level {bad} outside table with {} levels",
                self.n_levels()
            )));
        }
        if self.support_count(w) == 0 {
            return Err(Error::ZeroProbabilityWindow);
        }
        let num: f64 = w.members().iter().map(|&x| self.divergence[x]).sum();
        let den: f64 = w.members().iter().map(|&x| self.cross_entropy[x]).sum();
        if den == 0.0 {
            return Ok(1.0);
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

/// Windowed `η(Y | W)`; 1 when the restricted cross-entropy vanishes.
pub fn eta_window(t: &JointTable, w: &Window) -> Result<f64> {
    WindowScorer::new(t)?.eta(w)
}
