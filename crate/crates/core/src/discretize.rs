//! Quantile binning of continuous features.
//!
//! A single feature is cut at its own per-group empirical quantiles. A feature
//! subset is collapsed jointly: each row becomes its Mahalanobis distance to
//! the origin under the group's covariance, and those distances are cut at
//! the group's quantiles. The resulting levels are ordinal codes `0..=k`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
const PINV_RELATIVE_TOLERANCE: f64 = 1e-10;
/// Slack on `count >= p * n` so that e.g. `(1/3) * 9` still selects the third value.
const ECDF_SLACK: f64 = 1e-9;

/// Grouping values of a row, e.g. `["Statistics", "2011"]`. Empty for a
/// single global group.
pub type GroupKey = Vec<String>;

/// Strictly increasing cut probabilities in (0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileSpec {
    probs: Vec<f64>,
}

impl QuantileSpec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidConfig("at least one cut probability is required".into()));
        }
        if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "cut probabilities must lie in (0, 1): {probs:?}"
            )));
        }
        if probs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "cut probabilities must be strictly increasing: {probs:?}"
            )));
        }
        Ok(QuantileSpec { probs })
    }

    pub fn tertiles() -> Self {
        QuantileSpec {
            probs: vec![1.0 / 3.0, 2.0 / 3.0],
        }
    }

    pub fn quintiles() -> Self {
        QuantileSpec {
            probs: vec![0.2, 0.4, 0.6, 0.8],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_levels(&self) -> usize {
        self.probs.len() + 1
    }

    /// Display name of level `code` (0-based), e.g. "Quintile 5".
    pub fn level_name(&self, code: usize) -> String {
        let stem = match self.n_levels() {
            2 => "Half",
            3 => "Tertile",
            4 => "Quartile",
            5 => "Quintile",
            10 => "Decile",
            _ => "Level",
        };
        format!("{stem} {}", code + 1)
    }

    pub fn level_names(&self) -> Vec<String> {
        (0..self.n_levels()).map(|c| self.level_name(c)).collect()
    }
}

/// Cut values: `c_j` is the smallest observed value whose empirical CDF
/// reaches `p_j`.
pub fn quantile_cuts(values: &[f64], spec: &QuantileSpec) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("NaN among values to discretize".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(spec
        .probs
        .iter()
        .map(|&p| {
            let need = p * n as f64 - ECDF_SLACK;
            // Smallest i with (i + 1) >= need; ties resolve to the same value.
            let i = (need.ceil().max(1.0) as usize - 1).min(n - 1);
            sorted[i]
        })
        .collect())
}

/// Level of `v` under `cuts`: level j iff `c_{j-1} < v <= c_j`.
pub fn assign_level(v: f64, cuts: &[f64]) -> u32 {
    cuts.partition_point(|c| *c < v) as u32
}

/// Centered sample covariance (divisor n − 1) of the rows.
pub fn covariance(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: r.len(),
        });
    }
    // Accumulate in a canonical row order so the result does not depend on
    // how the rows were presented.
    let mut ordered: Vec<&Vec<f64>> = rows.iter().collect();
    ordered.sort_by(|a, b| lexicographic(a, b));
    let n = ordered.len() as f64;
    let mut mean = vec![0.0; d];
    for r in &ordered {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for r in &ordered {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix via its eigen-decomposition.
pub fn pseudo_inverse(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !cov.is_square() {
        return Err(Error::DimensionMismatch {
            expected: cov.nrows(),
            actual: cov.ncols(),
        });
    }
    let d = cov.nrows();
    let eig = SymmetricEigen::new(cov.clone());
    let largest = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let mut pinv = DMatrix::<f64>::zeros(d, d);
    if largest <= 0.0 {
        return Ok(pinv);
    }
    let cutoff = PINV_RELATIVE_TOLERANCE * largest;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            pinv += (v * v.transpose()) / lambda;
        }
    }
    Ok(pinv)
}

fn quadratic_distance(x: &[f64], pinv: &DMatrix<f64>) -> f64 {
    let v = DVector::from_column_slice(x);
    let q = (v.transpose() * pinv * &v)[(0, 0)];
    q.max(0.0).sqrt()
}

/// `sqrt(xᵀ Σ⁺ x)`.
pub fn mahalanobis_to_zero(x: &[f64], cov: &DMatrix<f64>) -> Result<f64> {
    if x.len() != cov.nrows() || !cov.is_square() {
        return Err(Error::DimensionMismatch {
            expected: cov.nrows(),
            actual: x.len(),
        });
    }
    Ok(quadratic_distance(x, &pseudo_inverse(cov)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceScale {
    /// Single feature: cuts are on the raw values.
    Raw,
    /// Cuts are on the Mahalanobis distance to the origin.
    Mahalanobis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub group: GroupKey,
    pub rows: usize,
    pub covariance: Vec<Vec<f64>>,
    pub cuts: Vec<f64>,
}

/// Everything needed to audit a joint discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationModel {
    pub features: Vec<String>,
    pub scale: DistanceScale,
    pub probs: Vec<f64>,
    /// Sorted by group key.
    pub groups: Vec<GroupModel>,
}

/// Collapses the columns of `rows` into one ordinal level per row.
///
/// `rows[i][j]` is feature `j` of row `i`; `groups[i]` is the row's group,
/// `None` when a grouping value is missing. Rows with any missing value get
/// a missing label.
pub fn discretize_joint(
    rows: &[Vec<Option<f64>>],
    groups: &[Option<GroupKey>],
    spec: &QuantileSpec,
) -> Result<(Vec<Option<u32>>, DiscretizationModel)> {
    if rows.len() != groups.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            actual: groups.len(),
        });
    }
    let d = rows.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: r.len(),
        });
    }

    let mut members: BTreeMap<&GroupKey, Vec<(usize, Vec<f64>)>> = BTreeMap::new();
    for (i, (row, group)) in rows.iter().zip(groups).enumerate() {
        let Some(group) = group else { continue };
        let Some(values) = row.iter().copied().collect::<Option<Vec<f64>>>() else {
            continue;
        };
        members.entry(group).or_default().push((i, values));
    }

    let scale = if d == 1 {
        DistanceScale::Raw
    } else {
        DistanceScale::Mahalanobis
    };
    let mut labels = vec![None; rows.len()];
    let mut models = Vec::with_capacity(members.len());
    for (group, entries) in members {
        if entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {group:?} has {} complete rows, need at least 2",
                entries.len()
            )));
        }
        let points: Vec<Vec<f64>> = entries.iter().map(|(_, v)| v.clone()).collect();
        let cov = covariance(&points)?;
        let scores: Vec<f64> = match scale {
            DistanceScale::Raw => points.iter().map(|p| p[0]).collect(),
            DistanceScale::Mahalanobis => {
                let pinv = pseudo_inverse(&cov)?;
                points.iter().map(|p| quadratic_distance(p, &pinv)).collect()
            }
        };
        let cuts = quantile_cuts(&scores, spec)?;
        for ((row, _), s) in entries.iter().zip(&scores) {
            labels[*row] = Some(assign_level(*s, &cuts));
        }
        models.push(GroupModel {
            group: group.clone(),
            rows: entries.len(),
            covariance: (0..d).map(|i| cov.row(i).iter().copied().collect()).collect(),
            cuts,
        });
    }
    Ok((
        labels,
        DiscretizationModel {
            features: Vec::new(),
            scale,
            probs: spec.probs.clone(),
            groups: models,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_group(n: usize) -> Vec<Option<GroupKey>> {
        vec![Some(Vec::new()); n]
    }

    fn labels_of(values: &[f64], spec: &QuantileSpec) -> Vec<u32> {
        let cuts = quantile_cuts(values, spec).unwrap();
        values.iter().map(|&v| assign_level(v, &cuts) + 1).collect()
    }

    #[test]
    fn spec_validation() {
        assert!(QuantileSpec::new(vec![]).is_err());
        assert!(QuantileSpec::new(vec![0.0, 0.5]).is_err());
        assert!(QuantileSpec::new(vec![0.5, 0.5]).is_err());
        assert!(QuantileSpec::new(vec![0.6, 0.4]).is_err());
        assert!(QuantileSpec::new(vec![0.5, 1.0]).is_err());
        assert_eq!(QuantileSpec::new(vec![0.2, 0.4, 0.6, 0.8]).unwrap(), QuantileSpec::quintiles());
        assert_eq!(QuantileSpec::quintiles().level_name(4), "Quintile 5");
        assert_eq!(QuantileSpec::tertiles().level_name(0), "Tertile 1");
    }

    #[test]
    fn tertiles_of_one_to_nine() {
        let v: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(quantile_cuts(&v, &QuantileSpec::tertiles()).unwrap(), vec![3.0, 6.0]);
        assert_eq!(labels_of(&v, &QuantileSpec::tertiles()), vec![1, 1, 1, 2, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn identical_values() {
        let v = vec![4.2; 7];
        assert_eq!(quantile_cuts(&v, &QuantileSpec::tertiles()).unwrap(), vec![4.2, 4.2]);
        assert!(labels_of(&v, &QuantileSpec::tertiles()).iter().all(|&l| l == 1));
    }

    #[test]
    fn quintiles_of_one_to_ten() {
        // ECDF(k) = k/10: the first value reaching 0.2 is 2, then 4, 6, 8.
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(
            quantile_cuts(&v, &QuantileSpec::quintiles()).unwrap(),
            vec![2.0, 4.0, 6.0, 8.0]
        );
        assert_eq!(
            labels_of(&v, &QuantileSpec::quintiles()),
            vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]
        );
    }

    #[test]
    fn empty_input() {
        assert!(matches!(quantile_cuts(&[], &QuantileSpec::tertiles()), Err(Error::EmptyInput)));
    }

    #[test]
    fn covariance_examples() {
        let rows = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]];
        let c = covariance(&rows).unwrap();
        // Mean (1, 1); Σ (±1)² / 3 = 4/3, cross terms cancel.
        assert!((c[(0, 0)] - 4.0 / 3.0).abs() < 1e-15);
        assert!((c[(1, 1)] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c[(0, 1)], 0.0);
        assert_eq!(c[(1, 0)], 0.0);

        let same = vec![vec![1.5, -2.0]; 3];
        assert!(covariance(&same).unwrap().iter().all(|&v| v == 0.0));

        let one_d: Vec<Vec<f64>> = [1.0, 3.0, 5.0].iter().map(|&v| vec![v]).collect();
        let c = covariance(&one_d).unwrap();
        assert_eq!(c.shape(), (1, 1));
        assert!((c[(0, 0)] - 4.0).abs() < 1e-15);

        assert!(matches!(covariance(&[vec![1.0]]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn mahalanobis_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!((mahalanobis_to_zero(&[3.0, 4.0], &id).unwrap() - 5.0).abs() < 1e-12);
        let var = DMatrix::from_element(1, 1, 4.0);
        assert!((mahalanobis_to_zero(&[-3.0], &var).unwrap() - 1.5).abs() < 1e-12);
        // Explicit inverse of diag(2, 0.5) is diag(1/2, 2).
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!((mahalanobis_to_zero(&[1.0, 1.0], &s).unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            mahalanobis_to_zero(&[1.0], &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn singular_covariance_uses_pseudo_inverse() {
        // Perfectly collinear columns: rank one.
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let cov = covariance(&rows).unwrap();
        let pinv = pseudo_inverse(&cov).unwrap();
        let back = &cov * &pinv * &cov;
        for (a, b) in back.iter().zip(cov.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        let d = mahalanobis_to_zero(&[1.0, 2.0], &cov).unwrap();
        assert!(d.is_finite() && d > 0.0);
        // Zero matrix maps everything to distance zero.
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(mahalanobis_to_zero(&[1.0, 2.0], &zero).unwrap(), 0.0);
    }

    #[test]
    fn one_feature_falls_back_to_raw_quantiles() {
        let rows: Vec<Vec<Option<f64>>> = (1..=10).map(|v| vec![Some(v as f64)]).collect();
        let (labels, model) =
            discretize_joint(&rows, &one_group(10), &QuantileSpec::quintiles()).unwrap();
        let got: Vec<u32> = labels.into_iter().map(|l| l.unwrap() + 1).collect();
        assert_eq!(got, vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]);
        assert_eq!(model.scale, DistanceScale::Raw);
        assert_eq!(model.groups[0].cuts, vec![2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn groups_use_their_own_cuts() {
        let mut rows = Vec::new();
        let mut groups = Vec::new();
        for v in 1..=9 {
            rows.push(vec![Some(v as f64)]);
            groups.push(Some(vec!["a".to_string()]));
            rows.push(vec![Some(1000.0 + 50.0 * v as f64)]);
            groups.push(Some(vec!["b".to_string()]));
        }
        let (labels, model) = discretize_joint(&rows, &groups, &QuantileSpec::tertiles()).unwrap();
        let a: Vec<u32> = labels.iter().step_by(2).map(|l| l.unwrap()).collect();
        let b: Vec<u32> = labels.iter().skip(1).step_by(2).map(|l| l.unwrap()).collect();
        assert_eq!(a, b);
        assert_eq!(model.groups.len(), 2);
        assert_eq!(model.groups[0].group, vec!["a".to_string()]);
    }

    #[test]
    fn missing_values_and_small_groups() {
        let rows = vec![
            vec![Some(1.0), Some(2.0)],
            vec![None, Some(1.0)],
            vec![Some(3.0), Some(1.0)],
            vec![Some(2.0), Some(5.0)],
        ];
        let (labels, _) = discretize_joint(&rows, &one_group(4), &QuantileSpec::tertiles()).unwrap();
        assert!(labels[1].is_none());
        assert!(labels.iter().enumerate().all(|(i, l)| i == 1 || l.is_some()));

        let groups = vec![
            Some(vec!["a".to_string()]),
            Some(vec!["a".to_string()]),
            Some(vec!["a".to_string()]),
            Some(vec!["b".to_string()]),
        ];
        assert!(matches!(
            discretize_joint(&rows, &groups, &QuantileSpec::tertiles()),
            Err(Error::InsufficientData(_))
        ));
    }

    fn distinct_points(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((1.0f64..100.0, 1.0f64..100.0), n)
    }

    proptest! {
        #[test]
        fn label_balance(values in prop::collection::btree_set(-1000i64..1000, 3..200)) {
            let v: Vec<f64> = values.into_iter().map(|x| x as f64).collect();
            let spec = QuantileSpec::quintiles();
            let cuts = quantile_cuts(&v, &spec).unwrap();
            let mut counts = [0usize; 5];
            for &x in &v {
                counts[assign_level(x, &cuts) as usize] += 1;
            }
            let ideal = v.len() as f64 / 5.0;
            for c in counts {
                prop_assert!((c as f64 - ideal).abs() <= 1.0, "{counts:?}");
            }
        }

        #[test]
        fn monotone_in_one_dimension(v in prop::collection::vec(-50.0f64..50.0, 2..100)) {
            let cuts = quantile_cuts(&v, &QuantileSpec::tertiles()).unwrap();
            for a in &v {
                for b in &v {
                    if a < b {
                        prop_assert!(assign_level(*a, &cuts) <= assign_level(*b, &cuts));
                    }
                }
            }
        }

        #[test]
        fn positive_rescaling_leaves_labels(points in distinct_points(40), sx in 0.01f64..100.0, sy in 0.01f64..100.0) {
            let rows: Vec<Vec<Option<f64>>> = points.iter().map(|&(x, y)| vec![Some(x), Some(y)]).collect();
            let scaled: Vec<Vec<Option<f64>>> = points.iter().map(|&(x, y)| vec![Some(sx * x), Some(sy * y)]).collect();
            let spec = QuantileSpec::tertiles();
            let (a, _) = discretize_joint(&rows, &one_group(40), &spec).unwrap();
            let (b, _) = discretize_joint(&scaled, &one_group(40), &spec).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn row_order_does_not_matter(points in distinct_points(30), rot in 0usize..30) {
            let rows: Vec<Vec<Option<f64>>> = points.iter().map(|&(x, y)| vec![Some(x), Some(y)]).collect();
            let mut shuffled = rows.clone();
            shuffled.rotate_left(rot);
            shuffled.reverse();
            let spec = QuantileSpec::quintiles();
            let (a, ma) = discretize_joint(&rows, &one_group(30), &spec).unwrap();
            let (b, mb) = discretize_joint(&shuffled, &one_group(30), &spec).unwrap();
            let mut b_back = b.clone();
            b_back.reverse();
            b_back.rotate_right(rot);
            prop_assert_eq!(a, b_back);
            prop_assert_eq!(ma, mb);
        }
    }
}
