//! Reference contingency tables used as fixtures.
//!
//! Tables 1–3 come from a private student-performance dataset (weighted mean
//! grade tertile against joint exam-performance tertile); Table 7 is the
//! Covertype cover type against the quintile of the Mahalanobis distance of
//! (Elevation, Horizontal distance to hydrology, Horizontal distance to fire
//! points).

use crate::distribution::JointTable;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix} {i}")).collect()
}

fn tertile_table(counts: &[Vec<u64>]) -> JointTable {
    JointTable::from_counts(labels("Tertile", 3), labels("Tertile", 3), counts)
        .expect("fixture counts are well formed")
}

/// Mathematics and Physics (joint) vs weighted mean grade, Statistics 2011–2012.
pub fn table1() -> JointTable {
    tertile_table(&[vec![9, 13, 5], vec![9, 8, 9], vec![9, 5, 12]])
}

/// (Mathematics, Physics, Chemistry, Biology, Portuguese) vs weighted mean grade.
pub fn table2() -> JointTable {
    tertile_table(&[
        vec![1277, 1018, 533],
        vec![921, 951, 871],
        vec![630, 775, 1377],
    ])
}

/// Mathematics vs weighted mean grade.
pub fn table3() -> JointTable {
    tertile_table(&[
        vec![1398, 1111, 667],
        vec![843, 972, 847],
        vec![587, 661, 1267],
    ])
}

/// (E, HH, HF) quintile vs cover type 1..7.
pub fn table7() -> JointTable {
    JointTable::from_counts(
        labels("Quintile", 5),
        (1..=7).map(|i| i.to_string()).collect(),
        &[
            vec![3244, 54473, 35344, 2747, 3385, 17010, 0],
            vec![18816, 90872, 410, 0, 5663, 357, 84],
            vec![40195, 75562, 0, 0, 445, 0, 0],
            vec![70427, 45314, 0, 0, 0, 0, 461],
            vec![79158, 17080, 0, 0, 0, 0, 19965],
        ],
    )
    .expect("fixture counts are well formed")
}
