#![allow(dead_code)]

use std::path::PathBuf;

use llds::dataio::{load_csv, DatasetSchema};
use llds::{CategoricalColumn, Column, Dataset, JointTable};
use rand::Rng;

pub const VOTING_NAMES: [&str; 17] = [
    "party", "HI", "WP", "AB", "PF", "SA", "RG", "ST", "AN", "MM", "IM", "SC", "ES", "SR", "CR", "DF", "EA",
];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn voting_path() -> PathBuf {
    data_dir().join("house-votes-84.data")
}

pub fn voting_schema() -> DatasetSchema {
    DatasetSchema {
        names: Some(VOTING_NAMES.iter().map(|s| s.to_string()).collect()),
        header: false,
        ..DatasetSchema::new("party")
    }
}

pub fn voting() -> Dataset {
    load_csv(&voting_path(), &voting_schema()).expect("voting file loads")
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("l{i}")).collect()
}

/// A random table with every row and column observed.
pub fn random_table<R: Rng>(rng: &mut R) -> JointTable {
    loop {
        let nx = rng.random_range(1..=6);
        let ny = rng.random_range(2..=5);
        let counts: Vec<Vec<u64>> = (0..nx)
            .map(|_| (0..ny).map(|_| if rng.random_bool(0.2) { 0 } else { rng.random_range(1..60) }).collect())
            .collect();
        if counts.iter().flatten().any(|&c| c > 0) {
            return JointTable::from_counts(labels(nx), labels(ny), &counts).unwrap();
        }
    }
}

/// Outer product of positive integer margins: exactly independent.
pub fn independent_table<R: Rng>(rng: &mut R) -> JointTable {
    let nx = rng.random_range(1..=5);
    let ny = rng.random_range(2..=5);
    let a: Vec<u64> = (0..nx).map(|_| rng.random_range(1..20)).collect();
    let b: Vec<u64> = (0..ny).map(|_| rng.random_range(1..20)).collect();
    let counts: Vec<Vec<u64>> = a.iter().map(|&ai| b.iter().map(|&bj| ai * bj).collect()).collect();
    JointTable::from_counts(labels(nx), labels(ny), &counts).unwrap()
}

/// Random binary features with occasional missing values and a target that
/// leans on them.
pub fn random_binary_dataset<R: Rng>(rng: &mut R, features: usize, rows: usize) -> Dataset {
    let classes = rng.random_range(2..=3);
    let missing = if rng.random_bool(0.5) { 0.05 } else { 0.0 };
    let x: Vec<Vec<u8>> = (0..rows)
        .map(|_| (0..features).map(|_| rng.random_range(0..2)).collect())
        .collect();
    let y: Vec<String> = x
        .iter()
        .map(|row| {
            let lean = row.iter().map(|&v| v as usize).sum::<usize>();
            let c = if rng.random_bool(0.6) { lean % classes } else { rng.random_range(0..classes) };
            format!("c{c}")
        })
        .collect();
    let mut names = vec!["y".to_string()];
    let mut columns = vec![Column::Categorical(CategoricalColumn::from_values(
        y.iter().map(|s| Some(s.as_str())),
    ))];
    for f in 0..features {
        names.push(format!("x{f}"));
        let values: Vec<Option<String>> = x
            .iter()
            .map(|row| (!rng.random_bool(missing)).then(|| row[f].to_string()))
            .collect();
        columns.push(Column::Categorical(CategoricalColumn::from_values(
            values.iter().map(|v| v.as_deref()),
        )));
    }
    Dataset::new(names, columns, 0, Vec::new()).unwrap()
}
