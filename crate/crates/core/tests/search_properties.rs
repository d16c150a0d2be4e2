mod common;

use llds::metrics::eta_global;
use llds::search::subset_table;
use llds::{
    select_global, select_profile, select_window, CategoricalColumn, Column, Dataset, Error, Mode, QuantileSpec,
    SearchConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn duplicated(data: &Dataset) -> Dataset {
    let columns = (0..data.names().len())
        .map(|c| match data.column(c) {
            Column::Categorical(col) => {
                let codes: Vec<Option<u32>> = col.codes().iter().chain(col.codes()).copied().collect();
                Column::Categorical(CategoricalColumn::from_codes(codes, col.levels().to_vec()).unwrap())
            }
            Column::Continuous(v) => Column::Continuous(v.iter().chain(v.iter()).copied().collect()),
        })
        .collect();
    Dataset::new(data.names().to_vec(), columns, data.target(), data.group_columns().to_vec()).unwrap()
}

fn config(max_k: usize) -> SearchConfig {
    SearchConfig {
        max_k,
        top_n: 50,
        ..SearchConfig::default()
    }
}

#[test]
fn best_window_dominates_global_eta() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let m = rng.random_range(1..=4);
        let rows = rng.random_range(20..200);
        let data = common::random_binary_dataset(&mut rng, m, rows);
        let features: Vec<usize> = (1..=m).collect();
        let windows = select_window(&data, &features, &config(m)).unwrap();
        let best = windows.candidates[0].score;
        for c in select_global(&data, &features, &config(m)).unwrap().candidates {
            assert!(best >= c.score - 1e-12, "{best} < {}", c.score);
        }
    }
}

#[test]
fn raising_min_support_never_raises_top_lift() {
    let data = common::voting();
    let features: Vec<usize> = data.feature_columns().into_iter().take(8).collect();
    let mut previous = f64::INFINITY;
    for support in [0.0, 0.05, 0.1, 0.15, 0.25, 0.4] {
        let cfg = SearchConfig {
            min_support: support,
            ..config(3)
        };
        match select_profile(&data, &features, "republican", &cfg) {
            Ok(found) => {
                let top = found.candidates[0].score;
                assert!(top <= previous + 1e-12);
                previous = top;
            }
            Err(Error::NoFeasibleProfile) => previous = f64::NEG_INFINITY,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn duplicating_rows_keeps_rankings() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let m = rng.random_range(1..=3);
        let rows = rng.random_range(20..150);
        let data = common::random_binary_dataset(&mut rng, m, rows);
        let twice = duplicated(&data);
        let features: Vec<usize> = (1..=m).collect();
        let strip = |cs: Vec<llds::Candidate>| -> Vec<(Vec<usize>, String, i64)> {
            cs.into_iter()
                .map(|c| (c.subset.columns().to_vec(), c.locus.describe(), (c.score * 1e9).round() as i64))
                .collect()
        };
        let cfg = config(m);
        assert_eq!(
            strip(select_global(&data, &features, &cfg).unwrap().candidates),
            strip(select_global(&twice, &features, &cfg).unwrap().candidates)
        );
        assert_eq!(
            strip(select_window(&data, &features, &cfg).unwrap().candidates),
            strip(select_window(&twice, &features, &cfg).unwrap().candidates)
        );
        let y = data.target_column().levels()[0].clone();
        assert_eq!(
            strip(select_profile(&data, &features, &y, &cfg).unwrap().candidates),
            strip(select_profile(&twice, &features, &y, &cfg).unwrap().candidates)
        );
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let data = common::voting();
    let features = data.feature_columns();
    let run = |workers| {
        let cfg = SearchConfig {
            workers,
            max_window_cells: Some(2),
            ..config(3)
        };
        (
            select_global(&data, &features, &cfg).unwrap(),
            select_window(&data, &features, &cfg).unwrap(),
        )
    };
    let one = run(1);
    for w in [2, 3, 8] {
        assert_eq!(run(w), one);
    }
}

#[test]
fn complete_case_totals_follow_missingness() {
    let data = common::voting();
    let cfg = config(5);
    let idx = |names: &[&str]| -> Vec<usize> { names.iter().map(|n| data.column_index(n).unwrap()).collect() };
    let subset = llds::FeatureSubset::new(idx(&["WP", "PF", "SC", "ES", "CR"])).unwrap();
    let (table, _) = subset_table(&data, &subset, &cfg).unwrap();
    assert_eq!(table.total(), 342);
    let single = llds::FeatureSubset::new(idx(&["PF"])).unwrap();
    let (table, _) = subset_table(&data, &single, &cfg).unwrap();
    assert_eq!(table.total(), 435 - 11);
    assert!(eta_global(&table).unwrap() > 0.5);
}

#[test]
fn joint_mode_scores_are_invariant_to_feature_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 120;
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let y: Vec<&str> = a.iter().map(|&v| if v > 6.0 { "hi" } else { "lo" }).collect();
    let build = |sa: f64, sb: f64| {
        Dataset::new(
            vec!["y".into(), "a".into(), "b".into()],
            vec![
                Column::Categorical(CategoricalColumn::from_values(y.iter().map(|s| Some(*s)))),
                Column::Continuous(a.iter().map(|v| Some(v * sa)).collect()),
                Column::Continuous(b.iter().map(|v| Some(v * sb)).collect()),
            ],
            0,
            Vec::new(),
        )
        .unwrap()
    };
    let cfg = SearchConfig {
        mode: Mode::JointDiscretized {
            quantiles: QuantileSpec::quintiles(),
        },
        ..config(2)
    };
    let base = select_window(&build(1.0, 1.0), &[1, 2], &cfg).unwrap();
    let scaled = select_window(&build(1000.0, 0.01), &[1, 2], &cfg).unwrap();
    assert_eq!(base.candidates.len(), scaled.candidates.len());
    for (x, z) in base.candidates.iter().zip(&scaled.candidates) {
        assert_eq!(x.subset, z.subset);
        assert_eq!(x.locus, z.locus);
        assert!((x.score - z.score).abs() < 1e-9);
    }
}
