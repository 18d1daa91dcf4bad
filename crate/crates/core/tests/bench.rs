use std::collections::BTreeMap;

use twinarm::bench::{emit_csv, format_sig4, run_bench, BenchConfig, MetricsRow, Stat, CSV_HEADER};
use twinarm::execution::{FeasibilityOracle, Method};

fn small_config() -> BenchConfig {
    BenchConfig {
        n_values: vec![8, 12],
        repetitions: 6,
        ..BenchConfig::default()
    }
}

#[test]
fn same_config_same_bytes() {
    let mut config = small_config();
    config.oracle = FeasibilityOracle::SeededRandom {
        p_fail: 0.2,
        seed: 5,
    };
    let a = emit_csv(&run_bench(&config).unwrap().rows);
    let b = emit_csv(&run_bench(&config).unwrap().rows);
    assert_eq!(a, b);
}

#[test]
fn one_row_per_method_and_n() {
    let config = BenchConfig {
        n_values: vec![12],
        repetitions: 4,
        ..BenchConfig::default()
    };
    let report = run_bench(&config).unwrap();
    let csv = emit_csv(&report.rows);
    assert_eq!(
        csv.lines().count(),
        1 + config.methods.len() * config.n_values.len()
    );
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn methods_share_the_scene_set() {
    let report = run_bench(&small_config()).unwrap();
    let mut hashes: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for r in &report.runs {
        hashes
            .entry((r.n, r.repetition))
            .or_default()
            .push(r.scene_hash);
    }
    assert_eq!(hashes.len(), 12);
    for list in hashes.values() {
        assert_eq!(list.len(), Method::ALL.len());
        assert!(list.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn csv_row_round_trips_through_a_line_parser() {
    let report = run_bench(&small_config()).unwrap();
    let csv = emit_csv(&report.rows);
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    for (line, row) in csv.lines().skip(1).zip(&report.rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), header.len());
        assert_eq!(fields[0], row.method.to_string());
        assert_eq!(fields[1].parse::<usize>().unwrap(), row.n);
        assert_eq!(fields[2], format_sig4(row.turn_takings.mean));
        assert_eq!(fields[8], format_sig4(row.success_rate));
        let rate: f64 = fields[4].parse().unwrap();
        assert!((rate - row.rate.mean).abs() <= row.rate.mean.abs() * 1e-3 + 1e-9);
    }
}

#[test]
fn metrics_are_consistent_with_runs() {
    let report = run_bench(&small_config()).unwrap();
    for row in &report.rows {
        let runs: Vec<_> = report.runs_for(row.method, row.n).collect();
        let ok: Vec<_> = runs.iter().filter(|r| r.log.success).collect();
        assert!((row.success_rate - 100.0 * ok.len() as f64 / runs.len() as f64).abs() < 1e-9);
        let relocated: Vec<f64> = ok.iter().map(|r| r.log.relocations.len() as f64).collect();
        assert_eq!(row.relocated, Stat::of(&relocated));
        // rates skip single-relocation runs
        let rates: Vec<f64> = ok
            .iter()
            .filter(|r| r.log.relocations.len() > 1)
            .map(|r| {
                let a = r.log.assignees();
                let t = a.windows(2).filter(|w| w[0] != w[1]).count();
                100.0 * t as f64 / (a.len() - 1) as f64
            })
            .collect();
        assert_eq!(row.rate, Stat::of(&rates));
        assert!(row.turn_takings.sd >= 0.0 && row.makespan.sd >= 0.0);
    }
}

#[test]
fn empty_group_prints_nan() {
    let row = MetricsRow::aggregate(Method::Search, 4, &[]);
    assert!(row.rate.mean.is_nan());
    assert_eq!(
        emit_csv(&[row]).lines().nth(1).unwrap(),
        "search,4,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan"
    );
}
