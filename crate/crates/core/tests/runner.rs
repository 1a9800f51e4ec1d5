use std::collections::BTreeMap;

use paclab::experiments::runner::{csv_body, nearest_rank, run};
use paclab::experiments::ExperimentConfig;

const SWEEP: &str = r#"
kind = "upper_sweep"
seed = 5
trials = 30

[consts]
c_z = 0.01

[grid]
n = [300, 3000]
tau = [0.05, 0.1]

[class]
fixtures = ["two_experts", "dsubset_adversary", "noisy_thresholds"]
"#;

fn parse_rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body = csv_body(csv);
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn summary_recomputes_from_csv() {
    let cfg = ExperimentConfig::parse(SWEEP).unwrap();
    let report = run(&cfg, Some(2)).unwrap();
    let (header, rows) = parse_rows(&report.to_csv(0));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (cell, alg, excess) = (col("cell"), col("algorithm"), col("excess_error"));
    let mut groups: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        groups
            .entry((r[cell].parse().unwrap(), r[alg].clone()))
            .or_default()
            .push(r[excess].parse().unwrap());
    }
    assert_eq!(report.summary.len(), groups.len());
    let cells = 3 * 2 * 2;
    for c in 0..cells {
        for (k, a) in ["erm", "erm_candidate", "disagreeing_experts"].iter().enumerate() {
            let values = &groups[&(c, a.to_string())];
            let line = &report.summary[3 * c + k];
            assert_eq!(line.metric, format!("excess_error:{a}"));
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            assert!((line.mean - mean).abs() <= 1e-9);
            assert!((line.p95 - nearest_rank(values, 0.95)).abs() <= 1e-9);
        }
    }
    for r in &rows {
        if r[alg] != "disagreeing_experts" || r[col("selected")] == "erm" {
            assert!(r[excess].parse::<f64>().unwrap() >= -1e-12);
        }
    }
}

#[test]
fn rows_regenerate_from_seed() {
    let cfg = ExperimentConfig::parse(SWEEP).unwrap();
    let a = run(&cfg, Some(1)).unwrap();
    let b = run(&cfg, Some(3)).unwrap();
    assert_eq!(a.table, b.table);
    let fewer = ExperimentConfig::parse(&SWEEP.replace("trials = 30", "trials = 10")).unwrap();
    let c = run(&fewer, Some(1)).unwrap();
    let trial = a.table.column("trial_id").unwrap();
    let hash = a.table.column("config_hash").unwrap();
    let strip = |r: &Vec<String>| {
        let mut r = r.clone();
        r[hash].clear();
        r
    };
    let prefix: Vec<_> = a
        .table
        .rows
        .iter()
        .filter(|r| r[trial].parse::<u64>().unwrap() < 10)
        .map(strip)
        .collect();
    let others: Vec<_> = c.table.rows.iter().map(strip).collect();
    assert_eq!(prefix, others);
}

#[test]
fn realizable_erm_excess_vanishes() {
    let text = "kind = \"upper_sweep\"\nseed = 2\ntrials = 40\n[grid]\nn = [30, 300, 3000]\n[class]\nfixtures = [\"realizable_uniform\"]\n";
    let report = run(&ExperimentConfig::parse(text).unwrap(), None).unwrap();
    let erm: Vec<f64> = report
        .summary
        .iter()
        .filter(|s| s.metric == "excess_error:erm")
        .map(|s| s.mean)
        .collect();
    assert_eq!(erm.len(), 3);
    assert!(erm[0] >= erm[1] && erm[1] >= erm[2]);
    assert_eq!(erm[2], 0.0);
}

#[test]
fn lower_bound_summary_has_rate_and_stderr() {
    let text = "kind = \"lower_bound\"\nseed = 3\ntrials = 400\n[grid]\nn = [10000]\nd = [2]\n[lower_bound]\nu = 50\n";
    let report = run(&ExperimentConfig::parse(text).unwrap(), None).unwrap();
    let line = report.summary.iter().find(|s| s.metric == "failure_rate").unwrap();
    assert_eq!(line.count, 400);
    assert!(line.mean > 1.0 / 16.0);
    assert!((line.stderr - (line.mean * (1.0 - line.mean) / 400.0).sqrt()).abs() < 1e-12);
    assert_eq!(report.table.rows.len(), 400);
}

#[test]
fn lower_bound_tau_grid_uses_fixed_point() {
    let text = "kind = \"lower_bound\"\nseed = 3\ntrials = 20\n[grid]\nn = [10000]\nd = [2]\ntau = [0.05]\n";
    let report = run(&ExperimentConfig::parse(text).unwrap(), None).unwrap();
    let u = report.table.column("u").unwrap();
    assert!(report.table.rows.iter().all(|r| r[u] == "40"));
}

#[test]
fn trace_rows_follow_iterations() {
    let text = SWEEP.replace("trials = 30", "trials = 3\ntrace_output = \"t.csv\"");
    let report = run(&ExperimentConfig::parse(&text).unwrap(), None).unwrap();
    let trace = report.trace.unwrap();
    assert_eq!(trace.header[..3], ["cell", "trial_id", "i"]);
    let reason = trace.column("break_reason").unwrap();
    let ends = trace.rows.iter().filter(|r| !r[reason].is_empty()).count();
    assert_eq!(ends, 12 * 3);
}

#[test]
fn identities_run() {
    let text = "kind = \"identities\"\nseed = 4\ntrials = 100\n";
    let report = run(&ExperimentConfig::parse(text).unwrap(), None).unwrap();
    assert_eq!(report.table.rows.len(), 500);
    assert!(report
        .summary
        .iter()
        .filter(|s| s.metric == "failure_rate")
        .all(|s| s.mean == 0.0));
}
