//! Executes a validated config and renders CSV and summaries.

use std::time::Instant;

use rayon::prelude::*;

use crate::adversary::{
    estimate_failure_probability, fnv1a64, skew_for, choose_parameters, FixedPrefix, LeastFrequent, ProperLearner,
    TruthOracle,
};
use crate::erm::{erm_from_mistakes, mistake_counts};
use crate::error::{PacError, Result};
use crate::experiments::config::{ExperimentConfig, ExperimentKind};
use crate::experiments::fixtures::{make_fixture, make_fixture_at_tau, Fixture};
use crate::experiments::identities::run_identity_suite;
use crate::experts::{train, CoreTrace, FinalClassifier, LearnerParams, Selected};
use crate::measures::true_error_unchecked;
use crate::model::{sample_dataset, RngStream};

/// Tool version written into CSV metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack for the nonnegative-excess invariant of proper outputs.
pub const EXCESS_TOLERANCE: f64 = 1e-12;

/// Worker count: `explicit`, else `PACLAB_THREADS`, else rayon's default.
pub fn resolve_threads(explicit: Option<usize>) -> Result<Option<usize>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var("PACLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| PacError::Validation(format!("PACLAB_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a dedicated pool with `threads` workers (default size if `None`).
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| PacError::Validation(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// A rendered table: header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// RFC-4180 text with LF line endings, header first.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Mean, standard error and nearest-rank 95th percentile of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLine {
    pub group: String,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
    pub p95: f64,
}

impl SummaryLine {
    pub fn from_values(group: impl Into<String>, metric: impl Into<String>, values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            group: group.into(),
            metric: metric.into(),
            count,
            mean,
            stderr: (var / count as f64).sqrt(),
            p95: nearest_rank(values, 0.95),
        }
    }
}

/// Nearest-rank percentile.
pub fn nearest_rank(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config_hash: u64,
    pub table: Table,
    pub trace: Option<Table>,
    pub summary: Vec<SummaryLine>,
}

impl RunReport {
    /// `#` metadata lines; `timestamp` is the only field that varies between identical runs.
    pub fn metadata(&self, timestamp: u64) -> String {
        format!(
            "# paclab {VERSION}\n# kind={}\n# seed={}\n# config_hash={:016x}\n# timestamp={timestamp}\n",
            self.kind.as_str(),
            self.seed,
            self.config_hash
        )
    }

    /// Metadata followed by the table.
    pub fn to_csv(&self, timestamp: u64) -> String {
        format!("{}{}", self.metadata(timestamp), self.table.to_csv())
    }

    pub fn summary_text(&self) -> String {
        let mut out = format!(
            "{:<48} {:<34} {:>6} {:>12} {:>12} {:>12}\n",
            "group", "metric", "count", "mean", "stderr", "p95"
        );
        for s in &self.summary {
            out.push_str(&format!(
                "{:<48} {:<34} {:>6} {:>12.6} {:>12.6} {:>12.6}\n",
                s.group, s.metric, s.count, s.mean, s.stderr, s.p95
            ));
        }
        out
    }
}

/// Lines after the `#` metadata block.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Seconds since the Unix epoch.
pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Runs the experiment on a pool sized by [`resolve_threads`]`(threads)`.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunReport> {
    let threads = resolve_threads(threads)?;
    with_pool(threads, || match cfg.kind {
        ExperimentKind::UpperSweep => upper_sweep(cfg),
        ExperimentKind::LowerBound => lower_bound(cfg),
        ExperimentKind::Identities => identities(cfg),
    })?
}

/// Per-cell seed derived from the run seed and the cell index.
pub fn cell_seed(seed: u64, cell: usize) -> u64 {
    let mut bytes = seed.to_le_bytes().to_vec();
    bytes.extend_from_slice(&(cell as u64).to_le_bytes());
    fnv1a64(&bytes)
}

struct SweepCell {
    fixture: Fixture,
    n: usize,
    tau_target: Option<f64>,
}

impl SweepCell {
    fn label(&self) -> String {
        match self.tau_target {
            Some(t) => format!("{} n={} tau={t}", self.fixture.name, self.n),
            None => format!("{} n={}", self.fixture.name, self.n),
        }
    }
}

/// Rows of one trial of an upper sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrial {
    pub cell: usize,
    pub trial: u64,
    /// `(algorithm, true error, excess, break_reason, r, selected)`.
    pub outcomes: Vec<(&'static str, f64, f64, String, usize, String)>,
    pub runtime_ms: u64,
    pub trace: CoreTrace,
}

/// The algorithms of an upper sweep: ERM on the whole sample, the ERM
/// candidate of the validation split (ERM on the second third) and the
/// validated learner.
pub const SWEEP_ALGORITHMS: [&str; 3] = ["erm", "erm_candidate", "disagreeing_experts"];

fn sweep_trial(cfg: &ExperimentConfig, cells: &[SweepCell], c: usize, trial: u64) -> Result<SweepTrial> {
    let cell = &cells[c];
    let f = &cell.fixture;
    let start = Instant::now();
    let cs = cell_seed(cfg.seed, c);
    let data = sample_dataset(&f.dist, cell.n, &RngStream::new(cs, 2 * trial))?;
    let params = LearnerParams::new(f.vc.max(1), cfg.delta, cfg.consts);
    let out = train(&data, &f.members, &params, &RngStream::new(cs, 2 * trial + 1))?;

    let counts = data.counts();
    let full = erm_from_mistakes(&mistake_counts(&f.members, &counts), counts.total);
    let proper = |idx: usize, name: &str| -> Result<f64> {
        let err = true_error_unchecked(&f.members[idx], &f.dist);
        if err - f.tau < -EXCESS_TOLERANCE {
            return Err(PacError::InvariantViolation(format!(
                "{name} output has error {err} below class minimum {}",
                f.tau
            )));
        }
        Ok(err)
    };
    let erm_err = proper(full.index, "erm")?;
    let cand_err = proper(out.erm.index, "erm_candidate")?;
    let de_err = match &out.classifier {
        FinalClassifier::Proper { index, .. } => proper(*index, "disagreeing_experts")?,
        FinalClassifier::Composite(c) => true_error_unchecked(&c.to_hypothesis(), &f.dist),
    };
    let runtime_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let reason = out.trace.break_reason.as_str().to_string();
    let selected = match out.selected {
        Selected::Core => "core",
        Selected::Erm => "erm",
    };
    Ok(SweepTrial {
        cell: c,
        trial,
        outcomes: vec![
            ("erm", erm_err, erm_err - f.tau, String::new(), 0, String::new()),
            ("erm_candidate", cand_err, cand_err - f.tau, String::new(), 0, String::new()),
            (
                "disagreeing_experts",
                de_err,
                de_err - f.tau,
                reason,
                out.trace.r,
                selected.to_string(),
            ),
        ],
        runtime_ms,
        trace: out.trace.without_samples(),
    })
}

fn sweep_cells(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    let class = cfg.class.as_ref().expect("validated");
    let mut cells = Vec::new();
    for name in &class.fixtures {
        let taus: Vec<Option<f64>> = if cfg.grid.tau.is_empty() {
            vec![None]
        } else {
            cfg.grid.tau.iter().map(|&t| Some(t)).collect()
        };
        for tau in taus {
            let fixture = match tau {
                None => make_fixture(name)?,
                Some(t) => make_fixture_at_tau(name, t)?,
            };
            for &n in &cfg.grid.n {
                cells.push(SweepCell {
                    fixture: fixture.clone(),
                    n,
                    tau_target: tau,
                });
            }
        }
    }
    Ok(cells)
}

/// All trials of an upper sweep in canonical `(cell, trial)` order.
pub fn sweep_trials(cfg: &ExperimentConfig) -> Result<(Vec<String>, Vec<SweepTrial>)> {
    let cells = sweep_cells(cfg)?;
    let labels = cells.iter().map(SweepCell::label).collect();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |t| (c, t)))
        .collect();
    let trials = jobs
        .into_par_iter()
        .map(|(c, t)| sweep_trial(cfg, &cells, c, t))
        .collect::<Result<Vec<_>>>()?;
    Ok((labels, trials))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn upper_sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    let cells = sweep_cells(cfg)?;
    let (labels, trials) = sweep_trials(cfg)?;
    let hash = format!("{:016x}", cfg.config_hash());
    let mut table = Table::new(&[
        "config_hash",
        "cell",
        "trial_id",
        "fixture",
        "n",
        "tau_target",
        "algorithm",
        "tau_true",
        "true_error",
        "excess_error",
        "break_reason",
        "r",
        "selected",
        "runtime_ms",
    ]);
    let mut trace = Table::new(&[
        "cell", "trial_id", "i", "T_size", "gamma_i", "H_size", "pair_i", "pair_j", "break_reason",
    ]);
    for t in &trials {
        let cell = &cells[t.cell];
        for (alg, err, excess, reason, r, selected) in &t.outcomes {
            table.rows.push(vec![
                hash.clone(),
                t.cell.to_string(),
                t.trial.to_string(),
                cell.fixture.name.clone(),
                cell.n.to_string(),
                fmt_opt(cell.tau_target),
                alg.to_string(),
                cell.fixture.tau.to_string(),
                err.to_string(),
                excess.to_string(),
                reason.clone(),
                r.to_string(),
                selected.clone(),
                t.runtime_ms.to_string(),
            ]);
        }
        trace.rows.extend(trace_rows(t.cell, t.trial, &t.trace));
    }
    let mut summary = Vec::new();
    for (c, label) in labels.iter().enumerate() {
        for (k, alg) in SWEEP_ALGORITHMS.iter().enumerate() {
            let values: Vec<f64> = trials.iter().filter(|t| t.cell == c).map(|t| t.outcomes[k].2).collect();
            summary.push(SummaryLine::from_values(label.clone(), format!("excess_error:{alg}"), &values));
        }
    }
    Ok(RunReport {
        kind: cfg.kind,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        table,
        trace: cfg.trace_output.as_ref().map(|_| trace),
        summary,
    })
}

/// One row per loop iteration.
pub fn trace_rows(cell: usize, trial: u64, trace: &CoreTrace) -> Vec<Vec<String>> {
    trace
        .iterations
        .iter()
        .map(|it| {
            let (pi, pj) = it.pair.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            let last = it.i == trace.iterations.len();
            vec![
                cell.to_string(),
                trial.to_string(),
                it.i.to_string(),
                it.t_size.to_string(),
                fmt_opt(it.gamma),
                it.h_size.map_or(String::new(), |h| h.to_string()),
                pi,
                pj,
                if last { trace.break_reason.as_str().to_string() } else { String::new() },
            ]
        })
        .collect()
}

fn learner_by_name(name: &str) -> Result<&'static dyn ProperLearner> {
    match name {
        "least_frequent" => Ok(&LeastFrequent),
        "fixed_prefix" => Ok(&FixedPrefix),
        "truth_oracle" => Ok(&TruthOracle),
        other => Err(PacError::Validation(format!("unknown learner `{other}`"))),
    }
}

/// `(u, d, n, alpha)` of every lower-bound cell in canonical order.
pub fn lower_bound_cells(cfg: &ExperimentConfig) -> Result<Vec<(usize, usize, usize, f64)>> {
    let lb = cfg.lower_bound.clone().unwrap_or_default();
    let g = &cfg.grid;
    let mut cells = Vec::new();
    for &n in &g.n {
        for &d in &g.d {
            if !g.tau.is_empty() {
                for &tau in &g.tau {
                    let (u, a) = choose_parameters(tau, d, n, lb.c_prime)?;
                    cells.push((u, d, n, a));
                }
            } else {
                let u = lb.u.expect("validated");
                if g.alpha.is_empty() {
                    cells.push((u, d, n, skew_for(u, d, n, lb.c_prime)));
                } else {
                    cells.extend(g.alpha.iter().map(|&a| (u, d, n, a)));
                }
            }
        }
    }
    Ok(cells)
}

fn lower_bound(cfg: &ExperimentConfig) -> Result<RunReport> {
    let lb = cfg.lower_bound.clone().unwrap_or_default();
    let learner = learner_by_name(&lb.learner)?;
    let hash = format!("{:016x}", cfg.config_hash());
    let mut table = Table::new(&[
        "config_hash",
        "cell",
        "trial_id",
        "u",
        "d",
        "n",
        "truth_index_hash",
        "failed",
        "learner_error",
        "tau",
        "alpha",
    ]);
    let mut summary = Vec::new();
    for (c, (u, d, n, alpha)) in lower_bound_cells(cfg)?.into_iter().enumerate() {
        let est = estimate_failure_probability(u, d, n, alpha, cfg.trials, cell_seed(cfg.seed, c), learner)?;
        for r in &est.rows {
            table.rows.push(vec![
                hash.clone(),
                c.to_string(),
                r.trial_id.to_string(),
                u.to_string(),
                d.to_string(),
                n.to_string(),
                format!("{:016x}", r.truth_index_hash),
                u8::from(r.failed).to_string(),
                r.learner_error.to_string(),
                r.tau.to_string(),
                r.alpha.to_string(),
            ]);
        }
        let group = format!("{} u={u} d={d} n={n} alpha={alpha:.6}", lb.learner);
        let failed: Vec<f64> = est.rows.iter().map(|r| f64::from(u8::from(r.failed))).collect();
        let mut line = SummaryLine::from_values(group.clone(), "failure_rate", &failed);
        line.stderr = est.stderr;
        summary.push(line);
        let excess: Vec<f64> = est.rows.iter().map(|r| r.learner_error - r.tau).collect();
        summary.push(SummaryLine::from_values(group, "excess_error", &excess));
    }
    Ok(RunReport {
        kind: cfg.kind,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        table,
        trace: None,
        summary,
    })
}

fn identities(cfg: &ExperimentConfig) -> Result<RunReport> {
    let rows = run_identity_suite(cfg.trials, cfg.seed)?;
    let mut table = Table::new(&["instance", "check", "residual", "passed"]);
    for r in &rows {
        table.rows.push(vec![
            r.instance.to_string(),
            r.check.to_string(),
            r.residual.to_string(),
            u8::from(r.passed).to_string(),
        ]);
    }
    let mut summary = Vec::new();
    for check in crate::experiments::identities::CHECKS {
        let res: Vec<f64> = rows.iter().filter(|r| r.check == check).map(|r| r.residual).collect();
        let fails: Vec<f64> = rows.iter().filter(|r| r.check == check).map(|r| f64::from(u8::from(!r.passed))).collect();
        summary.push(SummaryLine::from_values(check, "residual", &res));
        summary.push(SummaryLine::from_values(check, "failure_rate", &fails));
    }
    Ok(RunReport {
        kind: cfg.kind,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        table,
        trace: None,
        summary,
    })
}

/// The built-in self test: an identity run, a small upper sweep and a
/// small lower-bound run, keyed by file stem.
pub fn selftest_configs(seed: u64, instances: usize) -> Vec<(&'static str, ExperimentConfig)> {
    let text = [
        (
            "identities",
            format!("kind = \"identities\"\nseed = {seed}\ntrials = {instances}\n"),
        ),
        (
            "upper_sweep",
            format!(
                "kind = \"upper_sweep\"\nseed = {seed}\ntrials = 8\n[consts]\nc_z = 0.01\n[grid]\nn = [300, 1200]\ntau = [0.05, 0.1]\n[class]\nfixtures = [\"two_experts\", \"dsubset_adversary\"]\n"
            ),
        ),
        (
            "lower_bound",
            format!("kind = \"lower_bound\"\nseed = {seed}\ntrials = 200\n[grid]\nn = [500]\nd = [2]\n[lower_bound]\nu = 20\n"),
        ),
    ];
    text.into_iter()
        .map(|(k, t)| (k, ExperimentConfig::parse(&t).expect("built-in config is valid")))
        .collect()
}

/// Runs every self-test config.
pub fn selftest(seed: u64, instances: usize, threads: Option<usize>) -> Result<Vec<(&'static str, RunReport)>> {
    selftest_configs(seed, instances)
        .into_iter()
        .map(|(k, cfg)| run(&cfg, threads).map(|r| (k, r)))
        .collect()
}
