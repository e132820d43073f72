//! Monte-Carlo experiment driver.
//!
//! For each receiver count `N` and trial `t` the driver samples one SFM,
//! hands the same Wants sets to every configured algorithm, verifies each
//! output against S-1/S-2, optionally labels it against the brute-force
//! optimum, and aggregates per `(N, algorithm)`.
//!
//! Seeds: trial `t` at receiver count `N` uses
//! `trial_seed = split_seed(split_seed(master, N), t)`. The instance is
//! drawn from `split_seed(trial_seed, 0)` and algorithm `i` (in config
//! order) gets `split_seed(trial_seed, i + 1)`. Results therefore do not
//! depend on the number of workers or on scheduling.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dlnc_core::baseline::{run_rlnc, StoppingRule};
use dlnc_core::gf::{Field, GfError};
use dlnc_core::graphic::build_solution;
use dlnc_core::model::{sample_instance, split_seed, ModelError, WantsCollection};
use dlnc_core::oracle::{brute_force_uq, label_case, CaseLabel, UqOutcome, DEFAULT_BUDGET};
use rayon::prelude::*;
use thiserror::Error;

use crate::report::{self, ReportError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported field in `{algo}`: {source}")]
    Field { algo: String, source: GfError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Output(#[from] ReportError),
    #[error("graphic output violates S-1 (N={receivers}, trial {trial}, seed {seed}, q={q})")]
    Soundness { receivers: usize, trial: usize, seed: u64, q: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    Graphic { prune: bool },
    Rlnc { rule: StoppingRule },
}

/// One algorithm/field combination, written `graphic:q=2`,
/// `graphic:q=8:prune`, `rlnc:q=8` or `rlnc:q=2:rule=global`.
/// `poly=<n>` selects a reduction polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgoSpec {
    pub kind: AlgoKind,
    pub q: u32,
    pub modulus: Option<u32>,
}

impl AlgoSpec {
    pub fn graphic(q: u32) -> Self {
        AlgoSpec { kind: AlgoKind::Graphic { prune: false }, q, modulus: None }
    }

    pub fn rlnc(q: u32) -> Self {
        AlgoSpec { kind: AlgoKind::Rlnc { rule: StoppingRule::Decodable }, q, modulus: None }
    }

    /// Name used in the `algo` CSV column.
    pub fn label(&self) -> &'static str {
        match self.kind {
            AlgoKind::Graphic { prune: false } => "graphic",
            AlgoKind::Graphic { prune: true } => "graphic-pruned",
            AlgoKind::Rlnc { rule: StoppingRule::Decodable } => "rlnc",
            AlgoKind::Rlnc { rule: StoppingRule::GlobalRank } => "rlnc-global",
        }
    }

    pub fn field(&self) -> Result<Field, ExperimentError> {
        Field::with_modulus(self.q, self.modulus)
            .map_err(|source| ExperimentError::Field { algo: self.to_string(), source })
    }
}

impl fmt::Display for AlgoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            AlgoKind::Graphic { .. } => "graphic",
            AlgoKind::Rlnc { .. } => "rlnc",
        };
        write!(f, "{name}:q={}", self.q)?;
        if let Some(m) = self.modulus {
            write!(f, ":poly={m}")?;
        }
        match self.kind {
            AlgoKind::Graphic { prune: true } => f.write_str(":prune"),
            AlgoKind::Rlnc { rule: StoppingRule::GlobalRank } => f.write_str(":rule=global"),
            _ => Ok(()),
        }
    }
}

impl FromStr for AlgoSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let mut q = None;
        let mut modulus = None;
        let mut prune = false;
        let mut rule = StoppingRule::Decodable;
        for part in parts {
            let parse = |v: &str| v.parse::<u32>().map_err(|_| format!("bad number `{v}` in `{s}`"));
            match part.split_once('=') {
                Some(("q", v)) => q = Some(parse(v)?),
                Some(("poly", v)) => modulus = Some(parse(v)?),
                Some(("rule", v)) => rule = v.parse().map_err(|e| format!("`{s}`: {e}"))?,
                None if part == "prune" => prune = true,
                _ => return Err(format!("unknown option `{part}` in `{s}`")),
            }
        }
        let q = q.ok_or_else(|| format!("`{s}` is missing q=<order>"))?;
        let kind = match name {
            "graphic" => AlgoKind::Graphic { prune },
            "rlnc" if !prune => AlgoKind::Rlnc { rule },
            "rlnc" => return Err("prune applies to graphic only".into()),
            _ => return Err(format!("unknown algorithm `{name}` (expected graphic or rlnc)")),
        };
        Ok(AlgoSpec { kind, q, modulus })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSettings {
    /// Only instances with `K <= cutoff` are labeled beyond Case-1.
    pub cutoff: usize,
    pub budget: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings { cutoff: 6, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub packets: usize,
    pub receivers: Vec<usize>,
    pub pe: f64,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<AlgoSpec>,
    pub oracle: Option<OracleSettings>,
    /// Directory for `trials.csv` and `summary.csv`.
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// `K = 15`, `N = 5, 10, .., 40`, `Pe = 0.2`.
    pub fn reference(trials: usize, seed: u64, algorithms: Vec<AlgoSpec>) -> Self {
        ExperimentConfig {
            packets: 15,
            receivers: (5..=40).step_by(5).collect(),
            pe: 0.2,
            trials,
            seed,
            algorithms,
            oracle: None,
            out: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub receivers: usize,
    pub seed: u64,
    pub max_wants: usize,
    pub algo: &'static str,
    pub q: u32,
    pub transmissions: usize,
    pub s1: bool,
    pub s2: bool,
    pub case: CaseLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub receivers: usize,
    pub algo: &'static str,
    pub q: u32,
    pub mean_u: f64,
    pub mean_wmax: f64,
    pub pct_perfect: f64,
    pub pct_within_one: f64,
    pub trials: usize,
    /// Half-width of the normal 95% interval for `mean_u`.
    pub ci95_u: f64,
}

impl SummaryRow {
    pub fn gap(&self) -> f64 {
        self.mean_u - self.mean_wmax
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn row(&self, receivers: usize, algo: &str, q: u32) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.receivers == receivers && r.algo == algo && r.q == q)
    }
}

pub fn trial_seed(master: u64, receivers: usize, trial: usize) -> u64 {
    split_seed(split_seed(master, receivers as u64), trial as u64)
}

fn validate(config: &ExperimentConfig) -> Result<Vec<Field>, ExperimentError> {
    if config.receivers.is_empty() {
        return Err(ExperimentError::Config("no receiver counts given".into()));
    }
    if config.receivers.contains(&0) {
        return Err(ExperimentError::Config("receiver counts must be positive".into()));
    }
    if !(0.0..=1.0).contains(&config.pe) {
        return Err(ModelError::ProbabilityOutOfRange(config.pe).into());
    }
    if config.packets == 0 || config.packets > dlnc_core::model::MAX_PACKETS {
        return Err(ExperimentError::Config(format!("K = {} is outside 1..=64", config.packets)));
    }
    if config.algorithms.is_empty() {
        return Err(ExperimentError::Config("no algorithms configured".into()));
    }
    if config.threads == Some(0) {
        return Err(ExperimentError::Config("threads must be positive".into()));
    }
    config.algorithms.iter().map(AlgoSpec::field).collect()
}

/// Runs one trial for every configured algorithm.
fn run_trial(
    config: &ExperimentConfig,
    fields: &[Field],
    receivers: usize,
    trial: usize,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let seed = trial_seed(config.seed, receivers, trial);
    let wants = sample_instance(receivers, config.packets, config.pe, split_seed(seed, 0))?.wants();
    let max_wants = wants.max_wants();
    let mut optimum: HashMap<(u32, Option<u32>), Option<usize>> = HashMap::new();
    let mut records = Vec::with_capacity(config.algorithms.len());
    for (i, (algo, field)) in config.algorithms.iter().zip(fields).enumerate() {
        let matrix = match algo.kind {
            AlgoKind::Graphic { prune } => build_solution(&wants, field, prune),
            AlgoKind::Rlnc { rule } => run_rlnc(&wants, field, rule, split_seed(seed, i as u64 + 1)).matrix,
        };
        let verdict = matrix.verify_solution(&wants).expect("matrix built for these wants");
        if matches!(algo.kind, AlgoKind::Graphic { .. }) && !verdict.s1_ok() {
            return Err(ExperimentError::Soundness { receivers, trial, seed, q: algo.q });
        }
        let u = matrix.rows();
        let uq = match config.oracle {
            Some(settings) if u != max_wants && verdict.s1_ok() && config.packets <= settings.cutoff => {
                *optimum.entry((algo.q, algo.modulus)).or_insert_with(|| optimal_rows(&wants, field, settings.budget))
            }
            _ => None,
        };
        let case = if verdict.s1_ok() { label_case(u, max_wants, uq) } else { CaseLabel::Unknown };
        records.push(TrialRecord {
            trial,
            receivers,
            seed,
            max_wants,
            algo: algo.label(),
            q: algo.q,
            transmissions: u,
            s1: verdict.s1_ok(),
            s2: verdict.s2_ok(),
            case,
        });
    }
    Ok(records)
}

fn optimal_rows(wants: &WantsCollection, field: &Field, budget: u64) -> Option<usize> {
    match brute_force_uq(wants, field, wants.packets(), budget) {
        Ok(UqOutcome::Optimal(u)) => Some(u),
        _ => None,
    }
}

/// Aggregates records per `(N, algorithm)` in config order.
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &n in &config.receivers {
        for algo in &config.algorithms {
            let (label, q) = (algo.label(), algo.q);
            let group: Vec<&TrialRecord> =
                records.iter().filter(|r| r.receivers == n && r.algo == label && r.q == q).collect();
            if rows.iter().any(|r: &SummaryRow| r.receivers == n && r.algo == label && r.q == q) {
                continue;
            }
            let count = group.len();
            let us: Vec<f64> = group.iter().map(|r| r.transmissions as f64).collect();
            let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
            let pct = |pred: &dyn Fn(&TrialRecord) -> bool| {
                if count == 0 {
                    0.0
                } else {
                    100.0 * group.iter().filter(|r| pred(r)).count() as f64 / count as f64
                }
            };
            let mean_u = mean(&us);
            let ci95_u = if count > 1 {
                let var = us.iter().map(|u| (u - mean_u).powi(2)).sum::<f64>() / (count - 1) as f64;
                1.96 * (var / count as f64).sqrt()
            } else {
                0.0
            };
            let wmax: Vec<f64> = group.iter().map(|r| r.max_wants as f64).collect();
            rows.push(SummaryRow {
                receivers: n,
                algo: label,
                q,
                mean_u,
                mean_wmax: mean(&wmax),
                pct_perfect: pct(&|r| r.transmissions == r.max_wants),
                pct_within_one: pct(&|r| r.transmissions <= r.max_wants + 1),
                trials: count,
                ci95_u,
            });
        }
    }
    rows
}

/// Validates the config and output directory, runs every trial, and writes
/// the CSVs when `config.out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let fields = validate(config)?;
    if let Some(dir) = &config.out {
        report::prepare_output(dir)?;
    }
    let jobs: Vec<(usize, usize)> =
        config.receivers.iter().flat_map(|&n| (0..config.trials).map(move |t| (n, t))).collect();
    let work = || -> Result<Vec<Vec<TrialRecord>>, ExperimentError> {
        jobs.par_iter().map(|&(n, t)| run_trial(config, &fields, n, t)).collect()
    };
    let batches = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    // Jobs are collected in input order; records within a batch follow config order.
    let records: Vec<TrialRecord> = batches.into_iter().flatten().collect();
    let summary = summarize(config, &records);
    if let Some(dir) = &config.out {
        report::emit_csv(&records, &summary, dir)?;
    }
    Ok(ExperimentResult { records, summary })
}

/// Parses `5..40:5` (inclusive range with step), `5,10,20`, or `20`.
pub fn parse_receivers(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid receiver list `{s}` (use 20, 5,10,20 or 5..40:5)");
    if let Some((range, step)) = s.split_once(':').or_else(|| s.contains("..").then_some((s, "1"))) {
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algorithms: Vec<AlgoSpec>) -> ExperimentConfig {
        ExperimentConfig {
            packets: 6,
            receivers: vec![3, 5],
            pe: 0.3,
            trials: 20,
            seed: 7,
            algorithms,
            oracle: Some(OracleSettings::default()),
            out: None,
            threads: Some(2),
        }
    }

    #[test]
    fn algo_specs_parse_and_print() {
        for s in ["graphic:q=2", "graphic:q=8:prune", "rlnc:q=8", "rlnc:q=2:rule=global", "rlnc:q=4:poly=7"] {
            let spec: AlgoSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("rlnc:q=2:rule=decodable".parse::<AlgoSpec>().unwrap(), AlgoSpec::rlnc(2));
        assert_eq!("rlnc:q=2:rule=decodable".parse::<AlgoSpec>().unwrap().label(), "rlnc");
        for bad in ["graphic", "foo:q=2", "rlnc:q=x", "rlnc:q=2:prune", "graphic:q=2:z=1", "rlnc:q=2:rule=fast"] {
            assert!(bad.parse::<AlgoSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn receiver_lists() {
        assert_eq!(parse_receivers("5..40:5").unwrap(), vec![5, 10, 15, 20, 25, 30, 35, 40]);
        assert_eq!(parse_receivers("5,10,20").unwrap(), vec![5, 10, 20]);
        assert_eq!(parse_receivers("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_receivers("7").unwrap(), vec![7]);
        assert!(parse_receivers("5..1:1").is_err());
        assert!(parse_receivers("5..10:0").is_err());
        assert!(parse_receivers("a").is_err());
    }

    #[test]
    fn unsupported_field_fails_before_running() {
        let config = small(vec![AlgoSpec::graphic(6)]);
        assert!(matches!(run_experiment(&config), Err(ExperimentError::Field { .. })));
    }

    #[test]
    fn nothing_lost_means_nothing_sent() {
        let mut config = small(vec![AlgoSpec::graphic(2), AlgoSpec::rlnc(8)]);
        config.pe = 0.0;
        let result = run_experiment(&config).unwrap();
        assert!(result.records.iter().all(|r| r.max_wants == 0 && r.transmissions == 0));
        assert!(result.summary.iter().all(|r| r.pct_perfect == 100.0));
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let mut config = small(vec![AlgoSpec::graphic(2), AlgoSpec::rlnc(2), AlgoSpec::rlnc(3)]);
        config.threads = Some(1);
        let one = run_experiment(&config).unwrap();
        config.threads = Some(4);
        let four = run_experiment(&config).unwrap();
        assert_eq!(one.records, four.records);
        assert_eq!(one.summary, four.summary);
    }

    #[test]
    fn records_respect_bounds_and_labels() {
        let config = small(vec![AlgoSpec::graphic(2), AlgoSpec::graphic(3), AlgoSpec::rlnc(2)]);
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.records.len(), 2 * 20 * 3);
        for r in &result.records {
            assert!(r.transmissions >= r.max_wants);
            if r.algo == "graphic" {
                assert!(r.s1);
                assert_ne!(r.case, CaseLabel::Unknown, "K=6 is within the oracle cutoff");
            }
            assert_eq!(r.case == CaseLabel::Perfect, r.transmissions == r.max_wants);
        }
        for row in &result.summary {
            assert_eq!(row.trials, 20);
            assert!(row.pct_perfect <= row.pct_within_one);
        }
    }

    #[test]
    fn oracle_cutoff_leaves_large_instances_unknown() {
        let mut config = small(vec![AlgoSpec::graphic(2)]);
        config.oracle = Some(OracleSettings { cutoff: 5, budget: DEFAULT_BUDGET });
        let result = run_experiment(&config).unwrap();
        for r in &result.records {
            let expected_known = r.transmissions == r.max_wants;
            assert_eq!(r.case != CaseLabel::Unknown, expected_known);
        }
    }
}
