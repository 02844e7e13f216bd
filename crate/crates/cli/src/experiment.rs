//! Seeded recovery and distinguishing experiments.
//!
//! Trial `i` of every cell uses seed `root + i`, so cells with the same
//! trial index share the planted assignment and sample stream.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use plantedcsp::distinguish::PairAccumulator;
use plantedcsp::oracle::{ClauseStream, OracleSession};
use plantedcsp::planting::sample_uniform_clause;
use plantedcsp::solver::{sample_rng, solve_planted, solve_via_oracle, OracleScheme, SolverConfig};
use plantedcsp::{Assignment, Error, ParityChannel, PlantedModel, Result, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models;

pub const RECOVERY_CSV_VERSION: &str = "# plantedcsp recovery v1";
pub const DISTINGUISH_CSV_VERSION: &str = "# plantedcsp distinguish v1";
pub const SUMMARY_CSV_VERSION: &str = "# plantedcsp summary v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Direct,
    Oracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Recovery,
    Distinguish,
}

fn yes() -> bool {
    true
}

/// Clause budgets per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MSchedule {
    Absolute(Vec<u64>),
    /// `m = c · n^{r/2} · ln n`, the log factor optional.
    Coef {
        values: Vec<f64>,
        #[serde(default = "yes")]
        log: bool,
    },
}

impl MSchedule {
    pub fn budgets(&self, n: usize, r: usize) -> Vec<u64> {
        match self {
            MSchedule::Absolute(v) => v.clone(),
            MSchedule::Coef { values, log } => {
                values.iter().map(|c| budget(*c, n, r, *log)).collect()
            }
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            MSchedule::Absolute(v) => v.is_empty(),
            MSchedule::Coef { values, .. } => values.is_empty(),
        }
    }
}

/// `⌈c · n^{r/2} · ln n⌉` (without the log when `log` is false).
pub fn budget(c: f64, n: usize, r: usize, log: bool) -> u64 {
    let nf = n as f64;
    let base = c * nf.powf(r as f64 / 2.0);
    (if log { base * nf.ln() } else { base }).ceil() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default = "default_held_out")]
    pub held_out_fraction: f64,
    #[serde(default)]
    pub restarts: usize,
    #[serde(default = "default_max_free")]
    pub max_free: usize,
    #[serde(default)]
    pub split_queries: bool,
}

fn default_held_out() -> f64 {
    0.05
}

fn default_max_free() -> usize {
    2
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rounds: None,
            held_out_fraction: default_held_out(),
            restarts: 0,
            max_free: default_max_free(),
            split_queries: false,
        }
    }
}

impl SolverOptions {
    pub fn to_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig {
            rounds: self.rounds,
            held_out_fraction: self.held_out_fraction,
            restarts: self.restarts,
            ..SolverConfig::default()
        };
        cfg.decode.max_free = self.max_free;
        if self.split_queries {
            cfg.scheme = OracleScheme::Split;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: ExperimentKind,
    /// Builtin model name or model file path.
    pub model: String,
    pub n: Vec<usize>,
    pub m: MSchedule,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Adds wall-clock milliseconds to each row; rows are then no longer
    /// reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.m.is_empty() {
            return Err(Error::Config("n and m grids must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.solver.held_out_fraction) {
            return Err(Error::Config("held_out_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub n: usize,
    pub m: u64,
    pub trial: usize,
    pub seed: u64,
    pub success: u8,
    pub agreement: Option<f64>,
    pub tie_class: usize,
    pub samples: u64,
    pub queries: u64,
    pub error: String,
    pub wall_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistinguishRow {
    pub n: usize,
    pub m: u64,
    pub trial: usize,
    pub seed: u64,
    pub planted: u8,
    pub decision: u8,
    pub correct: u8,
    pub statistic: f64,
    pub pairs: u64,
    pub threshold: f64,
}

/// Aggregate of one `(n, m)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub m: u64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

/// The planted assignment of trial seed `seed`.
pub fn sigma_for(n: usize, seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    Assignment::random(n, &mut rng)
}

/// One recovery trial; solver failures become rows with `success = 0`.
#[allow(clippy::too_many_arguments)]
pub fn recovery_trial(
    source: &Source,
    n: usize,
    m: u64,
    trial: usize,
    seed: u64,
    mode: Mode,
    cfg: &SolverConfig,
    timing: bool,
) -> Result<RecoveryRow> {
    let start = Instant::now();
    let sigma = sigma_for(n, seed);
    let model = PlantedModel::new(source.clone(), sigma.clone())?;
    let outcome = match mode {
        Mode::Direct => solve_planted(&model, m, cfg, seed),
        Mode::Oracle => {
            let q = model
                .distribution()
                .ok_or(Error::ModelMismatch(
                    "oracle mode needs a clause distribution",
                ))?
                .clone();
            let stream = ClauseStream::new(model, sample_rng(seed))?;
            let mut session = OracleSession::honest(stream, 1000).without_transcript();
            let out = solve_via_oracle(&mut session, &q, n, m, cfg, seed, Some(&sigma));
            if let Ok(o) = &out {
                if o.report.m_used != session.samples_consumed() {
                    return Err(Error::Config("oracle sample accounting mismatch".into()));
                }
            }
            out
        }
    };
    let wall_ms = timing.then(|| start.elapsed().as_millis() as u64);
    Ok(match outcome {
        Ok(o) => RecoveryRow {
            n,
            m,
            trial,
            seed,
            success: u8::from(o.report.recovered == Some(true)),
            agreement: o.report.agreement_fraction,
            tie_class: o.report.tie_class_size,
            samples: o.report.m_used,
            queries: o.report.queries,
            error: String::new(),
            wall_ms,
        },
        Err(e @ (Error::Underdetermined { .. } | Error::Inconsistent | Error::ZeroLikelihood)) => {
            RecoveryRow {
                n,
                m,
                trial,
                seed,
                success: 0,
                agreement: None,
                tie_class: 0,
                samples: m,
                queries: if mode == Mode::Oracle { m } else { 0 },
                error: e.to_string(),
                wall_ms,
            }
        }
        Err(e) => return Err(e),
    })
}

/// One distinguishing trial: a fair coin picks planted or uniform, `m`
/// clauses are drawn, and the pair statistic decides.
pub fn distinguish_trial(
    source: &Source,
    n: usize,
    m: u64,
    trial: usize,
    seed: u64,
) -> Result<DistinguishRow> {
    let q = match source {
        Source::Clauses(q) => q,
        Source::Predicate(_) => {
            return Err(Error::ModelMismatch(
                "distinguishing needs a clause distribution",
            ))
        }
    };
    let channel = ParityChannel::from_distribution(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    let planted = rng.gen_bool(0.5);
    let mut acc = PairAccumulator::new();
    if planted {
        let model = PlantedModel::new(q.clone(), sigma_for(n, seed))?;
        let mut c = Default::default();
        for _ in 0..m {
            model.sample_clause_into(&mut rng, &mut c)?;
            acc.push(&c, &channel);
        }
    } else {
        for _ in 0..m {
            acc.push(&sample_uniform_clause(n, q.k(), &mut rng)?, &channel);
        }
    }
    let stat = acc.finish();
    let decision = stat.decide();
    Ok(DistinguishRow {
        n,
        m,
        trial,
        seed,
        planted: u8::from(planted),
        decision: u8::from(decision),
        correct: u8::from(planted == decision),
        statistic: stat.value,
        pairs: stat.pairs,
        threshold: stat.threshold(),
    })
}

fn tasks(cfg: &ExperimentConfig, r: usize) -> Vec<(usize, u64, usize)> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        for m in cfg.m.budgets(n, r) {
            for t in 0..cfg.trials {
                out.push((n, m, t));
            }
        }
    }
    out
}

fn summarize(rows: impl Iterator<Item = (usize, u64, bool)>) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    for (n, m, ok) in rows {
        match cells.last_mut() {
            Some(c) if c.n == n && c.m == m => {
                c.trials += 1;
                c.successes += usize::from(ok);
            }
            _ => cells.push(CellSummary {
                n,
                m,
                trials: 1,
                successes: usize::from(ok),
                rate: 0.0,
            }),
        }
    }
    for c in &mut cells {
        c.rate = c.successes as f64 / c.trials as f64;
    }
    cells
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryOutput {
    pub rows: Vec<RecoveryRow>,
    pub cells: Vec<CellSummary>,
}

pub fn run_recovery_experiment(cfg: &ExperimentConfig) -> Result<RecoveryOutput> {
    cfg.validate()?;
    let source = models::load(&cfg.model)?;
    let r = source.complexity()?.r;
    let solver = cfg.solver.to_config();
    let rows = tasks(cfg, r)
        .into_par_iter()
        .map(|(n, m, t)| {
            recovery_trial(
                &source,
                n,
                m,
                t,
                cfg.trial_seed(t),
                cfg.mode,
                &solver,
                cfg.timing,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = summarize(rows.iter().map(|r| (r.n, r.m, r.success == 1)));
    Ok(RecoveryOutput { rows, cells })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishOutput {
    pub rows: Vec<DistinguishRow>,
    /// `rate` is the accuracy.
    pub cells: Vec<CellSummary>,
}

pub fn run_distinguish_experiment(cfg: &ExperimentConfig) -> Result<DistinguishOutput> {
    cfg.validate()?;
    let source = models::load(&cfg.model)?;
    let r = source.complexity()?.r;
    let rows = tasks(cfg, r)
        .into_par_iter()
        .map(|(n, m, t)| distinguish_trial(&source, n, m, t, cfg.trial_seed(t)))
        .collect::<Result<Vec<_>>>()?;
    let cells = summarize(rows.iter().map(|r| (r.n, r.m, r.correct == 1)));
    Ok(DistinguishOutput { rows, cells })
}

/// Rows as CSV under a version comment.
pub fn write_csv<T: Serialize>(version: &str, rows: &[T], out: &mut impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    writeln!(out, "{version}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(version: &str, rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(version, rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Budget at which the success rate crosses one half, interpolated
/// linearly in `ln m` between neighbouring cells. Cells must share `n` and
/// be sorted by `m`.
pub fn threshold_midpoint(cells: &[CellSummary]) -> Option<f64> {
    if cells.first()?.rate >= 0.5 {
        return None;
    }
    cells.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.rate < 0.5 && b.rate >= 0.5).then(|| {
            let t = (0.5 - a.rate) / (b.rate - a.rate);
            ((a.m as f64).ln() + t * ((b.m as f64).ln() - (a.m as f64).ln())).exp()
        })
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
