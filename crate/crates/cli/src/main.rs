use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use plantedcsp::dimacs::to_dimacs;
use plantedcsp::fourier::positions_from_mask;
use plantedcsp::oracle::{ClauseStream, OracleSession};
use plantedcsp::solver::{sample_rng, solve_planted, solve_via_oracle};
use plantedcsp::{ParityChannel, PlantedModel, Source};
use plantedcsp_cli::experiment::{
    budget, csv_string, run_distinguish_experiment, run_recovery_experiment, sigma_for,
    ExperimentConfig, ExperimentKind, MSchedule, Mode, SolverOptions, DISTINGUISH_CSV_VERSION,
    RECOVERY_CSV_VERSION, SUMMARY_CSV_VERSION,
};
use plantedcsp_cli::labreport::{run_lab, LabConfig, LAB_CSV_VERSION};
use plantedcsp_cli::models;
use plantedcsp_cli::script::{answers_jsonl, parse_script, run_script};

const SEED_ENV: &str = "PLANTEDCSP_SEED";

#[derive(Parser)]
#[command(
    name = "plantedcsp",
    version,
    about = "Planted k-CSP generation, analysis and recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted formula.
    Gen(GenArgs),
    /// Print the complexity certificate and Fourier table of a model.
    Analyze(AnalyzeArgs),
    /// Plant an assignment, sample clauses and recover it.
    Solve(SolveArgs),
    /// Run a scripted oracle session.
    Oracle(OracleArgs),
    /// Numerical checks of the decomposition and discrimination norm.
    Lab(LabArgs),
    /// Run a recovery or distinguishing experiment.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Dimacs,
}

#[derive(Args)]
struct Common {
    /// Builtin model name or JSON model file.
    #[arg(long, default_value = "nae3")]
    model: String,
    /// Root seed; PLANTEDCSP_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v:?}")),
            Err(_) => Ok(self.seed),
        }
    }

    fn source(&self) -> Result<Source> {
        Ok(models::load(&self.model)?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        emit(self.out.as_deref(), text)
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct Budget {
    /// Number of clauses.
    #[arg(long)]
    m: Option<u64>,
    /// Clause budget as `c · n^{r/2} · ln n`.
    #[arg(long)]
    m_coef: Option<f64>,
}

impl Budget {
    fn resolve(&self, n: usize, r: usize, no_log: bool) -> Result<u64> {
        match (self.m, self.m_coef) {
            (Some(m), _) => Ok(m),
            (None, Some(c)) => Ok(budget(c, n, r, !no_log)),
            (None, None) => bail!("one of --m or --m-coef is required"),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    budget: Budget,
    /// Drop the `ln n` factor from --m-coef.
    #[arg(long)]
    no_log: bool,
    #[arg(long, value_enum, default_value = "dimacs")]
    format: Format,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    budget: Budget,
    #[arg(long)]
    no_log: bool,
    #[arg(long, value_enum, default_value = "direct")]
    mode: Mode,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    /// JSON-lines query script.
    #[arg(long)]
    script: PathBuf,
    /// VSTAT sample size.
    #[arg(long, default_value_t = 1000)]
    t: u64,
    /// Answer from the uniform clause law instead of samples.
    #[arg(long)]
    adversarial: bool,
    /// Transcript file (JSON lines).
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct LabArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Models whose `κ₂ · n^{r/2}` band is computed.
    #[arg(long, value_delimiter = ',', default_value = "nae3,xor:3,quiet-4sat")]
    band_models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8")]
    band_n: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (JSON). Flags override its fields.
    config: Option<PathBuf>,
    #[arg(long)]
    distinguish: bool,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', conflicts_with = "m_coef")]
    m: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    m_coef: Vec<f64>,
    #[arg(long)]
    no_log: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Record per-trial wall time.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell success rates (CSV).
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Analyze(a) => analyze(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Lab(a) => lab(a),
        Command::Bench(a) => bench(a),
    }
}

fn planted(source: &Source, n: usize, seed: u64) -> Result<PlantedModel> {
    Ok(PlantedModel::new(source.clone(), sigma_for(n, seed))?)
}

fn gen(a: GenArgs) -> Result<()> {
    let source = a.common.source()?;
    let seed = a.common.seed()?;
    let r = source.complexity()?.r;
    let m = a.budget.resolve(a.n, r, a.no_log)? as usize;
    let model = planted(&source, a.n, seed)?;
    if model.distribution().is_none() {
        bail!(
            "gen needs a clause model; `{}` is a predicate",
            a.common.model
        );
    }
    let formula = model.sample_formula(m, &mut sample_rng(seed))?;
    let text = match a.format {
        Format::Dimacs => to_dimacs(&formula),
        Format::Json => {
            let clauses: Vec<Vec<i64>> = formula
                .clauses()
                .map(|c| c.iter().map(|l| l.to_dimacs()).collect())
                .collect();
            let doc = serde_json::json!({
                "n": formula.n(),
                "k": source.k(),
                "seed": seed,
                "sigma": model.sigma().values(),
                "clauses": clauses,
            });
            serde_json::to_string(&doc)? + "\n"
        }
        Format::Csv => {
            let mut out = String::from("# plantedcsp clauses v1\n");
            out += &(0..source.k())
                .map(|i| format!("l{i}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            for c in formula.clauses() {
                let row: Vec<String> = c.iter().map(|l| l.to_dimacs().to_string()).collect();
                out += &row.join(",");
                out.push('\n');
            }
            out
        }
    };
    a.common.emit(&text)
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let source = a.common.source()?;
    let k = source.k();
    let cert = source.complexity()?;
    let channel = match &source {
        Source::Clauses(q) => ParityChannel::from_certificate(q, &cert)?,
        Source::Predicate(p) => ParityChannel::from_predicate(p)?,
    };
    let fourier = source.fourier();
    let text = match a.format {
        Format::Json => {
            let table: Vec<_> = (0..fourier.len())
                .map(|s| serde_json::json!({"positions": positions_from_mask(s), "coefficient": fourier[s]}))
                .collect();
            let doc = serde_json::json!({
                "k": k,
                "r": cert.r,
                "witness": cert.witness,
                "coefficient": cert.coefficient,
                "delta": channel.delta,
                "fourier": table,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => {
            let mut out = format!(
                "# k={k} r={} witness={:?} coefficient={} delta={}\nsubset,size,coefficient\n",
                cert.r, cert.witness, cert.coefficient, channel.delta
            );
            for (s, c) in fourier.iter().enumerate() {
                let pos: Vec<String> = positions_from_mask(s)
                    .iter()
                    .map(|p| p.to_string())
                    .collect();
                out += &format!("{{{}}},{},{c}\n", pos.join(" "), pos.len());
            }
            out
        }
        Format::Dimacs => bail!("analyze writes csv or json"),
    };
    a.common.emit(&text)
}

fn solve(a: SolveArgs) -> Result<()> {
    let source = a.common.source()?;
    let seed = a.common.seed()?;
    let r = source.complexity()?.r;
    let m = a.budget.resolve(a.n, r, a.no_log)?;
    let model = planted(&source, a.n, seed)?;
    let mut cfg = SolverOptions::default().to_config();
    if let Some(x) = a.restarts {
        cfg.restarts = x;
    }
    let outcome = match a.mode {
        Mode::Direct => solve_planted(&model, m, &cfg, seed)?,
        Mode::Oracle => {
            let q = model
                .distribution()
                .context("oracle mode needs a clause model")?
                .clone();
            let sigma = model.sigma().clone();
            let stream = ClauseStream::new(model, sample_rng(seed))?;
            let mut session = OracleSession::honest(stream, 1000).without_transcript();
            solve_via_oracle(&mut session, &q, a.n, m, &cfg, seed, Some(&sigma))?
        }
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&outcome.report)? + "\n",
        Format::Csv => {
            let rep = &outcome.report;
            format!(
                "n,k,r,m,recovered,agreement,tie_class,queries,wall_ms\n{},{},{},{},{},{},{},{},{}\n",
                rep.n,
                rep.k,
                rep.r,
                rep.m_used,
                rep.recovered.map(u8::from).map(|x| x.to_string()).unwrap_or_default(),
                rep.agreement_fraction.map(|x| x.to_string()).unwrap_or_default(),
                rep.tie_class_size,
                rep.queries,
                rep.wall_ms
            )
        }
        Format::Dimacs => bail!("solve writes csv or json"),
    };
    a.common.emit(&text)
}

fn oracle(a: OracleArgs) -> Result<()> {
    let source = a.common.source()?;
    let seed = a.common.seed()?;
    let script =
        fs::read_to_string(&a.script).with_context(|| format!("reading {}", a.script.display()))?;
    let queries = parse_script(&script)?;
    let run = run_script(&source, a.n, seed, a.t, a.adversarial, &queries)?;
    if let Some(p) = &a.transcript {
        emit(Some(p), &run.transcript)?;
    }
    a.common.emit(&answers_jsonl(&run.answers))
}

fn lab(a: LabArgs) -> Result<()> {
    let cfg = LabConfig {
        seed: a.seed,
        trials: a.trials,
        n: a.n,
        k: a.k,
        band_models: a.band_models,
        band_ns: a.band_n,
    };
    let rows = run_lab(&cfg)?;
    let outside = rows.iter().filter(|r| !r.within()).count();
    emit(a.out.as_deref(), &csv_string(LAB_CSV_VERSION, &rows)?)?;
    eprintln!("{} rows, {outside} outside their bound", rows.len());
    if outside > 0 {
        std::process::exit(1);
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_json(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => ExperimentConfig {
            kind: ExperimentKind::Recovery,
            model: "nae3".into(),
            n: Vec::new(),
            m: MSchedule::Absolute(Vec::new()),
            trials: 1,
            seed: 0,
            mode: Mode::Direct,
            timing: false,
            solver: SolverOptions::default(),
            out: None,
            summary: None,
        },
    };
    if a.distinguish {
        cfg.kind = ExperimentKind::Distinguish;
    }
    if let Some(m) = &a.model {
        cfg.model = m.clone();
    }
    if !a.n.is_empty() {
        cfg.n = a.n.clone();
    }
    if !a.m.is_empty() {
        cfg.m = MSchedule::Absolute(a.m.clone());
    } else if !a.m_coef.is_empty() {
        cfg.m = MSchedule::Coef {
            values: a.m_coef.clone(),
            log: !a.no_log,
        };
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?}"))?;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    cfg.timing |= a.timing;
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if a.summary.is_some() {
        cfg.summary = a.summary.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = bench_config(&a)?;
    let (rows, cells) = match cfg.kind {
        ExperimentKind::Recovery => {
            let out = run_recovery_experiment(&cfg)?;
            (csv_string(RECOVERY_CSV_VERSION, &out.rows)?, out.cells)
        }
        ExperimentKind::Distinguish => {
            let out = run_distinguish_experiment(&cfg)?;
            (csv_string(DISTINGUISH_CSV_VERSION, &out.rows)?, out.cells)
        }
    };
    emit(cfg.out.as_deref(), &rows)?;
    let summary = csv_string(SUMMARY_CSV_VERSION, &cells)?;
    match &cfg.summary {
        Some(p) => emit(Some(p), &summary)?,
        None => eprint!("{summary}"),
    }
    Ok(())
}
