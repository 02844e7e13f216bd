//! Discrete subsampled power iteration.
//!
//! Clauses are restricted to the witness positions of the source, giving
//! `r`-clauses from a parity channel. Each `r`-clause `(l_1, …, l_r)` is one
//! entry of a matrix whose rows are indexed by the first `⌈r/2⌉` literals and
//! whose columns by the remaining `⌊r/2⌋`. A sign vector is pushed through
//! fresh copies of that matrix, rounded after every step, and the final
//! vector is read as parity equations on `σ`.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smallvec::SmallVec;

use crate::clause::{Assignment, Formula, Literal, LiteralVec, TupleIndexer};
use crate::error::{Error, Result};
use crate::gf2::ParitySystem;
use crate::oracle::{ClauseStream, LabeledStream, OracleSession, SampleSource};
use crate::planting::{ClauseDistribution, ParityChannel, PlantedModel, Predicate, Source};

pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 31;

/// Stream used for clause samples.
pub fn sample_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Stream used for starting vectors, rounding and tie-breaking.
pub fn algorithm_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Row and column index spaces of the clause matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteShape {
    n: usize,
    r: usize,
    rows: TupleIndexer,
    cols: TupleIndexer,
    clauses: u64,
}

impl BipartiteShape {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        Self::build(n, r, true, DEFAULT_MEMORY_CAP)
    }

    /// Variable tuples only; used for positive-literal clauses.
    pub fn unsigned(n: usize, r: usize) -> Result<Self> {
        Self::build(n, r, false, DEFAULT_MEMORY_CAP)
    }

    pub fn build(n: usize, r: usize, signed: bool, cap: u64) -> Result<Self> {
        if r < 1 {
            return Err(Error::UnsupportedArity(r));
        }
        let (l1, l2) = (r.div_ceil(2), r / 2);
        let make = |l| {
            if signed {
                TupleIndexer::new(n, l)
            } else {
                TupleIndexer::unsigned(n, l)
            }
        };
        let rows = make(l1)?;
        let cols = make(l2)?;
        let clauses = make(r)?.size();
        let entries = rows.size().max(cols.size());
        if entries > cap {
            return Err(Error::TooLarge {
                entries,
                cap,
                bytes: entries * 8,
            });
        }
        Ok(BipartiteShape {
            n,
            r,
            rows,
            cols,
            clauses,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> &TupleIndexer {
        &self.rows
    }

    pub fn cols(&self) -> &TupleIndexer {
        &self.cols
    }

    pub fn n1(&self) -> usize {
        self.rows.size() as usize
    }

    pub fn n2(&self) -> usize {
        self.cols.size() as usize
    }

    /// `N = sqrt(N₁ N₂)`.
    pub fn n_geo(&self) -> f64 {
        (self.rows.size() as f64 * self.cols.size() as f64).sqrt()
    }

    /// `|X_r|` in the shape's literal alphabet.
    pub fn clause_count(&self) -> u64 {
        self.clauses
    }

    pub fn is_even(&self) -> bool {
        self.r.is_multiple_of(2)
    }

    /// `(row, col)` of an `r`-clause.
    #[inline]
    pub fn entry(&self, clause: &[Literal]) -> (usize, usize) {
        let l1 = self.rows.arity();
        (
            self.rows.index_unchecked(&clause[..l1]) as usize,
            self.cols.index_unchecked(&clause[l1..]) as usize,
        )
    }
}

/// Matrix coordinates of every clause, multiplicities kept.
pub fn matrix_entries(formula: &Formula, shape: &BipartiteShape) -> Result<Vec<(usize, usize)>> {
    if !formula.is_empty() && formula.arity() != shape.r {
        return Err(Error::ArityMismatch {
            expected: shape.r,
            got: formula.arity(),
        });
    }
    formula
        .clauses()
        .map(|c| {
            let l1 = shape.rows.arity();
            Ok((
                shape.rows.index(&c[..l1])? as usize,
                shape.cols.index(&c[l1..])? as usize,
            ))
        })
        .collect()
}

/// `z = M x` in one pass over the clauses.
pub fn multiply(formula: &Formula, shape: &BipartiteShape, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != shape.n2() {
        return Err(Error::LengthMismatch {
            expected: shape.n2(),
            got: x.len(),
        });
    }
    let mut z = vec![0.0; shape.n1()];
    for (row, col) in matrix_entries(formula, shape)? {
        z[row] += x[col];
    }
    Ok(z)
}

/// `z = Mᵀ y` in one pass over the clauses.
pub fn multiply_transpose(
    formula: &Formula,
    shape: &BipartiteShape,
    y: &[f64],
) -> Result<Vec<f64>> {
    if y.len() != shape.n1() {
        return Err(Error::LengthMismatch {
            expected: shape.n1(),
            got: y.len(),
        });
    }
    let mut z = vec![0.0; shape.n2()];
    for (row, col) in matrix_entries(formula, shape)? {
        z[col] += y[row];
    }
    Ok(z)
}

/// Coordinate `j` becomes `sign(z_j)` with probability
/// `1/2 + |z_j| / (2 max|z|)`; zero coordinates get a fair coin.
pub fn randomized_round<R: Rng + ?Sized>(z: &[f64], rng: &mut R) -> Vec<i8> {
    let max = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    z.iter()
        .map(|&v| {
            let s: i8 = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else if rng.gen::<bool>() {
                1
            } else {
                -1
            };
            let keep = if max > 0.0 {
                0.5 + v.abs() / (2.0 * max)
            } else {
                0.5
            };
            if rng.gen::<f64>() < keep {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Componentwise sign with `sign(0) = 0`.
pub fn ternary_round(z: &[f64]) -> Vec<i8> {
    z.iter()
        .map(|&v| {
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// `u_j = +1` iff tuple `j` has an even number of TRUE literals under `σ`.
pub fn truth_vector(sigma: &Assignment, indexer: &TupleIndexer) -> Vec<i8> {
    (0..indexer.size())
        .map(|j| {
            let t = indexer.unindex(j).expect("in range");
            if sigma.pattern_index(&t).count_ones().is_multiple_of(2) {
                1
            } else {
                -1
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeOptions {
    /// Fraction of coordinates on a variable set that must agree before the
    /// equation is used.
    pub agreement: f64,
    /// Largest number of unconstrained variables accepted.
    pub max_free: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            agreement: 2.0 / 3.0,
            max_free: 2,
        }
    }
}

/// Solutions of the parity equations read from `u` (zeros abstain).
pub fn parity_decode(
    u: &[i8],
    indexer: &TupleIndexer,
    opts: &DecodeOptions,
) -> Result<Vec<Assignment>> {
    if u.len() as u64 != indexer.size() {
        return Err(Error::LengthMismatch {
            expected: indexer.size() as usize,
            got: u.len(),
        });
    }
    let n = indexer.n();
    let mut votes: HashMap<SmallVec<[usize; 4]>, [u32; 2]> = HashMap::new();
    for (j, &s) in u.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let t = indexer.unindex(j as u64)?;
        let mut vars: SmallVec<[usize; 4]> = t.iter().map(|l| l.var()).collect();
        vars.sort_unstable();
        let bit = t.iter().fold(s < 0, |acc, l| acc ^ l.is_negated());
        votes.entry(vars).or_default()[bit as usize] += 1;
    }
    let mut keys: Vec<_> = votes.into_iter().collect();
    keys.sort();
    let mut system = ParitySystem::new(n);
    for (vars, [zero, one]) in keys {
        let total = (zero + one) as f64;
        let bit = one > zero;
        if (zero.max(one) as f64) >= opts.agreement * total {
            system.push(&vars, bit)?;
        }
    }
    let solutions = system.solve()?.enumerate(opts.max_free)?;
    Ok(solutions
        .into_iter()
        .map(|s| {
            Assignment::new(s.into_iter().map(|b| if b { -1 } else { 1 }).collect()).expect("signs")
        })
        .collect())
}

/// Union of the decodes of `u` and `-u`.
pub fn decode_both(
    u: &[i8],
    indexer: &TupleIndexer,
    opts: &DecodeOptions,
) -> Result<Vec<Assignment>> {
    let neg: Vec<i8> = u.iter().map(|v| -v).collect();
    let a = parity_decode(u, indexer, opts);
    let b = parity_decode(&neg, indexer, opts);
    let mut out = match (a, b) {
        (Err(e), Err(_)) => return Err(e),
        (Ok(a), Err(_)) => a,
        (Err(_), Ok(b)) => b,
        (Ok(mut a), Ok(b)) => {
            a.extend(b);
            a
        }
    };
    out.sort_by(|x, y| x.values().cmp(y.values()));
    out.dedup();
    Ok(out)
}

/// Best candidate and the candidates tied with it.
#[derive(Clone, Debug, PartialEq)]
pub struct Disambiguation {
    pub best: usize,
    pub tie_class: Vec<usize>,
    pub scores: Vec<f64>,
}

impl Disambiguation {
    /// Gap between the best and second best score, per held-out sample.
    pub fn log_ratio_per_sample(&self, samples: u64) -> f64 {
        if self.scores.len() < 2 || samples == 0 {
            return 0.0;
        }
        let mut s: Vec<f64> = self.scores.clone();
        s.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
        let gap = s[0] - s[1];
        if gap.is_finite() {
            gap / samples as f64
        } else {
            f64::INFINITY
        }
    }
}

fn pick(scores: Vec<f64>) -> Result<Disambiguation> {
    if scores.is_empty() {
        return Err(Error::NoCandidates);
    }
    if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(Error::ZeroLikelihood);
    }
    let (best, &top) = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("no NaN").then(b.0.cmp(&a.0)))
        .expect("nonempty");
    let tol = 1e-9 * top.abs().max(1.0);
    let tie_class = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| (s - top).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    Ok(Disambiguation {
        best,
        tie_class,
        scores,
    })
}

/// `Σ_C ln Q(σ̂(C))` for one candidate.
pub fn log_likelihood(sigma: &Assignment, held_out: &Formula, q: &ClauseDistribution) -> f64 {
    held_out
        .clauses()
        .map(|c| q.weight(sigma.pattern_index(c)).ln())
        .sum()
}

/// Maximum-likelihood choice among candidates on held-out `k`-clauses.
pub fn disambiguate(
    candidates: &[Assignment],
    held_out: &Formula,
    q: &ClauseDistribution,
) -> Result<Disambiguation> {
    pick(
        candidates
            .iter()
            .map(|c| log_likelihood(c, held_out, q))
            .collect(),
    )
}

/// How the sample budget is split across matrix multiplies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub rounds: usize,
    /// Clauses per multiply, in order; the last one (even `r`) or last two
    /// (odd `r`) produce the final vector.
    pub steps: Vec<u64>,
    pub held_out: u64,
}

impl Schedule {
    pub fn default_rounds(shape: &BipartiteShape) -> usize {
        shape.n_geo().log2().ceil().max(1.0) as usize
    }

    fn multiplies(shape: &BipartiteShape, rounds: usize) -> usize {
        if shape.is_even() {
            rounds + 1
        } else {
            2 * (rounds + 1)
        }
    }

    /// Splits a total budget `m`: a held-out share, the rest evenly over the
    /// multiplies.
    pub fn from_budget(m: u64, shape: &BipartiteShape, cfg: &SolverConfig) -> Result<Self> {
        let rounds = cfg.rounds.unwrap_or_else(|| Self::default_rounds(shape));
        if shape.r == 1 {
            return Ok(Schedule {
                rounds: 0,
                steps: vec![m],
                held_out: 0,
            });
        }
        if m < 1 {
            return Err(Error::BudgetTooSmall {
                budget: m as usize,
                needed: 1,
            });
        }
        let held_out = ((m as f64 * cfg.held_out_fraction).ceil() as u64).clamp(1, m);
        let rest = m - held_out;
        let k = Self::multiplies(shape, rounds) as u64;
        let steps = (0..k).map(|i| rest / k + u64::from(i < rest % k)).collect();
        Ok(Schedule {
            rounds,
            steps,
            held_out,
        })
    }

    /// `p = K ln N / ((δ-1)² N)` clauses per matrix entry on every multiply.
    pub fn from_density_constant(
        constant: f64,
        delta: f64,
        shape: &BipartiteShape,
        cfg: &SolverConfig,
    ) -> Self {
        let rounds = cfg.rounds.unwrap_or_else(|| Self::default_rounds(shape));
        let nn = shape.n_geo();
        let p = constant * nn.ln() / ((delta - 1.0).powi(2) * nn);
        let per = (p * shape.clause_count() as f64).ceil() as u64;
        let steps = vec![per; Self::multiplies(shape, rounds)];
        let total: u64 = steps.iter().sum();
        let held_out = ((total as f64 * cfg.held_out_fraction).ceil() as u64).max(1);
        Schedule {
            rounds,
            steps,
            held_out,
        }
    }

    pub fn total(&self) -> u64 {
        self.steps.iter().sum::<u64>() + self.held_out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleScheme {
    /// One signed query per clause: value `2i+1` / `2i+2` for a `+1` / `-1`
    /// contribution to coordinate `i`, `0` for none.
    Fused,
    /// Separate `h⁺` and `h⁻` queries, each on its own sample.
    Split,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Overrides `⌈log₂ N⌉`.
    pub rounds: Option<usize>,
    pub held_out_fraction: f64,
    /// Subtract `p Σ x` after every multiply.
    pub center: bool,
    pub decode: DecodeOptions,
    /// Extra attempts, each with a fresh schedule, after a decode failure.
    pub restarts: usize,
    pub scheme: OracleScheme,
    pub memory_cap: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rounds: None,
            held_out_fraction: 0.05,
            center: true,
            decode: DecodeOptions::default(),
            restarts: 0,
            scheme: OracleScheme::Fused,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Supplier of restricted clauses for the iteration.
pub trait ClauseFeed {
    /// Applies `count` fresh clauses: `out[row] += input[col]` when
    /// `forward`, else `out[col] += input[row]`. Returns the number of
    /// clauses that entered the matrix.
    fn multiply(&mut self, count: u64, forward: bool, input: &[i8], out: &mut [i64])
        -> Result<u64>;

    /// Scores of each candidate on `count` fresh samples (higher is better).
    fn score(&mut self, count: u64, candidates: &[Assignment]) -> Result<Vec<f64>>;

    /// First-order literal scores for the `r = 1` path.
    fn first_order(&mut self, count: u64, out: &mut [f64]) -> Result<()>;

    fn samples(&self) -> u64;

    fn queries(&self) -> u64;

    /// Largest query range used by the iteration; held-out scoring is not
    /// counted.
    fn range(&self) -> usize;
}

/// Positions and weights `Q̂({i})` of nonzero first-order coefficients.
fn first_order_weights(q: &ClauseDistribution) -> Vec<(usize, f64)> {
    (0..q.k())
        .map(|i| (i, q.fourier()[1 << i]))
        .filter(|(_, w)| w.abs() > crate::fourier::DEFAULT_ZERO_TOL)
        .collect()
}

/// Draws clauses straight from a sample source.
pub struct DirectFeed<S> {
    source: S,
    channel: ParityChannel,
    shape: BipartiteShape,
    q: ClauseDistribution,
    samples: u64,
}

impl<S: SampleSource<Sample = LiteralVec>> DirectFeed<S> {
    pub fn new(
        source: S,
        channel: ParityChannel,
        shape: BipartiteShape,
        q: ClauseDistribution,
    ) -> Self {
        DirectFeed {
            source,
            channel,
            shape,
            q,
            samples: 0,
        }
    }
}

impl<S: SampleSource<Sample = LiteralVec>> ClauseFeed for DirectFeed<S> {
    fn multiply(
        &mut self,
        count: u64,
        forward: bool,
        input: &[i8],
        out: &mut [i64],
    ) -> Result<u64> {
        let mut rc = LiteralVec::new();
        for _ in 0..count {
            let c = self.source.draw();
            self.channel.restrict_into(&c, &mut rc);
            let (row, col) = self.shape.entry(&rc);
            if forward {
                out[row] += input[col] as i64;
            } else {
                out[col] += input[row] as i64;
            }
        }
        self.samples += count;
        Ok(count)
    }

    fn score(&mut self, count: u64, candidates: &[Assignment]) -> Result<Vec<f64>> {
        let mut scores = vec![0.0; candidates.len()];
        for _ in 0..count {
            let c = self.source.draw();
            for (s, cand) in scores.iter_mut().zip(candidates) {
                *s += self.q.weight(cand.pattern_index(&c)).ln();
            }
        }
        self.samples += count;
        Ok(scores)
    }

    fn first_order(&mut self, count: u64, out: &mut [f64]) -> Result<()> {
        let weights = first_order_weights(&self.q);
        for _ in 0..count {
            let c = self.source.draw();
            for &(i, w) in &weights {
                let sign = if c[i].is_negated() { -1.0 } else { 1.0 };
                out[c[i].var()] += w * sign;
            }
        }
        self.samples += count;
        Ok(())
    }

    fn samples(&self) -> u64 {
        self.samples
    }

    fn queries(&self) -> u64 {
        0
    }

    fn range(&self) -> usize {
        0
    }
}

/// Obtains every clause statistic through 1-MSTAT queries.
pub struct OracleFeed<'a, S: SampleSource<Sample = LiteralVec>> {
    session: &'a mut OracleSession<S>,
    channel: ParityChannel,
    shape: BipartiteShape,
    q: ClauseDistribution,
    scheme: OracleScheme,
    range: usize,
    queries: u64,
    samples_at_start: u64,
}

impl<'a, S: SampleSource<Sample = LiteralVec>> OracleFeed<'a, S> {
    pub fn new(
        session: &'a mut OracleSession<S>,
        channel: ParityChannel,
        shape: BipartiteShape,
        q: ClauseDistribution,
        scheme: OracleScheme,
    ) -> Self {
        let samples_at_start = session.samples_consumed();
        OracleFeed {
            session,
            channel,
            shape,
            q,
            scheme,
            range: 0,
            queries: 0,
            samples_at_start,
        }
    }

    fn ask(&mut self, l: usize, h: impl Fn(&LiteralVec) -> usize) -> Result<usize> {
        self.queries += 1;
        self.session.one_mstat(l, h)
    }
}

impl<S: SampleSource<Sample = LiteralVec>> ClauseFeed for OracleFeed<'_, S> {
    fn multiply(
        &mut self,
        count: u64,
        forward: bool,
        input: &[i8],
        out: &mut [i64],
    ) -> Result<u64> {
        let channel = self.channel.clone();
        let shape = self.shape.clone();
        let target_of = move |c: &LiteralVec| -> (usize, i8) {
            let rc = channel.restrict(c);
            let (row, col) = shape.entry(&rc);
            if forward {
                (row, input[col])
            } else {
                (col, input[row])
            }
        };
        let width = out.len();
        match self.scheme {
            OracleScheme::Fused => {
                let l = 2 * width + 1;
                self.range = self.range.max(l);
                for _ in 0..count {
                    let v = self.ask(l, |c| match target_of(c) {
                        (_, 0) => 0,
                        (i, s) => 2 * i + 1 + usize::from(s < 0),
                    })?;
                    if v > 0 {
                        let i = (v - 1) / 2;
                        out[i] += if (v - 1) % 2 == 0 { 1 } else { -1 };
                    }
                }
            }
            OracleScheme::Split => {
                let l = width + 1;
                self.range = self.range.max(l);
                for _ in 0..count {
                    let v = self.ask(l, |c| match target_of(c) {
                        (i, s) if s > 0 => i + 1,
                        _ => 0,
                    })?;
                    if v > 0 {
                        out[v - 1] += 1;
                    }
                }
                for _ in 0..count {
                    let v = self.ask(l, |c| match target_of(c) {
                        (i, s) if s < 0 => i + 1,
                        _ => 0,
                    })?;
                    if v > 0 {
                        out[v - 1] -= 1;
                    }
                }
            }
        }
        Ok(count)
    }

    fn score(&mut self, count: u64, candidates: &[Assignment]) -> Result<Vec<f64>> {
        let k = self.q.k();
        let bits = k * candidates.len();
        if bits > 48 {
            return Err(Error::Config(format!(
                "joint held-out query needs 2^{bits} values"
            )));
        }
        let l = (1usize << bits).max(2);
        let mut scores = vec![0.0; candidates.len()];
        for _ in 0..count {
            let v = self.ask(l, |c| {
                candidates
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, s)| acc | s.pattern_index(c) << (k * j))
            })?;
            for (j, s) in scores.iter_mut().enumerate() {
                *s += self.q.weight(v >> (k * j) & ((1 << k) - 1)).ln();
            }
        }
        Ok(scores)
    }

    fn first_order(&mut self, count: u64, out: &mut [f64]) -> Result<()> {
        let weights = first_order_weights(&self.q);
        let n = out.len();
        self.range = self.range.max(2 * n);
        for j in 0..count {
            let (i, w) = weights[j as usize % weights.len()];
            let v = self.ask(2 * n, |c| c[i].code() as usize)?;
            let sign = if v % 2 == 1 { -1.0 } else { 1.0 };
            out[v / 2] += w * sign;
        }
        Ok(())
    }

    fn samples(&self) -> u64 {
        self.session.samples_consumed() - self.samples_at_start
    }

    fn queries(&self) -> u64 {
        self.queries
    }

    fn range(&self) -> usize {
        self.range
    }
}

/// Label-1 samples of a predicate model, read as positive-literal clauses.
pub struct LabeledFeed<S> {
    source: S,
    channel: ParityChannel,
    shape: BipartiteShape,
    predicate: Predicate,
    accepted: ClauseDistribution,
    samples: u64,
}

impl<S: SampleSource<Sample = crate::planting::LabeledTuple>> LabeledFeed<S> {
    pub fn new(source: S, predicate: Predicate, shape: BipartiteShape) -> Result<Self> {
        let accepted = predicate.accepted_distribution()?;
        let channel = ParityChannel::from_predicate(&predicate)?;
        if shape.r != channel.r {
            return Err(Error::ArityMismatch {
                expected: channel.r,
                got: shape.r,
            });
        }
        Ok(LabeledFeed {
            source,
            channel,
            shape,
            predicate,
            accepted,
            samples: 0,
        })
    }
}

impl<S: SampleSource<Sample = crate::planting::LabeledTuple>> ClauseFeed for LabeledFeed<S> {
    fn multiply(
        &mut self,
        count: u64,
        forward: bool,
        input: &[i8],
        out: &mut [i64],
    ) -> Result<u64> {
        let mut used = 0;
        let mut rc = LiteralVec::new();
        for _ in 0..count {
            let s = self.source.draw();
            if s.label != 1 {
                continue;
            }
            let c: LiteralVec = s.vars.iter().map(|&v| Literal::positive(v)).collect();
            self.channel.restrict_into(&c, &mut rc);
            let (row, col) = self.shape.entry(&rc);
            if forward {
                out[row] += input[col] as i64;
            } else {
                out[col] += input[row] as i64;
            }
            used += 1;
        }
        self.samples += count;
        Ok(used)
    }

    fn score(&mut self, count: u64, candidates: &[Assignment]) -> Result<Vec<f64>> {
        let mut scores = vec![0.0; candidates.len()];
        for _ in 0..count {
            let s = self.source.draw();
            for (score, cand) in scores.iter_mut().zip(candidates) {
                let y = s.vars.iter().enumerate().fold(0usize, |acc, (i, &v)| {
                    acc | (usize::from(cand.get(v) < 0) << i)
                });
                if 2 * self.predicate.value(y) as i8 - 1 == s.label {
                    *score += 1.0;
                }
            }
        }
        self.samples += count;
        Ok(scores)
    }

    fn first_order(&mut self, count: u64, out: &mut [f64]) -> Result<()> {
        let weights = first_order_weights(&self.accepted);
        let n = out.len();
        let mut counts = vec![vec![0.0; n]; weights.len()];
        let mut accepted = 0.0;
        for _ in 0..count {
            let s = self.source.draw();
            if s.label != 1 {
                continue;
            }
            accepted += 1.0;
            for (slot, &(i, _)) in counts.iter_mut().zip(&weights) {
                slot[s.vars[i]] += 1.0;
            }
        }
        for (slot, &(_, w)) in counts.iter().zip(&weights) {
            for (o, c) in out.iter_mut().zip(slot) {
                *o += w * (c - accepted / n as f64);
            }
        }
        self.samples += count;
        Ok(())
    }

    fn samples(&self) -> u64 {
        self.samples
    }

    fn queries(&self) -> u64 {
        0
    }

    fn range(&self) -> usize {
        0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationOutcome {
    /// Ternary final vector over the column space.
    pub u_star: Vec<i8>,
    pub multiplies: usize,
}

/// Runs the schedule's multiplies from `x0` (uniform random when `None`).
pub fn power_iterate<F: ClauseFeed + ?Sized, R: Rng + ?Sized>(
    feed: &mut F,
    shape: &BipartiteShape,
    steps: &[u64],
    center: bool,
    x0: Option<Vec<i8>>,
    rng: &mut R,
) -> Result<IterationOutcome> {
    if shape.r < 2 {
        return Err(Error::UnsupportedArity(shape.r));
    }
    let mut x = match x0 {
        Some(x) if x.len() != shape.n2() => {
            return Err(Error::LengthMismatch {
                expected: shape.n2(),
                got: x.len(),
            })
        }
        Some(x) => x,
        None => (0..shape.n2())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect(),
    };
    let space = shape.clause_count() as f64;
    let step =
        |feed: &mut F, count: u64, forward: bool, input: &[i8], width: usize| -> Result<Vec<f64>> {
            let mut acc = vec![0i64; width];
            let used = feed.multiply(count, forward, input, &mut acc)?;
            let shift = if center {
                let total: i64 = input.iter().map(|&v| v as i64).sum();
                used as f64 / space * total as f64
            } else {
                0.0
            };
            Ok(acc.into_iter().map(|v| v as f64 - shift).collect())
        };
    let mut multiplies = 0;
    if shape.is_even() {
        let (last, body) = steps.split_last().ok_or(Error::BudgetTooSmall {
            budget: 0,
            needed: 1,
        })?;
        for &count in body {
            let z = step(feed, count, true, &x, shape.n1())?;
            x = randomized_round(&z, rng);
            multiplies += 1;
        }
        let z = step(feed, *last, true, &x, shape.n1())?;
        multiplies += 1;
        Ok(IterationOutcome {
            u_star: ternary_round(&z),
            multiplies,
        })
    } else {
        if steps.len() < 2 || !steps.len().is_multiple_of(2) {
            return Err(Error::Config(
                "odd arity needs an even number of steps".into(),
            ));
        }
        let pairs = steps.len() / 2;
        for (i, pair) in steps.chunks_exact(2).enumerate() {
            let z = step(feed, pair[0], true, &x, shape.n1())?;
            let y = ternary_round(&z);
            let w = step(feed, pair[1], false, &y, shape.n2())?;
            multiplies += 2;
            if i + 1 == pairs {
                return Ok(IterationOutcome {
                    u_star: ternary_round(&w),
                    multiplies,
                });
            }
            x = randomized_round(&w, rng);
        }
        unreachable!("loop returns on the last pair")
    }
}

/// Solve report; field names are part of the JSON output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub schema: u32,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub delta: Option<f64>,
    pub m_used: u64,
    pub queries: u64,
    pub iterations: usize,
    pub recovered: Option<bool>,
    pub agreement_fraction: Option<f64>,
    pub tie_class_size: usize,
    pub wall_ms: u64,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub query_range: Option<usize>,
    /// `queries · L / (n / ln n)^r`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound_ratio: Option<f64>,
    pub log_ratio_per_sample: f64,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub assignment: Assignment,
    pub tie_class: Vec<Assignment>,
    pub report: SolveReport,
}

fn grade(tie_class: &[Assignment], truth: Option<&Assignment>) -> (Option<bool>, Option<f64>) {
    match truth {
        None => (None, None),
        Some(t) => (
            Some(tie_class.iter().any(|c| c == t)),
            Some(tie_class.iter().map(|c| c.agreement(t)).fold(0.0, f64::max)),
        ),
    }
}

struct Problem<'a> {
    n: usize,
    k: usize,
    cert_r: usize,
    channel: Option<&'a ParityChannel>,
    shape: Option<&'a BipartiteShape>,
    truth: Option<&'a Assignment>,
    oracle: bool,
}

fn run<F: ClauseFeed>(
    feed: &mut F,
    problem: Problem<'_>,
    m: u64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let mut rng = algorithm_rng(seed);
    let finish = |feed: &F,
                  assignment: Assignment,
                  tie_class: Vec<Assignment>,
                  iterations: usize,
                  log_ratio: f64,
                  attempts: usize| {
        let (recovered, agreement) = grade(&tie_class, problem.truth);
        let queries = feed.queries();
        let range = problem.oracle.then(|| feed.range());
        let lower_bound_ratio = range.map(|l| {
            let n = problem.n as f64;
            queries as f64 * l as f64 / (n / n.ln()).powi(problem.cert_r as i32)
        });
        SolveOutcome {
            assignment,
            report: SolveReport {
                schema: REPORT_SCHEMA,
                n: problem.n,
                k: problem.k,
                r: problem.cert_r,
                delta: problem.channel.map(|c| c.delta),
                m_used: feed.samples(),
                queries,
                iterations,
                recovered,
                agreement_fraction: agreement,
                tie_class_size: tie_class.len(),
                wall_ms: start.elapsed().as_millis() as u64,
                query_range: range,
                lower_bound_ratio,
                log_ratio_per_sample: log_ratio,
                attempts,
            },
            tie_class,
        }
    };

    let (Some(channel), Some(shape)) = (problem.channel, problem.shape) else {
        let mut scores = vec![0.0; problem.n];
        feed.first_order(m, &mut scores)?;
        let values = scores
            .iter()
            .map(|&s| {
                if s > 0.0 {
                    1
                } else if s < 0.0 {
                    -1
                } else if rng.gen::<bool>() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let a = Assignment::new(values)?;
        return Ok(finish(feed, a.clone(), vec![a], 0, 0.0, 1));
    };

    let schedule = Schedule::from_budget(m, shape, cfg)?;
    let mut last_err = None;
    let mut iterations = 0;
    for attempt in 0..=cfg.restarts {
        let it = power_iterate(feed, shape, &schedule.steps, cfg.center, None, &mut rng)?;
        iterations += it.multiplies;
        let candidates = match decode_both(&it.u_star, shape.cols(), &cfg.decode) {
            Ok(c) => c,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let scores = feed.score(schedule.held_out, &candidates)?;
        let d = pick(scores)?;
        let tie_class: Vec<Assignment> =
            d.tie_class.iter().map(|&i| candidates[i].clone()).collect();
        let _ = channel;
        return Ok(finish(
            feed,
            candidates[d.best].clone(),
            tie_class,
            iterations,
            d.log_ratio_per_sample(schedule.held_out),
            attempt + 1,
        ));
    }
    Err(last_err.expect("at least one attempt"))
}

/// Full pipeline on samples drawn directly from `model`.
pub fn solve_planted(
    model: &PlantedModel,
    m: u64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveOutcome> {
    match model.source() {
        Source::Clauses(q) => {
            let stream = ClauseStream::new(model.clone(), sample_rng(seed))?;
            solve_clause_source(stream, q, model.n(), m, cfg, seed, Some(model.sigma()))
        }
        Source::Predicate(p) => {
            let stream = LabeledStream::new(model.clone(), sample_rng(seed))?;
            solve_labeled_source(stream, p, model.n(), m, cfg, seed, Some(model.sigma()))
        }
    }
}

/// Direct-mode pipeline over any clause source claimed to follow `Q_σ`.
pub fn solve_clause_source<S: SampleSource<Sample = LiteralVec>>(
    source: S,
    q: &ClauseDistribution,
    n: usize,
    m: u64,
    cfg: &SolverConfig,
    seed: u64,
    truth: Option<&Assignment>,
) -> Result<SolveOutcome> {
    let cert = q.complexity()?;
    let channel = ParityChannel::from_certificate(q, &cert)?;
    let shape = BipartiteShape::build(n, cert.r, true, cfg.memory_cap)?;
    let mut feed = DirectFeed::new(source, channel.clone(), shape.clone(), q.clone());
    let two_plus = cert.r >= 2;
    run(
        &mut feed,
        Problem {
            n,
            k: q.k(),
            cert_r: cert.r,
            channel: two_plus.then_some(&channel),
            shape: two_plus.then_some(&shape),
            truth,
            oracle: false,
        },
        m,
        cfg,
        seed,
    )
}

/// Predicate model: label-1 samples as positive-literal clauses,
/// candidates ranked by label consistency.
pub fn solve_labeled_source<S: SampleSource<Sample = crate::planting::LabeledTuple>>(
    source: S,
    p: &Predicate,
    n: usize,
    m: u64,
    cfg: &SolverConfig,
    seed: u64,
    truth: Option<&Assignment>,
) -> Result<SolveOutcome> {
    let cert = p.accepted_distribution()?.complexity()?;
    let shape = BipartiteShape::build(n, cert.r, false, cfg.memory_cap)?;
    let mut feed = LabeledFeed::new(source, p.clone(), shape.clone())?;
    let channel = feed.channel.clone();
    let two_plus = cert.r >= 2;
    run(
        &mut feed,
        Problem {
            n,
            k: p.k(),
            cert_r: cert.r,
            channel: two_plus.then_some(&channel),
            shape: two_plus.then_some(&shape),
            truth,
            oracle: false,
        },
        m,
        cfg,
        seed,
    )
}

/// Same pipeline with every clause statistic obtained from 1-MSTAT queries
/// on `session`. `q` is the model the algorithm assumes; the session's
/// source need not follow it.
pub fn solve_via_oracle<S: SampleSource<Sample = LiteralVec>>(
    session: &mut OracleSession<S>,
    q: &ClauseDistribution,
    n: usize,
    m: u64,
    cfg: &SolverConfig,
    seed: u64,
    truth: Option<&Assignment>,
) -> Result<SolveOutcome> {
    let cert = q.complexity()?;
    let channel = ParityChannel::from_certificate(q, &cert)?;
    let shape = BipartiteShape::build(n, cert.r, true, cfg.memory_cap)?;
    let mut feed = OracleFeed::new(
        session,
        channel.clone(),
        shape.clone(),
        q.clone(),
        cfg.scheme,
    );
    let two_plus = cert.r >= 2;
    run(
        &mut feed,
        Problem {
            n,
            k: q.k(),
            cert_r: cert.r,
            channel: two_plus.then_some(&channel),
            shape: two_plus.then_some(&shape),
            truth,
            oracle: true,
        },
        m,
        cfg,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planting::sample_uniform_formula;

    #[test]
    fn shape_sizes() {
        let s = BipartiteShape::new(10, 2).unwrap();
        assert_eq!((s.n1(), s.n2()), (20, 20));
        let s = BipartiteShape::new(10, 3).unwrap();
        assert_eq!((s.n1(), s.n2()), (360, 20));
        assert_eq!(s.clause_count(), 8 * 10 * 9 * 8);
        assert!(matches!(
            BipartiteShape::build(1000, 4, true, 1 << 20),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn entries_and_multiply_examples() {
        let shape = BipartiteShape::new(3, 2).unwrap();
        let empty = Formula::new(3, 2);
        assert!(matrix_entries(&empty, &shape).unwrap().is_empty());
        let mut f = Formula::new(3, 2);
        let (a, b) = (Literal::positive(0), Literal::negative(2));
        f.push(&[a, b]).unwrap();
        let e = matrix_entries(&f, &shape).unwrap();
        let ix = shape.cols();
        assert_eq!(
            e,
            vec![(
                ix.index(&[a]).unwrap() as usize,
                ix.index(&[b]).unwrap() as usize
            )]
        );
        assert!(multiply(&f, &shape, &[0.0; 6])
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let mut eb = vec![0.0; 6];
        eb[e[0].1] = 1.0;
        let z = multiply(&f, &shape, &eb).unwrap();
        let mut ea = vec![0.0; 6];
        ea[e[0].0] = 1.0;
        assert_eq!(z, ea);
        assert!(matches!(
            multiply(&f, &shape, &[0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
        let wrong = Formula::new(3, 3);
        let mut wrong = wrong;
        wrong.push(&[a, b, Literal::positive(1)]).unwrap();
        assert!(matrix_entries(&wrong, &shape).is_err());
    }

    #[test]
    fn streaming_equals_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4 {
            for r in 2..=3.min(n) {
                let shape = BipartiteShape::new(n, r).unwrap();
                for _ in 0..20 {
                    let f = sample_uniform_formula(n, r, rng.gen_range(0..30), &mut rng).unwrap();
                    // Dense matrix straight from the definition.
                    let mut dense = vec![vec![0.0; shape.n2()]; shape.n1()];
                    let l1 = r.div_ceil(2);
                    for c in f.clauses() {
                        let i = TupleIndexer::new(n, l1).unwrap().index(&c[..l1]).unwrap();
                        let j = TupleIndexer::new(n, r - l1)
                            .unwrap()
                            .index(&c[l1..])
                            .unwrap();
                        dense[i as usize][j as usize] += 1.0;
                    }
                    let x: Vec<f64> = (0..shape.n2()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let y: Vec<f64> = (0..shape.n1()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    let z = multiply(&f, &shape, &x).unwrap();
                    let w = multiply_transpose(&f, &shape, &y).unwrap();
                    for i in 0..shape.n1() {
                        let d: f64 = (0..shape.n2()).map(|j| dense[i][j] * x[j]).sum();
                        assert!((d - z[i]).abs() < 1e-12);
                    }
                    for j in 0..shape.n2() {
                        let d: f64 = (0..shape.n1()).map(|i| dense[i][j] * y[i]).sum();
                        assert!((d - w[j]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(ternary_round(&[3.0, -1.0, 0.0]), vec![1, -1, 0]);
        assert_eq!(ternary_round(&[1.0, 2.0]), vec![1, 1]);
        assert_eq!(ternary_round(&[1.0, -1.0, 0.0]), vec![1, -1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let r = randomized_round(&[0.0, -5.0, 0.0], &mut rng);
            assert_eq!(r[1], -1);
        }
        let trials = 100_000;
        let z = [0.0, 1.0, -3.0, 4.0];
        let mut pos = [0u32; 4];
        for _ in 0..trials {
            for (p, v) in pos.iter_mut().zip(randomized_round(&z, &mut rng)) {
                *p += u32::from(v > 0);
            }
        }
        let expect = [0.5, 0.5 + 1.0 / 8.0, 0.5 - 3.0 / 8.0, 1.0];
        for (p, e) in pos.iter().zip(expect) {
            assert!((*p as f64 / trials as f64 - e).abs() <= 0.02);
        }
    }

    #[test]
    fn decode_single_literals() {
        let ix = TupleIndexer::new(3, 1).unwrap();
        let sigma = Assignment::new(vec![1, -1, 1]).unwrap();
        let u = truth_vector(&sigma, &ix);
        assert_eq!(u[ix.index(&[Literal::positive(0)]).unwrap() as usize], 1);
        let got = parity_decode(&u, &ix, &DecodeOptions::default()).unwrap();
        assert_eq!(got, vec![sigma.clone()]);
        let both = decode_both(&u, &ix, &DecodeOptions::default()).unwrap();
        assert_eq!(both.len(), 2);
        assert!(both.contains(&sigma) && both.contains(&sigma.negated()));
    }

    #[test]
    fn decode_pairs_example() {
        let ix = TupleIndexer::new(3, 2).unwrap();
        let (x1, x2, x3) = (
            Literal::positive(0),
            Literal::positive(1),
            Literal::positive(2),
        );
        let mut u = vec![0i8; ix.size() as usize];
        u[ix.index(&[x1, x2]).unwrap() as usize] = 1;
        u[ix.index(&[x1, x3]).unwrap() as usize] = -1;
        let opts = DecodeOptions {
            max_free: 1,
            ..Default::default()
        };
        let mut got: Vec<Vec<i8>> = parity_decode(&u, &ix, &opts)
            .unwrap()
            .into_iter()
            .map(|a| a.values().to_vec())
            .collect();
        got.sort();
        assert_eq!(got, vec![vec![-1, -1, 1], vec![1, 1, -1]]);
    }

    #[test]
    fn decode_fails_without_signal() {
        let ix = TupleIndexer::new(20, 1).unwrap();
        let u = vec![0i8; 40];
        assert!(matches!(
            decode_both(&u, &ix, &DecodeOptions::default()),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn truth_vector_sign_redundancy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = Assignment::random(5, &mut rng);
        let ix = TupleIndexer::new(5, 2).unwrap();
        let u = truth_vector(&sigma, &ix);
        for j in 0..ix.size() {
            let t = ix.unindex(j).unwrap();
            let flipped = [t[0].negate(), t[1]];
            let jj = ix.index(&flipped).unwrap();
            assert_eq!(u[j as usize] * u[jj as usize], -1);
        }
    }

    #[test]
    fn disambiguation_rules() {
        let q = ClauseDistribution::planted_sat(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = Assignment::random(30, &mut rng);
        let model = PlantedModel::new(q.clone(), sigma.clone()).unwrap();
        let held = model.sample_formula(1000, &mut rng).unwrap();
        let single = disambiguate(std::slice::from_ref(&sigma), &held, &q).unwrap();
        assert_eq!(single.best, 0);
        let d = disambiguate(&[sigma.negated(), sigma.clone()], &held, &q).unwrap();
        assert_eq!(d.best, 1);
        assert_eq!(d.tie_class, vec![1]);

        let x = ClauseDistribution::xor(2).unwrap();
        let xm = PlantedModel::new(x.clone(), sigma.clone()).unwrap();
        let held = xm.sample_formula(200, &mut rng).unwrap();
        let d = disambiguate(&[sigma.clone(), sigma.negated()], &held, &x).unwrap();
        assert_eq!(d.tie_class.len(), 2);

        let mut other = sigma.values().to_vec();
        other[0] = -other[0];
        let wrong = Assignment::new(other).unwrap();
        let bad = disambiguate(&[wrong.clone(), wrong.negated()], &held, &x);
        assert!(matches!(bad, Err(Error::ZeroLikelihood)) || bad.is_ok());
    }

    #[test]
    fn fixed_point_on_noiseless_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 60;
        let sigma = Assignment::random(n, &mut rng);
        let q = ClauseDistribution::xor(2).unwrap();
        let model = PlantedModel::new(q.clone(), sigma.clone()).unwrap();
        let channel = ParityChannel::from_distribution(&q).unwrap();
        let shape = BipartiteShape::new(n, 2).unwrap();
        let u = truth_vector(&sigma, shape.cols());
        let stream = ClauseStream::new(model, sample_rng(1)).unwrap();
        let mut feed = DirectFeed::new(stream, channel, shape.clone(), q);
        let steps = vec![20 * n as u64 * 6; 4];
        let out =
            power_iterate(&mut feed, &shape, &steps, true, Some(u.clone()), &mut rng).unwrap();
        let neg: Vec<i8> = u.iter().map(|v| -v).collect();
        assert!(out.u_star == u || out.u_star == neg);
    }

    #[test]
    fn tiny_budget_fails_to_decode() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = Assignment::random(200, &mut rng);
        let model = PlantedModel::new(ClauseDistribution::nae3(), sigma).unwrap();
        let got = solve_planted(&model, 10, &SolverConfig::default(), 4);
        assert!(matches!(got, Err(Error::Underdetermined { .. })), "{got:?}");
    }

    #[test]
    fn schedule_splits_budget() {
        let shape = BipartiteShape::new(100, 2).unwrap();
        let s = Schedule::from_budget(10_000, &shape, &SolverConfig::default()).unwrap();
        assert_eq!(s.total(), 10_000);
        assert_eq!(s.rounds, 8);
        assert_eq!(s.steps.len(), 9);
        let odd = BipartiteShape::new(30, 3).unwrap();
        let s = Schedule::from_budget(10_000, &odd, &SolverConfig::default()).unwrap();
        assert_eq!(s.steps.len() % 2, 0);
        assert_eq!(s.total(), 10_000);
    }

    #[test]
    fn first_order_path_correlates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 200;
        let sigma = Assignment::random(n, &mut rng);
        let model = PlantedModel::new(ClauseDistribution::planted_sat(3).unwrap(), sigma).unwrap();
        let out = solve_planted(&model, 100_000, &SolverConfig::default(), 1).unwrap();
        assert_eq!(out.report.r, 1);
        assert!(out.report.agreement_fraction.unwrap() > 0.9);
    }

    #[test]
    fn oracle_mode_matches_direct_mode() {
        use crate::oracle::OracleSession;
        let q = ClauseDistribution::nae3();
        let n = 40;
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigma = Assignment::random(n, &mut rng);
            let model = PlantedModel::new(q.clone(), sigma.clone()).unwrap();
            let m = 150_000;
            let cfg = SolverConfig::default();
            let direct = solve_planted(&model, m, &cfg, seed);
            let stream = ClauseStream::new(model, sample_rng(seed)).unwrap();
            let mut session = OracleSession::honest(stream, 1000).without_transcript();
            let oracle = solve_via_oracle(&mut session, &q, n, m, &cfg, seed, Some(&sigma));
            match (direct, oracle) {
                (Ok(d), Ok(o)) => {
                    assert_eq!(d.assignment, o.assignment);
                    assert_eq!(d.report.recovered, o.report.recovered);
                    assert_eq!(d.report.m_used, o.report.m_used);
                    assert_eq!(o.report.queries, m);
                    assert_eq!(o.report.query_range, Some(4 * n + 1));
                }
                (Err(a), Err(b)) => assert_eq!(a, b),
                (a, b) => panic!("{a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn labeled_parity_predicate_recovers() {
        let p = Predicate::parity(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sigma = Assignment::random(30, &mut rng);
        let model = PlantedModel::new(p, sigma).unwrap();
        let out = solve_planted(&model, 400_000, &SolverConfig::default(), 2).unwrap();
        assert_eq!(out.report.r, 3);
        assert_eq!(out.report.recovered, Some(true));
    }
}
