//! Statistical oracle simulators: 1-STAT, 1-MSTAT, VSTAT and MVSTAT, with
//! honest (sample-backed) and adversarial (reference-expectation) modes,
//! plus the reductions MVSTAT -> VSTAT and 1-MSTAT -> 1-STAT.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use smallvec::SmallVec;

use crate::clause::{count_tuples, count_variable_tuples, LiteralVec, TupleIndexer};
use crate::error::{Error, Result};
use crate::planting::{sample_uniform_clause, LabeledTuple, PlantedModel};

/// Largest sample domain a source will enumerate for exact expectations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Something that emits i.i.d. samples from a fixed distribution.
pub trait SampleSource {
    type Sample: Clone;

    fn draw(&mut self) -> Self::Sample;

    /// The full law as `(sample, probability)` pairs, when it is small
    /// enough to list.
    fn support(&self) -> Option<Vec<(Self::Sample, f64)>>;
}

/// `Q_σ` over ordered `k`-clauses.
#[derive(Clone, Debug)]
pub struct ClauseStream {
    model: PlantedModel,
    rng: ChaCha8Rng,
    cap: u64,
}

impl ClauseStream {
    pub fn new(model: PlantedModel, rng: ChaCha8Rng) -> Result<Self> {
        if model.distribution().is_none() {
            return Err(Error::ModelMismatch(
                "clause stream needs a clause distribution",
            ));
        }
        Ok(ClauseStream {
            model,
            rng,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_enumeration_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn model(&self) -> &PlantedModel {
        &self.model
    }
}

impl SampleSource for ClauseStream {
    type Sample = LiteralVec;

    fn draw(&mut self) -> LiteralVec {
        self.model
            .sample_clause(&mut self.rng)
            .expect("checked at construction")
    }

    fn support(&self) -> Option<Vec<(LiteralVec, f64)>> {
        let ix = TupleIndexer::new(self.model.n(), self.model.k()).ok()?;
        if ix.size() > self.cap {
            return None;
        }
        Some(
            ix.iter()
                .map(|c| {
                    let p = self.model.clause_probability(&c).expect("in range");
                    (c, p)
                })
                .collect(),
        )
    }
}

/// `U_k` over ordered `k`-clauses.
#[derive(Clone, Debug)]
pub struct UniformClauseStream {
    n: usize,
    k: usize,
    rng: ChaCha8Rng,
    cap: u64,
}

impl UniformClauseStream {
    pub fn new(n: usize, k: usize, rng: ChaCha8Rng) -> Result<Self> {
        count_tuples(n, k)?;
        Ok(UniformClauseStream {
            n,
            k,
            rng,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }
}

impl SampleSource for UniformClauseStream {
    type Sample = LiteralVec;

    fn draw(&mut self) -> LiteralVec {
        sample_uniform_clause(self.n, self.k, &mut self.rng).expect("checked at construction")
    }

    fn support(&self) -> Option<Vec<(LiteralVec, f64)>> {
        uniform_clause_support(self.n, self.k, self.cap)
    }
}

/// `U_k` as an explicit list, or `None` above `cap`.
pub fn uniform_clause_support(n: usize, k: usize, cap: u64) -> Option<Vec<(LiteralVec, f64)>> {
    let ix = TupleIndexer::new(n, k).ok()?;
    if ix.size() > cap {
        return None;
    }
    let p = 1.0 / ix.size() as f64;
    Some(ix.iter().map(|c| (c, p)).collect())
}

/// `P_σ` over labeled variable tuples.
#[derive(Clone, Debug)]
pub struct LabeledStream {
    model: PlantedModel,
    rng: ChaCha8Rng,
    cap: u64,
}

impl LabeledStream {
    pub fn new(model: PlantedModel, rng: ChaCha8Rng) -> Result<Self> {
        if model.predicate().is_none() {
            return Err(Error::ModelMismatch("labeled stream needs a predicate"));
        }
        Ok(LabeledStream {
            model,
            rng,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }
}

impl SampleSource for LabeledStream {
    type Sample = LabeledTuple;

    fn draw(&mut self) -> LabeledTuple {
        self.model
            .sample_labeled(&mut self.rng)
            .expect("checked at construction")
    }

    fn support(&self) -> Option<Vec<(LabeledTuple, f64)>> {
        let ix = TupleIndexer::unsigned(self.model.n(), self.model.k()).ok()?;
        if count_variable_tuples(self.model.n(), self.model.k()).ok()? * 2 > self.cap {
            return None;
        }
        let mut out = Vec::with_capacity(ix.size() as usize * 2);
        for t in ix.iter() {
            let vars: SmallVec<[usize; 8]> = t.iter().map(|l| l.var()).collect();
            for label in [-1i8, 1] {
                let p = self
                    .model
                    .labeled_probability(&vars, label)
                    .expect("in range");
                out.push((
                    LabeledTuple {
                        vars: vars.clone(),
                        label,
                    },
                    p,
                ));
            }
        }
        Some(out)
    }
}

/// A finite explicit distribution.
#[derive(Clone, Debug)]
pub struct TableSource<T: Clone> {
    items: Vec<(T, f64)>,
    index: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl<T: Clone> TableSource<T> {
    pub fn new(items: Vec<(T, f64)>, rng: ChaCha8Rng) -> Result<Self> {
        let index = WeightedIndex::new(items.iter().map(|(_, p)| *p))
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(TableSource { items, index, rng })
    }
}

impl<T: Clone> SampleSource for TableSource<T> {
    type Sample = T;

    fn draw(&mut self) -> T {
        self.items[self.index.sample(&mut self.rng)].0.clone()
    }

    fn support(&self) -> Option<Vec<(T, f64)>> {
        let total: f64 = self.items.iter().map(|(_, p)| p).sum();
        Some(
            self.items
                .iter()
                .map(|(x, p)| (x.clone(), p / total))
                .collect(),
        )
    }
}

/// `τ = max{1/t, sqrt(p(1-p)/t)}`.
pub fn vstat_tolerance(p: f64, t: u64) -> f64 {
    let t = t as f64;
    (1.0 / t).max((p * (1.0 - p) / t).max(0.0).sqrt())
}

/// Collection of subsets of `{0, …, L-1}` whose masses an MVSTAT answer must
/// respect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSpec {
    sets: Vec<Vec<usize>>,
}

impl SubsetSpec {
    pub fn new(l: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty()
            || sets
                .iter()
                .any(|s| s.is_empty() || s.iter().any(|&i| i >= l))
        {
            return Err(Error::EmptySubsetSpec);
        }
        Ok(SubsetSpec { sets })
    }

    pub fn singletons(l: usize) -> Self {
        SubsetSpec {
            sets: (0..l).map(|i| vec![i]).collect(),
        }
    }

    pub fn full(l: usize) -> Self {
        SubsetSpec {
            sets: vec![(0..l).collect()],
        }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Largest violation `|Σ_Z v - p_Z| - τ(p_Z)` over the spec; nonpositive
    /// means every constraint holds.
    pub fn worst_violation(&self, answer: &[f64], exact: &[f64], t: u64) -> f64 {
        self.sets
            .iter()
            .map(|z| {
                let v: f64 = z.iter().map(|&i| answer[i]).sum();
                let p: f64 = z.iter().map(|&i| exact[i]).sum();
                (v - p).abs() - vstat_tolerance(p.clamp(0.0, 1.0), t)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QueryKind {
    #[serde(rename = "1-STAT")]
    OneStat,
    #[serde(rename = "1-MSTAT")]
    OneMstat,
    #[serde(rename = "VSTAT")]
    Vstat,
    #[serde(rename = "MVSTAT")]
    Mvstat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptRecord {
    pub query_id: u64,
    pub kind: QueryKind,
    #[serde(rename = "L")]
    pub l: usize,
    pub t: u64,
    pub cost: u64,
    pub samples: u64,
    pub answer_digest: String,
}

/// Answer of a VSTAT query with the quantities behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VstatAnswer {
    pub value: f64,
    /// Empirical mean before clamping (honest mode) or the reference
    /// expectation (adversarial mode).
    pub raw: f64,
    pub tau: f64,
    /// `E_D[h]`, when the source is enumerable.
    pub exact: Option<f64>,
}

pub enum Mode<X> {
    Honest,
    /// Answers with the reference expectation, clamped into the valid band.
    Adversarial {
        reference: Vec<(X, f64)>,
    },
}

/// Stateful oracle over one sample source.
pub struct OracleSession<S: SampleSource> {
    source: S,
    mode: Mode<S::Sample>,
    t: u64,
    budget: Option<u64>,
    samples: u64,
    queries: u64,
    cost: u64,
    record: bool,
    transcript: Vec<TranscriptRecord>,
    reuse: bool,
    batch: Vec<S::Sample>,
    /// Cached support; the inner `None` means not enumerable.
    exact: Option<Option<Law<S::Sample>>>,
}

type Law<X> = Vec<(X, f64)>;

impl<S: SampleSource> OracleSession<S> {
    pub fn honest(source: S, t: u64) -> Self {
        Self::with_mode(source, t, Mode::Honest)
    }

    pub fn adversarial(source: S, t: u64, reference: Vec<(S::Sample, f64)>) -> Self {
        Self::with_mode(source, t, Mode::Adversarial { reference })
    }

    pub fn with_mode(source: S, t: u64, mode: Mode<S::Sample>) -> Self {
        OracleSession {
            source,
            mode,
            t: t.max(1),
            budget: None,
            samples: 0,
            queries: 0,
            cost: 0,
            record: true,
            transcript: Vec::new(),
            reuse: false,
            batch: Vec::new(),
            exact: None,
        }
    }

    /// Hard cap on samples drawn from the source.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Keep only aggregate counters instead of per-query records.
    pub fn without_transcript(mut self) -> Self {
        self.record = false;
        self
    }

    /// Answer every VSTAT/MVSTAT query from one shared batch of `t` samples.
    pub fn with_batch_reuse(mut self) -> Self {
        self.reuse = true;
        self
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn samples_consumed(&self) -> u64 {
        self.samples
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    /// Σ per-query costs (`|𝒮|` for MVSTAT, 1 otherwise).
    pub fn total_cost(&self) -> u64 {
        self.cost
    }

    pub fn transcript(&self) -> &[TranscriptRecord] {
        &self.transcript
    }

    pub fn transcript_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.transcript {
            out.push_str(&serde_json::to_string(r).expect("plain data"));
            out.push('\n');
        }
        out
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn into_source(self) -> S {
        self.source
    }

    fn draw(&mut self) -> Result<S::Sample> {
        if let Some(budget) = self.budget {
            if self.samples >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        self.samples += 1;
        Ok(self.source.draw())
    }

    fn draw_batch(&mut self, t: u64) -> Result<(Vec<S::Sample>, u64)> {
        if self.reuse && self.batch.len() as u64 == t {
            return Ok((self.batch.clone(), 0));
        }
        if let Some(budget) = self.budget {
            if self.samples + t > budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        let batch: Vec<S::Sample> = (0..t).map(|_| self.draw()).collect::<Result<_>>()?;
        if self.reuse {
            self.batch = batch.clone();
        }
        Ok((batch, t))
    }

    fn exact_law(&mut self) -> Option<&[(S::Sample, f64)]> {
        if self.exact.is_none() {
            self.exact = Some(self.source.support());
        }
        self.exact.as_ref().and_then(|o| o.as_deref())
    }

    fn log<A: Serialize>(
        &mut self,
        kind: QueryKind,
        l: usize,
        cost: u64,
        samples: u64,
        answer: &A,
    ) {
        let id = self.queries;
        self.queries += 1;
        self.cost += cost;
        if self.record {
            let bytes = serde_json::to_vec(answer).expect("plain data");
            let digest = Sha256::digest(&bytes);
            let answer_digest = digest.iter().map(|b| format!("{b:02x}")).collect();
            self.transcript.push(TranscriptRecord {
                query_id: id,
                kind,
                l,
                t: if matches!(kind, QueryKind::Vstat | QueryKind::Mvstat) {
                    self.t
                } else {
                    1
                },
                cost,
                samples,
                answer_digest,
            });
        }
    }

    /// `h` on one fresh sample.
    pub fn one_stat(&mut self, h: impl Fn(&S::Sample) -> bool) -> Result<bool> {
        let x = self.draw()?;
        let b = h(&x);
        self.log(QueryKind::OneStat, 2, 1, 1, &b);
        Ok(b)
    }

    /// `h` on one fresh sample, with values checked against `0..l`.
    pub fn one_mstat(&mut self, l: usize, h: impl Fn(&S::Sample) -> usize) -> Result<usize> {
        if l < 2 {
            return Err(Error::QueryRange(l));
        }
        let x = self.draw()?;
        let v = h(&x);
        if v >= l {
            return Err(Error::QueryOutOfRange { value: v, range: l });
        }
        self.log(QueryKind::OneMstat, l, 1, 1, &v);
        Ok(v)
    }

    /// VSTAT(t) answer for a 0/1 query.
    pub fn vstat(&mut self, h: impl Fn(&S::Sample) -> bool) -> Result<VstatAnswer> {
        let t = self.t;
        let exact = self.exact_law().map(|law| {
            law.iter()
                .filter(|(x, _)| h(x))
                .map(|(_, p)| p)
                .sum::<f64>()
        });
        let reference: Option<f64> = match &self.mode {
            Mode::Honest => None,
            Mode::Adversarial { reference } => {
                Some(reference.iter().filter(|(x, _)| h(x)).map(|(_, q)| q).sum())
            }
        };
        let (answer, samples) = match reference {
            None => {
                let (batch, drawn) = self.draw_batch(t)?;
                let raw = batch.iter().filter(|x| h(x)).count() as f64 / t as f64;
                let answer = match exact {
                    Some(p) => {
                        let tau = vstat_tolerance(p, t);
                        VstatAnswer {
                            value: raw.clamp(p - tau, p + tau),
                            raw,
                            tau,
                            exact,
                        }
                    }
                    None => VstatAnswer {
                        value: raw,
                        raw,
                        tau: vstat_tolerance(raw, t),
                        exact: None,
                    },
                };
                (answer, drawn)
            }
            Some(raw) => {
                let p = exact.ok_or(Error::NotEnumerable)?;
                let tau = vstat_tolerance(p, t);
                (
                    VstatAnswer {
                        value: raw.clamp(p - tau, p + tau),
                        raw,
                        tau,
                        exact,
                    },
                    0,
                )
            }
        };
        self.log(QueryKind::Vstat, 2, 1, samples, &answer.value);
        Ok(answer)
    }

    /// MVSTAT(L, t) answer vector. With an enumerable source, the raw
    /// vector `w` is pulled toward the exact law `p` as `p + λ(w - p)` with
    /// the largest `λ ≤ 1` that meets every constraint in `spec`.
    pub fn mvstat(
        &mut self,
        l: usize,
        h: impl Fn(&S::Sample) -> usize,
        spec: &SubsetSpec,
    ) -> Result<Vec<f64>> {
        if l < 2 {
            return Err(Error::QueryRange(l));
        }
        if spec.is_empty() || spec.sets().iter().any(|z| z.iter().any(|&i| i >= l)) {
            return Err(Error::EmptySubsetSpec);
        }
        let t = self.t;
        let exact = match self.exact_law() {
            Some(law) => {
                let mut p = vec![0.0; l];
                for (x, q) in law {
                    let v = h(x);
                    if v >= l {
                        return Err(Error::QueryOutOfRange { value: v, range: l });
                    }
                    p[v] += q;
                }
                Some(p)
            }
            None => None,
        };
        let reference = match &self.mode {
            Mode::Honest => None,
            Mode::Adversarial { reference } => {
                let mut w = vec![0.0; l];
                for (x, q) in reference {
                    let v = h(x);
                    if v >= l {
                        return Err(Error::QueryOutOfRange { value: v, range: l });
                    }
                    w[v] += q;
                }
                Some(w)
            }
        };
        let (raw, samples) = match reference {
            None => {
                let (batch, drawn) = self.draw_batch(t)?;
                let mut w = vec![0.0; l];
                for x in &batch {
                    let v = h(x);
                    if v >= l {
                        return Err(Error::QueryOutOfRange { value: v, range: l });
                    }
                    w[v] += 1.0 / t as f64;
                }
                (w, drawn)
            }
            Some(w) => {
                if exact.is_none() {
                    return Err(Error::NotEnumerable);
                }
                (w, 0)
            }
        };
        let answer = match exact {
            Some(p) => shrink_into_band(&raw, &p, spec, t),
            None => raw,
        };
        self.log(QueryKind::Mvstat, l, spec.len() as u64, samples, &answer);
        Ok(answer)
    }
}

fn shrink_into_band(raw: &[f64], exact: &[f64], spec: &SubsetSpec, t: u64) -> Vec<f64> {
    let mut lambda: f64 = 1.0;
    for z in spec.sets() {
        let w: f64 = z.iter().map(|&i| raw[i]).sum();
        let p: f64 = z.iter().map(|&i| exact[i]).sum();
        let gap = (w - p).abs();
        let tau = vstat_tolerance(p.clamp(0.0, 1.0), t);
        if gap > tau {
            lambda = lambda.min(tau / gap);
        }
    }
    raw.iter()
        .zip(exact)
        .map(|(w, p)| p + lambda * (w - p))
        .collect()
}

/// MVSTAT(L, t) from `L` indicator queries to a VSTAT backend. The session
/// should be configured with `t' = 4Lt`.
pub fn mvstat_via_vstat<S: SampleSource>(
    backend: &mut OracleSession<S>,
    l: usize,
    h: impl Fn(&S::Sample) -> usize,
) -> Result<Vec<f64>> {
    if l < 2 {
        return Err(Error::QueryRange(l));
    }
    (0..l)
        .map(|i| backend.vstat(|x| h(x) == i).map(|a| a.value))
        .collect()
}

/// One attempt of the coin construction: `Some(j)` on success, `None` for ⊥.
/// Success draws `L + 1` samples, failure `L`.
pub fn one_mstat_via_one_stat<S: SampleSource, R: Rng + ?Sized>(
    backend: &mut OracleSession<S>,
    l: usize,
    h: impl Fn(&S::Sample) -> usize,
    rng: &mut R,
) -> Result<Option<usize>> {
    if l < 2 {
        return Err(Error::QueryRange(l));
    }
    let mut hit = None;
    let mut ones = 0;
    for i in 0..l {
        let outcome = backend.one_stat(|x| h(x) == i)?;
        if outcome && rng.gen::<bool>() {
            ones += 1;
            hit = Some(i);
        }
    }
    let j = match (ones, hit) {
        (1, Some(j)) => j,
        _ => return Ok(None),
    };
    let confirm = backend.one_stat(|x| h(x) == j)? && rng.gen::<bool>();
    Ok(if confirm { None } else { Some(j) })
}
