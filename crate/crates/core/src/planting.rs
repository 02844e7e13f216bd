//! Clause distributions, their Fourier certificates, and planted samplers.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::clause::{
    count_tuples, count_variable_tuples, normalize_positions, Assignment, Formula, Literal,
    LiteralVec, TupleIndexer,
};
use crate::error::{Error, Result};
use crate::fourier::{self, mask_from_positions, positions_from_mask, subsets_of_size};

pub const MAX_ARITY: usize = 16;
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_arity(k: usize) -> Result<()> {
    if k == 0 || k > MAX_ARITY {
        Err(Error::UnsupportedArity(k))
    } else {
        Ok(())
    }
}

/// A distribution `Q` over `{±1}^k` together with its Fourier table.
#[derive(Clone, Debug, PartialEq)]
pub struct ClauseDistribution {
    k: usize,
    weights: Vec<f64>,
    fourier: Vec<f64>,
}

impl ClauseDistribution {
    /// Table indexed by pattern bitmask (bit `i` set iff `y_i = -1`).
    pub fn new(k: usize, weights: Vec<f64>) -> Result<Self> {
        check_arity(k)?;
        if weights.len() != 1 << k {
            return Err(Error::TableLength {
                expected: 1 << k,
                got: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::NegativeWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let fourier = fourier::forward(&weights);
        Ok(ClauseDistribution {
            k,
            weights,
            fourier,
        })
    }

    /// `per_true[j]` is the weight of every string with exactly `j` TRUE entries.
    pub fn from_symmetric(k: usize, per_true: &[f64]) -> Result<Self> {
        check_arity(k)?;
        if per_true.len() != k + 1 {
            return Err(Error::TableLength {
                expected: k + 1,
                got: per_true.len(),
            });
        }
        let weights = (0..1usize << k)
            .map(|y| per_true[y.count_ones() as usize])
            .collect();
        Self::new(k, weights)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        check_arity(k)?;
        Self::new(k, vec![1.0 / (1u64 << k) as f64; 1 << k])
    }

    /// Uniform over strings with at least one TRUE entry.
    pub fn planted_sat(k: usize) -> Result<Self> {
        check_arity(k)?;
        let w = 1.0 / ((1u64 << k) - 1) as f64;
        let mut per = vec![w; k + 1];
        per[0] = 0.0;
        Self::from_symmetric(k, &per)
    }

    /// Uniform over strings with an odd number of TRUE entries.
    pub fn xor(k: usize) -> Result<Self> {
        check_arity(k)?;
        let w = 1.0 / (1u64 << (k - 1)) as f64;
        let per: Vec<f64> = (0..=k).map(|j| if j % 2 == 1 { w } else { 0.0 }).collect();
        Self::from_symmetric(k, &per)
    }

    /// 3-ary noisy parity: `eta/8` on strings with an even number of TRUE
    /// entries and `(2 - eta)/8` on the rest.
    pub fn noisy_parity(eta: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&eta) {
            return Err(Error::Probability(eta / 2.0));
        }
        let (a, b) = (eta / 8.0, (2.0 - eta) / 8.0);
        Self::from_symmetric(3, &[a, b, a, b])
    }

    /// Satisfiable 4-SAT weighting with vanishing first and second order
    /// coefficients.
    pub fn quiet_4sat() -> Self {
        Self::from_symmetric(4, &[0.0, 3.0 / 32.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 8.0])
            .expect("normalized")
    }

    /// Not-all-equal 3-SAT: uniform over strings with one or two TRUE entries.
    pub fn nae3() -> Self {
        Self::from_symmetric(3, &[0.0, 1.0 / 6.0, 1.0 / 6.0, 0.0]).expect("normalized")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, pattern: usize) -> f64 {
        self.weights[pattern]
    }

    /// Cached `Q̂(S)` for every subset mask.
    pub fn fourier(&self) -> &[f64] {
        &self.fourier
    }

    /// `Q̂(S)` by direct summation; `positions` are 0-based.
    pub fn coefficient(&self, positions: &[usize]) -> Result<f64> {
        for &p in positions {
            if p >= self.k {
                return Err(Error::InvalidPositions(format!(
                    "position {p} out of range for arity {}",
                    self.k
                )));
            }
        }
        Ok(fourier::coefficient(
            &self.weights,
            mask_from_positions(positions),
        ))
    }

    pub fn is_uniform(&self) -> bool {
        self.fourier[1..]
            .iter()
            .all(|c| c.abs() <= fourier::DEFAULT_ZERO_TOL)
    }

    pub fn complexity(&self) -> Result<ComplexityCertificate> {
        self.complexity_with_tol(fourier::DEFAULT_ZERO_TOL)
    }

    pub fn complexity_with_tol(&self, tol: f64) -> Result<ComplexityCertificate> {
        certify(self.k, &self.fourier, tol)
    }

    /// Marginal on the positions in `mask`; index bit `j` refers to the
    /// `j`-th smallest position.
    pub fn marginal(&self, mask: usize) -> Vec<f64> {
        let positions = positions_from_mask(mask);
        let mut out = vec![0.0; 1 << positions.len()];
        for (y, &w) in self.weights.iter().enumerate() {
            out[compress(y, &positions)] += w;
        }
        out
    }

    /// `Q ∘ negate`.
    pub fn negated(&self) -> Self {
        let full = (1usize << self.k) - 1;
        let weights = (0..1usize << self.k)
            .map(|y| self.weights[y ^ full])
            .collect();
        Self::new(self.k, weights).expect("permutation of a valid table")
    }
}

/// Bits of `y` at `positions`, packed into the low bits.
#[inline]
pub fn compress(y: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| acc | ((y >> p & 1) << j))
}

/// Minimal-degree nonzero Fourier coefficient and its support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCertificate {
    pub r: usize,
    /// 0-based positions, increasing.
    pub witness: Vec<usize>,
    pub coefficient: f64,
}

impl ComplexityCertificate {
    pub fn mask(&self) -> usize {
        mask_from_positions(&self.witness)
    }

    pub fn magnitude(&self) -> f64 {
        self.coefficient.abs()
    }
}

/// Smallest `r` with a coefficient above `tol`; witness is the
/// lexicographically first set of maximal magnitude at that size.
pub fn certify(k: usize, fourier: &[f64], tol: f64) -> Result<ComplexityCertificate> {
    for r in 1..=k {
        let sets = subsets_of_size(k, r);
        let best = sets
            .iter()
            .map(|&s| fourier[s].abs())
            .fold(0.0f64, f64::max);
        if best > tol {
            let s = sets
                .into_iter()
                .find(|&s| fourier[s].abs() >= best - 1e-12)
                .expect("maximum attained");
            return Ok(ComplexityCertificate {
                r,
                witness: positions_from_mask(s),
                coefficient: fourier[s],
            });
        }
    }
    Err(Error::UniformDistribution)
}

/// A predicate `P: {±1}^k -> {0,1}` stored as a bit table.
#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    k: usize,
    bits: Vec<u8>,
    fourier: Vec<f64>,
}

impl Predicate {
    pub fn new(k: usize, bits: Vec<u8>) -> Result<Self> {
        check_arity(k)?;
        if bits.len() != 1 << k {
            return Err(Error::TableLength {
                expected: 1 << k,
                got: bits.len(),
            });
        }
        if let Some((index, &b)) = bits.iter().enumerate().find(|(_, b)| **b > 1) {
            return Err(Error::Config(format!(
                "predicate entry {b} at {index} is not 0/1"
            )));
        }
        let signed: Vec<f64> = bits.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
        let fourier = fourier::forward(&signed);
        Ok(Predicate { k, bits, fourier })
    }

    /// 1 iff the number of TRUE entries is odd.
    pub fn parity(k: usize) -> Result<Self> {
        check_arity(k)?;
        Self::new(
            k,
            (0..1usize << k)
                .map(|y| (y.count_ones() % 2) as u8)
                .collect(),
        )
    }

    pub fn constant(k: usize, value: u8) -> Result<Self> {
        check_arity(k)?;
        Self::new(k, vec![value; 1 << k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn value(&self, pattern: usize) -> u8 {
        self.bits[pattern]
    }

    /// `P±(y) = 2 P(y) - 1`.
    #[inline]
    pub fn signed_value(&self, pattern: usize) -> f64 {
        2.0 * self.bits[pattern] as f64 - 1.0
    }

    /// Fourier table of `P±`.
    pub fn fourier(&self) -> &[f64] {
        &self.fourier
    }

    pub fn complexity(&self) -> Result<ComplexityCertificate> {
        certify(self.k, &self.fourier, fourier::DEFAULT_ZERO_TOL)
    }

    /// Pattern distribution of label-1 tuples when patterns are equinumerous.
    pub fn accepted_distribution(&self) -> Result<ClauseDistribution> {
        let ones = self.bits.iter().filter(|&&b| b == 1).count();
        if ones == 0 {
            return Err(Error::Config("predicate never accepts".into()));
        }
        let w = 1.0 / ones as f64;
        ClauseDistribution::new(self.k, self.bits.iter().map(|&b| b as f64 * w).collect())
    }
}

/// Two-valued `r`-ary parity law obtained by restricting clauses to a
/// witness set: `δ/2^r` on patterns with an even number of FALSE entries,
/// `(2-δ)/2^r` on the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityChannel {
    pub k: usize,
    pub r: usize,
    pub delta: f64,
    /// 0-based positions inside the source clause.
    pub positions: Vec<usize>,
}

impl ParityChannel {
    pub fn from_distribution(q: &ClauseDistribution) -> Result<Self> {
        let cert = q.complexity()?;
        Self::from_certificate(q, &cert)
    }

    pub fn from_certificate(q: &ClauseDistribution, cert: &ComplexityCertificate) -> Result<Self> {
        Self::from_fourier(q.k(), q.fourier(), cert, Some(q))
    }

    /// Channel for label-1 samples of a predicate model, treated as
    /// positive-literal clauses.
    pub fn from_predicate(p: &Predicate) -> Result<Self> {
        let q = p.accepted_distribution()?;
        let cert = q.complexity()?;
        Self::from_certificate(&q, &cert)
    }

    fn from_fourier(
        k: usize,
        fourier: &[f64],
        cert: &ComplexityCertificate,
        q: Option<&ClauseDistribution>,
    ) -> Result<Self> {
        let tol = fourier::DEFAULT_ZERO_TOL;
        let positions = normalize_positions(&cert.witness, k)?;
        let mask = mask_from_positions(&positions);
        let c = fourier[mask];
        if c.abs() <= tol {
            return Err(Error::DegenerateWitness { value: c });
        }
        let mut sub = (mask - 1) & mask;
        while sub != 0 {
            if fourier[sub].abs() > tol {
                return Err(Error::NonMinimalWitness {
                    subset: positions_from_mask(sub),
                    value: fourier[sub],
                });
            }
            sub = (sub - 1) & mask;
        }
        let r = positions.len();
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let delta = 1.0 + sign * (1u64 << k) as f64 * c;
        let channel = ParityChannel {
            k,
            r,
            delta,
            positions,
        };
        if let Some(q) = q {
            let marginal = q.marginal(mask);
            let table = channel.table();
            let deviation = marginal
                .iter()
                .zip(&table)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if deviation > tol {
                return Err(Error::NotParityMarginal { deviation });
            }
        }
        Ok(channel)
    }

    /// A source that already emits `r`-clauses with the parity law.
    pub fn pure(r: usize, delta: f64) -> Result<Self> {
        check_arity(r)?;
        if !(0.0..=2.0).contains(&delta) {
            return Err(Error::Probability(delta / 2.0));
        }
        if (delta - 1.0).abs() <= fourier::DEFAULT_ZERO_TOL {
            return Err(Error::DegenerateWitness { value: 0.0 });
        }
        Ok(ParityChannel {
            k: r,
            r,
            delta,
            positions: (0..r).collect(),
        })
    }

    /// Probability of an `r`-pattern (bitmask over TRUE entries).
    #[inline]
    pub fn probability(&self, pattern: usize) -> f64 {
        let falses = self.r - pattern.count_ones() as usize;
        let scale = 1.0 / (1u64 << self.r) as f64;
        if falses.is_multiple_of(2) {
            self.delta * scale
        } else {
            (2.0 - self.delta) * scale
        }
    }

    pub fn table(&self) -> Vec<f64> {
        (0..1usize << self.r).map(|y| self.probability(y)).collect()
    }

    pub fn distribution(&self) -> ClauseDistribution {
        ClauseDistribution::new(self.r, self.table()).expect("parity table is normalized")
    }

    /// `(δ - 1)^2`, the squared signal strength.
    pub fn strength(&self) -> f64 {
        (self.delta - 1.0).powi(2)
    }

    pub fn restrict(&self, clause: &[Literal]) -> LiteralVec {
        self.positions.iter().map(|&p| clause[p]).collect()
    }

    pub fn restrict_into(&self, clause: &[Literal], out: &mut LiteralVec) {
        out.clear();
        out.extend(self.positions.iter().map(|&p| clause[p]));
    }
}

/// Uniform ordered tuple of `k` distinct variables from `0..n`.
pub fn sample_distinct_vars<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
    out: &mut SmallVec<[usize; 8]>,
) {
    debug_assert!(k <= n);
    out.clear();
    if n >= 2 * k {
        while out.len() < k {
            let v = rng.gen_range(0..n);
            if !out.contains(&v) {
                out.push(v);
            }
        }
    } else {
        out.extend(rand::seq::index::sample(rng, n, k));
    }
}

/// One clause from the uniform distribution over ordered `k`-clauses.
pub fn sample_uniform_clause<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<LiteralVec> {
    if k > n {
        return Err(Error::TooFewVariables { n, k });
    }
    let mut vars = SmallVec::new();
    sample_distinct_vars(n, k, rng, &mut vars);
    Ok(vars.iter().map(|&v| Literal::new(v, rng.gen())).collect())
}

pub fn sample_uniform_formula<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    m: usize,
    rng: &mut R,
) -> Result<Formula> {
    let mut f = Formula::with_capacity(n, k, m);
    for _ in 0..m {
        f.push_unchecked(&sample_uniform_clause(n, k, rng)?);
    }
    Ok(f)
}

/// Either a clause distribution or a labeling predicate.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Clauses(ClauseDistribution),
    Predicate(Predicate),
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetric: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    predicate: Option<Vec<u8>>,
}

impl Source {
    pub fn k(&self) -> usize {
        match self {
            Source::Clauses(q) => q.k(),
            Source::Predicate(p) => p.k(),
        }
    }

    pub fn complexity(&self) -> Result<ComplexityCertificate> {
        match self {
            Source::Clauses(q) => q.complexity(),
            Source::Predicate(p) => p.complexity(),
        }
    }

    pub fn fourier(&self) -> &[f64] {
        match self {
            Source::Clauses(q) => q.fourier(),
            Source::Predicate(p) => p.fourier(),
        }
    }

    /// Parses `{"k", "table"}`, `{"k", "symmetric"}` or `{"k", "predicate"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let given = [
            file.table.is_some(),
            file.symmetric.is_some(),
            file.predicate.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(Error::Config(
                "exactly one of \"table\", \"symmetric\", \"predicate\" is required".into(),
            ));
        }
        check_arity(file.k)?;
        if let Some(t) = file.table {
            Ok(Source::Clauses(ClauseDistribution::new(file.k, t)?))
        } else if let Some(s) = file.symmetric {
            Ok(Source::Clauses(ClauseDistribution::from_symmetric(
                file.k, &s,
            )?))
        } else {
            Ok(Source::Predicate(Predicate::new(
                file.k,
                file.predicate.expect("counted above"),
            )?))
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            Source::Clauses(q) => ModelFile {
                k: q.k(),
                table: Some(q.weights().to_vec()),
                symmetric: None,
                predicate: None,
            },
            Source::Predicate(p) => ModelFile {
                k: p.k(),
                table: None,
                symmetric: None,
                predicate: Some(p.bits().to_vec()),
            },
        };
        serde_json::to_string(&file).expect("plain data")
    }
}

impl From<ClauseDistribution> for Source {
    fn from(q: ClauseDistribution) -> Self {
        Source::Clauses(q)
    }
}

impl From<Predicate> for Source {
    fn from(p: Predicate) -> Self {
        Source::Predicate(p)
    }
}

/// A variable tuple with its predicate label in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTuple {
    pub vars: SmallVec<[usize; 8]>,
    pub label: i8,
}

/// A source together with a planted assignment.
#[derive(Clone, Debug)]
pub struct PlantedModel {
    source: Source,
    sigma: Assignment,
    patterns: Option<WeightedIndex<f64>>,
}

impl PlantedModel {
    pub fn new(source: impl Into<Source>, sigma: Assignment) -> Result<Self> {
        let source = source.into();
        let k = source.k();
        if sigma.len() < k {
            return Err(Error::TooFewVariables { n: sigma.len(), k });
        }
        let patterns = match &source {
            Source::Clauses(q) => {
                Some(WeightedIndex::new(q.weights()).map_err(|e| Error::Config(e.to_string()))?)
            }
            Source::Predicate(_) => None,
        };
        Ok(PlantedModel {
            source,
            sigma,
            patterns,
        })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn k(&self) -> usize {
        self.source.k()
    }

    pub fn sigma(&self) -> &Assignment {
        &self.sigma
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn distribution(&self) -> Option<&ClauseDistribution> {
        match &self.source {
            Source::Clauses(q) => Some(q),
            Source::Predicate(_) => None,
        }
    }

    pub fn predicate(&self) -> Option<&Predicate> {
        match &self.source {
            Source::Predicate(p) => Some(p),
            Source::Clauses(_) => None,
        }
    }

    /// Exact draw from `Q_σ`: pattern first, then uniform variables with
    /// negations fixed by the pattern.
    pub fn sample_clause<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LiteralVec> {
        let mut out = LiteralVec::new();
        self.sample_clause_into(rng, &mut out)?;
        Ok(out)
    }

    pub fn sample_clause_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        out: &mut LiteralVec,
    ) -> Result<()> {
        let patterns = self.patterns.as_ref().ok_or(Error::ModelMismatch(
            "clause sampling needs a clause distribution",
        ))?;
        let y = patterns.sample(rng);
        let mut vars = SmallVec::new();
        sample_distinct_vars(self.n(), self.k(), rng, &mut vars);
        out.clear();
        for (i, &v) in vars.iter().enumerate() {
            let want_true = y >> i & 1 == 1;
            let is_true = self.sigma.get(v) < 0;
            out.push(Literal::new(v, want_true != is_true));
        }
        Ok(())
    }

    pub fn sample_formula<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Formula> {
        let mut f = Formula::with_capacity(self.n(), self.k(), m);
        let mut c = LiteralVec::new();
        for _ in 0..m {
            self.sample_clause_into(rng, &mut c)?;
            f.push_unchecked(&c);
        }
        Ok(f)
    }

    /// Uniform variable tuple with label `P±(σ restricted to the tuple)`.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LabeledTuple> {
        let p = self
            .predicate()
            .ok_or(Error::ModelMismatch("labeled sampling needs a predicate"))?;
        let mut vars = SmallVec::new();
        sample_distinct_vars(self.n(), self.k(), rng, &mut vars);
        let y = vars.iter().enumerate().fold(0usize, |acc, (i, &v)| {
            acc | (((self.sigma.get(v) < 0) as usize) << i)
        });
        Ok(LabeledTuple {
            vars,
            label: 2 * p.value(y) as i8 - 1,
        })
    }

    /// `Q_σ(C) = 2^k Q(σ(C)) / |X_k|`.
    pub fn clause_probability(&self, clause: &[Literal]) -> Result<f64> {
        let q = self.distribution().ok_or(Error::ModelMismatch(
            "clause probability needs a clause distribution",
        ))?;
        self.sigma.check_vars(clause)?;
        let size = count_tuples(self.n(), self.k())? as f64;
        Ok((1u64 << self.k()) as f64 * q.weight(self.sigma.pattern_index(clause)) / size)
    }

    /// `P_σ(t, b)` over `Y_k × {±1}`.
    pub fn labeled_probability(&self, vars: &[usize], label: i8) -> Result<f64> {
        let p = self.predicate().ok_or(Error::ModelMismatch(
            "labeled probability needs a predicate",
        ))?;
        let size = count_variable_tuples(self.n(), self.k())? as f64;
        let y = vars.iter().enumerate().fold(0usize, |acc, (i, &v)| {
            acc | (((self.sigma.get(v) < 0) as usize) << i)
        });
        Ok(if 2 * p.value(y) as i8 - 1 == label {
            1.0 / size
        } else {
            0.0
        })
    }
}

/// Independent inclusion of every `r`-clause: probability `δp` when its
/// pattern under `σ` has an even number of FALSE entries, `(2-δ)p` otherwise.
/// The clause space is walked lazily with geometric gaps.
pub fn sample_bernoulli_formula<R: Rng + ?Sized>(
    channel: &ParityChannel,
    sigma: &Assignment,
    p: f64,
    rng: &mut R,
) -> Result<Formula> {
    let r = channel.r;
    let n = sigma.len();
    let rate = p * channel.delta.max(2.0 - channel.delta);
    if !(0.0..=1.0).contains(&p) || rate > 1.0 {
        return Err(Error::Probability(rate));
    }
    let indexer = TupleIndexer::new(n, r)?;
    let mut f = Formula::new(n, r);
    if rate == 0.0 {
        return Ok(f);
    }
    let even = channel.delta * p / rate;
    let odd = (2.0 - channel.delta) * p / rate;
    let gaps = Geometric::new(rate).map_err(|_| Error::Probability(rate))?;
    let mut i = gaps.sample(rng);
    while i < indexer.size() {
        let clause = indexer.unindex(i)?;
        let falses = r - sigma.pattern_index(&clause).count_ones() as usize;
        let accept = if falses.is_multiple_of(2) { even } else { odd };
        if accept >= 1.0 || rng.gen::<f64>() < accept {
            f.push_unchecked(&clause);
        }
        i = i.saturating_add(1).saturating_add(gaps.sample(rng));
    }
    Ok(f)
}
