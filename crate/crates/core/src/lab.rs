//! Exact evaluation of structural quantities on enumerable instances.
//!
//! Clause tables are indexed by [`TupleIndexer`] order over `X_k`. Labeled
//! tables (predicate mode) live on `Y_k × {±1}` with index `2t + [b = -1]`.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use smallvec::SmallVec;

use crate::clause::{Assignment, TupleIndexer};
use crate::error::{Error, Result};
use crate::fourier::{positions_from_mask, walsh_hadamard};
use crate::planting::{ClauseDistribution, Predicate};

/// Largest domain the lab will enumerate.
pub const DOMAIN_CAP: u64 = 10_000_000;
/// Largest family for exact sign enumeration.
pub const SIGN_ENUMERATION_CAP: usize = 22;

fn domain(n: usize, l: usize, signed: bool) -> Result<TupleIndexer> {
    let ix = if signed {
        TupleIndexer::new(n, l)?
    } else {
        TupleIndexer::unsigned(n, l)?
    };
    if ix.size() > DOMAIN_CAP {
        return Err(Error::DomainTooLarge {
            size: ix.size(),
            cap: DOMAIN_CAP,
        });
    }
    Ok(ix)
}

fn check_len(table: &[f64], expected: usize) -> Result<()> {
    if table.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: table.len(),
        });
    }
    Ok(())
}

/// A real function on an enumerated domain.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryVector {
    pub h: Vec<f64>,
}

impl QueryVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if let Some(i) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("query entry {i} is not finite")));
        }
        Ok(QueryVector { h })
    }

    /// `‖h‖_D = sqrt(E_D[h²])`.
    pub fn norm(&self, reference: &[f64]) -> Result<f64> {
        check_len(reference, self.h.len())?;
        Ok(self
            .h
            .iter()
            .zip(reference)
            .map(|(h, d)| d * h * h)
            .sum::<f64>()
            .sqrt())
    }
}

/// `d(x) = D'(x)/D(x) - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityDeviation {
    pub d: Vec<f64>,
}

impl DensityDeviation {
    pub fn new(dist: &[f64], reference: &[f64]) -> Result<Self> {
        check_len(dist, reference.len())?;
        let d = dist
            .iter()
            .zip(reference)
            .map(|(&p, &q)| {
                if q > 0.0 {
                    Ok(p / q - 1.0)
                } else if p == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Config(
                        "distribution not absolutely continuous".into(),
                    ))
                }
            })
            .collect::<Result<_>>()?;
        Ok(DensityDeviation { d })
    }

    /// `E_D[d]`; zero up to rounding.
    pub fn mean(&self, reference: &[f64]) -> f64 {
        self.d.iter().zip(reference).map(|(d, p)| d * p).sum()
    }
}

/// `Q_σ` as a table over `X_k`.
pub fn clause_law(q: &ClauseDistribution, sigma: &Assignment) -> Result<Vec<f64>> {
    let ix = domain(sigma.len(), q.k(), true)?;
    let scale = (1u64 << q.k()) as f64 / ix.size() as f64;
    Ok(ix
        .iter()
        .map(|c| scale * q.weight(sigma.pattern_index(&c)))
        .collect())
}

/// `U_k` over `X_k`.
pub fn uniform_law(n: usize, k: usize) -> Result<Vec<f64>> {
    let ix = domain(n, k, true)?;
    Ok(vec![1.0 / ix.size() as f64; ix.size() as usize])
}

/// `Δ(σ, h) = E_{Q_σ}[h] - E_{U_k}[h]`.
pub fn delta(q: &ClauseDistribution, sigma: &Assignment, h: &[f64]) -> Result<f64> {
    let law = clause_law(q, sigma)?;
    check_len(h, law.len())?;
    let u = 1.0 / law.len() as f64;
    Ok(law.iter().zip(h).map(|(p, v)| (p - u) * v).sum())
}

/// `Γ_ℓ(σ, g) = E_{Z_{ℓ,σ}}[g] - E_{U_ℓ}[g]`, where `Z_{ℓ,σ}` is uniform on
/// `ℓ`-clauses with an odd number of TRUE literals.
pub fn gamma(sigma: &Assignment, g: &[f64], l: usize) -> Result<f64> {
    let ix = domain(sigma.len(), l, true)?;
    check_len(g, ix.size() as usize)?;
    let size = ix.size() as f64;
    let mut z = 0.0;
    let mut u = 0.0;
    for (c, v) in ix.iter().zip(g) {
        let odd = sigma.pattern_index(&c).count_ones() % 2 == 1;
        if odd {
            z += 2.0 * v;
        }
        u += v;
    }
    Ok((z - u) / size)
}

/// [`gamma`] through its polynomial form in `σ`:
/// `-(1/|X_ℓ|) Σ_A χ_A(σ) Σ_{C: V(C)=A} (-1)^{#neg(C)} g(C)`.
pub fn gamma_polynomial(sigma: &Assignment, g: &[f64], l: usize) -> Result<f64> {
    let ix = domain(sigma.len(), l, true)?;
    check_len(g, ix.size() as usize)?;
    let mut coeffs: BTreeMap<SmallVec<[usize; 8]>, f64> = BTreeMap::new();
    for (c, v) in ix.iter().zip(g) {
        let mut vars: SmallVec<[usize; 8]> = c.iter().map(|x| x.var()).collect();
        vars.sort_unstable();
        let negs = c.iter().filter(|x| x.is_negated()).count();
        let sign = if negs % 2 == 0 { 1.0 } else { -1.0 };
        *coeffs.entry(vars).or_default() += sign * v;
    }
    let total: f64 = coeffs
        .iter()
        .map(|(vars, c)| {
            let chi: i8 = vars.iter().map(|&v| sigma.get(v)).product();
            chi as f64 * c
        })
        .sum();
    Ok(-total / ix.size() as f64)
}

/// `h_S(C_ℓ) = (|X_ℓ| / |X_k|) Σ_{C : C|_S = C_ℓ} h(C)`.
pub fn project_query(h: &[f64], n: usize, k: usize, positions: &[usize]) -> Result<Vec<f64>> {
    project(h, n, k, positions, true)
}

fn project(h: &[f64], n: usize, k: usize, positions: &[usize], signed: bool) -> Result<Vec<f64>> {
    let positions = crate::clause::normalize_positions(positions, k).or_else(|e| {
        if positions.is_empty() && !signed {
            Ok(Vec::new())
        } else {
            Err(e)
        }
    })?;
    let full = domain(n, k, signed)?;
    let part = domain(n, positions.len(), signed)?;
    let width = if signed { 1 } else { 2 };
    check_len(h, full.size() as usize * width)?;
    let mut out = vec![0.0; part.size() as usize * width];
    for (i, c) in full.iter().enumerate() {
        let restricted: SmallVec<[_; 8]> = positions.iter().map(|&p| c[p]).collect();
        let j = part.index(&restricted)? as usize;
        for b in 0..width {
            out[j * width + b] += h[i * width + b];
        }
    }
    let scale = part.size() as f64 / full.size() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// `|Δ(σ,h) + 2^k Σ_{S≠∅} Q̂(S) Γ_{|S|}(σ, h_S)|`.
pub fn check_decomposition(q: &ClauseDistribution, sigma: &Assignment, h: &[f64]) -> Result<f64> {
    let lhs = delta(q, sigma, h)?;
    let k = q.k();
    let n = sigma.len();
    let mut rhs = 0.0;
    for s in 1..1usize << k {
        let c = q.fourier()[s];
        if c == 0.0 {
            continue;
        }
        let pos = positions_from_mask(s);
        let hs = project_query(h, n, k, &pos)?;
        rhs -= (1u64 << k) as f64 * c * gamma(sigma, &hs, pos.len())?;
    }
    Ok((lhs - rhs).abs())
}

/// `P_σ(t, b) = (b P±(σ(t)) + 1) / |Y_k × {±1}|`.
pub fn labeled_law(p: &Predicate, sigma: &Assignment) -> Result<Vec<f64>> {
    let ix = domain(sigma.len(), p.k(), false)?;
    let size = 2.0 * ix.size() as f64;
    let mut out = Vec::with_capacity(2 * ix.size() as usize);
    for t in ix.iter() {
        let v = p.signed_value(sigma.pattern_index(&t));
        out.push((v + 1.0) / size);
        out.push((1.0 - v) / size);
    }
    Ok(out)
}

/// Predicate-mode `Δ(σ, h) = E_{P_σ}[h] - E_{U'_k}[h]`.
pub fn delta_labeled(p: &Predicate, sigma: &Assignment, h: &[f64]) -> Result<f64> {
    let law = labeled_law(p, sigma)?;
    check_len(h, law.len())?;
    let u = 1.0 / law.len() as f64;
    Ok(law.iter().zip(h).map(|(a, v)| (a - u) * v).sum())
}

/// Predicate-mode `Γ'_ℓ(σ, g)` against `Z'_{ℓ,σ}(t, b) = (b χ(σ(t)) + 1) / |X'_ℓ|`.
/// `ℓ = 0` is allowed: `X'_0 = {()} × {±1}`.
pub fn gamma_labeled(sigma: &Assignment, g: &[f64], l: usize) -> Result<f64> {
    let ix = domain(sigma.len(), l, false)?;
    check_len(g, 2 * ix.size() as usize)?;
    let size = 2.0 * ix.size() as f64;
    let mut total = 0.0;
    for (i, t) in ix.iter().enumerate() {
        let chi = if sigma.pattern_index(&t).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        total += chi * (g[2 * i] - g[2 * i + 1]);
    }
    Ok(total / size)
}

/// Predicate-mode projection onto `Y_ℓ × {±1}`; `positions` may be empty.
pub fn project_labeled_query(
    h: &[f64],
    n: usize,
    k: usize,
    positions: &[usize],
) -> Result<Vec<f64>> {
    project(h, n, k, positions, false)
}

/// `|Δ(σ,h) - Σ_{S⊆[k]} P̂±(S) Γ'_{|S|}(σ, h_S)|`, the empty set included.
pub fn check_decomposition_labeled(p: &Predicate, sigma: &Assignment, h: &[f64]) -> Result<f64> {
    let lhs = delta_labeled(p, sigma, h)?;
    let k = p.k();
    let n = sigma.len();
    let mut rhs = 0.0;
    for s in 0..1usize << k {
        let c = p.fourier()[s];
        if c == 0.0 {
            continue;
        }
        let pos = positions_from_mask(s);
        let hs = project_labeled_query(h, n, k, &pos)?;
        rhs += c * gamma_labeled(sigma, &hs, pos.len())?;
    }
    Ok((lhs - rhs).abs())
}

/// `E_D[d_i d_j]` for deviation tables.
pub fn gram(devs: &[DensityDeviation], reference: &[f64]) -> Result<Vec<Vec<f64>>> {
    for d in devs {
        check_len(&d.d, reference.len())?;
    }
    let m = devs.len();
    let mut g = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v: f64 = devs[i]
                .d
                .iter()
                .zip(&devs[j].d)
                .zip(reference)
                .map(|((a, b), p)| a * b * p)
                .sum();
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// `(1/m) max_ε sqrt(εᵀ G ε)` over `ε ∈ {±1}^m` with `ε_0 = +1`, walked in
/// Gray-code order.
pub fn kappa_from_gram(g: &[Vec<f64>]) -> Result<f64> {
    let m = g.len();
    if m == 0 {
        return Err(Error::Config("empty family".into()));
    }
    if m > SIGN_ENUMERATION_CAP {
        return Err(Error::FamilyTooLarge {
            size: m,
            cap: SIGN_ENUMERATION_CAP,
        });
    }
    let mut eps = vec![1.0f64; m];
    let mut w: Vec<f64> = (0..m).map(|i| g[i].iter().sum()).collect();
    let mut value: f64 = w.iter().sum();
    let (mut best, mut best_code) = (value, 0u64);
    for step in 1..1u64 << (m - 1) {
        let j = step.trailing_zeros() as usize + 1;
        let old = eps[j];
        value += -4.0 * old * w[j] + 4.0 * g[j][j];
        for (wi, row) in w.iter_mut().zip(g) {
            *wi -= 2.0 * old * row[j];
        }
        eps[j] = -old;
        if value > best {
            best = value;
            best_code = step ^ (step >> 1);
        }
    }
    // Recompute the winner exactly.
    let e: Vec<f64> = (0..m)
        .map(|i| {
            if i > 0 && best_code >> (i - 1) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect();
    let exact: f64 = (0..m)
        .map(|i| (0..m).map(|j| e[i] * g[i][j] * e[j]).sum::<f64>())
        .sum();
    Ok(exact.max(0.0).sqrt() / m as f64)
}

/// `κ₂` of `dists` against `reference`.
pub fn discrimination_norm(dists: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let devs = dists
        .iter()
        .map(|d| DensityDeviation::new(d, reference))
        .collect::<Result<Vec<_>>>()?;
    kappa_from_gram(&gram(&devs, reference)?)
}

/// `sqrt(λ_max / m)` with `λ_max <= tr(G^{2^j})^{1/2^j}`, valid for
/// positive semidefinite `G`.
pub fn kappa_upper_bound(g: &[Vec<f64>]) -> f64 {
    const SQUARINGS: u32 = 10;
    let m = g.len();
    if m == 0 {
        return 0.0;
    }
    let mut a: Vec<Vec<f64>> = g.to_vec();
    let mut log_scale = 0.0;
    for _ in 0..SQUARINGS {
        let mut next = vec![vec![0.0; m]; m];
        for (i, row) in a.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    for (x, y) in next[i].iter_mut().zip(&a[l]) {
                        *x += v * y;
                    }
                }
            }
        }
        let s = next
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if s == 0.0 {
            return 0.0;
        }
        next.iter_mut()
            .flat_map(|r| r.iter_mut())
            .for_each(|v| *v /= s);
        log_scale = 2.0 * log_scale + s.ln();
        a = next;
    }
    let trace: f64 = (0..m).map(|i| a[i][i]).sum();
    let lambda = ((log_scale + trace.ln()) / (1u64 << SQUARINGS) as f64).exp();
    (lambda / m as f64).sqrt()
}

/// Deviations of `Q_σ` from `U_k` for every `σ ∈ {±1}^n`, indexed by
/// bitmask (bit `v` set iff `σ_v = -1`).
pub struct AssignmentFamily {
    n: usize,
    /// `g(τ) = E_U[d_1 d_τ]`; the Gram matrix is `G[σ][σ'] = g(σ xor σ')`.
    row: Vec<f64>,
}

impl AssignmentFamily {
    pub const MAX_N: usize = 16;

    pub fn new(q: &ClauseDistribution, n: usize) -> Result<Self> {
        if n > Self::MAX_N {
            return Err(Error::FamilyTooLarge {
                size: 1 << n.min(63),
                cap: 1 << Self::MAX_N,
            });
        }
        let base = clause_law(q, &Assignment::all(n, 1))?;
        let size = base.len() as f64;
        let d1: Vec<f64> = base.iter().map(|p| p * size - 1.0).collect();
        let row = (0..1usize << n)
            .map(|tau| {
                let sigma = mask_assignment(tau, n);
                let law = clause_law(q, &sigma)?;
                Ok(d1
                    .iter()
                    .zip(&law)
                    .map(|(a, p)| a * (p * size - 1.0))
                    .sum::<f64>()
                    / size)
            })
            .collect::<Result<_>>()?;
        Ok(AssignmentFamily { n, row })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// `‖d_σ‖²`, the same for every member.
    pub fn norm_squared(&self) -> f64 {
        self.row[0]
    }

    /// Gram matrix of a subfamily.
    pub fn gram(&self, members: &[usize]) -> Vec<Vec<f64>> {
        members
            .iter()
            .map(|&a| members.iter().map(|&b| self.row[a ^ b]).collect())
            .collect()
    }

    /// Exact `κ₂` of the whole family. The Gram matrix is a convolution on
    /// `Z_2^n`, so its characters are eigenvectors with constant-magnitude
    /// coordinates and `κ₂ = sqrt(λ_max / 2^n)`.
    pub fn kappa_full(&self) -> f64 {
        let mut spectrum = self.row.clone();
        walsh_hadamard(&mut spectrum);
        let lambda = spectrum.iter().cloned().fold(0.0, f64::max);
        (lambda / self.size() as f64).sqrt()
    }

    /// `κ₂` of a subfamily: exact up to the enumeration cap or for the whole
    /// family, otherwise an upper bound. The flag tells which.
    pub fn kappa(&self, members: &[usize]) -> Result<(f64, bool)> {
        if members.len() == self.size() {
            return Ok((self.kappa_full(), true));
        }
        let g = self.gram(members);
        if members.len() <= SIGN_ENUMERATION_CAP {
            Ok((kappa_from_gram(&g)?, true))
        } else {
            Ok((kappa_upper_bound(&g), false))
        }
    }
}

/// Bitmask (bit `v` set iff `σ_v = -1`) to assignment.
pub fn mask_assignment(mask: usize, n: usize) -> Assignment {
    Assignment::new(
        (0..n)
            .map(|v| if mask >> v & 1 == 1 { -1 } else { 1 })
            .collect(),
    )
    .expect("signs")
}

/// `κ₂ · n^{r/2}` per `n`, and the spread `max / min` of those values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingBand {
    pub r: usize,
    pub points: Vec<(usize, f64)>,
    pub ratio: f64,
}

pub fn scaling_band(q: &ClauseDistribution, ns: &[usize]) -> Result<ScalingBand> {
    let r = q.complexity()?.r;
    let points = ns
        .iter()
        .map(|&n| {
            let fam = AssignmentFamily::new(q, n)?;
            Ok((n, fam.kappa_full() * (n as f64).powf(r as f64 / 2.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let hi = points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let lo = points.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    Ok(ScalingBand {
        r,
        points,
        ratio: hi / lo,
    })
}

/// Outcome of a sampled statistical-dimension probe.
#[derive(Clone, Debug, PartialEq)]
pub struct SdnProbe {
    /// Largest grid value `q` such that every tested `q' <= q` passed.
    pub passed: Option<usize>,
    /// First grid value with a sampled subfamily above the threshold.
    pub first_failure: Option<usize>,
    /// `(q, threshold, worst κ₂ seen, all values exact)`.
    pub rows: Vec<(usize, f64, f64, bool)>,
}

/// For each `q` in the ascending `grid`, draws `trials` uniform subfamilies
/// of size `⌈2^n / q⌉` and compares their `κ₂` with `kappa(q)`. Where a
/// subfamily is too large for exact enumeration an upper bound is used, so a
/// pass is always genuine. This is one-sided evidence only.
pub fn sdn_probe<R: Rng + ?Sized>(
    family: &AssignmentFamily,
    kappa: impl Fn(usize) -> f64,
    grid: &[usize],
    trials: usize,
    rng: &mut R,
) -> Result<SdnProbe> {
    let mut out = SdnProbe {
        passed: None,
        first_failure: None,
        rows: Vec::new(),
    };
    for &q in grid {
        if q == 0 {
            return Err(Error::Config("probe grid must be positive".into()));
        }
        let size = family.size().div_ceil(q).max(1);
        let threshold = kappa(q);
        let mut worst = 0.0f64;
        let mut exact = true;
        let reps = if size == family.size() { 1 } else { trials };
        for _ in 0..reps {
            let members = sample(rng, family.size(), size).into_vec();
            let (k, e) = family.kappa(&members)?;
            worst = worst.max(k);
            exact &= e;
        }
        out.rows.push((q, threshold, worst, exact));
        if worst <= threshold {
            if out.first_failure.is_none() {
                out.passed = Some(q);
            }
        } else if out.first_failure.is_none() {
            out.first_failure = Some(q);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::Literal;
    use crate::planting::PlantedModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_q<R: Rng>(k: usize, rng: &mut R) -> ClauseDistribution {
        let w: Vec<f64> = (0..1 << k).map(|_| rng.gen::<f64>() + 0.01).collect();
        let s: f64 = w.iter().sum();
        ClauseDistribution::new(k, w.iter().map(|v| v / s).collect()).unwrap()
    }

    fn random_table<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn delta_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = Assignment::random(4, &mut rng);
        let u = ClauseDistribution::uniform(2).unwrap();
        let h = random_table(48, &mut rng);
        assert!(delta(&u, &sigma, &h).unwrap().abs() < 1e-15);
        let q = random_q(2, &mut rng);
        assert!(delta(&q, &sigma, &[3.0; 48]).unwrap().abs() < 1e-14);
        assert!(matches!(
            delta(&q, &sigma, &[0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            clause_law(
                &ClauseDistribution::uniform(8).unwrap(),
                &Assignment::all(30, 1)
            ),
            Err(Error::DomainTooLarge { .. } | Error::CountOverflow { .. })
        ));
    }

    #[test]
    fn delta_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = Assignment::random(4, &mut rng);
        let q = random_q(2, &mut rng);
        let ix = TupleIndexer::new(4, 2).unwrap();
        let h = random_table(ix.size() as usize, &mut rng);
        let exact = delta(&q, &sigma, &h).unwrap();
        let model = PlantedModel::new(q, sigma).unwrap();
        let trials = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..trials {
            let c = model.sample_clause(&mut rng).unwrap();
            let v = h[ix.index(&c).unwrap() as usize];
            sum += v;
            sq += v * v;
        }
        let mean = sum / trials as f64;
        let se = ((sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        let uniform_mean = h.iter().sum::<f64>() / h.len() as f64;
        assert!((mean - uniform_mean - exact).abs() < 4.0 * se);
    }

    #[test]
    fn gamma_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let sigma = Assignment::random(5, &mut rng);
            let g = random_table(80, &mut rng);
            let a = gamma(&sigma, &g, 2).unwrap();
            let b = gamma_polynomial(&sigma, &g, 2).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let sigma = Assignment::random(5, &mut rng);
        assert!(gamma(&sigma, &[2.5; 80], 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gamma_single_literal_by_hand() {
        // Z_1 puts mass 2/4 on each TRUE literal of the 4 in X_1 (n = 2).
        let ix = TupleIndexer::new(2, 1).unwrap();
        let mut g = vec![0.0; 4];
        g[ix.index(&[Literal::positive(0)]).unwrap() as usize] = 1.0;
        let sigma_true = Assignment::new(vec![-1, 1]).unwrap();
        let sigma_false = Assignment::new(vec![1, 1]).unwrap();
        assert!((gamma(&sigma_true, &g, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((gamma(&sigma_false, &g, 1).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (n, k) = (5, 3);
        let size = TupleIndexer::new(n, k).unwrap().size() as usize;
        let hs = project_query(&vec![1.5; size], n, k, &[0, 2]).unwrap();
        assert!(hs.iter().all(|v| (v - 1.5).abs() < 1e-12));
        let h = random_table(size, &mut rng);
        assert_eq!(project_query(&h, n, k, &[0, 1, 2]).unwrap(), h);
        for _ in 0..100 {
            let h = random_table(size, &mut rng);
            let s = rng.gen_range(1..8usize);
            let pos = positions_from_mask(s);
            let hs = project_query(&h, n, k, &pos).unwrap();
            let nk = QueryVector::new(h)
                .unwrap()
                .norm(&uniform_law(n, k).unwrap())
                .unwrap();
            let nl = QueryVector::new(hs)
                .unwrap()
                .norm(&uniform_law(n, pos.len()).unwrap())
                .unwrap();
            assert!(nl <= nk * (1.0 + 1e-12));
        }
    }

    #[test]
    fn decomposition_holds_for_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let q = random_q(3, &mut rng);
            let sigma = Assignment::random(5, &mut rng);
            let h = random_table(480, &mut rng);
            assert!(check_decomposition(&q, &sigma, &h).unwrap() <= 1e-9);
        }
        let u = ClauseDistribution::uniform(3).unwrap();
        let sigma = Assignment::random(5, &mut rng);
        let h = random_table(480, &mut rng);
        assert!(delta(&u, &sigma, &h).unwrap().abs() < 1e-15);
        assert!(check_decomposition(&u, &sigma, &h).unwrap() < 1e-15);
    }

    #[test]
    fn labeled_decomposition_parity_predicate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = Predicate::parity(2).unwrap();
        for _ in 0..20 {
            let sigma = Assignment::random(4, &mut rng);
            let h = random_table(24, &mut rng);
            assert!(check_decomposition_labeled(&p, &sigma, &h).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn labeled_decomposition_negative_form_fails() {
        // The `-2^k Σ` scaling does not hold in predicate mode.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = Predicate::new(3, vec![1, 0, 0, 1, 1, 1, 0, 0]).unwrap();
        let sigma = Assignment::random(5, &mut rng);
        let h = random_table(120, &mut rng);
        let lhs = delta_labeled(&p, &sigma, &h).unwrap();
        let mut alt = 0.0;
        for s in 1..8usize {
            let pos = positions_from_mask(s);
            let hs = project_labeled_query(&h, 5, 3, &pos).unwrap();
            alt -= 8.0 * p.fourier()[s] * gamma_labeled(&sigma, &hs, pos.len()).unwrap();
        }
        assert!((lhs - alt).abs() > 1e-6);
        assert!(check_decomposition_labeled(&p, &sigma, &h).unwrap() <= 1e-9);
    }

    #[test]
    fn kappa_trivial_cases() {
        let u = uniform_law(4, 2).unwrap();
        assert_eq!(
            discrimination_norm(std::slice::from_ref(&u), &u).unwrap(),
            0.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = random_q(2, &mut rng);
        let sigma = Assignment::random(4, &mut rng);
        let law = clause_law(&q, &sigma).unwrap();
        let d = DensityDeviation::new(&law, &u).unwrap();
        assert!(d.mean(&u).abs() < 1e-12);
        let direct = QueryVector::new(d.d.clone()).unwrap().norm(&u).unwrap();
        let k = discrimination_norm(&[law], &u).unwrap();
        assert!((k - direct).abs() < 1e-12);
        let too_many = vec![u.clone(); 23];
        assert!(matches!(
            discrimination_norm(&too_many, &u),
            Err(Error::FamilyTooLarge { .. })
        ));
    }

    /// Local ascent `h <- Σ sign(<d_i,h>) d_i` from many starts.
    fn kappa_by_ascent(devs: &[Vec<f64>], reference: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .zip(reference)
                .map(|((x, y), p)| x * y * p)
                .sum()
        };
        let m = devs.len() as f64;
        let mut best = 0.0f64;
        for _ in 0..200 {
            let mut h: Vec<f64> = (0..reference.len())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            for _ in 0..50 {
                let mut next = vec![0.0; h.len()];
                for d in devs {
                    let s = dot(d, &h).signum();
                    next.iter_mut().zip(d).for_each(|(x, v)| *x += s * v);
                }
                h = next;
            }
            let norm = dot(&h, &h).sqrt();
            if norm > 0.0 {
                let v: f64 = devs.iter().map(|d| dot(d, &h).abs()).sum::<f64>() / (m * norm);
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn kappa_matches_dual_ascent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = uniform_law(4, 2).unwrap();
        for m in 1..=4 {
            let laws: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    clause_law(&random_q(2, &mut rng), &Assignment::random(4, &mut rng)).unwrap()
                })
                .collect();
            let exact = discrimination_norm(&laws, &u).unwrap();
            let devs: Vec<Vec<f64>> = laws
                .iter()
                .map(|l| DensityDeviation::new(l, &u).unwrap().d)
                .collect();
            let ascent = kappa_by_ascent(&devs, &u, &mut rng);
            assert!(
                (exact - ascent).abs() < 1e-9 * exact.max(1.0),
                "{exact} {ascent}"
            );
        }
    }

    #[test]
    fn full_family_spectral_formula_matches_enumeration() {
        let q = ClauseDistribution::nae3();
        let fam = AssignmentFamily::new(&q, 4).unwrap();
        let members: Vec<usize> = (0..16).collect();
        let enumerated = kappa_from_gram(&fam.gram(&members)).unwrap();
        assert!((fam.kappa_full() - enumerated).abs() < 1e-12);
        let u = uniform_law(4, 3).unwrap();
        let laws: Vec<Vec<f64>> = (0..16)
            .map(|s| clause_law(&q, &mask_assignment(s, 4)).unwrap())
            .collect();
        assert!((discrimination_norm(&laws, &u).unwrap() - enumerated).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_dominates_exact() {
        let fam = AssignmentFamily::new(&ClauseDistribution::nae3(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for size in [3, 8, 16] {
            let members = sample(&mut rng, 32, size).into_vec();
            let g = fam.gram(&members);
            let exact = kappa_from_gram(&g).unwrap();
            let bound = kappa_upper_bound(&g);
            assert!(bound >= exact * (1.0 - 1e-12));
        }
        let all: Vec<usize> = (0..32).collect();
        let bound = kappa_upper_bound(&fam.gram(&all));
        assert!(bound >= fam.kappa_full() * (1.0 - 1e-12));
        assert!(bound <= fam.kappa_full() * 1.01);
    }

    #[test]
    fn probe_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = ClauseDistribution::xor(2).unwrap();
        let fam = AssignmentFamily::new(&q, 4).unwrap();
        let max_dev = fam.norm_squared().sqrt();
        let grid = [1, 2, 4, 8];
        let lax = sdn_probe(&fam, |_| 2.0 * max_dev, &grid, 5, &mut rng).unwrap();
        assert_eq!(lax.passed, Some(8));
        assert_eq!(lax.first_failure, None);
        let strict = sdn_probe(&fam, |_| 0.0, &grid, 5, &mut rng).unwrap();
        assert_eq!(strict.passed, None);
        assert_eq!(strict.first_failure, Some(1));
    }
}
