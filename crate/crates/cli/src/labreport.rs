//! Numerical checks of the Fourier decomposition and discrimination norm,
//! emitted as CSV rows.

use plantedcsp::lab::{
    check_decomposition, check_decomposition_labeled, clause_law, gamma, gamma_polynomial,
    kappa_from_gram, scaling_band, AssignmentFamily,
};
use plantedcsp::{Assignment, ClauseDistribution, Predicate, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::models;

pub const LAB_CSV_VERSION: &str = "# plantedcsp lab v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabRow {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub quantity: &'static str,
    pub value: f64,
    pub bound: f64,
    pub trial_seed: u64,
}

impl LabRow {
    pub fn within(&self) -> bool {
        self.value <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub k: usize,
    pub band_models: Vec<String>,
    pub band_ns: Vec<usize>,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 0,
            trials: 100,
            n: 5,
            k: 3,
            band_models: vec!["nae3".into(), "xor:3".into(), "quiet-4sat".into()],
            band_ns: (4..=8).collect(),
        }
    }
}

/// A random non-uniform distribution on `{±1}^k`.
pub fn random_distribution<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<ClauseDistribution> {
    let w: Vec<f64> = (0..1 << k).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = w.iter().sum();
    ClauseDistribution::new(k, w.iter().map(|x| x / total).collect())
}

/// A random predicate that is not constant.
pub fn random_predicate<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Predicate> {
    loop {
        let bits: Vec<u8> = (0..1 << k).map(|_| rng.gen_range(0..2)).collect();
        if bits.contains(&1) && bits.contains(&0) {
            return Predicate::new(k, bits);
        }
    }
}

fn random_query<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Decomposition residuals (clause and predicate form), the two forms of
/// `Γ`, the one-member `κ₂` against `‖d_σ‖`, and `κ₂ · n^{r/2}` bands.
pub fn run_lab(cfg: &LabConfig) -> Result<Vec<LabRow>> {
    let (n, k) = (cfg.n, cfg.k);
    let mut rows = Vec::new();
    for t in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = Assignment::random(n, &mut rng);

        let q = random_distribution(k, &mut rng)?;
        let r = q.complexity()?.r;
        let len = clause_law(&q, &sigma)?.len();
        let h = random_query(len, &mut rng);
        rows.push(LabRow {
            n,
            k,
            r,
            quantity: "decomposition_residual",
            value: check_decomposition(&q, &sigma, &h)?,
            bound: 1e-9,
            trial_seed: seed,
        });
        let g = random_query(len, &mut rng);
        rows.push(LabRow {
            n,
            k,
            r,
            quantity: "gamma_form_gap",
            value: (gamma(&sigma, &g, k)? - gamma_polynomial(&sigma, &g, k)?).abs(),
            bound: 1e-12,
            trial_seed: seed,
        });

        let p = random_predicate(k, &mut rng)?;
        let h = random_query((2 * len) >> k, &mut rng);
        rows.push(LabRow {
            n,
            k,
            r: p.complexity().map(|c| c.r).unwrap_or(0),
            quantity: "labeled_decomposition_residual",
            value: check_decomposition_labeled(&p, &sigma, &h)?,
            bound: 1e-9,
            trial_seed: seed,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let q = random_distribution(k, &mut rng)?;
    let fam = AssignmentFamily::new(&q, n)?;
    let member = rng.gen_range(0..fam.size());
    let single = kappa_from_gram(&fam.gram(&[member]))?;
    rows.push(LabRow {
        n,
        k,
        r: q.complexity()?.r,
        quantity: "single_member_kappa_gap",
        value: (single - fam.norm_squared().sqrt()).abs(),
        bound: 1e-12,
        trial_seed: cfg.seed,
    });

    for name in &cfg.band_models {
        let q = match models::builtin(name)? {
            plantedcsp::Source::Clauses(q) => q,
            plantedcsp::Source::Predicate(_) => {
                return Err(plantedcsp::Error::ModelMismatch(
                    "band needs a clause distribution",
                ))
            }
        };
        let band = scaling_band(&q, &cfg.band_ns)?;
        for &(bn, v) in &band.points {
            rows.push(LabRow {
                n: bn,
                k: q.k(),
                r: band.r,
                quantity: "kappa_scaled",
                value: v,
                bound: f64::INFINITY,
                trial_seed: cfg.seed,
            });
        }
        rows.push(LabRow {
            n: *cfg.band_ns.iter().max().unwrap_or(&0),
            k: q.k(),
            r: band.r,
            quantity: "kappa_band_ratio",
            value: band.ratio,
            bound: 3.0,
            trial_seed: cfg.seed,
        });
    }
    Ok(rows)
}
