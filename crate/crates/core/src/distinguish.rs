//! Planted-versus-uniform test that does not need `σ`.
//!
//! Each clause is restricted to the witness positions and contributes the
//! sign `(-1)^{#negations}`. Under `Q_σ` two clauses on the same variable set
//! have sign product with mean `(δ-1)²`; under `U_k` the mean is zero. The
//! statistic sums those products over all such pairs.

use std::collections::HashMap;

use serde::Serialize;
use smallvec::SmallVec;

use crate::clause::Literal;
use crate::planting::ParityChannel;

/// Number of standard deviations used for the decision.
pub const THRESHOLD_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairStatistic {
    /// Sum of sign products over unordered pairs sharing a variable set.
    pub value: f64,
    /// Number of such pairs.
    pub pairs: u64,
}

impl PairStatistic {
    /// `3 sqrt(pairs)`.
    pub fn threshold(&self) -> f64 {
        THRESHOLD_SIGMAS * (self.pairs as f64).sqrt()
    }

    /// `true` means planted.
    pub fn decide(&self) -> bool {
        self.value.abs() > self.threshold()
    }
}

#[derive(Clone, Debug, Default)]
pub struct PairAccumulator {
    buckets: HashMap<SmallVec<[usize; 8]>, (i64, u64)>,
}

impl PairAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one clause, restricted through `channel`.
    pub fn push(&mut self, clause: &[Literal], channel: &ParityChannel) {
        let mut vars: SmallVec<[usize; 8]> = SmallVec::new();
        let mut negs = 0;
        for &p in &channel.positions {
            vars.push(clause[p].var());
            negs += usize::from(clause[p].is_negated());
        }
        vars.sort_unstable();
        let e = self.buckets.entry(vars).or_insert((0, 0));
        e.0 += if negs % 2 == 0 { 1 } else { -1 };
        e.1 += 1;
    }

    pub fn finish(&self) -> PairStatistic {
        let mut value: i128 = 0;
        let mut pairs = 0;
        for &(sum, count) in self.buckets.values() {
            // Σ_{i<j} s_i s_j = (S² - count) / 2.
            value += (i128::from(sum) * i128::from(sum) - i128::from(count)) / 2;
            pairs += count * (count.saturating_sub(1)) / 2;
        }
        PairStatistic {
            value: value as f64,
            pairs,
        }
    }
}

pub fn pair_statistic<'a>(
    clauses: impl IntoIterator<Item = &'a [Literal]>,
    channel: &ParityChannel,
) -> PairStatistic {
    let mut acc = PairAccumulator::new();
    for c in clauses {
        acc.push(c, channel);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::Assignment;
    use crate::planting::{sample_uniform_clause, ClauseDistribution, PlantedModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_sum_identity() {
        let channel = ParityChannel::pure(2, 0.5).unwrap();
        let (a, b) = (Literal::positive(0), Literal::positive(1));
        let clauses: Vec<Vec<Literal>> = vec![
            vec![a, b],
            vec![b, a.negate()],
            vec![a.negate(), b.negate()],
            vec![a, Literal::positive(2)],
        ];
        let s = pair_statistic(clauses.iter().map(|c| c.as_slice()), &channel);
        // Signs on {0,1}: +1, -1, +1 -> products -1, +1, -1.
        assert_eq!(s.pairs, 3);
        assert_eq!(s.value, -1.0);
        let empty = pair_statistic(std::iter::empty(), &channel);
        assert_eq!((empty.value, empty.pairs), (0.0, 0));
        assert!(!empty.decide());
    }

    #[test]
    fn separates_at_large_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100;
        let q = ClauseDistribution::nae3();
        let channel = ParityChannel::from_distribution(&q).unwrap();
        let model = PlantedModel::new(q, Assignment::random(n, &mut rng)).unwrap();
        let m = 100 * n;
        let planted = model.sample_formula(m, &mut rng).unwrap();
        let s = pair_statistic(planted.clauses(), &channel);
        assert!(s.decide(), "{s:?}");
        let uniform: Vec<_> = (0..m)
            .map(|_| sample_uniform_clause(n, 3, &mut rng).unwrap())
            .collect();
        let s = pair_statistic(uniform.iter().map(|c| c.as_slice()), &channel);
        assert!(!s.decide(), "{s:?}");
    }
}
