//! Dense GF(2) linear systems over packed `u64` rows.

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    bits: Vec<u64>,
    rhs: bool,
}

impl Row {
    fn get(&self, col: usize) -> bool {
        self.bits[col / WORD] >> (col % WORD) & 1 == 1
    }

    fn xor_with(&mut self, other: &Row) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        self.rhs ^= other.rhs;
    }
}

/// Equations `⊕_{v ∈ vars} s_v = rhs` over `n` unknowns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParitySystem {
    n: usize,
    rows: Vec<Row>,
}

/// Reduced form of a consistent system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Solution with every free variable set to 0.
    pub particular: Vec<bool>,
    /// Free columns, increasing.
    pub free: Vec<usize>,
    pub rank: usize,
    /// `basis[i]` is the change to `particular` when `free[i]` flips.
    basis: Vec<Vec<bool>>,
}

impl Solution {
    /// All `2^free` solutions, refusing more than `2^cap`.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Vec<bool>>> {
        if self.free.len() > cap {
            return Err(Error::Underdetermined {
                free: self.free.len(),
                cap,
            });
        }
        let mut out = Vec::with_capacity(1 << self.free.len());
        for mask in 0..1usize << self.free.len() {
            let mut s = self.particular.clone();
            for (i, b) in self.basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (x, &d) in s.iter_mut().zip(b) {
                        *x ^= d;
                    }
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}

impl ParitySystem {
    pub fn new(n: usize) -> Self {
        ParitySystem {
            n,
            rows: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Repeated variables cancel.
    pub fn push(&mut self, vars: &[usize], rhs: bool) -> Result<()> {
        let mut bits = vec![0u64; self.n.div_ceil(WORD)];
        for &v in vars {
            if v >= self.n {
                return Err(Error::VariableOutOfRange { var: v, n: self.n });
            }
            bits[v / WORD] ^= 1 << (v % WORD);
        }
        self.rows.push(Row { bits, rhs });
        Ok(())
    }

    /// Gauss–Jordan elimination.
    pub fn solve(&self) -> Result<Solution> {
        let mut rows = self.rows.clone();
        let mut pivots: Vec<usize> = Vec::new();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.get(col) {
                    row.xor_with(&pivot);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|r| r.rhs) {
            return Err(Error::Inconsistent);
        }
        let mut is_pivot = vec![false; self.n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.n).filter(|&c| !is_pivot[c]).collect();
        let mut particular = vec![false; self.n];
        for (i, &c) in pivots.iter().enumerate() {
            particular[c] = rows[i].rhs;
        }
        let basis = free
            .iter()
            .map(|&f| {
                let mut d = vec![false; self.n];
                d[f] = true;
                for (i, &c) in pivots.iter().enumerate() {
                    if rows[i].get(f) {
                        d[c] = true;
                    }
                }
                d
            })
            .collect();
        Ok(Solution {
            particular,
            free,
            rank,
            basis,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn satisfies(sys: &[(Vec<usize>, bool)], s: &[bool]) -> bool {
        sys.iter()
            .all(|(vars, rhs)| vars.iter().fold(false, |acc, &v| acc ^ s[v]) == *rhs)
    }

    #[test]
    fn two_equations_three_unknowns() {
        let mut sys = ParitySystem::new(3);
        sys.push(&[0, 1], false).unwrap();
        sys.push(&[0, 2], true).unwrap();
        let sol = sys.solve().unwrap();
        assert_eq!(sol.rank, 2);
        let mut all = sol.enumerate(1).unwrap();
        all.sort();
        assert_eq!(all, vec![vec![false, false, true], vec![true, true, false]]);
    }

    #[test]
    fn inconsistent_detected() {
        let mut sys = ParitySystem::new(2);
        sys.push(&[0, 1], false).unwrap();
        sys.push(&[0], true).unwrap();
        sys.push(&[1], true).unwrap();
        sys.push(&[0, 1], true).unwrap();
        assert_eq!(sys.solve(), Err(Error::Inconsistent));
    }

    #[test]
    fn underdetermined_cap() {
        let sys = ParitySystem::new(5);
        let sol = sys.solve().unwrap();
        assert_eq!(sol.free.len(), 5);
        assert!(matches!(
            sol.enumerate(2),
            Err(Error::Underdetermined { free: 5, cap: 2 })
        ));
    }

    #[test]
    fn random_systems_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = rng.gen_range(1..=9);
            let m = rng.gen_range(0..=12);
            let eqs: Vec<(Vec<usize>, bool)> = (0..m)
                .map(|_| {
                    let vars = (0..n).filter(|_| rng.gen::<bool>()).collect();
                    (vars, rng.gen())
                })
                .collect();
            let mut sys = ParitySystem::new(n);
            for (v, b) in &eqs {
                sys.push(v, *b).unwrap();
            }
            let brute: Vec<Vec<bool>> = (0..1usize << n)
                .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
                .filter(|s| satisfies(&eqs, s))
                .collect();
            match sys.solve() {
                Err(Error::Inconsistent) => assert!(brute.is_empty()),
                Ok(sol) => {
                    let mut got = sol.enumerate(16).unwrap();
                    got.sort();
                    let mut want = brute.clone();
                    want.sort();
                    assert_eq!(got, want);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let n = 150;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let mut sys = ParitySystem::new(n);
        for v in 0..n {
            let w = (v + 1) % n;
            sys.push(&[v, w], truth[v] ^ truth[w]).unwrap();
        }
        sys.push(&[0], truth[0]).unwrap();
        let sols = sys.solve().unwrap().enumerate(2).unwrap();
        assert!(sols.contains(&truth));
    }
}
