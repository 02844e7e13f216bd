//! Literals, clauses, assignments and dense index spaces over ordered
//! literal tuples without repeated variables.
//!
//! Variables are 0-based everywhere inside the crate; DIMACS conversion is
//! the only place where 1-based ids appear.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A literal packed as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: usize, negated: bool) -> Self {
        Literal(((var as u32) << 1) | negated as u32)
    }

    pub fn positive(var: usize) -> Self {
        Self::new(var, false)
    }

    pub fn negative(var: usize) -> Self {
        Self::new(var, true)
    }

    /// Parses a signed 1-based DIMACS id.
    pub fn from_dimacs(id: i64) -> Option<Self> {
        if id == 0 {
            return None;
        }
        Some(Self::new(id.unsigned_abs() as usize - 1, id < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = self.var() as i64 + 1;
        if self.is_negated() {
            -id
        } else {
            id
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    pub fn negate(self) -> Self {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type LiteralVec = SmallVec<[Literal; 8]>;

/// An ordered clause with pairwise distinct variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    lits: LiteralVec,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let lits: LiteralVec = lits.into_iter().collect();
        check_distinct(&lits)?;
        Ok(Clause { lits })
    }

    pub fn from_dimacs(ids: &[i64]) -> Result<Self> {
        let lits = ids
            .iter()
            .map(|&id| Literal::from_dimacs(id).ok_or(Error::VariableOutOfRange { var: 0, n: 0 }))
            .collect::<Result<LiteralVec>>()?;
        Self::new(lits)
    }

    pub fn arity(&self) -> usize {
        self.lits.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    /// Literals at `positions` (0-based), in increasing position order.
    pub fn restrict(&self, positions: &[usize]) -> Result<Clause> {
        let positions = normalize_positions(positions, self.arity())?;
        Ok(Clause {
            lits: positions.iter().map(|&p| self.lits[p]).collect(),
        })
    }
}

impl AsRef<[Literal]> for Clause {
    fn as_ref(&self) -> &[Literal] {
        &self.lits
    }
}

/// Sorted, deduplicated, nonempty, in range.
pub fn normalize_positions(positions: &[usize], arity: usize) -> Result<Vec<usize>> {
    if positions.is_empty() {
        return Err(Error::InvalidPositions("empty position set".into()));
    }
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidPositions(format!(
                "position {} repeated",
                w[0]
            )));
        }
    }
    if let Some(&last) = sorted.last() {
        if last >= arity {
            return Err(Error::InvalidPositions(format!(
                "position {last} out of range for arity {arity}"
            )));
        }
    }
    Ok(sorted)
}

fn check_distinct(lits: &[Literal]) -> Result<()> {
    for (i, a) in lits.iter().enumerate() {
        if lits[..i].iter().any(|b| b.var() == a.var()) {
            return Err(Error::RepeatedVariable { var: a.var() });
        }
    }
    Ok(())
}

/// A planted assignment: `-1` is TRUE, `+1` is FALSE.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<i8>,
}

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| v.abs() != 1) {
            return Err(Error::AssignmentValue { index, value });
        }
        Ok(Assignment { values })
    }

    pub fn all(n: usize, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        Assignment {
            values: vec![value; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Assignment {
            values: (0..n)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, var: usize) -> i8 {
        self.values[var]
    }

    pub fn negated(&self) -> Self {
        Assignment {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    #[inline]
    pub fn literal_value(&self, lit: Literal) -> i8 {
        let v = self.values[lit.var()];
        if lit.is_negated() {
            -v
        } else {
            v
        }
    }

    /// `sigma(C)`: component `i` is the value of literal `i` under the assignment.
    pub fn evaluate_pattern(&self, clause: &[Literal]) -> Result<Vec<i8>> {
        self.check_vars(clause)?;
        Ok(clause.iter().map(|&l| self.literal_value(l)).collect())
    }

    /// Pattern packed as a bitmask: bit `i` set iff literal `i` is TRUE.
    #[inline]
    pub fn pattern_index(&self, clause: &[Literal]) -> usize {
        clause.iter().enumerate().fold(0, |acc, (i, &l)| {
            acc | (((self.literal_value(l) < 0) as usize) << i)
        })
    }

    pub fn check_vars(&self, clause: &[Literal]) -> Result<()> {
        for l in clause {
            if l.var() >= self.values.len() {
                return Err(Error::VariableOutOfRange {
                    var: l.var(),
                    n: self.values.len(),
                });
            }
        }
        Ok(())
    }

    /// Fraction of coordinates where the two assignments agree.
    pub fn agreement(&self, other: &Assignment) -> f64 {
        if self.values.is_empty() {
            return 1.0;
        }
        let same = self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a == b)
            .count();
        same as f64 / self.values.len() as f64
    }
}

/// Pattern bitmask -> sign vector (bit set means `-1`).
pub fn pattern_signs(index: usize, k: usize) -> Vec<i8> {
    (0..k)
        .map(|i| if index >> i & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// `2^l * n!/(n-l)!`, the number of ordered `l`-tuples of literals on
/// distinct variables.
pub fn count_tuples(n: usize, arity: usize) -> Result<u64> {
    count_with_signs(n, arity, true)
}

/// `n!/(n-l)!`, ordered variable tuples without repetition.
pub fn count_variable_tuples(n: usize, arity: usize) -> Result<u64> {
    count_with_signs(n, arity, false)
}

fn count_with_signs(n: usize, arity: usize, signed: bool) -> Result<u64> {
    if arity > n {
        return Err(Error::ArityExceedsVariables { n, arity });
    }
    let overflow = || Error::CountOverflow { n, arity };
    let mut total: u64 = 1;
    for i in 0..arity {
        let radix = (n - i) as u64 * if signed { 2 } else { 1 };
        total = total.checked_mul(radix).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Mixed-radix bijection between ordered tuples on distinct variables and
/// `[0, size)`. Digit `i` is `2 * rank + negated` (signed) or `rank`
/// (unsigned), where `rank` is the variable's position among variables not
/// used earlier in the tuple. The first literal is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleIndexer {
    n: usize,
    arity: usize,
    signed: bool,
    size: u64,
}

impl TupleIndexer {
    pub fn new(n: usize, arity: usize) -> Result<Self> {
        Ok(TupleIndexer {
            n,
            arity,
            signed: true,
            size: count_tuples(n, arity)?,
        })
    }

    /// Index space over variable tuples; literal signs are ignored.
    pub fn unsigned(n: usize, arity: usize) -> Result<Self> {
        Ok(TupleIndexer {
            n,
            arity,
            signed: false,
            size: count_variable_tuples(n, arity)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    #[inline]
    fn radix(&self, i: usize) -> u64 {
        (self.n - i) as u64 * if self.signed { 2 } else { 1 }
    }

    pub fn index(&self, tuple: &[Literal]) -> Result<u64> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        for l in tuple {
            if l.var() >= self.n {
                return Err(Error::VariableOutOfRange {
                    var: l.var(),
                    n: self.n,
                });
            }
        }
        check_distinct(tuple)?;
        Ok(self.index_unchecked(tuple))
    }

    /// Caller guarantees arity, range and distinctness.
    #[inline]
    pub fn index_unchecked(&self, tuple: &[Literal]) -> u64 {
        let mut idx = 0u64;
        for (i, l) in tuple.iter().enumerate() {
            let v = l.var();
            let below = tuple[..i].iter().filter(|p| p.var() < v).count();
            let rank = (v - below) as u64;
            let digit = if self.signed {
                2 * rank + l.is_negated() as u64
            } else {
                rank
            };
            idx = idx * self.radix(i) + digit;
        }
        idx
    }

    pub fn unindex(&self, index: u64) -> Result<LiteralVec> {
        if index >= self.size {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            });
        }
        let mut digits: SmallVec<[u64; 8]> = SmallVec::from_elem(0, self.arity);
        let mut rest = index;
        for i in (0..self.arity).rev() {
            let r = self.radix(i);
            digits[i] = rest % r;
            rest /= r;
        }
        let mut used: SmallVec<[usize; 8]> = SmallVec::new();
        let mut out = LiteralVec::new();
        for &d in &digits {
            let (rank, neg) = if self.signed {
                ((d / 2) as usize, d % 2 == 1)
            } else {
                (d as usize, false)
            };
            let mut v = rank;
            let mut sorted = used.clone();
            sorted.sort_unstable();
            for &u in &sorted {
                if u <= v {
                    v += 1;
                }
            }
            used.push(v);
            out.push(Literal::new(v, neg));
        }
        Ok(out)
    }

    /// All tuples in index order.
    pub fn iter(&self) -> impl Iterator<Item = LiteralVec> + '_ {
        (0..self.size).map(move |i| self.unindex(i).expect("in range"))
    }
}

/// A flat list of clauses of one arity on `n` variables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Formula {
    n: usize,
    k: usize,
    lits: Vec<Literal>,
}

impl Formula {
    pub fn new(n: usize, k: usize) -> Self {
        Formula {
            n,
            k,
            lits: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, k: usize, clauses: usize) -> Self {
        Formula {
            n,
            k,
            lits: Vec::with_capacity(clauses * k),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lits.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn push(&mut self, clause: &[Literal]) -> Result<()> {
        if clause.len() != self.k {
            return Err(Error::ArityMismatch {
                expected: self.k,
                got: clause.len(),
            });
        }
        for l in clause {
            if l.var() >= self.n {
                return Err(Error::VariableOutOfRange {
                    var: l.var(),
                    n: self.n,
                });
            }
        }
        check_distinct(clause)?;
        self.lits.extend_from_slice(clause);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, clause: &[Literal]) {
        debug_assert_eq!(clause.len(), self.k);
        self.lits.extend_from_slice(clause);
    }

    pub fn clause(&self, i: usize) -> &[Literal] {
        &self.lits[i * self.k..(i + 1) * self.k]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Literal]> + '_ {
        let k = self.k.max(1);
        self.lits.chunks_exact(k).take(self.len())
    }
}
