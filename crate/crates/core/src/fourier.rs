//! Walsh–Hadamard transforms over `{±1}^k`.
//!
//! Points are bitmasks: bit `i` set means coordinate `i` is `-1`.
//! Subsets are bitmasks too, so `chi_S(y) = (-1)^popcount(y & S)`.

/// `Q̂(S)` below this magnitude counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[inline]
pub fn chi(subset: usize, point: usize) -> f64 {
    if (subset & point).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized in-place butterfly: `a[S] <- Σ_y a[y] chi_S(y)`.
pub fn walsh_hadamard(a: &mut [f64]) {
    let len = a.len();
    assert!(len.is_power_of_two(), "length must be a power of two");
    let mut h = 1;
    while h < len {
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// `f̂(S) = 2^-k Σ_y f(y) chi_S(y)` for every `S`.
pub fn forward(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    walsh_hadamard(&mut out);
    let scale = 1.0 / values.len() as f64;
    out.iter_mut().for_each(|c| *c *= scale);
    out
}

/// `f(y) = Σ_S f̂(S) chi_S(y)`.
pub fn inverse(coefficients: &[f64]) -> Vec<f64> {
    let mut out = coefficients.to_vec();
    walsh_hadamard(&mut out);
    out
}

/// Direct `O(2^k)` evaluation of a single coefficient.
pub fn coefficient(values: &[f64], subset: usize) -> f64 {
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(y, &v)| v * chi(subset, y))
        .sum();
    sum / values.len() as f64
}

pub fn mask_from_positions(positions: &[usize]) -> usize {
    positions.iter().fold(0, |m, &p| m | 1 << p)
}

pub fn positions_from_mask(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|i| mask >> i & 1 == 1)
        .collect()
}

/// Subsets of `[k]` of size `r`, in lexicographic order of their sorted
/// position lists.
pub fn subsets_of_size(k: usize, r: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(r);
    fn rec(k: usize, r: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<usize>) {
        if stack.len() == r {
            out.push(mask_from_positions(stack));
            return;
        }
        for p in start..k {
            if k - p < r - stack.len() {
                break;
            }
            stack.push(p);
            rec(k, r, p + 1, stack, out);
            stack.pop();
        }
    }
    rec(k, r, 0, &mut stack, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transform_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=6 {
            let v: Vec<f64> = (0..1 << k).map(|_| rng.gen()).collect();
            let f = forward(&v);
            for (s, c) in f.iter().enumerate() {
                assert!((c - coefficient(&v, s)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..=8 {
            let v: Vec<f64> = (0..1 << k).map(|_| rng.gen()).collect();
            let back = inverse(&forward(&v));
            for (a, b) in v.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subset_enumeration_is_lexicographic() {
        let s = subsets_of_size(4, 2);
        let lists: Vec<Vec<usize>> = s.iter().map(|&m| positions_from_mask(m)).collect();
        assert_eq!(
            lists,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets_of_size(3, 0), vec![0]);
        assert_eq!(subsets_of_size(5, 3).len(), 10);
    }
}
