//! Exact rank computations for integer matrices.
//!
//! Ranks are certified without floating point by combining two bounds:
//! Gaussian elimination modulo a prime only ever *lowers* the rank of an
//! integer matrix, so `rank_mod_p` is a lower bound for the rational rank;
//! callers pair it with a structural upper bound (a verified projection
//! decomposition) and accept only when the two meet. `rank_exact` is a
//! fraction-free big-integer elimination used as an independent oracle on
//! small instances.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Primes used for modular rank lower bounds. Taking the maximum over several
/// large primes makes an accidental rank drop (a prime dividing an invariant
/// factor) practically impossible for the small matrices handled here.
pub const RANK_PRIMES: [u64; 3] = [1_000_003, 100_000_007, 2_147_483_647];

/// Rank of `rows` over GF(p). Rows may have any (equal) length.
pub fn rank_mod_p(rows: &[Vec<i64>], p: u64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect())
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = mod_pow(m[rank][col], p - 2, p);
        for r in rank + 1..m.len() {
            let factor = m[r][col] * inv % p;
            if factor == 0 {
                continue;
            }
            for c in col..ncols {
                m[r][c] = (m[r][c] + p - factor * m[rank][c] % p) % p;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Maximum of `rank_mod_p` over [`RANK_PRIMES`]; a lower bound for the
/// rational rank.
pub fn rank_lower_bound(rows: &[Vec<i64>]) -> usize {
    RANK_PRIMES
        .iter()
        .map(|&p| rank_mod_p(rows, p))
        .max()
        .unwrap_or(0)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

/// Exact rational rank by fraction-free (Bareiss) elimination over big
/// integers. Quadratic entry growth makes this an oracle for small matrices
/// only; the main verification paths use `rank_lower_bound` plus a structural
/// upper bound instead.
pub fn rank_exact(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            let head = m[r][col].clone();
            for c in col..ncols {
                let v = (&pivot * &m[r][c] - &head * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
        }
        prev = pivot.abs();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_and_singular() {
        let id: Vec<Vec<i64>> = (0..4)
            .map(|i| (0..4).map(|j| i64::from(i == j)).collect())
            .collect();
        assert_eq!(rank_mod_p(&id, 1_000_003), 4);
        assert_eq!(rank_exact(&id), 4);

        let sing = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(rank_mod_p(&sing, 1_000_003), 2);
        assert_eq!(rank_exact(&sing), 2);
    }

    #[test]
    fn modular_rank_can_drop_but_never_rise() {
        // det = 5, so rank drops mod 5 but not mod the large primes
        let m = vec![vec![1, 2], vec![3, 11]];
        assert_eq!(rank_mod_p(&m, 5), 1);
        assert_eq!(rank_lower_bound(&m), 2);
        assert_eq!(rank_exact(&m), 2);
    }

    #[test]
    fn bareiss_handles_large_intermediate_values() {
        // pascal-like matrix: full rank, entries grow quickly under elimination
        let n = 12;
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = if i == 0 || j == 0 {
                    1
                } else {
                    m[i - 1][j] + m[i][j - 1]
                };
            }
        }
        let rows: Vec<Vec<i64>> = m;
        assert_eq!(rank_exact(&rows), n);
        assert_eq!(rank_lower_bound(&rows), n);
    }
}
