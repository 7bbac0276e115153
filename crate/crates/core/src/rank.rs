// SPDX-License-Identifier: Apache-2.0
//! Exact matrix rank over the prime field F_p.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RankError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("matrix rows have different lengths")]
    Ragged,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Rank of `matrix` over F_p by Gaussian elimination with exact modular
/// arithmetic. Entries are reduced mod `p` first.
pub fn rank_mod_p(matrix: &[Vec<u64>], p: u64) -> Result<usize, RankError> {
    if !is_prime(p) {
        return Err(RankError::NotPrime(p));
    }
    let cols = matrix.first().map_or(0, |r| r.len());
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(RankError::Ragged);
    }
    let mut m: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| x % p).collect())
        .collect();
    let rows = m.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        // Fermat inverse; p is prime.
        let inv = pow_mod(m[rank][col], p - 2, p);
        for x in m[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = row[col];
                for (x, &y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = (*x + p - mul_mod(factor, y, p)) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

/// Rank of a 0/1 matrix given as booleans.
pub fn rank_of_bits(matrix: &[Vec<bool>], p: u64) -> Result<usize, RankError> {
    let m: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&b| b as u64).collect())
        .collect();
    rank_mod_p(&m, p)
}
