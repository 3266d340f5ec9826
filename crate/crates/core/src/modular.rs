//! Arithmetic modulo fixed word-size primes.
//!
//! Two primes near `2^61` back the modular rank computations, and a fixed
//! 62-bit prime is the coefficient field for exterior shifting. All three
//! are hardcoded so that results are bit-reproducible across runs.

/// First rank-check prime, `2^61 - 1`.
pub const PRIME_RANK_A: u64 = 2_305_843_009_213_693_951;
/// Second rank-check prime, `2^61 + 15`.
pub const PRIME_RANK_B: u64 = 2_305_843_009_213_693_967;
/// Coefficient field for exterior shifting, `2^62 - 57`.
pub const PRIME_SHIFT: u64 = 4_611_686_018_427_387_847;

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
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

/// Inverse by Fermat; `a` must be nonzero mod `p`.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Reduces a signed integer into `[0, p)`.
pub fn reduce_i64(v: i64, p: u64) -> u64 {
    let r = v.rem_euclid(p as i64);
    r as u64
}

/// Rank of a dense matrix over `F_p` by Gaussian elimination.
/// Rows are consumed in place.
pub fn rank_mod(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let n_rows = rows.len();
    if n_rows == 0 {
        return 0;
    }
    let n_cols = rows[0].len();
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod(rows[rank][col], p);
        for j in col..n_cols {
            rows[rank][j] = mul_mod(rows[rank][j], inv, p);
        }
        for r in 0..n_rows {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for j in col..n_cols {
                    let t = mul_mod(factor, rows[rank][j], p);
                    rows[r][j] = sub_mod(rows[r][j], t, p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant of a small dense matrix over `F_p`, in place.
pub fn det_mod(mut m: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = m.len();
    let mut det = 1u64;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| m[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            m.swap(col, pivot);
            det = sub_mod(0, det, p);
        }
        det = mul_mod(det, m[col][col], p);
        let inv = inv_mod(m[col][col], p);
        for r in col + 1..n {
            if m[r][col] != 0 {
                let factor = mul_mod(m[r][col], inv, p);
                for j in col..n {
                    let t = mul_mod(factor, m[col][j], p);
                    m[r][j] = sub_mod(m[r][j], t, p);
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        for &p in &[PRIME_RANK_A, PRIME_RANK_B, PRIME_SHIFT] {
            assert_eq!(mul_mod(p - 1, p - 1, p), 1);
            for a in [1u64, 2, 12345, p - 3] {
                assert_eq!(mul_mod(a, inv_mod(a, p), p), 1);
            }
            assert_eq!(sub_mod(3, 5, p), p - 2);
        }
    }

    #[test]
    fn rank_and_det() {
        let p = PRIME_SHIFT;
        let m = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]];
        assert_eq!(rank_mod(m.clone(), p), 2);
        assert_eq!(det_mod(m, p), 0);
        let m2 = vec![vec![2, 1], vec![1, 1]];
        assert_eq!(det_mod(m2.clone(), p), 1);
        assert_eq!(rank_mod(m2, p), 2);
    }
}
