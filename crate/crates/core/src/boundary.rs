//! Boundary matrices of pure complexes and exact top Betti numbers.
//!
//! For a set `K` of `d`-faces, the top boundary operator maps a face
//! `f = {v_0 < ... < v_d}` to `sum_j (-1)^j (f \ {v_j})`, and
//! `beta_d = dim ker(boundary) = |K| - rank(boundary)` since a pure
//! `d`-complex has no `(d+1)`-faces. Ranks are computed exactly: integer
//! fraction-free (Bareiss) elimination up to a size cutoff, and agreement of
//! two independent primes near `2^61` beyond it.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::faces::Face;
use crate::modular::{self, PRIME_RANK_A, PRIME_RANK_B};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundaryError {
    #[error("faces have mixed arities: {0} and {1}")]
    MixedArity(usize, usize),
    #[error("modular ranks disagree between the two primes: {0} vs {1}")]
    PrimeDisagreement(usize, usize),
}

/// Signed incidence matrix of the top boundary operator.
///
/// Rows are indexed by the `(d-1)`-subsets occurring as facets of the input,
/// columns by the input faces in the order given. Entries are `0, +1, -1`;
/// each column has exactly `d+1` nonzero entries with sign `(-1)^j` at the
/// row omitting the `j`-th vertex.
pub struct BoundaryMatrix {
    pub rows: Vec<Face>,
    pub cols: Vec<Face>,
    /// Dense row-major entries in `{-1, 0, 1}`.
    pub entries: Vec<Vec<i8>>,
}

impl BoundaryMatrix {
    pub fn build(cols: Vec<Face>) -> Result<Self, BoundaryError> {
        if let Some(first) = cols.first() {
            for f in &cols {
                if f.arity() != first.arity() {
                    return Err(BoundaryError::MixedArity(first.arity(), f.arity()));
                }
            }
        }
        let mut row_index: BTreeMap<Face, usize> = BTreeMap::new();
        let mut incidences: Vec<Vec<(Face, i8)>> = Vec::with_capacity(cols.len());
        for f in &cols {
            let mut col = Vec::with_capacity(f.arity());
            for (j, &v) in f.vertices().iter().enumerate() {
                if f.arity() == 1 {
                    break; // vertices have empty boundary
                }
                let facet = f.without(v);
                let next = row_index.len();
                row_index.entry(facet.clone()).or_insert(next);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                col.push((facet, sign));
            }
            incidences.push(col);
        }
        let mut rows: Vec<Face> = row_index.keys().cloned().collect();
        rows.sort();
        let lookup: BTreeMap<&Face, usize> = rows.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut entries = vec![vec![0i8; cols.len()]; rows.len()];
        for (c, col) in incidences.iter().enumerate() {
            for (facet, sign) in col {
                entries[lookup[facet]][c] = *sign;
            }
        }
        Ok(BoundaryMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Matrix product of this boundary with the next one down, as exact
    /// integers. Used to confirm that consecutive boundaries compose to zero.
    pub fn compose(&self, lower: &BoundaryMatrix) -> Vec<Vec<i64>> {
        // self: C_k -> C_{k-1}; lower: C_{k-1} -> C_{k-2};
        // product entry (i, j) = sum_r lower[i][r] * self[r][j], matching rows of
        // `self` with columns of `lower` by face.
        let col_of: BTreeMap<&Face, usize> =
            lower.cols.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut out = vec![vec![0i64; self.n_cols()]; lower.n_rows()];
        for (r, row_face) in self.rows.iter().enumerate() {
            let lc = col_of[row_face];
            for c in 0..self.n_cols() {
                let a = self.entries[r][c] as i64;
                if a == 0 {
                    continue;
                }
                for (i, out_row) in out.iter_mut().enumerate() {
                    out_row[c] += lower.entries[i][lc] as i64 * a;
                }
            }
        }
        out
    }
}

/// How a rank was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    /// Fraction-free integer elimination; unconditionally exact.
    ExactInteger,
    /// Agreement of elimination over the two fixed primes near `2^61`.
    TwoPrimeModular,
}

/// Column-count cutoff between Bareiss and modular elimination.
pub const BAREISS_MAX_COLS: usize = 2_000;

/// Exact rank of an integer matrix given as `i64` rows.
pub fn integer_rank(entries: &[Vec<i64>]) -> Result<(usize, RankMethod), BoundaryError> {
    let n_cols = entries.first().map_or(0, Vec::len);
    if n_cols <= BAREISS_MAX_COLS {
        let rows: Vec<Vec<BigInt>> = entries
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Ok((bareiss_rank(rows), RankMethod::ExactInteger))
    } else {
        let ra = modular::rank_mod(reduce_rows(entries, PRIME_RANK_A), PRIME_RANK_A);
        let rb = modular::rank_mod(reduce_rows(entries, PRIME_RANK_B), PRIME_RANK_B);
        if ra != rb {
            return Err(BoundaryError::PrimeDisagreement(ra, rb));
        }
        Ok((ra, RankMethod::TwoPrimeModular))
    }
}

fn reduce_rows(entries: &[Vec<i64>], p: u64) -> Vec<Vec<u64>> {
    entries
        .iter()
        .map(|r| r.iter().map(|&v| modular::reduce_i64(v, p)).collect())
        .collect()
}

/// Rank by Bareiss fraction-free elimination over arbitrary-precision
/// integers. Consumes the rows.
pub fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let n_rows = rows.len();
    if n_rows == 0 {
        return 0;
    }
    let n_cols = rows[0].len();
    let mut rank = 0usize;
    let mut prev = BigInt::from(1);
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let pivot_val = pivot_row[col].clone();
        for row in tail.iter_mut() {
            for j in (col + 1)..n_cols {
                let num = &pivot_val * &row[j] - &row[col] * &pivot_row[j];
                row[j] = num / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot_val;
        rank += 1;
    }
    rank
}

/// Top Betti number of a nonempty pure complex, or the empty-complex marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Betti {
    /// The input had no faces; `beta_d = 0` by convention.
    EmptyComplex,
    Computed { beta: u64, method: RankMethod },
}

impl Betti {
    pub fn value(&self) -> u64 {
        match self {
            Betti::EmptyComplex => 0,
            Betti::Computed { beta, .. } => *beta,
        }
    }
}

/// `beta_d = dim ker(boundary_d)` for a pure `d`-dimensional complex given by
/// its set of `d`-faces.
pub fn betti_top(faces: &[Face]) -> Result<Betti, BoundaryError> {
    if faces.is_empty() {
        return Ok(Betti::EmptyComplex);
    }
    let m = BoundaryMatrix::build(faces.to_vec())?;
    let entries: Vec<Vec<i64>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(|&v| v as i64).collect())
        .collect();
    let (rank, method) = integer_rank(&entries)?;
    Ok(Betti::Computed {
        beta: (faces.len() - rank) as u64,
        method,
    })
}

/// Betti computation forced through the two-prime modular path, used to
/// cross-check the exact integer route.
pub fn betti_top_modular(faces: &[Face]) -> Result<Betti, BoundaryError> {
    if faces.is_empty() {
        return Ok(Betti::EmptyComplex);
    }
    let m = BoundaryMatrix::build(faces.to_vec())?;
    let entries: Vec<Vec<i64>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(|&v| v as i64).collect())
        .collect();
    let ra = modular::rank_mod(reduce_rows(&entries, PRIME_RANK_A), PRIME_RANK_A);
    let rb = modular::rank_mod(reduce_rows(&entries, PRIME_RANK_B), PRIME_RANK_B);
    if ra != rb {
        return Err(BoundaryError::PrimeDisagreement(ra, rb));
    }
    Ok(Betti::Computed {
        beta: (faces.len() - ra) as u64,
        method: RankMethod::TwoPrimeModular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::{facets, k_subsets_lex};

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    #[test]
    fn boundary_column_signs() {
        let m = BoundaryMatrix::build(vec![face(&[1, 2, 3])]).unwrap();
        assert_eq!(m.n_rows(), 3);
        // rows sorted: {1,2}, {1,3}, {2,3}; signs by omitted position: {2,3} -> +,
        // {1,3} -> -, {1,2} -> +
        let col: Vec<i8> = m.entries.iter().map(|r| r[0]).collect();
        assert_eq!(m.rows, vec![face(&[1, 2]), face(&[1, 3]), face(&[2, 3])]);
        assert_eq!(col, vec![1, -1, 1]);
    }

    #[test]
    fn betti_sphere_and_single_face() {
        // boundary of the 3-simplex: a 2-sphere, beta_2 = 1
        let sphere = facets(&face(&[1, 2, 3, 4])).unwrap();
        assert_eq!(betti_top(&sphere).unwrap().value(), 1);
        assert_eq!(betti_top(&[face(&[1, 2, 3])]).unwrap().value(), 0);
        assert_eq!(betti_top(&[]).unwrap(), Betti::EmptyComplex);
    }

    #[test]
    fn boundary_composition_is_zero() {
        // full complex on 5 vertices in dimensions 3 -> 2 -> 1
        let d3: Vec<Face> = k_subsets_lex(5, 4).collect();
        let d2: Vec<Face> = k_subsets_lex(5, 3).collect();
        let top = BoundaryMatrix::build(d3).unwrap();
        let lower = BoundaryMatrix::build(d2).unwrap();
        let product = top.compose(&lower);
        assert!(product.iter().all(|row| row.iter().all(|&v| v == 0)));
    }

    #[test]
    fn bareiss_matches_modular() {
        let faces: Vec<Face> = k_subsets_lex(6, 3).collect();
        let exact = betti_top(&faces).unwrap();
        let modular = betti_top_modular(&faces).unwrap();
        assert_eq!(exact.value(), modular.value());
    }
}
