//! Faces as strictly increasing vertex sets, colex ranking/unranking, and
//! bitset-backed face sets.
//!
//! Vertices are 1-based labels in `[1, n]`. A face of dimension `d` is a set
//! of `d+1` vertices. Ranks are colexicographic: faces are compared by their
//! largest differing element, so the rank of a face does not depend on the
//! ambient `n`.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Colex rank of a face.
pub type Rank = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("face must contain at least one vertex")]
    Empty,
    #[error("vertices must be strictly increasing: {prev} followed by {next}")]
    NotStrictlyIncreasing { prev: u32, next: u32 },
    #[error("vertex {v} out of range [1, {n}]")]
    VertexOutOfRange { v: u32, n: u32 },
    #[error("expected a set of {expected} vertices, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("face count C({n}, {k}) does not fit in 64 bits")]
    TooLarge { n: u32, k: usize },
}

/// Binomial coefficient `C(n, k)` as `u64`; returns 0 when `k > n`.
///
/// Panics if the value overflows 64 bits.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

/// Number of `d`-dimensional faces on `n` vertices, i.e. `C(n, d+1)`.
pub fn face_count(n: u32, d: usize) -> u64 {
    binomial(n as u64, (d + 1) as u64)
}

/// A face: a nonempty, strictly increasing sequence of 1-based vertex labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Face(Vec<u32>);

impl Face {
    /// Builds a face from an already sorted vertex list, rejecting duplicates,
    /// zero labels and unsorted input.
    pub fn new(vertices: Vec<u32>) -> Result<Self, FaceError> {
        if vertices.is_empty() {
            return Err(FaceError::Empty);
        }
        if vertices[0] == 0 {
            return Err(FaceError::VertexOutOfRange {
                v: 0,
                n: u32::MAX,
            });
        }
        for w in vertices.windows(2) {
            if w[0] >= w[1] {
                return Err(FaceError::NotStrictlyIncreasing {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(Face(vertices))
    }

    /// Builds a face from labels in any order, sorting them first.
    pub fn from_unsorted(mut vertices: Vec<u32>) -> Result<Self, FaceError> {
        vertices.sort_unstable();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    /// Dimension: one less than the number of vertices.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn max_vertex(&self) -> u32 {
        *self.0.last().unwrap()
    }

    /// The face with `v` removed. Panics if `v` is absent or the face would
    /// become empty.
    pub fn without(&self, v: u32) -> Face {
        let idx = self.0.binary_search(&v).expect("vertex not in face");
        let mut out = self.0.clone();
        out.remove(idx);
        assert!(!out.is_empty(), "cannot remove the last vertex of a face");
        Face(out)
    }

    /// The face with `v` inserted. Panics if `v` is already present.
    pub fn with(&self, v: u32) -> Face {
        let idx = self
            .0
            .binary_search(&v)
            .expect_err("vertex already in face");
        let mut out = self.0.clone();
        out.insert(idx, v);
        Face(out)
    }

    /// Replaces `old` by `new`, re-sorting. Panics if `old` is absent or
    /// `new` already present.
    pub fn replace(&self, old: u32, new: u32) -> Face {
        self.without(old).with(new)
    }

    /// Checks that this face is a valid `d`-face on `[1, n]`.
    pub fn check(&self, n: u32, d: usize) -> Result<(), FaceError> {
        if self.arity() != d + 1 {
            return Err(FaceError::WrongArity {
                expected: d + 1,
                got: self.arity(),
            });
        }
        if self.max_vertex() > n {
            return Err(FaceError::VertexOutOfRange {
                v: self.max_vertex(),
                n,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl<'de> Deserialize<'de> for Face {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<u32>::deserialize(deserializer)?;
        Face::new(raw).map_err(D::Error::custom)
    }
}

/// Colex rank of a face: `sum_i C(v_i - 1, i)` over 1-based positions `i`.
pub fn colex_rank(f: &Face) -> Rank {
    f.vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| binomial((v - 1) as u64, (i + 1) as u64))
        .sum()
}

/// Inverse of [`colex_rank`] for faces of `arity` vertices.
pub fn colex_unrank(mut rank: Rank, arity: usize) -> Face {
    let mut vertices = vec![0u32; arity];
    for i in (1..=arity).rev() {
        // largest c with C(c, i) <= rank
        let mut c = (i - 1) as u64;
        while binomial(c + 1, i as u64) <= rank {
            c += 1;
        }
        rank -= binomial(c, i as u64);
        vertices[i - 1] = (c + 1) as u32;
    }
    Face(vertices)
}

/// The `d+2` facets of a `(d+2)`-set `w`, ordered by omitted element
/// ascending.
pub fn facets(w: &Face) -> Result<Vec<Face>, FaceError> {
    if w.arity() < 2 {
        return Err(FaceError::WrongArity {
            expected: 2,
            got: w.arity(),
        });
    }
    Ok(w.vertices().iter().map(|&v| w.without(v)).collect())
}

/// Link of the vertex `z` in a family of faces: `{ v \ {z} : z in v }`.
pub fn link<'a, I>(z: u32, faces: I) -> BTreeSet<Face>
where
    I: IntoIterator<Item = &'a Face>,
{
    faces
        .into_iter()
        .filter(|f| f.contains(z) && f.arity() >= 2)
        .map(|f| f.without(z))
        .collect()
}

/// Precomputed binomial table for the hot ranking paths.
///
/// `c(v, k)` is valid for `v <= n` and `k <= k_max`.
#[derive(Clone)]
pub(crate) struct RankTable {
    k_max: usize,
    binom: Vec<u64>,
}

impl RankTable {
    pub(crate) fn new(n: u32, k_max: usize) -> Self {
        let cols = k_max + 1;
        let mut binom = vec![0u64; (n as usize + 1) * cols];
        for v in 0..=n as usize {
            binom[v * cols] = 1;
            for k in 1..=k_max.min(v) {
                binom[v * cols + k] = binomial(v as u64, k as u64);
            }
        }
        RankTable { k_max, binom }
    }

    #[inline]
    pub(crate) fn c(&self, v: u32, k: usize) -> u64 {
        self.binom[v as usize * (self.k_max + 1) + k]
    }

    /// Colex rank of a sorted vertex slice.
    #[cfg_attr(not(test), allow(dead_code))]
    #[inline]
    pub(crate) fn rank(&self, vertices: &[u32]) -> Rank {
        vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| self.c(v - 1, i + 1))
            .sum()
    }

    /// Ranks of the `k+1` facets of the sorted `(k+1)`-slice `w`, in omitted
    /// position order. `out` must have length `w.len()`.
    pub(crate) fn facet_ranks(&self, w: &[u32], out: &mut [Rank]) {
        let k1 = w.len();
        // prefix[j] = sum_{i<j} C(w_i - 1, i+1); suffix[j] = sum_{i>=j} C(w_i - 1, i)
        let mut prefix = 0u64;
        let mut suffix = vec![0u64; k1 + 1];
        for j in (0..k1).rev() {
            suffix[j] = suffix[j + 1] + self.c(w[j] - 1, j);
        }
        for j in 0..k1 {
            out[j] = prefix + suffix[j + 1];
            prefix += self.c(w[j] - 1, j + 1);
        }
    }
}

/// A set of `d`-faces on `[1, n]`, stored as a bit array indexed by colex
/// rank. Mutation is single-writer; reads are freely shareable.
#[derive(Clone, PartialEq, Eq)]
pub struct FaceSet {
    n: u32,
    d: usize,
    words: Vec<u64>,
}

impl FaceSet {
    pub fn new(n: u32, d: usize) -> Result<Self, FaceError> {
        if (n as u64) < (d + 1) as u64 {
            return Err(FaceError::WrongArity {
                expected: d + 1,
                got: n as usize,
            });
        }
        let count = face_count(n, d);
        let words = vec![0u64; count.div_ceil(64) as usize];
        Ok(FaceSet { n, d, words })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Total number of possible faces, `C(n, d+1)`.
    pub fn capacity(&self) -> u64 {
        face_count(self.n, self.d)
    }

    pub fn contains_rank(&self, rank: Rank) -> bool {
        let (w, b) = (rank / 64, rank % 64);
        self.words[w as usize] >> b & 1 == 1
    }

    pub fn insert_rank(&mut self, rank: Rank) -> bool {
        debug_assert!(rank < self.capacity());
        let (w, b) = (rank / 64, rank % 64);
        let was = self.words[w as usize] >> b & 1 == 1;
        self.words[w as usize] |= 1 << b;
        !was
    }

    pub fn contains(&self, f: &Face) -> Result<bool, FaceError> {
        f.check(self.n, self.d)?;
        Ok(self.contains_rank(colex_rank(f)))
    }

    pub fn insert(&mut self, f: &Face) -> Result<bool, FaceError> {
        f.check(self.n, self.d)?;
        Ok(self.insert_rank(colex_rank(f)))
    }

    pub fn cardinality(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &FaceSet) -> bool {
        self.n == other.n
            && self.d == other.d
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Ranks of the member faces in ascending (colex) order.
    pub fn iter_ranks(&self) -> impl Iterator<Item = Rank> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(wi as u64 * 64 + b as u64)
                }
            })
        })
    }

    pub fn iter_faces(&self) -> impl Iterator<Item = Face> + '_ {
        let arity = self.d + 1;
        self.iter_ranks().map(move |r| colex_unrank(r, arity))
    }

    pub fn to_faces(&self) -> Vec<Face> {
        self.iter_faces().collect()
    }

    pub fn from_faces<'a, I>(n: u32, d: usize, faces: I) -> Result<Self, FaceError>
    where
        I: IntoIterator<Item = &'a Face>,
    {
        let mut set = FaceSet::new(n, d)?;
        for f in faces {
            set.insert(f)?;
        }
        Ok(set)
    }
}

impl fmt::Debug for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FaceSet(n={}, d={}, |S|={})",
            self.n,
            self.d,
            self.cardinality()
        )
    }
}

#[derive(Serialize, Deserialize)]
struct FaceSetRepr {
    n: u32,
    d: usize,
    faces: Vec<Face>,
}

impl Serialize for FaceSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FaceSetRepr {
            n: self.n,
            d: self.d,
            faces: self.to_faces(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FaceSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FaceSetRepr::deserialize(deserializer)?;
        FaceSet::from_faces(repr.n, repr.d, &repr.faces).map_err(D::Error::custom)
    }
}

/// All `k`-subsets of `[1, n]` in lexicographic order.
pub fn k_subsets_lex(n: u32, k: usize) -> impl Iterator<Item = Face> {
    let mut cur: Option<Vec<u32>> = if k >= 1 && k as u64 <= n as u64 {
        Some((1..=k as u32).collect())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let c = cur.as_mut()?;
        let out = Face(c.clone());
        // advance to lex successor
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - (k - 1 - i) as u32 {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    #[test]
    fn colex_rank_examples() {
        assert_eq!(colex_rank(&face(&[1, 2, 3])), 0);
        assert_eq!(colex_rank(&face(&[1, 2, 4])), 1);
        assert_eq!(colex_rank(&face(&[4, 5, 6])), 19);
        assert_eq!(face_count(6, 2), 20);
    }

    #[test]
    fn colex_roundtrip_exhaustive() {
        for arity in 1..=5usize {
            let n = 12u32;
            let total = binomial(n as u64, arity as u64);
            let mut seen = Vec::new();
            for r in 0..total {
                let f = colex_unrank(r, arity);
                assert_eq!(colex_rank(&f), r);
                assert!(f.max_vertex() <= n);
                seen.push(f);
            }
            // colex rank orders by largest differing element
            for w in seen.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let rev_a: Vec<u32> = a.vertices().iter().rev().copied().collect();
                let rev_b: Vec<u32> = b.vertices().iter().rev().copied().collect();
                assert!(rev_a < rev_b);
            }
        }
    }

    #[test]
    fn invalid_faces_rejected() {
        assert_eq!(Face::new(vec![]), Err(FaceError::Empty));
        assert!(matches!(
            Face::new(vec![1, 1, 2]),
            Err(FaceError::NotStrictlyIncreasing { .. })
        ));
        assert!(matches!(
            Face::new(vec![2, 1]),
            Err(FaceError::NotStrictlyIncreasing { .. })
        ));
        assert!(matches!(
            Face::new(vec![0, 1]),
            Err(FaceError::VertexOutOfRange { .. })
        ));
        let f = face(&[1, 2, 14]);
        assert!(matches!(
            f.check(12, 2),
            Err(FaceError::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            f.check(14, 3),
            Err(FaceError::WrongArity { .. })
        ));
    }

    #[test]
    fn facets_ordering() {
        let w = face(&[1, 2, 3, 4]);
        let fs = facets(&w).unwrap();
        assert_eq!(
            fs,
            vec![
                face(&[2, 3, 4]),
                face(&[1, 3, 4]),
                face(&[1, 2, 4]),
                face(&[1, 2, 3])
            ]
        );
        let w5 = face(&[1, 2, 3, 4, 5]);
        assert_eq!(facets(&w5).unwrap().len(), 5);
    }

    #[test]
    fn link_examples() {
        let k = [face(&[1, 2, 4]), face(&[1, 3, 4]), face(&[2, 3, 4])];
        let lk = link(4, &k);
        let expect: BTreeSet<Face> = [face(&[1, 2]), face(&[1, 3]), face(&[2, 3])]
            .into_iter()
            .collect();
        assert_eq!(lk, expect);
        assert!(link(9, &k).is_empty());
    }

    #[test]
    fn faceset_insert_iterate() {
        let mut s = FaceSet::new(6, 2).unwrap();
        assert!(s.is_empty());
        assert!(s.insert(&face(&[4, 5, 6])).unwrap());
        assert!(s.insert(&face(&[1, 2, 3])).unwrap());
        assert!(!s.insert(&face(&[1, 2, 3])).unwrap());
        assert_eq!(s.cardinality(), 2);
        let ranks: Vec<u64> = s.iter_ranks().collect();
        assert_eq!(ranks, vec![0, 19]);
        assert_eq!(s.to_faces(), vec![face(&[1, 2, 3]), face(&[4, 5, 6])]);
    }

    #[test]
    fn faceset_json_roundtrip() {
        let mut s = FaceSet::new(5, 2).unwrap();
        s.insert(&face(&[1, 2, 5])).unwrap();
        s.insert(&face(&[1, 2, 3])).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"n":5,"d":2,"faces":[[1,2,3],[1,2,5]]}"#);
        let back: FaceSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn lex_subsets() {
        let all: Vec<Face> = k_subsets_lex(4, 3).collect();
        assert_eq!(
            all,
            vec![
                face(&[1, 2, 3]),
                face(&[1, 2, 4]),
                face(&[1, 3, 4]),
                face(&[2, 3, 4])
            ]
        );
        assert_eq!(k_subsets_lex(9, 3).count() as u64, binomial(9, 3));
    }

    #[test]
    fn rank_table_matches_free_functions() {
        let t = RankTable::new(12, 5);
        for arity in 2..=4usize {
            for r in 0..binomial(12, arity as u64) {
                let f = colex_unrank(r, arity);
                assert_eq!(t.rank(f.vertices()), r);
            }
        }
        let w = [2u32, 3, 7, 9];
        let mut out = [0u64; 4];
        t.facet_ranks(&w, &mut out);
        for (j, &v) in w.iter().enumerate() {
            let f = Face::new(w.to_vec()).unwrap().without(v);
            assert_eq!(out[j], colex_rank(&f));
        }
    }
}
