//! Exterior algebraic shifting over a fixed prime field.
//!
//! For `K` a set of `d`-faces on `[n]`, form the `|K| x C(n, d+1)` matrix `M`
//! whose entry at (row face `g`, column face `f`) is the `(d+1) x (d+1)`
//! minor of a generic matrix `X` with rows `g` and columns `f` (both taken in
//! ascending vertex order). Scanning the columns in lexicographic face order
//! and keeping each column that is independent of the kept predecessors
//! yields the shifted family `Delta(K)` with `|Delta(K)| = |K|`.
//!
//! Genericity is realized probabilistically: `X` has independent uniform
//! entries in `F_p` for the fixed 62-bit prime `2^62 - 57`, seeded and
//! reproducible. A run can fail to be generic with probability at most
//! `|K| C(n, d+1) / p`; results are confirmed by re-running with an
//! independently derived second seed and demanding bit-identical output.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faces::{k_subsets_lex, Face, FaceError};
use crate::modular::{det_mod, inv_mod, mul_mod, sub_mod, PRIME_SHIFT};
use crate::pedigree::Pedigree;

#[derive(Debug, Error, PartialEq)]
pub enum ShiftError {
    #[error(transparent)]
    Face(#[from] FaceError),
    #[error("family is empty")]
    EmptyFamily,
    #[error("n = {n} exceeds the shifting scale guard of {guard}")]
    ScaleGuard { n: u32, guard: u32 },
    #[error("faces have mixed arities: {0} and {1}")]
    MixedArity(usize, usize),
    #[error("vertex {v} exceeds the context size n = {n}")]
    VertexOutOfContext { v: u32, n: u32 },
    #[error("genericity failure: {0}")]
    GenericityFailure(String),
    #[error("family is not shifted (witness: {0})")]
    NotShifted(Face),
    #[error("claim requires s >= 1, got s = 0")]
    TrivialPedigree,
    #[error("size mismatch: |f| = {0}, |g| = {1}")]
    SizeMismatch(usize, usize),
    #[error("intersection has {0} top faces, expected exactly 1")]
    BadIntersection(usize),
}

/// Scale guard: columns number `C(n, d+1)`.
pub const SHIFT_GUARD_N: u32 = 16;

/// A seeded generic matrix over the fixed shifting prime.
#[derive(Clone)]
pub struct ShiftContext {
    n: u32,
    seed: u64,
    x: Vec<u64>,
}

impl ShiftContext {
    /// Builds the `n x n` matrix with independent uniform entries in `F_p`,
    /// reproducible from `(n, seed)`.
    pub fn new(n: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..(n as usize * n as usize))
            .map(|_| rng.gen_range(0..PRIME_SHIFT))
            .collect();
        ShiftContext { n, seed, x }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn prime(&self) -> u64 {
        PRIME_SHIFT
    }

    #[inline]
    fn entry(&self, row: u32, col: u32) -> u64 {
        self.x[(row as usize - 1) * self.n as usize + (col as usize - 1)]
    }

    /// Minor of `X` with rows indexed by `g` and columns by `f`.
    fn minor(&self, g: &Face, f: &Face) -> u64 {
        let m: Vec<Vec<u64>> = g
            .vertices()
            .iter()
            .map(|&r| f.vertices().iter().map(|&c| self.entry(r, c)).collect())
            .collect();
        debug_assert_eq!(g.arity(), f.arity());
        det_mod(m, PRIME_SHIFT)
    }
}

/// A family of `d`-faces closed under pushing any vertex down to a smaller
/// unused one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedFamily {
    d: usize,
    faces: BTreeSet<Face>,
}

impl ShiftedFamily {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn faces(&self) -> &BTreeSet<Face> {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, f: &Face) -> bool {
        self.faces.contains(f)
    }
}

#[derive(Serialize, Deserialize)]
struct ShiftedFamilyRepr {
    d: usize,
    faces: Vec<Face>,
}

impl Serialize for ShiftedFamily {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ShiftedFamilyRepr {
            d: self.d,
            // a BTreeSet of sorted vertex vectors iterates in lex order
            faces: self.faces.iter().cloned().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShiftedFamily {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ShiftedFamilyRepr::deserialize(deserializer)?;
        Ok(ShiftedFamily {
            d: repr.d,
            faces: repr.faces.into_iter().collect(),
        })
    }
}

fn checked_family(k: &[Face], n: u32) -> Result<(usize, Vec<Face>), ShiftError> {
    if n > SHIFT_GUARD_N {
        return Err(ShiftError::ScaleGuard {
            n,
            guard: SHIFT_GUARD_N,
        });
    }
    let dedup: BTreeSet<Face> = k.iter().cloned().collect();
    let faces: Vec<Face> = dedup.into_iter().collect();
    let Some(first) = faces.first() else {
        return Err(ShiftError::EmptyFamily);
    };
    let arity = first.arity();
    for f in &faces {
        if f.arity() != arity {
            return Err(ShiftError::MixedArity(arity, f.arity()));
        }
        if f.max_vertex() > n {
            return Err(ShiftError::VertexOutOfContext {
                v: f.max_vertex(),
                n,
            });
        }
    }
    Ok((arity - 1, faces))
}

/// Exterior shift of the family `K` (as a set; duplicates collapse) in the
/// given context. Returns the kept column faces, which form a shifted family
/// of the same cardinality.
pub fn shift(k: &[Face], ctx: &ShiftContext) -> Result<ShiftedFamily, ShiftError> {
    let (d, rows) = checked_family(k, ctx.n())?;
    let p = PRIME_SHIFT;
    let target = rows.len();
    // reduced elimination basis: (pivot index, vector); each vector is zero
    // at all earlier pivots, so one forward pass reduces a candidate fully
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::with_capacity(target);
    let mut kept: BTreeSet<Face> = BTreeSet::new();
    for f in k_subsets_lex(ctx.n(), d + 1) {
        if basis.len() == target {
            break;
        }
        let mut col: Vec<u64> = rows.iter().map(|g| ctx.minor(g, &f)).collect();
        for (pivot, vec) in &basis {
            let c = col[*pivot];
            if c != 0 {
                for (x, v) in col.iter_mut().zip(vec.iter()) {
                    *x = sub_mod(*x, mul_mod(c, *v, p), p);
                }
            }
        }
        if let Some(pivot) = col.iter().position(|&v| v != 0) {
            let inv = inv_mod(col[pivot], p);
            for x in col.iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
            basis.push((pivot, col));
            kept.insert(f);
        }
    }
    if kept.len() != target {
        return Err(ShiftError::GenericityFailure(format!(
            "rank {} < |K| = {} with seed {}",
            kept.len(),
            target,
            ctx.seed()
        )));
    }
    Ok(ShiftedFamily { d, faces: kept })
}

fn derive_second_seed(seed: u64) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Shift computed under two independently seeded generic matrices; the two
/// results must agree bit for bit, else a genericity failure is reported.
pub fn shift_two_seed(k: &[Face], n: u32, seed: u64) -> Result<ShiftedFamily, ShiftError> {
    let a = shift(k, &ShiftContext::new(n, seed))?;
    let b = shift(k, &ShiftContext::new(n, derive_second_seed(seed)))?;
    if a != b {
        return Err(ShiftError::GenericityFailure(format!(
            "seed {seed} and its derived pair disagree; retry with fresh seeds"
        )));
    }
    Ok(a)
}

/// Exhaustive single-swap closure check: for every `f` in the family,
/// `v` in `f`, and `u < v` outside `f`, the swap `f - v + u` must be present.
pub fn is_shifted(faces: &BTreeSet<Face>) -> bool {
    for f in faces {
        for &v in f.vertices() {
            for u in 1..v {
                if !f.contains(u) && !faces.contains(&f.replace(v, u)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Dominance order: `f <=_P g` iff the sorted representations compare
/// componentwise. Lexicographic order is a linear extension of it.
pub fn dominance(f: &Face, g: &Face) -> Result<bool, ShiftError> {
    if f.arity() != g.arity() {
        return Err(ShiftError::SizeMismatch(f.arity(), g.arity()));
    }
    Ok(f.vertices().iter().zip(g.vertices()).all(|(a, b)| a <= b))
}

/// Combinatorial top Betti number of a shifted family: the number of faces
/// avoiding vertex 1. Rejects non-shifted input.
pub fn b_top(family: &ShiftedFamily) -> Result<u64, ShiftError> {
    if !is_shifted(&family.faces) {
        let witness = family
            .faces
            .iter()
            .find(|f| {
                f.vertices().iter().any(|&v| {
                    (1..v).any(|u| !f.contains(u) && !family.faces.contains(&f.replace(v, u)))
                })
            })
            .cloned()
            .expect("non-shifted family has a witness");
        return Err(ShiftError::NotShifted(witness));
    }
    Ok(family.faces.iter().filter(|f| !f.contains(1)).count() as u64)
}

/// Checks that the shifted complex of a pedigree's vertex set contains
/// `v_0 = [d+1] + {s+d+1} - {2}` after the canonical relabeling onto
/// `[s+d+1]`. Requires `s >= 1`. The shift runs under the two-seed protocol.
pub fn verify_claim33(p: &Pedigree, seed: u64) -> Result<bool, ShiftError> {
    let stats = p.stats();
    if stats.s == 0 {
        return Err(ShiftError::TrivialPedigree);
    }
    let (canon, _) = p.relabel_canonical();
    let n = (stats.s + p.d() as u64 + 1) as u32;
    let delta = shift_two_seed(&canon.faces(), n, seed)?;
    let v0 = claim33_target(p.d(), stats.s);
    Ok(delta.contains(&v0))
}

/// The face `v_0 = [d+1] + {s+d+1} - {2}`.
pub fn claim33_target(d: usize, s: u64) -> Face {
    let mut v: Vec<u32> = (1..=d as u32 + 1).filter(|&x| x != 2).collect();
    v.push(s as u32 + d as u32 + 1);
    Face::new(v).expect("valid target face")
}

/// `D_Gamma(f)`: the number of `w > y_d` with `{y_1 < ... < y_d < w}` in the
/// shift of `Gamma`, where `y_1 < ... < y_{d+1}` are the vertices of `f`.
pub fn nevo_d(gamma: &[Face], f: &Face, ctx: &ShiftContext) -> Result<u64, ShiftError> {
    let delta = shift(gamma, ctx)?;
    let vs = f.vertices();
    let d = vs.len() - 1;
    let y_d = vs[d - 1];
    let mut count = 0;
    for w in (y_d + 1)..=ctx.n() {
        let mut cand: Vec<u32> = vs[..d].to_vec();
        cand.push(w);
        if delta.contains(&Face::new(cand).expect("increasing by construction")) {
            count += 1;
        }
    }
    Ok(count)
}

/// Both sides of the union characterization for one candidate face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NevoCheck {
    pub in_delta_union: bool,
    pub gap: u64,
    pub d_sum: i64,
}

impl NevoCheck {
    /// The iff holds: membership equals `gap <= D_1 + D_2 - D_12`.
    pub fn iff_holds(&self) -> bool {
        self.in_delta_union == (self.gap as i64 <= self.d_sum)
    }
}

/// Evaluates the union characterization for `f`: `f` lies in the shift of
/// `Gamma_1 + Gamma_2` iff `y_{d+1} - y_d` is at most
/// `D_{Gamma_1}(f) + D_{Gamma_2}(f) - D_{Gamma_1 ^ Gamma_2}(f)`, provided the
/// intersection has exactly one top face.
pub fn verify_nevo(
    gamma1: &[Face],
    gamma2: &[Face],
    f: &Face,
    ctx: &ShiftContext,
) -> Result<NevoCheck, ShiftError> {
    let s1: BTreeSet<Face> = gamma1.iter().cloned().collect();
    let s2: BTreeSet<Face> = gamma2.iter().cloned().collect();
    let inter: Vec<Face> = s1.intersection(&s2).cloned().collect();
    if inter.len() != 1 {
        return Err(ShiftError::BadIntersection(inter.len()));
    }
    let union: Vec<Face> = s1.union(&s2).cloned().collect();
    let d1 = nevo_d(gamma1, f, ctx)? as i64;
    let d2 = nevo_d(gamma2, f, ctx)? as i64;
    let d12 = nevo_d(&inter, f, ctx)? as i64;
    let delta_union = shift(&union, ctx)?;
    let vs = f.vertices();
    let gap = (vs[vs.len() - 1] - vs[vs.len() - 2]) as u64;
    Ok(NevoCheck {
        in_delta_union: delta_union.contains(f),
        gap,
        d_sum: d1 + d2 - d12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pedigree::{fig6_pedigree, random_proper, PedigreeBuilder};

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    #[test]
    fn shift_of_full_clique_is_itself() {
        for d in [2usize, 3] {
            let n = d as u32 + 2;
            let k: Vec<Face> = k_subsets_lex(n, d + 1).collect();
            let delta = shift_two_seed(&k, n, 11).unwrap();
            assert_eq!(delta.len(), k.len());
            for f in &k {
                assert!(delta.contains(f));
            }
        }
    }

    #[test]
    fn shift_of_single_face() {
        for d in [2usize, 3] {
            let v: Vec<u32> = (2..=d as u32 + 2).collect();
            let delta = shift_two_seed(&[Face::new(v).unwrap()], d as u32 + 2, 5).unwrap();
            let min: Vec<u32> = (1..=d as u32 + 1).collect();
            assert_eq!(delta.len(), 1);
            assert!(delta.contains(&Face::new(min).unwrap()));
        }
        // larger ambient: still the minimum face
        let delta = shift_two_seed(&[face(&[5, 6, 7])], 7, 5).unwrap();
        assert!(delta.contains(&face(&[1, 2, 3])));
    }

    #[test]
    fn shift_outputs_are_shifted() {
        for seed in 0..30 {
            let inst = crate::bootstrap::Instance::new(9, 2, 0.25, seed);
            let k: Vec<Face> = crate::bootstrap::sample_complex(&inst)
                .iter_faces()
                .collect();
            if k.is_empty() {
                continue;
            }
            let delta = shift_two_seed(&k, 9, seed).unwrap();
            assert_eq!(delta.len(), k.len());
            assert!(is_shifted(delta.faces()));
        }
    }

    #[test]
    fn shiftedness_checker() {
        let min: BTreeSet<Face> = [face(&[1, 2, 3])].into_iter().collect();
        assert!(is_shifted(&min));
        let gap: BTreeSet<Face> = [face(&[1, 2, 4])].into_iter().collect();
        assert!(!is_shifted(&gap));
    }

    #[test]
    fn dominance_and_lex_extension() {
        let f = face(&[1, 2, 3]);
        assert!(dominance(&f, &f).unwrap());
        for g in k_subsets_lex(6, 3) {
            assert!(dominance(&f, &g).unwrap());
        }
        assert!(dominance(&face(&[1, 2]), &face(&[1, 2, 3])).is_err());
        // lex is a linear extension of dominance, exhaustively on n = 8
        let all: Vec<Face> = k_subsets_lex(8, 3).collect();
        for a in &all {
            for b in &all {
                if dominance(a, b).unwrap() {
                    assert!(a <= b, "{a} dominated by {b} but not lex-before");
                }
            }
        }
    }

    #[test]
    fn b_top_examples() {
        for d in [2usize, 3] {
            let n = d as u32 + 2;
            let boundary: Vec<Face> =
                crate::faces::facets(&Face::new((1..=n).collect()).unwrap()).unwrap();
            let delta = shift_two_seed(&boundary, n, 3).unwrap();
            assert_eq!(b_top(&delta).unwrap(), 1);
            let single = shift_two_seed(&[boundary[0].clone()], n, 3).unwrap();
            assert_eq!(b_top(&single).unwrap(), 0);
        }
        let not_shifted = ShiftedFamily {
            d: 2,
            faces: [face(&[1, 2, 4])].into_iter().collect(),
        };
        assert!(matches!(b_top(&not_shifted), Err(ShiftError::NotShifted(_))));
    }

    #[test]
    fn scale_guard() {
        let k = vec![face(&[1, 2, 3])];
        let ctx = ShiftContext::new(17, 0);
        assert!(matches!(shift(&k, &ctx), Err(ShiftError::ScaleGuard { .. })));
    }

    #[test]
    fn claim33_base_cases() {
        // one-move pedigree: Delta = K contains v0 = {1,3,4}
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        b.subdivide(root, 4).unwrap();
        let p = b.finish(root).unwrap();
        assert!(verify_claim33(&p, 1).unwrap());
        assert_eq!(claim33_target(2, 1), face(&[1, 3, 4]));

        // single-node pedigree rejected
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        let p = b.finish(root).unwrap();
        assert!(matches!(
            verify_claim33(&p, 1),
            Err(ShiftError::TrivialPedigree)
        ));
    }

    #[test]
    fn claim33_fig6_and_random() {
        assert!(verify_claim33(&fig6_pedigree(), 7).unwrap());
        for seed in 0..10 {
            let p = random_proper(2, 4, 9, seed).unwrap();
            assert!(verify_claim33(p.pedigree(), seed).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn nevo_d_single_face() {
        for d in [2usize, 3] {
            let n = d as u32 + 3;
            let u: Vec<u32> = (3..=d as u32 + 3).collect();
            let ctx = ShiftContext::new(n, 2);
            let f = Face::new((1..=d as u32 + 1).collect()).unwrap();
            // Delta({u}) = {[d+1]}: only w = d+1 completes [d] to a member
            assert_eq!(nevo_d(&[Face::new(u).unwrap()], &f, &ctx).unwrap(), 1);
        }
    }

    #[test]
    fn shift_json_sorted_lex() {
        let k: Vec<Face> = k_subsets_lex(4, 3).collect();
        let delta = shift_two_seed(&k, 4, 1).unwrap();
        let js = serde_json::to_string(&delta).unwrap();
        assert_eq!(js, r#"{"d":2,"faces":[[1,2,3],[1,2,4],[1,3,4],[2,3,4]]}"#);
        let back: ShiftedFamily = serde_json::from_str(&js).unwrap();
        assert_eq!(back, delta);
    }

    #[test]
    fn deterministic_context() {
        let a = ShiftContext::new(8, 42);
        let b = ShiftContext::new(8, 42);
        assert_eq!(a.x, b.x);
        let c = ShiftContext::new(8, 43);
        assert_ne!(a.x, c.x);
    }
}
