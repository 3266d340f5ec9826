//! Volume rigidity matrices of stacked contractions.
//!
//! Labels `1, ..., L` carry points `v_1, ..., v_L` in `d`-space, in general
//! position. A face `f = {x_1 < ... < x_{d+1}}` has the lifted matrix `A_f`
//! (point columns over a row of ones) whose determinant is proportional to
//! the simplex volume, and the cofactor vector `w_f` with
//! `(w_f)_{x_j, i} = C_{i,j}(A_f)` supported on the rows of `f`. The matrix
//! `A_K` collects the `w_f` as columns.
//!
//! The left kernel of `A_K` always contains the `d` translations and the
//! `d^2 - 1` traceless linear motions, so `rank(A_K) <= ds + 1` whenever `K`
//! uses `s + d + 1` labels; for the leaf set of any pedigree the rank equals
//! `ds + 1` exactly and the kernel dimension is `l - (ds+1)`.
//!
//! Points are sampled as integers in `[-1000, 1000]` with a full
//! general-position certificate, and all ranks are computed by fraction-free
//! integer elimination, so every statement here is checked exactly.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::boundary::bareiss_rank;
use crate::faces::{colex_rank, Face};
use crate::pedigree::Pedigree;

#[derive(Debug, Error, PartialEq)]
pub enum RigidityError {
    #[error("label {label} outside configuration range [1, {max}]")]
    LabelOutOfRange { label: u32, max: u32 },
    #[error("points are degenerate: face {0} has zero volume")]
    GeneralPositionFailure(Face),
    #[error("face has arity {got}, expected {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("label {0} must not occur in the face")]
    LabelInFace(u32),
    #[error("label {0} must not occur in the spanning family")]
    LabelInFamily(u32),
    #[error("random combination vanished after {0} attempts")]
    ZeroCombination(u32),
    #[error("could not reach general position after {0} attempts")]
    SamplingExhausted(u32),
}

/// Coordinate bound for sampled points.
pub const COORD_BOUND: i64 = 1_000;
const MAX_SAMPLING_ATTEMPTS: u32 = 64;

/// An integer point configuration for labels `1..=L`, certified to be in
/// general position: every `(d+1)`-subset spans a simplex of nonzero volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointConfig {
    d: usize,
    seed: u64,
    /// `points[x-1]` is the coordinate vector of label `x`.
    points: Vec<Vec<i64>>,
}

impl PointConfig {
    /// Deterministically samples a certified configuration for `labels`
    /// labels; failed draws advance to a derived seed and resample.
    pub fn generate(d: usize, labels: u32, seed: u64) -> Result<Self, RigidityError> {
        for attempt in 0..MAX_SAMPLING_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
            let points: Vec<Vec<i64>> = (0..labels)
                .map(|_| {
                    (0..d)
                        .map(|_| rng.gen_range(-COORD_BOUND..=COORD_BOUND))
                        .collect()
                })
                .collect();
            let cfg = PointConfig { d, seed, points };
            if cfg.general_position_witness().is_none() {
                return Ok(cfg);
            }
        }
        Err(RigidityError::SamplingExhausted(MAX_SAMPLING_ATTEMPTS))
    }

    /// Wraps explicit points, certifying general position.
    pub fn from_points(d: usize, points: Vec<Vec<i64>>) -> Result<Self, RigidityError> {
        let cfg = PointConfig { d, seed: 0, points };
        match cfg.general_position_witness() {
            None => Ok(cfg),
            Some(f) => Err(RigidityError::GeneralPositionFailure(f)),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> u32 {
        self.points.len() as u32
    }

    pub fn point(&self, label: u32) -> &[i64] {
        &self.points[label as usize - 1]
    }

    /// A `(d+1)`-subset with vanishing lifted determinant, if any.
    fn general_position_witness(&self) -> Option<Face> {
        for f in crate::faces::k_subsets_lex(self.labels(), self.d + 1) {
            if det_i128(&self.face_matrix_unchecked(&f)) == 0 {
                return Some(f);
            }
        }
        None
    }

    fn check_face(&self, f: &Face) -> Result<(), RigidityError> {
        if f.arity() != self.d + 1 {
            return Err(RigidityError::ArityMismatch {
                got: f.arity(),
                expected: self.d + 1,
            });
        }
        if f.max_vertex() > self.labels() {
            return Err(RigidityError::LabelOutOfRange {
                label: f.max_vertex(),
                max: self.labels(),
            });
        }
        Ok(())
    }

    fn face_matrix_unchecked(&self, f: &Face) -> Vec<Vec<i128>> {
        let d = self.d;
        let mut m = vec![vec![0i128; d + 1]; d + 1];
        for (j, &x) in f.vertices().iter().enumerate() {
            let v = self.point(x);
            for (i, row) in m.iter_mut().take(d).enumerate() {
                row[j] = v[i] as i128;
            }
            m[d][j] = 1;
        }
        m
    }
}

/// The lifted matrix `A_f`: point columns `v_{x_1}, ..., v_{x_{d+1}}` with an
/// appended row of ones. Its determinant is nonzero for certified
/// configurations.
pub fn face_matrix(f: &Face, cfg: &PointConfig) -> Result<Vec<Vec<i128>>, RigidityError> {
    cfg.check_face(f)?;
    Ok(cfg.face_matrix_unchecked(f))
}

/// Exact determinant by fraction-free elimination; sizes here are at most
/// `(d+1) x (d+1)` with small integer entries, far from overflow.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(col, pivot);
            sign = -sign;
        }
        for r in col + 1..n {
            for c in col + 1..n {
                a[r][c] = (a[col][col] * a[r][c] - a[r][col] * a[col][c]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[col][col];
    }
    sign * a[n - 1][n - 1]
}

/// The cofactor vector `w_f`, stored densely as an `L x d` row-major array:
/// entry `(x_j, i)` is the cofactor `C_{i,j}(A_f)`; rows outside `f` vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CofactorVector {
    pub face: Face,
    /// Length `L * d`; index `(x-1)*d + (i-1)`.
    pub entries: Vec<i128>,
}

impl CofactorVector {
    pub fn dot(&self, motion: &[i128]) -> i128 {
        self.entries
            .iter()
            .zip(motion)
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn cofactor(m: &[Vec<i128>], i: usize, j: usize) -> i128 {
    let minor: Vec<Vec<i128>> = m
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != i)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|&(c, _)| c != j)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
    sign * det_i128(&minor)
}

/// Computes `w_f` exactly: `(w_f)_{x_j, i} = C_{i,j}(A_f)` for coordinate
/// rows `i = 1..d` and columns `j = 1..d+1`.
pub fn cofactor_vector(f: &Face, cfg: &PointConfig) -> Result<CofactorVector, RigidityError> {
    let a = face_matrix(f, cfg)?;
    let d = cfg.d();
    let mut entries = vec![0i128; cfg.labels() as usize * d];
    for (j, &x) in f.vertices().iter().enumerate() {
        for i in 0..d {
            entries[(x as usize - 1) * d + i] = cofactor(&a, i, j);
        }
    }
    Ok(CofactorVector {
        face: f.clone(),
        entries,
    })
}

/// The matrix `A_K` whose columns are the cofactor vectors of `K`, columns
/// ordered by colex rank.
pub fn rigidity_matrix(
    k: &[Face],
    cfg: &PointConfig,
) -> Result<Vec<CofactorVector>, RigidityError> {
    let mut faces: Vec<Face> = k.to_vec();
    faces.sort_by_key(colex_rank);
    faces.dedup();
    faces.iter().map(|f| cofactor_vector(f, cfg)).collect()
}

/// Exact rank of a set of cofactor vectors (columns of `A_K`).
pub fn rank_of_columns(columns: &[CofactorVector]) -> usize {
    let rows: Vec<Vec<BigInt>> = columns
        .iter()
        .map(|c| c.entries.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    // rank is transpose-invariant; eliminate on the shorter axis
    bareiss_rank(rows)
}

/// Explicit spanning set of the guaranteed left kernel: the `d` coordinate
/// translations and `d^2 - 1` traceless linear maps applied pointwise.
/// Returns `d + d^2 - 1` motions of length `L * d`.
pub fn left_kernel_basis(cfg: &PointConfig) -> Vec<Vec<i128>> {
    let d = cfg.d();
    let labels = cfg.labels() as usize;
    let mut out = Vec::with_capacity(d + d * d - 1);
    for i in 0..d {
        let mut z = vec![0i128; labels * d];
        for x in 0..labels {
            z[x * d + i] = 1;
        }
        out.push(z);
    }
    // traceless basis: E_{ab} for a != b, then E_{aa} - E_{dd} for a < d-1+1
    let mut maps: Vec<Vec<Vec<i128>>> = Vec::new();
    for a in 0..d {
        for b in 0..d {
            if a != b {
                let mut m = vec![vec![0i128; d]; d];
                m[a][b] = 1;
                maps.push(m);
            }
        }
    }
    for a in 0..d - 1 {
        let mut m = vec![vec![0i128; d]; d];
        m[a][a] = 1;
        m[d - 1][d - 1] = -1;
        maps.push(m);
    }
    for m in maps {
        let mut z = vec![0i128; labels * d];
        for x in 0..labels {
            let v = cfg.point(x as u32 + 1);
            for (i, mi) in m.iter().enumerate() {
                z[x * d + i] = mi
                    .iter()
                    .zip(v)
                    .map(|(&c, &vc)| c * vc as i128)
                    .sum();
            }
        }
        out.push(z);
    }
    out
}

/// Checks that every motion in the explicit left-kernel basis annihilates
/// every column of `A_K`, exactly.
pub fn left_kernel_annihilates(k: &[Face], cfg: &PointConfig) -> Result<bool, RigidityError> {
    let columns = rigidity_matrix(k, cfg)?;
    let basis = left_kernel_basis(cfg);
    Ok(basis
        .iter()
        .all(|z| columns.iter().all(|w| w.dot(z) == 0)))
}

/// Rank and kernel report for the leaf set of a pedigree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropA1Report {
    pub l: u64,
    pub s: u64,
    pub rank: u64,
    pub ker_dim: u64,
    /// `rank = ds + 1`, equivalently `ker_dim = l - (ds+1)`.
    pub pass: bool,
}

/// Verifies the rank identity on a pedigree: with `K` the leaf faces and
/// `s + d + 1` the label count of the whole pedigree, `rank(A_K) = ds + 1`
/// and the kernel dimension is `l - (ds + 1)`.
pub fn verify_prop_a1(p: &Pedigree, cfg: &PointConfig) -> Result<PropA1Report, RigidityError> {
    let leaves: Vec<Face> = p.leaf_faces().into_iter().collect();
    let st = p.stats();
    let columns = rigidity_matrix(&leaves, cfg)?;
    let rank = rank_of_columns(&columns) as u64;
    let l = leaves.len() as u64;
    let expected = p.d() as u64 * st.s + 1;
    Ok(PropA1Report {
        l,
        s: st.s,
        rank,
        ker_dim: l - rank,
        pass: rank == expected,
    })
}

/// Verifies the subdivision identity: for `z` outside `f` with insertion
/// position `k` (i.e. `x_{k-1} < z < x_k`), and `f_r` the face with `x_r`
/// replaced by `z`,
/// `w_f = sum_{r<k} (-1)^{k+r+1} w_{f_r} + sum_{r>=k} (-1)^{k+r} w_{f_r}`,
/// exactly, coordinate by coordinate.
pub fn verify_claim_a2(f: &Face, z: u32, cfg: &PointConfig) -> Result<bool, RigidityError> {
    cfg.check_face(f)?;
    if f.contains(z) {
        return Err(RigidityError::LabelInFace(z));
    }
    if z == 0 || z > cfg.labels() {
        return Err(RigidityError::LabelOutOfRange {
            label: z,
            max: cfg.labels(),
        });
    }
    let k = f.vertices().iter().filter(|&&x| x < z).count() + 1;
    let w_f = cofactor_vector(f, cfg)?;
    let mut rhs = vec![0i128; w_f.entries.len()];
    for (r0, &x) in f.vertices().iter().enumerate() {
        let r = r0 + 1;
        let fr = f.replace(x, z);
        let w_fr = cofactor_vector(&fr, cfg)?;
        let sign: i128 = if r < k {
            if (k + r + 1) % 2 == 0 {
                1
            } else {
                -1
            }
        } else if (k + r) % 2 == 0 {
            1
        } else {
            -1
        };
        for (acc, &v) in rhs.iter_mut().zip(&w_fr.entries) {
            *acc += sign * v;
        }
    }
    Ok(w_f.entries == rhs)
}

/// Verifies the independence statement: for any faces `extra` avoiding the
/// label `z` and any nonzero `w~` in their cofactor span, the vectors
/// `w~, w_{f_1}, ..., w_{f_d}` are independent, where `f_i` replaces `x_i`
/// by `z` in `f`. Coefficients for `w~` are seeded random small integers,
/// resampled if the combination vanishes.
pub fn verify_claim_a3(
    f: &Face,
    z: u32,
    extra: &[Face],
    cfg: &PointConfig,
    coeff_seed: u64,
) -> Result<bool, RigidityError> {
    cfg.check_face(f)?;
    if f.contains(z) {
        return Err(RigidityError::LabelInFace(z));
    }
    for g in extra {
        if g.contains(z) {
            return Err(RigidityError::LabelInFamily(z));
        }
    }
    let extra_vecs: Vec<CofactorVector> = extra
        .iter()
        .map(|g| cofactor_vector(g, cfg))
        .collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(coeff_seed);
    let mut tilde: Option<Vec<i128>> = None;
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let mut acc = vec![0i128; cfg.labels() as usize * cfg.d()];
        for w in &extra_vecs {
            let c = rng.gen_range(1..=100i128);
            for (a, &v) in acc.iter_mut().zip(&w.entries) {
                *a += c * v;
            }
        }
        if acc.iter().any(|&v| v != 0) {
            tilde = Some(acc);
            break;
        }
    }
    let Some(tilde) = tilde else {
        return Err(RigidityError::ZeroCombination(MAX_SAMPLING_ATTEMPTS));
    };
    let mut rows: Vec<Vec<BigInt>> = vec![tilde.iter().map(|&v| BigInt::from(v)).collect()];
    for i in 0..cfg.d() {
        let fi = f.replace(f.vertices()[i], z);
        let w = cofactor_vector(&fi, cfg)?;
        rows.push(w.entries.iter().map(|&v| BigInt::from(v)).collect());
    }
    let want = rows.len();
    Ok(bareiss_rank(rows) == want)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pedigree::{fig6_pedigree, random_proper, PedigreeBuilder};

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_right_triangle_volume() {
        let cfg =
            PointConfig::from_points(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let a = face_matrix(&face(&[1, 2, 3]), &cfg).unwrap();
        assert_eq!(det_i128(&a).abs(), 1);
    }

    #[test]
    fn collinear_points_flagged() {
        let err = PointConfig::from_points(2, vec![vec![0, 0], vec![1, 1], vec![2, 2]]);
        assert_eq!(
            err,
            Err(RigidityError::GeneralPositionFailure(face(&[1, 2, 3])))
        );
    }

    #[test]
    fn generated_configs_certified() {
        for seed in 0..5 {
            let cfg = PointConfig::generate(2, 9, seed).unwrap();
            assert!(cfg.general_position_witness().is_none());
            let cfg3 = PointConfig::generate(3, 8, seed).unwrap();
            assert!(cfg3.general_position_witness().is_none());
        }
        // determinism
        assert_eq!(
            PointConfig::generate(2, 7, 9).unwrap(),
            PointConfig::generate(2, 7, 9).unwrap()
        );
    }

    #[test]
    fn cofactor_support() {
        let cfg = PointConfig::generate(2, 6, 1).unwrap();
        let w = cofactor_vector(&face(&[2, 4, 5]), &cfg).unwrap();
        for x in 1..=6u32 {
            let row = &w.entries[(x as usize - 1) * 2..(x as usize) * 2];
            if [2, 4, 5].contains(&x) {
                assert!(row.iter().any(|&v| v != 0));
            } else {
                assert!(row.iter().all(|&v| v == 0));
            }
        }
    }

    #[test]
    fn translations_and_traceless_annihilate() {
        for d in [2usize, 3] {
            let cfg = PointConfig::generate(d, 8, 3).unwrap();
            let k: Vec<Face> = crate::faces::k_subsets_lex(8, d + 1).take(12).collect();
            assert!(left_kernel_annihilates(&k, &cfg).unwrap());
            assert_eq!(left_kernel_basis(&cfg).len(), d + d * d - 1);
        }
    }

    #[test]
    fn single_face_rank_one() {
        let cfg = PointConfig::generate(2, 5, 4).unwrap();
        let cols = rigidity_matrix(&[face(&[1, 3, 5])], &cfg).unwrap();
        assert_eq!(rank_of_columns(&cols), 1);
    }

    #[test]
    fn prop_a1_small_cases() {
        // single-node pedigree: rank 1 = d*0 + 1
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        let p = b.finish(root).unwrap();
        let cfg = PointConfig::generate(2, 3, 0).unwrap();
        let rep = verify_prop_a1(&p, &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.rank, rep.ker_dim), (1, 0));

        // one-move pedigree: rank 3, kernel 0
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        b.subdivide(root, 4).unwrap();
        let p = b.finish(root).unwrap();
        let cfg = PointConfig::generate(2, 4, 0).unwrap();
        let rep = verify_prop_a1(&p, &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.rank, rep.ker_dim), (3, 0));
    }

    #[test]
    fn prop_a1_fig6() {
        let p = fig6_pedigree();
        let cfg = PointConfig::generate(2, 6, 11).unwrap();
        let rep = verify_prop_a1(&p, &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.l, rep.s), (11, 3));
        assert_eq!((rep.rank, rep.ker_dim), (7, 4));
    }

    #[test]
    fn prop_a1_random_proper() {
        for seed in 0..5 {
            let p = random_proper(2, 4, 9, seed).unwrap();
            let cfg = PointConfig::generate(2, 9, seed).unwrap();
            let rep = verify_prop_a1(p.pedigree(), &cfg).unwrap();
            assert!(rep.pass, "seed {seed}: {rep:?}");
            assert_eq!(rep.ker_dim, 0);
        }
    }

    #[test]
    fn claim_a2_all_insertion_positions() {
        for d in [2usize, 3] {
            let labels = d as u32 + 4;
            for seed in 0..5 {
                let cfg = PointConfig::generate(d, labels, seed).unwrap();
                // z below, inside, and above the face's range
                let base: Vec<u32> = (2..=d as u32 + 2).collect();
                let f = Face::new(base).unwrap();
                for z in [1, d as u32 + 3, labels] {
                    assert!(
                        verify_claim_a2(&f, z, &cfg).unwrap(),
                        "d={d} z={z} seed={seed}"
                    );
                }
            }
        }
        let cfg = PointConfig::generate(2, 5, 0).unwrap();
        assert!(matches!(
            verify_claim_a2(&face(&[1, 2, 3]), 2, &cfg),
            Err(RigidityError::LabelInFace(2))
        ));
    }

    #[test]
    fn claim_a3_independence_and_negative_control() {
        for d in [2usize, 3] {
            let labels = d as u32 + 3;
            for seed in 0..5 {
                let cfg = PointConfig::generate(d, labels, seed).unwrap();
                let f = Face::new((1..=d as u32 + 1).collect()).unwrap();
                let z = d as u32 + 2;
                assert!(
                    verify_claim_a3(&f, z, &[f.clone()], &cfg, seed).unwrap(),
                    "d={d} seed={seed}"
                );
            }
        }
        // negative control: appending w_{f_{d+1}} and w_f forces a dependency
        let d = 2;
        let cfg = PointConfig::generate(d, 5, 2).unwrap();
        let f = face(&[1, 2, 3]);
        let z = 4;
        let mut vectors = vec![cofactor_vector(&f, &cfg).unwrap()];
        for i in 0..=d {
            let fi = f.replace(f.vertices()[i], z);
            vectors.push(cofactor_vector(&fi, &cfg).unwrap());
        }
        // {w_f, w_{f_1}, w_{f_2}, w_{f_3}}: the subdivision identity makes
        // this d+2 = 4 vectors of rank 3
        assert_eq!(rank_of_columns(&vectors), d + 1);
    }
}
