//! Fuss--Catalan combinatorics and the density analysis.
//!
//! The Fuss--Catalan number `C_d(s)` counts `(d+1)`-ary trees with `s`
//! internal nodes (equivalently, stacked subdivisions of a `d`-simplex with
//! `s` unlabeled internal vertices). Its growth rate is
//! `alpha_d = (d+1)^{d+1} / d^d`, and the generating function
//! `f(gamma) = sum_s C_d(s) gamma^{ds+1}` is the smallest positive root of
//! `Q_gamma(x) = x^{d+1} - x + gamma` for `gamma` up to `alpha_d^{-1/d}`.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("gamma = {gamma} is supercritical (critical value {critical}); no subcritical root")]
    SupercriticalGamma { gamma: f64, critical: f64 },
    #[error("gamma must be nonnegative, got {0}")]
    NegativeGamma(f64),
    #[error("enumeration of {count} trees exceeds the guard of {guard}")]
    EnumerationTooLarge { count: BigUint, guard: u64 },
    #[error("n = {n} too small: need n > d+1 = {min}")]
    NTooSmall { n: u64, min: u64 },
    #[error("critical probability {p} is not below 1")]
    ProbabilityOutOfRange { p: f64 },
}

/// `C(n, k)` as an arbitrary-precision integer.
pub fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// Fuss--Catalan number `C_d(s) = C((d+1)s, s) / (ds + 1)`, exactly.
pub fn fuss_catalan(d: usize, s: usize) -> BigUint {
    let d = d as u64;
    let s = s as u64;
    big_binomial((d + 1) * s, s) / BigUint::from(d * s + 1)
}

/// `C_d(s)` via the convolution recursion
/// `C_d(s) = sum_{s_1 + ... + s_{d+1} = s-1} prod_j C_d(s_j)`.
///
/// Independent of the closed form; quadratic in `s`, intended for
/// cross-checks at small `s`.
pub fn fuss_catalan_by_recursion(d: usize, s: usize) -> BigUint {
    let mut c: Vec<BigUint> = vec![BigUint::one()];
    for t in 1..=s {
        // forests of k trees with total internal count m, trees drawn from c[..t]
        let mut f: Vec<BigUint> = c[..t].to_vec();
        for _ in 2..=(d + 1) {
            let mut g = vec![BigUint::zero(); t];
            for (m, gm) in g.iter_mut().enumerate() {
                for j in 0..=m {
                    *gm += &f[j] * &c[m - j];
                }
            }
            f = g;
        }
        c.push(f[t - 1].clone());
    }
    c.swap_remove(s)
}

/// The exact growth rate `alpha_d = (d+1)^{d+1} / d^d` of the Fuss--Catalan
/// numbers.
pub fn alpha(d: usize) -> Ratio<BigInt> {
    let num = BigInt::from(d + 1).pow(d as u32 + 1);
    let den = BigInt::from(d).pow(d as u32);
    Ratio::new(num, den)
}

pub fn alpha_f64(d: usize) -> f64 {
    alpha(d).to_f64().expect("alpha fits in f64")
}

/// The critical value of `gamma`: `alpha_d^{-1/d}`. For `gamma` below it,
/// `Q_gamma` has a root in `(0, (d+1)^{-1/d})`.
pub fn critical_gamma(d: usize) -> f64 {
    alpha_f64(d).powf(-1.0 / d as f64)
}

/// The critical probability `(alpha_d * n)^{-1/d}` of the phase transition.
pub fn critical_p(d: usize, n: u64) -> Result<f64, AnalysisError> {
    if n <= (d + 1) as u64 {
        return Err(AnalysisError::NTooSmall {
            n,
            min: (d + 1) as u64,
        });
    }
    let p = (alpha_f64(d) * n as f64).powf(-1.0 / d as f64);
    if p >= 1.0 {
        return Err(AnalysisError::ProbabilityOutOfRange { p });
    }
    Ok(p)
}

/// `Q_gamma(x) = x^{d+1} - x + gamma`.
pub fn q_gamma(d: usize, gamma: f64, x: f64) -> f64 {
    x.powi(d as i32 + 1) - x + gamma
}

/// A density query: a dimension and a `gamma` at or below the critical value.
///
/// The boundary `gamma = alpha_d^{-1/d}` is admitted; there `Q_gamma` has a
/// double root at `x_0 = (d+1)^{-1/d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityQuery {
    d: usize,
    gamma: f64,
}

impl DensityQuery {
    pub fn new(d: usize, gamma: f64) -> Result<Self, AnalysisError> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(AnalysisError::NegativeGamma(gamma));
        }
        let critical = critical_gamma(d);
        if gamma > critical {
            return Err(AnalysisError::SupercriticalGamma { gamma, critical });
        }
        Ok(DensityQuery { d, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The smallest positive root of `Q_gamma`, by bisection on
/// `[0, (d+1)^{-1/d}]`.
///
/// On that interval `Q_gamma` is strictly decreasing, positive at `0` (for
/// `gamma > 0`) and nonpositive at the local minimum `x_0` whenever `gamma`
/// is subcritical, so the bracket is guaranteed.
pub fn hat_gamma(q: &DensityQuery) -> f64 {
    let (d, gamma) = (q.d, q.gamma);
    if gamma == 0.0 {
        return 0.0;
    }
    let x0 = (d as f64 + 1.0).powf(-1.0 / d as f64);
    let mut lo = 0.0f64;
    let mut hi = x0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_gamma(d, gamma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if q_gamma(d, gamma, lo).abs() <= q_gamma(d, gamma, hi).abs() {
        lo
    } else {
        hi
    }
}

/// Partial sum `sum_{s <= s_max} C_d(s) gamma^{ds+1}` of the generating
/// function. Monotone nondecreasing in `s_max` and bounded by [`hat_gamma`].
pub fn density_series(d: usize, gamma: f64, s_max: usize) -> f64 {
    let mut total = 0.0f64;
    for s in 0..=s_max {
        let coeff = fuss_catalan(d, s).to_f64().expect("coefficient in f64 range");
        total += coeff * gamma.powi((d * s + 1) as i32);
    }
    total
}

/// Shape of a rooted `(d+1)`-ary tree: every internal node has exactly `d+1`
/// ordered children. Canonical form is the preorder sequence of arities,
/// stored as one flag per node (`true` = internal).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeShape {
    d: usize,
    preorder: Vec<bool>,
}

impl TreeShape {
    pub fn leaf(d: usize) -> Self {
        TreeShape {
            d,
            preorder: vec![false],
        }
    }

    /// Joins `d+1` child shapes under a new internal root.
    pub fn internal(d: usize, children: Vec<TreeShape>) -> Self {
        assert_eq!(children.len(), d + 1);
        let mut preorder = vec![true];
        for c in children {
            assert_eq!(c.d, d);
            preorder.extend(c.preorder);
        }
        TreeShape { d, preorder }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn internal_count(&self) -> usize {
        self.preorder.iter().filter(|&&b| b).count()
    }

    pub fn leaf_count(&self) -> usize {
        self.preorder.len() - self.internal_count()
    }

    pub fn preorder(&self) -> &[bool] {
        &self.preorder
    }

    /// Splits off the `d+1` child shapes of an internal root. Returns `None`
    /// for the single-leaf shape.
    pub fn children(&self) -> Option<Vec<TreeShape>> {
        if !self.preorder[0] {
            return None;
        }
        let mut out = Vec::with_capacity(self.d + 1);
        let mut pos = 1usize;
        for _ in 0..=self.d {
            let start = pos;
            // a subtree is complete when leaves exceed internals by one
            let mut balance: i64 = 0;
            loop {
                balance += if self.preorder[pos] {
                    self.d as i64
                } else {
                    -1
                };
                pos += 1;
                if balance < 0 {
                    break;
                }
            }
            out.push(TreeShape {
                d: self.d,
                preorder: self.preorder[start..pos].to_vec(),
            });
        }
        Some(out)
    }
}

const ENUMERATION_GUARD: u64 = 1_000_000;

/// All `(d+1)`-ary tree shapes with `s` internal nodes, exactly `C_d(s)` of
/// them. Guarded: refuses when the count exceeds `10^6`.
pub fn enumerate_trees(d: usize, s: usize) -> Result<Vec<TreeShape>, AnalysisError> {
    let count = fuss_catalan(d, s);
    if count > BigUint::from(ENUMERATION_GUARD) {
        return Err(AnalysisError::EnumerationTooLarge {
            count,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut memo: Vec<Vec<TreeShape>> = vec![vec![TreeShape::leaf(d)]];
    for t in 1..=s {
        let mut shapes = Vec::new();
        let mut parts = vec![0usize; d + 1];
        compose(d, t - 1, 0, &mut parts, &memo, &mut shapes);
        memo.push(shapes);
    }
    Ok(memo.swap_remove(s))
}

fn compose(
    d: usize,
    remaining: usize,
    idx: usize,
    parts: &mut Vec<usize>,
    memo: &[Vec<TreeShape>],
    out: &mut Vec<TreeShape>,
) {
    if idx == d {
        parts[idx] = remaining;
        cross(d, parts, memo, out);
        return;
    }
    for take in 0..=remaining {
        parts[idx] = take;
        compose(d, remaining - take, idx + 1, parts, memo, out);
    }
}

fn cross(d: usize, parts: &[usize], memo: &[Vec<TreeShape>], out: &mut Vec<TreeShape>) {
    let mut picks = vec![0usize; d + 1];
    loop {
        let children: Vec<TreeShape> = (0..=d).map(|i| memo[parts[i]][picks[i]].clone()).collect();
        out.push(TreeShape::internal(d, children));
        let mut i = d + 1;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            picks[i] += 1;
            if picks[i] < memo[parts[i]].len() {
                break;
            }
            picks[i] = 0;
        }
    }
}

/// Uniform sampler over the `(d+1)`-ary trees with a fixed number of internal
/// nodes.
///
/// The law is exactly uniform on `T_s`: child subtree sizes are drawn in
/// sequence with probability proportional to the number of completions,
/// using exact big-integer counts.
pub struct TreeSampler {
    d: usize,
    /// `c[t] = C_d(t)`.
    c: Vec<BigUint>,
    /// `f[k][t]` = ordered forests of `k` trees with `t` internal nodes total.
    f: Vec<Vec<BigUint>>,
}

impl TreeSampler {
    pub fn new(d: usize, s_max: usize) -> Self {
        let c: Vec<BigUint> = (0..=s_max).map(|t| fuss_catalan(d, t)).collect();
        let mut f: Vec<Vec<BigUint>> = Vec::with_capacity(d + 2);
        f.push(
            (0..=s_max)
                .map(|t| if t == 0 { BigUint::one() } else { BigUint::zero() })
                .collect(),
        );
        for k in 1..=(d + 1) {
            let mut row = vec![BigUint::zero(); s_max + 1];
            for (t, rt) in row.iter_mut().enumerate() {
                for j in 0..=t {
                    *rt += &c[j] * &f[k - 1][t - j];
                }
            }
            f.push(row);
        }
        TreeSampler { d, c, f }
    }

    pub fn sample<R: Rng>(&self, s: usize, rng: &mut R) -> TreeShape {
        if s == 0 {
            return TreeShape::leaf(self.d);
        }
        let mut children = Vec::with_capacity(self.d + 1);
        let mut remaining = s - 1;
        for i in 0..=self.d {
            let left = self.d - i; // children still to draw after this one
            let total = &self.f[left + 1][remaining];
            let mut ticket = rng.gen_biguint_below(total);
            let mut take = 0usize;
            loop {
                let w = &self.c[take] * &self.f[left][remaining - take];
                if ticket < w {
                    break;
                }
                ticket -= w;
                take += 1;
            }
            children.push(self.sample(take, rng));
            remaining -= take;
        }
        TreeShape::internal(self.d, children)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn fuss_catalan_small_values() {
        assert_eq!(fuss_catalan(2, 0), BigUint::one());
        assert_eq!(fuss_catalan(3, 0), BigUint::one());
        assert_eq!(fuss_catalan(2, 1), BigUint::from(1u32));
        assert_eq!(fuss_catalan(2, 2), BigUint::from(3u32));
        assert_eq!(fuss_catalan(2, 8), BigUint::from(43263u32));
        assert_eq!(fuss_catalan(3, 6), BigUint::from(7084u32));
        assert_eq!(fuss_catalan(3, 3), BigUint::from(22u32));
    }

    #[test]
    fn recursion_matches_closed_form() {
        for d in 2..=4 {
            for s in 0..=10 {
                assert_eq!(
                    fuss_catalan(d, s),
                    fuss_catalan_by_recursion(d, s),
                    "d={d}, s={s}"
                );
            }
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(2), Ratio::new(BigInt::from(27), BigInt::from(4)));
        assert_eq!(alpha(3), Ratio::new(BigInt::from(256), BigInt::from(27)));
    }

    #[test]
    fn growth_ratio_approaches_alpha() {
        for d in 2..=3 {
            let s = 200usize;
            let num = fuss_catalan(d, s + 1);
            let den = fuss_catalan(d, s);
            let ratio = Ratio::new(BigInt::from(num), BigInt::from(den))
                .to_f64()
                .unwrap();
            let a = alpha_f64(d);
            assert!(
                (ratio - a).abs() / a < 0.01,
                "d={d}: ratio {ratio} vs alpha {a}"
            );
        }
    }

    #[test]
    fn critical_p_values() {
        let p = critical_p(2, 200).unwrap();
        assert!((p - 1350f64.powf(-0.5)).abs() < 1e-15);
        assert!((p - 0.027217).abs() < 1e-6);
        // scaling: n -> 4n halves p for d = 2
        let p4 = critical_p(2, 800).unwrap();
        assert!((p4 - p / 2.0).abs() < 1e-15);
        let p3 = critical_p(3, 10_000).unwrap();
        assert!((p3 - (2_560_000f64 / 27.0).powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!(critical_p(2, 3).is_err());
    }

    #[test]
    fn hat_gamma_basics() {
        let q = DensityQuery::new(2, 0.0).unwrap();
        assert_eq!(hat_gamma(&q), 0.0);

        // boundary: root at (d+1)^{-1/d}
        for d in 2..=5 {
            let q = DensityQuery::new(d, critical_gamma(d)).unwrap();
            let x0 = (d as f64 + 1.0).powf(-1.0 / d as f64);
            assert!((hat_gamma(&q) - x0).abs() < 1e-6, "d={d}");
        }

        // rejection above the critical value
        assert!(matches!(
            DensityQuery::new(2, critical_gamma(2) + 1e-9),
            Err(AnalysisError::SupercriticalGamma { .. })
        ));
        assert!(DensityQuery::new(2, -0.1).is_err());
    }

    #[test]
    fn hat_gamma_vs_series() {
        let q = DensityQuery::new(2, 0.25).unwrap();
        let root = hat_gamma(&q);
        assert!(q_gamma(2, 0.25, root).abs() <= 1e-12);
        let series = density_series(2, 0.25, 60);
        assert!((root - series).abs() <= 1e-8);

        let q2 = DensityQuery::new(2, 0.2).unwrap();
        assert!((hat_gamma(&q2) - density_series(2, 0.2, 60)).abs() <= 1e-8);
    }

    #[test]
    fn density_series_edges() {
        assert_eq!(density_series(2, 0.3, 0), 0.3);
        assert_eq!(density_series(2, 0.0, 50), 0.0);
    }

    #[test]
    fn enumerate_tree_counts() {
        assert_eq!(enumerate_trees(2, 0).unwrap().len(), 1);
        assert_eq!(enumerate_trees(2, 2).unwrap().len(), 3);
        let t33 = enumerate_trees(3, 3).unwrap();
        assert_eq!(t33.len(), 22);
        for t in &t33 {
            assert_eq!(t.internal_count(), 3);
            assert_eq!(t.leaf_count(), 3 * 3 + 1);
        }
        // distinctness
        let mut seen = t33.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 22);
    }

    #[test]
    fn enumeration_guard() {
        // C_2(10) = 1430715 > 10^6
        match enumerate_trees(2, 10) {
            Err(AnalysisError::EnumerationTooLarge { count, .. }) => {
                assert_eq!(count, BigUint::from(1_430_715u64));
            }
            other => panic!("expected guard rejection, got {other:?}"),
        }
    }

    #[test]
    fn tree_children_roundtrip() {
        for shape in enumerate_trees(2, 3).unwrap() {
            if let Some(children) = shape.children() {
                assert_eq!(children.len(), 3);
                let rebuilt = TreeShape::internal(2, children);
                assert_eq!(rebuilt, shape);
            }
        }
    }

    #[test]
    fn sampler_is_uniform_over_small_shapes() {
        let sampler = TreeSampler::new(2, 3);
        let shapes = enumerate_trees(2, 3).unwrap();
        let mut counts: BTreeMap<TreeShape, usize> = BTreeMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 12_000;
        for _ in 0..trials {
            let t = sampler.sample(3, &mut rng);
            assert_eq!(t.internal_count(), 3);
            *counts.entry(t).or_default() += 1;
        }
        assert_eq!(counts.len(), shapes.len()); // all 12 shapes hit
        let expected = trials as f64 / shapes.len() as f64;
        for (_, &c) in &counts {
            assert!(
                (c as f64 - expected).abs() < 5.0 * expected.sqrt() + 1.0,
                "count {c} vs expected {expected}"
            );
        }
    }
}
