//! The pedigree DAG calculus.
//!
//! An `(m,l,s)`-pedigree is a DAG on distinct faces with a unique in-degree-0
//! root, every node of out-degree `0` or `d+1`, and the stacking rule: the
//! children of `u = {x_1 < ... < x_{d+1}}` with outgoing label `z` are exactly
//! `u - {x_i} + {z}`. It records a stacked contraction of its root; `m` counts
//! internal nodes, `l` leaves, and `s + d + 1` the distinct labels.
//!
//! The excess statistics are `a = l - (ds+1)` (leaf excess) and
//! `b = dm - (l-1)` (tree excess of the underlying undirected graph); every
//! pedigree satisfies `a >= 0` and `b <= d a^{(d+1)/d} + (d^2-1) a`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::analysis::{TreeSampler, TreeShape};
use crate::bootstrap::BootstrapState;
use crate::faces::{colex_rank, link, Face, FaceError};

#[derive(Debug, Error, PartialEq)]
pub enum PedigreeError {
    #[error("pedigree has no nodes")]
    Empty,
    #[error(transparent)]
    Face(#[from] FaceError),
    #[error("duplicate face {0}")]
    DuplicateFace(Face),
    #[error("face {face} has arity {got}, expected {expected}")]
    ArityMismatch {
        face: Face,
        got: usize,
        expected: usize,
    },
    #[error("root {0} has an incoming edge")]
    RootHasInEdge(Face),
    #[error("node {0} has in-degree 0 but is not the root")]
    ExtraRoot(Face),
    #[error("cycle through node {0}")]
    Cycle(Face),
    #[error("node {face} has {got} children, expected {expected}")]
    BadOutDegree {
        face: Face,
        got: usize,
        expected: usize,
    },
    #[error("stacking violated at {parent}: {detail}")]
    Stacking { parent: Face, detail: String },
    #[error("child index {index} out of range at node {parent}")]
    ChildIndexOutOfRange { parent: Face, index: usize },
    #[error("pedigree is not proper: {0}")]
    NotProper(String),
    #[error("label pool too small: need {needed} labels outside the root, have {available}")]
    LabelPoolTooSmall { needed: usize, available: usize },
    #[error("k = {k} must satisfy 0 <= k < s = {s}")]
    BadReduceTarget { k: u64, s: u64 },
    #[error("k = {k} must exceed d+1 = {min}")]
    KTooSmall { k: u32, min: u32 },
    #[error("face {0} is not a leaf of the pedigree")]
    NotALeaf(Face),
    #[error("scale guard exceeded: {0}")]
    GuardExceeded(String),
}

/// Outgoing edges of an internal node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutEdges {
    pub label: u32,
    /// Child node indices, ordered by the position of the replaced vertex.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PedigreeNode {
    pub face: Face,
    pub out: Option<OutEdges>,
}

impl PedigreeNode {
    pub fn is_leaf(&self) -> bool {
        self.out.is_none()
    }
}

/// A pedigree DAG. Nodes are deduplicated by face: a face occurring twice in
/// a stacked contraction is a single node here, so that `b` equals the tree
/// excess of the underlying graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pedigree {
    d: usize,
    root: usize,
    nodes: Vec<PedigreeNode>,
}

/// The excess statistics of a pedigree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PedigreeStats {
    /// Internal node count.
    pub m: u64,
    /// Leaf count.
    pub l: u64,
    /// Distinct labels minus `d+1`.
    pub s: u64,
    /// Leaf excess `l - (ds+1)`.
    pub a: i64,
    /// Tree excess `dm - (l-1)`.
    pub b: i64,
}

impl Pedigree {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn root_face(&self) -> &Face {
        &self.nodes[self.root].face
    }

    pub fn nodes(&self) -> &[PedigreeNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &PedigreeNode {
        &self.nodes[idx]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All node faces (root, internal, leaves), in node order.
    pub fn faces(&self) -> Vec<Face> {
        self.nodes.iter().map(|n| n.face.clone()).collect()
    }

    pub fn leaf_faces(&self) -> BTreeSet<Face> {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| n.face.clone())
            .collect()
    }

    /// Union of all labels appearing on nodes.
    pub fn labels(&self) -> BTreeSet<u32> {
        self.nodes
            .iter()
            .flat_map(|n| n.face.vertices().iter().copied())
            .collect()
    }

    /// Checks the pedigree axioms in order, reporting the first violation:
    /// distinct valid faces, child indexing, unique in-degree-0 root,
    /// acyclicity, out-degrees, and the stacking rule.
    pub fn validate(&self) -> Result<(), PedigreeError> {
        if self.nodes.is_empty() {
            return Err(PedigreeError::Empty);
        }
        let arity = self.d + 1;
        let mut seen: BTreeSet<&Face> = BTreeSet::new();
        for node in &self.nodes {
            if node.face.arity() != arity {
                return Err(PedigreeError::ArityMismatch {
                    face: node.face.clone(),
                    got: node.face.arity(),
                    expected: arity,
                });
            }
            if !seen.insert(&node.face) {
                return Err(PedigreeError::DuplicateFace(node.face.clone()));
            }
        }
        let mut in_degree = vec![0usize; self.nodes.len()];
        for node in &self.nodes {
            if let Some(out) = &node.out {
                for &c in &out.children {
                    if c >= self.nodes.len() {
                        return Err(PedigreeError::ChildIndexOutOfRange {
                            parent: node.face.clone(),
                            index: c,
                        });
                    }
                    in_degree[c] += 1;
                }
            }
        }
        if in_degree[self.root] != 0 {
            return Err(PedigreeError::RootHasInEdge(self.root_face().clone()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if i != self.root && in_degree[i] == 0 {
                return Err(PedigreeError::ExtraRoot(node.face.clone()));
            }
        }
        self.check_acyclic()?;
        for node in &self.nodes {
            let Some(out) = &node.out else { continue };
            if out.children.len() != arity {
                return Err(PedigreeError::BadOutDegree {
                    face: node.face.clone(),
                    got: out.children.len(),
                    expected: arity,
                });
            }
            let z = out.label;
            if node.face.contains(z) {
                return Err(PedigreeError::Stacking {
                    parent: node.face.clone(),
                    detail: format!("outgoing label {z} lies inside the node"),
                });
            }
            for (i, &c) in out.children.iter().enumerate() {
                let expected = node.face.replace(node.face.vertices()[i], z);
                if self.nodes[c].face != expected {
                    return Err(PedigreeError::Stacking {
                        parent: node.face.clone(),
                        detail: format!(
                            "child {} is {}, expected {}",
                            i, self.nodes[c].face, expected
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), PedigreeError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color = vec![Color::White; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if color[start] != Color::White {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = Color::Gray;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                let children = self.nodes[node]
                    .out
                    .as_ref()
                    .map(|o| o.children.as_slice())
                    .unwrap_or(&[]);
                if *next < children.len() {
                    let c = children[*next];
                    *next += 1;
                    match color[c] {
                        Color::Gray => {
                            return Err(PedigreeError::Cycle(self.nodes[c].face.clone()))
                        }
                        Color::White => {
                            color[c] = Color::Gray;
                            stack.push((c, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[node] = Color::Black;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    /// Excess statistics. Meaningful for validated pedigrees.
    pub fn stats(&self) -> PedigreeStats {
        let m = self.nodes.iter().filter(|n| !n.is_leaf()).count() as u64;
        let l = self.nodes.len() as u64 - m;
        let labels = self.labels().len() as u64;
        let s = labels - (self.d as u64 + 1);
        let a = l as i64 - (self.d as i64 * s as i64 + 1);
        let b = self.d as i64 * m as i64 - (l as i64 - 1);
        PedigreeStats { m, l, s, a, b }
    }

    /// All outgoing labels distinct and disjoint from the root's labels.
    pub fn is_proper(&self) -> bool {
        let root = self.root_face();
        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if let Some(out) = &node.out {
                if root.contains(out.label) || !seen.insert(out.label) {
                    return false;
                }
            }
        }
        true
    }

    /// The sub-DAG reachable from `idx`, as a pedigree rooted there.
    pub fn sub_pedigree(&self, idx: usize) -> Pedigree {
        let mut keep = vec![false; self.nodes.len()];
        let mut stack = vec![idx];
        keep[idx] = true;
        while let Some(i) = stack.pop() {
            if let Some(out) = &self.nodes[i].out {
                for &c in &out.children {
                    if !keep[c] {
                        keep[c] = true;
                        stack.push(c);
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, k) in keep.iter().enumerate() {
            if *k {
                remap[i] = nodes.len();
                nodes.push(self.nodes[i].clone());
            }
        }
        for node in &mut nodes {
            if let Some(out) = &mut node.out {
                for c in &mut out.children {
                    *c = remap[*c];
                }
            }
        }
        Pedigree {
            d: self.d,
            root: remap[idx],
            nodes,
        }
    }

    /// Rebuilds the pedigree under a label bijection. Child order is
    /// recomputed, since relabeling permutes vertex positions.
    pub fn relabel(&self, map: &BTreeMap<u32, u32>) -> Result<Pedigree, PedigreeError> {
        let mapped = |f: &Face| -> Result<Face, PedigreeError> {
            let vs: Vec<u32> = f
                .vertices()
                .iter()
                .map(|v| *map.get(v).unwrap_or(v))
                .collect();
            Ok(Face::from_unsorted(vs)?)
        };
        let mut builder = PedigreeBuilder::new(self.d);
        let root = builder.node(mapped(self.root_face())?)?;
        for node in &self.nodes {
            if let Some(out) = &node.out {
                let z = *map.get(&out.label).unwrap_or(&out.label);
                builder.subdivide_face(&mapped(&node.face)?, z)?;
            }
        }
        builder.finish(root)
    }

    /// Order-preserving dense relabeling onto `[1, s+d+1]`. Returns the
    /// relabeled pedigree and the old-to-new map.
    pub fn relabel_canonical(&self) -> (Pedigree, BTreeMap<u32, u32>) {
        let map: BTreeMap<u32, u32> = self
            .labels()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i as u32 + 1))
            .collect();
        let relabeled = self.relabel(&map).expect("bijective relabeling");
        (relabeled, map)
    }

    /// Internal faces mapped to their outgoing labels. Together with the
    /// root face this determines the DAG, since children are a function of
    /// `(face, label)`.
    pub fn edge_map(&self) -> BTreeMap<Face, u32> {
        self.nodes
            .iter()
            .filter_map(|n| n.out.as_ref().map(|o| (n.face.clone(), o.label)))
            .collect()
    }

    /// Structural equality up to node numbering.
    pub fn same_dag(&self, other: &Pedigree) -> bool {
        self.d == other.d
            && self.root_face() == other.root_face()
            && self.edge_map() == other.edge_map()
            && self.len() == other.len()
    }

    /// GraphViz DOT rendering: faces as node labels, leaves boxed.
    pub fn to_dot(&self) -> String {
        let compact = self.labels().last().is_none_or(|&max| max <= 9);
        let fmt_face = |f: &Face| -> String {
            if compact {
                f.vertices().iter().map(|v| v.to_string()).collect()
            } else {
                f.vertices()
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        };
        let mut out = String::from("digraph pedigree {\n  rankdir=TB;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let shape = if node.is_leaf() { "box" } else { "ellipse" };
            let _ = writeln!(
                out,
                "  n{i} [label=\"{}\", shape={shape}];",
                fmt_face(&node.face)
            );
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(edges) = &node.out {
                for &c in &edges.children {
                    let _ = writeln!(out, "  n{i} -> n{c};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Exact evaluation of the excess bound `b <= d a^{(d+1)/d} + (d^2-1) a`.
///
/// Requires `a >= 0`. The fractional power is removed by comparing
/// `(b - (d^2-1) a)^d <= d^d a^{d+1}` over big integers, so the test is exact
/// for every input.
pub fn check_excess_bound(d: usize, st: &PedigreeStats) -> bool {
    if st.a < 0 {
        return false;
    }
    let d_i = BigInt::from(d);
    let a = BigInt::from(st.a);
    let lhs: BigInt = BigInt::from(st.b) - (&d_i * &d_i - BigInt::from(1)) * &a;
    if lhs <= BigInt::from(0) {
        return true;
    }
    lhs.pow(d as u32) <= d_i.pow(d as u32) * a.pow(d as u32 + 1)
}

/// Incremental constructor deduplicating nodes by face.
pub struct PedigreeBuilder {
    d: usize,
    nodes: Vec<PedigreeNode>,
    index: BTreeMap<Face, usize>,
}

impl PedigreeBuilder {
    pub fn new(d: usize) -> Self {
        PedigreeBuilder {
            d,
            nodes: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    /// Returns the node index for a face, creating a leaf if new.
    pub fn node(&mut self, face: Face) -> Result<usize, PedigreeError> {
        if face.arity() != self.d + 1 {
            return Err(PedigreeError::ArityMismatch {
                got: face.arity(),
                expected: self.d + 1,
                face,
            });
        }
        if let Some(&i) = self.index.get(&face) {
            return Ok(i);
        }
        let i = self.nodes.len();
        self.index.insert(face.clone(), i);
        self.nodes.push(PedigreeNode { face, out: None });
        Ok(i)
    }

    pub fn face_of(&self, idx: usize) -> &Face {
        &self.nodes[idx].face
    }

    /// Makes `parent` internal with outgoing label `z`, creating or reusing
    /// the `d+1` stacking children. Returns their indices.
    pub fn subdivide(&mut self, parent: usize, z: u32) -> Result<Vec<usize>, PedigreeError> {
        let face = self.nodes[parent].face.clone();
        if face.contains(z) {
            return Err(PedigreeError::Stacking {
                parent: face,
                detail: format!("outgoing label {z} lies inside the node"),
            });
        }
        if self.nodes[parent].out.is_some() {
            return Err(PedigreeError::Stacking {
                parent: face,
                detail: "node already subdivided".into(),
            });
        }
        let mut children = Vec::with_capacity(self.d + 1);
        for i in 0..=self.d {
            let child = face.replace(face.vertices()[i], z);
            children.push(self.node(child)?);
        }
        self.nodes[parent].out = Some(OutEdges {
            label: z,
            children: children.clone(),
        });
        Ok(children)
    }

    pub fn subdivide_face(&mut self, parent: &Face, z: u32) -> Result<Vec<usize>, PedigreeError> {
        let idx = self.node(parent.clone())?;
        self.subdivide(idx, z)
    }

    pub fn finish(self, root: usize) -> Result<Pedigree, PedigreeError> {
        let p = Pedigree {
            d: self.d,
            root,
            nodes: self.nodes,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Extracts a witness pedigree for an infected face from a closure state, by
/// expanding certificates downward and deduplicating repeated faces. Leaves
/// are exactly faces of the seed set. Returns `None` if `f` is not infected.
pub fn extract_witness(state: &BootstrapState, f: &Face) -> Option<Pedigree> {
    let d = state.infected.d();
    if f.check(state.infected.n(), d).is_err() {
        return None;
    }
    let root_rank = colex_rank(f);
    if !state.infected.contains_rank(root_rank) {
        return None;
    }
    let mut builder = PedigreeBuilder::new(d);
    let root = builder.node(f.clone()).expect("root face arity checked");
    let mut queue = VecDeque::from([root_rank]);
    let mut expanded: BTreeSet<u64> = BTreeSet::new();
    while let Some(rank) = queue.pop_front() {
        if !expanded.insert(rank) {
            continue;
        }
        if state.y0.contains_rank(rank) {
            continue; // leaf
        }
        let cert = state
            .certs
            .get(&rank)
            .expect("infected non-seed face has a certificate");
        let face = crate::faces::colex_unrank(rank, d + 1);
        builder
            .subdivide_face(&face, cert.apex)
            .expect("certificate children are the stacking children");
        for &p in &cert.parents {
            queue.push_back(p);
        }
    }
    let p = builder.finish(root).expect("witness validates");
    Some(p)
}

/// Label-reduction descent: starting from a witness with `s + d + 1` labels,
/// repeatedly moves to the child sub-DAG with the largest label count until
/// the surplus is at most `k`. The resulting face `f'` has a witness on
/// `s' + d + 1` labels with `k/(d+1) <= s' <= k`.
pub fn reduce_labels(witness: &Pedigree, k: u64) -> Result<(Face, Pedigree), PedigreeError> {
    let s = witness.stats().s;
    if k >= s {
        return Err(PedigreeError::BadReduceTarget { k, s });
    }
    let mut current = witness.clone();
    let mut current_s = s;
    while current_s > k {
        let out = current
            .node(current.root_index())
            .out
            .as_ref()
            .expect("s > 0 pedigree has an internal root")
            .clone();
        // child sub-DAG with the most labels; ties to the lowest index
        let mut best: Option<(u64, Pedigree)> = None;
        for &c in &out.children {
            let sub = current.sub_pedigree(c);
            let sub_s = sub.stats().s;
            if best.as_ref().is_none_or(|(bs, _)| sub_s > *bs) {
                best = Some((sub_s, sub));
            }
        }
        let (next_s, sub) = best.expect("root has children");
        current = sub;
        current_s = next_s;
    }
    Ok((current.root_face().clone(), current))
}

/// The extremal family `G_k`: BFS levels `j = d+2, ..., k` consist of
/// `{j} + f` for all `f` in `C([j-1], d)`; a node at level `j < k` has
/// outgoing label `j+1`. Here `s = k - (d+1)` and `b` grows like
/// `a^{(d+1)/d}`.
pub fn generate_gk(d: usize, k: u32) -> Result<Pedigree, PedigreeError> {
    if k <= d as u32 + 1 {
        return Err(PedigreeError::KTooSmall {
            k,
            min: d as u32 + 1,
        });
    }
    let mut builder = PedigreeBuilder::new(d);
    let root_face = Face::new((1..=d as u32 + 1).collect())?;
    let root = builder.node(root_face)?;
    builder.subdivide(root, d as u32 + 2)?;
    for j in (d as u32 + 2)..k {
        for f in crate::faces::k_subsets_lex(j - 1, d) {
            let node = f.with(j);
            builder.subdivide_face(&node, j + 1)?;
        }
    }
    builder.finish(root)
}

/// The hardcoded `(6,11,3)`-pedigree for `d = 2` whose complex has
/// `beta_2 = 7 > m = 6`: root `123`, internal nodes `236, 256, 126, 124,
/// 145`, with shared children `245` and `246`.
pub fn fig6_pedigree() -> Pedigree {
    let f = |v: &[u32]| Face::new(v.to_vec()).unwrap();
    let mut b = PedigreeBuilder::new(2);
    let root = b.node(f(&[1, 2, 3])).unwrap();
    b.subdivide_face(&f(&[1, 2, 3]), 6).unwrap();
    b.subdivide_face(&f(&[2, 3, 6]), 5).unwrap();
    b.subdivide_face(&f(&[2, 5, 6]), 4).unwrap();
    b.subdivide_face(&f(&[1, 2, 6]), 4).unwrap();
    b.subdivide_face(&f(&[1, 2, 4]), 5).unwrap();
    b.subdivide_face(&f(&[1, 4, 5]), 3).unwrap();
    b.finish(root).unwrap()
}

/// A pedigree whose outgoing labels are pairwise distinct and avoid the
/// root's labels; always a tree with `m = s` and `l = ds + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperPedigree(Pedigree);

impl ProperPedigree {
    pub fn new(p: Pedigree) -> Result<Self, PedigreeError> {
        p.validate()?;
        if !p.is_proper() {
            return Err(PedigreeError::NotProper(
                "outgoing labels repeat or meet the root".into(),
            ));
        }
        Ok(ProperPedigree(p))
    }

    pub fn pedigree(&self) -> &Pedigree {
        &self.0
    }

    pub fn into_pedigree(self) -> Pedigree {
        self.0
    }

    pub fn leaves(&self) -> BTreeSet<Face> {
        self.0.leaf_faces()
    }
}

fn build_from_shape(
    builder: &mut PedigreeBuilder,
    face: &Face,
    shape: &TreeShape,
    labels: &mut impl Iterator<Item = u32>,
) -> Result<(), PedigreeError> {
    let Some(children) = shape.children() else {
        builder.node(face.clone())?;
        return Ok(());
    };
    let z = labels.next().expect("enough labels sampled");
    let idx = builder.node(face.clone())?;
    let child_idx = builder.subdivide(idx, z)?;
    for (ci, child_shape) in child_idx.iter().zip(children.iter()) {
        let child_face = builder.face_of(*ci).clone();
        build_from_shape(builder, &child_face, child_shape, labels)?;
    }
    Ok(())
}

fn assemble_proper(
    d: usize,
    n: u32,
    s: usize,
    shape: &TreeShape,
    rng: &mut ChaCha8Rng,
) -> Result<ProperPedigree, PedigreeError> {
    let pool: Vec<u32> = (d as u32 + 2..=n).collect();
    if pool.len() < s {
        return Err(PedigreeError::LabelPoolTooSmall {
            needed: s,
            available: pool.len(),
        });
    }
    let labels: Vec<u32> = pool.choose_multiple(rng, s).copied().collect();
    let mut builder = PedigreeBuilder::new(d);
    let root_face = Face::new((1..=d as u32 + 1).collect())?;
    let root = builder.node(root_face.clone())?;
    let mut it = labels.into_iter();
    build_from_shape(&mut builder, &root_face, shape, &mut it)?;
    ProperPedigree::new(builder.finish(root)?)
}

/// Seeded random proper `s`-pedigree rooted at `{1, ..., d+1}`.
///
/// Law: the tree shape is uniform over the `(d+1)`-ary trees with `s`
/// internal nodes (exact big-integer sampling); the `s` outgoing labels are
/// drawn without replacement from `{d+2, ..., n}` and assigned to internal
/// nodes in preorder.
pub fn random_proper(
    d: usize,
    s: usize,
    n: u32,
    seed: u64,
) -> Result<ProperPedigree, PedigreeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = TreeSampler::new(d, s).sample(s, &mut rng);
    assemble_proper(d, n, s, &shape, &mut rng)
}

/// Seeded random balanced proper pedigree: `s = (d+1) s' + 1`, and the `d+1`
/// root subtrees are independent uniform shapes with `s'` internal nodes each
/// (hence `d s' + 1` leaves each). Labels as in [`random_proper`].
pub fn random_balanced_proper(
    d: usize,
    s_prime: usize,
    n: u32,
    seed: u64,
) -> Result<ProperPedigree, PedigreeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = TreeSampler::new(d, s_prime);
    let children: Vec<TreeShape> = (0..=d).map(|_| sampler.sample(s_prime, &mut rng)).collect();
    let shape = TreeShape::internal(d, children);
    let s = (d + 1) * s_prime + 1;
    assemble_proper(d, n, s, &shape, &mut rng)
}

// ---------------------------------------------------------------------------
// Subset pedigrees H(P, T)
// ---------------------------------------------------------------------------

/// Recursive tree view of a proper pedigree.
#[derive(Debug, Clone)]
struct PTree {
    face: Face,
    out: Option<(u32, Vec<PTree>)>,
}

impl PTree {
    fn from_pedigree(p: &Pedigree, idx: usize) -> PTree {
        let node = p.node(idx);
        PTree {
            face: node.face.clone(),
            out: node.out.as_ref().map(|o| {
                (
                    o.label,
                    o.children
                        .iter()
                        .map(|&c| PTree::from_pedigree(p, c))
                        .collect(),
                )
            }),
        }
    }

    fn leaves(&self, out: &mut BTreeSet<Face>) {
        match &self.out {
            None => {
                out.insert(self.face.clone());
            }
            Some((_, children)) => {
                for c in children {
                    c.leaves(out);
                }
            }
        }
    }

    fn leaf_set(&self) -> BTreeSet<Face> {
        let mut s = BTreeSet::new();
        self.leaves(&mut s);
        s
    }

    fn into_pedigree(self, d: usize) -> Result<ProperPedigree, PedigreeError> {
        fn walk(builder: &mut PedigreeBuilder, t: &PTree) -> Result<(), PedigreeError> {
            if let Some((z, children)) = &t.out {
                builder.subdivide_face(&t.face, *z)?;
                for c in children {
                    walk(builder, c)?;
                }
            }
            Ok(())
        }
        let mut builder = PedigreeBuilder::new(d);
        let root = builder.node(self.face.clone())?;
        walk(&mut builder, &self)?;
        ProperPedigree::new(builder.finish(root)?)
    }

    /// Deepest internal node containing `z`; ties broken by the colex-least
    /// face. Returns `(depth, face of u, outgoing label y)`.
    fn deepest_internal_with(&self, z: u32, depth: u64) -> Option<(u64, Face, u32)> {
        let (y, children) = self.out.as_ref()?;
        let mut best: Option<(u64, Face, u32)> = None;
        if self.face.contains(z) {
            best = Some((depth, self.face.clone(), *y));
        }
        for c in children {
            if let Some(cand) = c.deepest_internal_with(z, depth + 1) {
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        cand.0 > cur.0
                            || (cand.0 == cur.0 && colex_rank(&cand.1) < colex_rank(&cur.1))
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        best
    }

    /// Removes the label `z` using the replacement label `y` found at node
    /// `u`: deletes `u`'s descendants, substitutes `z -> y` everywhere, and
    /// grafts the former subtree of `u' = u - z + y` back at the substituted
    /// `u`.
    fn eliminate(self, z: u32, y: u32, u_face: &Face) -> PTree {
        if &self.face == u_face {
            let (_, children) = self.out.expect("u is internal");
            let u_prime = u_face.replace(z, y);
            let graft = children
                .into_iter()
                .find(|c| c.face == u_prime)
                .expect("u' is a child of u");
            return PTree {
                face: u_prime,
                out: graft.out,
            };
        }
        let face = if self.face.contains(z) {
            self.face.replace(z, y)
        } else {
            self.face
        };
        let out = self.out.map(|(zz, children)| {
            (
                if zz == z { y } else { zz },
                children
                    .into_iter()
                    .map(|c| c.eliminate(z, y, u_face))
                    .collect(),
            )
        });
        PTree { face, out }
    }
}

/// The subset pedigree `H(P, T)` of a proper pedigree `T` and a set `P` of
/// its leaves: a proper `r`-pedigree for the same root, where `r` counts the
/// labels of `P` outside the root, with `P` among its leaves, and
/// `P = leaves(H)` exactly when `P = leaves(T)`.
///
/// Follows the recursive construction: recurse into the `d+1` subtrees; if
/// the root's outgoing label `z` is absent from `P`'s labels, eliminate `z`
/// inside the lowest-index subtree meeting `P`, by cutting at the deepest
/// internal node containing `z` and substituting its own outgoing label.
pub fn subpedigree_h(
    t: &ProperPedigree,
    p: &BTreeSet<Face>,
) -> Result<ProperPedigree, PedigreeError> {
    let leaves = t.leaves();
    for f in p {
        if !leaves.contains(f) {
            return Err(PedigreeError::NotALeaf(f.clone()));
        }
    }
    let tree = PTree::from_pedigree(t.pedigree(), t.pedigree().root_index());
    let d = t.pedigree().d();
    let result = h_recurse(&tree, p);
    result.into_pedigree(d)
}

fn h_recurse(t: &PTree, p: &BTreeSet<Face>) -> PTree {
    if p.is_empty() || t.out.is_none() {
        return PTree {
            face: t.face.clone(),
            out: None,
        };
    }
    let (z, subtrees) = t.out.as_ref().unwrap();
    let mut sub_h = Vec::with_capacity(subtrees.len());
    let mut p_parts: Vec<BTreeSet<Face>> = Vec::with_capacity(subtrees.len());
    for sub in subtrees {
        let sub_leaves = sub.leaf_set();
        let pj: BTreeSet<Face> = p.intersection(&sub_leaves).cloned().collect();
        sub_h.push(h_recurse(sub, &pj));
        p_parts.push(pj);
    }
    let h_prime = PTree {
        face: t.face.clone(),
        out: Some((*z, sub_h)),
    };
    let z_in_r = p.iter().any(|f| f.contains(*z));
    if z_in_r {
        return h_prime;
    }
    // z must be eliminated; pick the lowest-index subtree meeting P
    let j = p_parts
        .iter()
        .position(|pj| !pj.is_empty())
        .expect("P nonempty");
    let (_, sub_h) = h_prime.out.as_ref().unwrap();
    let (_, u_face, y) = sub_h[j]
        .deepest_internal_with(*z, 0)
        .expect("subtree root contains z and is internal");
    h_prime.eliminate(*z, y, &u_face)
}

// ---------------------------------------------------------------------------
// Label classification (encircled / boundary)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelClass {
    /// The link of the label inside `P` already equals its link in `L`.
    EncircledInSubset,
    /// The label does not appear in `P` at all (encircled in `L - P`).
    EncircledInComplement,
    /// Boundary label of both `P` and `L - P`.
    Boundary,
}

/// Classifies each internal label of the leaf set `L` of a proper pedigree
/// relative to a subset `P` of `L`: `lk_z(P) = lk_z(L)` (encircled in `P`),
/// `lk_z(P)` empty (encircled in the complement), or neither (boundary).
pub fn classify_labels(
    t: &ProperPedigree,
    p: &BTreeSet<Face>,
) -> Result<BTreeMap<u32, LabelClass>, PedigreeError> {
    let l = t.leaves();
    for f in p {
        if !l.contains(f) {
            return Err(PedigreeError::NotALeaf(f.clone()));
        }
    }
    let root = t.pedigree().root_face();
    let mut internal_labels: BTreeSet<u32> = BTreeSet::new();
    for f in &l {
        for &v in f.vertices() {
            if !root.contains(v) {
                internal_labels.insert(v);
            }
        }
    }
    let mut out = BTreeMap::new();
    for z in internal_labels {
        let lk_p = link(z, p.iter());
        let class = if lk_p.is_empty() {
            LabelClass::EncircledInComplement
        } else if lk_p == link(z, l.iter()) {
            LabelClass::EncircledInSubset
        } else {
            LabelClass::Boundary
        };
        out.insert(z, class);
    }
    Ok(out)
}

/// Whether a set of edges (2-element faces) forms a single cycle: nonempty,
/// every vertex of degree 2, connected. For `d = 2` this is the intrinsic
/// characterization of an encircled label: its link triangulates the circle.
pub fn edges_form_single_cycle(edges: &BTreeSet<Face>) -> bool {
    if edges.is_empty() {
        return false;
    }
    let mut adjacency: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for e in edges {
        if e.arity() != 2 {
            return false;
        }
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    if adjacency.values().any(|nb| nb.len() != 2) {
        return false;
    }
    let start = *adjacency.keys().next().unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adjacency[&v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == adjacency.len() && edges.len() == adjacency.len()
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of leaf subsets (small scale)
// ---------------------------------------------------------------------------

/// One subset `P` of some balanced leaf family, with its label statistics.
#[derive(Debug, Clone)]
pub struct SubsetRecord {
    pub faces: BTreeSet<Face>,
    /// Number of internal labels of `P` (labels outside the root).
    pub r: u32,
    /// Number of boundary labels, per the universal link definition.
    pub t: u32,
    pub size: u32,
    /// Number of families in the enumeration containing `P`.
    pub extensions: u32,
}

/// Exhaustive enumeration of the balanced leaf families and their nonempty
/// proper subsets.
#[derive(Debug)]
pub struct PartialEnumeration {
    pub d: usize,
    pub s_prime: usize,
    pub n: u32,
    pub s: usize,
    /// Number of balanced proper pedigrees generated.
    pub pedigree_count: u64,
    /// Distinct leaf families (the set called script-L).
    pub families: Vec<BTreeSet<Face>>,
    /// Distinct nonempty proper subsets of the families.
    pub subsets: Vec<SubsetRecord>,
}

/// Enumerates every balanced proper `s`-pedigree rooted at `{1, ..., d+1}`
/// with labels in `[n]` (`s = (d+1)s' + 1`), their distinct leaf families,
/// and all nonempty proper subsets `P` of those families, classifying each
/// internal label of each `P` as encircled (its link in `P` equals its link
/// in every containing family) or boundary.
///
/// Guarded to the tiny scale `d = 2`, `s' = 1`, `n <= 9`.
pub fn enumerate_p(d: usize, s_prime: usize, n: u32) -> Result<PartialEnumeration, PedigreeError> {
    if d != 2 || s_prime != 1 || !(7..=9).contains(&n) {
        return Err(PedigreeError::GuardExceeded(format!(
            "enumerate_p supports d=2, s'=1, 7 <= n <= 9; got d={d}, s'={s_prime}, n={n}"
        )));
    }
    let s = (d + 1) * s_prime + 1;
    let root_face = Face::new((1..=d as u32 + 1).collect())?;
    let child_shapes = crate::analysis::enumerate_trees(d, s_prime)
        .expect("tiny scale enumerable");
    // all (d+1)-tuples of child shapes under a new internal root
    let mut shapes: Vec<TreeShape> = Vec::new();
    let mut picks = vec![0usize; d + 1];
    loop {
        let children: Vec<TreeShape> = picks.iter().map(|&i| child_shapes[i].clone()).collect();
        shapes.push(TreeShape::internal(d, children));
        let mut i = d + 1;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            picks[i] += 1;
            if picks[i] < child_shapes.len() {
                break;
            }
            picks[i] = 0;
        }
        if picks.iter().all(|&x| x == 0) {
            break;
        }
    }

    use itertools::Itertools;
    let pool: Vec<u32> = (d as u32 + 2..=n).collect();
    let mut pedigree_count = 0u64;
    let mut family_masks: BTreeMap<u128, Vec<Face>> = BTreeMap::new();
    let rank_of = |f: &Face| colex_rank(f) as u32;
    for shape in &shapes {
        for labels in pool.iter().copied().permutations(s) {
            let mut builder = PedigreeBuilder::new(d);
            let root = builder.node(root_face.clone())?;
            let mut it = labels.into_iter();
            build_from_shape(&mut builder, &root_face, shape, &mut it)?;
            let p = builder.finish(root)?;
            pedigree_count += 1;
            let leaves: Vec<Face> = p.leaf_faces().into_iter().collect();
            let mask: u128 = leaves.iter().map(|f| 1u128 << rank_of(f)).sum();
            family_masks.entry(mask).or_insert(leaves);
        }
    }
    let family_list: Vec<(u128, Vec<Face>)> = family_masks.into_iter().collect();

    // links of every label within every family, for the encircled test
    let label_max = n as usize;
    let mut family_links: Vec<Vec<Option<BTreeSet<Face>>>> = Vec::new();
    for (_, faces) in &family_list {
        let mut per_label: Vec<Option<BTreeSet<Face>>> = vec![None; label_max + 1];
        for z in d as u32 + 2..=n {
            let lk = link(z, faces.iter());
            if !lk.is_empty() {
                per_label[z as usize] = Some(lk);
            }
        }
        family_links.push(per_label);
    }

    // all distinct nonempty proper subsets over all families
    let mut subset_masks: BTreeSet<u128> = BTreeSet::new();
    for (mask, faces) in &family_list {
        let l = faces.len();
        for bits in 1..((1u32 << l) - 1) {
            let mut sub = 0u128;
            for (i, f) in faces.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    sub |= 1u128 << rank_of(f);
                }
            }
            debug_assert_eq!(sub & mask, sub);
            subset_masks.insert(sub);
        }
    }

    let mut subsets = Vec::with_capacity(subset_masks.len());
    for sub in subset_masks {
        let faces: BTreeSet<Face> = (0..128)
            .filter(|&b| sub >> b & 1 == 1)
            .map(|b| crate::faces::colex_unrank(b as u64, d + 1))
            .collect();
        let containing: Vec<usize> = family_list
            .iter()
            .enumerate()
            .filter(|(_, (mask, _))| sub & mask == sub)
            .map(|(i, _)| i)
            .collect();
        let mut internal_labels: BTreeSet<u32> = BTreeSet::new();
        for f in &faces {
            for &v in f.vertices() {
                if !root_face.contains(v) {
                    internal_labels.insert(v);
                }
            }
        }
        let r = internal_labels.len() as u32;
        let mut boundary = 0u32;
        for &z in &internal_labels {
            let lk_p = link(z, faces.iter());
            let encircled = containing.iter().all(|&i| {
                family_links[i][z as usize]
                    .as_ref()
                    .is_some_and(|lk_l| lk_l == &lk_p)
            });
            if !encircled {
                boundary += 1;
            }
        }
        subsets.push(SubsetRecord {
            faces,
            r,
            t: boundary,
            size: sub.count_ones(),
            extensions: containing.len() as u32,
        });
    }

    Ok(PartialEnumeration {
        d,
        s_prime,
        n,
        s,
        pedigree_count,
        families: family_list
            .into_iter()
            .map(|(_, faces)| faces.into_iter().collect())
            .collect(),
        subsets,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    face: Face,
    z: Option<u32>,
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PedigreeRepr {
    d: usize,
    root: Face,
    nodes: Vec<NodeRepr>,
}

impl Serialize for Pedigree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PedigreeRepr {
            d: self.d,
            root: self.root_face().clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRepr {
                    face: n.face.clone(),
                    z: n.out.as_ref().map(|o| o.label),
                    children: n
                        .out
                        .as_ref()
                        .map(|o| o.children.clone())
                        .unwrap_or_default(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pedigree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PedigreeRepr::deserialize(deserializer)?;
        let nodes: Vec<PedigreeNode> = repr
            .nodes
            .into_iter()
            .map(|n| PedigreeNode {
                face: n.face,
                out: n.z.map(|label| OutEdges {
                    label,
                    children: n.children,
                }),
            })
            .collect();
        let root = nodes
            .iter()
            .position(|n| n.face == repr.root)
            .ok_or_else(|| D::Error::custom("root face not among nodes"))?;
        let p = Pedigree {
            d: repr.d,
            root,
            nodes,
        };
        p.validate().map_err(D::Error::custom)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::{close, sample_complex, Instance};
    use crate::faces::FaceSet;

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    fn one_move() -> Pedigree {
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        b.subdivide(root, 4).unwrap();
        b.finish(root).unwrap()
    }

    #[test]
    fn single_node_pedigree() {
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        let p = b.finish(root).unwrap();
        p.validate().unwrap();
        let st = p.stats();
        assert_eq!((st.m, st.l, st.s), (0, 1, 0));
        assert_eq!((st.a, st.b), (0, 0));
    }

    #[test]
    fn one_move_pedigree() {
        let p = one_move();
        let st = p.stats();
        assert_eq!((st.m, st.l, st.s), (1, 3, 1));
        assert_eq!((st.a, st.b), (0, 0));
        assert!(p.is_proper());
        let children: Vec<&Face> = p.node(p.root_index()).out.as_ref().unwrap().children
            .iter()
            .map(|&c| &p.node(c).face)
            .collect();
        assert_eq!(
            children,
            vec![&face(&[2, 3, 4]), &face(&[1, 3, 4]), &face(&[1, 2, 4])]
        );
    }

    #[test]
    fn tampered_child_rejected() {
        let mut p = one_move();
        // overwrite a child face so the stacking rule breaks
        let child = p.node(p.root_index()).out.as_ref().unwrap().children[0];
        p.nodes[child].face = face(&[2, 3, 5]);
        assert!(matches!(p.validate(), Err(PedigreeError::Stacking { .. })));
    }

    #[test]
    fn cycle_rejected() {
        let mut p = one_move();
        // point a child's out-edges back at the root
        let child = p.node(p.root_index()).out.as_ref().unwrap().children[0];
        p.nodes[child].out = Some(OutEdges {
            label: 1,
            children: vec![p.root_index(), child, child],
        });
        assert!(p.validate().is_err());
    }

    #[test]
    fn excess_bound_cases() {
        // a = 0 requires b = 0
        assert!(check_excess_bound(
            2,
            &PedigreeStats {
                m: 1,
                l: 3,
                s: 1,
                a: 0,
                b: 0
            }
        ));
        assert!(!check_excess_bound(
            2,
            &PedigreeStats {
                m: 2,
                l: 3,
                s: 1,
                a: 0,
                b: 1
            }
        ));
        // the Fig. 6 statistics: bound 2*8 + 3*4 = 28 >= 2
        assert!(check_excess_bound(
            2,
            &PedigreeStats {
                m: 6,
                l: 11,
                s: 3,
                a: 4,
                b: 2
            }
        ));
        // negative a always fails
        assert!(!check_excess_bound(
            2,
            &PedigreeStats {
                m: 1,
                l: 1,
                s: 1,
                a: -1,
                b: 0
            }
        ));
        // exactness on the boundary: d=2, a=4 -> 2 a^{3/2} + 3a = 28
        assert!(check_excess_bound(
            2,
            &PedigreeStats {
                m: 0,
                l: 0,
                s: 0,
                a: 4,
                b: 28
            }
        ));
        assert!(!check_excess_bound(
            2,
            &PedigreeStats {
                m: 0,
                l: 0,
                s: 0,
                a: 4,
                b: 29
            }
        ));
    }

    #[test]
    fn fig6_structure() {
        let p = fig6_pedigree();
        p.validate().unwrap();
        let st = p.stats();
        assert_eq!((st.m, st.l, st.s), (6, 11, 3));
        assert_eq!((st.a, st.b), (4, 2));
        assert!(check_excess_bound(2, &st));
        assert!(!p.is_proper());
        // leaves' labels drawn from [6]
        assert!(p.labels().iter().all(|&v| (1..=6).contains(&v)));
        assert_eq!(p.labels().len(), 6);
    }

    #[test]
    fn gk_family() {
        // k = d+2: exactly the one-move pedigree
        let g4 = generate_gk(2, 4).unwrap();
        assert_eq!(g4, one_move());
        assert!(matches!(
            generate_gk(2, 3),
            Err(PedigreeError::KTooSmall { .. })
        ));
        let g6 = generate_gk(2, 6).unwrap();
        let st = g6.stats();
        assert_eq!((st.m, st.l, st.s), (10, 10, 3));
        assert_eq!((st.a, st.b), (3, 11));
        for k in 5..=12 {
            let g = generate_gk(2, k).unwrap();
            let st = g.stats();
            assert_eq!(st.s, k as u64 - 3);
            assert_eq!(st.l, crate::faces::binomial(k as u64 - 1, 2));
            assert!(check_excess_bound(2, &st), "k={k}");
        }
        let g7_3 = generate_gk(3, 7).unwrap();
        assert!(check_excess_bound(3, &g7_3.stats()));
    }

    #[test]
    fn gk_ratio_bounded() {
        let mut prev = f64::INFINITY;
        for k in 6..=14 {
            let st = generate_gk(2, k).unwrap().stats();
            let ratio = st.b as f64 / (st.a as f64).powf(1.5);
            assert!(ratio > 0.5 && ratio < 4.0, "k={k} ratio={ratio}");
            assert!(ratio <= prev + 1e-9, "ratio should trend down");
            prev = ratio;
        }
    }

    #[test]
    fn random_proper_stats() {
        for seed in 0..10 {
            let p = random_proper(2, 5, 12, seed).unwrap();
            let st = p.pedigree().stats();
            assert_eq!((st.m, st.l, st.s), (5, 11, 5));
            assert_eq!((st.a, st.b), (0, 0));
        }
        let p = random_proper(2, 1, 8, 3).unwrap();
        assert_eq!(p.pedigree().stats().m, 1);
        assert!(matches!(
            random_proper(2, 6, 8, 0),
            Err(PedigreeError::LabelPoolTooSmall { .. })
        ));
    }

    #[test]
    fn random_balanced_stats() {
        for seed in 0..10 {
            let p = random_balanced_proper(2, 2, 14, seed).unwrap();
            let st = p.pedigree().stats();
            assert_eq!(st.s, 7);
            assert_eq!(st.l, 15);
            // each root subtree has d s' + 1 = 5 leaves
            let root = p.pedigree().root_index();
            let children = p
                .pedigree()
                .node(root)
                .out
                .as_ref()
                .unwrap()
                .children
                .clone();
            for c in children {
                let sub = p.pedigree().sub_pedigree(c);
                assert_eq!(sub.stats().l, 5);
            }
        }
    }

    #[test]
    fn witness_extraction_basics() {
        let y0 = FaceSet::from_faces(
            4,
            2,
            &[face(&[1, 2, 3]), face(&[1, 2, 4]), face(&[1, 3, 4])],
        )
        .unwrap();
        let state = close(&Instance::synthetic(4, 2), &y0);
        // seed face: single-node witness
        let w = extract_witness(&state, &face(&[1, 2, 3])).unwrap();
        assert_eq!(w.stats().l, 1);
        // completed face: the one-move pedigree rooted at 234 with apex 1
        let w = extract_witness(&state, &face(&[2, 3, 4])).unwrap();
        let st = w.stats();
        assert_eq!((st.m, st.l, st.s), (1, 3, 1));
        assert_eq!(w.root_face(), &face(&[2, 3, 4]));
        assert!(extract_witness(&state, &face(&[1, 2, 5])).is_none());
    }

    #[test]
    fn witness_validates_on_random_instances() {
        for seed in 0..20 {
            let inst = Instance::new(10, 2, 0.15, seed);
            let y0 = sample_complex(&inst);
            let state = close(&inst, &y0);
            for rank in state.infected.iter_ranks().take(30) {
                let f = crate::faces::colex_unrank(rank, 3);
                let w = extract_witness(&state, &f).unwrap();
                w.validate().unwrap();
                let st = w.stats();
                assert!(st.a >= 0, "seed {seed} face {f}");
                assert!(check_excess_bound(2, &st), "seed {seed} face {f}");
                // leaves are exactly seed faces
                for leaf in w.leaf_faces() {
                    assert!(state.y0.contains(&leaf).unwrap());
                }
            }
        }
    }

    #[test]
    fn reduce_labels_brackets() {
        let mut checked = 0u32;
        for seed in 0..40 {
            let inst = Instance::new(12, 2, 0.12, seed);
            let state = close(&inst, &sample_complex(&inst));
            for rank in state.infected.iter_ranks() {
                let f = crate::faces::colex_unrank(rank, 3);
                let w = extract_witness(&state, &f).unwrap();
                let s = w.stats().s;
                if s < 2 {
                    continue;
                }
                for k in 0..s {
                    let (_, reduced) = reduce_labels(&w, k).unwrap();
                    let s_prime = reduced.stats().s;
                    assert!(s_prime <= k, "s'={s_prime} k={k}");
                    assert!(
                        s_prime as f64 >= k as f64 / 3.0 - 1e-9,
                        "bracket violated: s'={s_prime}, k={k}"
                    );
                    reduced.validate().unwrap();
                }
                checked += 1;
            }
        }
        assert!(checked > 20, "need enough nontrivial witnesses, got {checked}");
        // error case
        let w = one_move();
        assert!(matches!(
            reduce_labels(&w, 5),
            Err(PedigreeError::BadReduceTarget { .. })
        ));
    }

    #[test]
    fn subpedigree_simple_cases() {
        let t = ProperPedigree::new(one_move()).unwrap();
        // P = all leaves -> H = T
        let all = t.leaves();
        let h = subpedigree_h(&t, &all).unwrap();
        assert_eq!(h.pedigree(), t.pedigree());
        // P = empty -> single node
        let h = subpedigree_h(&t, &BTreeSet::new()).unwrap();
        assert_eq!(h.pedigree().stats().l, 1);
        assert_eq!(h.pedigree().root_face(), &face(&[1, 2, 3]));
        // P not a leaf
        let mut bogus = BTreeSet::new();
        bogus.insert(face(&[7, 8, 9]));
        assert!(matches!(
            subpedigree_h(&t, &bogus),
            Err(PedigreeError::NotALeaf(_))
        ));
    }

    #[test]
    fn subpedigree_fig5_example() {
        // the worked example: root 123 with z=4; subtree at 124 has z=5;
        // subtree at 234 has z=6, its child 346 has z=7, whose child 367 has
        // z=8. P = {125, 236, 378, 678}; the label 4 is eliminated via u=346,
        // y=7.
        let mut b = PedigreeBuilder::new(2);
        let root = b.node(face(&[1, 2, 3])).unwrap();
        b.subdivide_face(&face(&[1, 2, 3]), 4).unwrap();
        b.subdivide_face(&face(&[1, 2, 4]), 5).unwrap();
        b.subdivide_face(&face(&[2, 3, 4]), 6).unwrap();
        b.subdivide_face(&face(&[3, 4, 6]), 7).unwrap();
        b.subdivide_face(&face(&[3, 6, 7]), 8).unwrap();
        let t = ProperPedigree::new(b.finish(root).unwrap()).unwrap();
        assert_eq!(t.pedigree().stats().s, 5);

        let p: BTreeSet<Face> = [
            face(&[1, 2, 5]),
            face(&[2, 3, 6]),
            face(&[3, 7, 8]),
            face(&[6, 7, 8]),
        ]
        .into_iter()
        .collect();
        let h = subpedigree_h(&t, &p).unwrap();
        // expected bottom tree of the figure: the label 4 replaced by 7
        // throughout, descendants of 346 deleted, 367's subtree reattached
        let mut expect = PedigreeBuilder::new(2);
        let eroot = expect.node(face(&[1, 2, 3])).unwrap();
        expect.subdivide_face(&face(&[1, 2, 3]), 7).unwrap();
        expect.subdivide_face(&face(&[1, 2, 7]), 5).unwrap();
        expect.subdivide_face(&face(&[2, 3, 7]), 6).unwrap();
        expect.subdivide_face(&face(&[3, 6, 7]), 8).unwrap();
        let expect = expect.finish(eroot).unwrap();
        assert!(h.pedigree().same_dag(&expect));
        // r = |labels of P outside the root| = |{5,6,7,8}| = 4
        assert_eq!(h.pedigree().stats().s, 4);
        assert!(p.is_subset(&h.leaves()));
    }

    #[test]
    fn classify_label_edges() {
        let t = random_balanced_proper(2, 2, 14, 1).unwrap();
        let l = t.leaves();
        // P = L: everything encircled in P
        let all = classify_labels(&t, &l).unwrap();
        assert!(all.values().all(|c| *c == LabelClass::EncircledInSubset));
        // P = empty: everything encircled in the complement
        let none = classify_labels(&t, &BTreeSet::new()).unwrap();
        assert!(none
            .values()
            .all(|c| *c == LabelClass::EncircledInComplement));
    }

    #[test]
    fn cycle_detector() {
        let cycle: BTreeSet<Face> = [face(&[1, 2]), face(&[2, 3]), face(&[1, 3])]
            .into_iter()
            .collect();
        assert!(edges_form_single_cycle(&cycle));
        let path: BTreeSet<Face> = [face(&[1, 2]), face(&[2, 3])].into_iter().collect();
        assert!(!edges_form_single_cycle(&path));
        let two: BTreeSet<Face> = [
            face(&[1, 2]),
            face(&[2, 3]),
            face(&[1, 3]),
            face(&[4, 5]),
            face(&[5, 6]),
            face(&[4, 6]),
        ]
        .into_iter()
        .collect();
        assert!(!edges_form_single_cycle(&two));
        assert!(!edges_form_single_cycle(&BTreeSet::new()));
    }

    #[test]
    fn dot_export_shapes() {
        let dot = one_move().to_dot();
        assert!(dot.contains("n0 [label=\"123\", shape=ellipse];"));
        assert!(dot.contains("shape=box"));
        assert!(dot.contains("n0 -> n1;"));
    }

    #[test]
    fn json_roundtrip() {
        let p = fig6_pedigree();
        let js = serde_json::to_string(&p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v["d"], 2);
        assert_eq!(v["root"], serde_json::json!([1, 2, 3]));
        assert_eq!(v["nodes"][0]["z"], 6);
        let back: Pedigree = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
        // tampering the JSON breaks validation on read
        let bad = js.replace("[2,3,6]", "[2,3,7]");
        assert!(serde_json::from_str::<Pedigree>(&bad).is_err());
    }

    #[test]
    fn relabel_canonical_dense() {
        let p = random_proper(2, 3, 12, 9).unwrap();
        let (q, map) = p.pedigree().relabel_canonical();
        q.validate().unwrap();
        let labels: Vec<u32> = q.labels().into_iter().collect();
        assert_eq!(labels, (1..=6).collect::<Vec<u32>>());
        assert_eq!(map.len(), 6);
        assert_eq!(q.stats(), p.pedigree().stats());
    }
}
