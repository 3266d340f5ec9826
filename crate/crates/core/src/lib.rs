//! Exact combinatorics and simulation engine for `K_{d+2}^{d+1}` bootstrap
//! percolation on random `(d+1)`-uniform hypergraphs, together with the
//! verification machinery used to cross-check the structural theory at desk
//! scale: pedigree DAGs and their excess statistics, exterior algebraic
//! shifting over a prime field, volume-rigidity matrices over exact integers,
//! and Fuss--Catalan analysis of the percolation density.
//!
//! The crate is organized around stand-alone modules:
//!
//! * [`faces`] — faces as sorted vertex sets, colex ranking, bitset face sets.
//! * [`boundary`] — boundary matrices and exact top Betti numbers.
//! * [`analysis`] — Fuss--Catalan numbers, the critical constant, and the
//!   density root of `Q_gamma(x) = x^{d+1} - x + gamma`.
//! * [`bootstrap`] — seeded sampling and the bootstrap closure engine with
//!   per-face infection certificates.
//! * [`pedigree`] — the DAG calculus: validation, excess bounds, witness
//!   extraction, proper/balanced pedigrees and their subset pedigrees.
//! * [`shifting`] — exterior algebraic shifting over a fixed prime field.
//! * [`rigidity`] — cofactor vectors and rank identities of the volume
//!   rigidity matrix.
//! * [`verify`] — named check suites bundling the module invariants.
//!
//! All randomized components are driven by explicitly seeded ChaCha8 streams;
//! every result in this crate is reproducible from its `(parameters, seed)`
//! pair.

pub mod analysis;
pub mod boundary;
pub mod bootstrap;
pub mod faces;
pub mod modular;
pub mod pedigree;
pub mod rigidity;
pub mod shifting;
pub mod verify;

pub use faces::{Face, FaceSet, Rank};
