//! Sampling of random `(d+1)`-uniform hypergraphs and the `K_{d+2}^{d+1}`
//! bootstrap closure.
//!
//! The closure rule: a face `g` becomes infected as soon as some
//! `(d+2)`-set `w` containing `g` has all of its other `d+1` facets infected.
//! The engine records, for every face infected after time zero, a
//! certificate `(apex, parents)` with `parents = facets(g + apex) - {g}`,
//! each infected strictly earlier.
//!
//! Randomness: all sampling is driven by `ChaCha8Rng` seeded from the 64-bit
//! instance seed, so every run is reproducible from `(parameters, seed)`.
//! Independent runs share no state and may execute concurrently.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faces::{colex_rank, face_count, Face, FaceError, FaceSet, Rank, RankTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BootstrapError {
    #[error(transparent)]
    Face(#[from] FaceError),
    #[error("n = {n} exceeds the naive-closure guard of {guard}")]
    NaiveGuard { n: u32, guard: u32 },
    #[error("state dimensions (n={sn}, d={sd}) do not match input (n={inn}, d={ind})")]
    DimensionMismatch { sn: u32, sd: usize, inn: u32, ind: usize },
}

/// Parameters of one random instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: u32,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
}

impl Instance {
    pub fn new(n: u32, d: usize, p: f64, seed: u64) -> Self {
        assert!(n as u64 >= (d + 2) as u64, "need n >= d+2");
        assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
        Instance { n, d, p, seed }
    }

    /// Metadata-only instance for closures of explicitly constructed sets.
    pub fn synthetic(n: u32, d: usize) -> Self {
        Instance {
            n,
            d,
            p: 0.0,
            seed: 0,
        }
    }
}

/// Infection certificate: the face was completed inside `face + apex`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub apex: u32,
    /// Colex ranks of the other `d+1` facets of `face + apex`, in facet order.
    pub parents: Vec<Rank>,
}

/// Queue discipline of the cascade. The infected fixpoint is independent of
/// the choice; certificates and infection order are not. FIFO is canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueueDiscipline {
    #[default]
    Fifo,
    Lifo,
}

/// A closure fixpoint with its infection history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapState {
    pub instance: Instance,
    pub y0: FaceSet,
    pub infected: FaceSet,
    /// All infected faces in infection order: the seed faces in rank order,
    /// then cascade infections.
    pub order: Vec<Rank>,
    /// Certificates for exactly the faces of `infected - y0`.
    pub certs: BTreeMap<Rank, Certificate>,
}

impl BootstrapState {
    pub fn density(&self) -> f64 {
        self.infected.cardinality() as f64 / self.infected.capacity() as f64
    }

    pub fn percolated(&self) -> bool {
        self.infected.cardinality() == self.infected.capacity()
    }
}

/// Samples `Y ~ Y_d(n, p)`: every `d`-face independently with probability
/// `p`, via geometric skips over the colex rank space.
pub fn sample_complex(inst: &Instance) -> FaceSet {
    let mut set = FaceSet::new(inst.n, inst.d).expect("valid instance");
    let total = face_count(inst.n, inst.d);
    if inst.p <= 0.0 {
        return set;
    }
    if inst.p >= 1.0 {
        for r in 0..total {
            set.insert_rank(r);
        }
        return set;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let log_q = (1.0 - inst.p).ln();
    let mut r: u64 = 0;
    loop {
        // skip a Geometric(p) number of misses, then take a hit
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - r) as f64 {
            break;
        }
        r += skip as u64;
        set.insert_rank(r);
        r += 1;
        if r >= total {
            break;
        }
    }
    set
}

/// Work-queue engine shared by full closure and incremental insertion.
struct Engine {
    n: u32,
    d: usize,
    table: RankTable,
    /// Scratch: sorted `(d+2)`-set and its facet ranks.
    w: Vec<u32>,
    facet_ranks: Vec<Rank>,
}

impl Engine {
    fn new(n: u32, d: usize) -> Self {
        Engine {
            n,
            d,
            table: RankTable::new(n, d + 2),
            w: vec![0; d + 2],
            facet_ranks: vec![0; d + 2],
        }
    }

    /// Runs the cascade until the queue drains. `queue` holds infected faces
    /// whose neighborhoods are not yet inspected.
    fn cascade(
        &mut self,
        infected: &mut FaceSet,
        queue: &mut VecDeque<Rank>,
        order: &mut Vec<Rank>,
        certs: &mut BTreeMap<Rank, Certificate>,
        discipline: QueueDiscipline,
    ) {
        let arity = self.d + 1;
        while let Some(rank) = match discipline {
            QueueDiscipline::Fifo => queue.pop_front(),
            QueueDiscipline::Lifo => queue.pop_back(),
        } {
            let face = crate::faces::colex_unrank(rank, arity);
            let fv = face.vertices();
            for z in 1..=self.n {
                if fv.contains(&z) {
                    continue;
                }
                // w = face + z, sorted
                let mut wi = 0usize;
                let mut placed = false;
                for &v in fv {
                    if !placed && z < v {
                        self.w[wi] = z;
                        wi += 1;
                        placed = true;
                    }
                    self.w[wi] = v;
                    wi += 1;
                }
                if !placed {
                    self.w[wi] = z;
                }
                self.table.facet_ranks(&self.w, &mut self.facet_ranks);
                let mut missing: Option<usize> = None;
                let mut missing_count = 0;
                for (j, &fr) in self.facet_ranks.iter().enumerate() {
                    if !infected.contains_rank(fr) {
                        missing_count += 1;
                        if missing_count > 1 {
                            break;
                        }
                        missing = Some(j);
                    }
                }
                if missing_count == 1 {
                    let j = missing.unwrap();
                    let new_rank = self.facet_ranks[j];
                    let apex = self.w[j];
                    let parents: Vec<Rank> = self
                        .facet_ranks
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, &r)| r)
                        .collect();
                    infected.insert_rank(new_rank);
                    order.push(new_rank);
                    certs.insert(
                        new_rank,
                        Certificate {
                            apex,
                            parents,
                        },
                    );
                    queue.push_back(new_rank);
                }
            }
        }
    }
}

/// Bootstrap closure of `y0` with the given queue discipline.
pub fn close_with(inst: &Instance, y0: &FaceSet, discipline: QueueDiscipline) -> BootstrapState {
    let mut engine = Engine::new(y0.n(), y0.d());
    let mut infected = y0.clone();
    let mut order: Vec<Rank> = y0.iter_ranks().collect();
    let mut queue: VecDeque<Rank> = order.iter().copied().collect();
    let mut certs = BTreeMap::new();
    engine.cascade(&mut infected, &mut queue, &mut order, &mut certs, discipline);
    BootstrapState {
        instance: *inst,
        y0: y0.clone(),
        infected,
        order,
        certs,
    }
}

/// Bootstrap closure with the canonical FIFO discipline.
pub fn close(inst: &Instance, y0: &FaceSet) -> BootstrapState {
    close_with(inst, y0, QueueDiscipline::Fifo)
}

/// Samples an instance and closes it.
pub fn run_instance(inst: &Instance) -> BootstrapState {
    let y0 = sample_complex(inst);
    close(inst, &y0)
}

/// Guard for the reference closure: it scans all `C(n, d+2)` cliques per
/// round.
pub const NAIVE_GUARD_N: u32 = 16;

/// Reference oracle: repeated full scans over all `(d+2)`-sets until no face
/// is added. Same fixpoint as [`close`], no certificates.
pub fn close_naive(y0: &FaceSet) -> Result<FaceSet, BootstrapError> {
    if y0.n() > NAIVE_GUARD_N {
        return Err(BootstrapError::NaiveGuard {
            n: y0.n(),
            guard: NAIVE_GUARD_N,
        });
    }
    let table = RankTable::new(y0.n(), y0.d() + 2);
    let mut infected = y0.clone();
    let mut facet_ranks = vec![0u64; y0.d() + 2];
    loop {
        let mut changed = false;
        for w in crate::faces::k_subsets_lex(y0.n(), y0.d() + 2) {
            table.facet_ranks(w.vertices(), &mut facet_ranks);
            let missing: Vec<Rank> = facet_ranks
                .iter()
                .copied()
                .filter(|&r| !infected.contains_rank(r))
                .collect();
            if missing.len() == 1 {
                infected.insert_rank(missing[0]);
                changed = true;
            }
        }
        if !changed {
            return Ok(infected);
        }
    }
}

/// Outcome of a single-face insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    /// The face was already infected; the state is unchanged.
    AlreadyInfected,
    /// The face was inserted; `newly_infected` counts it plus the cascade.
    Inserted { newly_infected: u64 },
}

/// Inserts a single face into a closure fixpoint and restarts the cascade
/// from that face alone. Equivalent to a full re-closure of `y0 + {f}`.
pub fn incremental_add(state: &mut BootstrapState, f: &Face) -> Result<AddOutcome, BootstrapError> {
    f.check(state.infected.n(), state.infected.d())?;
    let rank = colex_rank(f);
    if state.infected.contains_rank(rank) {
        return Ok(AddOutcome::AlreadyInfected);
    }
    let before = state.infected.cardinality();
    state.y0.insert_rank(rank);
    state.infected.insert_rank(rank);
    state.order.push(rank);
    let mut engine = Engine::new(state.infected.n(), state.infected.d());
    let mut queue: VecDeque<Rank> = VecDeque::from([rank]);
    engine.cascade(
        &mut state.infected,
        &mut queue,
        &mut state.order,
        &mut state.certs,
        QueueDiscipline::Fifo,
    );
    Ok(AddOutcome::Inserted {
        newly_infected: state.infected.cardinality() - before,
    })
}

/// One sampled point of a critical-step trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    /// Number of faces inserted so far.
    pub t: u64,
    /// Fraction of all faces infected after the first `t` insertions.
    pub x_hat: f64,
}

/// Result of the one-face-at-a-time insertion experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalStepRun {
    pub n: u32,
    pub d: usize,
    pub seed: u64,
    pub total_faces: u64,
    /// Trajectory sampled every `sample_every` steps (plus the final step).
    pub points: Vec<TrajectoryPoint>,
    /// First insertion count at which everything is infected.
    pub tau: u64,
    /// Density right before the critical step.
    pub x_before_tau: f64,
    /// Density at the critical step (always 1).
    pub x_at_tau: f64,
}

/// Inserts all faces in a seeded uniform random order, tracking the density
/// trajectory and the critical step `tau` at which the closure completes.
pub fn critical_step(n: u32, d: usize, seed: u64, sample_every: u64) -> CriticalStepRun {
    let total = face_count(n, d);
    let mut perm: Vec<Rank> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates
    for i in (1..perm.len()).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let inst = Instance {
        n,
        d,
        p: 0.0,
        seed,
    };
    let empty = FaceSet::new(n, d).expect("valid dimensions");
    let mut state = close(&inst, &empty);
    let mut points = Vec::new();
    let every = sample_every.max(1);
    let mut tau = total;
    let mut x_before = 0.0;
    let arity = d + 1;
    for (i, &rank) in perm.iter().enumerate() {
        let t = (i + 1) as u64;
        let prev_density = state.density();
        let face = crate::faces::colex_unrank(rank, arity);
        incremental_add(&mut state, &face).expect("face valid by construction");
        let x = state.density();
        if t % every == 0 || t == total {
            points.push(TrajectoryPoint { t, x_hat: x });
        }
        if state.percolated() {
            tau = t;
            x_before = prev_density;
            if t % every != 0 && t != total {
                points.push(TrajectoryPoint { t, x_hat: x });
            }
            break;
        }
    }
    CriticalStepRun {
        n,
        d,
        seed,
        total_faces: total,
        points,
        tau,
        x_before_tau: x_before,
        x_at_tau: 1.0,
    }
}

/// Checks certificate soundness for a closed state: every certified face has
/// exactly the facets of `face + apex` minus itself as parents, all infected
/// strictly earlier.
pub fn check_certificates(state: &BootstrapState) -> Result<(), String> {
    let mut position: BTreeMap<Rank, usize> = BTreeMap::new();
    for (i, &r) in state.order.iter().enumerate() {
        if position.insert(r, i).is_some() {
            return Err(format!("rank {r} appears twice in infection order"));
        }
    }
    if state.order.len() as u64 != state.infected.cardinality() {
        return Err("order length differs from infected cardinality".into());
    }
    let arity = state.infected.d() + 1;
    for (&rank, cert) in &state.certs {
        if state.y0.contains_rank(rank) {
            return Err(format!("seed face {rank} carries a certificate"));
        }
        let face = crate::faces::colex_unrank(rank, arity);
        if face.contains(cert.apex) {
            return Err(format!("apex {} lies inside face {face}", cert.apex));
        }
        let w = face.with(cert.apex);
        let expected: Vec<Rank> = crate::faces::facets(&w)
            .expect("valid (d+2)-set")
            .iter()
            .map(colex_rank)
            .filter(|&r| r != rank)
            .collect();
        if expected != cert.parents {
            return Err(format!("parents of {face} are not the other facets of {w}"));
        }
        let own = position[&rank];
        for &p in &cert.parents {
            match position.get(&p) {
                Some(&pp) if pp < own => {}
                _ => return Err(format!("parent {p} does not precede face {rank}")),
            }
        }
    }
    // certificates exactly on infected - y0
    for r in state.infected.iter_ranks() {
        let should = !state.y0.contains_rank(r);
        if should != state.certs.contains_key(&r) {
            return Err(format!("certificate coverage wrong at rank {r}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(v: &[u32]) -> Face {
        Face::new(v.to_vec()).unwrap()
    }

    fn set_of(n: u32, d: usize, faces: &[Face]) -> FaceSet {
        FaceSet::from_faces(n, d, faces).unwrap()
    }

    #[test]
    fn sample_edge_probabilities() {
        let empty = sample_complex(&Instance::new(10, 2, 0.0, 1));
        assert!(empty.is_empty());
        let full = sample_complex(&Instance::new(10, 2, 1.0, 1));
        assert_eq!(full.cardinality(), face_count(10, 2));
    }

    #[test]
    fn sample_mean_cardinality() {
        let n = 100;
        let p = 0.05;
        let total = face_count(n, 2) as f64;
        let mut sum = 0.0;
        let seeds = 200;
        for seed in 0..seeds {
            sum += sample_complex(&Instance::new(n, 2, p, seed)).cardinality() as f64;
        }
        let mean = sum / seeds as f64;
        let expect = p * total;
        let sd = (total * p * (1.0 - p) / seeds as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sd,
            "mean {mean} vs {expect} (sd {sd})"
        );
    }

    #[test]
    fn sample_deterministic_per_seed() {
        let inst = Instance::new(30, 2, 0.1, 42);
        assert_eq!(sample_complex(&inst), sample_complex(&inst));
    }

    #[test]
    fn single_completion() {
        let y0 = set_of(
            4,
            2,
            &[face(&[1, 2, 3]), face(&[1, 2, 4]), face(&[1, 3, 4])],
        );
        let state = close(&Instance::synthetic(4, 2), &y0);
        assert_eq!(state.infected.cardinality(), 4);
        let rank = colex_rank(&face(&[2, 3, 4]));
        let cert = &state.certs[&rank];
        assert_eq!(cert.apex, 1);
        let parent_faces: Vec<Face> = cert
            .parents
            .iter()
            .map(|&r| crate::faces::colex_unrank(r, 3))
            .collect();
        assert_eq!(
            parent_faces,
            vec![face(&[1, 3, 4]), face(&[1, 2, 4]), face(&[1, 2, 3])]
        );
        check_certificates(&state).unwrap();
    }

    #[test]
    fn empty_closure() {
        let y0 = FaceSet::new(6, 2).unwrap();
        let state = close(&Instance::synthetic(6, 2), &y0);
        assert!(state.infected.is_empty());
        assert_eq!(state.density(), 0.0);
    }

    #[test]
    fn closure_is_fixpoint() {
        let inst = Instance::new(10, 2, 0.12, 5);
        let state = run_instance(&inst);
        let again = close(&inst, &state.infected);
        assert_eq!(again.infected, state.infected);
        check_certificates(&state).unwrap();
    }

    #[test]
    fn naive_guard_enforced() {
        let y0 = FaceSet::new(17, 2).unwrap();
        assert!(matches!(
            close_naive(&y0),
            Err(BootstrapError::NaiveGuard { .. })
        ));
    }

    #[test]
    fn naive_matches_engine_small() {
        for seed in 0..20 {
            let inst = Instance::new(9, 2, 0.15, seed);
            let y0 = sample_complex(&inst);
            let fast = close(&inst, &y0);
            let slow = close_naive(&y0).unwrap();
            assert_eq!(fast.infected, slow, "seed {seed}");
        }
    }

    #[test]
    fn fifo_lifo_same_fixpoint() {
        for seed in 0..10 {
            let inst = Instance::new(10, 2, 0.12, seed);
            let y0 = sample_complex(&inst);
            let a = close_with(&inst, &y0, QueueDiscipline::Fifo);
            let b = close_with(&inst, &y0, QueueDiscipline::Lifo);
            assert_eq!(a.infected, b.infected, "seed {seed}");
            check_certificates(&a).unwrap();
            check_certificates(&b).unwrap();
        }
    }

    #[test]
    fn incremental_matches_full() {
        for seed in 0..25 {
            let inst = Instance::new(9, 2, 0.1, seed);
            let y0 = sample_complex(&inst);
            let mut state = close(&inst, &y0);
            let extra = crate::faces::colex_unrank(seed % face_count(9, 2), 3);
            let outcome = incremental_add(&mut state, &extra).unwrap();
            let mut y0_plus = y0.clone();
            let fresh = y0_plus.insert(&extra).unwrap();
            assert_eq!(
                fresh,
                !matches!(outcome, AddOutcome::AlreadyInfected) || !y0.contains(&extra).unwrap()
            );
            let full = close(&inst, &y0_plus);
            assert_eq!(state.infected, full.infected, "seed {seed}");
            check_certificates(&state).unwrap();
        }
    }

    #[test]
    fn incremental_noop_flagged() {
        let y0 = set_of(
            4,
            2,
            &[face(&[1, 2, 3]), face(&[1, 2, 4]), face(&[1, 3, 4])],
        );
        let mut state = close(&Instance::synthetic(4, 2), &y0);
        let outcome = incremental_add(&mut state, &face(&[2, 3, 4])).unwrap();
        assert_eq!(outcome, AddOutcome::AlreadyInfected);
        assert_eq!(state.infected.cardinality(), 4);
    }

    #[test]
    fn completion_fires_on_last_facet() {
        // all facets of {1,2,3,4,5} except two; adding one missing facet
        // completes the K_5^4 and infects the other: cardinality grows by 2
        let all = crate::faces::facets(&face(&[1, 2, 3, 4, 5])).unwrap();
        let y0 = set_of(5, 3, &all[..3].to_vec());
        let mut state = close(&Instance::synthetic(5, 3), &y0);
        assert_eq!(state.infected.cardinality(), 3);
        match incremental_add(&mut state, &all[3]).unwrap() {
            AddOutcome::Inserted { newly_infected } => assert!(newly_infected >= 2),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(state.infected.cardinality(), 5);
    }

    #[test]
    fn critical_step_reaches_one() {
        let run = critical_step(8, 2, 3, 5);
        assert_eq!(run.total_faces, face_count(8, 2));
        assert!(run.tau <= run.total_faces);
        assert_eq!(run.x_at_tau, 1.0);
        assert!(run.x_before_tau < 1.0);
        // monotone trajectory
        for w in run.points.windows(2) {
            assert!(w[0].x_hat <= w[1].x_hat);
        }
        assert_eq!(run.points.last().unwrap().x_hat, 1.0);
    }

    #[test]
    fn state_json_shape() {
        let y0 = set_of(
            4,
            2,
            &[face(&[1, 2, 3]), face(&[1, 2, 4]), face(&[1, 3, 4])],
        );
        let state = close(&Instance::new(4, 2, 0.5, 9), &y0);
        let js = serde_json::to_value(&state).unwrap();
        assert_eq!(js["instance"]["n"], 4);
        assert_eq!(js["y0"]["faces"][0], serde_json::json!([1, 2, 3]));
        assert_eq!(js["order"].as_array().unwrap().len(), 4);
        let cert = &js["certs"][&colex_rank(&face(&[2, 3, 4])).to_string()];
        assert_eq!(cert["apex"], 1);
        assert_eq!(cert["parents"].as_array().unwrap().len(), 3);
    }
}
