//! Experiment orchestration: density sweeps, threshold scans, witness runs,
//! and critical-step trajectories.
//!
//! Every run is fully determined by its configuration and base seed. The
//! per-run seeds are derived by a splitmix64 hash of the base seed and the
//! run's index coordinates, so changing the worker count or executing runs
//! in any order never changes a result.

use anyhow::{bail, Result};
use serde::Serialize;

use stacked_core::analysis::{critical_gamma, hat_gamma, DensityQuery};
use stacked_core::bootstrap::{self, BootstrapState, CriticalStepRun, Instance};
use stacked_core::faces::Face;
use stacked_core::pedigree::{check_excess_bound, extract_witness, Pedigree, PedigreeStats};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the run at coordinates `(n-index, gamma-index, trial)`.
pub fn run_seed(base: u64, n_idx: usize, gamma_idx: usize, trial: u64) -> u64 {
    splitmix64(base ^ ((n_idx as u64) << 40) ^ ((gamma_idx as u64) << 20) ^ trial)
}

/// One closure run of a density or threshold experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRecord {
    pub n: u32,
    pub gamma: f64,
    pub seed: u64,
    pub x_hat: f64,
    pub percolated: bool,
}

/// Per-`(n, gamma)` aggregate of a density sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSummary {
    pub n: u32,
    pub gamma: f64,
    pub trials: u64,
    pub percolated: u64,
    /// Mean of `n^{1/d} x_hat` over the trials.
    pub mean_scaled: f64,
    /// Standard error of the mean of `n^{1/d} x_hat`.
    pub stderr_scaled: f64,
    /// The predicted limit: smallest positive root of `Q_gamma`.
    pub hat_gamma: f64,
}

/// Runs `trials` independent closures for every `(n, gamma)` pair and
/// aggregates the scaled densities against the analytic root.
pub fn density_sweep(
    d: usize,
    ns: &[u32],
    gammas: &[f64],
    trials: u64,
    seed: u64,
    jobs: usize,
    allow_supercritical: bool,
) -> Result<(Vec<SweepRecord>, Vec<SweepSummary>)> {
    let critical = critical_gamma(d);
    if !allow_supercritical {
        if let Some(&g) = gammas.iter().find(|&&g| g > critical) {
            bail!(
                "gamma = {g} exceeds the critical value {critical:.6}; \
                 pass --allow-supercritical to sweep beyond it"
            );
        }
    }
    let mut tasks = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        for (gi, &gamma) in gammas.iter().enumerate() {
            for t in 0..trials {
                tasks.push((ni, n, gi, gamma, t));
            }
        }
    }
    let records = run_parallel(&tasks, jobs, |&(ni, n, gi, gamma, t)| {
        let p = (gamma * (n as f64).powf(-1.0 / d as f64)).min(1.0);
        let inst = Instance::new(n, d, p, run_seed(seed, ni, gi, t));
        let state = bootstrap::run_instance(&inst);
        SweepRecord {
            n,
            gamma,
            seed: inst.seed,
            x_hat: state.density(),
            percolated: state.percolated(),
        }
    });
    let mut summaries = Vec::new();
    for &n in ns {
        for &gamma in gammas {
            let scaled: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n && r.gamma == gamma)
                .map(|r| (n as f64).powf(1.0 / d as f64) * r.x_hat)
                .collect();
            let percolated = records
                .iter()
                .filter(|r| r.n == n && r.gamma == gamma && r.percolated)
                .count() as u64;
            let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
            let var = scaled.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                / (scaled.len().max(2) - 1) as f64;
            let root = if gamma <= critical {
                hat_gamma(&DensityQuery::new(d, gamma)?)
            } else {
                f64::NAN
            };
            summaries.push(SweepSummary {
                n,
                gamma,
                trials,
                percolated,
                mean_scaled: mean,
                stderr_scaled: (var / scaled.len() as f64).sqrt(),
                hat_gamma: root,
            });
        }
    }
    Ok((records, summaries))
}

/// Per-gamma percolation frequency of a threshold scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdSummary {
    pub n: u32,
    pub gamma: f64,
    /// `gamma` over the critical value.
    pub gamma_ratio: f64,
    pub trials: u64,
    pub percolated: u64,
    pub frequency: f64,
    /// Largest `x_hat` among the non-percolated runs, if any.
    pub max_subcritical_x_hat: f64,
}

/// Default threshold grid: `0.7, 0.8, ..., 1.5` times the critical gamma.
pub fn default_threshold_factors() -> Vec<f64> {
    (7..=15).map(|i| i as f64 / 10.0).collect()
}

/// Percolation frequency over a gamma grid spanning the critical value.
pub fn threshold_scan(
    d: usize,
    n: u32,
    gammas: &[f64],
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<(Vec<SweepRecord>, Vec<ThresholdSummary>)> {
    let critical = critical_gamma(d);
    let mut tasks = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        for t in 0..trials {
            tasks.push((0usize, n, gi, gamma, t));
        }
    }
    let records = run_parallel(&tasks, jobs, |&(ni, n, gi, gamma, t)| {
        let p = (gamma * (n as f64).powf(-1.0 / d as f64)).min(1.0);
        let inst = Instance::new(n, d, p, run_seed(seed, ni, gi, t));
        let state = bootstrap::run_instance(&inst);
        SweepRecord {
            n,
            gamma,
            seed: inst.seed,
            x_hat: state.density(),
            percolated: state.percolated(),
        }
    });
    let summaries = gammas
        .iter()
        .map(|&gamma| {
            let runs: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.gamma == gamma)
                .collect();
            let percolated = runs.iter().filter(|r| r.percolated).count() as u64;
            let max_sub = runs
                .iter()
                .filter(|r| !r.percolated)
                .map(|r| r.x_hat)
                .fold(0.0f64, f64::max);
            ThresholdSummary {
                n,
                gamma,
                gamma_ratio: gamma / critical,
                trials,
                percolated,
                frequency: percolated as f64 / trials as f64,
                max_subcritical_x_hat: max_sub,
            }
        })
        .collect();
    Ok((records, summaries))
}

/// Witness statistics reported by the `witness` command.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub instance: Instance,
    pub target: Face,
    pub infected: bool,
    pub stats: Option<PedigreeStats>,
    pub labels: Option<u64>,
    pub excess_bound_holds: Option<bool>,
}

/// Samples, closes, and extracts the witness pedigree of a target face.
/// Returns the report together with the state and pedigree for export.
pub fn witness_run(
    inst: &Instance,
    target: &Face,
) -> (WitnessReport, BootstrapState, Option<Pedigree>) {
    let state = bootstrap::run_instance(inst);
    let witness = extract_witness(&state, target);
    let report = match &witness {
        Some(w) => {
            let st = w.stats();
            WitnessReport {
                instance: *inst,
                target: target.clone(),
                infected: true,
                labels: Some(st.s + inst.d as u64 + 1),
                excess_bound_holds: Some(check_excess_bound(inst.d, &st)),
                stats: Some(st),
            }
        }
        None => WitnessReport {
            instance: *inst,
            target: target.clone(),
            infected: false,
            stats: None,
            labels: None,
            excess_bound_holds: None,
        },
    };
    (report, state, witness)
}

/// Runs the one-face-at-a-time experiment for `trials` consecutive seeds.
pub fn critical_step_runs(
    n: u32,
    d: usize,
    base_seed: u64,
    trials: u64,
    sample_every: u64,
    jobs: usize,
) -> Vec<CriticalStepRun> {
    let tasks: Vec<u64> = (0..trials).collect();
    run_parallel(&tasks, jobs, |&t| {
        bootstrap::critical_step(n, d, splitmix64(base_seed ^ t), sample_every)
    })
}

/// Index-partitioned deterministic parallel map: task `i` runs on worker
/// `i % jobs` and lands at position `i` of the output, so results are
/// independent of scheduling.
pub fn run_parallel<T, R, F>(tasks: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1);
    let mut results: Vec<Option<R>> = (0..tasks.len()).map(|_| None).collect();
    if jobs == 1 {
        for (slot, task) in results.iter_mut().zip(tasks) {
            *slot = Some(f(task));
        }
    } else {
        let slots: Vec<std::sync::Mutex<&mut Option<R>>> =
            results.iter_mut().map(std::sync::Mutex::new).collect();
        std::thread::scope(|scope| {
            for w in 0..jobs {
                let f = &f;
                let slots = &slots;
                scope.spawn(move || {
                    for i in (w..tasks.len()).step_by(jobs) {
                        let r = f(&tasks[i]);
                        **slots[i].lock().unwrap() = Some(r);
                    }
                });
            }
        });
    }
    results.into_iter().map(|r| r.unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_equals_serial() {
        let tasks: Vec<u64> = (0..57).collect();
        let serial = run_parallel(&tasks, 1, |&t| splitmix64(t));
        let parallel = run_parallel(&tasks, 4, |&t| splitmix64(t));
        assert_eq!(serial, parallel);
    }

    #[test]
    fn sweep_gamma_zero_is_empty() {
        let (records, summaries) =
            density_sweep(2, &[20], &[0.0], 5, 9, 2, false).unwrap();
        assert_eq!(records.len(), 5);
        assert!(records.iter().all(|r| r.x_hat == 0.0 && !r.percolated));
        assert_eq!(summaries[0].mean_scaled, 0.0);
        assert_eq!(summaries[0].hat_gamma, 0.0);
    }

    #[test]
    fn sweep_rejects_supercritical_without_flag() {
        assert!(density_sweep(2, &[20], &[0.9], 2, 0, 1, false).is_err());
        assert!(density_sweep(2, &[20], &[0.9], 2, 0, 1, true).is_ok());
    }

    #[test]
    fn sweep_deterministic_across_jobs() {
        let a = density_sweep(2, &[30], &[0.15, 0.25], 6, 42, 1, false).unwrap();
        let b = density_sweep(2, &[30], &[0.15, 0.25], 6, 42, 3, false).unwrap();
        let fmt = |recs: &[SweepRecord]| {
            recs.iter()
                .map(|r| format!("{} {} {} {} {}", r.n, r.gamma, r.seed, r.x_hat, r.percolated))
                .collect::<Vec<_>>()
        };
        assert_eq!(fmt(&a.0), fmt(&b.0));
    }

    #[test]
    fn witness_of_seed_face() {
        let inst = Instance::new(12, 2, 0.9, 3);
        let state = bootstrap::run_instance(&inst);
        let target = state
            .y0
            .iter_faces()
            .next()
            .expect("dense instance has seed faces");
        let (report, _, pedigree) = witness_run(&inst, &target);
        assert!(report.infected);
        let st = report.stats.unwrap();
        assert_eq!((st.m, st.l), (0, 1));
        assert!(pedigree.unwrap().validate().is_ok());
    }
}
