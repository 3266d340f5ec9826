//! `stacked`: sample random complexes, run bootstrap closures, extract
//! witness pedigrees, sweep densities and thresholds, and run the
//! verification suites.
//!
//! Exit codes: 0 on success, 1 on verification failure, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use stacked_cli::experiments::{
    critical_step_runs, default_threshold_factors, density_sweep, threshold_scan,
    witness_run,
};
use stacked_cli::output::{self, ARTIFACT_VERSION};
use stacked_core::analysis::critical_gamma;
use stacked_core::bootstrap::{sample_complex, Instance};
use stacked_core::faces::Face;
use stacked_core::verify;

/// Environment variable holding the default output directory for relative
/// `--out` paths.
const OUT_DIR_ENV: &str = "STACKED_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "stacked",
    version,
    about = "Bootstrap percolation of (d+1)-uniform cliques: simulation and exact verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Y ~ Y_d(n, p) and export the face set as JSON
    Sample(InstanceArgs),
    /// Sample, close under the clique rule, and export the certified state
    Close(InstanceArgs),
    /// Extract the witness pedigree of a target face after closure
    Witness(WitnessArgs),
    /// Closure density against the analytic root over a gamma grid
    DensitySweep(SweepArgs),
    /// Percolation frequency over a gamma grid spanning the critical value
    ThresholdScan(ThresholdArgs),
    /// Insert faces one at a time and record the trajectory and critical step
    CriticalStep(CriticalStepArgs),
    /// Run named verification suites and report pass/fail
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Dimension of the faces (d >= 2)
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of vertices
    #[arg(long)]
    n: u32,
    /// Density dial: p = gamma * n^{-1/d}
    #[arg(long)]
    gamma: Option<f64>,
    /// Face probability, overriding --gamma
    #[arg(long)]
    p: Option<f64>,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when absent); relative paths resolve against
    /// STACKED_OUT_DIR when set
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Target face as comma-separated vertices, e.g. 1,2,3
    #[arg(long, default_value = "1,2,3")]
    target: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Vertex counts, comma separated
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    /// Gamma grid, comma separated
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    /// Closure runs per (n, gamma) pair
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; never affects results
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Permit gamma values beyond the critical point
    #[arg(long)]
    allow_supercritical: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: u32,
    /// Explicit gamma grid; default spans 0.7..1.5 times the critical value
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CriticalStepArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: u32,
    /// Consecutive runs, seeded from --seed
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record every k-th trajectory point
    #[arg(long, default_value_t = 100)]
    sample_every: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name (combinatorics, analysis, bootstrap, pedigree, shifting,
    /// rigidity) or "all"
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample(args) => {
            let inst = build_instance(&args)?;
            require_format(args.format, &[Format::Json], "sample")?;
            let complex = sample_complex(&inst);
            let mut doc = json!({
                "command": "sample",
                "version": ARTIFACT_VERSION,
                "instance": inst,
            });
            merge(&mut doc, serde_json::to_value(&complex)?);
            write_output(args.out.as_deref(), &pretty(&doc)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Close(args) => {
            let inst = build_instance(&args)?;
            require_format(args.format, &[Format::Json], "close")?;
            let state = stacked_core::bootstrap::run_instance(&inst);
            let mut doc = json!({
                "command": "close",
                "version": ARTIFACT_VERSION,
            });
            merge(&mut doc, serde_json::to_value(&state)?);
            write_output(args.out.as_deref(), &pretty(&doc)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Witness(args) => {
            let inst = build_instance(&args.instance)?;
            require_format(args.instance.format, &[Format::Json, Format::Dot], "witness")?;
            let target = parse_face(&args.target)?;
            target
                .check(inst.n, inst.d)
                .context("target face invalid for the instance")?;
            let (report, _state, pedigree) = witness_run(&inst, &target);
            match (&pedigree, report.infected) {
                (Some(w), _) => {
                    let st = report.stats.unwrap();
                    eprintln!(
                        "witness of {target}: vertices={} leaves={} labels={} a={} b={} excess_bound={}",
                        st.m + st.l,
                        st.l,
                        report.labels.unwrap(),
                        st.a,
                        st.b,
                        report.excess_bound_holds.unwrap()
                    );
                    let content = match args.instance.format {
                        Format::Dot => w.to_dot(),
                        _ => {
                            let mut doc = json!({
                                "command": "witness",
                                "version": ARTIFACT_VERSION,
                                "report": report,
                            });
                            merge(&mut doc, json!({"pedigree": w}));
                            pretty(&doc)?
                        }
                    };
                    write_output(args.instance.out.as_deref(), &content)?;
                }
                (None, _) => {
                    eprintln!("target {target} not infected after closure");
                    let doc = json!({
                        "command": "witness",
                        "version": ARTIFACT_VERSION,
                        "report": report,
                    });
                    write_output(args.instance.out.as_deref(), &pretty(&doc)?)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DensitySweep(args) => {
            require_format(args.format, &[Format::Csv], "density-sweep")?;
            if args.n.is_empty() || args.gamma.is_empty() {
                bail!("density-sweep requires --n and --gamma");
            }
            check_d(args.d)?;
            let (records, summaries) = density_sweep(
                args.d,
                &args.n,
                &args.gamma,
                args.trials,
                args.seed,
                args.jobs,
                args.allow_supercritical,
            )?;
            for s in &summaries {
                eprintln!(
                    "n={} gamma={}: mean n^(1/d) x_hat = {:.6} +- {:.6} vs root {:.6} ({} percolated)",
                    s.n, s.gamma, s.mean_scaled, s.stderr_scaled, s.hat_gamma, s.percolated
                );
            }
            let csv = output::density_sweep_csv(
                args.d,
                &args.n,
                &args.gamma,
                args.trials,
                args.seed,
                args.jobs,
                &records,
                &summaries,
            );
            write_output(args.out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ThresholdScan(args) => {
            require_format(args.format, &[Format::Csv], "threshold-scan")?;
            check_d(args.d)?;
            let gammas: Vec<f64> = if args.gamma.is_empty() {
                let crit = critical_gamma(args.d);
                default_threshold_factors()
                    .into_iter()
                    .map(|f| f * crit)
                    .collect()
            } else {
                args.gamma.clone()
            };
            let (records, summaries) =
                threshold_scan(args.d, args.n, &gammas, args.trials, args.seed, args.jobs)?;
            for s in &summaries {
                eprintln!(
                    "gamma={:.6} ({}x critical): percolation frequency {:.3}",
                    s.gamma, s.gamma_ratio, s.frequency
                );
            }
            let csv = output::threshold_scan_csv(
                args.d,
                args.n,
                &gammas,
                args.trials,
                args.seed,
                args.jobs,
                &records,
                &summaries,
            );
            write_output(args.out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CriticalStep(args) => {
            require_format(args.format, &[Format::Csv], "critical-step")?;
            check_d(args.d)?;
            let runs = critical_step_runs(
                args.n,
                args.d,
                args.seed,
                args.trials,
                args.sample_every,
                args.jobs,
            );
            for run in &runs {
                eprintln!(
                    "seed={}: tau={} of {} (fraction {:.6}), x_hat(tau-1)={:.6}",
                    run.seed,
                    run.tau,
                    run.total_faces,
                    run.tau as f64 / run.total_faces as f64,
                    run.x_before_tau
                );
            }
            let csv = output::critical_step_csv(
                args.d,
                args.n,
                args.seed,
                args.trials,
                args.sample_every,
                &runs,
            );
            write_output(args.out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            require_format(args.format, &[Format::Json], "verify")?;
            let names: Vec<&str> = if args.suite == "all" {
                verify::SUITES.to_vec()
            } else {
                vec![args.suite.as_str()]
            };
            let mut suites = Vec::new();
            let mut all_ok = true;
            for name in names {
                let Some(checks) = verify::run_suite(name, args.seed) else {
                    bail!(
                        "unknown suite '{name}'; available: {}, all",
                        verify::SUITES.join(", ")
                    );
                };
                for c in &checks {
                    eprintln!(
                        "[{}] {} - {}",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
                let pass = verify::all_pass(&checks);
                all_ok &= pass;
                suites.push(json!({"suite": name, "pass": pass, "checks": checks}));
            }
            let doc = json!({
                "command": "verify",
                "version": ARTIFACT_VERSION,
                "seed": args.seed,
                "pass": all_ok,
                "suites": suites,
            });
            write_output(args.out.as_deref(), &pretty(&doc)?)?;
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        bail!("the dimension d must be at least 2");
    }
    Ok(())
}

fn build_instance(args: &InstanceArgs) -> Result<Instance> {
    check_d(args.d)?;
    if (args.n as u64) < (args.d + 2) as u64 {
        bail!("need n >= d+2 = {}", args.d + 2);
    }
    let p = match (args.p, args.gamma) {
        (Some(p), _) => p,
        (None, Some(gamma)) => gamma * (args.n as f64).powf(-1.0 / args.d as f64),
        (None, None) => bail!("one of --p or --gamma is required"),
    };
    if !(0.0..=1.0).contains(&p) {
        bail!("face probability p = {p} outside [0, 1]");
    }
    Ok(Instance::new(args.n, args.d, p, args.seed))
}

fn parse_face(text: &str) -> Result<Face> {
    let vertices: Vec<u32> = text
        .split(',')
        .map(|t| t.trim().parse::<u32>().context("face vertices must be integers"))
        .collect::<Result<_>>()?;
    Face::from_unsorted(vertices).context("invalid target face")
}

fn require_format(got: Format, allowed: &[Format], command: &str) -> Result<()> {
    if allowed.contains(&got) {
        Ok(())
    } else {
        bail!("unsupported --format for {command}");
    }
}

fn merge(doc: &mut serde_json::Value, extra: serde_json::Value) {
    if let (Some(obj), serde_json::Value::Object(more)) = (doc.as_object_mut(), extra) {
        for (k, v) in more {
            obj.insert(k, v);
        }
    }
}

fn pretty(doc: &serde_json::Value) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(doc)?))
}

fn write_output(out: Option<&std::path::Path>, content: &str) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let resolved = if path.is_relative() {
                match std::env::var_os(OUT_DIR_ENV) {
                    Some(dir) => PathBuf::from(dir).join(path),
                    None => path.to_path_buf(),
                }
            } else {
                path.to_path_buf()
            };
            if let Some(parent) = resolved.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            std::fs::write(&resolved, content)
                .with_context(|| format!("writing {}", resolved.display()))?;
            eprintln!("wrote {}", resolved.display());
            Ok(())
        }
    }
}
