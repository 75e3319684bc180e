//! Batch front-end: scenario generation, experiment orchestration,
//! verification suites and file emission.
//!
//! Exit codes: 0 on success, 1 when a verification suite finds violations,
//! 2 on configuration errors (including unknown flags). All commands are
//! deterministic given their arguments; a missing `--seed` defaults to 0
//! with a printed notice. `LOCALCAST_THREADS` caps the worker count
//! (0 = auto).

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{fallback_stats, fit_bound, rows_from_summary_csv, FitForm};
use crate::automaton::AlgoVariant;
use crate::lowerbound::{
    auto_fixed_p, build_two_region_instance, calculus_claim_violations, log_spaced_sizes,
    run_harness, single_tx_peak_violations, DoublingPolicy, FixedPolicy, InputDeterminedPolicy,
    DEFAULT_SPARSE,
};
use crate::model::{
    ball_cover_count, AlgoConsts, InterferenceModel, NodeId, NodeSpec, PhysParams, Point, Scenario,
};
use crate::sim::{
    self, default_max_slots, run_with, write_summary_csv_rows, write_trace_jsonl, RunChecks,
    Violations, SUMMARY_CSV_HEADER,
};
use crate::{rng, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "localcast", version, about = "Slotted local-broadcast simulator and verifier")]
pub struct Cli {
    /// Base seed for all randomized steps (defaults to 0 with a notice).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Trial count for commands that repeat randomized runs.
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    /// Slot budget per trial (default: 64 (n + log^2 n) log n).
    #[arg(long, global = true)]
    pub max_slots: Option<u64>,

    /// Output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format for tabular commands.
    #[arg(long, global = true, value_parser = ["csv", "jsonl"])]
    pub format: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a scenario file.
    Gen(GenArgs),
    /// Run a single trial and emit its trace as JSONL.
    Run(RunArgs),
    /// Run a grid of trials and emit a per-node summary table.
    Sweep(SweepArgs),
    /// Run verification suites; exits 1 on any violation.
    Verify(VerifyArgs),
    /// Evaluate the two-region adversary bounds for a policy.
    Lowerbound(LowerboundArgs),
    /// Fit a scaling form to a sweep summary.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// uniform_square | clustered | two_region | line
    #[arg(long)]
    pub kind: String,
    /// Node count (two_region uses --dense/--sparse instead).
    #[arg(long, default_value_t = 64)]
    pub n: u64,
    /// Square side in length units (uniform_square; default 8 r_t).
    #[arg(long)]
    pub side: Option<f64>,
    /// Cluster radius in length units (clustered; default r_b / 2).
    #[arg(long)]
    pub cluster_radius: Option<f64>,
    /// Number of well-separated clusters (clustered).
    #[arg(long, default_value_t = 1)]
    pub clusters: u64,
    /// Node spacing (line; default r_b).
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Dense-region size (two_region).
    #[arg(long, default_value_t = 4)]
    pub dense: u64,
    /// Sparse-region size (two_region).
    #[arg(long, default_value_t = DEFAULT_SPARSE)]
    pub sparse: u64,
    /// Protocol transmission radius (two_region).
    #[arg(long, default_value_t = 1.0)]
    pub rt: f64,
    /// Protocol interference radius (two_region).
    #[arg(long, default_value_t = 4.0)]
    pub ri: f64,
    /// all_zero | staggered:<gap> | random_window:<width>
    #[arg(long, default_value = "all_zero")]
    pub wake: String,
    /// none | after:<lifetime>
    #[arg(long, default_value = "none")]
    pub shutdown: String,
    /// Bound on n known to the nodes (default: next power of two).
    #[arg(long)]
    pub n_bound: Option<u32>,
    #[arg(long, default_value_t = AlgoConsts::DEFAULT_DELTA)]
    pub delta: u32,
    #[arg(long, default_value_t = AlgoConsts::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// sinr | protocol:<r_t>,<r_i>
    #[arg(long, default_value = "sinr")]
    pub model: String,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "alg1")]
    pub variant: String,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// uniform_square | clustered
    #[arg(long, default_value = "clustered")]
    pub kind: String,
    #[arg(long, default_value = "alg1")]
    pub variant: String,
    /// Comma-separated n_bound grid.
    #[arg(long, default_value = "256", value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Comma-separated cluster sizes (clustered) or node counts
    /// (uniform_square).
    #[arg(long, default_value = "8,16,32,64,128", value_delimiter = ',')]
    pub nx: Vec<u64>,
    /// Seeds per grid cell.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = AlgoConsts::DEFAULT_DELTA)]
    pub delta: u32,
    #[arg(long, default_value_t = AlgoConsts::DEFAULT_GAMMA)]
    pub gamma: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// delivery | mass | disjoint | unique | calculus | all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 128)]
    pub n: u64,
    #[arg(long, default_value = "alg1")]
    pub variant: String,
}

#[derive(Args, Debug)]
pub struct LowerboundArgs {
    /// Lower-bound instance size (power of two).
    #[arg(long, default_value_t = 256)]
    pub n: u32,
    /// fixed:auto | fixed:<p> | doubling
    #[arg(long, default_value = "fixed:auto")]
    pub policy: String,
    #[arg(long, default_value_t = 4096)]
    pub tmax: u64,
    #[arg(long, default_value_t = DEFAULT_SPARSE)]
    pub sparse: u64,
    /// Also emit the geometric instance as a scenario file.
    #[arg(long)]
    pub emit_instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Summary CSV produced by `sweep`.
    #[arg(long)]
    pub summary: PathBuf,
    /// nlogn | n
    #[arg(long)]
    pub form: String,
    /// Variant the summary was produced with (the CSV does not carry it).
    #[arg(long, default_value = "alg1")]
    pub variant: String,
    /// Also report fallback-count ratios.
    #[arg(long)]
    pub fallbacks: bool,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 2;
        }
    };
    init_thread_pool();
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("LOCALCAST_THREADS") {
        if let Ok(k) = raw.parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn seed_or_default(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            eprintln!("notice: --seed not given, defaulting to 0");
            0
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    // fit is purely deterministic aggregation; everything else draws
    let seed = match cli.command {
        Command::Fit(_) => cli.seed.unwrap_or(0),
        _ => seed_or_default(cli.seed),
    };
    match cli.command {
        Command::Gen(args) => {
            let out = require_out(&cli.out)?;
            let scn = generate_scenario(&gen_spec_from_args(&args, seed)?)?;
            scn.save(&out)?;
            println!("wrote {} nodes to {}", scn.len(), out.display());
            Ok(true)
        }
        Command::Run(args) => {
            let out = require_out(&cli.out)?;
            if matches!(cli.format.as_deref(), Some("csv")) {
                return Err(Error::InvalidConfig("run emits jsonl traces only".into()));
            }
            let scn = Scenario::load(&args.scenario)?;
            let variant: AlgoVariant = args.variant.parse()?;
            let max_slots = cli.max_slots.unwrap_or_else(|| default_max_slots(&scn));
            let trace = sim::run(&scn, variant, seed, max_slots)?;
            let mut buf = Vec::new();
            write_trace_jsonl(&trace, &mut buf)?;
            std::fs::write(&out, buf)?;
            println!(
                "simulated {} slots ({}), wrote {}",
                trace.slots_run,
                if trace.timed_out { "timed out" } else { "all nodes done" },
                out.display()
            );
            Ok(!trace.timed_out)
        }
        Command::Sweep(args) => {
            let out = require_out(&cli.out)?;
            let jsonl = matches!(cli.format.as_deref(), Some("jsonl"));
            sweep(&args, seed, cli.max_slots, &out, jsonl)
        }
        Command::Verify(args) => {
            let trials = cli.trials.unwrap_or(20);
            verify(&args, seed, trials, cli.max_slots)
        }
        Command::Lowerbound(args) => {
            let trials = cli.trials.unwrap_or(0);
            lowerbound_cmd(&args, seed, trials, cli.out.as_deref())
        }
        Command::Fit(args) => fit_cmd(&args, cli.out.as_deref()),
    }
}

fn require_out(out: &Option<PathBuf>) -> Result<PathBuf> {
    out.clone().ok_or_else(|| Error::InvalidConfig("--out is required".into()))
}

// ----------------------------------------------------------------------
// Scenario generation
// ----------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WakeModel {
    AllZero,
    /// Node i wakes at i * gap.
    Staggered(u64),
    /// Wake uniform in [0, width).
    RandomWindow(u64),
}

impl std::str::FromStr for WakeModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "all_zero" {
            return Ok(WakeModel::AllZero);
        }
        if let Some(v) = s.strip_prefix("staggered:") {
            return Ok(WakeModel::Staggered(
                v.parse().map_err(|_| Error::InvalidConfig(format!("bad wake gap {v:?}")))?,
            ));
        }
        if let Some(v) = s.strip_prefix("random_window:") {
            return Ok(WakeModel::RandomWindow(
                v.parse().map_err(|_| Error::InvalidConfig(format!("bad wake window {v:?}")))?,
            ));
        }
        Err(Error::InvalidConfig(format!("unknown wake model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShutdownModel {
    Never,
    /// Shut down `lifetime` slots after waking.
    After(u64),
}

impl std::str::FromStr for ShutdownModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(ShutdownModel::Never);
        }
        if let Some(v) = s.strip_prefix("after:") {
            return Ok(ShutdownModel::After(
                v.parse().map_err(|_| Error::InvalidConfig(format!("bad lifetime {v:?}")))?,
            ));
        }
        Err(Error::InvalidConfig(format!("unknown shutdown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    UniformSquare,
    Clustered,
    TwoRegion,
    Line,
}

impl std::str::FromStr for LayoutKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_square" => Ok(LayoutKind::UniformSquare),
            "clustered" => Ok(LayoutKind::Clustered),
            "two_region" => Ok(LayoutKind::TwoRegion),
            "line" => Ok(LayoutKind::Line),
            other => Err(Error::InvalidConfig(format!("unknown layout {other:?}"))),
        }
    }
}

/// Everything a generator needs; deterministic given `gen_seed`.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub kind: LayoutKind,
    pub n: u64,
    pub side: Option<f64>,
    pub cluster_radius: Option<f64>,
    pub clusters: u64,
    pub spacing: Option<f64>,
    pub dense: u64,
    pub sparse: u64,
    pub rt: f64,
    pub ri: f64,
    pub wake: WakeModel,
    pub shutdown: ShutdownModel,
    pub n_bound: Option<u32>,
    pub delta: u32,
    pub gamma: f64,
    pub model: InterferenceModel,
    pub gen_seed: u64,
}

impl GenSpec {
    pub fn new(kind: LayoutKind, n: u64, gen_seed: u64) -> Self {
        GenSpec {
            kind,
            n,
            side: None,
            cluster_radius: None,
            clusters: 1,
            spacing: None,
            dense: 4,
            sparse: DEFAULT_SPARSE,
            rt: 1.0,
            ri: 4.0,
            wake: WakeModel::AllZero,
            shutdown: ShutdownModel::Never,
            n_bound: None,
            delta: AlgoConsts::DEFAULT_DELTA,
            gamma: AlgoConsts::DEFAULT_GAMMA,
            model: InterferenceModel::Sinr,
            gen_seed,
        }
    }
}

fn gen_spec_from_args(args: &GenArgs, seed: u64) -> Result<GenSpec> {
    Ok(GenSpec {
        kind: args.kind.parse()?,
        n: args.n,
        side: args.side,
        cluster_radius: args.cluster_radius,
        clusters: args.clusters.max(1),
        spacing: args.spacing,
        dense: args.dense,
        sparse: args.sparse,
        rt: args.rt,
        ri: args.ri,
        wake: args.wake.parse()?,
        shutdown: args.shutdown.parse()?,
        n_bound: args.n_bound,
        delta: args.delta,
        gamma: args.gamma,
        model: parse_model(&args.model)?,
        gen_seed: seed,
    })
}

fn parse_model(s: &str) -> Result<InterferenceModel> {
    if s == "sinr" {
        return Ok(InterferenceModel::Sinr);
    }
    if let Some(rest) = s.strip_prefix("protocol:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            let r_t = parts[0].parse().map_err(|_| Error::InvalidConfig("bad r_t".into()))?;
            let r_i = parts[1].parse().map_err(|_| Error::InvalidConfig("bad r_i".into()))?;
            return Ok(InterferenceModel::Protocol { r_t, r_i });
        }
    }
    Err(Error::InvalidConfig(format!("unknown interference model {s:?}")))
}

fn pow2_bound(total: u64) -> u32 {
    (total.max(2) as u32).next_power_of_two()
}

/// Deterministic scenario generation for every layout family.
pub fn generate_scenario(spec: &GenSpec) -> Result<Scenario> {
    let phys = PhysParams::default();
    if spec.kind == LayoutKind::TwoRegion {
        let inst = build_two_region_instance(spec.dense, spec.sparse, spec.rt, spec.ri)?;
        let n_bound = spec.n_bound.unwrap_or_else(|| pow2_bound(inst.m()));
        return inst.to_scenario(n_bound, spec.delta, spec.gamma);
    }
    if spec.n < 1 {
        return Err(Error::InvalidConfig("need at least one node".into()));
    }
    let mut stream = rng::Stream::new(spec.gen_seed, 0);
    let positions: Vec<Point> = match spec.kind {
        LayoutKind::UniformSquare => {
            let side = spec.side.unwrap_or(8.0 * phys.r_t);
            if !(side.is_finite() && side > 0.0) {
                return Err(Error::InvalidConfig("side must be positive".into()));
            }
            (0..spec.n)
                .map(|_| Point::new(stream.next_f64() * side, stream.next_f64() * side))
                .collect()
        }
        LayoutKind::Clustered => {
            let radius = spec.cluster_radius.unwrap_or(phys.r_b / 2.0);
            if !(radius.is_finite() && radius > 0.0) {
                return Err(Error::InvalidConfig("cluster radius must be positive".into()));
            }
            // cluster centers far enough apart that clusters cannot hear
            // each other, and far enough that a lone foreign transmitter
            // cannot spoil the low-power event (quiet radius 4(beta+4) r_b)
            let gap = 6.0 * phys.r_t.max(2.0 * radius);
            let per = spec.n.div_ceil(spec.clusters);
            let mut pts = Vec::with_capacity(spec.n as usize);
            'outer: for c in 0..spec.clusters {
                let center = Point::new(c as f64 * gap, 0.0);
                for _ in 0..per {
                    if pts.len() as u64 == spec.n {
                        break 'outer;
                    }
                    let r = radius * stream.next_f64().sqrt();
                    let a = stream.next_f64() * std::f64::consts::TAU;
                    pts.push(Point::new(center.x + r * a.cos(), center.y + r * a.sin()));
                }
            }
            pts
        }
        LayoutKind::Line => {
            let spacing = spec.spacing.unwrap_or(phys.r_b);
            if !(spacing.is_finite() && spacing > 0.0) {
                return Err(Error::InvalidConfig("spacing must be positive".into()));
            }
            (0..spec.n).map(|i| Point::new(i as f64 * spacing, 0.0)).collect()
        }
        LayoutKind::TwoRegion => unreachable!(),
    };
    let mut wake_stream = rng::Stream::new(spec.gen_seed, 1);
    let nodes: Vec<NodeSpec> = positions
        .into_iter()
        .enumerate()
        .map(|(i, pos)| {
            let wake = match spec.wake {
                WakeModel::AllZero => 0,
                WakeModel::Staggered(gap) => i as u64 * gap,
                WakeModel::RandomWindow(w) => wake_stream.next_below(w.max(1)),
            };
            let shutdown = match spec.shutdown {
                ShutdownModel::Never => None,
                ShutdownModel::After(life) => Some(wake + life.max(1)),
            };
            NodeSpec { id: NodeId(i as u32), pos, wake, shutdown }
        })
        .collect();
    let n_bound = spec.n_bound.unwrap_or_else(|| pow2_bound(spec.n));
    Scenario::new(nodes, phys, spec.model, n_bound, spec.delta, spec.gamma)
}

// ----------------------------------------------------------------------
// Sweep
// ----------------------------------------------------------------------

/// Outcome of one sweep cell trial, kept for sorted emission.
struct TrialResult {
    n: u32,
    nx: u64,
    trial: u64,
    trace: sim::Trace,
}

fn sweep(
    args: &SweepArgs,
    seed: u64,
    max_slots: Option<u64>,
    out: &std::path::Path,
    jsonl: bool,
) -> Result<bool> {
    let kind: LayoutKind = args.kind.parse()?;
    if kind == LayoutKind::TwoRegion || kind == LayoutKind::Line {
        return Err(Error::InvalidConfig("sweep supports uniform_square and clustered".into()));
    }
    let variant: AlgoVariant = args.variant.parse()?;
    if args.n.is_empty() || args.nx.is_empty() || args.seeds == 0 {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    let mut jobs = Vec::new();
    for (ci, &n) in args.n.iter().enumerate() {
        for (xi, &nx) in args.nx.iter().enumerate() {
            for trial in 0..args.seeds {
                jobs.push((ci, xi, n, nx, trial));
            }
        }
    }
    let results: Vec<Result<TrialResult>> = jobs
        .into_par_iter()
        .map(|(ci, xi, n, nx, trial)| {
            let cell = (ci * 1024 + xi) as u64;
            let mut spec = GenSpec::new(kind, nx, rng::bits(seed, cell, trial));
            spec.n_bound = Some(n);
            spec.delta = args.delta;
            spec.gamma = args.gamma;
            if kind == LayoutKind::UniformSquare {
                spec.n = nx;
            }
            let scn = generate_scenario(&spec)?;
            let slots = max_slots.unwrap_or_else(|| default_max_slots(&scn));
            let run_seed = rng::bits(seed.wrapping_add(1), cell, trial);
            let (trace, _) = run_with(&scn, variant, run_seed, slots, false, RunChecks::default())?;
            Ok(TrialResult { n, nx, trial, trace })
        })
        .collect();
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        done.push(r?);
    }
    done.sort_by_key(|r| (r.n, r.nx, r.trial));

    let mut buf: Vec<u8> = Vec::new();
    let mut timeouts = 0usize;
    if jsonl {
        for r in &done {
            if r.trace.timed_out {
                timeouts += 1;
            }
            for s in &r.trace.nodes {
                writeln!(
                    buf,
                    "{{\"n\":{},\"cell_nx\":{},\"trial\":{},\"node\":{},\"N_x\":{},\"wake\":{},\"halt\":{},\"first_success\":{},\"reason\":\"{}\",\"fallbacks\":{}}}",
                    r.n,
                    r.nx,
                    r.trial,
                    s.id,
                    s.n_x,
                    s.wake,
                    s.halt_slot.map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                    s.first_success.map(|v| v.to_string()).unwrap_or_else(|| "null".into()),
                    s.halt_reason.name(),
                    s.fallbacks
                )?;
            }
        }
    } else {
        writeln!(buf, "{SUMMARY_CSV_HEADER}")?;
        for r in &done {
            if r.trace.timed_out {
                timeouts += 1;
            }
            write_summary_csv_rows(&r.trace, r.n, &mut buf)?;
        }
    }
    std::fs::write(out, buf)?;
    println!(
        "swept {} trials ({} timed out), wrote {}",
        done.len(),
        timeouts,
        out.display()
    );
    Ok(timeouts == 0)
}

// ----------------------------------------------------------------------
// Verify
// ----------------------------------------------------------------------

fn verify(args: &VerifyArgs, seed: u64, trials: u64, max_slots: Option<u64>) -> Result<bool> {
    // accepted alias for the delivery scan
    let suite = if args.suite == "lemma-a1" { "delivery" } else { args.suite.as_str() };
    let known = ["delivery", "mass", "disjoint", "unique", "calculus", "all"];
    if !known.contains(&suite) {
        return Err(Error::InvalidConfig(format!("unknown suite {:?}", args.suite)));
    }
    let wants_runs = suite != "calculus";
    let wants_calculus = matches!(suite, "calculus" | "all");
    let variant: AlgoVariant = args.variant.parse()?;
    let phys = PhysParams::default();
    println!("broadcast-ball cover constant: {}", ball_cover_count(&phys));

    let mut ok = true;
    if wants_runs {
        let totals: Violations = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut spec = GenSpec::new(
                    LayoutKind::UniformSquare,
                    args.n,
                    rng::bits(seed, 0xA5, trial),
                );
                spec.n_bound = Some(pow2_bound(args.n));
                let scn = generate_scenario(&spec)?;
                let slots = max_slots.unwrap_or_else(|| default_max_slots(&scn));
                let run_seed = rng::bits(seed.wrapping_add(1), 0xA5, trial);
                let (_, v) = run_with(&scn, variant, run_seed, slots, false, RunChecks::all())?;
                Ok::<Violations, Error>(v)
            })
            .try_reduce(Violations::default, |mut a, b| {
                a.merge(&b);
                Ok(a)
            })?;
        let mut line = |name: &str, count: u64, active: bool| {
            if active {
                println!(
                    "{name}: {} violations over {} slots ({trials} trials) -> {}",
                    count,
                    totals.slots_checked,
                    if count == 0 { "ok" } else { "FAIL" }
                );
                ok &= count == 0;
            }
        };
        line("low-power delivery", totals.delivery_2b, matches!(suite, "delivery" | "all"));
        line("probability mass", totals.mass, matches!(suite, "mass" | "all"));
        line("low-power disjointness", totals.lp_disjoint, matches!(suite, "disjoint" | "all"));
        line("decode uniqueness", totals.decode_unique, matches!(suite, "unique" | "all"));
        if matches!(suite, "mass" | "all") {
            println!("max region mass observed: {:.4}", totals.max_mass);
        }
    }
    if wants_calculus {
        let grid = calculus_claim_violations(100_000);
        println!(
            "calculus claim 1-x >= 16^-x on [0, 2/e]: {grid} violations -> {}",
            if grid == 0 { "ok" } else { "FAIL" }
        );
        let sizes = log_spaced_sizes(1_000_000, 600);
        let peak = single_tx_peak_violations(&sizes);
        println!(
            "single-transmission peak <= 2/e over {} sizes: {peak} violations -> {}",
            sizes.len(),
            if peak == 0 { "ok" } else { "FAIL" }
        );
        ok &= grid == 0 && peak == 0;
    }
    Ok(ok)
}

// ----------------------------------------------------------------------
// Lower bound
// ----------------------------------------------------------------------

fn parse_policy(s: &str, n: u32) -> Result<Box<dyn InputDeterminedPolicy>> {
    if s == "fixed:auto" {
        return Ok(Box::new(FixedPolicy(auto_fixed_p(n)?)));
    }
    if let Some(v) = s.strip_prefix("fixed:") {
        let p: f64 =
            v.parse().map_err(|_| Error::InvalidConfig(format!("bad probability {v:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("probability {p} outside [0,1]")));
        }
        return Ok(Box::new(FixedPolicy(p)));
    }
    if s == "doubling" {
        return Ok(Box::new(DoublingPolicy { delta: AlgoConsts::DEFAULT_DELTA }));
    }
    Err(Error::InvalidConfig(format!("unknown policy {s:?}")))
}

fn lowerbound_cmd(
    args: &LowerboundArgs,
    seed: u64,
    trials: u64,
    out: Option<&std::path::Path>,
) -> Result<bool> {
    let policy = parse_policy(&args.policy, args.n)?;
    let run = run_harness(args.n, policy.as_ref(), args.tmax, args.sparse, trials, seed)?;
    println!(
        "policy {} over {} slots: weights in {} ranges, picked j={} (score {:.4}, uncapped j={} score {:.4}), dense count {}",
        run.policy,
        args.tmax,
        run.partition.num_ranges(),
        run.j,
        run.score,
        run.j_uncapped,
        run.score_uncapped,
        run.delta
    );
    println!(
        "chained exact P = {:.6e}, chained bound = {:.6e}, per-slot bound violations = {}",
        run.final_exact(),
        run.final_bound(),
        run.violations()
    );
    if let Some(z) = run.experiment.final_z_score() {
        println!("monte carlo ({} trials): z = {:.3}", run.experiment.trials, z);
    }
    if let Some(path) = out {
        let mut buf = Vec::new();
        run.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.emit_instance {
        let inst = build_two_region_instance(run.delta, args.sparse, 1.0, 4.0)?;
        let scn = inst.to_scenario(pow2_bound(inst.m()), AlgoConsts::DEFAULT_DELTA, AlgoConsts::DEFAULT_GAMMA)?;
        scn.save(path)?;
        println!("wrote instance to {}", path.display());
    }
    Ok(run.violations() == 0)
}

// ----------------------------------------------------------------------
// Fit
// ----------------------------------------------------------------------

fn fit_cmd(args: &FitArgs, out: Option<&std::path::Path>) -> Result<bool> {
    let form: FitForm = args.form.parse()?;
    let variant: AlgoVariant = args.variant.parse()?;
    let text = std::fs::read_to_string(&args.summary)?;
    let rows = rows_from_summary_csv(&text, variant)?;
    let report = fit_bound(&rows, form)?;
    println!(
        "fit {:?}: a = {:.4}, b = {:.4}, normalized residual = {:.4} over {} cells",
        report.form,
        report.a,
        report.b,
        report.residual,
        report.cells.len()
    );
    if args.fallbacks {
        let fb = fallback_stats(&rows);
        println!(
            "fallback ratios: alg1 max k/N_x = {:.3} ({} rows), alg2 max k log n/(N_x + log n) = {:.3} ({} rows)",
            fb.alg1_max_ratio, fb.alg1_rows, fb.alg2_max_ratio, fb.alg2_rows
        );
    }
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}
