//! Command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input, 2 failure while running.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use pst_core::hamiltonian::{assemble, Basis, HamiltonianRecipe, MAX_FULL_SITES};
use pst_core::propagation::{sample_evolution, Executor, QuantumState, Sampling, Schedule, TransferTrace};
use pst_core::scheduler::{
    candidate_plan, pair_transfer_schedule, relay_plan_with_harmonics, resonant_tau, simulate_relay,
    triad_transfer_schedule, HopCompletion, HopPlan, HopSearch, TRIAD_N_MAX,
};
use pst_core::toggling::{
    average_hamiltonian_zero_order, compile_xy_from_ising, distance_to_scaled_xy, mix_free_sequence,
    propagator_distance,
};
use pst_core::{OperatorMatrix, SpinNetwork, UnitConvention};

use crate::config::{load_network, ConfigError};
use crate::export::{schedule_toml, trace_csv_string, write_operator};
use crate::runspec::load_runspec;

pub const DEFAULT_TAU_MIX: f64 = 3.0e-4;
pub const DEFAULT_BASELINE_DT: f64 = 1.0e-4;
const DUMP_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "pst", version, about = "Selective state transfer in coupled spin networks")]
pub struct Cli {
    /// Network file (TOML).
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Write the Hamiltonians used by the command to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub dump_operator: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Mix/free transfer between a resonant pair; writes the trace.
    Simulate(SimulateArgs),
    /// Uninterrupted XY evolution for comparison.
    Baseline(BaselineArgs),
    /// Print the schedule for one hop.
    Schedule(ScheduleArgs),
    /// Plan and simulate a multi-hop relay.
    Relay(RelayArgs),
    /// Grid search over harmonics and mixing times for one hop.
    Optimize(OptimizeArgs),
    /// Zeroth-order average Hamiltonian of a pulse sequence.
    AverageHamiltonian(AverageArgs),
    /// Execute a recipe file.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleArg {
    PerRepetition,
    PerSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisArg {
    Single,
    Full,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    /// Resonant pair, `A,B` (labels or indices).
    #[arg(long)]
    pub pair: String,
    /// Harmonic of the free period.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub tau_mix: Option<f64>,
    /// Override the resonant free period, seconds.
    #[arg(long)]
    pub tau_free: Option<f64>,
    /// Mix/free cycles [default: one full transfer].
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Initially excited site [default: first of the pair].
    #[arg(long)]
    pub start: Option<String>,
    /// Site whose peak is reported [default: second of the pair].
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum)]
    pub sample: Option<SampleArg>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    /// Trace CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BaselineArgs {
    #[arg(long)]
    pub start: String,
    /// Seconds.
    #[arg(long)]
    pub duration: f64,
    /// Sampling step, seconds [default: 1e-4].
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub pair: String,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub tau_mix: Option<f64>,
    /// Transfer through this middle site with a free period common to both
    /// pairs.
    #[arg(long)]
    pub via: Option<String>,
    /// Write the schedule here instead of standard output.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RelayArgs {
    /// Comma-separated pathway.
    #[arg(long)]
    pub path: String,
    #[arg(long)]
    pub tau_mix: Option<f64>,
    /// Comma-separated harmonic per hop [default: 1 each].
    #[arg(long)]
    pub harmonics: Option<String>,
    /// End each hop at the first maximum, scanning up to this many cycles.
    #[arg(long)]
    pub peak_detect: Option<usize>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the hop schedules (TOML) here.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub pair: String,
    /// Harmonics 1..=n-max are searched.
    #[arg(long)]
    pub n_max: u32,
    /// Comma-separated mixing times [default: 1e-4,2e-4,3e-4].
    #[arg(long)]
    pub tau_mix: Option<String>,
    /// Score the transfer onward to this site.
    #[arg(long)]
    pub relay_to: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceArg {
    /// Two-frame sequence turning the zz coupling into XY.
    IsingToXy,
    /// The mix/free cycle of a pair transfer.
    MixFree,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AverageArgs {
    #[arg(long, value_enum)]
    pub sequence: Option<SequenceArg>,
    /// Seconds [default: 1e-3].
    #[arg(long)]
    pub cycle_time: Option<f64>,
    #[arg(long)]
    pub loops: Option<usize>,
    /// Pair for `mix-free`.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long)]
    pub tau_mix: Option<f64>,
    #[arg(long)]
    pub tau_free: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub recipe: PathBuf,
    /// Overrides the recipe's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<pst_core::Error> for CliError {
    fn from(e: pst_core::Error) -> Self {
        use pst_core::Error::*;
        match e {
            NotHermitian(_) | BasisMismatch { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

type CliResult<T> = Result<T, CliError>;

/// Files a command produces; written only after the command succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(PathBuf, String)>,
    pub operators: Vec<(String, OperatorMatrix)>,
}

impl Outputs {
    fn file(&mut self, path: &Option<PathBuf>, body: String) {
        if let Some(p) = path {
            self.files.push((p.clone(), body));
        }
    }

    fn operator(&mut self, name: &str, op: OperatorMatrix) {
        self.operators.push((name.to_string(), op));
    }
}

fn check_out_dir(path: &Option<PathBuf>) -> CliResult<()> {
    if let Some(p) = path {
        let dir = match p.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        if !dir.is_dir() {
            return Err(bad(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(format!("--{name} must be positive, got {x}")))
    }
}

pub fn site(net: &SpinNetwork, s: &str) -> CliResult<usize> {
    let s = s.trim();
    if let Some(i) = net.index_of(s) {
        return Ok(i);
    }
    match s.parse::<usize>() {
        Ok(i) if i < net.len() => Ok(i),
        _ => Err(bad(format!("unknown site `{s}`"))),
    }
}

fn site_list(net: &SpinNetwork, s: &str) -> CliResult<Vec<usize>> {
    s.split(',').map(|x| site(net, x)).collect()
}

fn pair(net: &SpinNetwork, s: &str) -> CliResult<(usize, usize)> {
    match site_list(net, s)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(bad(format!("expected a pair `A,B`, got `{s}`"))),
    }
}

fn basis_for(net: &SpinNetwork, b: Option<BasisArg>) -> CliResult<Basis> {
    match b.unwrap_or(BasisArg::Single) {
        BasisArg::Single => Ok(Basis::single_excitation(net.len())),
        BasisArg::Full if net.len() > MAX_FULL_SITES => Err(bad(format!(
            "full basis supports at most {MAX_FULL_SITES} sites"
        ))),
        BasisArg::Full => Ok(Basis::full(net.len())),
    }
}

fn fmt_s(t: f64) -> String {
    format!("{t:.6e} s")
}

fn peak_line(out: &mut String, net: &SpinNetwork, trace: &TransferTrace, target: usize) {
    match trace.peak(target) {
        Some((t, p)) => {
            let _ = writeln!(out, "peak P({}) = {p:.9} at t = {}", net.label(target), fmt_s(t));
        }
        None => {
            let _ = writeln!(out, "empty trace");
        }
    }
}

fn off_path_line(out: &mut String, net: &SpinNetwork, trace: &TransferTrace, path: &[usize]) {
    let worst = (0..net.len())
        .filter(|k| !path.contains(k))
        .map(|k| (k, trace.max_on(k)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((k, p)) = worst {
        let _ = writeln!(out, "max off-path probability = {p:.6} on {}", net.label(k));
    }
}

fn plan_lines(out: &mut String, net: &SpinNetwork, plan: &HopPlan) {
    let path: Vec<&str> = plan.path.iter().map(|&k| net.label(k)).collect();
    let harmonics: Vec<String> = plan.harmonics.iter().map(u32::to_string).collect();
    let _ = writeln!(out, "hop {}", path.join(" -> "));
    let _ = writeln!(out, "  tau_free = {} (n = {})", fmt_s(plan.tau_free), harmonics.join(","));
    let _ = writeln!(out, "  tau_mix = {}, cycles = {}", fmt_s(plan.tau_mix), plan.repetitions);
    let _ = writeln!(
        out,
        "  mixing time = {} (budget {})",
        fmt_s(plan.mixing_time()),
        fmt_s(plan.mixing_budget)
    );
    let _ = writeln!(
        out,
        "  predicted fidelity = {:.9} (rounding loss {:.3e})",
        plan.predicted_fidelity,
        plan.rounding_loss()
    );
    let _ = writeln!(out, "  duration = {}", fmt_s(plan.transfer_time()));
    if let Some(w) = plan
        .residuals
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
    {
        let _ = writeln!(
            out,
            "  closest off-target pair {}-{} residual = {:.4}",
            net.label(w.pair.0),
            net.label(w.pair.1),
            w.residual
        );
    }
    for &(a, b) in &plan.degenerate {
        let _ = writeln!(
            out,
            "  warning: {}-{} has equal shifts and cannot be decoupled",
            net.label(a),
            net.label(b)
        );
    }
}

fn schedule_operators(outputs: &mut Outputs, net: &SpinNetwork, basis: Basis, schedule: &Schedule) -> CliResult<()> {
    let mut seen: Vec<&HamiltonianRecipe> = Vec::new();
    for seg in &schedule.segments {
        if seen.contains(&&seg.recipe) {
            continue;
        }
        seen.push(&seg.recipe);
        let name = format!("segment {}", seen.len());
        outputs.operator(&name, assemble(&seg.recipe, net, basis)?);
    }
    Ok(())
}

fn cmd_simulate(net: &SpinNetwork, a: &SimulateArgs, out: &mut String, outputs: &mut Outputs) -> CliResult<()> {
    let (i, j) = pair(net, &a.pair)?;
    let tau_mix = positive("tau-mix", a.tau_mix.unwrap_or(DEFAULT_TAU_MIX))?;
    let start = a.start.as_deref().map(|s| site(net, s)).transpose()?.unwrap_or(i);
    let target = a.target.as_deref().map(|s| site(net, s)).transpose()?.unwrap_or(j);
    let basis = basis_for(net, a.basis)?;
    check_out_dir(&a.out)?;
    let mut plan = pair_transfer_schedule(net, i, j, tau_mix, a.n.unwrap_or(1))?;
    if let Some(tf) = a.tau_free {
        if !(tf >= 0.0 && tf.is_finite()) {
            return Err(bad(format!("--tau-free must be non-negative, got {tf}")));
        }
        plan.tau_free = tf;
    }
    let cycles = a.cycles.unwrap_or(plan.repetitions);
    let schedule = Schedule::mix_free(
        HamiltonianRecipe::xy(),
        tau_mix,
        HamiltonianRecipe::zeeman(),
        plan.tau_free,
        cycles,
    );
    schedule.validate(net)?;
    let sampling = match a.sample {
        Some(SampleArg::PerSegment) => Sampling::PerSegment,
        _ => Sampling::PerRepetition,
    };

    let mut exec = Executor::new(net, basis)?;
    let state = QuantumState::excitation(basis, start);
    let (mut trace, _) = exec.run(&state, &schedule, sampling)?;
    trace.description = format!(
        "simulate {}-{} tau_mix={tau_mix:e} tau_free={:e} cycles={cycles} start={}",
        net.label(i),
        net.label(j),
        plan.tau_free,
        net.label(start)
    );
    trace
        .check(1.0, 1e-9)
        .map_err(|v| CliError::Runtime(format!("trace check failed: {v:?}")))?;

    let _ = writeln!(
        out,
        "pair {}-{}: tau_free = {}, tau_mix = {}, cycles = {cycles}",
        net.label(i),
        net.label(j),
        fmt_s(plan.tau_free),
        fmt_s(tau_mix)
    );
    peak_line(out, net, &trace, target);
    off_path_line(out, net, &trace, &[i, j]);
    schedule_operators(outputs, net, basis, &schedule)?;
    outputs.file(&a.out, trace_csv_string(&trace, net));
    Ok(())
}

fn cmd_baseline(net: &SpinNetwork, a: &BaselineArgs, out: &mut String, outputs: &mut Outputs) -> CliResult<()> {
    let start = site(net, &a.start)?;
    if !(a.duration >= 0.0 && a.duration.is_finite()) {
        return Err(bad(format!("--duration must be non-negative, got {}", a.duration)));
    }
    let dt = positive("dt", a.dt.unwrap_or(DEFAULT_BASELINE_DT))?;
    let basis = basis_for(net, a.basis)?;
    check_out_dir(&a.out)?;
    let state = QuantumState::excitation(basis, start);
    let recipe = HamiltonianRecipe::xy();
    let mut trace = sample_evolution(&state, &recipe, net, a.duration, dt)?;
    trace.description = format!("baseline xy start={} dt={dt:e}", net.label(start));
    trace
        .check(1.0, 1e-9)
        .map_err(|v| CliError::Runtime(format!("trace check failed: {v:?}")))?;
    let _ = writeln!(out, "baseline XY from {} for {}", net.label(start), fmt_s(a.duration));
    for k in 0..net.len() {
        match trace.peak(k) {
            Some((t, p)) => {
                let _ = writeln!(out, "  max P({}) = {p:.6} at {}", net.label(k), fmt_s(t));
            }
            None => {
                let _ = writeln!(out, "  max P({}) = n/a", net.label(k));
            }
        }
    }
    outputs.operator("xy", assemble(&recipe, net, basis)?);
    outputs.file(&a.out, trace_csv_string(&trace, net));
    Ok(())
}

fn cmd_schedule(net: &SpinNetwork, a: &ScheduleArgs, out: &mut String, outputs: &mut Outputs) -> CliResult<()> {
    let (i, j) = pair(net, &a.pair)?;
    let tau_mix = positive("tau-mix", a.tau_mix.unwrap_or(DEFAULT_TAU_MIX))?;
    check_out_dir(&a.schedule_out)?;
    let plan = match &a.via {
        None => pair_transfer_schedule(net, i, j, tau_mix, a.n.unwrap_or(1))?,
        Some(v) => {
            let mid = site(net, v)?;
            triad_transfer_schedule(net, i, mid, j, tau_mix, a.n.unwrap_or(TRIAD_N_MAX))?
        }
    };
    plan_lines(out, net, &plan);
    let dump = schedule_toml(&plan.schedule);
    if a.schedule_out.is_some() {
        outputs.file(&a.schedule_out, dump);
    } else {
        let _ = writeln!(out, "\n{dump}");
    }
    schedule_operators(outputs, net, Basis::single_excitation(net.len()), &plan.schedule)?;
    Ok(())
}

#[derive(Serialize)]
struct RelayDump<'a> {
    hops: Vec<HopDump<'a>>,
}

#[derive(Serialize)]
struct HopDump<'a> {
    from: &'a str,
    to: &'a str,
    schedule: &'a Schedule,
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| bad(format!("--{flag}: cannot parse `{x}`"))))
        .collect()
}

fn cmd_relay(net: &SpinNetwork, a: &RelayArgs, out: &mut String, outputs: &mut Outputs) -> CliResult<()> {
    let path = site_list(net, &a.path)?;
    let tau_mix = positive("tau-mix", a.tau_mix.unwrap_or(DEFAULT_TAU_MIX))?;
    let harmonics: Vec<u32> = match &a.harmonics {
        Some(h) => parse_list("harmonics", h)?,
        None => Vec::new(),
    };
    if harmonics.len() > path.len().saturating_sub(1) {
        return Err(bad("--harmonics has more entries than hops"));
    }
    let basis = basis_for(net, a.basis)?;
    check_out_dir(&a.out)?;
    check_out_dir(&a.schedule_out)?;
    let completion = match a.peak_detect {
        Some(m) if m > 0 => HopCompletion::PeakDetect { max_cycles: m },
        Some(_) => return Err(bad("--peak-detect must be positive")),
        None => HopCompletion::FixedBudget,
    };
    let plan = relay_plan_with_harmonics(net, &path, tau_mix, &harmonics)?;
    let run = simulate_relay(net, &plan, basis, completion)?;
    run.trace
        .check(1.0, 1e-9)
        .map_err(|v| CliError::Runtime(format!("trace check failed: {v:?}")))?;

    for ((hop, r), end) in plan.hops.iter().zip(&run.hops).zip(&run.hop_end_times) {
        let _ = writeln!(
            out,
            "{} -> {}: n = {}, tau_free = {}, cycles = {}, fidelity = {:.6}, ends at {}",
            net.label(hop.source()),
            net.label(hop.destination()),
            hop.harmonics[0],
            fmt_s(hop.tau_free),
            r.cycles,
            r.conditional,
            fmt_s(*end)
        );
    }
    let total = run.hop_end_times.last().copied().unwrap_or(0.0);
    let _ = writeln!(out, "total duration = {}", fmt_s(total));
    let _ = writeln!(out, "end-to-end fidelity = {:.6}", run.end_to_end());
    let _ = writeln!(out, "product of hop fidelities = {:.6}", run.product_of_hops());
    let _ = writeln!(out, "predicted end-to-end = {:.6}", plan.predicted_end_to_end());
    off_path_line(out, net, &run.trace, &path);

    if let Some(first) = plan.hops.first() {
        schedule_operators(outputs, net, basis, &first.schedule)?;
    }
    outputs.file(&a.out, trace_csv_string(&run.trace, net));
    let dump = RelayDump {
        hops: plan
            .hops
            .iter()
            .map(|h| HopDump {
                from: net.label(h.source()),
                to: net.label(h.destination()),
                schedule: &h.schedule,
            })
            .collect(),
    };
    outputs.file(
        &a.schedule_out,
        toml::to_string(&dump).map_err(|e| CliError::Runtime(e.to_string()))?,
    );
    Ok(())
}

fn cmd_optimize(net: &SpinNetwork, a: &OptimizeArgs, out: &mut String) -> CliResult<()> {
    let (i, j) = pair(net, &a.pair)?;
    if a.n_max == 0 {
        return Err(bad("--n-max must be at least 1"));
    }
    let tau_mix: Vec<f64> = match &a.tau_mix {
        Some(s) => parse_list("tau-mix", s)?,
        None => vec![1e-4, 2e-4, 3e-4],
    };
    for &t in &tau_mix {
        positive("tau-mix", t)?;
    }
    let relay_to = a.relay_to.as_deref().map(|s| site(net, s)).transpose()?;
    let search = HopSearch {
        harmonics: 1..=a.n_max,
        tau_mix,
        relay_to,
    };
    if let Some(&(n, t)) = search.points().first() {
        candidate_plan(net, i, j, relay_to, n, t)?;
    }
    let choice = crate::parallel::optimize_hop(net, i, j, &search)?;
    let dest = relay_to.unwrap_or(j);
    let _ = writeln!(out, "{:>4} {:>12} {:>12} {:>7} {:>12} {:>12}", "n", "tau_mix", "tau_free", "cycles", "fidelity", "wall_time");
    for c in &choice.candidates {
        let _ = writeln!(
            out,
            "{:>4} {:>12.4e} {:>12.4e} {:>7} {:>12.9} {:>12.4e}",
            c.harmonic, c.tau_mix, c.tau_free, c.repetitions, c.fidelity, c.wall_time
        );
    }
    let b = &choice.best;
    let _ = writeln!(
        out,
        "best: n = {}, tau_mix = {}, P({}) = {:.9}, wall time = {}",
        b.harmonic,
        fmt_s(b.tau_mix),
        net.label(dest),
        b.fidelity,
        fmt_s(b.wall_time)
    );
    if choice.flat_landscape {
        let _ = writeln!(out, "warning: flat landscape, all candidates score the same");
    }
    Ok(())
}

fn cmd_average(net: &SpinNetwork, a: &AverageArgs, out: &mut String, outputs: &mut Outputs) -> CliResult<()> {
    let cycle = positive("cycle-time", a.cycle_time.unwrap_or(1e-3))?;
    let loops = a.loops.unwrap_or(1);
    if loops == 0 {
        return Err(bad("--loops must be at least 1"));
    }
    match a.sequence.unwrap_or(SequenceArg::IsingToXy) {
        SequenceArg::IsingToXy => {
            if net.len() > MAX_FULL_SITES {
                return Err(bad(format!("ising-to-xy needs the full basis; at most {MAX_FULL_SITES} sites")));
            }
            let compiled = compile_xy_from_ising(net, loops);
            let basis = compiled.sequence.natural_basis(net);
            let avg = average_hamiltonian_zero_order(&compiled.sequence, net, basis)?;
            let _ = writeln!(out, "sequence ising-to-xy, {loops} loop(s), basis dim {}", basis.dim());
            elements(out, &avg);
            let d = distance_to_scaled_xy(&avg, net, compiled.coupling_scale)?;
            let _ = writeln!(out, "max |H_avg - {} H_XY| = {d:.3e}", compiled.coupling_scale);
            let p = propagator_distance(&compiled.sequence, cycle, net)?;
            let _ = writeln!(out, "propagator distance at T = {}: {p:.6e}", fmt_s(cycle));
            outputs.operator("average", avg);
        }
        SequenceArg::MixFree => {
            let s = a.pair.as_deref().ok_or_else(|| bad("mix-free needs --pair"))?;
            let (i, j) = pair(net, s)?;
            let tau_mix = positive("tau-mix", a.tau_mix.unwrap_or(DEFAULT_TAU_MIX))?;
            let tau_free = match a.tau_free {
                Some(t) => positive("tau-free", t)?,
                None => resonant_tau(net, i, j, 1)?.tau_free,
            };
            let seq = mix_free_sequence((i, j), tau_mix, tau_free);
            let basis = Basis::single_excitation(net.len());
            let avg = average_hamiltonian_zero_order(&seq, net, basis)?;
            let _ = writeln!(
                out,
                "sequence mix-free {}-{}, tau_mix = {}, tau_free = {}",
                net.label(i),
                net.label(j),
                fmt_s(tau_mix),
                fmt_s(tau_free)
            );
            elements(out, &avg);
            outputs.operator("average", avg);
        }
    }
    Ok(())
}

fn elements(out: &mut String, op: &OperatorMatrix) {
    let tol = DUMP_TOL * op.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let _ = writeln!(out, "nonzero elements (Hz):");
    for (r, c, z) in op.nonzero(tol) {
        let (re, im) = (UnitConvention::hz(z.re), UnitConvention::hz(z.im));
        if z.im.abs() <= tol {
            let _ = writeln!(out, "  [{r},{c}] = {:.6}", re + 0.0);
        } else {
            let _ = writeln!(out, "  [{r},{c}] = {re:.6} {im:+.6}i");
        }
    }
}

fn require_network(path: &Option<PathBuf>) -> CliResult<SpinNetwork> {
    let p = path.as_ref().ok_or_else(|| bad("--network is required"))?;
    Ok(load_network(p)?)
}

/// Runs one command and returns the report printed on success.
pub fn execute(
    network: &Option<PathBuf>,
    dump_operator: &Option<PathBuf>,
    command: &Command,
) -> CliResult<(String, Outputs)> {
    let mut out = String::new();
    let mut outputs = Outputs::default();
    check_out_dir(dump_operator)?;
    match command {
        Command::Run(r) => {
            let mut spec = load_runspec(&r.recipe).map_err(|e| bad(e.to_string()))?;
            if r.out.is_some() {
                match &mut spec.command {
                    Command::Simulate(a) => a.out = r.out.clone(),
                    Command::Baseline(a) => a.out = r.out.clone(),
                    Command::Relay(a) => a.out = r.out.clone(),
                    Command::Schedule(a) => a.schedule_out = r.out.clone(),
                    _ => return Err(bad("this recipe writes no output file")),
                }
            }
            let dump = dump_operator.clone().or(spec.dump_operator.clone());
            return execute(&Some(spec.network.clone()), &dump, &spec.command);
        }
        cmd => {
            let net = require_network(network)?;
            match cmd {
                Command::Simulate(a) => cmd_simulate(&net, a, &mut out, &mut outputs)?,
                Command::Baseline(a) => cmd_baseline(&net, a, &mut out, &mut outputs)?,
                Command::Schedule(a) => cmd_schedule(&net, a, &mut out, &mut outputs)?,
                Command::Relay(a) => cmd_relay(&net, a, &mut out, &mut outputs)?,
                Command::Optimize(a) => cmd_optimize(&net, a, &mut out)?,
                Command::AverageHamiltonian(a) => cmd_average(&net, a, &mut out, &mut outputs)?,
                Command::Run(_) => unreachable!(),
            }
        }
    }
    if dump_operator.is_none() {
        outputs.operators.clear();
    }
    Ok((out, outputs))
}

fn write_outputs(outputs: &Outputs, dump_operator: &Option<PathBuf>) -> CliResult<Vec<String>> {
    let mut notes = Vec::new();
    let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", p.display()));
    for (path, body) in &outputs.files {
        std::fs::write(path, body).map_err(|e| io(path, e))?;
        notes.push(format!("wrote {}", path.display()));
    }
    if let Some(path) = dump_operator {
        let mut buf = Vec::new();
        for (name, op) in &outputs.operators {
            write_operator(&mut buf, name, op, DUMP_TOL).map_err(|e| io(path, e))?;
        }
        std::fs::write(path, buf).map_err(|e| io(path, e))?;
        notes.push(format!("wrote {}", path.display()));
    }
    Ok(notes)
}

fn effective_dump(cli: &Cli) -> Option<PathBuf> {
    if cli.dump_operator.is_some() {
        return cli.dump_operator.clone();
    }
    if let Command::Run(r) = &cli.command {
        return load_runspec(&r.recipe).ok().and_then(|s| s.dump_operator);
    }
    None
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = execute(&cli.network, &cli.dump_operator, &cli.command)
        .and_then(|(report, outputs)| {
            let notes = write_outputs(&outputs, &effective_dump(&cli))?;
            Ok((report, notes))
        });
    match result {
        Ok((report, notes)) => {
            let _ = write!(stdout, "{report}");
            for n in notes {
                let _ = writeln!(stdout, "{n}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
