//! The `gather` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algorithms::AlgorithmId;
use crate::checker::{enumerate_unfair, Report, DEFAULT_NODE_CEILING};
use crate::engine::{run_to_trace, Outcome, Policy, Scenario, SchedulerKind, Trace};
use crate::fuzz::{check_trace, fuzz, CheckKind, FuzzConfig};
use crate::geometry::{convex_hull, HullOutcome};
use crate::line_patterns::classify_line;
use crate::plot::render_svg;
use crate::rat::Rat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "gather", version, about = "Luminous robot gathering simulator and checker")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one scenario and write its trace.
    Run(RunArgs),
    /// Run many random scenarios and check every trace.
    Fuzz(FuzzArgs),
    /// Check an existing trace.
    Check(CheckArgs),
    /// Explore every unfair-SSYNC schedule of a small scenario up to a depth.
    Enumerate(EnumerateArgs),
    /// Render a trace as SVG.
    Plot(PlotArgs),
}

fn parse_alg(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_sched(s: &str) -> Result<SchedulerKind, String> {
    SchedulerKind::parse(s).ok_or_else(|| format!("unknown scheduler `{s}`"))
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown policy `{s}`"))
}

fn parse_check(s: &str) -> Result<Vec<CheckKind>, String> {
    CheckKind::parse(s).ok_or_else(|| format!("unknown check `{s}`"))
}

/// Overrides applied on top of a scenario file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Adversary seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Step budget: rounds for synchronous schedulers, events for ASYNC.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    delta: Option<Rat>,
    #[arg(long, value_parser = parse_sched)]
    scheduler: Option<SchedulerKind>,
    /// Switching algorithm resets every light to the new initial color.
    #[arg(long, value_parser = parse_alg)]
    algorithm: Option<AlgorithmId>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<Policy>,
    #[arg(long)]
    fairness_bound: Option<u64>,
    #[arg(long)]
    move_span_cap: Option<u64>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(v) = self.seed {
            s.adversary.seed = v;
        }
        if let Some(v) = self.steps {
            s.step_budget = v;
        }
        if let Some(v) = &self.delta {
            s.delta = v.clone();
        }
        if let Some(v) = self.scheduler {
            s.scheduler = v;
        }
        if let Some(v) = self.algorithm {
            if v != s.algorithm {
                s.algorithm = v;
                for r in &mut s.robots {
                    r.color = v.initial_color();
                }
            }
        }
        if let Some(v) = self.policy {
            s.adversary.policy = v;
        }
        if self.fairness_bound.is_some() {
            s.fairness_bound = self.fairness_bound;
        }
        if self.move_span_cap.is_some() {
            s.move_span_cap = self.move_span_cap;
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Trace output (JSONL).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, value_parser = parse_alg)]
    algorithm: AlgorithmId,
    /// Defaults to async for the gatherers and ssync-unfair otherwise.
    #[arg(long, value_parser = parse_sched)]
    scheduler: Option<SchedulerKind>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Numerator bound for random coordinates p/q.
    #[arg(long, default_value_t = 20)]
    bound: i64,
    /// Denominator bound for random coordinates p/q.
    #[arg(long, default_value_t = 4)]
    max_den: i64,
    /// Fixed delta; by default each run draws from {1/2, 1}.
    #[arg(long)]
    delta: Option<Rat>,
    #[arg(long, default_value_t = 50_000)]
    steps: u64,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<Policy>,
    #[arg(long)]
    fairness_bound: Option<u64>,
    #[arg(long)]
    move_span_cap: Option<u64>,
    /// Checks to run; repeatable.
    #[arg(long = "check", value_parser = parse_check)]
    checks: Vec<Vec<CheckKind>>,
    /// Full JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the scenario of the run with this seed and exit.
    #[arg(long)]
    emit_scenario: Option<u64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long = "check", value_parser = parse_check)]
    checks: Vec<Vec<CheckKind>>,
    /// Seed for the random frames of the equivariance check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_CEILING)]
    ceiling: usize,
    #[arg(long, value_parser = parse_alg)]
    algorithm: Option<AlgorithmId>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn read_scenario(path: &Path) -> Result<Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Scenario::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_trace(path: &Path) -> Result<Trace, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let t = Trace::from_jsonl(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    t.scenario().ok_or_else(|| format!("{}: no header line", path.display()))?;
    Ok(t)
}

fn write_file(path: &Path, body: &str) -> Result<(), String> {
    fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))
}

fn flatten(checks: Vec<Vec<CheckKind>>) -> Vec<CheckKind> {
    let mut v: Vec<CheckKind> = checks.into_iter().flatten().collect();
    if v.is_empty() {
        v = CheckKind::ALL.to_vec();
    }
    v.sort();
    v.dedup();
    v
}

fn print_report(r: &Report) {
    println!("check {}: {}", r.check, if r.pass { "pass" } else { "FAIL" });
    for v in r.violations.iter().take(20) {
        println!("  t={} {}", v.t, v.detail);
    }
    if r.violations.len() > 20 {
        println!("  ... {} more", r.violations.len() - 20);
    }
    for v in r.undecided.iter().take(5) {
        println!("  undecided t={} {}", v.t, v.detail);
    }
}

fn cmd_run(a: RunArgs) -> i32 {
    let mut s = match read_scenario(&a.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    a.overrides.apply(&mut s);
    if let Err(e) = s.validate() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    let trace = match run_to_trace(&s) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Some(out) = &a.out {
        if let Err(e) = write_file(out, &trace.to_jsonl()) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    let last = trace.final_config().expect("trace has a configuration");
    let colors: Vec<String> = trace.colors_used().iter().map(|c| c.to_string()).collect();
    let shape = match convex_hull(&last.positions()) {
        HullOutcome::Collinear => classify_line(&last).describe(),
        HullOutcome::Polygon(h) => format!("hull {}", h.classification.short_name()),
    };
    let outcome = trace.outcome();
    println!("algorithm: {}", s.algorithm);
    println!("scheduler: {}", s.scheduler.name());
    println!("outcome: {}", if outcome == Some(Outcome::Quiescent) { "quiescent" } else { "budget-exhausted" });
    println!("gathered: {}", last.is_gathered());
    println!("time: {}", last.time);
    println!("events: {}", trace.event_count());
    println!("colors: {}", colors.join(" "));
    println!("final: {shape}");
    if outcome == Some(Outcome::Quiescent) {
        EXIT_OK
    } else {
        EXIT_BUDGET
    }
}

fn cmd_fuzz(a: FuzzArgs) -> i32 {
    let scheduler = a.scheduler.unwrap_or(match a.algorithm {
        AlgorithmId::ElectOneLds | AlgorithmId::LuGather => SchedulerKind::SsyncUnfair,
        _ => SchedulerKind::Async,
    });
    if a.n_min == 0 || a.n_min > a.n_max || a.bound < 1 || a.max_den < 1 {
        eprintln!("error: need 1 <= n-min <= n-max, bound >= 1 and max-den >= 1");
        return EXIT_INPUT;
    }
    let mut cfg = FuzzConfig::new(a.algorithm, scheduler);
    cfg.runs = a.runs as usize;
    cfg.seed = a.seed;
    cfg.n_min = a.n_min;
    cfg.n_max = a.n_max;
    cfg.coord_bound = a.bound;
    cfg.max_den = a.max_den;
    if let Some(d) = a.delta {
        if !d.is_positive() {
            eprintln!("error: delta must be positive");
            return EXIT_INPUT;
        }
        cfg.deltas = vec![d];
    }
    if let Some(p) = a.policy {
        cfg.policies = vec![p];
    }
    cfg.step_budget = a.steps;
    cfg.fairness_bound = a.fairness_bound;
    cfg.move_span_cap = a.move_span_cap;
    cfg.checks = flatten(a.checks);
    if let Some(seed) = a.emit_scenario {
        let s = cfg.scenario(seed);
        if let Err(e) = s.validate() {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
        println!("{}", s.to_json());
        return EXIT_OK;
    }
    if let Err(e) = cfg.scenario(a.seed).validate() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    let rep = fuzz(&cfg);
    if let Some(out) = &a.out {
        let body = serde_json::to_string_pretty(&rep).expect("report serializes");
        if let Err(e) = write_file(out, &body) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    let failing: Vec<_> = rep.failing().collect();
    for r in failing.iter().take(10) {
        println!("run seed={} n={} violations in {}:", r.seed, r.n, r.report.check);
        for v in r.report.violations.iter().take(3) {
            println!("  t={} {}", v.t, v.detail);
        }
    }
    let gathered = rep.runs.iter().filter(|r| r.gathered).count();
    let budget = rep.runs.iter().filter(|r| r.outcome == Some(Outcome::BudgetExhausted)).count();
    let undecided: usize = rep.runs.iter().map(|r| r.report.undecided.len()).sum();
    println!(
        "fuzz {} on {}: runs={} failing={} gathered={} budget-exhausted={} undecided={} checks={}",
        a.algorithm,
        scheduler.name(),
        rep.runs.len(),
        failing.len(),
        gathered,
        budget,
        undecided,
        rep.merged.check
    );
    if failing.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_check(a: CheckArgs) -> i32 {
    let trace = match read_trace(&a.trace) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let rep = check_trace(&trace, &flatten(a.checks), a.seed);
    if let Some(out) = &a.out {
        if let Err(e) = write_file(out, &rep.to_json()) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    print_report(&rep);
    if rep.pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_enumerate(a: EnumerateArgs) -> i32 {
    let mut s = match read_scenario(&a.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    Overrides { algorithm: a.algorithm, ..Default::default() }.apply(&mut s);
    if let Err(e) = s.validate() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    let e = enumerate_unfair(&s.initial_config(), s.algorithm, a.depth, a.ceiling);
    println!(
        "nodes={} edges={} terminals={} unfinished={} aborted={}",
        e.nodes, e.edges, e.terminals, e.unfinished, e.aborted
    );
    print_report(&e.report);
    if e.report.pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_plot(a: PlotArgs) -> i32 {
    let trace = match read_trace(&a.trace) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match write_file(&a.out, &render_svg(&trace)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Fuzz(a) => cmd_fuzz(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Enumerate(a) => cmd_enumerate(a),
        Cmd::Plot(a) => cmd_plot(a),
    }
}
