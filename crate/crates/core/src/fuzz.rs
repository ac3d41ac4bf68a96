//! Randomized scenarios, per-run checking and report aggregation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::AlgorithmId;
use crate::checker::{
    check_cycle_snapshot, check_equivariance, check_gathered, check_monotone, check_onlds_switch, check_shrink,
    endpoint_tie, shrink_loops, PotentialKind, Report,
};
use crate::engine::{run_to_trace, verify_replay, Frame, Outcome, Policy, Scenario, SchedulerKind, Trace};
use crate::geometry::{is_on_lds, Point};
use crate::model::Color;
use crate::rat::Rat;

/// Which checks to run on each trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Monotone,
    Cycle,
    Switch,
    Shrink,
    Gather,
    Equivariance,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Monotone,
        CheckKind::Cycle,
        CheckKind::Switch,
        CheckKind::Shrink,
        CheckKind::Gather,
        CheckKind::Equivariance,
    ];

    pub fn parse(s: &str) -> Option<Vec<CheckKind>> {
        Some(match s {
            "all" => CheckKind::ALL.to_vec(),
            "monotone" => vec![CheckKind::Monotone],
            "cycle" => vec![CheckKind::Cycle],
            "switch" => vec![CheckKind::Switch],
            "shrink" => vec![CheckKind::Shrink],
            "gather" => vec![CheckKind::Gather],
            "equivariance" => vec![CheckKind::Equivariance],
            _ => return None,
        })
    }

    /// Whether the check is meaningful for a trace of this scenario.
    pub fn applies(self, s: &Scenario) -> bool {
        let alg = s.algorithm;
        let sync = s.scheduler != SchedulerKind::Async;
        match self {
            CheckKind::Monotone => sync && PotentialKind::for_algorithm(alg).is_some(),
            CheckKind::Cycle | CheckKind::Switch => matches!(alg, AlgorithmId::ThreeColor | AlgorithmId::SixColor),
            CheckKind::Shrink => matches!(alg, AlgorithmId::ThreeColor | AlgorithmId::LuGatherAsync),
            CheckKind::Gather | CheckKind::Equivariance => true,
        }
    }
}

/// Random `p/q` with `|p| <= bound` and `1 <= q <= max_den`.
pub fn random_rat(rng: &mut ChaCha8Rng, bound: i64, max_den: i64) -> Rat {
    let q = rng.gen_range(1..=max_den);
    Rat::new(rng.gen_range(-bound..=bound), q)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, bound: i64, max_den: i64) -> Vec<Point> {
    (0..n).map(|_| Point::new(random_rat(rng, bound, max_den), random_rat(rng, bound, max_den))).collect()
}

/// `n` random points on one random line through the box.
pub fn random_line_points(rng: &mut ChaCha8Rng, n: usize, bound: i64, max_den: i64) -> Vec<Point> {
    let base = Point::new(random_rat(rng, bound / 2, max_den), random_rat(rng, bound / 2, max_den));
    let dir = loop {
        let d = Point::int(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        if d != Point::origin() {
            break d;
        }
    };
    let reach = (bound / 6).max(1);
    (0..n).map(|_| &base + &dir.scale(&random_rat(rng, reach, max_den))).collect()
}

/// A random orientation-preserving rational similarity.
pub fn random_frame(rng: &mut ChaCha8Rng) -> Frame {
    let (m, k) = loop {
        let m: i64 = rng.gen_range(1..=9);
        let k: i64 = rng.gen_range(0..m);
        if k == 0 || num_integer::gcd(m, k) == 1 {
            break (m, k);
        }
    };
    let (mut a, mut b, c) = (m * m - k * k, 2 * m * k, m * m + k * k);
    if rng.gen_bool(0.5) {
        a = -a;
    }
    if rng.gen_bool(0.5) {
        b = -b;
    }
    let scale = Rat::new(rng.gen_range(1..=12), rng.gen_range(1..=12));
    let tr = Point::new(random_rat(rng, 50, 7), random_rat(rng, 50, 7));
    Frame::rotation(a, b, c, scale, tr).expect("Pythagorean rotation keeps orientation")
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzConfig {
    pub algorithm: AlgorithmId,
    pub scheduler: SchedulerKind,
    pub n_min: usize,
    pub n_max: usize,
    pub runs: usize,
    pub seed: u64,
    pub coord_bound: i64,
    pub max_den: i64,
    pub deltas: Vec<Rat>,
    pub policies: Vec<Policy>,
    pub step_budget: u64,
    pub fairness_bound: Option<u64>,
    pub move_span_cap: Option<u64>,
    pub checks: Vec<CheckKind>,
}

impl FuzzConfig {
    pub fn new(algorithm: AlgorithmId, scheduler: SchedulerKind) -> FuzzConfig {
        let policies = match scheduler {
            SchedulerKind::Async => {
                vec![Policy::Random, Policy::Rigid, Policy::TruncateMin, Policy::RoundRobin, Policy::SsyncEmbedded]
            }
            _ => vec![Policy::Random, Policy::Rigid, Policy::TruncateMin, Policy::RoundRobin],
        };
        FuzzConfig {
            algorithm,
            scheduler,
            n_min: 2,
            n_max: 6,
            runs: 100,
            seed: 0,
            coord_bound: 20,
            max_den: 4,
            deltas: vec![Rat::new(1, 2), Rat::one()],
            policies,
            step_budget: 50_000,
            fairness_bound: None,
            move_span_cap: None,
            checks: CheckKind::ALL.to_vec(),
        }
    }

    pub fn scenario(&self, run_seed: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let n = rng.gen_range(self.n_min..=self.n_max);
        let points = if self.algorithm.requires_on_lds() {
            random_line_points(&mut rng, n, self.coord_bound, self.max_den)
        } else {
            random_points(&mut rng, n, self.coord_bound, self.max_den)
        };
        let delta = self.deltas.choose(&mut rng).expect("at least one delta").clone();
        let policy = *self.policies.choose(&mut rng).expect("at least one policy");
        let mut s = Scenario::new(points, self.algorithm, self.scheduler, delta)
            .with_adversary(policy, rng.gen())
            .with_budget(self.step_budget);
        s.fairness_bound = self.fairness_bound;
        s.move_span_cap = self.move_span_cap;
        s
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.runs).map(|_| rng.gen()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub n: usize,
    pub outcome: Option<Outcome>,
    pub gathered: bool,
    pub on_lds: bool,
    pub events: u64,
    pub last_time: u64,
    pub colors: BTreeSet<Color>,
    pub shrink_loops: usize,
    pub report: Report,
}

/// Run every applicable check on `trace`.
pub fn check_trace(trace: &Trace, checks: &[CheckKind], equivariance_seed: u64) -> Report {
    let s = trace.scenario().expect("trace has a header").clone();
    let mut rep = Report::new("replay");
    if let Err(e) = verify_replay(trace) {
        rep.violation(0, e);
    }
    let alphabet = s.algorithm.alphabet();
    if let Some(c) = trace.colors_used().into_iter().find(|c| !alphabet.contains(c)) {
        rep.violation(0, format!("light {c} outside the alphabet"));
    }
    for &k in checks.iter().filter(|k| k.applies(&s)) {
        let r = match k {
            CheckKind::Monotone => check_monotone(trace, PotentialKind::for_algorithm(s.algorithm).expect("applies")),
            CheckKind::Cycle => check_cycle_snapshot(trace),
            CheckKind::Switch => check_onlds_switch(trace),
            CheckKind::Shrink => check_shrink(trace, &s.delta),
            CheckKind::Gather => goal_report(trace),
            CheckKind::Equivariance => {
                let mut rng = ChaCha8Rng::seed_from_u64(equivariance_seed);
                let frames: Vec<Frame> = (0..4).map(|_| random_frame(&mut rng)).collect();
                let init = s.initial_config();
                (0..init.len())
                    .map(|i| init.snapshot_for(i))
                    .filter(|snap| !endpoint_tie(snap))
                    .map(|snap| check_equivariance(s.algorithm, &snap, &frames))
                    .fold(Report::new("equivariance"), Report::merge)
            }
        };
        rep = rep.merge(r);
    }
    rep
}

/// Gathering for gatherers; a line for ElectOneLDS.
fn goal_report(trace: &Trace) -> Report {
    let s = trace.scenario().expect("header");
    if s.algorithm != AlgorithmId::ElectOneLds {
        return check_gathered(trace).report;
    }
    let mut rep = Report::new("gather");
    let last = trace.final_config().expect("configuration");
    if trace.outcome() != Some(Outcome::Quiescent) || !is_on_lds(&last.positions()) {
        rep.violation(last.time, "run ended before the robots were on one line");
    }
    rep
}

pub fn run_one(cfg: &FuzzConfig, seed: u64) -> RunSummary {
    let s = cfg.scenario(seed);
    let trace = match run_to_trace(&s) {
        Ok(t) => t,
        Err(e) => {
            let mut report = Report::new("engine");
            report.violation(0, e.to_string());
            return RunSummary {
                seed,
                n: s.n(),
                outcome: None,
                gathered: false,
                on_lds: false,
                events: 0,
                last_time: 0,
                colors: BTreeSet::new(),
                shrink_loops: 0,
                report,
            };
        }
    };
    summarize(seed, &trace, &cfg.checks)
}

pub fn summarize(seed: u64, trace: &Trace, checks: &[CheckKind]) -> RunSummary {
    let last = trace.final_config().expect("configuration");
    RunSummary {
        seed,
        n: last.len(),
        outcome: trace.outcome(),
        gathered: last.is_gathered(),
        on_lds: is_on_lds(&last.positions()),
        events: trace.event_count(),
        last_time: last.time,
        colors: trace.colors_used(),
        shrink_loops: shrink_loops(trace).len(),
        report: check_trace(trace, checks, seed ^ 0x5eed),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub runs: Vec<RunSummary>,
    pub merged: Report,
}

impl FuzzReport {
    pub fn failing(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(|r| !r.report.pass)
    }
}

/// Execute `cfg.runs` independent runs in parallel. Each run is derived
/// from the master seed and the summaries are sorted by run seed.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let mut runs: Vec<RunSummary> = cfg.run_seeds().into_par_iter().map(|seed| run_one(cfg, seed)).collect();
    runs.sort_by_key(|r| r.seed);
    let merged = runs.iter().map(|r| r.report.clone()).reduce(Report::merge).unwrap_or_else(|| Report::new("fuzz"));
    FuzzReport { config: cfg.clone(), runs, merged }
}
