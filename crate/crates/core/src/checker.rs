//! Trace-level checks of the correctness properties.
//!
//! Every check reads only a [`Trace`]: configurations come from the logged
//! `Config` lines and algorithm outputs are recomputed where needed.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::algorithms::AlgorithmId;
use crate::engine::{compute, enabled_set, Frame, Line, Trace};
use crate::geometry::{convex_hull, is_on_lds, orient, HullOutcome, Point};
use crate::line_patterns::{pat, ColorConfig, Mark, PatternExpr};
use crate::model::{Color, Configuration, Phase, Snapshot};
use crate::potentials::{lex_cmp, potential_f, potential_g, LexOrder, PotentialVec, RootSum};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub t: u64,
    pub detail: String,
}

/// Result of one check. Merging is associative and order-independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub undecided: Vec<Violation>,
}

impl Report {
    pub fn new(check: &str) -> Report {
        Report { check: check.to_string(), pass: true, violations: Vec::new(), undecided: Vec::new() }
    }

    pub fn violation(&mut self, t: u64, detail: impl Into<String>) {
        self.violations.push(Violation { t, detail: detail.into() });
        self.pass = false;
    }

    pub fn undecided(&mut self, t: u64, detail: impl Into<String>) {
        self.undecided.push(Violation { t, detail: detail.into() });
    }

    pub fn merge(mut self, other: Report) -> Report {
        let mut names: BTreeSet<String> = self.check.split('+').map(String::from).collect();
        names.extend(other.check.split('+').map(String::from));
        self.check = names.into_iter().collect::<Vec<_>>().join("+");
        self.pass &= other.pass;
        self.violations.extend(other.violations);
        self.undecided.extend(other.undecided);
        self.violations.sort();
        self.undecided.sort();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialKind {
    F,
    G,
}

impl PotentialKind {
    pub fn eval(self, c: &Configuration) -> PotentialVec {
        match self {
            PotentialKind::F => potential_f(c),
            PotentialKind::G => potential_g(c),
        }
    }

    pub fn for_algorithm(alg: AlgorithmId) -> Option<PotentialKind> {
        match alg {
            AlgorithmId::ElectOneLds => Some(PotentialKind::F),
            AlgorithmId::LuGather => Some(PotentialKind::G),
            _ => None,
        }
    }
}

fn shape_of(c: &Configuration, kind: PotentialKind) -> String {
    match kind {
        PotentialKind::F => match convex_hull(&c.positions()) {
            HullOutcome::Polygon(h) => h.classification.short_name().to_string(),
            HullOutcome::Collinear => "onLDS".to_string(),
        },
        PotentialKind::G => ColorConfig::from_entries(&c.entries).describe(),
    }
}

fn header_algorithm(trace: &Trace) -> Option<AlgorithmId> {
    trace.scenario().map(|s| s.algorithm)
}

/// Potential decrease across every round in which an enabled robot acted.
pub fn check_monotone(trace: &Trace, kind: PotentialKind) -> Report {
    let mut rep = Report::new(match kind {
        PotentialKind::F => "monotone-f",
        PotentialKind::G => "monotone-g",
    });
    let Some(alg) = header_algorithm(trace) else {
        rep.violation(0, "trace has no header");
        return rep;
    };
    let configs = trace.configs();
    let mut cache: BTreeMap<u64, PotentialVec> = BTreeMap::new();
    let mut rounds = 0;
    for line in &trace.lines {
        let Line::RoundStart { t, robots } = line else { continue };
        rounds += 1;
        let (Some(before), Some(after)) = (configs.get(t), configs.get(&(t + 1))) else {
            rep.violation(*t, "round without surrounding configurations");
            continue;
        };
        let enabled = enabled_set(before, alg);
        if !robots.iter().any(|r| enabled.contains(r)) {
            continue;
        }
        let pb = cache.remove(t).unwrap_or_else(|| kind.eval(before));
        let pa = kind.eval(after);
        match lex_cmp(&pa, &pb) {
            LexOrder::Less => {}
            LexOrder::Undecided => rep.undecided(*t, format!("{pb} vs {pa}")),
            o => rep.violation(
                *t,
                format!(
                    "potential {o:?} after round: {pb} -> {pa} ({} -> {})",
                    shape_of(before, kind),
                    shape_of(after, kind)
                ),
            ),
        }
        cache.insert(t + 1, pa);
    }
    if rounds == 0 && trace.lines.iter().any(|l| matches!(l, Line::Look { .. })) {
        rep.violation(0, "monotonicity is defined for synchronous traces only");
    }
    rep
}

/// One Look-Compute-Move cycle reconstructed from a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub robot: usize,
    pub t_look: u64,
    pub t_compute: Option<u64>,
    pub color: Option<Color>,
    pub dest: Option<Point>,
    pub t_end: Option<u64>,
}

impl Cycle {
    fn moves(&self, origin: &Point) -> bool {
        self.dest.as_ref().is_some_and(|d| d != origin)
    }
}

/// All cycles in the order their Looks occur.
pub fn cycles(trace: &Trace) -> Vec<Cycle> {
    let mut out: Vec<Cycle> = Vec::new();
    let mut open: BTreeMap<usize, usize> = BTreeMap::new();
    for line in &trace.lines {
        match line {
            Line::Look { t, robot } => {
                open.insert(*robot, out.len());
                out.push(Cycle { robot: *robot, t_look: *t, t_compute: None, color: None, dest: None, t_end: None });
            }
            Line::Compute { t, robot, color, dest } => {
                if let Some(&k) = open.get(robot) {
                    out[k].t_compute = Some(*t);
                    out[k].color = Some(*color);
                    out[k].dest = Some(dest.clone());
                }
            }
            Line::MoveEnd { t, robot } => {
                if let Some(&k) = open.get(robot) {
                    out[k].t_end = Some(*t);
                }
            }
            _ => {}
        }
    }
    out
}

fn phase_set(v: &[Color]) -> BTreeSet<Color> {
    v.iter().copied().collect()
}

fn is_simulated(alg: AlgorithmId) -> bool {
    matches!(alg, AlgorithmId::ThreeColor | AlgorithmId::SixColor)
}

/// Times at which the simulation wrapper is in charge.
fn in_simulation(alg: AlgorithmId, c: &Configuration, switched: bool) -> bool {
    alg == AlgorithmId::SixColor || (!switched && !is_on_lds(&c.positions()))
}

/// Inner executions within one color-cycle all observe the same
/// configuration, and pure phase classes follow `S -> M -> E -> S`.
pub fn check_cycle_snapshot(trace: &Trace) -> Report {
    let mut rep = Report::new("cycle");
    let Some(alg) = header_algorithm(trace) else {
        rep.violation(0, "trace has no header");
        return rep;
    };
    if !is_simulated(alg) {
        rep.violation(0, format!("{alg} is not a simulated algorithm"));
        return rep;
    }
    let configs = trace.configs();
    let all_s = phase_set(&[Color::S]);
    let mixed_ok =
        [phase_set(&[Color::S, Color::M]), phase_set(&[Color::M, Color::E]), phase_set(&[Color::S, Color::E])];

    // Epoch numbering of the maximal runs of all-S times; phase order.
    let mut epoch_of: BTreeMap<u64, usize> = BTreeMap::new();
    let mut epoch = 0usize;
    let mut prev_pure: Option<Color> = None;
    let mut prev_all_s = false;
    let mut switched = false;
    for (t, c) in &configs {
        if !in_simulation(alg, c, switched) {
            switched = true;
            continue;
        }
        let class = c.phase_class();
        if class == all_s {
            if !prev_all_s {
                epoch += 1;
            }
            epoch_of.insert(*t, epoch);
        }
        prev_all_s = class == all_s;
        if class.len() == 1 {
            let now = *class.iter().next().expect("one color");
            if let Some(p) = prev_pure {
                let ok =
                    p == now || matches!((p, now), (Color::S, Color::M) | (Color::M, Color::E) | (Color::E, Color::S));
                if !ok {
                    rep.violation(*t, format!("phase class went from all-{p} to all-{now}"));
                }
            }
            prev_pure = Some(now);
        } else if !mixed_ok.contains(&class) {
            let names: Vec<String> = class.iter().map(|c| c.to_string()).collect();
            rep.violation(*t, format!("unexpected phase mix {{{}}}", names.join(",")));
        }
    }

    let mut seen: BTreeMap<usize, (u64, Vec<(Point, Color)>)> = BTreeMap::new();
    let mut ran: HashSet<(usize, usize)> = HashSet::new();
    for cy in cycles(trace) {
        let (Some(tc), Some(color)) = (cy.t_compute, cy.color) else { continue };
        let Some(&ep) = epoch_of.get(&cy.t_look) else { continue };
        if color.phase() != Some(Phase::M) {
            continue;
        }
        let view = configs[&cy.t_look].multiset();
        match seen.get(&ep) {
            Some((t0, v0)) if *v0 != view => rep.violation(
                tc,
                format!(
                    "robot {} observed a different configuration (t={}) than an earlier inner execution (t={t0})",
                    cy.robot, cy.t_look
                ),
            ),
            Some(_) => {}
            None => {
                seen.insert(ep, (cy.t_look, view));
            }
        }
        if !ran.insert((ep, cy.robot)) {
            rep.violation(tc, format!("robot {} ran the inner algorithm twice in one color-cycle", cy.robot));
        }
    }
    rep
}

struct SwitchPatterns {
    plain_s: PatternExpr,
    s_side: PatternExpr,
    e_side: PatternExpr,
}

static SWITCH: LazyLock<SwitchPatterns> = LazyLock::new(|| SwitchPatterns {
    plain_s: pat("S^+"),
    s_side: pat("(S|S[pc->M]|M|M[pm])^+"),
    e_side: pat("(M|M[pm,pc->E]|E)^+"),
});

/// Pending annotations of every robot at time `t`, phase-projected, plus
/// the destinations still to be reached.
fn pending_at(
    configs: &BTreeMap<u64, Configuration>,
    cfg: &Configuration,
    all: &[Cycle],
) -> (Vec<(Point, Mark)>, Vec<(usize, Point)>) {
    let t = cfg.time;
    let mut marks: Vec<(Point, Mark)> =
        cfg.entries.iter().map(|(p, c)| (p.clone(), Mark::plain(c.phase_only()))).collect();
    let mut dests = Vec::new();
    for cy in all.iter().filter(|cy| cy.t_look < t) {
        let origin = &configs[&cy.t_look].entries[cy.robot].0;
        let moves = cy.moves(origin);
        let done = match (cy.t_compute, cy.t_end) {
            (Some(tc), _) if !moves => tc < t,
            (_, Some(te)) => te < t,
            _ => false,
        };
        if done {
            continue;
        }
        let computed = cy.t_compute.is_some_and(|tc| tc < t);
        if !computed {
            let now = cfg.entries[cy.robot].1.phase_only();
            if let Some(nc) = cy.color.map(Color::phase_only).filter(|nc| *nc != now) {
                marks[cy.robot].1.pending_color = Some(nc);
            }
        } else if moves {
            marks[cy.robot].1.pending_move = true;
        }
        if moves {
            dests.push((cy.robot, cy.dest.clone().expect("moving cycle has a destination")));
        }
    }
    (marks, dests)
}

/// At the first time the robots are on one line, the color-configuration
/// has one of the admissible shapes and every outstanding destination lies
/// on that line.
pub fn check_onlds_switch(trace: &Trace) -> Report {
    let mut rep = Report::new("switch");
    let Some(alg) = header_algorithm(trace) else {
        rep.violation(0, "trace has no header");
        return rep;
    };
    if !is_simulated(alg) {
        rep.violation(0, format!("{alg} has no line-forming phase"));
        return rep;
    }
    let configs = trace.configs();
    let Some(cfg) = configs.values().find(|c| is_on_lds(&c.positions())) else {
        return rep;
    };
    let t = cfg.time;
    let all = cycles(trace);
    let (marks, dests) = pending_at(&configs, cfg, &all);
    let cc = ColorConfig::from_marked(&marks);
    let has_m = marks.iter().any(|(_, m)| m.color == Color::M);
    let any_pending = marks.iter().any(|(_, m)| m.pending_move || m.pending_color.is_some());
    let p = &*SWITCH;
    let shape = if t == 0 || (cc.matches(&p.plain_s) && !any_pending) {
        Some(1)
    } else if has_m && cc.matches(&p.s_side) {
        Some(2)
    } else if has_m && cc.matches(&p.e_side) {
        Some(3)
    } else {
        None
    };
    if shape.is_none() {
        rep.violation(t, format!("first line configuration has no admissible shape: {}", cc.describe()));
    }
    let distinct = cfg.distinct_positions();
    if distinct.len() >= 2 {
        let (a, b) = (&distinct[0], &distinct[distinct.len() - 1]);
        for (robot, d) in dests {
            if orient(a, b, &d) != 0 {
                rep.violation(t, format!("robot {robot} is heading off the line to {d:?}"));
            }
        }
    }
    rep
}

/// Segment lengths at each entry into a two-station all-S configuration.
pub fn shrink_loops(trace: &Trace) -> Vec<(u64, RootSum)> {
    let mut out = Vec::new();
    let mut inside = false;
    for (t, c) in trace.configs() {
        let positions = c.positions();
        let hit = is_on_lds(&positions)
            && c.phase_class() == phase_set(&[Color::S])
            && c.distinct_positions().len() == 2
            && c.entries.iter().all(|(_, col)| *col == Color::S);
        if hit && !inside {
            out.push((t, RootSum::sqrt(&ColorConfig::from_entries(&c.entries).dis_sq())));
        }
        inside = hit;
    }
    out
}

/// Each re-entry into the two-station all-S loop finds the segment at least
/// `2 delta` shorter than the previous entry.
pub fn check_shrink(trace: &Trace, delta: &Rat) -> Report {
    let mut rep = Report::new("shrink");
    let two_delta = RootSum::from_rat(delta * &Rat::from_int(2));
    let loops = shrink_loops(trace);
    for w in loops.windows(2) {
        let (_, old) = &w[0];
        let (t, new) = &w[1];
        let mut lhs = new.clone();
        lhs.add(&two_delta);
        match crate::potentials::compare(&lhs, old) {
            LexOrder::Less | LexOrder::Equal => {}
            LexOrder::Undecided => rep.undecided(*t, "segment comparison undecided"),
            LexOrder::Greater => rep.violation(
                *t,
                format!("segment {:.6} is not 2*delta shorter than the previous {:.6}", new.approx(), old.approx()),
            ),
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatherResult {
    pub gathered: bool,
    pub time: Option<u64>,
    pub report: Report,
}

/// Gathering reached and kept until the end of a quiescent run.
pub fn check_gathered(trace: &Trace) -> GatherResult {
    let mut rep = Report::new("gather");
    let configs = trace.configs();
    let mut first: Option<u64> = None;
    for (t, c) in &configs {
        match (c.is_gathered(), first) {
            (true, None) => first = Some(*t),
            (false, Some(t0)) => {
                rep.violation(*t, format!("robots separated again after gathering at t={t0}"));
                first = None;
            }
            _ => {}
        }
    }
    let quiescent = trace.outcome() == Some(crate::engine::Outcome::Quiescent);
    if !rep.pass {
        return GatherResult { gathered: false, time: None, report: rep };
    }
    match first {
        Some(t) if quiescent => GatherResult { gathered: true, time: Some(t), report: rep },
        _ => {
            rep.violation(configs.keys().last().copied().unwrap_or(0), "run ended without gathering");
            GatherResult { gathered: false, time: None, report: rep }
        }
    }
}

/// True when the observer sits exactly midway between the two endpoints of a
/// collinear snapshot. The nearest endpoint is then decided by the fixed
/// left-endpoint tie rule, which a half-turn of the frame does not preserve.
pub fn endpoint_tie(snapshot: &Snapshot) -> bool {
    let pts = snapshot.positions();
    if !is_on_lds(&pts) {
        return false;
    }
    let cc = ColorConfig::from_entries(&snapshot.entries);
    !cc.is_endpoint(&snapshot.own_position) && snapshot.own_position == cc.midpoint()
}

/// The algorithm commutes with every frame: running it on the transformed
/// snapshot and mapping the destination back gives the untransformed output.
pub fn check_equivariance(alg: AlgorithmId, snapshot: &Snapshot, frames: &[Frame]) -> Report {
    let mut rep = Report::new("equivariance");
    let base = alg.compute(snapshot);
    for (k, f) in frames.iter().enumerate() {
        let out = alg.compute(&f.apply_snapshot(snapshot));
        let back = f.inverse_apply(&out.destination);
        if out.color != base.color || back != base.destination {
            rep.violation(
                k as u64,
                format!("frame {k}: got ({}, {back:?}), expected ({}, {:?})", out.color, base.color, base.destination),
            );
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumReport {
    pub report: Report,
    pub nodes: usize,
    pub edges: usize,
    /// States with nobody enabled.
    pub terminals: usize,
    /// States at the depth bound that still had enabled robots.
    pub unfinished: usize,
    /// The node ceiling was hit and exploration stopped early.
    pub aborted: bool,
}

pub const DEFAULT_NODE_CEILING: usize = 100_000;

fn goal_reached(alg: AlgorithmId, c: &Configuration) -> bool {
    match alg {
        AlgorithmId::ElectOneLds => is_on_lds(&c.positions()),
        _ => c.is_gathered(),
    }
}

/// Breadth-first exploration of every activation subset of the enabled
/// robots under rigid synchronous rounds, up to `depth` rounds.
pub fn enumerate_unfair(config: &Configuration, alg: AlgorithmId, depth: usize, ceiling: usize) -> EnumReport {
    let kind = PotentialKind::for_algorithm(alg);
    let mut rep = Report::new("enumerate");
    let mut out = EnumReport {
        report: Report::new("enumerate"),
        nodes: 0,
        edges: 0,
        terminals: 0,
        unfinished: 0,
        aborted: false,
    };
    if depth == 0 {
        return out;
    }
    let start = Configuration::new(0, config.entries.clone());
    let mut seen: HashSet<Vec<(Point, Color)>> = HashSet::new();
    seen.insert(start.entries.clone());
    let mut queue: VecDeque<(Configuration, usize)> = VecDeque::from([(start, 0)]);
    while let Some((c, d)) = queue.pop_front() {
        out.nodes += 1;
        if out.nodes > ceiling {
            out.aborted = true;
            rep.violation(d as u64, format!("node ceiling {ceiling} reached"));
            break;
        }
        let enabled = enabled_set(&c, alg);
        if enabled.is_empty() {
            out.terminals += 1;
            if !goal_reached(alg, &c) {
                rep.violation(d as u64, "terminal state misses the goal");
            }
            continue;
        }
        if d == depth {
            out.unfinished += 1;
            continue;
        }
        let actions: Vec<_> = enabled.iter().map(|&i| (i, compute(&c, alg, i))).collect();
        let pot = kind.map(|k| k.eval(&c));
        for mask in 1u32..(1 << enabled.len()) {
            let mut next = c.entries.clone();
            for (k, (i, a)) in actions.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    next[*i] = (a.destination.clone(), a.color);
                }
            }
            out.edges += 1;
            let nc = Configuration::new(d as u64 + 1, next);
            if let (Some(k), Some(p)) = (kind, &pot) {
                let np = k.eval(&nc);
                match lex_cmp(&np, p) {
                    LexOrder::Less => {}
                    LexOrder::Undecided => rep.undecided(d as u64, format!("{p} vs {np}")),
                    o => rep.violation(d as u64, format!("potential {o:?}: {p} -> {np}")),
                }
            }
            if seen.insert(nc.entries.clone()) {
                queue.push_back((nc, d + 1));
            }
        }
    }
    out.report = rep;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_to_trace, Policy, Scenario, SchedulerKind};

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::int(x, y)).collect()
    }

    #[test]
    fn report_merge_is_order_independent() {
        let mut a = Report::new("x");
        a.violation(3, "b");
        let mut b = Report::new("y");
        b.violation(1, "a");
        let c = Report::new("z");
        let left = a.clone().merge(b.clone()).merge(c.clone());
        let right = c.merge(b.merge(a));
        assert_eq!(left, right);
        assert!(!left.pass);
    }

    #[test]
    fn switch_patterns_parse() {
        let _ = &SWITCH.s_side;
        let _ = &SWITCH.e_side;
    }

    #[test]
    fn rectangle_enumeration() {
        let c =
            Configuration::new(0, pts(&[(0, 0), (4, 0), (4, 1), (0, 1)]).into_iter().map(|p| (p, Color::S)).collect());
        let e = enumerate_unfair(&c, AlgorithmId::ElectOneLds, 6, DEFAULT_NODE_CEILING);
        assert!(e.report.pass, "{:?}", e.report);
        assert_eq!(e.unfinished, 0);
        let e0 = enumerate_unfair(&c, AlgorithmId::ElectOneLds, 0, DEFAULT_NODE_CEILING);
        assert!(e0.report.pass && e0.nodes == 0);
    }

    #[test]
    fn checks_pass_on_an_async_run() {
        let s = Scenario::new(
            pts(&[(0, 0), (8, 0), (3, 5)]),
            AlgorithmId::ThreeColor,
            SchedulerKind::Async,
            Rat::new(1, 2),
        )
        .with_adversary(Policy::Random, 3)
        .with_budget(50_000);
        let t = run_to_trace(&s).unwrap();
        assert!(check_cycle_snapshot(&t).pass, "{:?}", check_cycle_snapshot(&t));
        assert!(check_onlds_switch(&t).pass, "{:?}", check_onlds_switch(&t));
        assert!(check_shrink(&t, &s.delta).pass);
        assert!(check_gathered(&t).gathered);
    }
}
