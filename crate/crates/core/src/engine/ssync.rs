//! Synchronous rounds: FSYNC, fair SSYNC and unfair SSYNC.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Policy, Scenario, SchedulerKind};
use super::trace::{entries_to_specs, Line, Outcome, Trace};
use super::{adversary_fraction, apply_move, compute, enabled_set, EngineError};
use crate::algorithms::AlgorithmId;
use crate::geometry::Point;
use crate::model::Configuration;
use crate::rat::Rat;

/// One round: every activated robot looks at `config`, computes and moves.
/// `fractions[k]` is the adversary's fraction for `activated[k]`.
pub fn ssync_round(
    config: &Configuration,
    alg: AlgorithmId,
    activated: &[usize],
    fractions: &[Rat],
    delta: &Rat,
) -> Result<Configuration, EngineError> {
    if activated.is_empty() {
        return Err(EngineError::EmptyActivation);
    }
    let mut sink = Vec::new();
    Ok(round_logged(config, alg, activated, &mut |k, _, _| fractions[k].clone(), delta, &mut sink))
}

fn round_logged(
    config: &Configuration,
    alg: AlgorithmId,
    activated: &[usize],
    fraction: &mut dyn FnMut(usize, &Point, &Point) -> Rat,
    delta: &Rat,
    lines: &mut Vec<Line>,
) -> Configuration {
    let t = config.time;
    let mut next = config.entries.clone();
    lines.push(Line::RoundStart { t, robots: activated.to_vec() });
    for (k, &id) in activated.iter().enumerate() {
        let act = compute(config, alg, id);
        let here = &config.entries[id].0;
        lines.push(Line::Look { t, robot: id });
        lines.push(Line::Compute { t, robot: id, color: act.color, dest: act.destination.clone() });
        next[id].1 = act.color;
        if act.destination != *here {
            let reached = apply_move(here, &act.destination, &fraction(k, here, &act.destination), delta);
            lines.push(Line::MoveBegin { t, robot: id, dest: act.destination.clone(), reached: reached.clone() });
            lines.push(Line::MoveEnd { t, robot: id });
            next[id].0 = reached;
        }
    }
    Configuration::new(t + 1, next)
}

fn nonempty_subset(pool: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut s: Vec<usize> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if s.is_empty() {
        s.push(*pool.choose(rng).expect("non-empty pool"));
    }
    s
}

struct Chooser {
    kind: SchedulerKind,
    policy: Policy,
    bound: u64,
    idle_rounds: Vec<u64>,
    rounds_without_enabled: u64,
    cursor: usize,
}

impl Chooser {
    fn choose(&mut self, n: usize, enabled: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let all: Vec<usize> = (0..n).collect();
        let mut act = match (self.kind, self.policy) {
            (SchedulerKind::Fsync, _) => all.clone(),
            (SchedulerKind::Ssync, Policy::RoundRobin) => {
                self.cursor = (self.cursor + 1) % n;
                vec![self.cursor]
            }
            (SchedulerKind::Ssync, _) => all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
            (_, Policy::RoundRobin) => {
                let next = enabled.iter().copied().find(|&i| i > self.cursor).unwrap_or(enabled[0]);
                self.cursor = next;
                vec![next]
            }
            _ => match rng.gen_range(0..3) {
                0 => vec![*enabled.choose(rng).expect("enabled robots exist")],
                1 => nonempty_subset(enabled, rng),
                _ => nonempty_subset(&all, rng),
            },
        };
        if self.kind == SchedulerKind::Ssync {
            for i in 0..n {
                if self.idle_rounds[i] + 1 >= self.bound && !act.contains(&i) {
                    act.push(i);
                }
            }
            if act.is_empty() {
                act.push(rng.gen_range(0..n));
            }
        }
        let hits_enabled = act.iter().any(|i| enabled.contains(i));
        if self.kind == SchedulerKind::SsyncUnfair && !hits_enabled && self.rounds_without_enabled + 1 >= self.bound {
            act = nonempty_subset(enabled, rng);
        }
        act.sort_unstable();
        act.dedup();
        for i in 0..n {
            self.idle_rounds[i] = if act.contains(&i) { 0 } else { self.idle_rounds[i] + 1 };
        }
        if act.iter().any(|i| enabled.contains(i)) {
            self.rounds_without_enabled = 0;
        } else {
            self.rounds_without_enabled += 1;
        }
        act
    }
}

pub(crate) fn run_ssync(scenario: &Scenario) -> Trace {
    let alg = scenario.algorithm;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.adversary.seed);
    let mut config = scenario.initial_config();
    let n = config.len();
    let mut lines = vec![
        Line::Header { scenario: scenario.clone() },
        Line::Config { t: 0, entries: entries_to_specs(&config.entries) },
    ];
    let mut chooser = Chooser {
        kind: scenario.scheduler,
        policy: scenario.adversary.policy,
        bound: scenario.fairness(),
        idle_rounds: vec![0; n],
        rounds_without_enabled: 0,
        cursor: n - 1,
    };
    let mut events = 0u64;
    loop {
        let t = config.time;
        let enabled = enabled_set(&config, alg);
        if enabled.is_empty() {
            lines.push(Line::End { t, outcome: Outcome::Quiescent, events });
            break;
        }
        if t >= scenario.step_budget {
            lines.push(Line::End { t, outcome: Outcome::BudgetExhausted, events });
            break;
        }
        let act = chooser.choose(n, &enabled, &mut rng);
        let policy = scenario.adversary.policy;
        let delta = &scenario.delta;
        let mut frac = |_: usize, from: &Point, to: &Point| adversary_fraction(policy, &mut rng, from, to, delta);
        let before = lines.len();
        config = round_logged(&config, alg, &act, &mut frac, delta, &mut lines);
        events += lines[before..].iter().filter(|l| l.is_budgeted_event()).count() as u64;
        lines.push(Line::Config { t: config.time, entries: entries_to_specs(&config.entries) });
    }
    Trace { lines }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{is_on_lds, Point};
    use crate::model::Color;

    #[test]
    fn rectangle_contracts_in_one_round() {
        let pts = [(0, 0), (4, 0), (4, 1), (0, 1)];
        let c = Configuration::new(0, pts.iter().map(|&(x, y)| (Point::int(x, y), Color::S)).collect());
        let ones = vec![Rat::one(); 4];
        let next = ssync_round(&c, AlgorithmId::ElectOneLds, &[0, 2], &ones[..2], &Rat::one()).unwrap();
        assert!(is_on_lds(&next.positions()));
        assert!(matches!(
            ssync_round(&c, AlgorithmId::ElectOneLds, &[], &[], &Rat::one()),
            Err(EngineError::EmptyActivation)
        ));
    }

    #[test]
    fn fixpoint_round_changes_nothing() {
        let c = Configuration::new(0, vec![(Point::int(1, 1), Color::A), (Point::int(1, 1), Color::A)]);
        let next = ssync_round(&c, AlgorithmId::LuGather, &[0, 1], &[Rat::one(), Rat::one()], &Rat::one()).unwrap();
        assert_eq!(next.entries, c.entries);
    }
}
