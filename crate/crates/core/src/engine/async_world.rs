//! The asynchronous model with explicit Look, Compute, MoveBegin and
//! MoveEnd instants on an integer clock.
//!
//! Timing rules enforced here:
//! * a light set by Compute at `t` is visible from `t + 1`;
//! * a mover is seen at its origin at `t_B`, at strictly advancing points
//!   short of its stop at `t_B + 1 ..= t_E`, and at its stop from `t_E + 1`;
//! * `t_L < t_C < t_B < t_E` and the next Look comes after the cycle ends.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::scenario::{Policy, Scenario};
use super::trace::{entries_to_specs, Line, Outcome, Trace};
use super::{adversary_fraction, apply_move, compute, enabled_set, EngineError};
use crate::algorithms::{Action, AlgorithmId};
use crate::geometry::Point;
use crate::model::{Color, Configuration};
use crate::rat::Rat;

/// One adversary decision at the current time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice {
    Look(usize),
    Compute(usize),
    MoveBegin {
        robot: usize,
        fraction: Rat,
    },
    MoveEnd(usize),
    /// Advance the clock. `progress` gives, for some movers, the new
    /// fraction of the way to their stop; other movers advance by a default.
    Tick {
        progress: Vec<(usize, Rat)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IllegalChoice {
    #[error("no robot {0}")]
    UnknownRobot(usize),
    #[error("robot {robot}: phase order: {reason}")]
    PhaseOrder { robot: usize, reason: &'static str },
    #[error("robot {0} already acted at this time")]
    AlreadyActed(usize),
    #[error("robot {robot}: move fraction {fraction} outside (0, 1]")]
    Fraction { robot: usize, fraction: Rat },
    #[error("robot {robot}: progress must strictly advance and stay short of the stop")]
    Monotonicity { robot: usize },
    #[error("robot {robot}: fairness bound {bound} exceeded")]
    Fairness { robot: usize, bound: u64 },
    #[error("robot {robot}: move longer than the span cap {cap}")]
    MoveSpan { robot: usize, cap: u64 },
}

#[derive(Debug, Clone)]
enum Stage {
    Idle { ready_at: u64 },
    Observed { t_l: u64, view: Configuration },
    Computed { t_c: u64, action: Action },
    Moving { t_b: u64, origin: Point, reached: Point, mu: Rat, ended: Option<u64> },
}

#[derive(Debug, Clone)]
struct Robot {
    pos: Point,
    color: Color,
    old_color: Color,
    changed_at: Option<u64>,
    stage: Stage,
    silent: u64,
    acted_at: Option<u64>,
}

impl Robot {
    fn visible_color(&self, t: u64) -> Color {
        match self.changed_at {
            Some(tc) if t <= tc => self.old_color,
            _ => self.color,
        }
    }
}

/// A world under the asynchronous scheduler, driven one choice at a time.
#[derive(Debug, Clone)]
pub struct AsyncWorld {
    alg: AlgorithmId,
    delta: Rat,
    bound: u64,
    cap: u64,
    t: u64,
    robots: Vec<Robot>,
    lines: Vec<Line>,
    events: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Next {
    Look,
    Compute,
    MoveBegin,
    MoveEnd,
}

impl AsyncWorld {
    pub fn new(scenario: &Scenario) -> AsyncWorld {
        let config = scenario.initial_config();
        let robots = config
            .entries
            .iter()
            .map(|(p, c)| Robot {
                pos: p.clone(),
                color: *c,
                old_color: *c,
                changed_at: None,
                stage: Stage::Idle { ready_at: 0 },
                silent: 0,
                acted_at: None,
            })
            .collect();
        AsyncWorld {
            alg: scenario.algorithm,
            delta: scenario.delta.clone(),
            bound: scenario.fairness(),
            cap: scenario.move_span(),
            t: 0,
            robots,
            lines: vec![
                Line::Header { scenario: scenario.clone() },
                Line::Config { t: 0, entries: entries_to_specs(&config.entries) },
            ],
            events: 0,
        }
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// What every robot would observe at the current time.
    pub fn config(&self) -> Configuration {
        Configuration::new(self.t, self.robots.iter().map(|r| (r.pos.clone(), r.visible_color(self.t))).collect())
    }

    pub fn trace(&self) -> Trace {
        Trace { lines: self.lines.clone() }
    }

    /// All robots idle, lights settled, and nobody enabled.
    pub fn quiescent(&self) -> bool {
        let t = self.t;
        let settled = self.robots.iter().all(|r| {
            matches!(r.stage, Stage::Idle { ready_at } if ready_at <= t) && r.changed_at.is_none_or(|tc| tc < t)
        });
        settled && enabled_set(&self.config(), self.alg).is_empty()
    }

    fn next_event(&self, id: usize) -> Option<Next> {
        let r = &self.robots[id];
        if r.acted_at == Some(self.t) {
            return None;
        }
        match &r.stage {
            Stage::Idle { ready_at } if *ready_at <= self.t => Some(Next::Look),
            Stage::Observed { t_l, .. } if *t_l < self.t => Some(Next::Compute),
            Stage::Computed { t_c, .. } if *t_c < self.t => Some(Next::MoveBegin),
            Stage::Moving { t_b, ended: None, .. } if *t_b < self.t => Some(Next::MoveEnd),
            _ => None,
        }
    }

    /// True when the robot must act now to keep the run legal.
    fn must_act(&self, id: usize) -> bool {
        let r = &self.robots[id];
        if r.silent + 1 >= self.bound {
            return true;
        }
        matches!(r.stage, Stage::Moving { t_b, ended: None, .. } if self.t >= t_b + self.cap)
    }

    fn mark_acted(&mut self, id: usize) -> Result<(), IllegalChoice> {
        let r = &mut self.robots[id];
        if r.acted_at == Some(self.t) {
            return Err(IllegalChoice::AlreadyActed(id));
        }
        r.acted_at = Some(self.t);
        r.silent = 0;
        self.events += 1;
        Ok(())
    }

    pub fn apply(&mut self, choice: Choice) -> Result<(), IllegalChoice> {
        let t = self.t;
        // Phase order is checked before the one-event-per-instant rule so
        // that the more specific reason is reported.
        let check = |w: &AsyncWorld, id: usize| {
            if id >= w.robots.len() {
                Err(IllegalChoice::UnknownRobot(id))
            } else {
                Ok(())
            }
        };
        match choice {
            Choice::Look(id) => {
                check(self, id)?;
                match self.robots[id].stage {
                    Stage::Idle { ready_at } if ready_at <= t => {}
                    _ => return Err(IllegalChoice::PhaseOrder { robot: id, reason: "Look needs an idle robot" }),
                }
                let view = self.config();
                self.mark_acted(id)?;
                self.robots[id].stage = Stage::Observed { t_l: t, view };
                self.lines.push(Line::Look { t, robot: id });
            }
            Choice::Compute(id) => {
                check(self, id)?;
                let view = match &self.robots[id].stage {
                    Stage::Observed { t_l, view } if *t_l < t => view.clone(),
                    Stage::Observed { .. } => {
                        return Err(IllegalChoice::PhaseOrder { robot: id, reason: "Compute must come after Look" })
                    }
                    _ => return Err(IllegalChoice::PhaseOrder { robot: id, reason: "Compute needs a Look first" }),
                };
                let action = compute(&view, self.alg, id);
                self.mark_acted(id)?;
                let r = &mut self.robots[id];
                if action.color != r.color {
                    r.old_color = r.color;
                    r.color = action.color;
                    r.changed_at = Some(t);
                }
                self.lines.push(Line::Compute { t, robot: id, color: action.color, dest: action.destination.clone() });
                r.stage = if action.destination == r.pos {
                    Stage::Idle { ready_at: t + 1 }
                } else {
                    Stage::Computed { t_c: t, action }
                };
            }
            Choice::MoveBegin { robot: id, fraction } => {
                check(self, id)?;
                let action = match &self.robots[id].stage {
                    Stage::Computed { t_c, action } if *t_c < t => action.clone(),
                    _ => {
                        return Err(IllegalChoice::PhaseOrder {
                            robot: id,
                            reason: "MoveBegin needs a Compute at an earlier time",
                        })
                    }
                };
                if !fraction.is_positive() || fraction > Rat::one() {
                    return Err(IllegalChoice::Fraction { robot: id, fraction });
                }
                self.mark_acted(id)?;
                let r = &mut self.robots[id];
                let reached = apply_move(&r.pos, &action.destination, &fraction, &self.delta);
                self.lines.push(Line::MoveBegin { t, robot: id, dest: action.destination, reached: reached.clone() });
                r.stage = Stage::Moving { t_b: t, origin: r.pos.clone(), reached, mu: Rat::zero(), ended: None };
            }
            Choice::MoveEnd(id) => {
                check(self, id)?;
                match self.robots[id].stage {
                    Stage::Moving { t_b, ended: None, .. } if t_b < t => {}
                    Stage::Moving { ended: None, .. } => {
                        return Err(IllegalChoice::PhaseOrder { robot: id, reason: "MoveEnd needs t_E >= t_B + 1" })
                    }
                    _ => return Err(IllegalChoice::PhaseOrder { robot: id, reason: "MoveEnd needs a moving robot" }),
                }
                self.mark_acted(id)?;
                if let Stage::Moving { ended, .. } = &mut self.robots[id].stage {
                    *ended = Some(t);
                }
                self.lines.push(Line::MoveEnd { t, robot: id });
            }
            Choice::Tick { progress } => self.tick(progress, |mu| {
                let half = Rat::new(1, 2);
                &mu + &(&(Rat::one() - &mu) * &half)
            })?,
        }
        Ok(())
    }

    fn tick(&mut self, progress: Vec<(usize, Rat)>, default: impl Fn(Rat) -> Rat) -> Result<(), IllegalChoice> {
        let t = self.t;
        for (id, r) in self.robots.iter().enumerate() {
            if r.acted_at != Some(t) && r.silent + 1 >= self.bound {
                return Err(IllegalChoice::Fairness { robot: id, bound: self.bound });
            }
            if let Stage::Moving { t_b, ended: None, .. } = r.stage {
                if t >= t_b + self.cap {
                    return Err(IllegalChoice::MoveSpan { robot: id, cap: self.cap });
                }
            }
        }
        for (id, mu) in &progress {
            let ok = match self.robots.get(*id).map(|r| &r.stage) {
                Some(Stage::Moving { mu: prev, ended: None, .. }) => mu > prev && *mu < Rat::one(),
                _ => false,
            };
            if !ok {
                return Err(IllegalChoice::Monotonicity { robot: *id });
            }
        }
        self.t = t + 1;
        let now = self.t;
        for (id, r) in self.robots.iter_mut().enumerate() {
            if r.acted_at != Some(t) {
                r.silent += 1;
            }
            let landed = match &mut r.stage {
                Stage::Moving { reached, ended: Some(_), .. } => Some(reached.clone()),
                Stage::Moving { origin, reached, mu, ended: None, .. } => {
                    let next = progress.iter().find(|(i, _)| *i == id).map(|(_, m)| m.clone());
                    *mu = next.unwrap_or_else(|| default(mu.clone()));
                    r.pos = origin.lerp(reached, mu);
                    self.lines.push(Line::MoveProgress { t: now, robot: id, point: r.pos.clone() });
                    None
                }
                _ => None,
            };
            if let Some(p) = landed {
                r.pos = p;
                r.stage = Stage::Idle { ready_at: now };
            }
        }
        let config = self.config();
        self.lines.push(Line::Config { t: now, entries: entries_to_specs(&config.entries) });
        Ok(())
    }

    fn finish(mut self, outcome: Outcome) -> Trace {
        self.lines.push(Line::End { t: self.t, outcome, events: self.events });
        Trace { lines: self.lines }
    }
}

struct Driver {
    policy: Policy,
    rng: ChaCha8Rng,
    cursor: usize,
}

impl Driver {
    fn wants(&mut self, w: &AsyncWorld, id: usize, next: Next) -> bool {
        match self.policy {
            Policy::RoundRobin => id == self.cursor,
            Policy::SsyncEmbedded => {
                let phase = w.t % 4;
                matches!(
                    (next, phase),
                    (Next::Look, 0) | (Next::Compute, 1) | (Next::MoveBegin, 2) | (Next::MoveEnd, 3)
                )
            }
            _ => match next {
                Next::MoveEnd => self.rng.gen_bool(1.0 / 3.0),
                _ => self.rng.gen_bool(0.5),
            },
        }
    }

    fn step(&mut self, w: &mut AsyncWorld, budget: u64) -> Result<(), IllegalChoice> {
        for id in 0..w.robots.len() {
            if w.events >= budget {
                return Ok(());
            }
            let Some(next) = w.next_event(id) else { continue };
            if !(w.must_act(id) || self.wants(w, id, next)) {
                continue;
            }
            let choice = match next {
                Next::Look => Choice::Look(id),
                Next::Compute => Choice::Compute(id),
                Next::MoveBegin => {
                    let Stage::Computed { action, .. } = &w.robots[id].stage else {
                        unreachable!("MoveBegin follows Compute")
                    };
                    let fraction = adversary_fraction(
                        self.policy,
                        &mut self.rng,
                        &w.robots[id].pos,
                        &action.destination,
                        &w.delta,
                    );
                    Choice::MoveBegin { robot: id, fraction }
                }
                Next::MoveEnd => Choice::MoveEnd(id),
            };
            w.apply(choice)?;
            if self.policy == Policy::RoundRobin && id == self.cursor {
                if let Stage::Idle { .. } = w.robots[id].stage {
                    self.cursor = (self.cursor + 1) % w.robots.len();
                }
            }
        }
        if w.events >= budget {
            return Ok(());
        }
        let movers: Vec<usize> =
            (0..w.robots.len()).filter(|&i| matches!(w.robots[i].stage, Stage::Moving { ended: None, .. })).collect();
        let mut progress = Vec::new();
        for id in movers {
            if let Stage::Moving { mu, .. } = &w.robots[id].stage {
                let r = Rat::new(self.rng.gen_range(1..=3), 4);
                progress.push((id, mu + &(&(Rat::one() - mu) * &r)));
            }
        }
        w.apply(Choice::Tick { progress })
    }
}

pub(crate) fn run_async(scenario: &Scenario) -> Result<Trace, EngineError> {
    let mut w = AsyncWorld::new(scenario);
    let mut driver = Driver {
        policy: scenario.adversary.policy,
        rng: ChaCha8Rng::seed_from_u64(scenario.adversary.seed),
        cursor: 0,
    };
    loop {
        if w.quiescent() {
            return Ok(w.finish(Outcome::Quiescent));
        }
        if w.events >= scenario.step_budget {
            return Ok(w.finish(Outcome::BudgetExhausted));
        }
        driver.step(&mut w, scenario.step_budget)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SchedulerKind;

    fn world(points: &[(i64, i64)], alg: AlgorithmId) -> AsyncWorld {
        let s = Scenario::new(
            points.iter().map(|&(x, y)| Point::int(x, y)).collect(),
            alg,
            SchedulerKind::Async,
            Rat::one(),
        );
        AsyncWorld::new(&s)
    }

    fn tick() -> Choice {
        Choice::Tick { progress: vec![] }
    }

    #[test]
    fn former_color_visible_at_compute_instant() {
        let mut w = world(&[(0, 0), (4, 0)], AlgorithmId::LuGatherAsync);
        w.apply(Choice::Look(0)).unwrap();
        w.apply(tick()).unwrap();
        w.apply(Choice::Compute(0)).unwrap();
        assert_eq!(w.config().entries[0].1, Color::S);
        w.apply(tick()).unwrap();
        assert_eq!(w.config().entries[0].1, Color::M);
    }

    #[test]
    fn mover_positions_follow_the_rules() {
        let mut w = world(&[(0, 0), (8, 0)], AlgorithmId::LuGatherAsync);
        w.apply(Choice::Look(0)).unwrap();
        w.apply(tick()).unwrap();
        w.apply(Choice::Compute(0)).unwrap();
        w.apply(tick()).unwrap();
        w.apply(Choice::MoveBegin { robot: 0, fraction: Rat::one() }).unwrap();
        assert_eq!(w.config().entries[0].0, Point::int(0, 0));
        let err = w.apply(Choice::MoveEnd(0)).unwrap_err();
        assert!(matches!(err, IllegalChoice::PhaseOrder { .. }));
        w.apply(Choice::Tick { progress: vec![(0, Rat::new(1, 4))] }).unwrap();
        assert_eq!(w.config().entries[0].0, Point::int(1, 0));
        let bad = w.apply(Choice::Tick { progress: vec![(0, Rat::new(1, 8))] });
        assert!(matches!(bad, Err(IllegalChoice::Monotonicity { robot: 0 })));
        w.apply(Choice::Tick { progress: vec![(0, Rat::new(3, 4))] }).unwrap();
        assert_eq!(w.config().entries[0].0, Point::int(3, 0));
        w.apply(Choice::MoveEnd(0)).unwrap();
        assert_eq!(w.config().entries[0].0, Point::int(3, 0));
        w.apply(tick()).unwrap();
        assert_eq!(w.config().entries[0].0, Point::int(4, 0));
    }

    #[test]
    fn starving_a_robot_is_illegal() {
        let mut s = Scenario::new(
            vec![Point::int(0, 0), Point::int(4, 0)],
            AlgorithmId::LuGatherAsync,
            SchedulerKind::Async,
            Rat::one(),
        );
        s.fairness_bound = Some(3);
        let mut w = AsyncWorld::new(&s);
        w.apply(Choice::Look(0)).unwrap();
        w.apply(tick()).unwrap();
        w.apply(Choice::Compute(0)).unwrap();
        w.apply(tick()).unwrap();
        let r = w.apply(tick());
        assert!(matches!(r, Err(IllegalChoice::Fairness { robot: 1, bound: 3 })));
    }

    #[test]
    fn random_run_gathers_two_robots() {
        let s = Scenario::new(
            vec![Point::int(0, 0), Point::int(9, 3)],
            AlgorithmId::ThreeColor,
            SchedulerKind::Async,
            Rat::one(),
        )
        .with_adversary(Policy::Random, 11);
        let trace = run_async(&s).unwrap();
        assert_eq!(trace.outcome(), Some(Outcome::Quiescent));
        assert!(trace.final_config().unwrap().is_gathered());
    }
}
