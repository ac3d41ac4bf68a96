//! Re-derivation of a trace from its events.
//!
//! Every logged configuration is rebuilt from the initial one and the
//! events before it, every Compute is re-run on the configuration its Look
//! saw, and every movement point is checked against the movement rules.

use super::scenario::SchedulerKind;
use super::trace::{specs_to_entries, Line, Trace};
use crate::geometry::{on_segment, Point};
use crate::model::{Color, Configuration};

#[derive(Debug, Clone, PartialEq)]
enum Stage {
    Idle,
    Looked { t_l: u64, view: Configuration },
    Computed { t_c: u64, dest: Point },
    Moving { t_b: u64, origin: Point, reached: Point, ended: Option<u64>, last_progress: Option<Point> },
}

struct RobotReplay {
    pos: Point,
    color: Color,
    pending_color: Option<(Color, u64)>,
    stage: Stage,
}

/// Check that `trace` is consistent with its own scenario.
pub fn verify_replay(trace: &Trace) -> Result<(), String> {
    let scenario = trace.scenario().ok_or("trace has no header")?;
    let alg = scenario.algorithm;
    let asynchronous = scenario.scheduler == SchedulerKind::Async;
    let delta2 = &scenario.delta * &scenario.delta;
    let mut robots: Vec<RobotReplay> = scenario
        .robots
        .iter()
        .map(|r| RobotReplay { pos: r.position(), color: r.color, pending_color: None, stage: Stage::Idle })
        .collect();
    let mut current: Option<Configuration> = None;
    let mut progressed: Vec<Option<u64>> = vec![None; robots.len()];

    for (idx, line) in trace.lines.iter().enumerate() {
        let at = |msg: String| format!("line {}: {msg}", idx + 1);
        if let Some(id) = line.robot() {
            if id >= robots.len() {
                return Err(at(format!("unknown robot {id}")));
            }
        }
        match line {
            Line::Header { .. } | Line::RoundStart { .. } | Line::End { .. } => {}
            Line::Config { t, entries } => {
                let t = *t;
                for (i, r) in robots.iter_mut().enumerate() {
                    if let Some((c, tc)) = r.pending_color {
                        if tc < t {
                            r.color = c;
                            r.pending_color = None;
                        }
                    }
                    if let Stage::Moving { t_b, reached, ended, .. } = &r.stage {
                        match ended {
                            Some(te) if *te < t => {
                                r.pos = reached.clone();
                                r.stage = Stage::Idle;
                            }
                            _ if *t_b < t && progressed[i] != Some(t) => {
                                return Err(at(format!("robot {i} is moving at t={t} without a progress point")));
                            }
                            _ => {}
                        }
                    }
                }
                let derived: Vec<(Point, Color)> = robots.iter().map(|r| (r.pos.clone(), r.color)).collect();
                let logged = specs_to_entries(entries);
                if derived != logged {
                    return Err(at(format!("configuration at t={t} differs from the replayed one")));
                }
                current = Some(Configuration::new(t, logged));
            }
            Line::Look { t, robot } => {
                let cfg = current
                    .as_ref()
                    .filter(|c| c.time == *t)
                    .ok_or_else(|| at("Look without a configuration at its time".into()))?;
                let r = &mut robots[*robot];
                if r.stage != Stage::Idle {
                    return Err(at(format!("robot {robot} looks before finishing its cycle")));
                }
                r.stage = Stage::Looked { t_l: *t, view: cfg.clone() };
            }
            Line::Compute { t, robot, color, dest } => {
                let r = &mut robots[*robot];
                let Stage::Looked { t_l, view } = &r.stage else {
                    return Err(at(format!("robot {robot} computes without looking")));
                };
                if (asynchronous && *t_l >= *t) || *t_l > *t {
                    return Err(at(format!("robot {robot} computes too early")));
                }
                let action = alg.compute(&view.snapshot_for(*robot));
                if action.color != *color || action.destination != *dest {
                    return Err(at(format!("robot {robot}: logged Compute differs from the algorithm's output")));
                }
                if *color != r.color {
                    r.pending_color = Some((*color, *t));
                }
                r.stage = if *dest == r.pos { Stage::Idle } else { Stage::Computed { t_c: *t, dest: dest.clone() } };
            }
            Line::MoveBegin { t, robot, dest, reached } => {
                let r = &mut robots[*robot];
                let Stage::Computed { t_c, dest: computed } = &r.stage else {
                    return Err(at(format!("robot {robot} moves without computing")));
                };
                if (asynchronous && *t_c >= *t) || computed != dest {
                    return Err(at(format!("robot {robot}: MoveBegin does not follow its Compute")));
                }
                if !on_segment(reached, &r.pos, dest) {
                    return Err(at(format!("robot {robot}: stop point off the path")));
                }
                let full = r.pos.dist_sq(dest) <= delta2;
                if (full && reached != dest) || (!full && r.pos.dist_sq(reached) < delta2) {
                    return Err(at(format!("robot {robot}: stop point violates the minimum distance")));
                }
                r.stage = Stage::Moving {
                    t_b: *t,
                    origin: r.pos.clone(),
                    reached: reached.clone(),
                    ended: None,
                    last_progress: None,
                };
            }
            Line::MoveProgress { t, robot, point } => {
                let r = &mut robots[*robot];
                let Stage::Moving { t_b, origin, reached, last_progress, .. } = &mut r.stage else {
                    return Err(at(format!("robot {robot}: progress while not moving")));
                };
                let prev = last_progress.clone().unwrap_or_else(|| origin.clone());
                let advanced = origin.dist_sq(point) > origin.dist_sq(&prev);
                if *t <= *t_b || !on_segment(point, origin, reached) || point == reached || !advanced {
                    return Err(at(format!("robot {robot}: progress point breaks monotone movement")));
                }
                *last_progress = Some(point.clone());
                r.pos = point.clone();
                progressed[*robot] = Some(*t);
            }
            Line::MoveEnd { t, robot } => {
                let r = &mut robots[*robot];
                let Stage::Moving { t_b, ended, .. } = &mut r.stage else {
                    return Err(at(format!("robot {robot} ends a move it never began")));
                };
                if ended.is_some() || (asynchronous && *t <= *t_b) {
                    return Err(at(format!("robot {robot}: MoveEnd needs t_E >= t_B + 1")));
                }
                *ended = Some(*t);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::AlgorithmId;
    use crate::engine::{run_to_trace, Policy, Scenario};
    use crate::rat::Rat;

    fn square(scheduler: SchedulerKind, policy: Policy) -> Scenario {
        let pts = [(0, 0), (6, 0), (6, 6), (0, 6)].iter().map(|&(x, y)| Point::int(x, y)).collect();
        Scenario::new(pts, AlgorithmId::ThreeColor, scheduler, Rat::new(1, 2))
            .with_adversary(policy, 5)
            .with_budget(20_000)
    }

    #[test]
    fn engine_traces_replay() {
        for sched in [SchedulerKind::Async, SchedulerKind::Ssync, SchedulerKind::SsyncUnfair, SchedulerKind::Fsync] {
            let t = run_to_trace(&square(sched, Policy::Random)).unwrap();
            verify_replay(&t).unwrap();
        }
        for policy in [Policy::RoundRobin, Policy::SsyncEmbedded, Policy::TruncateMin, Policy::Rigid] {
            let t = run_to_trace(&square(SchedulerKind::Async, policy)).unwrap();
            verify_replay(&t).unwrap();
        }
    }

    #[test]
    fn tampered_config_is_caught() {
        let mut t = run_to_trace(&square(SchedulerKind::Async, Policy::Random)).unwrap();
        let k = t.lines.iter().rposition(|l| matches!(l, Line::Config { .. })).unwrap();
        if let Line::Config { entries, .. } = &mut t.lines[k] {
            entries[0].x = &entries[0].x + &Rat::one();
        }
        assert!(verify_replay(&t).is_err());
    }
}
