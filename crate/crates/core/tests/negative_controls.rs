//! Every checker must reject a deliberately corrupted trace.

use gather_core::algorithms::AlgorithmId;
use gather_core::checker::{
    check_cycle_snapshot, check_equivariance, check_gathered, check_monotone, check_onlds_switch, check_shrink,
    endpoint_tie, PotentialKind,
};
use gather_core::engine::{
    run_to_trace, verify_replay, Frame, Line, Outcome, RobotSpec, Scenario, SchedulerKind, Trace,
};
use gather_core::geometry::{is_on_lds, Point};
use gather_core::model::{Color, Configuration};
use gather_core::rat::Rat;

fn pts(v: &[(i64, i64)]) -> Vec<Point> {
    v.iter().map(|&(x, y)| Point::int(x, y)).collect()
}

fn robot(x: i64, y: i64, c: Color) -> RobotSpec {
    RobotSpec { x: Rat::from_int(x), y: Rat::from_int(y), color: c }
}

fn square_async() -> Trace {
    let s = Scenario::new(
        pts(&[(0, 0), (4, 0), (4, 4), (0, 4), (1, 2)]),
        AlgorithmId::ThreeColor,
        SchedulerKind::Async,
        Rat::new(1, 2),
    )
    .with_adversary(Default::default(), 11)
    .with_budget(50_000);
    run_to_trace(&s).unwrap()
}

fn config_index(t: &Trace, pred: impl Fn(&Configuration) -> bool) -> usize {
    let configs = t.configs();
    t.lines
        .iter()
        .position(|l| match l {
            Line::Config { t, .. } => pred(&configs[t]),
            _ => false,
        })
        .expect("matching configuration")
}

fn recolor(t: &mut Trace, idx: usize, f: impl Fn(usize, Color) -> Color) {
    let Line::Config { entries, .. } = &mut t.lines[idx] else { unreachable!() };
    for (i, e) in entries.iter_mut().enumerate() {
        e.color = f(i, e.color);
    }
}

#[test]
fn clean_baseline_passes_every_check() {
    let t = square_async();
    assert!(verify_replay(&t).is_ok());
    assert!(check_cycle_snapshot(&t).pass);
    assert!(check_onlds_switch(&t).pass);
    assert!(check_gathered(&t).gathered);
}

#[test]
fn monotone_flags_a_growing_hull() {
    let s = Scenario::new(
        pts(&[(0, 0), (4, 0), (4, 1), (0, 1)]),
        AlgorithmId::ElectOneLds,
        SchedulerKind::Fsync,
        Rat::one(),
    );
    let mut t = run_to_trace(&s).unwrap();
    assert!(check_monotone(&t, PotentialKind::F).pass);
    let idx = config_index(&t, |c| c.time == 1);
    let Line::Config { entries, .. } = &mut t.lines[idx] else { unreachable!() };
    *entries = vec![robot(0, 0, Color::S), robot(8, 0, Color::S), robot(8, 3, Color::S), robot(0, 3, Color::S)];
    let r = check_monotone(&t, PotentialKind::F);
    assert!(!r.pass);
    assert!(r.violations[0].detail.contains("Greater"), "{:?}", r.violations);
}

#[test]
fn monotone_rejects_async_traces() {
    assert!(!check_monotone(&square_async(), PotentialKind::G).pass);
}

#[test]
fn cycle_flags_a_skipped_phase() {
    let mut t = square_async();
    let idx = config_index(&t, |c| c.phase_class().len() == 1 && c.phase_class().contains(&Color::M));
    recolor(&mut t, idx, |_, _| Color::E);
    let r = check_cycle_snapshot(&t);
    assert!(!r.pass);
    assert!(r.violations.iter().any(|v| v.detail.contains("all-S to all-E")), "{:?}", r.violations);
}

#[test]
fn cycle_flags_a_three_way_mix() {
    let mut t = square_async();
    let idx = config_index(&t, |c| {
        let k = c.phase_class();
        k.len() == 2 && k.contains(&Color::S) && k.contains(&Color::M)
    });
    let configs = t.configs();
    let Line::Config { t: time, .. } = &t.lines[idx] else { unreachable!() };
    let s_robot = configs[time].entries.iter().position(|(_, c)| *c == Color::S).unwrap();
    recolor(&mut t, idx, |i, c| if i == s_robot { Color::E } else { c });
    let r = check_cycle_snapshot(&t);
    assert!(r.violations.iter().any(|v| v.detail.contains("unexpected phase mix")), "{:?}", r.violations);
}

#[test]
fn cycle_flags_inner_runs_seeing_different_configurations() {
    let s = Scenario::new(pts(&[(0, 0), (6, 0), (0, 6)]), AlgorithmId::ThreeColor, SchedulerKind::Async, Rat::one());
    let cfg = |t: u64, x: i64| Line::Config {
        t,
        entries: vec![robot(0, 0, Color::S), robot(6, 0, Color::S), robot(0, x, Color::S)],
    };
    let compute = |robot: usize, dest: Point| Line::Compute { t: 2, robot, color: Color::M, dest };
    let build = |x1: i64| Trace {
        lines: vec![
            Line::Header { scenario: s.clone() },
            cfg(0, 6),
            Line::Look { t: 0, robot: 0 },
            cfg(1, x1),
            Line::Look { t: 1, robot: 1 },
            cfg(2, x1),
            compute(0, Point::int(1, 1)),
            compute(1, Point::int(5, 1)),
        ],
    };
    assert!(check_cycle_snapshot(&build(6)).pass);
    let r = check_cycle_snapshot(&build(7));
    assert!(r.violations.iter().any(|v| v.detail.contains("different configuration")), "{:?}", r.violations);
}

#[test]
fn switch_flags_an_inadmissible_line_shape() {
    let mut t = square_async();
    let idx = config_index(&t, |c| c.time > 0 && is_on_lds(&c.positions()));
    recolor(&mut t, idx, |i, _| if i == 0 { Color::E } else { Color::S });
    let r = check_onlds_switch(&t);
    assert!(r.violations.iter().any(|v| v.detail.contains("admissible shape")), "{:?}", r.violations);
}

#[test]
fn switch_flags_a_destination_off_the_line() {
    let mut t = square_async();
    let configs = t.configs();
    let t_line = configs.values().find(|c| is_on_lds(&c.positions())).unwrap().time;
    // Any cycle still moving at the switch time: bend its destination.
    let k = t
        .lines
        .iter()
        .position(|l| matches!(l, Line::Compute { t, dest, robot, .. } if *t < t_line && *dest != configs[t].entries[*robot].0))
        .unwrap();
    let mut found = false;
    for i in (0..=k).rev().chain(k..t.lines.len()) {
        if let Line::Compute { t: tc, dest, .. } = &mut t.lines[i] {
            if *tc < t_line {
                *dest = Point::int(1000, 1000);
                found = true;
            }
        }
    }
    assert!(found);
    let r = check_onlds_switch(&t);
    assert!(!r.pass, "{:?}", r.violations);
}

#[test]
fn shrink_flags_a_loop_that_did_not_shrink() {
    let s = Scenario::new(pts(&[(0, 0), (10, 0)]), AlgorithmId::LuGatherAsync, SchedulerKind::Async, Rat::one());
    let header = Line::Header { scenario: s };
    let cfg = |t: u64, x: i64, c: Color| Line::Config { t, entries: vec![robot(0, 0, c), robot(x, 0, c)] };
    let good = Trace { lines: vec![header.clone(), cfg(0, 10, Color::S), cfg(1, 10, Color::M), cfg(2, 8, Color::S)] };
    assert!(check_shrink(&good, &Rat::one()).pass);
    let bad = Trace { lines: vec![header, cfg(0, 10, Color::S), cfg(1, 10, Color::M), cfg(2, 9, Color::S)] };
    let r = check_shrink(&bad, &Rat::one());
    assert!(!r.pass);
}

#[test]
fn gather_flags_separation_and_unfinished_runs() {
    let mut t = square_async();
    let end = t.lines.len() - 1;
    let Some(Line::End { t: t_end, .. }) = t.lines.last().cloned() else { panic!("no end line") };
    let Line::Config { entries, .. } = t.lines.iter().rev().find(|l| matches!(l, Line::Config { .. })).unwrap().clone()
    else {
        unreachable!()
    };
    let mut split = entries.clone();
    split[0].x = &split[0].x + &Rat::one();
    t.lines.insert(end, Line::Config { t: t_end + 1, entries: split });
    let g = check_gathered(&t);
    assert!(!g.gathered);
    assert!(g.report.violations.iter().any(|v| v.detail.contains("separated")));

    let mut t = square_async();
    if let Some(Line::End { outcome, .. }) = t.lines.last_mut() {
        *outcome = Outcome::BudgetExhausted;
    }
    assert!(!check_gathered(&t).gathered);
}

#[test]
fn equivariance_flags_the_midpoint_tie_under_a_half_turn() {
    let cfg = Configuration::new(0, pts(&[(0, 0), (2, 0), (4, 0)]).into_iter().map(|p| (p, Color::S)).collect());
    let snap = cfg.snapshot_for(1);
    assert!(endpoint_tie(&snap));
    let half_turn = Frame::rotation(-1, 0, 1, Rat::one(), Point::origin()).unwrap();
    assert!(!check_equivariance(AlgorithmId::LuGatherAsync, &snap, std::slice::from_ref(&half_turn)).pass);
    assert!(check_equivariance(AlgorithmId::LuGatherAsync, &cfg.snapshot_for(0), &[half_turn]).pass);
}

#[test]
fn replay_flags_a_wrong_light() {
    let mut t = square_async();
    let k = t.lines.iter().position(|l| matches!(l, Line::Compute { .. })).unwrap();
    if let Line::Compute { color, .. } = &mut t.lines[k] {
        *color = if *color == Color::E { Color::M } else { Color::E };
    }
    assert!(verify_replay(&t).is_err());
}
