//! The gathering algorithms as pure functions of a snapshot.
//!
//! Every function takes the snapshot of the computing robot (all robots'
//! positions and lights, plus the robot's own position and light) and
//! returns the new light and the destination. Destinations equal to the
//! current position mean "stay".

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, is_on_lds, min_edge_targets, HullClass, HullOutcome, Point};
use crate::line_patterns::{pat, ColorConfig, PatternExpr};
use crate::model::{Color, Phase, Snapshot};

/// Result of a Compute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub color: Color,
    pub destination: Point,
}

impl Action {
    pub fn stay(s: &Snapshot) -> Action {
        Action { color: s.own_light, destination: s.own_position.clone() }
    }

    fn recolor(s: &Snapshot, color: Color) -> Action {
        Action { color, destination: s.own_position.clone() }
    }

    fn go(_s: &Snapshot, color: Color, destination: Point) -> Action {
        Action { color, destination }
    }

    /// True when this action changes the light or the position.
    pub fn is_effective(&self, s: &Snapshot) -> bool {
        self.color != s.own_light || self.destination != s.own_position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgorithmId {
    #[serde(rename = "elect-one-lds")]
    ElectOneLds,
    #[serde(rename = "lu-gather")]
    LuGather,
    #[serde(rename = "six-color")]
    SixColor,
    #[serde(rename = "lu-gather-async")]
    LuGatherAsync,
    #[serde(rename = "three-color")]
    ThreeColor,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm `{0}`")]
pub struct UnknownAlgorithm(pub String);

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::ElectOneLds,
        AlgorithmId::LuGather,
        AlgorithmId::SixColor,
        AlgorithmId::LuGatherAsync,
        AlgorithmId::ThreeColor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::ElectOneLds => "elect-one-lds",
            AlgorithmId::LuGather => "lu-gather",
            AlgorithmId::SixColor => "six-color",
            AlgorithmId::LuGatherAsync => "lu-gather-async",
            AlgorithmId::ThreeColor => "three-color",
        }
    }

    pub fn compute(self, s: &Snapshot) -> Action {
        match self {
            AlgorithmId::ElectOneLds => elect_one_lds(s),
            AlgorithmId::LuGather => lu_gather(s),
            AlgorithmId::SixColor => six_color_gather(s),
            AlgorithmId::LuGatherAsync => lu_gather_in_async(s),
            AlgorithmId::ThreeColor => three_color_gather(s),
        }
    }

    pub fn alphabet(self) -> Vec<Color> {
        match self {
            AlgorithmId::ElectOneLds => vec![Color::S],
            AlgorithmId::LuGather => Color::lu_alphabet(),
            AlgorithmId::SixColor => Color::product_alphabet(),
            AlgorithmId::LuGatherAsync | AlgorithmId::ThreeColor => Color::phase_alphabet(),
        }
    }

    pub fn initial_color(self) -> Color {
        match self {
            AlgorithmId::ElectOneLds => Color::S,
            AlgorithmId::LuGather => Color::A,
            AlgorithmId::SixColor => Color::Pair(Phase::S, crate::model::Lu::A),
            AlgorithmId::LuGatherAsync | AlgorithmId::ThreeColor => Color::S,
        }
    }

    /// Algorithms that assume every snapshot is collinear.
    pub fn requires_on_lds(self) -> bool {
        matches!(self, AlgorithmId::LuGather | AlgorithmId::LuGatherAsync)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// True when the robot owning `s` would change its light or position.
pub fn enabled(alg: AlgorithmId, s: &Snapshot) -> bool {
    alg.compute(s).is_effective(s)
}

/// ElectOneLDS: drives any configuration to one where all robots lie on a
/// line segment. Lights are never changed.
pub fn elect_one_lds(s: &Snapshot) -> Action {
    let positions = s.positions();
    let HullOutcome::Polygon(hull) = convex_hull(&positions) else {
        return Action::stay(s);
    };
    let p = &s.own_position;
    let dest = match hull.classification {
        HullClass::SymNonContractible => {
            let c = hull.center();
            (!hull.is_vertex(p) && *p != c).then_some(c)
        }
        // Only robots strictly inside the hull are moved; robots on edges
        // stay put so the edge-walk term of the potential cannot grow.
        HullClass::AsymNonContractible => hull.strictly_inside(p).then(|| hull.nearest_vertex(p)),
        HullClass::SymContractible => {
            let c = hull.center();
            (*p != c).then_some(c)
        }
        HullClass::AsymContractible => {
            min_edge_targets(&hull, &positions).into_iter().find(|(src, _)| src == p).map(|(_, d)| d)
        }
        HullClass::OnLds => None,
    };
    match dest {
        Some(d) => Action::go(s, s.own_light, d),
        None => Action::stay(s),
    }
}

static AB_M_A: LazyLock<PatternExpr> = LazyLock::new(|| pat("AB_mA"));

/// Two-color gathering from a collinear configuration (synchronous).
pub fn lu_gather(s: &Snapshot) -> Action {
    let cc = ColorConfig::from_entries(&s.entries);
    let p = &s.own_position;
    let class = cc.class();
    let a_only: BTreeSet<Color> = [Color::A].into();
    let b_only: BTreeSet<Color> = [Color::B].into();
    let both: BTreeSet<Color> = [Color::A, Color::B].into();
    if class == a_only {
        match cc.len() {
            1 => Action::stay(s),
            2 => Action::go(s, Color::B, cc.midpoint()),
            _ if cc.is_endpoint(p) => Action::stay(s),
            _ => Action::go(s, Color::A, cc.nearest_endpoint(p)),
        }
    } else if class == b_only {
        if cc.len() >= 2 && cc.is_endpoint(p) {
            Action::recolor(s, Color::A)
        } else {
            Action::stay(s)
        }
    } else if class == both {
        let single_a = cc.count(Color::A) == 1;
        if s.own_light == Color::A {
            if !single_a && cc.matches(&AB_M_A) {
                Action::go(s, Color::B, cc.midpoint())
            } else {
                Action::stay(s)
            }
        } else if single_a {
            let pa = cc.stations_with(Color::A).remove(0);
            Action::go(s, Color::B, pa)
        } else {
            Action::go(s, Color::B, cc.midpoint())
        }
    } else {
        Action::stay(s)
    }
}

fn inner_view(c: Color) -> Color {
    match c {
        Color::Pair(_, l) => Color::Lu(l),
        _ => Color::S,
    }
}

fn with_inner(own: Color, phase: Phase, inner: Color) -> Color {
    match (own, inner) {
        (Color::Pair(_, _), Color::Lu(l)) => Color::Pair(phase, l),
        _ => own.with_phase(phase),
    }
}

/// Simulation wrapper: runs `inner` once per color-cycle
/// `forall S -> forall M -> forall E -> forall S`.
pub fn sim_for_unfair(inner: impl Fn(&Snapshot) -> Action, s: &Snapshot) -> Action {
    let class = s.phase_class();
    let set = |v: &[Color]| -> BTreeSet<Color> { v.iter().copied().collect() };
    let own = s.own_light;
    if class == set(&[Color::S]) {
        let view = s.map_colors(inner_view);
        let act = inner(&view);
        if act.is_effective(&view) {
            Action::go(s, with_inner(own, Phase::M, act.color), act.destination)
        } else {
            Action::stay(s)
        }
    } else if class == set(&[Color::S, Color::M]) {
        Action::recolor(s, own.with_phase(Phase::M))
    } else if class == set(&[Color::M]) || class == set(&[Color::M, Color::E]) {
        Action::recolor(s, own.with_phase(Phase::E))
    } else if class == set(&[Color::E]) || class == set(&[Color::S, Color::E]) {
        Action::recolor(s, own.with_phase(Phase::S))
    } else {
        Action::stay(s)
    }
}

fn six_color_inner(s: &Snapshot) -> Action {
    if is_on_lds(&s.positions()) {
        lu_gather(s)
    } else {
        elect_one_lds(s)
    }
}

/// Six-color gathering: the simulation wrapper around ElectOneLDS followed
/// by the two-color line gatherer.
pub fn six_color_gather(s: &Snapshot) -> Action {
    sim_for_unfair(six_color_inner, s)
}

/// Three-color gathering: simulated ElectOneLDS until the robots are on a
/// line, then the asynchronous line gatherer.
pub fn three_color_gather(s: &Snapshot) -> Action {
    if is_on_lds(&s.positions()) {
        lu_gather_in_async(s)
    } else {
        sim_for_unfair(elect_one_lds, s)
    }
}

struct AsyncPatterns {
    s_m_e_e: PatternExpr,
    s_e_s: PatternExpr,
    sm_e_sm: PatternExpr,
}

static ASYNC_PATTERNS: LazyLock<AsyncPatterns> = LazyLock::new(|| AsyncPatterns {
    s_m_e_e: pat("(S|E)E_m(S|E)"),
    s_e_s: pat("SE_mS"),
    sm_e_sm: pat("(S|M)E_m(S|M)"),
});

/// Three-color gathering from a collinear configuration (asynchronous).
pub fn lu_gather_in_async(s: &Snapshot) -> Action {
    let cc = ColorConfig::from_entries(&s.entries);
    let pats = &*ASYNC_PATTERNS;
    let p = &s.own_position;
    let l = s.own_light;
    let at_end = cc.is_endpoint(p);
    let stations = cc.len();
    let class = cc.class();
    let set = |v: &[Color]| -> BTreeSet<Color> { v.iter().copied().collect() };
    let (sc, mc, ec) = (Color::S, Color::M, Color::E);

    if class == set(&[sc]) {
        if stations == 2 {
            return Action::go(s, mc, cc.midpoint());
        }
        if stations >= 3 && !at_end {
            return Action::go(s, l, cc.nearest_endpoint(p));
        }
        return Action::stay(s);
    }
    if class == set(&[sc, mc]) {
        // M^+(S|M)M^*, M^*(S|M)M^+ or (S|M): exactly one station holds S.
        if cc.count(sc) == 1 {
            return if l == sc { Action::recolor(s, ec) } else { Action::stay(s) };
        }
        let ends_have_s = cc.stations[0].has(sc) && cc.stations[stations - 1].has(sc);
        if ends_have_s && cc.count(sc) == 2 && l == sc {
            return Action::go(s, mc, cc.midpoint());
        }
        if cc.count(sc) >= 2 && l == sc {
            return Action::recolor(s, mc);
        }
        return Action::stay(s);
    }
    if class == set(&[sc, ec]) {
        if stations == 2 {
            return if l == ec { Action::recolor(s, sc) } else { Action::stay(s) };
        }
        if cc.matches(&pats.s_m_e_e) && cc.count(ec) > 1 && at_end && l == ec {
            return Action::recolor(s, sc);
        }
        if cc.matches(&pats.s_e_s) && l == sc {
            return Action::recolor(s, mc);
        }
        return Action::stay(s);
    }
    if class == set(&[mc]) {
        return Action::recolor(s, ec);
    }
    if class == set(&[mc, ec]) {
        // M^+(E|M)M^* or M^*(E|M)M^+: a single E station among several.
        if cc.count(ec) == 1 && stations >= 2 {
            let pe = cc.stations_with(ec).remove(0);
            return if *p != pe { Action::go(s, l, pe) } else { Action::stay(s) };
        }
        return if l == mc { Action::recolor(s, ec) } else { Action::stay(s) };
    }
    if class == set(&[ec]) {
        return match stations {
            1 => Action::stay(s),
            2 => Action::recolor(s, sc),
            3 if cc.has_exact_midpoint => {
                if at_end {
                    Action::recolor(s, sc)
                } else {
                    Action::stay(s)
                }
            }
            _ if !at_end => Action::go(s, l, cc.midpoint()),
            _ => Action::stay(s),
        };
    }
    if class == set(&[sc, mc, ec]) {
        // M^+(S|M|E)M^*, M^*(S|M|E)M^+ or (S|M|E): one station not purely M.
        let impure = cc.stations.iter().filter(|st| !st.only(mc)).count();
        if impure == 1 && l == sc {
            return Action::recolor(s, ec);
        }
        if cc.matches(&pats.sm_e_sm) && at_end && l == sc {
            return Action::recolor(s, mc);
        }
        return Action::stay(s);
    }
    Action::stay(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Configuration, Lu};
    use crate::rat::Rat;

    fn snap(entries: &[((i64, i64), Color)], me: usize) -> Snapshot {
        let e: Vec<(Point, Color)> = entries.iter().map(|&((x, y), c)| (Point::int(x, y), c)).collect();
        Configuration::new(0, e).snapshot_for(me)
    }

    fn pt(x: i64, y: i64) -> Point {
        Point::int(x, y)
    }

    #[test]
    fn elect_square_with_edge_robot_goes_to_center() {
        let s = snap(
            &[((0, 0), Color::S), ((2, 0), Color::S), ((2, 2), Color::S), ((0, 2), Color::S), ((1, 0), Color::S)],
            4,
        );
        assert_eq!(elect_one_lds(&s).destination, pt(1, 1));
        // A vertex robot of a non-contractible symmetric hull stays.
        assert_eq!(
            elect_one_lds(&snap(
                &[((0, 0), Color::S), ((2, 0), Color::S), ((2, 2), Color::S), ((0, 2), Color::S), ((1, 0), Color::S)],
                0,
            ))
            .destination,
            pt(0, 0)
        );
    }

    #[test]
    fn elect_contractible_square_vertex_goes_to_center() {
        let s = snap(&[((0, 0), Color::S), ((2, 0), Color::S), ((2, 2), Color::S), ((0, 2), Color::S)], 2);
        let a = elect_one_lds(&s);
        assert_eq!(a.destination, pt(1, 1));
        assert_eq!(a.color, Color::S);
    }

    #[test]
    fn elect_rectangle_contracts_min_edges() {
        let e = [((0, 0), Color::S), ((4, 0), Color::S), ((4, 1), Color::S), ((0, 1), Color::S)];
        assert_eq!(elect_one_lds(&snap(&e, 0)).destination, pt(0, 1));
        assert_eq!(elect_one_lds(&snap(&e, 2)).destination, pt(4, 0));
        assert_eq!(elect_one_lds(&snap(&e, 1)).destination, pt(4, 0));
    }

    #[test]
    fn elect_interior_robot_goes_to_nearest_vertex() {
        let e = vec![
            (pt(0, 0), Color::S),
            (pt(4, 0), Color::S),
            (pt(4, 1), Color::S),
            (pt(0, 1), Color::S),
            (Point::new(Rat::from_int(2), Rat::new(1, 2)), Color::S),
        ];
        let s = Configuration::new(0, e).snapshot_for(4);
        // All four vertices are at equal distance; the tie rule picks one.
        let d = elect_one_lds(&s).destination;
        assert!([pt(0, 0), pt(4, 0), pt(4, 1), pt(0, 1)].contains(&d));
    }

    #[test]
    fn elect_on_lds_is_a_fixpoint() {
        let s = snap(&[((0, 0), Color::S), ((3, 0), Color::S), ((7, 0), Color::S)], 1);
        assert!(!enabled(AlgorithmId::ElectOneLds, &s));
    }

    #[test]
    fn lu_gather_cases() {
        let a = lu_gather(&snap(&[((0, 0), Color::A), ((2, 0), Color::A)], 0));
        assert_eq!(a, Action { color: Color::B, destination: pt(1, 0) });

        let s = snap(&[((0, 0), Color::B), ((1, 0), Color::B), ((2, 0), Color::B)], 2);
        assert_eq!(lu_gather(&s), Action { color: Color::A, destination: pt(2, 0) });
        let s = snap(&[((0, 0), Color::B), ((1, 0), Color::B), ((2, 0), Color::B)], 1);
        assert!(!lu_gather(&s).is_effective(&s));

        let e = [((0, 0), Color::A), ((1, 0), Color::B), ((3, 0), Color::B)];
        assert!(!enabled(AlgorithmId::LuGather, &snap(&e, 0)));
        assert_eq!(lu_gather(&snap(&e, 1)).destination, pt(0, 0));

        let s = snap(&[((3, 0), Color::A), ((3, 0), Color::A)], 0);
        assert!(!enabled(AlgorithmId::LuGather, &s));

        let e = [((0, 0), Color::A), ((2, 0), Color::B), ((4, 0), Color::A)];
        assert_eq!(lu_gather(&snap(&e, 0)), Action { color: Color::B, destination: pt(2, 0) });
        let e = [((0, 0), Color::A), ((1, 0), Color::B), ((4, 0), Color::A)];
        assert!(!enabled(AlgorithmId::LuGather, &snap(&e, 0)));
        assert_eq!(lu_gather(&snap(&e, 1)).destination, pt(2, 0));

        let e = [((0, 0), Color::A), ((1, 0), Color::A), ((4, 0), Color::A)];
        assert_eq!(lu_gather(&snap(&e, 1)).destination, pt(0, 0));
        assert!(!enabled(AlgorithmId::LuGather, &snap(&e, 2)));
    }

    #[test]
    fn sim_projection_cases() {
        let sq = |c: [Color; 4], me| snap(&[((0, 0), c[0]), ((2, 0), c[1]), ((2, 2), c[2]), ((0, 2), c[3])], me);
        let s = sq([Color::S; 4], 0);
        let a = three_color_gather(&s);
        assert_eq!(a, Action { color: Color::M, destination: pt(1, 1) });

        // A non-enabled robot under forall S does nothing.
        let e = [((0, 0), Color::S), ((4, 0), Color::S), ((4, 1), Color::S), ((0, 1), Color::S), ((2, 0), Color::S)];
        let s = snap(&e, 4);
        assert!(!enabled(AlgorithmId::ThreeColor, &s));

        let s = sq([Color::M, Color::E, Color::E, Color::M], 0);
        assert_eq!(three_color_gather(&s), Action { color: Color::E, destination: pt(0, 0) });
        let s = sq([Color::S, Color::M, Color::S, Color::S], 0);
        assert_eq!(three_color_gather(&s).color, Color::M);
        let s = sq([Color::S, Color::E, Color::S, Color::S], 1);
        assert_eq!(three_color_gather(&s).color, Color::S);
    }

    #[test]
    fn six_color_carries_inner_light() {
        let sa = Color::Pair(Phase::S, Lu::A);
        let s = snap(&[((0, 0), sa), ((2, 0), sa)], 0);
        assert_eq!(six_color_gather(&s), Action { color: Color::Pair(Phase::M, Lu::B), destination: pt(1, 0) });
        let mb = Color::Pair(Phase::M, Lu::B);
        let s = snap(&[((1, 0), mb), ((1, 0), mb)], 0);
        assert_eq!(six_color_gather(&s).color, Color::Pair(Phase::E, Lu::B));
        let s = snap(&[((1, 0), sa), ((1, 0), sa)], 0);
        assert!(!enabled(AlgorithmId::SixColor, &s));
    }

    #[test]
    fn async_line_cases() {
        let s = snap(&[((0, 0), Color::S), ((4, 0), Color::S)], 0);
        assert_eq!(lu_gather_in_async(&s), Action { color: Color::M, destination: pt(2, 0) });
        let s = snap(&[((0, 0), Color::E), ((4, 0), Color::E)], 1);
        assert_eq!(lu_gather_in_async(&s), Action { color: Color::S, destination: pt(4, 0) });
        let s = snap(&[((0, 0), Color::M), ((3, 0), Color::E), ((4, 0), Color::M)], 0);
        assert_eq!(lu_gather_in_async(&s).destination, pt(3, 0));
        let s = snap(&[((0, 0), Color::S), ((1, 0), Color::S), ((4, 0), Color::S)], 1);
        assert_eq!(lu_gather_in_async(&s).destination, pt(0, 0));
        let s = snap(&[((2, 0), Color::E), ((2, 0), Color::E)], 0);
        assert!(!enabled(AlgorithmId::LuGatherAsync, &s));
    }

    #[test]
    fn async_exact_middle_robot_contracts_left() {
        let s = snap(&[((0, 0), Color::S), ((2, 0), Color::S), ((4, 0), Color::S)], 1);
        assert_eq!(lu_gather_in_async(&s).destination, pt(0, 0));
    }

    #[test]
    fn async_s_m_family() {
        // One S station: the S robot switches to E.
        let s = snap(&[((0, 0), Color::S), ((2, 0), Color::M), ((4, 0), Color::M)], 0);
        assert_eq!(lu_gather_in_async(&s).color, Color::E);
        // S at both ends: S robots head for the middle with M.
        let s = snap(&[((0, 0), Color::S), ((1, 0), Color::M), ((4, 0), Color::S)], 2);
        assert_eq!(lu_gather_in_async(&s), Action { color: Color::M, destination: pt(2, 0) });
        // Two S stations, not both ends: recolor without moving.
        let s = snap(&[((0, 0), Color::S), ((1, 0), Color::S), ((4, 0), Color::M)], 1);
        assert_eq!(lu_gather_in_async(&s), Action { color: Color::M, destination: pt(1, 0) });
        // M robots wait.
        let s = snap(&[((0, 0), Color::S), ((1, 0), Color::S), ((4, 0), Color::M)], 2);
        assert!(!enabled(AlgorithmId::LuGatherAsync, &s));
    }

    #[test]
    fn async_e_loop_cases() {
        let e3 = [((0, 0), Color::E), ((2, 0), Color::E), ((4, 0), Color::E)];
        assert_eq!(lu_gather_in_async(&snap(&e3, 0)).color, Color::S);
        assert!(!enabled(AlgorithmId::LuGatherAsync, &snap(&e3, 1)));
        let e4 = [((0, 0), Color::E), ((1, 0), Color::E), ((4, 0), Color::E)];
        assert_eq!(lu_gather_in_async(&snap(&e4, 1)).destination, pt(2, 0));
        assert!(!enabled(AlgorithmId::LuGatherAsync, &snap(&e4, 0)));
        let ses = [((0, 0), Color::S), ((2, 0), Color::E), ((4, 0), Color::S)];
        assert_eq!(lu_gather_in_async(&snap(&ses, 0)).color, Color::M);
        let mem = [((0, 0), Color::M), ((2, 0), Color::E), ((4, 0), Color::S)];
        assert_eq!(lu_gather_in_async(&snap(&mem, 2)).color, Color::M);
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for a in AlgorithmId::ALL {
            assert_eq!(a.name().parse::<AlgorithmId>().unwrap(), a);
        }
        assert!("nope".parse::<AlgorithmId>().is_err());
    }
}
