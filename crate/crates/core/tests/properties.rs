use gather_core::algorithms::AlgorithmId;
use gather_core::checker::{check_equivariance, endpoint_tie};
use gather_core::engine::{run_to_trace, Frame, Policy, Scenario, SchedulerKind};
use gather_core::geometry::{convex_hull, orient, HullOutcome, Point};
use gather_core::line_patterns::{matches, pat, ColorConfig};
use gather_core::model::{Color, Configuration};
use gather_core::potentials::RootSum;
use gather_core::rat::Rat;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=4).prop_map(|(p, q)| Rat::new(p, q))
}

fn point() -> impl Strategy<Value = Point> {
    (rat(), rat()).prop_map(|(x, y)| Point::new(x, y))
}

fn frame() -> impl Strategy<Value = Frame> {
    let triples = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (3, 4, 5), (-4, 3, 5), (5, -12, 13), (-15, -8, 17)];
    (0..triples.len(), 1i64..=9, 1i64..=5, point()).prop_map(move |(i, n, d, t)| {
        let (a, b, c) = triples[i];
        Frame::rotation(a, b, c, Rat::new(n, d), t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hull_is_ccw_contains_inputs_and_is_idempotent(pts in prop::collection::vec(point(), 3..9)) {
        let HullOutcome::Polygon(h) = convex_hull(&pts) else { return Ok(()) };
        let k = h.vertices.len();
        prop_assert!(k >= 3);
        for i in 0..k {
            prop_assert_eq!(orient(&h.vertices[i], &h.vertices[(i + 1) % k], &h.vertices[(i + 2) % k]), 1);
            for p in &pts {
                prop_assert!(orient(&h.vertices[i], &h.vertices[(i + 1) % k], p) >= 0);
            }
        }
        let again = convex_hull(&h.vertices).polygon().unwrap();
        prop_assert_eq!(again.vertices, h.vertices);
    }

    #[test]
    fn hull_classification_survives_similarity(pts in prop::collection::vec(point(), 3..8), f in frame()) {
        let a = convex_hull(&pts);
        let moved: Vec<Point> = pts.iter().map(|p| f.apply(p)).collect();
        let b = convex_hull(&moved);
        match (a, b) {
            (HullOutcome::Collinear, HullOutcome::Collinear) => {}
            (HullOutcome::Polygon(x), HullOutcome::Polygon(y)) => {
                prop_assert_eq!(x.classification, y.classification);
                let mut mapped: Vec<Point> = x.vertices.iter().map(|p| f.apply(p)).collect();
                let mut got = y.vertices.clone();
                mapped.sort();
                got.sort();
                prop_assert_eq!(mapped, got);
            }
            _ => prop_assert!(false, "collinearity changed under a similarity"),
        }
    }

    #[test]
    fn pattern_matching_ignores_direction(
        ts in prop::collection::vec((0i64..12, 0usize..2), 1..7),
        which in 0usize..6,
    ) {
        let entries: Vec<(Point, Color)> =
            ts.iter().map(|&(t, c)| (Point::int(t, 2 * t), [Color::A, Color::B][c])).collect();
        let mut rev = entries.clone();
        rev.reverse();
        let a = ColorConfig::from_entries(&entries);
        let b = ColorConfig::from_entries(&rev);
        let p = pat(["A", "AA", "AA^+A", "BB^*B", "AB^*B", "AB^+A"][which]);
        prop_assert_eq!(matches(&a, &p), matches(&a.reversed(), &p));
        prop_assert_eq!(matches(&a, &p), matches(&b, &p));
    }

    #[test]
    fn enclosures_are_sound_and_nested(terms in prop::collection::vec((-6i64..=6, 1i64..=60, 1i64..=7), 1..5)) {
        let mut s = RootSum::zero();
        for &(c, n, d) in &terms {
            let mut t = RootSum::sqrt(&Rat::new(n, d));
            if c < 0 {
                t = t.neg();
            }
            for _ in 0..c.unsigned_abs() {
                s.add(&t);
            }
        }
        let approx: f64 = terms.iter().map(|&(c, n, d)| c as f64 * (n as f64 / d as f64).sqrt()).sum();
        let mut prev: Option<(Rat, Rat)> = None;
        for bits in [64, 256, 1024] {
            let (lo, hi) = s.enclose(bits);
            prop_assert!(lo <= hi);
            prop_assert!(lo.to_f64() <= approx + 1e-9 && approx - 1e-9 <= hi.to_f64());
            if let Some((plo, phi)) = &prev {
                prop_assert!(*plo <= lo && hi <= *phi);
            }
            prev = Some((lo, hi));
        }
    }

    #[test]
    fn algorithms_commute_with_frames(
        pts in prop::collection::vec(point(), 2..7),
        me in 0usize..7,
        alg in 0usize..AlgorithmId::ALL.len(),
        f in frame(),
    ) {
        let alg = AlgorithmId::ALL[alg];
        let pts: Vec<Point> = if alg.requires_on_lds() {
            pts.iter().map(|p| Point::new(p.x.clone(), &p.x * &Rat::new(-1, 3))).collect()
        } else {
            pts
        };
        let cfg = Configuration::new(0, pts.iter().map(|p| (p.clone(), alg.initial_color())).collect());
        let snap = cfg.snapshot_for(me % pts.len());
        prop_assume!(!endpoint_tie(&snap));
        let r = check_equivariance(alg, &snap, &[f]);
        prop_assert!(r.pass, "{:?}", r.violations);
    }

    #[test]
    fn runs_are_deterministic(pts in prop::collection::vec(point(), 2..5), seed in any::<u64>(), async_ in any::<bool>()) {
        let sched = if async_ { SchedulerKind::Async } else { SchedulerKind::SsyncUnfair };
        let s = Scenario::new(pts, AlgorithmId::ThreeColor, sched, Rat::new(1, 2))
            .with_adversary(Policy::Random, seed)
            .with_budget(3_000);
        let a = run_to_trace(&s).unwrap().to_jsonl();
        let b = run_to_trace(&s).unwrap().to_jsonl();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rationals_round_trip_through_text(r in rat()) {
        let back: Rat = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }
}
