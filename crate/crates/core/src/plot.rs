//! Static SVG rendering of robot trajectories.

use std::fmt::Write;

use crate::engine::Trace;
use crate::model::{Color, Lu, Phase};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;

fn stroke(c: Color) -> &'static str {
    match c.phase() {
        Some(Phase::S) => "#1f77b4",
        Some(Phase::M) => "#ff7f0e",
        Some(Phase::E) => "#2ca02c",
        None if c == Color::A => "#d62728",
        None => "#9467bd",
    }
}

/// B lights of the product alphabet are drawn dashed.
fn dash(c: Color) -> &'static str {
    match c {
        Color::Pair(_, Lu::B) => " stroke-dasharray=\"4 3\"",
        _ => "",
    }
}

/// Render every robot's path through the trace's configurations.
///
/// Segment `t -> t+1` is stroked with the robot's light at `t`; every
/// configuration time gets a small marker, start positions a hollow circle.
pub fn render_svg(trace: &Trace) -> String {
    let configs: Vec<_> = trace.configs().into_values().collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if configs.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let pts: Vec<(f64, f64)> =
        configs.iter().flat_map(|c| c.entries.iter().map(|(p, _)| (p.x.to_f64(), p.y.to_f64()))).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let k = (SIZE - 2.0 * MARGIN) / span;
    let map = |x: f64, y: f64| (MARGIN + (x - x0) * k, SIZE - MARGIN - (y - y0) * k);

    let n = configs[0].len();
    for id in 0..n {
        let _ = writeln!(out, "<g id=\"robot-{id}\">");
        for w in configs.windows(2) {
            let (p, c) = &w[0].entries[id];
            let q = &w[1].entries[id].0;
            if p == q {
                continue;
            }
            let (ax, ay) = map(p.x.to_f64(), p.y.to_f64());
            let (bx, by) = map(q.x.to_f64(), q.y.to_f64());
            let _ = writeln!(
                out,
                "<polyline points=\"{ax:.3},{ay:.3} {bx:.3},{by:.3}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>",
                stroke(*c),
                dash(*c)
            );
        }
        for cfg in &configs {
            let (p, c) = &cfg.entries[id];
            let (x, y) = map(p.x.to_f64(), p.y.to_f64());
            let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\" fill=\"{}\"/>", stroke(*c));
        }
        let (p, c) = &configs[0].entries[id];
        let (x, y) = map(p.x.to_f64(), p.y.to_f64());
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"5\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            stroke(*c)
        );
        let _ = writeln!(out, "</g>");
    }
    let keys = [Color::S, Color::M, Color::E, Color::A, Color::B];
    for (i, c) in keys.iter().enumerate() {
        let y = 16.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            "<line x1=\"8\" y1=\"{y}\" x2=\"24\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\"/><text x=\"28\" y=\"{}\" font-size=\"11\">{c}</text>",
            stroke(*c),
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::AlgorithmId;
    use crate::engine::{run_to_trace, Scenario, SchedulerKind};
    use crate::geometry::Point;
    use crate::rat::Rat;

    #[test]
    fn svg_is_deterministic_and_has_one_group_per_robot() {
        let pts = vec![Point::int(0, 0), Point::int(4, 0), Point::int(0, 3)];
        let s = Scenario::new(pts, AlgorithmId::ThreeColor, SchedulerKind::Fsync, Rat::one());
        let t = run_to_trace(&s).unwrap();
        let a = render_svg(&t);
        assert_eq!(a, render_svg(&t));
        assert_eq!(a.matches("<g id=\"robot-").count(), 3);
        assert!(a.contains("<polyline"));
    }
}
