//! Execution of robots under synchronous and asynchronous schedulers.
//!
//! Algorithms always run on the global-frame snapshot; local frames are
//! only used by the equivariance harness.

mod async_world;
mod frame;
mod replay;
mod scenario;
mod ssync;
mod trace;

pub use async_world::{AsyncWorld, Choice, IllegalChoice};
pub use frame::{Frame, FrameError};
pub use replay::verify_replay;
pub use scenario::{AdversarySpec, Policy, RobotSpec, Scenario, ScenarioError, SchedulerKind, DEFAULT_MOVE_SPAN_CAP};
pub use ssync::ssync_round;
pub use trace::{entries_to_specs, specs_to_entries, Line, Outcome, Trace, TraceError};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algorithms::{Action, AlgorithmId};
use crate::geometry::Point;
use crate::model::Configuration;
use crate::rat::Rat;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("no robot was activated")]
    EmptyActivation,
    #[error("step budget exhausted after {} events", .trace.event_count())]
    BudgetExhausted { final_config: Configuration, trace: Box<Trace> },
    #[error("adversary made an illegal choice: {0}")]
    Illegal(#[from] IllegalChoice),
}

/// Where a non-rigid move stops.
///
/// The robot reaches `origin + l * (destination - origin)` with `l` the
/// adversary's fraction raised, if needed, so that the robot covers at
/// least `delta`. Destinations within `delta` are always reached. When the
/// exact minimum fraction is irrational the smallest multiple of 1/64 that
/// still covers `delta` is used.
pub fn apply_move(origin: &Point, destination: &Point, fraction: &Rat, delta: &Rat) -> Point {
    assert!(fraction.is_positive() && *fraction <= Rat::one(), "fraction must lie in (0, 1]");
    let d2 = origin.dist_sq(destination);
    let delta2 = delta * delta;
    if d2 <= delta2 {
        return destination.clone();
    }
    let min_frac = match d2.sqrt_exact() {
        Some(d) => delta / &d,
        None => {
            let (_, hi) = (&delta2 / &d2).sqrt_bounds(32);
            let mut j = (hi * Rat::from_int(64)).ceil();
            let covers = |j: &num_bigint::BigInt| {
                let l = Rat::from_big(j.clone(), 64.into());
                &(&l * &l) * &d2 >= delta2
            };
            while j > 1.into() && covers(&(&j - 1)) {
                j -= 1;
            }
            Rat::from_big(j, 64.into())
        }
    };
    let l = fraction.clone().max(min_frac);
    if l >= Rat::one() {
        destination.clone()
    } else {
        origin.lerp(destination, &l)
    }
}

/// True when robot `id` would change its light or position at `config`.
pub fn enabled(config: &Configuration, alg: AlgorithmId, id: usize) -> bool {
    crate::algorithms::enabled(alg, &config.snapshot_for(id))
}

pub fn enabled_set(config: &Configuration, alg: AlgorithmId) -> Vec<usize> {
    (0..config.len()).filter(|&i| enabled(config, alg, i)).collect()
}

pub fn compute(config: &Configuration, alg: AlgorithmId, id: usize) -> Action {
    let a = alg.compute(&config.snapshot_for(id));
    assert!(alg.alphabet().contains(&a.color), "{alg} emitted {} outside its alphabet", a.color);
    a
}

/// Fraction of a move granted by the adversary under `policy`.
///
/// The nominal fraction is random in {1/4, .., 1}, or one ulp of 2^-20 for
/// truncate-min. The stop is then snapped to the point of the segment whose
/// offset from the destination, measured along the primitive integer
/// direction, has the smallest denominator within a window before the
/// nominal stop; for truncate-min the window is a quarter of `delta`. This keeps coordinate sizes bounded over long runs; the
/// result is still a legal stop of length at least `delta`.
pub(crate) fn adversary_fraction(
    policy: Policy,
    rng: &mut ChaCha8Rng,
    origin: &Point,
    destination: &Point,
    delta: &Rat,
) -> Rat {
    let nominal = match policy {
        Policy::Rigid => return Rat::one(),
        Policy::TruncateMin => Rat::new(1, 1 << 20),
        _ => Rat::new(rng.gen_range(1..=4), 4),
    };
    if nominal == Rat::one() || origin.dist_sq(destination) <= delta * delta {
        return Rat::one();
    }
    let w = origin - destination;
    let den = num_integer::lcm(w.x.denom().clone(), w.y.denom().clone());
    let (a, b) = ((w.x.numer() * &den) / w.x.denom(), (w.y.numer() * &den) / w.y.denom());
    let h = num_integer::gcd(a.clone(), b.clone());
    let (ua, ub) = (&a / &h, &b / &h);
    let norm_sq = &ua * &ua + &ub * &ub;
    // origin = destination + s_old * u with u = (a, b) / h primitive.
    let s_old = Rat::from_big(h, den);
    let lower_norm = Rat::from_big(norm_sq.sqrt(), num_bigint::BigInt::from(1));
    let step = delta / &lower_norm;
    let s_max = &s_old - &step;
    if !s_max.is_positive() {
        return Rat::one();
    }
    let target = &s_old * &(&Rat::one() - &nominal);
    let mut window = &s_old / &Rat::from_int(16);
    if policy == Policy::TruncateMin {
        window = window.min(&step / &Rat::from_int(4));
    }
    let hi = s_max.min(&target + &window);
    let lo = (&hi - &(&window + &window)).max(&hi / &Rat::from_int(2));
    let s_new = Rat::simplest_between(&lo, &hi);
    &Rat::one() - &(&s_new / &s_old)
}

/// Execute a scenario to quiescence or until the budget runs out.
pub fn run(scenario: &Scenario) -> Result<Trace, EngineError> {
    scenario.validate()?;
    let trace = match scenario.scheduler {
        SchedulerKind::Async => async_world::run_async(scenario)?,
        _ => ssync::run_ssync(scenario),
    };
    match trace.outcome() {
        Some(Outcome::BudgetExhausted) => Err(EngineError::BudgetExhausted {
            final_config: trace.final_config().expect("trace has a configuration"),
            trace: Box::new(trace),
        }),
        _ => Ok(trace),
    }
}

/// Like [`run`] but hands back the trace in either outcome.
pub fn run_to_trace(scenario: &Scenario) -> Result<Trace, EngineError> {
    match run(scenario) {
        Ok(t) => Ok(t),
        Err(EngineError::BudgetExhausted { trace, .. }) => Ok(*trace),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn move_examples() {
        let o = Point::origin();
        let d = Point::int(10, 0);
        assert_eq!(apply_move(&o, &d, &Rat::new(1, 2), &Rat::one()), Point::int(5, 0));
        assert_eq!(apply_move(&o, &d, &Rat::new(1, 100), &Rat::one()), Point::int(1, 0));
        let near = Point::new(Rat::new(1, 2), Rat::zero());
        assert_eq!(apply_move(&o, &near, &Rat::new(1, 100), &Rat::one()), near);
    }

    #[test]
    fn irrational_clamp_covers_delta() {
        let o = Point::origin();
        let d = Point::int(3, 1);
        let r = apply_move(&o, &d, &Rat::new(1, 1000), &Rat::one());
        assert!(o.dist_sq(&r) >= Rat::one());
        let step = Rat::new(1, 64);
        let less = &(&r.x / &Rat::from_int(3)) - &step;
        assert!(&(&less * &less) * &Rat::from_int(10) < Rat::one());
    }
}
