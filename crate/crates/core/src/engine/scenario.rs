//! Scenario files: initial robots, scheduler, adversary and budgets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::AlgorithmId;
use crate::geometry::{is_on_lds, Point};
use crate::model::{Color, Configuration};
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Fsync,
    Ssync,
    SsyncUnfair,
    Async,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Fsync => "fsync",
            SchedulerKind::Ssync => "ssync",
            SchedulerKind::SsyncUnfair => "ssync-unfair",
            SchedulerKind::Async => "async",
        }
    }

    pub fn parse(s: &str) -> Option<SchedulerKind> {
        [SchedulerKind::Fsync, SchedulerKind::Ssync, SchedulerKind::SsyncUnfair, SchedulerKind::Async]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Adversary strategy.
///
/// `random`, `rigid` and `truncate-min` pick activations at random and
/// differ in how far movers get: a random fraction, the full way, or only
/// the guaranteed minimum distance. `round-robin` activates one robot at a
/// time in id order. `ssync-embedded` replays synchronous rounds inside the
/// asynchronous model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    #[default]
    Random,
    Rigid,
    TruncateMin,
    RoundRobin,
    SsyncEmbedded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AdversarySpec {
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub x: Rat,
    pub y: Rat,
    pub color: Color,
}

impl RobotSpec {
    pub fn position(&self) -> Point {
        Point::new(self.x.clone(), self.y.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub robots: Vec<RobotSpec>,
    pub delta: Rat,
    pub scheduler: SchedulerKind,
    pub algorithm: AlgorithmId,
    #[serde(default)]
    pub adversary: AdversarySpec,
    pub step_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_span_cap: Option<u64>,
}

pub const DEFAULT_MOVE_SPAN_CAP: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON: {0}")]
    Json(String),
    #[error("scenario has no robots")]
    NoRobots,
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(Rat),
    #[error("step_budget must be positive")]
    ZeroBudget,
    #[error("fairness_bound must be at least 1")]
    ZeroFairnessBound,
    #[error("move_span_cap must be at least 1")]
    ZeroMoveSpanCap,
    #[error("robot {robot} has color {color}, outside the alphabet of {algorithm}")]
    ColorOutsideAlphabet { robot: usize, color: Color, algorithm: AlgorithmId },
    #[error("{0} needs all robots on one line")]
    NotOnLine(AlgorithmId),
    #[error("policy ssync-embedded needs the async scheduler")]
    PolicySchedulerMismatch,
}

impl Scenario {
    /// Build a scenario with every robot carrying the algorithm's initial light.
    pub fn new(points: Vec<Point>, algorithm: AlgorithmId, scheduler: SchedulerKind, delta: Rat) -> Scenario {
        let color = algorithm.initial_color();
        Scenario {
            robots: points.into_iter().map(|p| RobotSpec { x: p.x, y: p.y, color }).collect(),
            delta,
            scheduler,
            algorithm,
            adversary: AdversarySpec::default(),
            step_budget: 10_000,
            fairness_bound: None,
            move_span_cap: None,
        }
    }

    pub fn with_adversary(mut self, policy: Policy, seed: u64) -> Scenario {
        self.adversary = AdversarySpec { policy, seed };
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Scenario {
        self.step_budget = budget;
        self
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.robots.is_empty() {
            return Err(ScenarioError::NoRobots);
        }
        if !self.delta.is_positive() {
            return Err(ScenarioError::NonPositiveDelta(self.delta.clone()));
        }
        if self.step_budget == 0 {
            return Err(ScenarioError::ZeroBudget);
        }
        if self.fairness_bound == Some(0) {
            return Err(ScenarioError::ZeroFairnessBound);
        }
        if self.move_span_cap == Some(0) {
            return Err(ScenarioError::ZeroMoveSpanCap);
        }
        let alphabet = self.algorithm.alphabet();
        for (i, r) in self.robots.iter().enumerate() {
            if !alphabet.contains(&r.color) {
                return Err(ScenarioError::ColorOutsideAlphabet {
                    robot: i,
                    color: r.color,
                    algorithm: self.algorithm,
                });
            }
        }
        if self.algorithm.requires_on_lds() && !is_on_lds(&self.initial_config().positions()) {
            return Err(ScenarioError::NotOnLine(self.algorithm));
        }
        if self.adversary.policy == Policy::SsyncEmbedded && self.scheduler != SchedulerKind::Async {
            return Err(ScenarioError::PolicySchedulerMismatch);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.robots.len()
    }

    /// Fairness bound in effect: explicit value or `8 n`.
    pub fn fairness(&self) -> u64 {
        self.fairness_bound.unwrap_or(8 * self.n() as u64).max(1)
    }

    pub fn move_span(&self) -> u64 {
        self.move_span_cap.unwrap_or(DEFAULT_MOVE_SPAN_CAP)
    }

    pub fn initial_config(&self) -> Configuration {
        Configuration::new(0, self.robots.iter().map(|r| (r.position(), r.color)).collect())
    }
}
