//! Execution traces and their JSON Lines form.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scenario::{RobotSpec, Scenario};
use crate::geometry::Point;
use crate::model::{Color, Configuration};

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Every robot idle and none enabled.
    Quiescent,
    BudgetExhausted,
}

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Line {
    Header { scenario: Scenario },
    Config { t: u64, entries: Vec<RobotSpec> },
    RoundStart { t: u64, robots: Vec<usize> },
    Look { t: u64, robot: usize },
    Compute { t: u64, robot: usize, color: Color, dest: Point },
    MoveBegin { t: u64, robot: usize, dest: Point, reached: Point },
    MoveProgress { t: u64, robot: usize, point: Point },
    MoveEnd { t: u64, robot: usize },
    End { t: u64, outcome: Outcome, events: u64 },
}

impl Line {
    pub fn time(&self) -> Option<u64> {
        match self {
            Line::Header { .. } => None,
            Line::Config { t, .. }
            | Line::RoundStart { t, .. }
            | Line::Look { t, .. }
            | Line::Compute { t, .. }
            | Line::MoveBegin { t, .. }
            | Line::MoveProgress { t, .. }
            | Line::MoveEnd { t, .. }
            | Line::End { t, .. } => Some(*t),
        }
    }

    pub fn robot(&self) -> Option<usize> {
        match self {
            Line::Look { robot, .. }
            | Line::Compute { robot, .. }
            | Line::MoveBegin { robot, .. }
            | Line::MoveProgress { robot, .. }
            | Line::MoveEnd { robot, .. } => Some(*robot),
            _ => None,
        }
    }

    /// Look, Compute, MoveBegin and MoveEnd count against the step budget.
    pub fn is_budgeted_event(&self) -> bool {
        matches!(self, Line::Look { .. } | Line::Compute { .. } | Line::MoveBegin { .. } | Line::MoveEnd { .. })
    }
}

pub fn entries_to_specs(entries: &[(Point, Color)]) -> Vec<RobotSpec> {
    entries.iter().map(|(p, c)| RobotSpec { x: p.x.clone(), y: p.y.clone(), color: *c }).collect()
}

pub fn specs_to_entries(specs: &[RobotSpec]) -> Vec<(Point, Color)> {
    specs.iter().map(|r| (r.position(), r.color)).collect()
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no header line")]
    NoHeader,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub lines: Vec<Line>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&serde_json::to_string(l).expect("trace line serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceError> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let l: Line =
                serde_json::from_str(raw).map_err(|e| TraceError::Parse { line: i + 1, message: e.to_string() })?;
            lines.push(l);
        }
        let t = Trace { lines };
        if t.scenario().is_none() {
            return Err(TraceError::NoHeader);
        }
        Ok(t)
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        self.lines.iter().find_map(|l| match l {
            Line::Header { scenario } => Some(scenario),
            _ => None,
        })
    }

    /// Logged configurations by time.
    pub fn configs(&self) -> BTreeMap<u64, Configuration> {
        self.lines
            .iter()
            .filter_map(|l| match l {
                Line::Config { t, entries } => Some((*t, Configuration::new(*t, specs_to_entries(entries)))),
                _ => None,
            })
            .collect()
    }

    pub fn final_config(&self) -> Option<Configuration> {
        self.lines.iter().rev().find_map(|l| match l {
            Line::Config { t, entries } => Some(Configuration::new(*t, specs_to_entries(entries))),
            _ => None,
        })
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.lines.iter().rev().find_map(|l| match l {
            Line::End { outcome, .. } => Some(*outcome),
            _ => None,
        })
    }

    pub fn event_count(&self) -> u64 {
        self.lines.iter().filter(|l| l.is_budgeted_event()).count() as u64
    }

    /// Every light value that appears in a configuration or a Compute.
    pub fn colors_used(&self) -> BTreeSet<Color> {
        let mut s = BTreeSet::new();
        for l in &self.lines {
            match l {
                Line::Config { entries, .. } => s.extend(entries.iter().map(|r| r.color)),
                Line::Compute { color, .. } => {
                    s.insert(*color);
                }
                _ => {}
            }
        }
        s
    }

    /// Lines touching one robot, in order.
    pub fn robot_events(&self, id: usize) -> Vec<&Line> {
        self.lines.iter().filter(|l| l.robot() == Some(id)).collect()
    }
}
