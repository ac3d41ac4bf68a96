//! Lights, configurations and snapshots shared by every layer.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::Point;

/// Phase color of the simulation wrapper and of the three-color gatherer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    S,
    M,
    E,
}

/// Light of the two-color line gatherer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lu {
    A,
    B,
}

/// A light value. Each algorithm draws from exactly one alphabet:
/// `{S,M,E}`, `{A,B}`, or the product `{S,M,E} x {A,B}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Phase(Phase),
    Lu(Lu),
    Pair(Phase, Lu),
}

impl Color {
    pub const S: Color = Color::Phase(Phase::S);
    pub const M: Color = Color::Phase(Phase::M);
    pub const E: Color = Color::Phase(Phase::E);
    pub const A: Color = Color::Lu(Lu::A);
    pub const B: Color = Color::Lu(Lu::B);

    /// Phase component, if this color carries one.
    pub fn phase(self) -> Option<Phase> {
        match self {
            Color::Phase(p) | Color::Pair(p, _) => Some(p),
            Color::Lu(_) => None,
        }
    }

    /// Replace the phase component, keeping any inner component.
    pub fn with_phase(self, p: Phase) -> Color {
        match self {
            Color::Phase(_) => Color::Phase(p),
            Color::Pair(_, l) => Color::Pair(p, l),
            Color::Lu(l) => Color::Pair(p, l),
        }
    }

    /// Inner (simulated) component of a product color.
    pub fn inner(self) -> Option<Color> {
        match self {
            Color::Pair(_, l) => Some(Color::Lu(l)),
            _ => None,
        }
    }

    pub fn phase_only(self) -> Color {
        match self.phase() {
            Some(p) => Color::Phase(p),
            None => self,
        }
    }

    pub fn phase_alphabet() -> Vec<Color> {
        vec![Color::S, Color::M, Color::E]
    }

    pub fn lu_alphabet() -> Vec<Color> {
        vec![Color::A, Color::B]
    }

    pub fn product_alphabet() -> Vec<Color> {
        let mut v = Vec::new();
        for p in [Phase::S, Phase::M, Phase::E] {
            for l in [Lu::A, Lu::B] {
                v.push(Color::Pair(p, l));
            }
        }
        v
    }

    fn letter_phase(p: Phase) -> char {
        match p {
            Phase::S => 'S',
            Phase::M => 'M',
            Phase::E => 'E',
        }
    }

    fn letter_lu(l: Lu) -> char {
        match l {
            Lu::A => 'A',
            Lu::B => 'B',
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Color::Phase(p) => write!(f, "{}", Color::letter_phase(p)),
            Color::Lu(l) => write!(f, "{}", Color::letter_lu(l)),
            Color::Pair(p, l) => write!(f, "{}{}", Color::letter_phase(p), Color::letter_lu(l)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown color `{0}`")]
pub struct ParseColorError(pub String);

impl FromStr for Color {
    type Err = ParseColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let phase = |c: char| match c {
            'S' => Some(Phase::S),
            'M' => Some(Phase::M),
            'E' => Some(Phase::E),
            _ => None,
        };
        let lu = |c: char| match c {
            'A' => Some(Lu::A),
            'B' => Some(Lu::B),
            _ => None,
        };
        let cs: Vec<char> = s.trim().chars().collect();
        let parsed = match cs.as_slice() {
            [c] => phase(*c).map(Color::Phase).or_else(|| lu(*c).map(Color::Lu)),
            [p, l] => match (phase(*p), lu(*l)) {
                (Some(p), Some(l)) => Some(Color::Pair(p, l)),
                _ => None,
            },
            _ => None,
        };
        parsed.ok_or_else(|| ParseColorError(s.to_string()))
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Positions and lights of all robots at one instant, indexed by robot id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub time: u64,
    pub entries: Vec<(Point, Color)>,
}

impl Configuration {
    pub fn new(time: u64, entries: Vec<(Point, Color)>) -> Self {
        Configuration { time, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn distinct_positions(&self) -> Vec<Point> {
        let set: BTreeSet<Point> = self.entries.iter().map(|(p, _)| p.clone()).collect();
        set.into_iter().collect()
    }

    pub fn is_gathered(&self) -> bool {
        self.distinct_positions().len() <= 1
    }

    /// Colors present, projected to the phase component when present.
    pub fn phase_class(&self) -> BTreeSet<Color> {
        self.entries.iter().map(|(_, c)| c.phase_only()).collect()
    }

    /// Multiset view ignoring robot identities.
    pub fn multiset(&self) -> Vec<(Point, Color)> {
        let mut v = self.entries.clone();
        v.sort();
        v
    }

    pub fn snapshot_for(&self, id: usize) -> Snapshot {
        Snapshot {
            entries: self.entries.clone(),
            own_position: self.entries[id].0.clone(),
            own_light: self.entries[id].1,
        }
    }
}

/// What one robot sees during Look: every robot's position and light plus
/// its own position and light. All coordinates are in a single frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub entries: Vec<(Point, Color)>,
    pub own_position: Point,
    pub own_light: Color,
}

impl Snapshot {
    pub fn positions(&self) -> Vec<Point> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn phase_class(&self) -> BTreeSet<Color> {
        self.entries.iter().map(|(_, c)| c.phase_only()).collect()
    }

    pub fn color_class(&self) -> BTreeSet<Color> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    /// Same snapshot with every light replaced by `f(light)`.
    pub fn map_colors(&self, f: impl Fn(Color) -> Color) -> Snapshot {
        Snapshot {
            entries: self.entries.iter().map(|(p, c)| (p.clone(), f(*c))).collect(),
            own_position: self.own_position.clone(),
            own_light: f(self.own_light),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_round_trip_strings() {
        for c in Color::phase_alphabet().into_iter().chain(Color::lu_alphabet()).chain(Color::product_alphabet()) {
            assert_eq!(c.to_string().parse::<Color>().unwrap(), c);
        }
        assert!("Q".parse::<Color>().is_err());
        assert!("AS".parse::<Color>().is_err());
    }

    #[test]
    fn phase_projection_keeps_inner() {
        let c = Color::Pair(Phase::S, Lu::B);
        assert_eq!(c.with_phase(Phase::M), Color::Pair(Phase::M, Lu::B));
        assert_eq!(c.inner(), Some(Color::B));
        assert_eq!(c.phase_only(), Color::S);
        assert_eq!(Color::A.phase(), None);
    }
}
