//! Color-configurations of collinear configurations.
//!
//! A collinear configuration is read as a sequence of stations (occupied
//! points) from one endpoint to the other. Each station carries the colors
//! of the robots standing there, optionally annotated with pending moves or
//! pending color changes. Patterns such as `SS^+S`, `AB_mA`, `(M|E)` or
//! `(S|S[pc->M]|M|M[pm])^*` are matched against that sequence in either
//! direction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point;
use crate::model::{Color, Configuration};
use crate::rat::Rat;

/// One robot as seen by the pattern matcher.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mark {
    pub color: Color,
    /// Computed but not yet arrived.
    pub pending_move: bool,
    /// Looked but not yet computed; the color it will switch to.
    pub pending_color: Option<Color>,
}

impl Mark {
    pub fn plain(color: Color) -> Self {
        Mark { color, pending_move: false, pending_color: None }
    }
}

/// An occupied point on the segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Station {
    pub position: Point,
    pub marks: Vec<Mark>,
}

impl Station {
    /// The factor of the station: the set of colors present there.
    pub fn factor(&self) -> BTreeSet<Color> {
        self.marks.iter().map(|m| m.color).collect()
    }

    pub fn has(&self, c: Color) -> bool {
        self.marks.iter().any(|m| m.color == c)
    }

    pub fn only(&self, c: Color) -> bool {
        self.marks.iter().all(|m| m.color == c)
    }
}

/// A collinear configuration read as a station sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorConfig {
    pub stations: Vec<Station>,
    pub endpoint_left: Point,
    pub endpoint_right: Point,
    pub has_exact_midpoint: bool,
    pub counts: BTreeMap<Color, usize>,
}

/// Classify a collinear configuration.
pub fn classify_line(config: &Configuration) -> ColorConfig {
    ColorConfig::from_entries(&config.entries)
}

impl ColorConfig {
    pub fn from_entries(entries: &[(Point, Color)]) -> ColorConfig {
        let marked: Vec<(Point, Mark)> = entries.iter().map(|(p, c)| (p.clone(), Mark::plain(*c))).collect();
        ColorConfig::from_marked(&marked)
    }

    /// Stations are ordered lexicographically by position, which on a line
    /// is an order along the line.
    pub fn from_marked(entries: &[(Point, Mark)]) -> ColorConfig {
        assert!(!entries.is_empty(), "color-configuration of no robots");
        let mut by_point: BTreeMap<Point, Vec<Mark>> = BTreeMap::new();
        for (p, m) in entries {
            by_point.entry(p.clone()).or_default().push(m.clone());
        }
        let stations: Vec<Station> = by_point
            .into_iter()
            .map(|(position, mut marks)| {
                marks.sort();
                Station { position, marks }
            })
            .collect();
        ColorConfig::from_stations(stations)
    }

    fn from_stations(stations: Vec<Station>) -> ColorConfig {
        let endpoint_left = stations[0].position.clone();
        let endpoint_right = stations[stations.len() - 1].position.clone();
        let has_exact_midpoint = stations.len() == 3 && stations[1].position == endpoint_left.midpoint(&endpoint_right);
        let mut counts = BTreeMap::new();
        for s in &stations {
            for c in s.factor() {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
        ColorConfig { stations, endpoint_left, endpoint_right, has_exact_midpoint, counts }
    }

    /// Same configuration read from the other endpoint.
    pub fn reversed(&self) -> ColorConfig {
        let mut stations = self.stations.clone();
        stations.reverse();
        ColorConfig::from_stations(stations)
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Number of stations where color `c` is present.
    pub fn count(&self, c: Color) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    /// Colors present anywhere.
    pub fn class(&self) -> BTreeSet<Color> {
        self.counts.keys().copied().collect()
    }

    pub fn dis_sq(&self) -> Rat {
        self.endpoint_left.dist_sq(&self.endpoint_right)
    }

    pub fn midpoint(&self) -> Point {
        self.endpoint_left.midpoint(&self.endpoint_right)
    }

    pub fn is_endpoint(&self, p: &Point) -> bool {
        *p == self.endpoint_left || *p == self.endpoint_right
    }

    pub fn station_at(&self, p: &Point) -> Option<&Station> {
        self.stations.iter().find(|s| s.position == *p)
    }

    /// Nearest endpoint to `p`; an exact tie resolves to the left endpoint.
    pub fn nearest_endpoint(&self, p: &Point) -> Point {
        let dl = p.dist_sq(&self.endpoint_left);
        let dr = p.dist_sq(&self.endpoint_right);
        if dr < dl {
            self.endpoint_right.clone()
        } else {
            self.endpoint_left.clone()
        }
    }

    /// The endpoint that is not [`ColorConfig::nearest_endpoint`].
    pub fn furthest_endpoint(&self, p: &Point) -> Point {
        if self.nearest_endpoint(p) == self.endpoint_left {
            self.endpoint_right.clone()
        } else {
            self.endpoint_left.clone()
        }
    }

    /// Positions of stations containing color `c`.
    pub fn stations_with(&self, c: Color) -> Vec<Point> {
        self.stations.iter().filter(|s| s.has(c)).map(|s| s.position.clone()).collect()
    }

    pub fn matches(&self, pattern: &PatternExpr) -> bool {
        matches(self, pattern)
    }

    /// Human-readable form, one factor per station, e.g. `S(M|S)S`.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.stations.iter().enumerate() {
            let f = s.factor();
            let body = if f.len() == 1 {
                f.iter().next().unwrap().to_string()
            } else {
                let parts: Vec<String> = f.iter().map(|c| c.to_string()).collect();
                format!("({})", parts.join("|"))
            };
            out.push_str(&body);
            if self.has_exact_midpoint && i == 1 {
                out.push_str("_m");
            }
        }
        out
    }
}

/// One alternative inside a factor: a color with the annotations it may
/// carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alt {
    pub color: Color,
    pub allow_pending_move: bool,
    pub allow_pending_color: Option<Color>,
}

impl Alt {
    fn admits(&self, m: &Mark) -> bool {
        m.color == self.color
            && (!m.pending_move || self.allow_pending_move)
            && match m.pending_color {
                None => true,
                Some(c) => self.allow_pending_color == Some(c),
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorPat {
    pub alts: Vec<Alt>,
}

impl FactorPat {
    /// Every robot at the station must be admitted by some alternative.
    pub fn admits(&self, s: &Station) -> bool {
        s.marks.iter().all(|m| self.alts.iter().any(|a| a.admits(m)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    One,
    Plus,
    Star,
    /// Exactly one station, located at the midpoint of the segment.
    Mid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub factor: FactorPat,
    pub rep: Rep,
}

/// A parsed pattern expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternExpr {
    Line(Vec<Term>),
    /// Every robot has a color from the set and each listed color occurs.
    Forall(BTreeSet<Color>),
}

impl PatternExpr {
    /// The same expression read from the other end.
    pub fn mirror(&self) -> PatternExpr {
        match self {
            PatternExpr::Line(t) => PatternExpr::Line(t.iter().rev().cloned().collect()),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("empty pattern")]
    Empty,
    #[error("unexpected `{found}` at offset {at} in `{pattern}`")]
    Unexpected { pattern: String, at: usize, found: String },
    #[error("unknown color `{0}`")]
    Color(String),
}

impl FromStr for PatternExpr {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PatternError::Empty);
        }
        if let Some(rest) = s.strip_prefix("forall:") {
            let mut set = BTreeSet::new();
            for part in rest.split(',') {
                let c: Color = part.trim().parse().map_err(|_| PatternError::Color(part.into()))?;
                set.insert(c);
            }
            return Ok(PatternExpr::Forall(set));
        }
        Parser { src: s, chars: s.chars().collect(), pos: 0 }.line()
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn unexpected(&self) -> PatternError {
        PatternError::Unexpected {
            pattern: self.src.to_string(),
            at: self.pos,
            found: self.peek().map(|c| c.to_string()).unwrap_or_else(|| "end".into()),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PatternError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn line(&mut self) -> Result<PatternExpr, PatternError> {
        let mut terms = Vec::new();
        while self.peek().is_some() {
            let factor = self.factor()?;
            let rep = match self.peek() {
                Some('^') => {
                    self.pos += 1;
                    match self.peek() {
                        Some('+') => Rep::Plus,
                        Some('*') => Rep::Star,
                        _ => return Err(self.unexpected()),
                    }
                }
                Some('_') => {
                    self.pos += 1;
                    match self.peek() {
                        Some('m') => Rep::Mid,
                        _ => return Err(self.unexpected()),
                    }
                }
                _ => Rep::One,
            };
            if rep != Rep::One {
                self.pos += 1;
            }
            terms.push(Term { factor, rep });
        }
        if terms.is_empty() {
            return Err(PatternError::Empty);
        }
        Ok(PatternExpr::Line(terms))
    }

    fn factor(&mut self) -> Result<FactorPat, PatternError> {
        if self.peek() == Some('(') {
            self.pos += 1;
            let mut alts = vec![self.alt(true)?];
            while self.peek() == Some('|') {
                self.pos += 1;
                alts.push(self.alt(true)?);
            }
            self.expect(')')?;
            Ok(FactorPat { alts })
        } else {
            Ok(FactorPat { alts: vec![self.alt(false)?] })
        }
    }

    fn alt(&mut self, in_parens: bool) -> Result<Alt, PatternError> {
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_uppercase() && (in_parens || name.is_empty()) {
                name.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if name.is_empty() {
            self.pos = start;
            return Err(self.unexpected());
        }
        let color: Color = name.parse().map_err(|_| PatternError::Color(name.clone()))?;
        let mut alt = Alt { color, allow_pending_move: false, allow_pending_color: None };
        if self.peek() == Some('[') {
            self.pos += 1;
            loop {
                let word: String = self.take_while(|c| c.is_ascii_lowercase());
                match word.as_str() {
                    "pm" => alt.allow_pending_move = true,
                    "pc" => {
                        self.expect('-')?;
                        self.expect('>')?;
                        let target: String = self.take_while(|c| c.is_ascii_uppercase());
                        let c: Color = target.parse().map_err(|_| PatternError::Color(target.clone()))?;
                        alt.allow_pending_color = Some(c);
                    }
                    _ => return Err(self.unexpected()),
                }
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.unexpected()),
                }
            }
        }
        Ok(alt)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if f(c) {
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        out
    }
}

impl fmt::Display for PatternExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternExpr::Forall(set) => {
                let parts: Vec<String> = set.iter().map(|c| c.to_string()).collect();
                write!(f, "forall:{}", parts.join(","))
            }
            PatternExpr::Line(terms) => {
                for t in terms {
                    let alts: Vec<String> = t
                        .factor
                        .alts
                        .iter()
                        .map(|a| {
                            let mut ann = Vec::new();
                            if a.allow_pending_move {
                                ann.push("pm".to_string());
                            }
                            if let Some(c) = a.allow_pending_color {
                                ann.push(format!("pc->{c}"));
                            }
                            if ann.is_empty() {
                                a.color.to_string()
                            } else {
                                format!("{}[{}]", a.color, ann.join(","))
                            }
                        })
                        .collect();
                    if alts.len() == 1 {
                        write!(f, "{}", alts[0])?;
                    } else {
                        write!(f, "({})", alts.join("|"))?;
                    }
                    match t.rep {
                        Rep::One => {}
                        Rep::Plus => write!(f, "^+")?,
                        Rep::Star => write!(f, "^*")?,
                        Rep::Mid => write!(f, "_m")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// Parse a pattern, panicking on malformed input. For literals in code.
pub fn pat(s: &str) -> PatternExpr {
    s.parse().unwrap_or_else(|e| panic!("bad pattern `{s}`: {e}"))
}

/// True when `cc` is generated by `pattern`, read from either endpoint.
pub fn matches(cc: &ColorConfig, pattern: &PatternExpr) -> bool {
    match pattern {
        PatternExpr::Forall(set) => cc.class() == *set,
        PatternExpr::Line(terms) => match_terms(cc, terms, 0, 0) || match_terms(&cc.reversed(), terms, 0, 0),
    }
}

/// Match reading from the left endpoint only.
pub fn matches_directed(cc: &ColorConfig, pattern: &PatternExpr) -> bool {
    match pattern {
        PatternExpr::Forall(set) => cc.class() == *set,
        PatternExpr::Line(terms) => match_terms(cc, terms, 0, 0),
    }
}

fn match_terms(cc: &ColorConfig, terms: &[Term], ti: usize, si: usize) -> bool {
    let n = cc.stations.len();
    if ti == terms.len() {
        return si == n;
    }
    let term = &terms[ti];
    match term.rep {
        Rep::One => si < n && term.factor.admits(&cc.stations[si]) && match_terms(cc, terms, ti + 1, si + 1),
        Rep::Mid => {
            si < n
                && n >= 3
                && cc.stations[si].position == cc.midpoint()
                && term.factor.admits(&cc.stations[si])
                && match_terms(cc, terms, ti + 1, si + 1)
        }
        Rep::Plus | Rep::Star => {
            let min = if term.rep == Rep::Plus { 1 } else { 0 };
            let mut k = 0;
            loop {
                if k >= min && match_terms(cc, terms, ti + 1, si + k) {
                    return true;
                }
                if si + k < n && term.factor.admits(&cc.stations[si + k]) {
                    k += 1;
                } else {
                    return false;
                }
            }
        }
    }
}
