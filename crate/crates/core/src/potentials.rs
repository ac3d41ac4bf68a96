//! Lexicographic potential functions for ElectOneLDS (`f`) and the
//! two-color line gatherer (`g`).
//!
//! Distance sums are kept symbolically as `q + sum c_m * sqrt(m)` with
//! integer radicands. Equal radicands are merged, so many equalities are
//! decided exactly; everything else is compared on certified rational
//! enclosures at increasing precision.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::geometry::{convex_hull, on_segment, rotate_to_rightmost_topmost, HullOutcome, Point};
use crate::line_patterns::ColorConfig;
use crate::model::{Color, Configuration, Lu};
use crate::rat::Rat;

/// Precision schedule (bits) used when comparing irrational values.
pub const PRECISIONS: [u32; 3] = [64, 256, 1024];

const SMALL_PRIMES: [u32; 25] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// A real number `rational + sum coeff * sqrt(radicand)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RootSum {
    rational: Rat,
    roots: BTreeMap<BigInt, Rat>,
}

/// Split `n` into `(s, m)` with `n = s^2 * m`, pulling out squares of small
/// primes and a final perfect square.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut m = n.clone();
    for &p in &SMALL_PRIMES {
        let p = BigInt::from(p);
        let p2 = &p * &p;
        while (&m % &p2).is_zero() {
            m /= &p2;
            s *= &p;
        }
        if m < p2 {
            break;
        }
    }
    let r = m.sqrt();
    if &r * &r == m {
        return (s * r, BigInt::one());
    }
    (s, m)
}

impl RootSum {
    pub fn zero() -> Self {
        RootSum::default()
    }

    pub fn from_rat(r: Rat) -> Self {
        RootSum { rational: r, roots: BTreeMap::new() }
    }

    pub fn from_int(v: i64) -> Self {
        RootSum::from_rat(Rat::from_int(v))
    }

    /// `sqrt(r)` for a non-negative rational.
    pub fn sqrt(r: &Rat) -> Self {
        assert!(!r.is_negative(), "sqrt of negative value");
        if r.is_zero() {
            return RootSum::zero();
        }
        let prod = r.numer() * r.denom();
        let (s, m) = split_square(&prod);
        let coeff = Rat::from_big(s, r.denom().clone());
        if m.is_one() {
            return RootSum::from_rat(coeff);
        }
        let mut roots = BTreeMap::new();
        roots.insert(m, coeff);
        RootSum { rational: Rat::zero(), roots }
    }

    /// Euclidean distance between two points.
    pub fn dist(a: &Point, b: &Point) -> Self {
        RootSum::sqrt(&a.dist_sq(b))
    }

    pub fn add(&mut self, o: &RootSum) {
        self.rational += &o.rational;
        for (m, c) in &o.roots {
            let e = self.roots.entry(m.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                self.roots.remove(m);
            }
        }
    }

    pub fn neg(&self) -> RootSum {
        RootSum { rational: -&self.rational, roots: self.roots.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &RootSum) -> RootSum {
        let mut r = self.clone();
        r.add(&o.neg());
        r
    }

    /// The exact value when no irrational term remains.
    pub fn as_rational(&self) -> Option<&Rat> {
        self.roots.is_empty().then_some(&self.rational)
    }

    /// Rational bounds `lo <= self <= hi`.
    pub fn enclose(&self, bits: u32) -> (Rat, Rat) {
        let mut lo = self.rational.clone();
        let mut hi = self.rational.clone();
        for (m, c) in &self.roots {
            let (a, b) = Rat::from_big(m.clone(), BigInt::one()).sqrt_bounds(bits);
            if c.is_positive() {
                lo += &(c * &a);
                hi += &(c * &b);
            } else {
                lo += &(c * &b);
                hi += &(c * &a);
            }
        }
        (lo, hi)
    }

    /// Sign of the value, or `None` if the enclosures at every precision in
    /// [`PRECISIONS`] straddle zero.
    pub fn signum(&self) -> Option<i32> {
        if let Some(r) = self.as_rational() {
            return Some(r.signum());
        }
        for bits in PRECISIONS {
            let (lo, hi) = self.enclose(bits);
            if lo.is_positive() {
                return Some(1);
            }
            if hi.is_negative() {
                return Some(-1);
            }
        }
        None
    }

    pub fn approx(&self) -> f64 {
        let (lo, hi) = self.enclose(64);
        (lo.to_f64() + hi.to_f64()) / 2.0
    }
}

impl std::iter::Sum for RootSum {
    fn sum<I: Iterator<Item = RootSum>>(iter: I) -> RootSum {
        let mut acc = RootSum::zero();
        for v in iter {
            acc.add(&v);
        }
        acc
    }
}

/// Outcome of comparing two values whose exact order may be unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LexOrder {
    Less,
    Equal,
    Greater,
    Undecided,
}

impl LexOrder {
    fn from_sign(s: Option<i32>) -> LexOrder {
        match s {
            Some(-1) => LexOrder::Less,
            Some(0) => LexOrder::Equal,
            Some(_) => LexOrder::Greater,
            None => LexOrder::Undecided,
        }
    }
}

pub fn compare(a: &RootSum, b: &RootSum) -> LexOrder {
    LexOrder::from_sign(a.sub(b).signum())
}

/// One component of a potential vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Inf,
    Fin(RootSum),
}

impl Entry {
    pub fn zero() -> Entry {
        Entry::Fin(RootSum::zero())
    }

    pub fn nat(v: usize) -> Entry {
        Entry::Fin(RootSum::from_int(v as i64))
    }

    pub fn cmp(&self, o: &Entry) -> LexOrder {
        match (self, o) {
            (Entry::Inf, Entry::Inf) => LexOrder::Equal,
            (Entry::Inf, Entry::Fin(_)) => LexOrder::Greater,
            (Entry::Fin(_), Entry::Inf) => LexOrder::Less,
            (Entry::Fin(a), Entry::Fin(b)) => compare(a, b),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Inf => f.write_str("inf"),
            Entry::Fin(v) => match v.as_rational() {
                Some(r) => write!(f, "{r:?}"),
                None => write!(f, "~{:.6}", v.approx()),
            },
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Entry::Inf => s.serialize_str("inf"),
            Entry::Fin(v) => match v.as_rational() {
                Some(r) => r.serialize(s),
                None => {
                    let (lo, hi) = v.enclose(64);
                    (lo, hi).serialize(s)
                }
            },
        }
    }
}

/// Five-component potential value compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PotentialVec(pub [Entry; 5]);

impl PotentialVec {
    pub fn zeros() -> Self {
        PotentialVec(std::array::from_fn(|_| Entry::zero()))
    }

    /// Componentwise comparison results.
    pub fn componentwise(&self, o: &PotentialVec) -> [LexOrder; 5] {
        std::array::from_fn(|i| self.0[i].cmp(&o.0[i]))
    }
}

impl fmt::Display for PotentialVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

/// Lexicographic comparison. An undecided component stops the scan.
pub fn lex_cmp(a: &PotentialVec, b: &PotentialVec) -> LexOrder {
    for i in 0..5 {
        match a.0[i].cmp(&b.0[i]) {
            LexOrder::Equal => continue,
            other => return other,
        }
    }
    LexOrder::Equal
}

/// The ElectOneLDS potential `<area, Cdist, #in, Edist, Vdist>`.
pub fn potential_f(config: &Configuration) -> PotentialVec {
    let positions = config.positions();
    let HullOutcome::Polygon(hull) = convex_hull(&positions) else {
        return PotentialVec::zeros();
    };
    let mut v = PotentialVec::zeros();
    v.0[0] = Entry::Fin(RootSum::from_rat(hull.area()));
    if hull.is_symmetric() {
        let c = hull.center();
        v.0[1] = Entry::Fin(positions.iter().map(|p| RootSum::dist(&c, p)).sum());
        return v;
    }
    let inside = positions.iter().filter(|p| hull.strictly_inside(p)).count();
    v.0[2] = Entry::nat(inside);

    let ring = rotate_to_rightmost_topmost(&hull);
    let k = ring.len();
    let mut prefix = Vec::with_capacity(k);
    let mut acc = RootSum::zero();
    for j in 0..k {
        prefix.push(acc.clone());
        acc.add(&RootSum::dist(&ring[j], &ring[(j + 1) % k]));
    }
    let mut edist = RootSum::zero();
    for p in &positions {
        let j = (0..k).find(|&j| *p != ring[(j + 1) % k] && on_segment(p, &ring[j], &ring[(j + 1) % k]));
        if let Some(j) = j {
            edist.add(&prefix[j]);
            edist.add(&RootSum::dist(&ring[j], p));
        }
    }
    v.0[3] = Entry::Fin(edist);

    let vdist = positions
        .iter()
        .map(|p| {
            let best = hull.vertices.iter().map(|w| w.dist_sq(p)).min().expect("hull has vertices");
            RootSum::sqrt(&best)
        })
        .sum();
    v.0[4] = Entry::Fin(vdist);
    v
}

fn has_a(c: Color) -> bool {
    matches!(c, Color::Lu(Lu::A) | Color::Pair(_, Lu::A))
}

fn has_b(c: Color) -> bool {
    matches!(c, Color::Lu(Lu::B) | Color::Pair(_, Lu::B))
}

/// The line-gatherer potential `<Adist, Edist, Mdist, #B, NEdist>`.
///
/// Product colors are read through their inner component.
pub fn potential_g(config: &Configuration) -> PotentialVec {
    let cc = ColorConfig::from_entries(&config.entries);
    let a_points: Vec<&Point> =
        cc.stations.iter().filter(|s| s.marks.iter().any(|m| has_a(m.color))).map(|s| &s.position).collect();
    let positions = config.positions();
    let mut v = PotentialVec::zeros();
    match a_points.len() {
        1 => {
            let pa = a_points[0];
            v.0[0] = Entry::Fin(positions.iter().map(|p| RootSum::dist(pa, p)).sum());
        }
        0 | 2 => {
            v.0[0] = Entry::Inf;
            v.0[1] = Entry::Fin(RootSum::sqrt(&cc.dis_sq()));
            let pm = cc.midpoint();
            v.0[2] = Entry::Fin(positions.iter().map(|p| RootSum::dist(&pm, p)).sum());
            v.0[3] = Entry::nat(config.entries.iter().filter(|(_, c)| has_b(*c)).count());
        }
        _ => {
            for e in v.0.iter_mut().take(4) {
                *e = Entry::Inf;
            }
            v.0[4] = Entry::Fin(positions.iter().map(|p| RootSum::dist(&cc.nearest_endpoint(p), p)).sum());
        }
    }
    v
}

/// Change of one potential component between two instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    Dec,
    Same,
    Inc,
    Unknown,
}

pub fn changes(before: &PotentialVec, after: &PotentialVec) -> [Change; 5] {
    after.componentwise(before).map(|o| match o {
        LexOrder::Less => Change::Dec,
        LexOrder::Equal => Change::Same,
        LexOrder::Greater => Change::Inc,
        LexOrder::Undecided => Change::Unknown,
    })
}

/// Whether a transition agrees with a table row `(dec, inc)` (component
/// indices are 1-based). The first listed decreasing component must
/// strictly decrease with every earlier component unchanged; the other
/// listed decreasing components must not increase and the listed increasing
/// components must not decrease.
pub fn conforms_to_row(
    before: &PotentialVec,
    after: &PotentialVec,
    dec: &[usize],
    inc: &[usize],
) -> Result<(), String> {
    let ch = changes(before, after);
    let first = *dec.iter().min().ok_or("row lists no decreasing component")?;
    for i in 1..first {
        if ch[i - 1] != Change::Same {
            return Err(format!("component {i} changed ({:?}) before the decreasing one", ch[i - 1]));
        }
    }
    if ch[first - 1] != Change::Dec {
        return Err(format!("component {first} is {:?}, expected a decrease", ch[first - 1]));
    }
    for &i in dec {
        if !matches!(ch[i - 1], Change::Dec | Change::Same) {
            return Err(format!("component {i} is {:?}, expected no increase", ch[i - 1]));
        }
    }
    for &i in inc {
        if !matches!(ch[i - 1], Change::Inc | Change::Same) {
            return Err(format!("component {i} is {:?}, expected no decrease", ch[i - 1]));
        }
    }
    Ok(())
}
