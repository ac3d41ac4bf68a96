//! Local coordinate frames: rational similarities that keep orientation.

use thiserror::Error;

use crate::geometry::Point;
use crate::model::Snapshot;
use crate::rat::Rat;

/// `p -> M p + translation` with `M = s * [[a, -b], [b, a]]`, `a^2 + b^2 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    m: [[Rat; 2]; 2],
    translation: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame matrix is singular")]
    Singular,
    #[error("frame reverses orientation")]
    OrientationReversing,
    #[error("frame is not a similarity")]
    NotSimilarity,
}

impl Frame {
    pub fn identity() -> Frame {
        Frame::from_matrix([[Rat::one(), Rat::zero()], [Rat::zero(), Rat::one()]], Point::origin()).expect("identity")
    }

    /// Rotation by the Pythagorean triple `(a, b, c)`, then scaling, then
    /// translation.
    pub fn rotation(a: i64, b: i64, c: i64, scale: Rat, translation: Point) -> Result<Frame, FrameError> {
        assert!(c != 0 && a * a + b * b == c * c, "not a Pythagorean triple");
        let ca = &scale * &Rat::new(a, c);
        let sb = &scale * &Rat::new(b, c);
        Frame::from_matrix([[ca.clone(), -&sb], [sb, ca]], translation)
    }

    pub fn from_matrix(m: [[Rat; 2]; 2], translation: Point) -> Result<Frame, FrameError> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if det.is_zero() {
            return Err(FrameError::Singular);
        }
        if det.is_negative() {
            return Err(FrameError::OrientationReversing);
        }
        if m[0][0] != m[1][1] || m[0][1] != -&m[1][0] {
            return Err(FrameError::NotSimilarity);
        }
        Ok(Frame { m, translation })
    }

    pub fn apply(&self, p: &Point) -> Point {
        let x = &(&self.m[0][0] * &p.x + &self.m[0][1] * &p.y) + &self.translation.x;
        let y = &(&self.m[1][0] * &p.x + &self.m[1][1] * &p.y) + &self.translation.y;
        Point::new(x, y)
    }

    pub fn inverse_apply(&self, q: &Point) -> Point {
        let det = &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0];
        let u = &q.x - &self.translation.x;
        let v = &q.y - &self.translation.y;
        let x = (&self.m[1][1] * &u - &self.m[0][1] * &v) / &det;
        let y = (&self.m[0][0] * &v - &self.m[1][0] * &u) / &det;
        Point::new(x, y)
    }

    pub fn apply_snapshot(&self, s: &Snapshot) -> Snapshot {
        Snapshot {
            entries: s.entries.iter().map(|(p, c)| (self.apply(p), *c)).collect(),
            own_position: self.apply(&s.own_position),
            own_light: s.own_light,
        }
    }
}
