use crate::error::{Error, Result};
use crate::math::{self, Point3};

/// Axis-parallel box with `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        for a in 0..3 {
            if !(min[a] <= max[a]) || !min[a].is_finite() || !max[a].is_finite() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "box corners {min:?} {max:?} are not ordered"
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn point(p: Point3) -> Self {
        Self { min: p, max: p }
    }

    /// Smallest box containing all `points`; panics on an empty slice.
    pub fn from_points(points: &[Point3]) -> Self {
        let mut b = Self::point(points[0]);
        for p in &points[1..] {
            b.include(*p);
        }
        b
    }

    pub fn include(&mut self, p: Point3) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(p[a]);
            self.max[a] = self.max[a].max(p[a]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        b.include(other.min);
        b.include(other.max);
        b
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn center(&self) -> Point3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    /// Longest edge; the first axis wins ties.
    pub fn longest_axis(&self) -> usize {
        let mut best = 0;
        for a in 1..3 {
            if self.extent(a) > self.extent(best) {
                best = a;
            }
        }
        best
    }

    pub fn diameter(&self) -> f64 {
        math::dist(self.min, self.max)
    }

    /// Distance between the closest points of the two boxes.
    pub fn distance(&self, other: &Aabb) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let gap = (self.min[a] - other.max[a])
                .max(other.min[a] - self.max[a])
                .max(0.0);
            s += gap * gap;
        }
        math::sqrt(s)
    }

    pub fn contains_point(&self, p: Point3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        self.contains_point(other.min) && self.contains_point(other.max)
    }

    pub fn translated(&self, d: Point3) -> Aabb {
        Aabb {
            min: math::add(self.min, d),
            max: math::add(self.max, d),
        }
    }
}
