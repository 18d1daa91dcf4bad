//! Planar primitives: points, discs and the swept-disc clearance test.

use serde::{Deserialize, Serialize};

/// A point in the workspace plane, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Linear interpolation, `t = 0` gives `self`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// Circular footprint of a cylindrical object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub const fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Overlap test with `slack` mm of tolerance in favour of "no overlap".
    pub fn overlaps(&self, other: &Disc, slack: f64) -> bool {
        self.center.distance(other.center) < self.radius + other.radius - slack
    }
}

/// Axis-aligned workspace rectangle `[0, width] x [0, height]`.
///
/// The edge `y = 0` is the open front of the shelf where the robots stand;
/// the other three edges are walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub width: f64,
    pub height: f64,
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            width: 1100.0,
            height: 500.0,
        }
    }
}

impl Workspace {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    /// Strict interior test used for drop-off locations.
    pub fn strictly_outside(&self, p: Point) -> bool {
        p.x < 0.0 || p.x > self.width || p.y < 0.0 || p.y > self.height
    }

    /// Membership in the workspace extended through its open front edge
    /// (`y` unbounded below). The region is convex, so a segment lies in it
    /// iff both endpoints do.
    pub fn admits_through_front(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y <= self.height
    }
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
pub fn segment_point_distance(a: Point, b: Point, p: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a.distance(p);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    Point::new(a.x + t * dx, a.y + t * dy).distance(p)
}

/// Signed clearance between a disc of radius `moving_radius` swept along
/// `a`-`b` and an obstacle disc. Non-negative means no contact.
pub fn swept_clearance(a: Point, b: Point, moving_radius: f64, obstacle: &Disc) -> f64 {
    segment_point_distance(a, b, obstacle.center) - moving_radius - obstacle.radius
}
