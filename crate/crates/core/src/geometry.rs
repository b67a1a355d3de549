//! Planar geometry used by the region, ROI and tracking code.
//!
//! Pixel `(col, row)` covers the unit square `[col, col+1) x [row, row+1)`,
//! so its center sits at `(col + 0.5, row + 0.5)`.

use std::ops::{Add, Mul, Sub};

const ON_EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let len = (b - a).norm().max(1.0);
    if cross(a, b, p).abs() > ON_EDGE_EPS * len {
        return false;
    }
    p.x >= a.x.min(b.x) - ON_EDGE_EPS
        && p.x <= a.x.max(b.x) + ON_EDGE_EPS
        && p.y >= a.y.min(b.y) - ON_EDGE_EPS
        && p.y <= a.y.max(b.y) + ON_EDGE_EPS
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Axis-aligned bounding box `[min_x, max_x] x [min_y, max_y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn of(points: &[Point]) -> BBox {
        let mut bb = BBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in points {
            bb.min_x = bb.min_x.min(p.x);
            bb.min_y = bb.min_y.min(p.y);
            bb.max_x = bb.max_x.max(p.x);
            bb.max_y = bb.max_y.max(p.y);
        }
        bb
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.min_x + self.max_x), 0.5 * (self.min_y + self.max_y))
    }
}

/// Closed polygon given by its vertices in order (either orientation).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices)
    }

    /// Point-in-polygon with the boundary counted as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.edges().any(|(a, b)| on_segment(p, a, b)) {
            return true;
        }
        // even-odd ray casting
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_at {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True if no two non-adjacent edges intersect and no vertex repeats.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.vertices[i] == self.vertices[j] {
                    return false;
                }
            }
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if segments_cross(a, b, c, d) || on_segment(a, c, d) || on_segment(b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn area(&self) -> f64 {
        let s: f64 = self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum();
        0.5 * s.abs()
    }

    pub fn transformed(&self, m: &Affine) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&p| m.apply(p)).collect())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon {
        self.transformed(&Affine::translation(dx, dy))
    }

    /// Convex hull (Andrew's monotone chain), counter-clockwise in image axes.
    pub fn convex_hull(points: &[Point]) -> Polygon {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Polygon::new(pts);
        }
        let mut lower: Vec<Point> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Polygon::new(lower)
    }
}

/// Four corners of an ROI, in order around its boundary.
///
/// Stays convex under any non-degenerate affine map, which is what
/// [`Quad::contains`] relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub corners: [Point; 4],
}

impl Quad {
    pub fn axis_aligned(x0: f64, y0: f64, size: f64) -> Quad {
        Quad {
            corners: [
                Point::new(x0, y0),
                Point::new(x0 + size, y0),
                Point::new(x0 + size, y0 + size),
                Point::new(x0, y0 + size),
            ],
        }
    }

    pub fn transformed(&self, m: &Affine) -> Quad {
        Quad {
            corners: self.corners.map(|p| m.apply(p)),
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.corners)
    }

    pub fn centroid(&self) -> Point {
        let s = self.corners.iter().fold(Point::default(), |acc, &p| acc + p);
        s * 0.25
    }

    /// Convex containment test, boundary inclusive.
    pub fn contains(&self, p: Point) -> bool {
        let mut pos = false;
        let mut neg = false;
        for i in 0..4 {
            let c = cross(self.corners[i], self.corners[(i + 1) % 4], p);
            if c > ON_EDGE_EPS {
                pos = true;
            } else if c < -ON_EDGE_EPS {
                neg = true;
            }
            if pos && neg {
                return false;
            }
        }
        true
    }

    pub fn max_corner_distance(&self, other: &Quad) -> f64 {
        self.corners
            .iter()
            .zip(other.corners.iter())
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// 2x3 affine map `[a b tx; c d ty]` acting on column vectors `(x, y, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub m: [[f64; 3]; 2],
}

impl Default for Affine {
    fn default() -> Self {
        Affine::identity()
    }
}

impl Affine {
    pub const fn new(m: [[f64; 3]; 2]) -> Self {
        Affine { m }
    }

    pub const fn identity() -> Self {
        Affine::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    }

    pub const fn translation(dx: f64, dy: f64) -> Self {
        Affine::new([[1.0, 0.0, dx], [0.0, 1.0, dy]])
    }

    /// Rotation by `angle` radians and isotropic scale about `center`.
    pub fn similarity_about(center: Point, angle: f64, scale: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let a = scale * c;
        let b = -scale * s;
        let cc = scale * s;
        let d = scale * c;
        Affine::new([
            [a, b, center.x - a * center.x - b * center.y],
            [cc, d, center.y - cc * center.x - d * center.y],
        ])
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.m;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn translation_part(&self) -> Point {
        Point::new(self.m[0][2], self.m[1][2])
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// `self.then(other)` maps `p` to `other(self(p))`.
    pub fn then(&self, other: &Affine) -> Affine {
        let a = &other.m;
        let b = &self.m;
        let mut out = [[0.0; 3]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            row[0] = a[r][0] * b[0][0] + a[r][1] * b[1][0];
            row[1] = a[r][0] * b[0][1] + a[r][1] * b[1][1];
            row[2] = a[r][0] * b[0][2] + a[r][1] * b[1][2] + a[r][2];
        }
        Affine::new(out)
    }

    pub fn inverse(&self) -> Option<Affine> {
        let det = self.det();
        if det.abs() < 1e-12 {
            return None;
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let ia = d / det;
        let ib = -b / det;
        let ic = -c / det;
        let id = a / det;
        Some(Affine::new([
            [ia, ib, -(ia * tx + ib * ty)],
            [ic, id, -(ic * tx + id * ty)],
        ]))
    }

    pub fn max_abs_diff(&self, other: &Affine) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
