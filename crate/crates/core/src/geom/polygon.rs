use super::{GeomError, Point2};
use serde::{Deserialize, Serialize};

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn polygon_area(vertices: &[Point2]) -> Result<f64, GeomError> {
    if vertices.len() < 3 {
        return Err(GeomError::TooFewVertices(vertices.len()));
    }
    if vertices.iter().any(|p| !p.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    let a = signed_area(vertices);
    if a.abs() <= 1e-12 {
        return Err(GeomError::ZeroArea);
    }
    Ok(a)
}

pub(crate) fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

const BOUNDARY_EPS: f64 = 1e-9;

/// Even-odd membership test. Points on the boundary (within 1e-9) count as inside.
pub fn point_in_polygon(p: Point2, poly: &FootprintPolygon) -> bool {
    point_in_ring(p, poly.vertices())
}

pub(crate) fn point_in_ring(p: Point2, ring: &[Point2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        if segment_distance(p, ring[i], ring[(i + 1) % n]) <= BOUNDARY_EPS {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Closed segment intersection test, touching included.
pub(crate) fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let tol = 1e-12;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    (d1.abs() <= tol && on_segment(c, d, a))
        || (d2.abs() <= tol && on_segment(c, d, b))
        || (d3.abs() <= tol && on_segment(a, b, c))
        || (d4.abs() <= tol && on_segment(a, b, d))
}

/// Simple, counter-clockwise 2D polygon in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct FootprintPolygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for FootprintPolygon {
    type Error = GeomError;
    fn try_from(v: Vec<Point2>) -> Result<Self, GeomError> {
        FootprintPolygon::new(v)
    }
}

impl From<FootprintPolygon> for Vec<Point2> {
    fn from(p: FootprintPolygon) -> Self {
        p.vertices
    }
}

impl FootprintPolygon {
    /// Builds a polygon, dropping repeated consecutive vertices and
    /// reversing clockwise input.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let mut v: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if v.last().is_none_or(|q: &Point2| q.dist(p) > 1e-9) {
                v.push(p);
            }
        }
        while v.len() > 1 && v[0].dist(v[v.len() - 1]) <= 1e-9 {
            v.pop();
        }
        let a = polygon_area(&v)?;
        if a < 0.0 {
            v.reverse();
        }
        check_simple(&v)?;
        Ok(Self { vertices: v })
    }

    /// Axis-aligned rectangle with lower-left corner `(x0, y0)`.
    pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64) -> Result<Self, GeomError> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x0 + w, y0),
            Point2::new(x0 + w, y0 + h),
            Point2::new(x0, y0 + h),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = a.cross(b);
            cx += (a.x + b.x) * c;
            cy += (a.y + b.y) * c;
        }
        let a6 = 6.0 * self.area();
        Point2::new(cx / a6, cy / a6)
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_polygon(p, self)
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, d: Point2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| p + d).collect(),
        }
    }

    /// Vertices rounded onto the storage lattice.
    pub fn quantized(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| Point2::new(super::quantize(p.x), super::quantize(p.y))).collect(),
        }
    }

    /// Drops vertices whose incident edges are collinear within `angle_tol` radians.
    pub fn simplified(&self, angle_tol: f64) -> Self {
        let mut v = self.vertices.clone();
        loop {
            let n = v.len();
            if n <= 3 {
                break;
            }
            let mut removed = false;
            for i in 0..n {
                let prev = v[(i + n - 1) % n];
                let cur = v[i];
                let next = v[(i + 1) % n];
                let d0 = (cur - prev).normalized();
                let d1 = (next - cur).normalized();
                if d0.cross(d1).abs() <= angle_tol.sin() && d0.dot(d1) > 0.0 {
                    v.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        Self { vertices: v }
    }

    /// Same vertex set within `tol`, ignoring starting vertex.
    pub fn congruent_to(&self, other: &Self, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let n = self.len();
        (0..n).any(|shift| {
            (0..n).all(|i| self.vertices[i].dist(other.vertices[(i + shift) % n]) <= tol)
        })
    }

    /// Shortest edge length.
    pub fn min_edge(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).fold(f64::INFINITY, f64::min)
    }
}

fn check_simple(v: &[Point2]) -> Result<(), GeomError> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (c, d) = (v[j], v[(j + 1) % n]);
            if adjacent {
                // Adjacent edges may only share their common vertex; reject folds.
                let shared = if j == i + 1 { b } else { a };
                let (u, w) = if j == i + 1 { (a, d) } else { (b, c) };
                let e0 = u - shared;
                let e1 = w - shared;
                if e0.cross(e1).abs() <= 1e-12 && e0.dot(e1) > 0.0 {
                    return Err(GeomError::SelfIntersecting(i, j));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Err(GeomError::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> FootprintPolygon {
        FootprintPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn area_examples() {
        assert_eq!(polygon_area(sq().vertices()).unwrap(), 1.0);
        let r = FootprintPolygon::rectangle(0.0, 0.0, 10.0, 8.0).unwrap();
        assert_eq!(r.area(), 80.0);
        let tri = [Point2::new(0.0, 0.0), Point2::new(3.0, 0.0), Point2::new(0.0, 4.0)];
        assert_eq!(polygon_area(&tri).unwrap(), 6.0);
    }

    #[test]
    fn area_rejects_degenerate() {
        assert_eq!(
            polygon_area(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeomError::TooFewVertices(2))
        );
        let line = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert_eq!(polygon_area(&line), Err(GeomError::ZeroArea));
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let p = FootprintPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = FootprintPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(GeomError::SelfIntersecting(..)) | Err(GeomError::ZeroArea)));
    }

    #[test]
    fn membership() {
        let s = sq();
        assert!(point_in_polygon(Point2::new(0.5, 0.5), &s));
        assert!(!point_in_polygon(Point2::new(2.0, 2.0), &s));
        assert!(point_in_polygon(Point2::new(1.0, 1.0), &s));
        assert!(point_in_polygon(Point2::new(0.5, 0.0), &s));
    }

    /// Brute-force ray casting in several directions, with the boundary
    /// convention applied separately.
    fn brute_inside(p: Point2, poly: &FootprintPolygon) -> bool {
        if poly.boundary_distance(p) <= 1e-9 {
            return true;
        }
        let dirs = [0.3_f64, 1.1, 2.9, 4.4];
        let votes = dirs
            .iter()
            .filter(|&&ang| {
                let d = Point2::new(ang.cos(), ang.sin());
                let far = p + d * 1e6;
                poly.edges().filter(|&(a, b)| segments_intersect(p, far, a, b)).count() % 2 == 1
            })
            .count();
        votes >= 2
    }

    #[test]
    fn vertex_and_interior_agree_with_ray_casting() {
        let poly = FootprintPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 3.0),
            Point2::new(2.0, 1.5),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        for v in poly.vertices() {
            assert!(point_in_polygon(*v, &poly));
            assert!(brute_inside(*v, &poly));
        }
        for i in 0..40 {
            for j in 0..30 {
                let p = Point2::new(-0.45 + i as f64 * 0.123, -0.37 + j as f64 * 0.117);
                assert_eq!(point_in_polygon(p, &poly), brute_inside(p, &poly), "{p:?}");
            }
        }
    }

    #[test]
    fn simplify_drops_collinear() {
        let p = FootprintPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.simplified(1e-6).len(), 4);
    }
}
