use super::{ExteriorError, Part, RoofKind};
use crate::geom::{Point2, Point3};

/// Horizontal frame of a sloped roof plane: `s` runs along the eave, `d`
/// runs inward, and the roof height is `z0 + slope * d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofFrame {
    pub origin: Point2,
    pub z0: f64,
    pub t: Point2,
    pub n: Point2,
    pub slope: f64,
}

impl RoofFrame {
    pub fn at(&self, s: f64, d: f64) -> Point3 {
        (self.origin + self.t * s + self.n * d).with_z(self.z0 + self.slope * d)
    }

    /// Point above `(s, d)` at an explicit height.
    pub fn at_z(&self, s: f64, d: f64, z: f64) -> Point3 {
        (self.origin + self.t * s + self.n * d).with_z(z)
    }

    pub fn sd(&self, p: Point2) -> (f64, f64) {
        let r = p - self.origin;
        (r.dot(self.t), r.dot(self.n))
    }

    pub fn z(&self, d: f64) -> f64 {
        self.z0 + self.slope * d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoofFace {
    pub points: Vec<Point3>,
    pub frame: RoofFrame,
}

/// Roof surface of one part plus the roof line above each wall edge.
#[derive(Debug, Clone)]
pub struct RoofGeometry {
    pub faces: Vec<RoofFace>,
    /// `profiles[k]` runs from corner `k` to corner `k + 1` along the top of wall `k`.
    pub profiles: [Vec<Point3>; 4],
}

fn dir(a: Point2, b: Point2) -> Point2 {
    (b - a).normalized()
}

fn inward(a: Point2, b: Point2) -> Point2 {
    dir(a, b).perp()
}

fn eave_frame(c: &[Point2; 4], k: usize, h: f64, slope: f64) -> RoofFrame {
    let (a, b) = (c[k % 4], c[(k + 1) % 4]);
    RoofFrame { origin: a, z0: h, t: dir(a, b), n: inward(a, b), slope }
}

pub(crate) fn is_rectangle(c: &[Point2; 4]) -> bool {
    (0..4).all(|k| {
        let e0 = c[(k + 1) % 4] - c[k];
        let e1 = c[(k + 2) % 4] - c[(k + 1) % 4];
        e0.dot(e1).abs() <= 1e-9 * e0.norm() * e1.norm()
    })
}

fn parallel(c: &[Point2; 4], k: usize) -> bool {
    let e0 = c[(k + 1) % 4] - c[k % 4];
    let e2 = c[(k + 3) % 4] - c[(k + 2) % 4];
    e0.cross(e2).abs() <= 1e-9 * e0.norm() * e2.norm() && e0.dot(e2) < 0.0
}

fn flat_profiles(c: &[Point2; 4], z: impl Fn(Point2) -> f64) -> [Vec<Point3>; 4] {
    std::array::from_fn(|k| {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        vec![a.with_z(z(a)), b.with_z(z(b))]
    })
}

/// Builds the roof of a part whose walls end at height `h`.
pub fn roof_geometry(part: &Part, h: f64) -> Result<RoofGeometry, ExteriorError> {
    let c = &part.corners;
    let rise = part.roof.rise;
    let rect = is_rectangle(c);
    let invalid = |msg: &str| ExteriorError::InvalidPart(msg.to_string());
    if part.roof.kind != RoofKind::Flat && !(rise > 0.0 && rise.is_finite()) {
        return Err(invalid("roof rise must be positive"));
    }
    match part.roof.kind {
        RoofKind::Flat => {
            let frame = eave_frame(c, 0, h, 0.0);
            Ok(RoofGeometry {
                faces: vec![RoofFace { points: c.iter().map(|p| p.with_z(h)).collect(), frame }],
                profiles: flat_profiles(c, |_| h),
            })
        }
        RoofKind::Shed => {
            let hi = part.roof.axis % 4;
            let lo = (hi + 2) % 4;
            if !parallel(c, hi) {
                return Err(invalid("shed roof needs parallel high and low edges"));
            }
            let base = eave_frame(c, lo, h, 0.0);
            let depth = base.sd(c[hi]).1;
            let frame = RoofFrame { slope: rise / depth, ..base };
            let z = |p: Point2| frame.z(frame.sd(p).1);
            Ok(RoofGeometry {
                faces: vec![RoofFace { points: c.iter().map(|&p| p.with_z(z(p))).collect(), frame }],
                profiles: flat_profiles(c, z),
            })
        }
        _ if !rect => Err(invalid("pitched roofs need a rectangular part")),
        RoofKind::Gabled => {
            let k = part.roof.axis % 2;
            let k1 = k + 1;
            let k2 = (k + 2) % 4;
            let k3 = (k + 3) % 4;
            let top = h + rise;
            let m1 = ((c[k1] + c[k2]) * 0.5).with_z(top);
            let m0 = ((c[k3] + c[k]) * 0.5).with_z(top);
            let half = 0.5 * c[k1].dist(c[k2]);
            let eh = |p: Point2| p.with_z(h);
            let faces = vec![
                RoofFace { points: vec![eh(c[k]), eh(c[k1]), m1, m0], frame: eave_frame(c, k, h, rise / half) },
                RoofFace { points: vec![eh(c[k2]), eh(c[k3]), m0, m1], frame: eave_frame(c, k2, h, rise / half) },
            ];
            let mut profiles = flat_profiles(c, |_| h);
            profiles[k1] = vec![eh(c[k1]), m1, eh(c[k2])];
            profiles[k3] = vec![eh(c[k3]), m0, eh(c[k])];
            Ok(RoofGeometry { faces, profiles })
        }
        RoofKind::Hipped | RoofKind::Pyramidal => {
            let long = if c[0].dist(c[1]) >= c[1].dist(c[2]) { 0 } else { 1 };
            let k = long;
            let (k1, k2, k3) = (k + 1, (k + 2) % 4, (k + 3) % 4);
            let len = c[k].dist(c[k1]);
            let half = 0.5 * c[k1].dist(c[k2]);
            let top = h + rise;
            let eh = |p: Point2| p.with_z(h);
            let slope = rise / half;
            let faces = if part.roof.kind == RoofKind::Pyramidal || len - 2.0 * half <= 1e-6 {
                let centroid = (c[0] + c[1] + c[2] + c[3]) * 0.25;
                let apex = centroid.with_z(top);
                (0..4)
                    .map(|j| {
                        let (a, b) = (c[j], c[(j + 1) % 4]);
                        let frame = eave_frame(c, j, h, 0.0);
                        let dist = frame.sd(centroid).1;
                        RoofFace { points: vec![eh(a), eh(b), apex], frame: RoofFrame { slope: rise / dist, ..frame } }
                    })
                    .collect()
            } else {
                let t = dir(c[k], c[k1]);
                let r0 = ((c[k3] + c[k]) * 0.5 + t * half).with_z(top);
                let r1 = ((c[k1] + c[k2]) * 0.5 - t * half).with_z(top);
                vec![
                    RoofFace { points: vec![eh(c[k]), eh(c[k1]), r1, r0], frame: eave_frame(c, k, h, slope) },
                    RoofFace { points: vec![eh(c[k1]), eh(c[k2]), r1], frame: eave_frame(c, k1, h, slope) },
                    RoofFace { points: vec![eh(c[k2]), eh(c[k3]), r0, r1], frame: eave_frame(c, k2, h, slope) },
                    RoofFace { points: vec![eh(c[k3]), eh(c[k]), r0], frame: eave_frame(c, k3, h, slope) },
                ]
            };
            Ok(RoofGeometry { faces, profiles: flat_profiles(c, |_| h) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::RoofSpec;
    use crate::geom::face_normal;

    fn part(kind: RoofKind, axis: usize) -> Part {
        Part {
            corners: [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(10.0, 8.0), Point2::new(0.0, 8.0)],
            stories: 1,
            roof: RoofSpec { kind, rise: 2.0, axis },
        }
    }

    #[test]
    fn faces_lie_on_their_frames() {
        for kind in [RoofKind::Flat, RoofKind::Gabled, RoofKind::Hipped, RoofKind::Pyramidal, RoofKind::Shed] {
            for axis in 0..4 {
                let g = roof_geometry(&part(kind, axis), 3.0).unwrap();
                for f in &g.faces {
                    for p in &f.points {
                        let (_, d) = f.frame.sd(p.xy());
                        assert!((f.frame.z(d) - p.z).abs() < 1e-12, "{kind:?} {axis}");
                    }
                    // Roof surfaces face upward.
                    assert!(face_normal(&f.points).unwrap().z > 0.0, "{kind:?} {axis}");
                }
            }
        }
    }

    #[test]
    fn ridge_and_apex_heights() {
        let g = roof_geometry(&part(RoofKind::Pyramidal, 0), 3.0).unwrap();
        let apex = g.faces[0].points[2];
        assert_eq!((apex.x, apex.y, apex.z), (5.0, 4.0, 5.0));
        let g = roof_geometry(&part(RoofKind::Hipped, 0), 3.0).unwrap();
        let ridge: Vec<_> = g.faces[0].points.iter().filter(|p| p.z == 5.0).collect();
        assert_eq!(ridge.len(), 2);
        assert!((ridge[0].dist(*ridge[1]) - 2.0).abs() < 1e-12);
    }
}
