use super::{GeomError, Point2, Point3, EPS_PLANE};

/// Newell normal of a polygon loop; its length is twice the loop area.
fn newell(face: &[Point3]) -> Point3 {
    let n = face.len();
    let mut acc = Point3::default();
    for i in 0..n {
        let a = face[i];
        let b = face[(i + 1) % n];
        acc.x += (a.y - b.y) * (a.z + b.z);
        acc.y += (a.z - b.z) * (a.x + b.x);
        acc.z += (a.x - b.x) * (a.y + b.y);
    }
    acc
}

/// Unit normal following the right-hand rule on the loop order.
pub fn face_normal(face: &[Point3]) -> Option<Point3> {
    let n = newell(face);
    let len = n.norm();
    (len > 1e-12).then(|| n * (1.0 / len))
}

/// Area of a planar loop.
pub fn face_area(face: &[Point3]) -> f64 {
    0.5 * newell(face).norm()
}

pub fn triangle_area(t: &[Point3; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm()
}

/// Ear-clipping triangulation of a simple planar loop.
///
/// Zero-area ears (collinear vertices) are clipped but not emitted.
pub fn triangulate_face(face: &[Point3]) -> Result<Vec<[Point3; 3]>, GeomError> {
    if face.len() < 3 {
        return Err(GeomError::DegenerateFace);
    }
    let normal = face_normal(face).ok_or(GeomError::DegenerateFace)?;
    let n_pts = face.len() as f64;
    let centroid = face.iter().fold(Point3::default(), |a, &p| a + p) * (1.0 / n_pts);
    for (index, p) in face.iter().enumerate() {
        let distance = (*p - centroid).dot(normal).abs();
        if distance > EPS_PLANE {
            return Err(GeomError::NonPlanar { index, distance });
        }
    }

    // Orthonormal basis (u, v) with u × v = normal, so the projected loop is CCW.
    let helper = if normal.x.abs() < 0.9 { Point3::new(1.0, 0.0, 0.0) } else { Point3::new(0.0, 1.0, 0.0) };
    let u = helper.cross(normal).normalized();
    let v = normal.cross(u);
    let flat: Vec<Point2> = face
        .iter()
        .map(|&p| {
            let d = p - centroid;
            Point2::new(d.dot(u), d.dot(v))
        })
        .collect();

    let scale = flat.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-12);
    let tol = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..face.len()).collect();
    let mut out = Vec::with_capacity(face.len() - 2);
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (flat[ia], flat[ib], flat[ic]);
            let turn = (b - a).cross(c - b);
            if turn < -tol {
                continue;
            }
            let blocked = turn > tol
                && idx.iter().any(|&j| {
                    j != ia
                        && j != ib
                        && j != ic
                        && [a, b, c].iter().all(|q| q.dist(flat[j]) > 1e-9 * scale)
                        && inside_or_on(flat[j], a, b, c, tol)
                });
            if blocked {
                continue;
            }
            if turn > tol {
                out.push([face[ia], face[ib], face[ic]]);
            }
            idx.remove(k);
            clipped = true;
            break;
        }
        guard += 1;
        if !clipped || guard > 4 * face.len() {
            return Err(GeomError::DegenerateFace);
        }
    }
    let last = [face[idx[0]], face[idx[1]], face[idx[2]]];
    if triangle_area(&last) > 0.0 {
        out.push(last);
    }
    Ok(out)
}

/// Inside or on the boundary of the CCW triangle `abc`.
fn inside_or_on(p: Point2, a: Point2, b: Point2, c: Point2, tol: f64) -> bool {
    (b - a).cross(p - a) >= -tol && (c - b).cross(p - b) >= -tol && (a - c).cross(p - c) >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_identity() {
        let t = [Point3::new(0.0, 0.0, 1.0), Point3::new(2.0, 0.0, 1.0), Point3::new(0.0, 1.0, 1.0)];
        let tris = triangulate_face(&t).unwrap();
        assert_eq!(tris, vec![t]);
    }

    #[test]
    fn quad_splits_in_two() {
        let q = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(3.0, 0.0, 1.0),
            Point3::new(3.0, 2.0, 1.0),
            Point3::new(0.0, 2.0, 0.0),
        ];
        let tris = triangulate_face(&q).unwrap();
        assert_eq!(tris.len(), 2);
        let sum: f64 = tris.iter().map(triangle_area).sum();
        // 3 m run, 1 m rise, 2 m wide: sloped length sqrt(10).
        assert!((sum - 2.0 * 10f64.sqrt()).abs() < 1e-12);
        assert!((sum - face_area(&q)).abs() < 1e-12);
    }

    #[test]
    fn lifted_corner_is_rejected() {
        let q = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.1),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(matches!(triangulate_face(&q), Err(GeomError::NonPlanar { .. })));
    }

    #[test]
    fn collinear_vertices_and_concave_loops() {
        // L shape with an extra collinear vertex on the bottom edge.
        let l = [
            Point3::new(0.0, 0.0, 2.0),
            Point3::new(1.0, 0.0, 2.0),
            Point3::new(2.0, 0.0, 2.0),
            Point3::new(2.0, 1.0, 2.0),
            Point3::new(1.0, 1.0, 2.0),
            Point3::new(1.0, 2.0, 2.0),
            Point3::new(0.0, 2.0, 2.0),
        ];
        let tris = triangulate_face(&l).unwrap();
        let sum: f64 = tris.iter().map(triangle_area).sum();
        assert!((sum - 3.0).abs() < 1e-12);
    }
}
