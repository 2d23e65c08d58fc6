use super::outline::{clip_halfplane, convex_overlap_area, union_outline};
use super::roof::{roof_geometry, RoofFace, RoofFrame, RoofGeometry};
use super::{
    check_watertight, BuildingHull, ExteriorError, FaceRole, Part, RoofKind, Superstructure, SuperstructureKind,
};
use crate::geom::{polygon_area, FootprintPolygon, NodePool, Point2, Point3, WireframeGraph, EPS_MERGE};
use std::collections::BTreeSet;

const TOL: f64 = 1e-7;
/// Smallest vertical gap between a lower roof line and the wall top it runs under.
const MIN_CLEARANCE: f64 = 0.2;
const SUPER_MARGIN: f64 = 0.3;

/// Roof line along an edge as `(s, z)` pairs with increasing `s`.
#[derive(Debug, Clone)]
struct Profile(Vec<(f64, f64)>);

impl Profile {
    fn eval(&self, s: f64) -> f64 {
        let p = &self.0;
        if s <= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            if s <= w[1].0 {
                let span = w[1].0 - w[0].0;
                if span <= 0.0 {
                    return w[1].1;
                }
                return w[0].1 + (w[1].1 - w[0].1) * (s - w[0].0) / span;
            }
        }
        p[p.len() - 1].1
    }

    /// Polyline restricted to `[s0, s1]`, endpoints included.
    fn restrict(&self, s0: f64, s1: f64) -> Vec<(f64, f64)> {
        let mut out = vec![(s0, self.eval(s0))];
        out.extend(self.0.iter().filter(|&&(s, _)| s > s0 + TOL && s < s1 - TOL).copied());
        out.push((s1, self.eval(s1)));
        out
    }

    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|p| p.0)
    }
}

struct EdgeFrame {
    a: Point2,
    t: Point2,
    len: f64,
}

impl EdgeFrame {
    fn new(part: &Part, k: usize) -> Self {
        let a = part.corners[k];
        let b = part.corners[(k + 1) % 4];
        Self { a, t: (b - a).normalized(), len: a.dist(b) }
    }

    fn s(&self, p: Point2) -> f64 {
        (p - self.a).dot(self.t)
    }

    fn at(&self, s: f64, z: f64) -> Point3 {
        (self.a + self.t * s).with_z(z)
    }

    fn profile(&self, pts: &[Point3]) -> Profile {
        let mut v: Vec<(f64, f64)> = pts.iter().map(|p| (self.s(p.xy()), p.z)).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        Profile(v)
    }
}

/// Interval `[s0, s1]` (in the frame of `a`'s edge `i`) where edge `j` of
/// `b` runs along it in the opposite direction.
pub(super) fn shared_interval(a: &Part, i: usize, b: &Part, j: usize) -> Option<(f64, f64)> {
    let ea = EdgeFrame::new(a, i);
    let (qa, qb) = (b.corners[j], b.corners[(j + 1) % 4]);
    if (qb - qa).normalized().dot(ea.t) > -1.0 + 1e-9 {
        return None;
    }
    let line_dist = |p: Point2| (p - ea.a).cross(ea.t).abs();
    if line_dist(qa) > TOL || line_dist(qb) > TOL {
        return None;
    }
    let (s0, s1) = {
        let (x, y) = (ea.s(qa), ea.s(qb));
        (x.min(y).max(0.0), x.max(y).min(ea.len))
    };
    (s1 - s0 > 1e-6).then_some((s0, s1))
}

#[derive(Debug, Clone)]
enum Cut {
    /// Whole wall (lower and upper) removed over the interval.
    Full,
    /// Wall below the wall top removed; a neighbour's flat roof meets the wall top.
    Lower,
    /// Neighbour's roof line runs below the wall top; the wall keeps a notch.
    Notch(Vec<(f64, f64)>),
}

struct Contact {
    s0: f64,
    s1: f64,
    cut: Cut,
}

fn classify(p: &Profile, q: &Profile, h: f64, s0: f64, s1: f64) -> Result<Cut, String> {
    let mut ss: Vec<f64> = vec![s0, s1];
    ss.extend(p.breakpoints().chain(q.breakpoints()).filter(|&s| s > s0 && s < s1));
    let diffs: Vec<f64> = ss.iter().map(|&s| q.eval(s) - p.eval(s)).collect();
    if diffs.iter().all(|d| d.abs() <= TOL) || diffs.iter().all(|&d| d >= -TOL) {
        return Ok(Cut::Full);
    }
    if diffs.iter().all(|&d| d <= TOL) {
        let qz: Vec<f64> = ss.iter().map(|&s| q.eval(s)).collect();
        if qz.iter().all(|z| (z - h).abs() <= TOL) {
            return Ok(Cut::Lower);
        }
        if qz.iter().all(|&z| z <= h - MIN_CLEARANCE + TOL) {
            return Ok(Cut::Notch(q.restrict(s0, s1)));
        }
        return Err("neighbouring roof line reaches above the wall top".into());
    }
    Err("roof lines cross".into())
}

type Face = (Vec<Point3>, FaceRole);

fn wall_faces(
    parts: &[Part],
    roofs: &[RoofGeometry],
    pi: usize,
    k: usize,
    floor_height: f64,
    out: &mut Vec<Face>,
) -> Result<(), ExteriorError> {
    let part = &parts[pi];
    let ef = EdgeFrame::new(part, k);
    let h = part.wall_top(floor_height);
    let prof = ef.profile(&roofs[pi].profiles[k]);
    let err = |reason: String| ExteriorError::Contact { part: pi, edge: k, reason };
    let mut contacts = Vec::new();
    for (qi, q) in parts.iter().enumerate() {
        if qi == pi {
            continue;
        }
        for j in 0..4 {
            if let Some((s0, s1)) = shared_interval(part, k, q, j) {
                let qprof = ef.profile(&roofs[qi].profiles[j]);
                let cut = classify(&prof, &qprof, h, s0, s1).map_err(err)?;
                contacts.push(Contact { s0, s1, cut });
            }
        }
    }
    contacts.sort_by(|a, b| a.s0.total_cmp(&b.s0));
    for w in contacts.windows(2) {
        if w[1].s0 < w[0].s1 - TOL {
            return Err(err("overlapping contacts".into()));
        }
    }
    let has_upper = prof.0.iter().any(|&(_, z)| z > h + TOL);
    for c in &contacts {
        if let Cut::Full = c.cut {
            if has_upper && (c.s0 > TOL || c.s1 < ef.len - TOL) {
                return Err(err("partial contact along a wall that rises above the wall top".into()));
            }
        }
    }

    // Pieces of the lower wall between removed intervals.
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let mut start = 0.0;
    for c in &contacts {
        if matches!(c.cut, Cut::Full | Cut::Lower) {
            if c.s0 > start + TOL {
                pieces.push((start, c.s0));
            }
            start = c.s1;
        }
    }
    if ef.len > start + TOL {
        pieces.push((start, ef.len));
    }
    for (a, b) in pieces {
        // Bottom outline in (s, z); notches raise it to the neighbour's roof line.
        let mut chain = vec![(a, 0.0)];
        for c in &contacts {
            if let Cut::Notch(q) = &c.cut {
                if c.s0 >= a - TOL && c.s1 <= b + TOL {
                    let gap = c.s0 - chain[chain.len() - 1].0;
                    if (gap > TOL && gap < 0.1) || (b - c.s1 > TOL && b - c.s1 < 0.1) {
                        return Err(err("notch leaves a sliver of wall".into()));
                    }
                    chain.push((c.s0, 0.0));
                    chain.extend(q.iter().copied());
                    chain.push((c.s1, 0.0));
                }
            }
        }
        chain.push((b, 0.0));
        chain.dedup_by(|x, y| (x.0 - y.0).abs() <= TOL && (x.1 - y.1).abs() <= TOL);
        // A notch flush with a piece end replaces that end's ground corner.
        if chain.len() > 1 && (chain[1].0 - chain[0].0).abs() <= TOL {
            chain.remove(0);
        }
        let m = chain.len();
        if m > 1 && (chain[m - 1].0 - chain[m - 2].0).abs() <= TOL {
            chain.pop();
        }
        let mut bottom: Vec<Point3> = chain.iter().map(|&(s, z)| ef.at(s, z)).collect();
        bottom.push(ef.at(b, h));
        bottom.push(ef.at(a, h));
        out.push((bottom, FaceRole::Wall));
    }

    let fully_removed = contacts.iter().any(|c| matches!(c.cut, Cut::Full) && c.s0 <= TOL && c.s1 >= ef.len - TOL);
    if has_upper && !fully_removed {
        let mut upper = vec![ef.at(0.0, h), ef.at(ef.len, h)];
        upper.extend(prof.0.iter().rev().filter(|&&(_, z)| z > h + TOL).map(|&(s, z)| ef.at(s, z)));
        out.push((upper, FaceRole::Gable));
    }
    Ok(())
}

fn sd_polygon(face: &RoofFace) -> Vec<Point2> {
    face.points.iter().map(|p| {
        let (s, d) = face.frame.sd(p.xy());
        Point2::new(s, d)
    }).collect()
}

fn box_inside(poly: &[Point2], lo: Point2, hi: Point2, margin: f64) -> bool {
    let corners = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
    (0..poly.len()).all(|i| {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let inward = (q - p).normalized().perp();
        corners.iter().all(|&c| (c - p).dot(inward) >= margin)
    })
}

/// Splits a roof face around the rectangle `[lo, hi]` (face coordinates),
/// adding back the `fills` that the superstructure leaves uncovered.
fn cut_face(poly: &[Point2], lo: Point2, hi: Point2, fills: Vec<Vec<Point2>>) -> Vec<Vec<Point2>> {
    let ex = Point2::new(1.0, 0.0);
    let ey = Point2::new(0.0, 1.0);
    let below = clip_halfplane(poly, ey, lo.y);
    let above = clip_halfplane(poly, -ey, -hi.y);
    let band = clip_halfplane(&clip_halfplane(poly, -ey, -lo.y), ey, hi.y);
    let left = clip_halfplane(&band, ex, lo.x);
    let right = clip_halfplane(&band, -ex, -hi.x);
    [below, above, left, right]
        .into_iter()
        .chain(fills)
        .filter(|p| p.len() >= 3 && polygon_area(p).map(|a| a.abs() > 1e-9).unwrap_or(false))
        .collect()
}

struct Placed {
    pieces: Vec<Vec<Point2>>,
    faces: Vec<Face>,
    window: Option<[Point3; 4]>,
}

/// Whether `sup` fits on `face` with the required clearance.
pub(super) fn superstructure_fits(sup: &Superstructure, face: &RoofFace) -> bool {
    place_superstructure(sup, face).is_ok()
}

fn place_superstructure(sup: &Superstructure, face: &RoofFace) -> Result<Placed, String> {
    let f: &RoofFrame = &face.frame;
    let poly = sd_polygon(face);
    let (s0, d0) = (sup.s, sup.d);
    match sup.kind {
        SuperstructureKind::RoofWindow { width, length } => {
            let (lo, hi) = (Point2::new(s0, d0), Point2::new(s0 + width, d0 + length));
            if !(width > 0.0 && length > 0.0) || !box_inside(&poly, lo, hi, SUPER_MARGIN) {
                return Err("roof window does not fit its face".into());
            }
            Ok(Placed {
                pieces: vec![poly],
                faces: vec![],
                window: Some([f.at(lo.x, lo.y), f.at(hi.x, lo.y), f.at(hi.x, hi.y), f.at(lo.x, hi.y)]),
            })
        }
        SuperstructureKind::Chimney { size, height } => {
            let (s1, d1) = (s0 + size, d0 + size);
            let (lo, hi) = (Point2::new(s0, d0), Point2::new(s1, d1));
            if !(size > 0.0 && height > 0.0) || !box_inside(&poly, lo, hi, SUPER_MARGIN) {
                return Err("chimney does not fit its face".into());
            }
            let zt = f.z(d1) + height;
            let r = |s: f64, d: f64| f.at(s, d);
            let top = |s: f64, d: f64| f.at_z(s, d, zt);
            let sw = FaceRole::Superstructure;
            let faces = vec![
                (vec![r(s0, d0), r(s1, d0), top(s1, d0), top(s0, d0)], sw),
                (vec![r(s1, d1), r(s0, d1), top(s0, d1), top(s1, d1)], sw),
                (vec![r(s0, d1), r(s0, d0), top(s0, d0), top(s0, d1)], sw),
                (vec![r(s1, d0), r(s1, d1), top(s1, d1), top(s1, d0)], sw),
                (vec![top(s0, d0), top(s1, d0), top(s1, d1), top(s0, d1)], FaceRole::Roof),
            ];
            Ok(Placed { pieces: cut_face(&poly, lo, hi, vec![]), faces, window: None })
        }
        SuperstructureKind::Dormer { width, front_height } => {
            if f.slope < 0.05 {
                return Err("dormer needs a sloped face".into());
            }
            let s1 = s0 + width;
            let sm = s0 + 0.5 * width;
            let zf = f.z(d0);
            let ze = zf + front_height;
            let zr = ze + 0.3 * width;
            let de = (ze - f.z0) / f.slope;
            let dr = (zr - f.z0) / f.slope;
            let (lo, hi) = (Point2::new(s0, d0), Point2::new(s1, dr));
            if !(width > 0.0 && front_height > 0.0) || !box_inside(&poly, lo, hi, SUPER_MARGIN) {
                return Err("dormer does not fit its face".into());
            }
            let r = |s: f64, d: f64| f.at(s, d);
            let at = |s: f64, d: f64, z: f64| f.at_z(s, d, z);
            let sw = FaceRole::Superstructure;
            let faces = vec![
                (vec![r(s0, d0), r(s1, d0), at(s1, d0, ze), at(sm, d0, zr), at(s0, d0, ze)], sw),
                (vec![r(s1, d0), r(s1, de), at(s1, d0, ze)], sw),
                (vec![r(s0, de), r(s0, d0), at(s0, d0, ze)], sw),
                (vec![at(s1, d0, ze), r(s1, de), r(sm, dr), at(sm, d0, zr)], FaceRole::Roof),
                (vec![at(s0, d0, ze), at(sm, d0, zr), r(sm, dr), r(s0, de)], FaceRole::Roof),
            ];
            let fills = vec![
                vec![Point2::new(s0, de), Point2::new(sm, dr), Point2::new(s0, dr)],
                vec![Point2::new(s1, de), Point2::new(s1, dr), Point2::new(sm, dr)],
            ];
            Ok(Placed { pieces: cut_face(&poly, lo, hi, fills), faces, window: None })
        }
    }
}

fn check_parts(parts: &[Part]) -> Result<(), ExteriorError> {
    if parts.is_empty() {
        return Err(ExteriorError::InvalidPart("no parts".into()));
    }
    for (i, p) in parts.iter().enumerate() {
        if p.stories == 0 {
            return Err(ExteriorError::InvalidPart(format!("part {i} has no stories")));
        }
        let c = &p.corners;
        if c.iter().any(|q| !q.is_finite()) {
            return Err(ExteriorError::InvalidPart(format!("part {i} has non-finite corners")));
        }
        for k in 0..4 {
            let e0 = c[(k + 1) % 4] - c[k];
            let e1 = c[(k + 2) % 4] - c[(k + 1) % 4];
            if e0.norm() < 0.5 || e0.cross(e1) <= 1e-9 {
                return Err(ExteriorError::InvalidPart(format!("part {i} is not a convex counter-clockwise quad")));
            }
        }
    }
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            if convex_overlap_area(&parts[i].corners, &parts[j].corners) > 1e-9 {
                return Err(ExteriorError::Overlap(i, j));
            }
        }
    }
    Ok(())
}

/// Footprint of the parts with more than `level` stories.
fn footprint_at(parts: &[Part], level: usize) -> Result<Vec<Point2>, ExteriorError> {
    let polys: Vec<Vec<Point2>> = parts.iter().filter(|p| p.stories > level).map(|p| p.corners.to_vec()).collect();
    union_outline(&polys)
}

/// Inserts every vertex lying inside a face edge into that face's loop.
fn resolve_t_junctions(points: &[Point3], faces: &mut [Vec<usize>]) {
    for f in faces.iter_mut() {
        let mut out = Vec::with_capacity(f.len());
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            out.push(a);
            let (pa, pb) = (points[a], points[b]);
            let ab = pb - pa;
            let len2 = ab.dot(ab);
            let mut inner: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != a && i != b)
                .filter_map(|(i, &p)| {
                    let t = (p - pa).dot(ab) / len2;
                    if t <= 1e-9 || t >= 1.0 - 1e-9 {
                        return None;
                    }
                    let foot = pa + ab * t;
                    (foot.dist(p) <= TOL).then_some((t, i))
                })
                .collect();
            inner.sort_by(|x, y| x.0.total_cmp(&y.0));
            out.extend(inner.into_iter().map(|(_, i)| i));
        }
        *f = out;
    }
}

/// Builds the closed hull of a set of touching parts.
pub fn build_hull(parts: &[Part], supers: &[Superstructure], floor_height: f64) -> Result<BuildingHull, ExteriorError> {
    if !(floor_height > 0.0 && floor_height.is_finite()) {
        return Err(ExteriorError::Config("floor height must be positive".into()));
    }
    check_parts(parts)?;
    let roofs: Vec<RoofGeometry> =
        parts.iter().map(|p| roof_geometry(p, p.wall_top(floor_height))).collect::<Result<_, _>>()?;

    let mut faces: Vec<Face> = Vec::new();
    let ground = footprint_at(parts, 0)?;
    faces.push((ground.iter().rev().map(|p| p.with_z(0.0)).collect(), FaceRole::Ground));
    for pi in 0..parts.len() {
        for k in 0..4 {
            wall_faces(parts, &roofs, pi, k, floor_height, &mut faces)?;
        }
    }

    let mut hosts: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut placed: Vec<Option<Placed>> = Vec::new();
    let mut roof_windows = Vec::new();
    for (index, sup) in supers.iter().enumerate() {
        let bad = |reason: String| ExteriorError::Superstructure { index, reason };
        let face = roofs
            .get(sup.part)
            .and_then(|r| r.faces.get(sup.face))
            .ok_or_else(|| bad("no such roof face".into()))?;
        if !hosts.insert((sup.part, sup.face)) {
            return Err(bad("roof face already hosts a superstructure".into()));
        }
        if matches!(sup.kind, SuperstructureKind::Dormer { .. }) && parts[sup.part].roof.kind == RoofKind::Flat {
            return Err(bad("dormer on a flat roof".into()));
        }
        let p = place_superstructure(sup, face).map_err(bad)?;
        if let Some(w) = p.window {
            roof_windows.push(w);
        }
        placed.push(Some(p));
    }
    for (pi, roof) in roofs.iter().enumerate() {
        for (fi, face) in roof.faces.iter().enumerate() {
            let host = supers.iter().position(|s| s.part == pi && s.face == fi);
            match host.and_then(|h| placed[h].take()) {
                Some(p) => {
                    for piece in &p.pieces {
                        faces.push((piece.iter().map(|q| face.frame.at(q.x, q.y)).collect(), FaceRole::Roof));
                    }
                    faces.extend(p.faces);
                }
                None => faces.push((face.points.clone(), FaceRole::Roof)),
            }
        }
    }

    let mut pool = NodePool::new(EPS_MERGE);
    let mut loops: Vec<Vec<usize>> = faces
        .iter()
        .map(|(pts, _)| {
            let mut ids: Vec<usize> = pts.iter().map(|&p| pool.insert(p)).collect();
            ids.dedup();
            while ids.len() > 1 && ids[0] == ids[ids.len() - 1] {
                ids.pop();
            }
            ids
        })
        .collect();
    let points = pool.into_points();
    resolve_t_junctions(&points, &mut loops);
    let roles: Vec<FaceRole> = faces.iter().map(|f| f.1).collect();
    let mut edges = Vec::new();
    for f in &loops {
        for k in 0..f.len() {
            edges.push((f[k], f[(k + 1) % f.len()]));
        }
    }
    let wireframe = WireframeGraph::new(points, edges, Some(loops))?;
    check_watertight(&wireframe)?;
    wireframe.check_invariants()?;

    let stories = parts.iter().map(|p| p.stories).max().unwrap_or(0);
    let mut floor_footprints = Vec::with_capacity(stories);
    for level in 0..stories {
        let outline = footprint_at(parts, level)?;
        floor_footprints.push(FootprintPolygon::new(outline)?.simplified(1e-9));
    }
    let roof_faces = roles.iter().enumerate().filter(|(_, r)| **r == FaceRole::Roof).map(|(i, _)| i).collect();
    Ok(BuildingHull {
        wireframe,
        face_roles: roles,
        roof_faces,
        floor_footprints,
        floor_heights: vec![floor_height; stories],
        roof_windows,
        parts: parts.to_vec(),
        superstructures: supers.to_vec(),
        floor_height,
    })
}
