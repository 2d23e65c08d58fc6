use super::ExteriorError;
use crate::geom::{segment_distance, Point2};
use std::collections::BTreeMap;

const ON_EDGE: f64 = 1e-7;

fn key(p: Point2) -> (i64, i64) {
    ((p.x * 1e6).round() as i64, (p.y * 1e6).round() as i64)
}

/// Splits the directed edge `a -> b` at every point of `pts` lying strictly inside it.
pub(crate) fn split_edge(a: Point2, b: Point2, pts: &[Point2]) -> Vec<Point2> {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let mut inner: Vec<(f64, Point2)> = pts
        .iter()
        .filter_map(|&p| {
            let t = (p - a).dot(ab) / len2;
            (t > 1e-9 && t < 1.0 - 1e-9 && segment_distance(p, a, b) <= ON_EDGE).then_some((t, p))
        })
        .collect();
    inner.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = vec![a];
    for (_, p) in inner {
        if out.last().is_none_or(|q: &Point2| key(*q) != key(p)) {
            out.push(p);
        }
    }
    out
}

/// Outline of the union of CCW polygons that touch only along shared edges.
///
/// Shared edge portions cancel; the remaining boundary must form a single
/// loop (connected, no holes, no pinch points).
pub(crate) fn union_outline(polys: &[Vec<Point2>]) -> Result<Vec<Point2>, ExteriorError> {
    let all: Vec<Point2> = polys.iter().flatten().copied().collect();
    let mut directed: BTreeMap<((i64, i64), (i64, i64)), (Point2, Point2, usize)> = BTreeMap::new();
    let mut order = 0usize;
    for poly in polys {
        for i in 0..poly.len() {
            let chain = split_edge(poly[i], poly[(i + 1) % poly.len()], &all);
            let chain: Vec<Point2> = chain.into_iter().chain(std::iter::once(poly[(i + 1) % poly.len()])).collect();
            for w in chain.windows(2) {
                let (ka, kb) = (key(w[0]), key(w[1]));
                if ka == kb {
                    continue;
                }
                if directed.remove(&(kb, ka)).is_none() {
                    if directed.insert((ka, kb), (w[0], w[1], order)).is_some() {
                        return Err(ExteriorError::Outline("overlapping boundary edges".into()));
                    }
                    order += 1;
                }
            }
        }
    }
    if directed.is_empty() {
        return Err(ExteriorError::Outline("empty union".into()));
    }
    let mut next: BTreeMap<(i64, i64), (Point2, (i64, i64), usize)> = BTreeMap::new();
    for (&(ka, kb), &(a, _, o)) in &directed {
        if next.insert(ka, (a, kb, o)).is_some() {
            return Err(ExteriorError::Outline("boundary pinches at a vertex".into()));
        }
    }
    // Start from the first emitted edge so the result keeps input orientation order.
    let start = directed.iter().min_by_key(|(_, v)| v.2).map(|(k, _)| k.0).unwrap();
    let mut loop_pts = Vec::new();
    let mut cur = start;
    loop {
        let (p, nk, _) = next.remove(&cur).ok_or_else(|| ExteriorError::Outline("open boundary".into()))?;
        loop_pts.push(p);
        cur = nk;
        if cur == start {
            break;
        }
    }
    if !next.is_empty() {
        return Err(ExteriorError::Outline(format!("union has {} stray boundary edges", next.len())));
    }
    Ok(loop_pts)
}

/// Keeps the part of a convex polygon where `dot(n, p) <= c`.
pub(crate) fn clip_halfplane(poly: &[Point2], n: Point2, c: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    let m = poly.len();
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        let da = n.dot(a) - c;
        let db = n.dot(b) - c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out.dedup_by(|x, y| x.dist(*y) <= 1e-9);
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= 1e-9 {
        out.pop();
    }
    out
}

/// Area of the intersection of two convex polygons.
pub(crate) fn convex_overlap_area(a: &[Point2], b: &[Point2]) -> f64 {
    let mut cur = a.to_vec();
    for i in 0..b.len() {
        if cur.len() < 3 {
            return 0.0;
        }
        let p = b[i];
        let q = b[(i + 1) % b.len()];
        // Inside of a CCW edge is to its left.
        let n = -(q - p).perp();
        cur = clip_halfplane(&cur, n, n.dot(p));
    }
    if cur.len() < 3 {
        return 0.0;
    }
    crate::geom::polygon_area(&cur).map(f64::abs).unwrap_or(0.0)
}
