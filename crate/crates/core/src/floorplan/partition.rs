//! Recursive straight-cut partition of a footprint into rooms.

use crate::geom::{polygon_area, segment_distance, Point2};
use rand::seq::SliceRandom;
use rand::Rng;

/// Splits a simple CCW polygon by the line `n·p = c`.
///
/// Returns `None` unless the line crosses the boundary exactly twice and
/// passes clear of every vertex.
pub(crate) fn split_polygon(poly: &[Point2], n: Point2, c: f64) -> Option<(Vec<Point2>, Vec<Point2>)> {
    let d: Vec<f64> = poly.iter().map(|p| n.dot(*p) - c).collect();
    if d.iter().any(|v| v.abs() < 1e-6) {
        return None;
    }
    let m = poly.len();
    let crossings = (0..m).filter(|&i| (d[i] < 0.0) != (d[(i + 1) % m] < 0.0)).count();
    if crossings != 2 {
        return None;
    }
    let (mut neg, mut pos) = (Vec::new(), Vec::new());
    for i in 0..m {
        let j = (i + 1) % m;
        if d[i] < 0.0 {
            neg.push(poly[i]);
        } else {
            pos.push(poly[i]);
        }
        if (d[i] < 0.0) != (d[j] < 0.0) {
            let x = poly[i] + (poly[j] - poly[i]) * (d[i] / (d[i] - d[j]));
            neg.push(x);
            pos.push(x);
        }
    }
    Some((neg, pos))
}

pub(crate) fn perimeter(poly: &[Point2]) -> f64 {
    (0..poly.len()).map(|i| poly[i].dist(poly[(i + 1) % poly.len()])).sum()
}

fn min_edge(poly: &[Point2]) -> f64 {
    (0..poly.len()).map(|i| poly[i].dist(poly[(i + 1) % poly.len()])).fold(f64::INFINITY, f64::min)
}

/// Distinct edge directions of a polygon, folded into `[0, pi)`.
fn directions(poly: &[Point2]) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::new();
    for i in 0..poly.len() {
        let mut u = (poly[(i + 1) % poly.len()] - poly[i]).normalized();
        if u.y < 0.0 || (u.y == 0.0 && u.x < 0.0) {
            u = -u;
        }
        if !out.iter().any(|v| v.cross(u).abs() < 1e-3) {
            out.push(u);
        }
    }
    out
}

pub(crate) struct PartitionRules {
    pub min_area: f64,
    /// Lower bound on `2·area / perimeter`, a width proxy.
    pub min_width: f64,
    pub min_edge: f64,
    /// Cut endpoints keep this distance from the front door segment.
    pub door_clearance: f64,
    /// Cut endpoints keep this distance from existing corners and junctions.
    pub vertex_clearance: f64,
}

fn acceptable(poly: &[Point2], rules: &PartitionRules) -> bool {
    let Ok(a) = polygon_area(poly) else { return false };
    a >= rules.min_area && 2.0 * a / perimeter(poly) >= rules.min_width && min_edge(poly) >= rules.min_edge
}

/// Cuts `footprint` into `target` pieces, or as many as the rules allow.
pub(crate) fn partition<R: Rng>(
    footprint: &[Point2],
    target: usize,
    door: (Point2, Point2),
    rules: &PartitionRules,
    rng: &mut R,
) -> Vec<Vec<Point2>> {
    let mut regions = vec![footprint.to_vec()];
    let mut failures = 0;
    while regions.len() < target && failures < 80 {
        let areas: Vec<f64> = regions.iter().map(|r| polygon_area(r).unwrap_or(0.0)).collect();
        let total: f64 = areas.iter().sum();
        let mut pick = rng.gen_range(0.0..total);
        let mut idx = 0;
        while idx + 1 < regions.len() && pick >= areas[idx] {
            pick -= areas[idx];
            idx += 1;
        }
        let region = &regions[idx];
        let u = *directions(region).choose(rng).expect("polygon has edges");
        let n = u.perp();
        let (lo, hi) = region.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let v = n.dot(*p);
            (lo.min(v), hi.max(v))
        });
        let c = lo + (hi - lo) * rng.gen_range(0.3..0.7);
        let Some((a, b)) = split_polygon(region, n, c) else {
            failures += 1;
            continue;
        };
        // Cut endpoints are the vertices lying on the line.
        let ends: Vec<Point2> = a.iter().filter(|p| (n.dot(**p) - c).abs() < 1e-9).copied().collect();
        let near_door = ends.iter().any(|&p| segment_distance(p, door.0, door.1) < rules.door_clearance);
        let crowded = ends
            .iter()
            .any(|e| regions.iter().flatten().any(|v| v.dist(*e) < rules.vertex_clearance));
        if near_door || crowded || !acceptable(&a, rules) || !acceptable(&b, rules) {
            failures += 1;
            continue;
        }
        regions[idx] = a;
        regions.push(b);
    }
    regions
}
