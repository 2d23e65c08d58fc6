//! Thinning of a structure mask into a wall sketch: feature points
//! (junctions, free ends, bends) joined by straight segments.

use crate::geom::{segment_distance, BinaryBitmap, Point2};

/// Neighbour offsets clockwise from north; y grows upwards.
const NB: [(i64, i64); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

struct Thin {
    w: usize,
    h: usize,
    on: Vec<bool>,
}

impl Thin {
    fn at(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h && self.on[y as usize * self.w + x as usize]
    }

    fn ring(&self, x: i64, y: i64) -> [bool; 8] {
        NB.map(|(dx, dy)| self.at(x + dx, y + dy))
    }

    fn degree(&self, x: i64, y: i64) -> usize {
        self.ring(x, y).iter().filter(|&&b| b).count()
    }

    fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = ((k % self.w) as i64, (k / self.w) as i64);
        NB.iter().filter_map(move |&(dx, dy)| self.at(x + dx, y + dy).then(|| (y + dy) as usize * self.w + (x + dx) as usize))
    }

    fn center(&self, k: usize) -> Point2 {
        Point2::new((k % self.w) as f64 + 0.5, (k / self.w) as f64 + 0.5)
    }
}

/// Zhang-Suen thinning.
fn thin(mask: &BinaryBitmap) -> Thin {
    let (w, h) = (mask.width(), mask.height());
    let mut t = Thin { w, h, on: mask.bits().iter().map(|&b| b != 0).collect() };
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut kill = Vec::new();
            for k in 0..w * h {
                if !t.on[k] {
                    continue;
                }
                let (x, y) = ((k % w) as i64, (k / w) as i64);
                let p = t.ring(x, y);
                let b = p.iter().filter(|&&v| v).count();
                let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
                let (n, e, s, wv) = (p[0], p[2], p[4], p[6]);
                let cond = if step == 0 { !(n && e && s) && !(e && s && wv) } else { !(n && e && wv) && !(n && s && wv) };
                if (2..=6).contains(&b) && a == 1 && cond {
                    kill.push(k);
                }
            }
            changed |= !kill.is_empty();
            for k in kill {
                t.on[k] = false;
            }
        }
        if !changed {
            break;
        }
    }
    strip_staircases(&mut t);
    t
}

/// Removes the inner pixel of 4-connected steps so that lines are
/// 8-connected with exactly two neighbours per interior pixel.
fn strip_staircases(t: &mut Thin) {
    // (a, b, three pixels that must be empty), as indices into NB.
    const CASES: [(usize, usize, [usize; 3]); 4] =
        [(0, 2, [4, 5, 6]), (2, 4, [6, 7, 0]), (4, 6, [0, 1, 2]), (6, 0, [2, 3, 4])];
    for k in 0..t.w * t.h {
        if !t.on[k] {
            continue;
        }
        let p = t.ring((k % t.w) as i64, (k / t.w) as i64);
        if CASES.iter().any(|&(a, b, empty)| p[a] && p[b] && empty.iter().all(|&i| !p[i])) {
            t.on[k] = false;
        }
    }
}

struct Chain {
    from: usize,
    to: usize,
    pts: Vec<Point2>,
}

struct Traced {
    features: Vec<Point2>,
    /// Whether each feature is a junction (as opposed to a free end).
    junction: Vec<bool>,
    chains: Vec<Chain>,
    loops: Vec<Vec<Point2>>,
    /// Pixels of each chain, excluding feature pixels, for pruning.
    chain_pixels: Vec<Vec<usize>>,
    /// Pixels of each feature.
    feature_pixels: Vec<Vec<usize>>,
}

fn trace(t: &Thin) -> Traced {
    let n = t.w * t.h;
    let mut feature = vec![usize::MAX; n];
    let mut features = Vec::new();
    let mut junction = Vec::new();
    let mut feature_pixels: Vec<Vec<usize>> = Vec::new();
    let deg: Vec<usize> = (0..n).map(|k| if t.on[k] { t.degree((k % t.w) as i64, (k / t.w) as i64) } else { 0 }).collect();
    for k in 0..n {
        if !t.on[k] || deg[k] == 2 || feature[k] != usize::MAX {
            continue;
        }
        let id = features.len();
        let mut members = vec![k];
        feature[k] = id;
        if deg[k] >= 3 {
            let mut stack = vec![k];
            while let Some(c) = stack.pop() {
                for m in t.neighbours(c) {
                    if deg[m] >= 3 && feature[m] == usize::MAX {
                        feature[m] = id;
                        members.push(m);
                        stack.push(m);
                    }
                }
            }
        }
        let c = members.iter().fold(Point2::new(0.0, 0.0), |a, &m| a + t.center(m)) * (1.0 / members.len() as f64);
        features.push(c);
        junction.push(deg[k] >= 3);
        feature_pixels.push(members);
    }

    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    let mut chain_pixels = Vec::new();
    let mut direct = std::collections::BTreeSet::new();
    for f in 0..features.len() {
        for &q in &feature_pixels[f].clone() {
            for start in t.neighbours(q).collect::<Vec<_>>() {
                if feature[start] == f {
                    continue;
                }
                if feature[start] != usize::MAX {
                    let g = feature[start];
                    if direct.insert((f.min(g), f.max(g))) {
                        chains.push(Chain { from: f, to: g, pts: vec![features[f], features[g]] });
                        chain_pixels.push(Vec::new());
                    }
                    continue;
                }
                if visited[start] {
                    continue;
                }
                let (mut prev, mut cur) = (q, start);
                let mut pts = vec![features[f]];
                let mut pix = Vec::new();
                let end = loop {
                    visited[cur] = true;
                    pts.push(t.center(cur));
                    pix.push(cur);
                    let next = t.neighbours(cur).find(|&m| m != prev);
                    match next {
                        Some(m) if feature[m] != usize::MAX => break Some(feature[m]),
                        Some(m) if !visited[m] => {
                            prev = cur;
                            cur = m;
                        }
                        _ => break None,
                    }
                };
                if let Some(g) = end {
                    pts.push(features[g]);
                    if g == f && pix.len() < 4 {
                        continue;
                    }
                    chains.push(Chain { from: f, to: g, pts });
                    chain_pixels.push(pix);
                }
            }
        }
    }

    let mut loops = Vec::new();
    for k in 0..n {
        if !t.on[k] || visited[k] || deg[k] != 2 {
            continue;
        }
        let mut pts = Vec::new();
        let (mut prev, mut cur) = (usize::MAX, k);
        loop {
            visited[cur] = true;
            pts.push(t.center(cur));
            match t.neighbours(cur).find(|&m| m != prev && !visited[m]) {
                Some(m) => {
                    prev = cur;
                    cur = m;
                }
                None => break,
            }
        }
        if pts.len() >= 4 {
            loops.push(pts);
        }
    }
    Traced { features, junction, chains, loops, chain_pixels, feature_pixels }
}

/// Douglas-Peucker: indices of the points kept between `pts[0]` and the last point.
fn simplify(pts: &[Point2], tol: f64, out: &mut Vec<usize>, offset: usize) {
    if pts.len() < 3 {
        return;
    }
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let (mut best, mut at) = (0.0, 0);
    for (i, &p) in pts.iter().enumerate().take(pts.len() - 1).skip(1) {
        let d = segment_distance(p, a, b);
        if d > best {
            best = d;
            at = i;
        }
    }
    if best > tol {
        simplify(&pts[..=at], tol, out, offset);
        out.push(offset + at);
        simplify(&pts[at..], tol, out, offset + at);
    }
}

/// Straight-segment approximation of the wall centerlines, in continuous
/// pixel coordinates.
pub(super) struct Sketch {
    pub points: Vec<Point2>,
    pub segments: Vec<(usize, usize)>,
    /// Mean wall thickness in pixels.
    pub thickness: f64,
}

pub(super) fn sketch(mask: &BinaryBitmap, tol: f64) -> Sketch {
    let mut t = thin(mask);
    let skel_len = t.on.iter().filter(|&&b| b).count().max(1);
    let thickness = (mask.count_ones() as f64 / skel_len as f64).max(1.0);
    let spur = thickness.round() as usize + 2;
    let mut traced = trace(&t);
    for _ in 0..5 {
        let mut pruned = false;
        for (c, pix) in traced.chains.iter().zip(&traced.chain_pixels) {
            let (j, e) = (traced.junction[c.from], traced.junction[c.to]);
            if j != e && pix.len() < spur {
                let end = if j { c.to } else { c.from };
                for &k in pix.iter().chain(&traced.feature_pixels[end]) {
                    t.on[k] = false;
                }
                pruned = true;
            }
        }
        if !pruned {
            break;
        }
        strip_staircases(&mut t);
        traced = trace(&t);
    }

    let mut points = traced.features.clone();
    let mut segments = Vec::new();
    let mut push_path = |points: &mut Vec<Point2>, path: Vec<usize>, pts: &[Point2], first: usize, last: usize| {
        let mut ids = vec![first];
        for &i in &path {
            points.push(pts[i]);
            ids.push(points.len() - 1);
        }
        ids.push(last);
        for w in ids.windows(2) {
            if w[0] != w[1] {
                segments.push((w[0], w[1]));
            }
        }
    };
    for c in &traced.chains {
        let mut keep = Vec::new();
        simplify(&c.pts, tol, &mut keep, 0);
        push_path(&mut points, keep, &c.pts, c.from, c.to);
    }
    for l in &traced.loops {
        let far = (0..l.len()).max_by(|&i, &j| l[i].dist(l[0]).total_cmp(&l[j].dist(l[0]))).unwrap_or(0);
        let mut closed = l.clone();
        closed.push(l[0]);
        let mut keep = Vec::new();
        simplify(&closed[..=far], tol, &mut keep, 0);
        keep.push(far);
        simplify(&closed[far..], tol, &mut keep, far);
        points.push(l[0]);
        let head = points.len() - 1;
        push_path(&mut points, keep, &closed, head, head);
    }
    Sketch { points, segments, thickness }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_a_thick_bar_as_a_line() {
        let mut m = BinaryBitmap::new(30, 10);
        for x in 3..27 {
            for y in 4..7 {
                m.set(x, y, true);
            }
        }
        let s = sketch(&m, 1.5);
        assert_eq!(s.segments.len(), 1);
        assert!((s.thickness - 3.0).abs() < 0.6, "{}", s.thickness);
    }

    #[test]
    fn ring_simplifies_to_a_quadrilateral() {
        let rows = ["##########", "#........#", "#........#", "#........#", "#........#", "##########"];
        let s = sketch(&BinaryBitmap::from_rows(&rows), 1.5);
        assert_eq!(s.segments.len(), 4, "{:?}", s.points);
    }
}
