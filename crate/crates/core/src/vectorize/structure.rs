//! Raster-to-graph conversion of a structure mask.

use super::skeleton::{sketch, Sketch};
use super::{StructureGraph, VectorizeConfig, VectorizeError};
use crate::geom::{BinaryBitmap, Point2};
use crate::rng::stream;
use rand::seq::SliceRandom;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

/// Square dilation by `r` pixels.
fn dilate(mask: &BinaryBitmap, r: i64) -> BinaryBitmap {
    let mut out = BinaryBitmap::new(mask.width(), mask.height());
    for (x, y) in mask.ones() {
        for dy in -r..=r {
            for dx in -r..=r {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < mask.width() && (ny as usize) < mask.height() {
                    out.set(nx as usize, ny as usize, true);
                }
            }
        }
    }
    out
}

fn px(p: Point2) -> (i64, i64) {
    (p.x.floor() as i64, p.y.floor() as i64)
}

/// Every pixel on the Bresenham line between the two pixels is set.
fn bresenham_clear(mask: &BinaryBitmap, a: (i64, i64), b: (i64, i64)) -> bool {
    let (mut x, mut y) = a;
    let (dx, dy) = ((b.0 - a.0).abs(), -(b.1 - a.1).abs());
    let (sx, sy) = (if a.0 < b.0 { 1 } else { -1 }, if a.1 < b.1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        if !mask.get_i(x, y) {
            return false;
        }
        if (x, y) == b {
            return true;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Samples the open segment every half pixel against `mask`.
fn segment_on(mask: &BinaryBitmap, a: Point2, b: Point2) -> bool {
    let n = (a.dist(b) * 2.0).ceil().max(1.0) as usize;
    (0..=n).all(|i| {
        let (x, y) = px(a.lerp(b, i as f64 / n as f64));
        mask.get_i(x, y)
    })
}

struct Grid {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        Self { cell, map: HashMap::new() }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: Point2, i: usize) {
        let k = self.key(p);
        self.map.entry(k).or_default().push(i);
    }

    fn near(&self, p: Point2) -> impl Iterator<Item = usize> + '_ {
        let (kx, ky) = self.key(p);
        (-1..=1).flat_map(move |dy| (-1..=1).map(move |dx| (kx + dx, ky + dy))).flat_map(|k| self.map.get(&k).into_iter().flatten().copied())
    }
}

/// Random nodes on structure pixels no closer than `stride` to each other,
/// linked when the straight line between them stays on structure.
fn seed_graph(mask: &BinaryBitmap, loose: &BinaryBitmap, cfg: &VectorizeConfig) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let mut pixels: Vec<(usize, usize)> = mask.ones().collect();
    pixels.shuffle(&mut stream(cfg.seed, "vectorize.nodes"));
    let stride = cfg.node_stride as f64;
    let mut nodes: Vec<Point2> = Vec::new();
    let mut grid = Grid::new(stride);
    for (x, y) in pixels {
        let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
        if grid.near(p).all(|j| nodes[j].dist(p) >= stride) {
            grid.insert(p, nodes.len());
            nodes.push(p);
        }
    }
    let adj = connect(&nodes, loose, cfg.connect_radius);
    (nodes, adj)
}

fn connect(nodes: &[Point2], loose: &BinaryBitmap, radius: f64) -> Vec<Vec<usize>> {
    let mut grid = Grid::new(radius);
    for (i, &p) in nodes.iter().enumerate() {
        grid.insert(p, i);
    }
    let mut adj = vec![Vec::new(); nodes.len()];
    for (i, &p) in nodes.iter().enumerate() {
        for j in grid.near(p) {
            if j > i && nodes[j].dist(p) <= radius && bresenham_clear(loose, px(p), px(nodes[j])) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// Nearest anchor of every node by path length, ties to the lower anchor.
fn nearest_anchor(nodes: &[Point2], adj: &[Vec<usize>], anchors: &[usize]) -> Vec<Option<usize>> {
    let mut owner = vec![None; nodes.len()];
    let mut dist = vec![f64::INFINITY; nodes.len()];
    let mut heap = BinaryHeap::new();
    for (a, &n) in anchors.iter().enumerate() {
        dist[n] = 0.0;
        heap.push(Reverse((0u64, a, n)));
    }
    while let Some(Reverse((d, a, n))) = heap.pop() {
        if owner[n].is_some() {
            continue;
        }
        owner[n] = Some(a);
        let d = f64::from_bits(d);
        for &m in &adj[n] {
            let nd = d + nodes[n].dist(nodes[m]);
            if owner[m].is_none() && nd <= dist[m] {
                dist[m] = nd;
                heap.push(Reverse((nd.to_bits(), a, m)));
            }
        }
    }
    owner
}

/// Principal line through a point cloud: centroid and unit direction.
fn fit_line(pts: &[Point2]) -> (Point2, Point2) {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    let th = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (c, Point2::new(th.cos(), th.sin()))
}

/// Current wall graph over anchor nodes.
struct Walls {
    pos: Vec<Point2>,
    alive: Vec<bool>,
    /// Wall directions observed at each anchor in the sketch.
    dirs: Vec<Vec<Point2>>,
    edges: BTreeSet<(usize, usize)>,
}

impl Walls {
    fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    fn neighbours(&self, a: usize) -> Vec<usize> {
        self.edges.iter().filter_map(|&(u, v)| if u == a { Some(v) } else if v == a { Some(u) } else { None }).collect()
    }

    fn live(&self) -> usize {
        self.alive.iter().filter(|&&b| b).count()
    }

    /// Folds anchor `b` into `a`, moving its edges and directions.
    fn absorb(&mut self, a: usize, b: usize) {
        let moved: Vec<_> = self.edges.iter().copied().filter(|&(u, v)| u == b || v == b).collect();
        for (u, v) in moved {
            self.edges.remove(&(u, v));
            let o = if u == b { v } else { u };
            self.add_edge(a, o);
        }
        let d = std::mem::take(&mut self.dirs[b]);
        self.dirs[a].extend(d);
        self.alive[b] = false;
    }

    /// Some other anchor lies on the open segment between `a` and `b`.
    fn blocked(&self, a: usize, b: usize, tol: f64) -> bool {
        let (p, q) = (self.pos[a], self.pos[b]);
        let len = p.dist(q);
        if len < 1e-9 {
            return true;
        }
        let u = (q - p) * (1.0 / len);
        (0..self.pos.len()).any(|c| {
            if !self.alive[c] || c == a || c == b {
                return false;
            }
            let t = (self.pos[c] - p).dot(u);
            t > tol && t < len - tol && (self.pos[c] - p).cross(u).abs() < tol
        })
    }
}

pub(super) fn vectorize(mask: &BinaryBitmap, cfg: &VectorizeConfig) -> Result<StructureGraph, VectorizeError> {
    if mask.is_empty() {
        return Ok(StructureGraph::default());
    }
    let loose = dilate(mask, 1);
    let stray = dilate(mask, cfg.stray_px.ceil() as i64);
    let Sketch { points, segments, thickness } = sketch(mask, cfg.simplify_px);

    // Initial graph: random nodes plus the sketch's structural anchors.
    let (mut nodes, _) = seed_graph(mask, &loose, cfg);
    let base = nodes.len();
    nodes.extend(points.iter().copied());
    let adj = connect(&nodes, &loose, cfg.connect_radius);
    let anchors: Vec<usize> = (base..nodes.len()).collect();
    let mut history = vec![nodes.len()];

    let mut walls = Walls {
        pos: points.clone(),
        alive: vec![true; points.len()],
        dirs: vec![Vec::new(); points.len()],
        edges: BTreeSet::new(),
    };
    for &(a, b) in &segments {
        walls.add_edge(a, b);
        let d = (points[b] - points[a]).normalized();
        walls.dirs[a].push(d);
        walls.dirs[b].push(-d);
    }
    // Merge non-anchor nodes into their nearest anchor; anchors whose
    // regions touch are linked when a wall runs straight between them.
    let owner = nearest_anchor(&nodes, &adj, &anchors);
    for (u, list) in adj.iter().enumerate() {
        for &v in list {
            if let (Some(a), Some(b)) = (owner[u], owner[v]) {
                if a < b && !walls.edges.contains(&(a, b)) && segment_on(&loose, walls.pos[a], walls.pos[b]) && !walls.blocked(a, b, cfg.merge_px) {
                    walls.add_edge(a, b);
                }
            }
        }
    }
    history.push(walls.live());

    let band = 0.5 * thickness + 1.0;
    // Corners closer than a wall thickness cannot be told apart in the raster.
    let merge = cfg.merge_px.max(thickness + 1.0);
    let sin_min = cfg.anchor_angle_deg.to_radians().sin();
    for _ in 0..cfg.max_iterations {
        let before = (walls.live(), walls.edges.len());
        let lines = align(&mut walls, mask, band, sin_min);
        collapse_wedges(&mut walls, &lines, 2.5 * thickness, sin_min);

        // Anchors that landed on top of each other.
        let ids: Vec<usize> = (0..walls.pos.len()).filter(|&i| walls.alive[i]).collect();
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                if walls.alive[a] && walls.alive[b] && walls.pos[a].dist(walls.pos[b]) < merge {
                    walls.pos[a] = (walls.pos[a] + walls.pos[b]) * 0.5;
                    walls.absorb(a, b);
                }
            }
        }
        // Straight pass-through anchors carry no structure.
        for b in 0..walls.pos.len() {
            if !walls.alive[b] {
                continue;
            }
            let nb = walls.neighbours(b);
            if nb.len() != 2 {
                continue;
            }
            let (a, c) = (nb[0], nb[1]);
            let (u, v) = ((walls.pos[a] - walls.pos[b]).normalized(), (walls.pos[c] - walls.pos[b]).normalized());
            if u.dot(v) < 0.0 && u.cross(v).abs() < sin_min {
                let (da, dc) = (walls.pos[a].dist(walls.pos[b]), walls.pos[c].dist(walls.pos[b]));
                let target = if da < dc || (da == dc && a < c) { a } else { c };
                walls.absorb(target, b);
            }
        }
        // Split edges that pass over an anchor.
        let crossing: Vec<(usize, usize)> = walls.edges.iter().copied().filter(|&(a, b)| walls.blocked(a, b, cfg.merge_px)).collect();
        for (a, b) in crossing {
            walls.edges.remove(&(a, b));
        }
        history.push(walls.live());
        if (walls.live(), walls.edges.len()) == before {
            break;
        }
    }
    align(&mut walls, mask, band, sin_min);
    connect_directions(&mut walls, &loose, cfg);

    // Drop isolated anchors and compact.
    let keep: Vec<usize> = (0..walls.pos.len()).filter(|&i| walls.alive[i] && !walls.neighbours(i).is_empty()).collect();
    let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let graph = StructureGraph {
        nodes: keep.iter().map(|&i| walls.pos[i]).collect(),
        edges: walls.edges.iter().map(|(a, b)| (remap[a], remap[b])).collect(),
        history,
    };
    check_coverage(&graph, mask, &stray, band, cfg)?;
    Ok(graph)
}

/// Moves anchors onto the lines fitted to the wall pixels of their edges.
fn align(walls: &mut Walls, mask: &BinaryBitmap, band: f64, sin_min: f64) -> HashMap<(usize, usize), Line> {
    let mut lines: HashMap<(usize, usize), (Point2, Point2)> = HashMap::new();
    for &(a, b) in &walls.edges {
        let (p, q) = (walls.pos[a], walls.pos[b]);
        let len = p.dist(q);
        let u = (q - p) * (1.0 / len.max(1e-12));
        let margin = (band + 1.0).min(len / 3.0);
        let lo = Point2::new(p.x.min(q.x) - band, p.y.min(q.y) - band);
        let hi = Point2::new(p.x.max(q.x) + band, p.y.max(q.y) + band);
        let mut pts = Vec::new();
        for y in (lo.y.floor().max(0.0) as usize)..(hi.y.ceil().max(0.0) as usize).min(mask.height()) {
            for x in (lo.x.floor().max(0.0) as usize)..(hi.x.ceil().max(0.0) as usize).min(mask.width()) {
                if !mask.get(x, y) {
                    continue;
                }
                let c = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let t = (c - p).dot(u);
                if t >= margin && t <= len - margin && (c - p).cross(u).abs() <= band {
                    pts.push(c);
                }
            }
        }
        let line = if pts.len() >= 3 {
            let (c, d) = fit_line(&pts);
            // Reject fits that disagree with the edge itself.
            if d.cross(u).abs() < 0.5 {
                (c, d)
            } else {
                ((p + q) * 0.5, u)
            }
        } else {
            ((p + q) * 0.5, u)
        };
        lines.insert((a, b), line);
    }
    let mut next = walls.pos.clone();
    for a in 0..walls.pos.len() {
        if !walls.alive[a] {
            continue;
        }
        let inc: Vec<(Point2, Point2)> = walls.neighbours(a).iter().map(|&b| lines[&(a.min(b), a.max(b))]).collect();
        if inc.is_empty() {
            continue;
        }
        let spread = inc.iter().any(|l| inc.iter().any(|m| l.1.cross(m.1).abs() > sin_min));
        next[a] = if spread {
            meet(&inc)
        } else {
            let (c, d) = inc[0];
            c + d * (walls.pos[a] - c).dot(d)
        };
    }
    walls.pos = next;
    lines
}

type Line = (Point2, Point2);

/// Point closest to all lines in the least-squares sense.
fn meet(lines: &[Line]) -> Point2 {
    let (mut m00, mut m01, mut m11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (c, d) in lines {
        let (p00, p01, p11) = (1.0 - d.x * d.x, -d.x * d.y, 1.0 - d.y * d.y);
        m00 += p00;
        m01 += p01;
        m11 += p11;
        b0 += p00 * c.x + p01 * c.y;
        b1 += p01 * c.x + p11 * c.y;
    }
    let det = m00 * m11 - m01 * m01;
    Point2::new((m11 * b0 - m01 * b1) / det, (m00 * b1 - m01 * b0) / det)
}

/// Contracts short edges whose neighbouring walls all run through one
/// point. Walls meeting at a sharp angle overlap in the raster for several
/// pixels, which splits their junction into two nearby anchors.
fn collapse_wedges(walls: &mut Walls, lines: &HashMap<(usize, usize), Line>, max_len: f64, sin_min: f64) {
    let short: Vec<(usize, usize)> = walls.edges.iter().copied().filter(|&(a, b)| walls.pos[a].dist(walls.pos[b]) < max_len).collect();
    for (a, b) in short {
        if !walls.alive[a] || !walls.alive[b] || !walls.edges.contains(&(a, b)) {
            continue;
        }
        let mut others = Vec::new();
        for (x, y) in [(a, b), (b, a)] {
            for o in walls.neighbours(x) {
                if o != y {
                    match lines.get(&(x.min(o), x.max(o))) {
                        Some(l) => others.push(*l),
                        None => return,
                    }
                }
            }
        }
        if !others.iter().any(|l| others.iter().any(|m| l.1.cross(m.1).abs() > sin_min)) {
            continue;
        }
        let p = meet(&others);
        let fits = others.iter().all(|(c, d)| (p - *c).cross(*d).abs() < 1.0);
        if fits && p.dist(walls.pos[a]) < max_len && p.dist(walls.pos[b]) < max_len {
            walls.absorb(a, b);
            walls.pos[a] = p;
        }
    }
}

/// Links every anchor, along each wall direction it lacks an edge for, to
/// the nearest anchor in that direction.
fn connect_directions(walls: &mut Walls, loose: &BinaryBitmap, cfg: &VectorizeConfig) {
    let cone = 15f64.to_radians().cos();
    for a in 0..walls.pos.len() {
        if !walls.alive[a] {
            continue;
        }
        let mut seen: Vec<Point2> = walls.neighbours(a).iter().map(|&b| (walls.pos[b] - walls.pos[a]).normalized()).collect();
        for d in walls.dirs[a].clone() {
            if seen.iter().any(|s| s.dot(d) > cone) {
                continue;
            }
            let best = (0..walls.pos.len())
                .filter(|&b| walls.alive[b] && b != a)
                .filter(|&b| (walls.pos[b] - walls.pos[a]).normalized().dot(d) > cone)
                .min_by(|&b, &c| walls.pos[a].dist(walls.pos[b]).total_cmp(&walls.pos[a].dist(walls.pos[c])).then(b.cmp(&c)));
            if let Some(b) = best {
                if segment_on(loose, walls.pos[a], walls.pos[b]) && !walls.blocked(a, b, cfg.merge_px) {
                    walls.add_edge(a, b);
                    seen.push((walls.pos[b] - walls.pos[a]).normalized());
                }
            }
        }
    }
}

fn check_coverage(g: &StructureGraph, mask: &BinaryBitmap, stray: &BinaryBitmap, band: f64, cfg: &VectorizeConfig) -> Result<(), VectorizeError> {
    let mut near = BinaryBitmap::new(mask.width(), mask.height());
    let mut off = 0;
    let r = band + 0.5;
    for &(a, b) in &g.edges {
        let (p, q) = (g.nodes[a], g.nodes[b]);
        if !segment_on(stray, p, q) {
            off += 1;
        }
        let lo = Point2::new(p.x.min(q.x) - r, p.y.min(q.y) - r);
        let hi = Point2::new(p.x.max(q.x) + r, p.y.max(q.y) + r);
        for y in (lo.y.floor().max(0.0) as usize)..(hi.y.ceil().max(0.0) as usize).min(mask.height()) {
            for x in (lo.x.floor().max(0.0) as usize)..(hi.x.ceil().max(0.0) as usize).min(mask.width()) {
                if crate::geom::segment_distance(Point2::new(x as f64 + 0.5, y as f64 + 0.5), p, q) <= r {
                    near.set(x, y, true);
                }
            }
        }
    }
    let total = mask.count_ones();
    let covered = mask.ones().filter(|&(x, y)| near.get(x, y)).count();
    let frac = covered as f64 / total as f64;
    if frac < cfg.cover_frac || off > 0 {
        return Err(VectorizeError::Coverage { covered: frac, required: cfg.cover_frac, stray_edges: off });
    }
    Ok(())
}
