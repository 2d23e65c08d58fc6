//! Rooms, doors and windows on top of a wall graph.

use super::{StructureGraph, VectorFloorPlan, VectorOpening, VectorRoom, VectorizeError};
use crate::geom::{point_in_ring, polygon_area, segment_distance, Label, LabelGrid, Point2};
use std::collections::{BTreeMap, BTreeSet};

/// Opening ends closer than this (pixels) to a wall end snap onto it.
const SNAP_PX: f64 = 1.0;
/// Region components smaller than this are treated as raster noise.
const MIN_REGION_PX: usize = 4;

fn components(grid: &LabelGrid, pred: impl Fn(u8) -> bool, diagonal: bool) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (grid.width(), grid.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let steps: &[(i64, i64)] =
        if diagonal { &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] } else { &[(1, 0), (-1, 0), (0, 1), (0, -1)] };
    for k in 0..w * h {
        if seen[k] || !pred(grid.labels()[k]) {
            continue;
        }
        let v = grid.labels()[k];
        seen[k] = true;
        let mut stack = vec![k];
        let mut comp = Vec::new();
        while let Some(c) = stack.pop() {
            let (x, y) = (c % w, c / w);
            comp.push((x, y));
            for &(dx, dy) in steps {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !seen[j] && grid.labels()[j] == v {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn center((x, y): (usize, usize)) -> Point2 {
    Point2::new(x as f64 + 0.5, y as f64 + 0.5)
}

struct Plan {
    nodes: Vec<Point2>,
    edges: BTreeSet<(usize, usize)>,
}

impl Plan {
    /// Node at `p` on edge `(a, b)`, reusing an end when `p` sits on it.
    fn split(&mut self, a: usize, b: usize, p: Point2) -> usize {
        if p.dist(self.nodes[a]) < 1e-9 {
            return a;
        }
        if p.dist(self.nodes[b]) < 1e-9 {
            return b;
        }
        let n = self.nodes.len();
        self.nodes.push(p);
        self.edges.remove(&(a.min(b), a.max(b)));
        self.edges.insert((a.min(n), a.max(n)));
        self.edges.insert((b.min(n), b.max(n)));
        n
    }

    /// Face loops, counter-clockwise for bounded faces, with dangling
    /// spikes removed.
    fn faces(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut around: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            around[a].push(b);
            around[b].push(a);
        }
        for (v, list) in around.iter_mut().enumerate() {
            let p = self.nodes[v];
            list.sort_by(|&i, &j| {
                let (di, dj) = (self.nodes[i] - p, self.nodes[j] - p);
                di.y.atan2(di.x).total_cmp(&dj.y.atan2(dj.x)).then(i.cmp(&j))
            });
        }
        let mut used = BTreeSet::new();
        let mut faces = Vec::new();
        for &(a, b) in &self.edges {
            for (u, v) in [(a, b), (b, a)] {
                if used.contains(&(u, v)) {
                    continue;
                }
                let mut face = Vec::new();
                let (mut x, mut y) = (u, v);
                while used.insert((x, y)) {
                    face.push(x);
                    let list = &around[y];
                    let k = list.iter().position(|&z| z == x).expect("half-edge twin");
                    let z = list[(k + list.len() - 1) % list.len()];
                    (x, y) = (y, z);
                }
                faces.push(strip_spikes(face));
            }
        }
        faces
    }
}

fn strip_spikes(mut f: Vec<usize>) -> Vec<usize> {
    loop {
        let m = f.len();
        if m < 3 {
            return f;
        }
        match (0..m).find(|&i| f[(i + m - 1) % m] == f[(i + 1) % m]) {
            Some(i) => {
                let j = (i + 1) % m;
                let (hi, lo) = (i.max(j), i.min(j));
                f.remove(hi);
                f.remove(lo);
            }
            None => return f,
        }
    }
}

/// Attaches room, door and window semantics from `grid` to a wall graph
/// vectorized from its structure mask, and converts to meters.
///
/// Each opening component is mapped onto its nearest wall edge, whose
/// endpoints are inserted as nodes; each room component is mapped onto the
/// graph face holding most of its pixels and takes the majority label.
pub fn extract_semantics(grid: &LabelGrid, graph: &StructureGraph) -> Result<VectorFloorPlan, VectorizeError> {
    let mut plan = Plan { nodes: graph.nodes.clone(), edges: graph.edges.clone() };
    let mut openings: Vec<(usize, usize, Label)> = Vec::new();
    let mut taken: BTreeSet<(usize, usize)> = BTreeSet::new();
    for label in [Label::FrontDoor, Label::InteriorDoor, Label::BalconyDoor, Label::Window] {
        for comp in components(grid, |v| v == label.id(), true) {
            let c = comp.iter().fold(Point2::new(0.0, 0.0), |a, &p| a + center(p)) * (1.0 / comp.len() as f64);
            let edge = plan
                .edges
                .iter()
                .filter(|e| !taken.contains(e))
                .min_by(|&&(a, b), &&(x, y)| {
                    segment_distance(c, plan.nodes[a], plan.nodes[b]).total_cmp(&segment_distance(c, plan.nodes[x], plan.nodes[y]))
                })
                .copied();
            let Some((a, b)) = edge else {
                return Err(VectorizeError::UnplacedOpening { label: label.id(), x: c.x, y: c.y });
            };
            let (p, q) = (plan.nodes[a], plan.nodes[b]);
            if segment_distance(c, p, q) > 4.0 + comp.len() as f64 {
                return Err(VectorizeError::UnplacedOpening { label: label.id(), x: c.x, y: c.y });
            }
            let len = p.dist(q);
            let u = (q - p) * (1.0 / len);
            let (mut t0, mut t1) = comp.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &px| {
                let t = (center(px) - p).dot(u);
                (lo.min(t), hi.max(t))
            });
            t0 = (t0 - 0.5).max(0.0);
            t1 = (t1 + 0.5).min(len);
            if t0 < SNAP_PX {
                t0 = 0.0;
            }
            if t1 > len - SNAP_PX {
                t1 = len;
            }
            if t1 - t0 < SNAP_PX {
                log::debug!("dropping {}-px {} run", comp.len(), label.name());
                continue;
            }
            let n1 = plan.split(a, b, p + u * t1);
            let n0 = plan.split(a, n1, p + u * t0);
            taken.insert((n0.min(n1), n0.max(n1)));
            openings.push((n0, n1, label));
        }
    }

    let faces: Vec<(Vec<usize>, Vec<Point2>, Point2, Point2)> = plan
        .faces()
        .into_iter()
        .filter_map(|f| {
            let ring: Vec<Point2> = f.iter().map(|&i| plan.nodes[i]).collect();
            let distinct: BTreeSet<_> = f.iter().collect();
            let area = polygon_area(&ring).unwrap_or(0.0);
            let lo = ring.iter().fold(Point2::new(f64::INFINITY, f64::INFINITY), |a, p| Point2::new(a.x.min(p.x), a.y.min(p.y)));
            let hi = ring.iter().fold(Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, p| Point2::new(a.x.max(p.x), a.y.max(p.y)));
            // Only simple counter-clockwise loops bound rooms.
            (area > 0.0 && distinct.len() == f.len() && signed_area(&ring) > 0.0).then_some((f, ring, lo, hi))
        })
        .collect();

    // face -> label -> pixel count
    let mut hosted: BTreeMap<usize, BTreeMap<u8, usize>> = BTreeMap::new();
    for comp in components(grid, Label::is_room_id, false) {
        let label = grid.get(comp[0].0, comp[0].1);
        let mut count = vec![0usize; faces.len()];
        for &px in &comp {
            let c = center(px);
            if let Some(k) = faces.iter().position(|(_, ring, lo, hi)| c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y && point_in_ring(c, ring)) {
                count[k] += 1;
            }
        }
        let best = (0..faces.len()).max_by(|&i, &j| count[i].cmp(&count[j]).then(j.cmp(&i)));
        match best {
            Some(k) if 2 * count[k] >= comp.len() => *hosted.entry(k).or_default().entry(label).or_default() += comp.len(),
            _ if comp.len() < MIN_REGION_PX => {}
            _ => return Err(VectorizeError::OpenRoom { label, pixels: comp.len() }),
        }
    }

    let mut rooms = Vec::new();
    for (k, labels) in hosted {
        let significant: Vec<(u8, usize)> = labels.iter().filter(|(_, &c)| c >= MIN_REGION_PX).map(|(&l, &c)| (l, c)).collect();
        if significant.len() > 1 {
            // Two rooms share one wall loop: a wall between them is missing.
            let (l, c) = significant[1];
            return Err(VectorizeError::OpenRoom { label: l, pixels: c });
        }
        let (label, _) = labels.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).expect("hosted face has a label");
        rooms.push(VectorRoom { nodes: faces[k].0.clone(), label: Label::from_id(*label).expect("room label") });
    }

    let frame = grid.frame();
    let out = VectorFloorPlan {
        nodes: plan.nodes.iter().map(|&p| frame.to_world(p)).collect(),
        edges: plan.edges,
        rooms,
        doors: openings.iter().filter(|o| o.2 != Label::Window).map(|&(a, b, label)| VectorOpening { a, b, label }).collect(),
        windows: openings.iter().filter(|o| o.2 == Label::Window).map(|&(a, b, label)| VectorOpening { a, b, label }).collect(),
    };
    out.validate()?;
    Ok(out)
}

fn signed_area(ring: &[Point2]) -> f64 {
    0.5 * (0..ring.len()).map(|i| ring[i].cross(ring[(i + 1) % ring.len()])).sum::<f64>()
}
