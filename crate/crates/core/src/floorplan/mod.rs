//! Footprint-conditioned floor-plan label grids.
//!
//! A procedural generator partitions the footprint into rooms with straight
//! cuts (parallel to footprint edges, so oblique walls appear wherever the
//! footprint has them), connects the rooms with a spanning tree of doors
//! rooted at the room behind the front door, and paints everything into a
//! [`LabelGrid`]. The output contract is the grid; the generator behind
//! [`generate_floorplan`] can be swapped without touching later stages.

mod paint;
mod partition;

use crate::geom::{
    segment_distance, FootprintPolygon, GeomError, Label, LabelGrid, Point2, RasterFrame,
};
use crate::rng::{derive_indexed, stream, StreamRng};
use partition::{partition, PartitionRules};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FloorplanError {
    #[error("no footprint edge is at least {0} m long")]
    NoEligibleEdge(f64),
    #[error("front door placement is invalid: {0}")]
    InvalidDoor(String),
    #[error("no valid layout after {attempts} attempts")]
    Partition { attempts: usize },
    #[error("invalid floor-plan config: {0}")]
    Config(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("image export failed: {0}")]
    Image(#[from] image::ImageError),
}

/// Front door position: centre at `offset_along_edge` (fraction of the edge
/// length from its first vertex) on footprint edge `boundary_edge_index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontDoorPlacement {
    pub boundary_edge_index: usize,
    pub offset_along_edge: f64,
    pub width: f64,
}

impl FrontDoorPlacement {
    /// Door end points, in the edge's direction.
    pub fn segment(&self, footprint: &FootprintPolygon) -> Result<(Point2, Point2), FloorplanError> {
        if self.boundary_edge_index >= footprint.len() {
            return Err(FloorplanError::InvalidDoor(format!("edge {} does not exist", self.boundary_edge_index)));
        }
        let (a, b) = footprint.edge(self.boundary_edge_index);
        let len = a.dist(b);
        let c = self.offset_along_edge * len;
        let (s0, s1) = (c - 0.5 * self.width, c + 0.5 * self.width);
        if !(self.width > 0.0) || s0 < -1e-9 || s1 > len + 1e-9 {
            return Err(FloorplanError::InvalidDoor(format!("door [{s0:.3}, {s1:.3}] leaves edge of length {len:.3}")));
        }
        let t = (b - a).normalized();
        Ok((a + t * s0.max(0.0), a + t * s1.min(len)))
    }
}

/// Picks a uniformly random edge that can hold the door, then a uniform
/// position on it keeping up to 0.5 m from the corners.
pub fn place_front_door(footprint: &FootprintPolygon, width: f64, seed: u64) -> Result<FrontDoorPlacement, FloorplanError> {
    let eligible: Vec<usize> = (0..footprint.len())
        .filter(|&i| {
            let (a, b) = footprint.edge(i);
            a.dist(b) >= width
        })
        .collect();
    if eligible.is_empty() || !(width > 0.0) {
        return Err(FloorplanError::NoEligibleEdge(width));
    }
    let mut rng = stream(seed, "front_door");
    let edge = eligible[rng.gen_range(0..eligible.len())];
    let (a, b) = footprint.edge(edge);
    let len = a.dist(b);
    let margin = (0.5f64).min(0.5 * (len - width));
    let (lo, hi) = (margin + 0.5 * width, len - margin - 0.5 * width);
    let centre = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    Ok(FrontDoorPlacement { boundary_edge_index: edge, offset_along_edge: centre / len, width })
}

/// Sampling weights for room types other than the living room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoomShares {
    pub kitchen: f64,
    pub bathroom: f64,
    pub master: f64,
    pub second: f64,
    pub balcony: f64,
    pub study: f64,
}

impl Default for RoomShares {
    fn default() -> Self {
        Self { kitchen: 19.45, bathroom: 18.31, master: 15.88, second: 14.64, balcony: 9.56, study: 0.79 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorplanConfig {
    pub grid_size: usize,
    pub margin_px: usize,
    /// Wall thickness in pixels.
    pub wall_px: f64,
    pub front_door_width_m: f64,
    pub interior_door_width_m: f64,
    pub window_width_m: f64,
    pub min_rooms: usize,
    pub max_rooms: usize,
    pub min_room_area_m2: f64,
    /// Lower bound on area / half-perimeter of a room.
    pub min_room_thickness_m: f64,
    pub max_attempts: usize,
    pub room_shares: RoomShares,
}

impl Default for FloorplanConfig {
    fn default() -> Self {
        Self {
            grid_size: crate::geom::DEFAULT_GRID_SIZE,
            margin_px: crate::geom::DEFAULT_MARGIN_PX,
            wall_px: 3.0,
            front_door_width_m: 1.0,
            interior_door_width_m: 0.9,
            window_width_m: 1.2,
            min_rooms: 3,
            max_rooms: 8,
            min_room_area_m2: 6.0,
            min_room_thickness_m: 1.2,
            max_attempts: 20,
            room_shares: RoomShares::default(),
        }
    }
}

impl FloorplanConfig {
    pub fn validate(&self) -> Result<(), FloorplanError> {
        let bad = |m: &str| Err(FloorplanError::Config(m.to_string()));
        if self.grid_size < 32 || 2 * self.margin_px + 16 > self.grid_size {
            return bad("grid_size must be at least 32 and leave room inside the margin");
        }
        if !(self.wall_px >= 2.0 && self.wall_px <= 8.0) {
            return bad("wall_px must lie in [2, 8]");
        }
        if self.min_rooms < 3 || self.min_rooms > self.max_rooms {
            return bad("room counts must satisfy 3 <= min_rooms <= max_rooms");
        }
        let positive = [
            self.front_door_width_m,
            self.interior_door_width_m,
            self.window_width_m,
            self.min_room_area_m2,
            self.min_room_thickness_m,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("sizes must be positive");
        }
        let s = &self.room_shares;
        let w = [s.kitchen, s.bathroom, s.master, s.second, s.balcony, s.study];
        if w.iter().any(|v| !(*v >= 0.0)) || w[..4].iter().chain(&w[5..]).sum::<f64>() <= 0.0 {
            return bad("room shares must be non-negative with a positive non-balcony total");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomShape {
    pub polygon: Vec<Point2>,
    pub label: Label,
}

/// Door on a wall; `rooms.1` is `None` for the front door.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoorSegment {
    pub a: Point2,
    pub b: Point2,
    pub label: Label,
    pub rooms: (usize, Option<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSegment {
    pub a: Point2,
    pub b: Point2,
    pub room: usize,
}

/// Vector layout a candidate grid was painted from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FloorLayout {
    pub rooms: Vec<RoomShape>,
    pub doors: Vec<DoorSegment>,
    pub windows: Vec<WindowSegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlanCandidate {
    pub id: String,
    pub footprint: FootprintPolygon,
    pub door: FrontDoorPlacement,
    pub grid: LabelGrid,
    pub seed: u64,
    pub layout: FloorLayout,
}

/// A wall piece shared by two rooms, in room `i`'s edge direction.
struct Shared {
    i: usize,
    j: usize,
    a: Point2,
    b: Point2,
}

/// Portions of edge `p -> q` covered by edge `r -> s`; `same` selects the
/// direction the second edge must run in.
fn overlap(p: Point2, q: Point2, r: Point2, s: Point2, same: bool) -> Option<(Point2, Point2)> {
    let len = p.dist(q);
    let u = (q - p) * (1.0 / len);
    let v = s - r;
    let dir = v.dot(u);
    if (dir > 0.0) != same || v.cross(u).abs() > 1e-6 * v.norm() {
        return None;
    }
    if (r - p).cross(u).abs() > 1e-6 {
        return None;
    }
    let (t0, t1) = {
        let (x, y) = ((r - p).dot(u), (s - p).dot(u));
        (x.min(y).max(0.0), x.max(y).min(len))
    };
    (t1 - t0 > 1e-6).then(|| (p + u * t0, p + u * t1))
}

fn shared_walls(rooms: &[Vec<Point2>]) -> Vec<Shared> {
    let mut out = Vec::new();
    for i in 0..rooms.len() {
        for j in (i + 1)..rooms.len() {
            let (ri, rj) = (&rooms[i], &rooms[j]);
            for k in 0..ri.len() {
                for l in 0..rj.len() {
                    let e = (ri[k], ri[(k + 1) % ri.len()]);
                    let f = (rj[l], rj[(l + 1) % rj.len()]);
                    if let Some((a, b)) = overlap(e.0, e.1, f.0, f.1, false) {
                        out.push(Shared { i, j, a, b });
                    }
                }
            }
        }
    }
    out
}

/// Pieces of a room's boundary lying on the footprint boundary.
fn frontage(room: &[Point2], footprint: &[Point2]) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    for k in 0..room.len() {
        for l in 0..footprint.len() {
            let e = (room[k], room[(k + 1) % room.len()]);
            let f = (footprint[l], footprint[(l + 1) % footprint.len()]);
            if let Some(seg) = overlap(e.0, e.1, f.0, f.1, true) {
                out.push(seg);
            }
        }
    }
    out
}

/// Opening of `width` at a random position on `a -> b`, `margin` from both ends.
fn place_on(a: Point2, b: Point2, width: f64, margin: f64, rng: &mut StreamRng) -> Option<(Point2, Point2)> {
    let len = a.dist(b);
    let (lo, hi) = (margin + 0.5 * width, len - margin - 0.5 * width);
    if hi < lo {
        return None;
    }
    let c = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let u = (b - a) * (1.0 / len);
    Some((a + u * (c - 0.5 * width), a + u * (c + 0.5 * width)))
}

/// Removes `[c0, c1]` (points on the segment) from `a -> b`.
fn subtract(a: Point2, b: Point2, c0: Point2, c1: Point2, pad: f64) -> Vec<(Point2, Point2)> {
    let len = a.dist(b);
    let u = (b - a) * (1.0 / len);
    if segment_distance(c0, a, b) > 1e-6 || segment_distance(c1, a, b) > 1e-6 {
        return vec![(a, b)];
    }
    let (x, y) = ((c0 - a).dot(u), (c1 - a).dot(u));
    let (t0, t1) = (x.min(y) - pad, x.max(y) + pad);
    let mut out = Vec::new();
    if t0 > 1e-6 {
        out.push((a, a + u * t0));
    }
    if t1 < len - 1e-6 {
        out.push((a + u * t1, b));
    }
    out
}

fn pick_type(rng: &mut StreamRng, shares: &RoomShares, balcony_ok: bool) -> Label {
    let table = [
        (Label::Kitchen, shares.kitchen),
        (Label::Bathroom, shares.bathroom),
        (Label::MasterRoom, shares.master),
        (Label::SecondRoom, shares.second),
        (Label::Balcony, if balcony_ok { shares.balcony } else { 0.0 }),
        (Label::StudyRoom, shares.study),
    ];
    let total: f64 = table.iter().map(|t| t.1).sum();
    let mut x = rng.gen_range(0.0..total);
    for (label, w) in table {
        if x < w {
            return label;
        }
        x -= w;
    }
    Label::SecondRoom
}

fn build_layout(
    footprint: &FootprintPolygon,
    door: (Point2, Point2),
    config: &FloorplanConfig,
    scale: f64,
    seed: u64,
) -> Option<FloorLayout> {
    let area = footprint.area();
    let max_rooms = ((area / (1.5 * config.min_room_area_m2)).floor() as usize).clamp(config.min_rooms, config.max_rooms);
    let mut rng = stream(seed, "partition");
    let target = rng.gen_range(config.min_rooms..=max_rooms);
    let rules = PartitionRules {
        min_area: config.min_room_area_m2,
        min_width: 2.0 * config.min_room_thickness_m,
        min_edge: 0.8,
        door_clearance: 0.6,
        vertex_clearance: 0.8,
    };
    let polys = partition(footprint.vertices(), target, door, &rules, &mut rng);
    if polys.len() < config.min_rooms {
        return None;
    }
    let mid = (door.0 + door.1) * 0.5;
    let living = polys.iter().position(|p| {
        (0..p.len()).any(|k| segment_distance(mid, p[k], p[(k + 1) % p.len()]) < 1e-6)
    })?;

    // Random spanning tree of doors grown from the living room.
    let inner_margin = (0.3f64).max(5.0 * scale);
    let dw = config.interior_door_width_m;
    let walls: Vec<Shared> =
        shared_walls(&polys).into_iter().filter(|w| w.a.dist(w.b) >= dw + 2.0 * inner_margin).collect();
    let n = polys.len();
    let mut rng = stream(seed, "doors");
    let mut reached = vec![false; n];
    reached[living] = true;
    let mut tree: Vec<(usize, usize, Point2, Point2)> = Vec::new();
    let mut degree = vec![0usize; n];
    for _ in 1..n {
        let frontier: Vec<&Shared> = walls.iter().filter(|w| reached[w.i] != reached[w.j]).collect();
        if frontier.is_empty() {
            return None;
        }
        let w = frontier[rng.gen_range(0..frontier.len())];
        let (a, b) = place_on(w.a, w.b, dw, inner_margin, &mut rng)?;
        let (from, to) = if reached[w.i] { (w.i, w.j) } else { (w.j, w.i) };
        reached[to] = true;
        degree[from] += 1;
        degree[to] += 1;
        tree.push((from, to, a, b));
    }

    let fronts: Vec<Vec<(Point2, Point2)>> = polys.iter().map(|p| frontage(p, footprint.vertices())).collect();
    let mut rng = stream(seed, "types");
    let mut labels = vec![Label::LivingRoom; n];
    let mut has_balcony = false;
    for r in 0..n {
        if r == living {
            continue;
        }
        let front_len: f64 = fronts[r].iter().map(|(a, b)| a.dist(*b)).sum();
        let balcony_ok = !has_balcony && degree[r] == 1 && front_len >= 2.0;
        labels[r] = pick_type(&mut rng, &config.room_shares, balcony_ok);
        has_balcony |= labels[r] == Label::Balcony;
    }

    let mut doors = vec![DoorSegment { a: door.0, b: door.1, label: Label::FrontDoor, rooms: (living, None) }];
    for (from, to, a, b) in tree {
        let label = if labels[to] == Label::Balcony { Label::BalconyDoor } else { Label::InteriorDoor };
        doors.push(DoorSegment { a, b, label, rooms: (from, Some(to)) });
    }

    let mut rng = stream(seed, "windows");
    let win_margin = (0.4f64).max(5.0 * scale);
    let mut windows = Vec::new();
    for r in 0..n {
        let mut pieces = fronts[r].clone();
        if r == living {
            pieces = pieces.into_iter().flat_map(|(a, b)| subtract(a, b, door.0, door.1, 0.5)).collect();
        }
        let Some(&(a, b)) = pieces.iter().max_by(|x, y| x.0.dist(x.1).total_cmp(&y.0.dist(y.1))) else {
            continue;
        };
        let width = config.window_width_m.min(a.dist(b) - 2.0 * win_margin);
        if width < 0.6 {
            continue;
        }
        if let Some((wa, wb)) = place_on(a, b, width, win_margin, &mut rng) {
            windows.push(WindowSegment { a: wa, b: wb, room: r });
        }
    }
    let rooms = polys.into_iter().zip(labels).map(|(polygon, label)| RoomShape { polygon, label }).collect();
    Some(FloorLayout { rooms, doors, windows })
}

/// Generates one candidate plan for `footprint` with the given front door.
pub fn generate_floorplan(
    footprint: &FootprintPolygon,
    door: &FrontDoorPlacement,
    seed: u64,
    config: &FloorplanConfig,
) -> Result<FloorPlanCandidate, FloorplanError> {
    config.validate()?;
    let seg = door.segment(footprint)?;
    let frame = RasterFrame::fit(footprint, config.grid_size, config.margin_px);
    for attempt in 0..config.max_attempts {
        let sub = derive_indexed(seed, "layout", attempt as u64);
        if let Some(layout) = build_layout(footprint, seg, config, frame.scale, sub) {
            let grid = paint::paint(&frame, footprint, &layout, config.wall_px);
            return Ok(FloorPlanCandidate {
                id: format!("fp{seed:016x}"),
                footprint: footprint.clone(),
                door: *door,
                grid,
                seed,
                layout,
            });
        }
    }
    Err(FloorplanError::Partition { attempts: config.max_attempts })
}

/// Writes a label grid as an 8-bit grayscale PNG (pixel value = label ID),
/// with grid row 0 at the bottom of the image.
pub fn write_label_png(grid: &LabelGrid, path: &Path) -> Result<(), FloorplanError> {
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let img = image::GrayImage::from_fn(w, h, |x, y| image::Luma([grid.get(x as usize, (h - 1 - y) as usize)]));
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Reads a grid written by [`write_label_png`] into `frame`.
pub fn read_label_png(path: &Path, frame: RasterFrame) -> Result<LabelGrid, FloorplanError> {
    let img = image::open(path)?.to_luma8();
    if img.width() as usize != frame.width || img.height() as usize != frame.height {
        return Err(GeomError::SizeMismatch(format!("image is {}x{}", img.width(), img.height())).into());
    }
    let h = frame.height;
    let mut labels = vec![0u8; frame.width * h];
    for (x, y, p) in img.enumerate_pixels() {
        labels[(h - 1 - y as usize) * frame.width + x as usize] = p.0[0];
    }
    Ok(LabelGrid::new(frame, labels)?)
}
