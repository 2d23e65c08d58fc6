//! Floor units and building assembly.
//!
//! An aligned vector plan is extruded into a [`FloorUnit`] between its
//! floor's base and top heights; the units of one stacking order are then
//! merged into a single building wireframe together with the window, door
//! and roof streams of the hull. [`enumerate_stackings`] decides which plan
//! goes to which floor.

mod stacking;

#[cfg(test)]
mod tests;

use crate::align::AlignmentTransform;
use crate::exterior::{BuildingHull, FaceRole};
use crate::geom::{segment_distance, FootprintPolygon, Label, NodePool, Point2, Point3, RasterFrame, WireframeBuilder, WireframeGraph, EPS_MERGE};
use crate::vectorize::VectorFloorPlan;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub use stacking::{enumerate_stackings, floor_classes, permutation_count, StackingOrder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssembleError {
    #[error("floor extent [{z_base}, {z_top}] is empty")]
    ZRange { z_base: f64, z_top: f64 },
    #[error("opening band up to {head} m does not fit a {height} m floor")]
    Band { head: f64, height: f64 },
    #[error("no floor units to stack")]
    Empty,
    #[error("{units} units for a {stories}-story hull")]
    UnitCount { units: usize, stories: usize },
    #[error("unit {floor} spans [{z_base}, {z_top}], hull floor spans [{want_base}, {want_top}]")]
    ZMismatch { floor: usize, z_base: f64, z_top: f64, want_base: f64, want_top: f64 },
    #[error("r = {r} exceeds n = {n}")]
    Permutation { n: u64, r: u64 },
    #[error("footprint class {class} has no valid plans")]
    NoPlans { class: usize },
    #[error("footprint class {class}: {plans} plans cannot fill {floors} floors with each reused at most once")]
    InsufficientPlans { class: usize, plans: usize, floors: usize },
    #[error("duplicate plan id {0}")]
    DuplicatePlan(String),
    #[error("plan placement failed: {0}")]
    Placement(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtrudeConfig {
    pub window_sill_m: f64,
    pub window_head_m: f64,
    pub interior_door_height_m: f64,
    /// Height of front and balcony doors.
    pub front_door_height_m: f64,
    /// Plan nodes closer than this many wall thicknesses to the footprint
    /// boundary are moved onto it after alignment.
    pub snap_walls: f64,
}

impl Default for ExtrudeConfig {
    fn default() -> Self {
        Self { window_sill_m: 0.9, window_head_m: 2.1, interior_door_height_m: 2.0, front_door_height_m: 2.1, snap_walls: 2.0 }
    }
}

impl ExtrudeConfig {
    pub fn door_height(&self, label: Label) -> f64 {
        if label == Label::InteriorDoor {
            self.interior_door_height_m
        } else {
            self.front_door_height_m
        }
    }

    fn head(&self) -> f64 {
        self.window_head_m.max(self.interior_door_height_m).max(self.front_door_height_m)
    }
}

/// Window or door rectangle in a wall plane: bottom edge `a -> b`, then the
/// top edge back from `b` to `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpeningRect {
    pub label: Label,
    pub corners: [Point3; 4],
    /// Floor-level wireframe nodes of the wall segment holding the opening.
    pub segment: (usize, usize),
}

/// Rooms as node-index loops keyed by room label ID; each loop lists the
/// floor-level ring followed by the ceiling-level ring.
pub type RoomMap = BTreeMap<u8, Vec<Vec<usize>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct FloorUnit {
    pub wireframe: WireframeGraph,
    pub windows: Vec<OpeningRect>,
    pub doors: Vec<OpeningRect>,
    pub room_map: RoomMap,
    pub z_base: f64,
    pub z_top: f64,
    pub plan_id: String,
}

/// Maps plan coordinates (meters in the plan's raster frame) through an
/// alignment transform found on that frame's pixel lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub frame: RasterFrame,
    /// Scaling pivot in pixels: the centroid of the plan bitmap.
    pub pivot: (f64, f64),
    pub transform: AlignmentTransform,
}

impl Placement {
    pub fn apply(&self, p: Point2) -> Point2 {
        let q = self.frame.to_px(p);
        let t = &self.transform;
        let (cx, cy) = self.pivot;
        self.frame.to_world(Point2::new(cx + t.s_x * (q.x - cx) + t.t_x, cy + t.s_y * (q.y - cy) + t.t_y))
    }
}

/// Applies `placement` to every node, then pulls nodes within `snap_m` of
/// the footprint onto it: each footprint corner takes its nearest node, and
/// the remaining nodes near an edge are projected onto that edge.
pub fn place_plan(plan: &VectorFloorPlan, placement: &Placement, footprint: &FootprintPolygon, snap_m: f64) -> Result<VectorFloorPlan, AssembleError> {
    let mut nodes: Vec<Point2> = plan.nodes.iter().map(|&p| placement.apply(p)).collect();
    let mut fixed = vec![false; nodes.len()];
    for &v in footprint.vertices() {
        let near = (0..nodes.len()).filter(|&i| !fixed[i]).min_by(|&i, &j| nodes[i].dist(v).total_cmp(&nodes[j].dist(v)).then(i.cmp(&j)));
        if let Some(i) = near.filter(|&i| nodes[i].dist(v) <= snap_m) {
            nodes[i] = v;
            fixed[i] = true;
        }
    }
    for (i, p) in nodes.iter_mut().enumerate() {
        if fixed[i] {
            continue;
        }
        let edge = footprint.edges().min_by(|x, y| segment_distance(*p, x.0, x.1).total_cmp(&segment_distance(*p, y.0, y.1)));
        if let Some((a, b)) = edge.filter(|(a, b)| segment_distance(*p, *a, *b) <= snap_m) {
            let u = (b - a).normalized();
            *p = a + u * (*p - a).dot(u).clamp(0.0, a.dist(b));
        }
    }
    let placed = VectorFloorPlan { nodes, ..plan.clone() };
    placed.validate().map_err(|e| AssembleError::Placement(e.to_string()))?;
    Ok(placed)
}

/// Extrudes a plan in building coordinates into a floor unit: every wall
/// edge becomes a vertical quad from `z_base` to `z_top`, doors rise from
/// the floor to their label's height and windows span the sill-to-head band.
pub fn extrude_floor(
    plan: &VectorFloorPlan,
    z_base: f64,
    z_top: f64,
    config: &ExtrudeConfig,
    plan_id: &str,
) -> Result<FloorUnit, AssembleError> {
    if !(z_top > z_base) {
        return Err(AssembleError::ZRange { z_base, z_top });
    }
    if config.head() >= z_top - z_base || config.window_sill_m >= config.window_head_m || config.window_sill_m < 0.0 {
        return Err(AssembleError::Band { head: config.head(), height: z_top - z_base });
    }
    let mut b = WireframeBuilder::on_lattice();
    let n = plan.nodes.len();
    let mut used = vec![false; n];
    for &(i, j) in &plan.edges {
        used[i] = true;
        used[j] = true;
    }
    let mut bottom = vec![usize::MAX; n];
    let mut top = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| used[i]) {
        bottom[i] = b.point(plan.nodes[i].with_z(z_base));
        top[i] = b.point(plan.nodes[i].with_z(z_top));
        b.edge(bottom[i], top[i]);
    }
    for &(i, j) in &plan.edges {
        b.edge(bottom[i], bottom[j]);
        b.edge(top[i], top[j]);
    }
    let rect = |a: Point2, c: Point2, lo: f64, hi: f64| [a.with_z(lo), c.with_z(lo), c.with_z(hi), a.with_z(hi)].map(|p| p.quantized());
    let doors = plan
        .doors
        .iter()
        .map(|d| OpeningRect {
            label: d.label,
            corners: rect(plan.nodes[d.a], plan.nodes[d.b], z_base, z_base + config.door_height(d.label)),
            segment: (bottom[d.a], bottom[d.b]),
        })
        .collect();
    let windows = plan
        .windows
        .iter()
        .map(|w| OpeningRect {
            label: Label::Window,
            corners: rect(plan.nodes[w.a], plan.nodes[w.b], z_base + config.window_sill_m, z_base + config.window_head_m),
            segment: (bottom[w.a], bottom[w.b]),
        })
        .collect();
    let mut room_map = RoomMap::new();
    for room in &plan.rooms {
        let ring: Vec<usize> = room.nodes.iter().map(|&i| bottom[i]).chain(room.nodes.iter().map(|&i| top[i])).collect();
        room_map.entry(room.label.id()).or_default().push(ring);
    }
    Ok(FloorUnit { wireframe: b.build(false), windows, doors, room_map, z_base, z_top, plan_id: plan_id.to_string() })
}

/// Building wireframe with its window, door and roof streams.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledBuilding {
    pub building: WireframeGraph,
    pub windows: WireframeGraph,
    pub doors: WireframeGraph,
    pub roof: WireframeGraph,
    pub room_types: RoomMap,
    pub units: Vec<FloorUnit>,
    /// Lowest floor first.
    pub plan_ids: Vec<String>,
    /// Roof surface loops, for point sampling.
    pub roof_loops: Vec<Vec<Point3>>,
}

/// Adds points to a stream, reusing the building's copy of any point that
/// lies within the merge tolerance of a building node so that shared
/// points are bit-identical across streams.
struct Stream<'a> {
    building: &'a NodePool,
    builder: WireframeBuilder,
}

impl Stream<'_> {
    fn point(&mut self, p: Point3) -> usize {
        let q = self.building.find(p).map_or(p, |i| self.building.points()[i]);
        self.builder.point(q)
    }

    fn closed_loop(&mut self, pts: &[Point3]) {
        let ids: Vec<usize> = pts.iter().map(|&p| self.point(p)).collect();
        for k in 0..ids.len() {
            self.builder.edge(ids[k], ids[(k + 1) % ids.len()]);
        }
    }
}

/// Stacks one unit per story inside `hull`, merging coincident nodes, and
/// attaches the hull's roof (roof, gable and superstructure faces) and roof
/// windows.
pub fn stack_floors(hull: &BuildingHull, units: Vec<FloorUnit>) -> Result<AssembledBuilding, AssembleError> {
    if units.is_empty() {
        return Err(AssembleError::Empty);
    }
    if units.len() != hull.stories() {
        return Err(AssembleError::UnitCount { units: units.len(), stories: hull.stories() });
    }
    for (i, u) in units.iter().enumerate() {
        let (want_base, want_top) = (hull.level(i), hull.level(i + 1));
        if (u.z_base - want_base).abs() > EPS_MERGE || (u.z_top - want_top).abs() > EPS_MERGE {
            return Err(AssembleError::ZMismatch { floor: i, z_base: u.z_base, z_top: u.z_top, want_base, want_top });
        }
    }

    let mut pool = NodePool::on_lattice(EPS_MERGE);
    let mut edges = Vec::new();
    let mut room_types = RoomMap::new();
    for u in &units {
        let map: Vec<usize> = u.wireframe.points().iter().map(|&p| pool.insert(p)).collect();
        edges.extend(u.wireframe.edges().iter().map(|&(a, b)| (map[a], map[b])));
        for (&label, rooms) in &u.room_map {
            room_types.entry(label).or_default().extend(rooms.iter().map(|r| r.iter().map(|&i| map[i]).collect::<Vec<_>>()));
        }
    }

    let stream = |pool: &NodePool, loops: &mut dyn Iterator<Item = Vec<Point3>>| {
        let mut s = Stream { building: pool, builder: WireframeBuilder::on_lattice() };
        for l in loops {
            s.closed_loop(&l);
        }
        s.builder.build(false)
    };
    let windows = stream(
        &pool,
        &mut units.iter().flat_map(|u| u.windows.iter().map(|w| w.corners.to_vec())).chain(hull.roof_windows.iter().map(|w| w.to_vec())),
    );
    let doors = stream(&pool, &mut units.iter().flat_map(|u| u.doors.iter().map(|d| d.corners.to_vec())));
    let faces = hull.wireframe.faces().unwrap_or(&[]);
    let pts = hull.wireframe.points();
    let roof = stream(
        &pool,
        &mut faces
            .iter()
            .zip(&hull.face_roles)
            .filter(|(_, r)| matches!(r, FaceRole::Roof | FaceRole::Gable | FaceRole::Superstructure))
            .map(|(f, _)| f.iter().map(|&i| pts[i]).collect()),
    );

    let building = WireframeGraph::new(pool.into_points(), edges, None).map_err(|e| AssembleError::Placement(e.to_string()))?;
    let plan_ids = units.iter().map(|u| u.plan_id.clone()).collect();
    Ok(AssembledBuilding { building, windows, doors, roof, room_types, units, plan_ids, roof_loops: hull.roof_loops() })
}

/// Whether the units' base and top heights chain without gaps from 0 to
/// `wall_top`.
pub fn floors_contiguous(extents: &[(f64, f64)], wall_top: f64) -> bool {
    let mut z = 0.0;
    for &(lo, hi) in extents {
        if (lo - z).abs() > EPS_MERGE || !(hi > lo) {
            return false;
        }
        z = hi;
    }
    !extents.is_empty() && (z - wall_top).abs() <= EPS_MERGE
}
