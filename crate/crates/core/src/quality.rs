//! Automated quality checks for floor plans and assembled buildings.

use crate::assemble::AssembledBuilding;
use crate::geom::{close_pair, BinaryBitmap, Label, LabelGrid, Point3, EPS_MERGE};
use crate::vectorize::VectorFloorPlan;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

pub const MIN_ROOMS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("label grid is {grid:?}, footprint bitmap is {bitmap:?}")]
    Lattice { grid: (usize, usize), bitmap: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Check {
    MinRoomCount,
    SemanticCoverage,
    RoomEnclosure,
    DoorRoomConsistency,
    UniqueNodes,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::MinRoomCount, Check::SemanticCoverage, Check::RoomEnclosure, Check::DoorRoomConsistency, Check::UniqueNodes];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Plan,
    Pixel { x: usize, y: usize },
    Room { index: usize },
    Edge { a: usize, b: usize },
    Door { index: usize },
    Nodes { stream_a: String, a: usize, stream_b: String, b: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub check: Check,
    /// Plan ID or "building".
    pub scope: String,
    pub location: Location,
    pub message: String,
}

fn diag(check: Check, location: Location, message: String) -> Diagnostic {
    Diagnostic { check, scope: String::new(), location, message }
}

/// Outcome of the checks evaluated so far. A check that has not been
/// evaluated counts as failing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub status: BTreeMap<Check, bool>,
    pub diagnostics: Vec<Diagnostic>,
}

impl QualityReport {
    /// Records one check's diagnostics under `scope`; an empty list passes.
    pub fn record(&mut self, check: Check, scope: &str, diagnostics: Vec<Diagnostic>) {
        let pass = diagnostics.is_empty();
        *self.status.entry(check).or_insert(true) &= pass;
        self.diagnostics.extend(diagnostics.into_iter().map(|d| Diagnostic { scope: scope.to_string(), ..d }));
    }

    /// Combines two reports; a check passes only if it passes in both.
    pub fn merge(&mut self, other: QualityReport) {
        for (c, pass) in other.status {
            *self.status.entry(c).or_insert(true) &= pass;
        }
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn check_passed(&self, check: Check) -> bool {
        self.status.get(&check).copied().unwrap_or(false)
    }

    pub fn passed(&self) -> bool {
        Check::ALL.iter().all(|&c| self.check_passed(c))
    }
}

pub fn check_min_room_count(plan: &VectorFloorPlan) -> Vec<Diagnostic> {
    if plan.rooms.len() >= MIN_ROOMS {
        return Vec::new();
    }
    vec![diag(Check::MinRoomCount, Location::Plan, format!("{} rooms, need at least {MIN_ROOMS}", plan.rooms.len()))]
}

/// Every footprint pixel must carry a label other than 0 and External.
pub fn check_semantic_coverage(grid: &LabelGrid, footprint: &BinaryBitmap) -> Result<Vec<Diagnostic>, QualityError> {
    if (grid.width(), grid.height()) != (footprint.width(), footprint.height()) {
        return Err(QualityError::Lattice { grid: (grid.width(), grid.height()), bitmap: (footprint.width(), footprint.height()) });
    }
    Ok(footprint
        .ones()
        .filter(|&(x, y)| matches!(grid.get(x, y), 0 | 14))
        .map(|(x, y)| diag(Check::SemanticCoverage, Location::Pixel { x, y }, format!("footprint pixel labeled {}", grid.get(x, y))))
        .collect())
}

fn ring_edges(ring: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..ring.len()).map(move |k| {
        let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
        (a.min(b), a.max(b))
    })
}

/// Each room loop must be a closed cycle of at least three distinct nodes
/// whose every edge is in the structure graph. Graph edges are walls, open
/// walls, doors or windows by construction.
pub fn check_room_enclosure(plan: &VectorFloorPlan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (r, room) in plan.rooms.iter().enumerate() {
        let distinct: BTreeSet<_> = room.nodes.iter().collect();
        if room.nodes.len() < 3 || distinct.len() != room.nodes.len() || room.nodes.iter().any(|&i| i >= plan.nodes.len()) {
            out.push(diag(Check::RoomEnclosure, Location::Room { index: r }, "room loop is not a simple cycle".into()));
            continue;
        }
        for (a, b) in ring_edges(&room.nodes) {
            if !plan.edges.contains(&(a, b)) {
                out.push(diag(Check::RoomEnclosure, Location::Edge { a, b }, format!("room {r} ({}) is open along this edge", room.label.name())));
            }
        }
    }
    out
}

/// Rooms must all be reachable from the front door's room through doors,
/// and the number of doors (front, interior and balcony) must equal the
/// number of rooms.
pub fn check_door_room_consistency(plan: &VectorFloorPlan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let c = Check::DoorRoomConsistency;
    if plan.doors.len() != plan.rooms.len() {
        out.push(diag(c, Location::Plan, format!("{} doors for {} rooms", plan.doors.len(), plan.rooms.len())));
    }
    let mut rooms_on_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (r, room) in plan.rooms.iter().enumerate() {
        for e in ring_edges(&room.nodes) {
            rooms_on_edge.entry(e).or_default().push(r);
        }
    }
    let door_rooms: Vec<Vec<usize>> = plan
        .doors
        .iter()
        .map(|d| rooms_on_edge.get(&(d.a.min(d.b), d.a.max(d.b))).cloned().unwrap_or_default())
        .collect();
    for (k, rooms) in door_rooms.iter().enumerate() {
        if rooms.is_empty() {
            out.push(diag(c, Location::Door { index: k }, "door is not on any room boundary".into()));
        }
    }
    let Some(front) = plan.doors.iter().position(|d| d.label == Label::FrontDoor) else {
        out.push(diag(c, Location::Plan, "no front door".into()));
        return out;
    };
    let mut seen = vec![false; plan.rooms.len()];
    let mut queue: VecDeque<usize> = door_rooms[front].iter().copied().collect();
    for &r in &queue {
        seen[r] = true;
    }
    while let Some(r) = queue.pop_front() {
        for rooms in door_rooms.iter().filter(|rs| rs.contains(&r)) {
            for &s in rooms {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }
    for (r, _) in seen.iter().enumerate().filter(|(_, s)| !**s) {
        out.push(diag(c, Location::Room { index: r }, format!("{} is unreachable from the front door", plan.rooms[r].label.name())));
    }
    out
}

/// Node uniqueness over named point streams. Within a stream no two points
/// may lie within `eps`. Across streams a point may reuse another stream's
/// point exactly (an opening corner on a wall node, a roof eave on a wall
/// top), but must not come within `eps` of it otherwise.
pub fn check_unique_nodes(streams: &[(&str, &[Point3])], eps: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let pair = |sa: &str, a: usize, sb: &str, b: usize, d: f64| {
        diag(
            Check::UniqueNodes,
            Location::Nodes { stream_a: sa.to_string(), a, stream_b: sb.to_string(), b },
            format!("points {d:.3e} m apart"),
        )
    };
    for (name, pts) in streams {
        if let Some((a, b)) = close_pair(pts, eps) {
            out.push(pair(name, a, name, b, pts[a].dist(pts[b])));
        }
    }
    let key = |p: &Point3| ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64, (p.z / eps).floor() as i64);
    let mut cells: HashMap<(i64, i64, i64), Vec<(usize, usize)>> = HashMap::new();
    for (s, (_, pts)) in streams.iter().enumerate() {
        for (i, p) in pts.iter().enumerate() {
            let (cx, cy, cz) = key(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        for &(t, j) in cells.get(&(cx + dx, cy + dy, cz + dz)).into_iter().flatten() {
                            let q = streams[t].1[j];
                            if t != s && q != *p && q.dist(*p) <= eps {
                                out.push(pair(streams[t].0, j, streams[s].0, i, q.dist(*p)));
                            }
                        }
                    }
                }
            }
            cells.entry((cx, cy, cz)).or_default().push((s, i));
        }
    }
    out
}

/// All five checks on one floor plan and its label grid. Node uniqueness
/// applies to the plan's nodes.
pub fn check_plan(plan: &VectorFloorPlan, grid: &LabelGrid, footprint: &BinaryBitmap, scope: &str) -> Result<QualityReport, QualityError> {
    let mut r = QualityReport::default();
    r.record(Check::MinRoomCount, scope, check_min_room_count(plan));
    r.record(Check::SemanticCoverage, scope, check_semantic_coverage(grid, footprint)?);
    r.record(Check::RoomEnclosure, scope, check_room_enclosure(plan));
    r.record(Check::DoorRoomConsistency, scope, check_door_room_consistency(plan));
    let pts: Vec<Point3> = plan.nodes.iter().map(|p| p.with_z(0.0)).collect();
    r.record(Check::UniqueNodes, scope, check_unique_nodes(&[("plan", &pts)], EPS_MERGE));
    Ok(r)
}

/// Node uniqueness across the building, window, door and roof streams.
pub fn check_building_nodes(b: &AssembledBuilding) -> Vec<Diagnostic> {
    check_unique_nodes(
        &[
            ("building", b.building.points()),
            ("window", b.windows.points()),
            ("door", b.doors.points()),
            ("roof", b.roof.points()),
        ],
        EPS_MERGE,
    )
}

/// Building report: the reports of the floor plans it stacks, plus node
/// uniqueness over the assembled streams.
pub fn check_building(b: &AssembledBuilding, plan_reports: impl IntoIterator<Item = QualityReport>) -> QualityReport {
    let mut r = QualityReport::default();
    for p in plan_reports {
        r.merge(p);
    }
    r.record(Check::UniqueNodes, "building", check_building_nodes(b));
    r
}
