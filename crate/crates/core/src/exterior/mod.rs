//! Procedural building exteriors.
//!
//! A building is a set of touching convex blocks ([`Part`]), each a vertical
//! prism carrying its own roof. The main block is a rectangle with any of the
//! five roof kinds; extensions are rectangles or trapezoids with flat or shed
//! roofs; a second building can be merged alongside. Shared wall portions are
//! removed and the remaining surface is stitched into a closed wireframe.

mod hull;
mod outline;
mod roof;
mod sample;

pub use hull::build_hull;
pub use roof::{roof_geometry, RoofFace, RoofFrame, RoofGeometry};
pub use sample::{append_extensions, generate_exterior, realize_spec};

use crate::geom::{FootprintPolygon, GeomError, Point2, Point3, WireframeGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoofKind {
    Flat,
    Gabled,
    Hipped,
    Pyramidal,
    Shed,
}

impl RoofKind {
    pub const ALL: [RoofKind; 5] = [RoofKind::Flat, RoofKind::Gabled, RoofKind::Hipped, RoofKind::Pyramidal, RoofKind::Shed];
}

/// Roof of a single block. For gabled roofs `axis` selects the eave edge
/// (0 or 1, the opposite edge is the other eave); for shed roofs it is the
/// index of the high edge. Hipped ridges always follow the longer side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofSpec {
    pub kind: RoofKind,
    pub rise: f64,
    pub axis: usize,
}

impl RoofSpec {
    pub fn flat() -> Self {
        Self { kind: RoofKind::Flat, rise: 0.0, axis: 0 }
    }
}

/// A convex block: four counter-clockwise corners, a story count and a roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub corners: [Point2; 4],
    pub stories: usize,
    pub roof: RoofSpec,
}

impl Part {
    pub fn rectangle(x0: f64, y0: f64, w: f64, d: f64, stories: usize, roof: RoofSpec) -> Self {
        Self {
            corners: [Point2::new(x0, y0), Point2::new(x0 + w, y0), Point2::new(x0 + w, y0 + d), Point2::new(x0, y0 + d)],
            stories,
            roof,
        }
    }

    pub fn translated(&self, d: Point2) -> Self {
        Self { corners: self.corners.map(|c| c + d), ..self.clone() }
    }

    pub fn wall_top(&self, floor_height: f64) -> f64 {
        self.stories as f64 * floor_height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SuperstructureKind {
    /// Gabled box cut into a sloped roof plane.
    Dormer { width: f64, front_height: f64 },
    /// Square vertical prism standing through the roof plane.
    Chimney { size: f64, height: f64 },
    /// Rectangle embedded in the roof plane; recorded as window geometry.
    RoofWindow { width: f64, length: f64 },
}

/// Placement on roof face `face` of part `part`, in that face's frame:
/// `s` is where the element starts along the eave, `d` its inward offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Superstructure {
    pub kind: SuperstructureKind,
    pub part: usize,
    pub face: usize,
    pub s: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionKind {
    Rectangular,
    /// Side walls lean inward by the given angle (degrees from the edge normal).
    Trapezoidal { angle_deg: u32 },
}

/// An extension attached flush to edge `edge` of the footprint, starting
/// `offset` meters from the edge's first vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSpec {
    pub kind: ExtensionKind,
    pub edge: usize,
    pub offset: f64,
    pub width: f64,
    pub depth: f64,
    pub stories: usize,
    pub roof: RoofSpec,
}

impl ExtensionSpec {
    /// Footprint of the extension on the edge `a -> b` of a counter-clockwise polygon.
    pub fn polygon(&self, a: Point2, b: Point2) -> [Point2; 4] {
        let t = (b - a).normalized();
        let out = -t.perp();
        let inset = match self.kind {
            ExtensionKind::Rectangular => 0.0,
            ExtensionKind::Trapezoidal { angle_deg } => self.depth * (angle_deg as f64).to_radians().tan(),
        };
        let p0 = a + t * self.offset;
        let p1 = a + t * (self.offset + self.width);
        // Counter-clockwise: the attach edge runs from p1 back to p0.
        [p1, p0, p0 + out * self.depth + t * inset, p1 + out * self.depth - t * inset]
    }
}

/// Randomized recipe for one building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorSpec {
    pub base_width: f64,
    pub base_depth: f64,
    pub stories: usize,
    pub floor_height: f64,
    pub roof: RoofKind,
    pub roof_rise: f64,
    pub roof_axis: usize,
    pub superstructures: Vec<Superstructure>,
    pub merge_partner: Option<Box<MergePartner>>,
    pub extensions: Vec<ExtensionSpec>,
}

/// Second building merged alongside the main block, already positioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergePartner {
    pub part: Part,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExteriorConfig {
    pub stories_range: (usize, usize),
    pub base_width_range_m: (f64, f64),
    pub base_depth_range_m: (f64, f64),
    pub floor_height_m: f64,
    pub roof_rise_range_m: (f64, f64),
    pub roof_kinds_enabled: Vec<RoofKind>,
    pub p_merge: f64,
    pub p_extension: f64,
    pub max_extensions: usize,
    pub p_superstructure: f64,
}

impl Default for ExteriorConfig {
    fn default() -> Self {
        Self {
            stories_range: (1, 4),
            base_width_range_m: (8.0, 14.0),
            base_depth_range_m: (7.0, 11.0),
            floor_height_m: 3.0,
            roof_rise_range_m: (1.0, 3.0),
            roof_kinds_enabled: RoofKind::ALL.to_vec(),
            p_merge: 0.2,
            p_extension: 0.6,
            max_extensions: 4,
            p_superstructure: 0.5,
        }
    }
}

impl ExteriorConfig {
    pub fn validate(&self) -> Result<(), ExteriorError> {
        let bad = |m: &str| Err(ExteriorError::Config(m.to_string()));
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi;
        if self.stories_range.0 < 1 || self.stories_range.0 > self.stories_range.1 {
            return bad("stories_range must satisfy 1 <= lo <= hi");
        }
        if !range_ok(self.base_width_range_m) || !range_ok(self.base_depth_range_m) {
            return bad("base size ranges must be positive with lo <= hi");
        }
        if self.base_width_range_m.0 < 6.0 || self.base_depth_range_m.0 < 6.0 {
            return bad("base sizes below 6 m leave no room for a floor plan");
        }
        if !(self.floor_height_m >= 2.5 && self.floor_height_m.is_finite()) {
            return bad("floor_height_m must be at least 2.5");
        }
        if !range_ok(self.roof_rise_range_m) {
            return bad("roof_rise_range_m must be positive with lo <= hi");
        }
        if self.roof_kinds_enabled.is_empty() {
            return bad("roof_kinds_enabled is empty");
        }
        if self.max_extensions > 4 {
            return bad("max_extensions is at most 4");
        }
        for p in [self.p_merge, self.p_extension, self.p_superstructure] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceRole {
    Ground,
    Wall,
    /// Wall area above the wall top: gable triangles and shed end walls.
    Gable,
    Roof,
    Superstructure,
}

/// Closed building surface with per-floor horizontal sections.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingHull {
    pub wireframe: WireframeGraph,
    pub face_roles: Vec<FaceRole>,
    pub roof_faces: Vec<usize>,
    /// Index 0 is the ground floor.
    pub floor_footprints: Vec<FootprintPolygon>,
    /// Storey height of each floor.
    pub floor_heights: Vec<f64>,
    pub roof_windows: Vec<[Point3; 4]>,
    pub parts: Vec<Part>,
    pub superstructures: Vec<Superstructure>,
    pub floor_height: f64,
}

impl BuildingHull {
    pub fn stories(&self) -> usize {
        self.floor_footprints.len()
    }

    /// Height of the floor boundary `i` (0 = ground, `stories()` = top).
    pub fn level(&self, i: usize) -> f64 {
        i as f64 * self.floor_height
    }

    pub fn wall_top(&self) -> f64 {
        self.level(self.stories())
    }

    pub fn faces_with_role(&self, role: FaceRole) -> impl Iterator<Item = &[usize]> + '_ {
        let faces = self.wireframe.faces().unwrap_or(&[]);
        faces.iter().zip(&self.face_roles).filter(move |(_, r)| **r == role).map(|(f, _)| f.as_slice())
    }

    /// Point loops of the roof faces.
    pub fn roof_loops(&self) -> Vec<Vec<Point3>> {
        let faces = self.wireframe.faces().unwrap_or(&[]);
        let pts = self.wireframe.points();
        self.roof_faces.iter().map(|&f| faces[f].iter().map(|&i| pts[i]).collect()).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExteriorError {
    #[error("invalid exterior config: {0}")]
    Config(String),
    #[error("at most 4 extensions are allowed, got {0}")]
    TooManyExtensions(usize),
    #[error("extension edge {0} is used twice or does not exist")]
    ExtensionEdge(usize),
    #[error("extension on edge {edge} could not be placed after {attempts} attempts")]
    ExtensionPlacement { edge: usize, attempts: usize },
    #[error("invalid part: {0}")]
    InvalidPart(String),
    #[error("parts {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("footprints are disjoint")]
    Disjoint,
    #[error("second footprint is contained in the first")]
    Contained,
    #[error("floor heights differ ({0} vs {1})")]
    FloorHeightMismatch(f64, f64),
    #[error("incompatible roof lines on part {part} edge {edge}: {reason}")]
    Contact { part: usize, edge: usize, reason: String },
    #[error("outline: {0}")]
    Outline(String),
    #[error("superstructure {index}: {reason}")]
    Superstructure { index: usize, reason: String },
    #[error("edge ({0}, {1}) bounds {2} faces")]
    NotWatertight(usize, usize, usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Checks that every undirected face edge bounds exactly two faces.
pub fn check_watertight(g: &WireframeGraph) -> Result<(), ExteriorError> {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for f in g.faces().unwrap_or(&[]) {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    match count.into_iter().find(|&(_, c)| c != 2) {
        Some(((a, b), c)) => Err(ExteriorError::NotWatertight(a, b, c)),
        None => Ok(()),
    }
}

/// One entry per story, ascending: footprint and the floor's z-extent.
pub fn decompose_floors(hull: &BuildingHull) -> Vec<(FootprintPolygon, f64, f64)> {
    hull.floor_footprints
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), hull.level(i), hull.level(i + 1)))
        .collect()
}

/// Merges `b`, shifted by `offset`, into `a`.
///
/// The shifted main block of `b` may overlap `a`'s main block as long as the
/// part outside `a` is a rectangle; it is then cut back to that rectangle
/// (dropping its superstructures). Containment and disjoint footprints are
/// rejected.
pub fn merge_buildings(a: &BuildingHull, b: &BuildingHull, offset: Point2) -> Result<BuildingHull, ExteriorError> {
    if (a.floor_height - b.floor_height).abs() > 1e-9 {
        return Err(ExteriorError::FloorHeightMismatch(a.floor_height, b.floor_height));
    }
    let mut b_parts: Vec<Part> = b.parts.iter().map(|p| p.translated(offset)).collect();
    let mut b_supers = b.superstructures.clone();
    let (amin, amax) = bbox(&a.parts[0].corners);
    let (bmin, bmax) = bbox(&b_parts[0].corners);
    let axis_aligned = roof::is_rectangle(&a.parts[0].corners)
        && roof::is_rectangle(&b_parts[0].corners)
        && a.parts[0].corners[0].y == a.parts[0].corners[1].y
        && b_parts[0].corners[0].y == b_parts[0].corners[1].y;
    let ov = outline::convex_overlap_area(&a.parts[0].corners, &b_parts[0].corners);
    if ov > 1e-9 {
        if !axis_aligned {
            return Err(ExteriorError::Overlap(0, a.parts.len()));
        }
        let inside = |lo: f64, hi: f64, alo: f64, ahi: f64| lo >= alo - 1e-9 && hi <= ahi + 1e-9;
        let x_in = inside(bmin.x, bmax.x, amin.x, amax.x);
        let y_in = inside(bmin.y, bmax.y, amin.y, amax.y);
        let (lo, hi) = match (x_in, y_in) {
            (true, true) => return Err(ExteriorError::Contained),
            (false, true) if bmin.x < amin.x - 1e-9 && bmax.x <= amax.x + 1e-9 => {
                (bmin, Point2::new(amin.x, bmax.y))
            }
            (false, true) if bmax.x > amax.x + 1e-9 && bmin.x >= amin.x - 1e-9 => {
                (Point2::new(amax.x, bmin.y), bmax)
            }
            (true, false) if bmin.y < amin.y - 1e-9 && bmax.y <= amax.y + 1e-9 => {
                (bmin, Point2::new(bmax.x, amin.y))
            }
            (true, false) if bmax.y > amax.y + 1e-9 && bmin.y >= amin.y - 1e-9 => {
                (Point2::new(bmin.x, amax.y), bmax)
            }
            _ => return Err(ExteriorError::Overlap(0, a.parts.len())),
        };
        let main = &b_parts[0];
        b_parts[0] = Part::rectangle(lo.x, lo.y, hi.x - lo.x, hi.y - lo.y, main.stories, main.roof);
        b_supers.retain(|s| s.part != 0);
    }
    let touches = a.parts.iter().any(|pa| b_parts.iter().any(|pb| parts_touch(pa, pb)));
    if !touches {
        return Err(ExteriorError::Disjoint);
    }
    let shift = a.parts.len();
    let mut parts = a.parts.clone();
    parts.extend(b_parts);
    let mut supers = a.superstructures.clone();
    supers.extend(b_supers.into_iter().map(|s| Superstructure { part: s.part + shift, ..s }));
    build_hull(&parts, &supers, a.floor_height)
}

fn bbox(c: &[Point2; 4]) -> (Point2, Point2) {
    let lo = Point2::new(c.iter().map(|p| p.x).fold(f64::INFINITY, f64::min), c.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
    let hi = Point2::new(c.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max), c.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max));
    (lo, hi)
}

/// Whether two parts share a wall segment of positive length.
fn parts_touch(a: &Part, b: &Part) -> bool {
    (0..4).any(|i| (0..4).any(|j| hull::shared_interval(a, i, b, j).is_some()))
}

#[cfg(test)]
mod tests;
