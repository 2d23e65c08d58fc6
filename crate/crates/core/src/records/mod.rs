//! Building records: the JSON schema, output folder layout, loading with
//! validation, and OBJ export.
//!
//! Output tree under a root directory:
//!
//! ```text
//! final_building_outdir/building_001/final_building_<hash>.json
//! deeplayout_visualization_outdir/<plan_id>.png   (colored plan)
//! final_segmentation_outdir/<plan_id>.png         (label mask)
//! ```

mod json;
mod obj;

#[cfg(test)]
mod tests;

use crate::assemble::{AssembledBuilding, FloorUnit, OpeningRect, RoomMap};
use crate::floorplan::{read_label_png, write_label_png};
use crate::geom::{quantize, rasterize_polygon_in_frame, FootprintPolygon, Label, LabelGrid, Point2, Point3, RasterFrame, WireframeBuilder, WireframeGraph, EPS_MERGE};
use crate::quality::{self, Check, QualityReport};
use crate::vectorize::{VectorFloorPlan, VectorOpening, VectorRoom};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use obj::{export_obj, ObjStream};

pub const FINAL_BUILDING_DIR: &str = "final_building_outdir";
pub const VISUALIZATION_DIR: &str = "deeplayout_visualization_outdir";
pub const SEGMENTATION_DIR: &str = "final_segmentation_outdir";

/// Top-level fields, in schema order.
pub const FIELDS: [&str; 12] = [
    "final_building_points",
    "final_building_adj",
    "final_window_points",
    "final_window_adj",
    "final_door_points",
    "final_door_adj",
    "final_roof_points",
    "final_roof_adj",
    "final_room_type_dict",
    "unit_dict_list",
    "floorplan_ID_list",
    "sampled_roof_points_list",
];

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("field `{field}`: {message}")]
    Dimension { field: String, message: String },
    #[error("field `{field}`: {message}")]
    Adjacency { field: String, message: String },
    #[error("field `{field}`: invalid room type ID {id}")]
    RoomId { field: String, id: String },
    #[error("field `{field}`: point index {index} out of range for {len} points")]
    RoomIndex { field: String, index: usize, len: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("invalid JSON: {0}")]
    Json(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordError + '_ {
    move |source| RecordError::Io { path: path.to_path_buf(), source }
}

pub type Points = Vec<[f64; 3]>;
pub type Adjacency = Vec<Vec<u8>>;
/// Room type ID (as a decimal string) to the point-index loops of the rooms
/// of that type. Each loop lists a room's floor ring followed by its
/// ceiling ring.
pub type RoomDict = BTreeMap<String, Vec<Vec<usize>>>;

/// One floor's wireframe, scoped like the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub floor_index: usize,
    #[serde(rename = "floorplan_ID")]
    pub floorplan_id: String,
    pub z_base: f64,
    pub z_top: f64,
    pub final_building_points: Points,
    pub final_building_adj: Adjacency,
    pub final_window_points: Points,
    pub final_window_adj: Adjacency,
    pub final_door_points: Points,
    pub final_door_adj: Adjacency,
    pub final_room_type_dict: RoomDict,
    /// Door wall segments as `[a, b, label]`, with `a` and `b` indexing
    /// `final_building_points` at floor level.
    pub door_segments: Vec<[usize; 3]>,
    /// Window wall segments as `[a, b]`, indexed like `door_segments`.
    pub window_segments: Vec<[usize; 2]>,
    /// The floor's footprint polygon (x, y).
    pub footprint: Vec<[f64; 2]>,
    /// `[grid_size, margin_px]` of the plan's label mask, whose frame is
    /// `RasterFrame::fit(footprint, grid_size, margin_px)`.
    pub plan_grid: [usize; 2],
}

/// Per-floor context a record keeps alongside the unit wireframe.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorMeta {
    /// Should lie on the storage lattice so that the stored copy is exact.
    pub footprint: FootprintPolygon,
    pub grid_size: usize,
    pub margin_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingRecord {
    pub final_building_points: Points,
    pub final_building_adj: Adjacency,
    pub final_window_points: Points,
    pub final_window_adj: Adjacency,
    pub final_door_points: Points,
    pub final_door_adj: Adjacency,
    pub final_roof_points: Points,
    pub final_roof_adj: Adjacency,
    pub final_room_type_dict: RoomDict,
    pub unit_dict_list: Vec<UnitRecord>,
    #[serde(rename = "floorplan_ID_list")]
    pub floorplan_id_list: Vec<String>,
    pub sampled_roof_points_list: Points,
}

fn points(pts: &[Point3]) -> Points {
    pts.iter().map(|p| [quantize(p.x), quantize(p.y), quantize(p.z)]).collect()
}

fn room_dict(map: &RoomMap) -> RoomDict {
    map.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn opening_stream(rects: &[OpeningRect]) -> WireframeGraph {
    let mut b = WireframeBuilder::on_lattice();
    for r in rects {
        b.closed_loop(&r.corners);
    }
    b.build(false)
}

fn unit_record(floor_index: usize, u: &FloorUnit, meta: &FloorMeta) -> UnitRecord {
    let windows = opening_stream(&u.windows);
    let doors = opening_stream(&u.doors);
    UnitRecord {
        floor_index,
        floorplan_id: u.plan_id.clone(),
        z_base: quantize(u.z_base),
        z_top: quantize(u.z_top),
        final_building_points: points(u.wireframe.points()),
        final_building_adj: u.wireframe.adjacency_matrix(),
        final_window_points: points(windows.points()),
        final_window_adj: windows.adjacency_matrix(),
        final_door_points: points(doors.points()),
        final_door_adj: doors.adjacency_matrix(),
        final_room_type_dict: room_dict(&u.room_map),
        door_segments: u.doors.iter().map(|d| [d.segment.0, d.segment.1, d.label.id() as usize]).collect(),
        window_segments: u.windows.iter().map(|w| [w.segment.0, w.segment.1]).collect(),
        footprint: meta.footprint.vertices().iter().map(|p| [quantize(p.x), quantize(p.y)]).collect(),
        plan_grid: [meta.grid_size, meta.margin_px],
    }
}

impl BuildingRecord {
    /// Record of an assembled building; `floors[i]` describes floor `i` and
    /// `roof_points` is the sampled roof cloud.
    pub fn from_assembled(b: &AssembledBuilding, floors: &[FloorMeta], roof_points: &[Point3]) -> Self {
        Self {
            final_building_points: points(b.building.points()),
            final_building_adj: b.building.adjacency_matrix(),
            final_window_points: points(b.windows.points()),
            final_window_adj: b.windows.adjacency_matrix(),
            final_door_points: points(b.doors.points()),
            final_door_adj: b.doors.adjacency_matrix(),
            final_roof_points: points(b.roof.points()),
            final_roof_adj: b.roof.adjacency_matrix(),
            final_room_type_dict: room_dict(&b.room_types),
            unit_dict_list: b.units.iter().zip(floors).enumerate().map(|(i, (u, m))| unit_record(i, u, m)).collect(),
            floorplan_id_list: b.plan_ids.clone(),
            sampled_roof_points_list: points(roof_points),
        }
    }

    /// Checks every schema invariant; errors name the offending field.
    pub fn validate(&self) -> Result<(), RecordError> {
        let streams = [
            ("final_building", &self.final_building_points, &self.final_building_adj),
            ("final_window", &self.final_window_points, &self.final_window_adj),
            ("final_door", &self.final_door_points, &self.final_door_adj),
            ("final_roof", &self.final_roof_points, &self.final_roof_adj),
        ];
        for (name, pts, adj) in streams {
            check_stream(name, pts, adj)?;
        }
        check_points("sampled_roof_points_list", &self.sampled_roof_points_list)?;
        check_rooms("final_room_type_dict", &self.final_room_type_dict, self.final_building_points.len())?;
        if self.floorplan_id_list.len() != self.unit_dict_list.len() {
            return Err(RecordError::Dimension {
                field: "floorplan_ID_list".into(),
                message: format!("{} IDs for {} floor units", self.floorplan_id_list.len(), self.unit_dict_list.len()),
            });
        }
        for (i, u) in self.unit_dict_list.iter().enumerate() {
            let f = |s: &str| format!("unit_dict_list[{i}].{s}");
            if u.floor_index != i || u.floorplan_id != self.floorplan_id_list[i] {
                return Err(RecordError::Field { field: f("floorplan_ID"), message: "unit does not match floorplan_ID_list".into() });
            }
            if !(u.z_top > u.z_base) {
                return Err(RecordError::Field { field: f("z_top"), message: format!("{} is not above z_base {}", u.z_top, u.z_base) });
            }
            check_stream(&f("final_building"), &u.final_building_points, &u.final_building_adj)?;
            check_stream(&f("final_window"), &u.final_window_points, &u.final_window_adj)?;
            check_stream(&f("final_door"), &u.final_door_points, &u.final_door_adj)?;
            check_rooms(&f("final_room_type_dict"), &u.final_room_type_dict, u.final_building_points.len())?;
            let n = u.final_building_points.len();
            for &[a, b, label] in &u.door_segments {
                if a >= n || b >= n || a == b || !u8::try_from(label).is_ok_and(Label::is_door_id) {
                    return Err(RecordError::Field { field: f("door_segments"), message: format!("bad door [{a}, {b}, {label}]") });
                }
            }
            if let Some(&[a, b]) = u.window_segments.iter().find(|&&[a, b]| a >= n || b >= n || a == b) {
                return Err(RecordError::Field { field: f("window_segments"), message: format!("bad window [{a}, {b}]") });
            }
            if u.footprint.len() < 3 || u.footprint.iter().flatten().any(|v| !v.is_finite()) {
                return Err(RecordError::Field { field: f("footprint"), message: "needs at least 3 finite vertices".into() });
            }
        }
        Ok(())
    }

    /// Canonical serialization: compact, sorted keys, six-decimal floats.
    pub fn to_json_bytes(&self) -> Result<Vec<u8>, RecordError> {
        json::to_canonical_bytes(self).map_err(|e| RecordError::Json(e.to_string()))
    }

    /// First 12 hex digits of the SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> Result<String, RecordError> {
        Ok(hash_hex(&self.to_json_bytes()?))
    }

}

impl UnitRecord {
    pub fn footprint_polygon(&self) -> Result<FootprintPolygon, RecordError> {
        FootprintPolygon::new(self.footprint.iter().map(|&[x, y]| Point2::new(x, y)).collect())
            .map_err(|e| RecordError::Field { field: format!("unit_dict_list[{}].footprint", self.floor_index), message: e.to_string() })
    }

    pub fn plan_frame(&self) -> Result<RasterFrame, RecordError> {
        Ok(RasterFrame::fit(&self.footprint_polygon()?, self.plan_grid[0], self.plan_grid[1]))
    }

    /// The floor-level plan graph: nodes at `z_base`, the horizontal edges
    /// between them, room floor rings and opening segments.
    pub fn floor_plan(&self) -> Result<VectorFloorPlan, RecordError> {
        let field = |s: &str| format!("unit_dict_list[{}].{s}", self.floor_index);
        let mut index = vec![usize::MAX; self.final_building_points.len()];
        let mut nodes = Vec::new();
        for (i, p) in self.final_building_points.iter().enumerate() {
            if (p[2] - self.z_base).abs() <= 1e-6 {
                index[i] = nodes.len();
                nodes.push(Point2::new(p[0], p[1]));
            }
        }
        let mut edges = BTreeSet::new();
        for (i, row) in self.final_building_adj.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v != 0 && index[i] != usize::MAX && index[j] != usize::MAX {
                    edges.insert((index[i].min(index[j]), index[i].max(index[j])));
                }
            }
        }
        let floor = |i: usize, f: &str| match index.get(i) {
            Some(&k) if k != usize::MAX => Ok(k),
            _ => Err(RecordError::Field { field: field(f), message: format!("point {i} is not at floor level") }),
        };
        let mut rooms = Vec::new();
        for (key, loops) in &self.final_room_type_dict {
            let label = key.parse::<u8>().ok().and_then(Label::from_id).ok_or_else(|| RecordError::RoomId { field: field("final_room_type_dict"), id: key.clone() })?;
            for l in loops {
                let ring = l[..l.len() / 2].iter().map(|&i| floor(i, "final_room_type_dict")).collect::<Result<_, _>>()?;
                rooms.push(VectorRoom { nodes: ring, label });
            }
        }
        let mut doors = Vec::new();
        for &[a, b, label] in &self.door_segments {
            let label = Label::from_id(label as u8).ok_or_else(|| RecordError::Field { field: field("door_segments"), message: format!("label {label}") })?;
            doors.push(VectorOpening { a: floor(a, "door_segments")?, b: floor(b, "door_segments")?, label });
        }
        let mut windows = Vec::new();
        for &[a, b] in &self.window_segments {
            windows.push(VectorOpening { a: floor(a, "window_segments")?, b: floor(b, "window_segments")?, label: Label::Window });
        }
        Ok(VectorFloorPlan { nodes, edges, rooms, doors, windows })
    }
}

/// Runs the five quality checks on a stored building: each unit's floor
/// plan (with its label mask read from `out_root`) and node uniqueness
/// across the record's point streams.
pub fn check_record(record: &BuildingRecord, out_root: &Path) -> Result<QualityReport, RecordError> {
    let mut report = QualityReport::default();
    for u in &record.unit_dict_list {
        let plan = u.floor_plan()?;
        let frame = u.plan_frame()?;
        let (_, seg) = plan_image_paths(out_root, &u.floorplan_id);
        let grid = read_label_png(&seg, frame).map_err(|e| RecordError::Image { path: seg.clone(), message: e.to_string() })?;
        let footprint = rasterize_polygon_in_frame(&u.footprint_polygon()?, &frame)
            .map_err(|e| RecordError::Field { field: format!("unit_dict_list[{}].footprint", u.floor_index), message: e.to_string() })?;
        let r = quality::check_plan(&plan, &grid, &footprint, &u.floorplan_id).map_err(|e| RecordError::Image { path: seg, message: e.to_string() })?;
        report.merge(r);
    }
    let pts = |p: &Points| p.iter().map(|&[x, y, z]| Point3::new(x, y, z)).collect::<Vec<_>>();
    let (b, w, d, r) = (pts(&record.final_building_points), pts(&record.final_window_points), pts(&record.final_door_points), pts(&record.final_roof_points));
    let diags = quality::check_unique_nodes(&[("building", &b), ("window", &w), ("door", &d), ("roof", &r)], EPS_MERGE);
    report.record(Check::UniqueNodes, "building", diags);
    Ok(report)
}

fn hash_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn check_points(field: &str, pts: &Points) -> Result<(), RecordError> {
    if let Some(i) = pts.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(RecordError::Field { field: field.into(), message: format!("point {i} is not finite") });
    }
    Ok(())
}

fn check_stream(prefix: &str, pts: &Points, adj: &Adjacency) -> Result<(), RecordError> {
    let (pf, af) = (format!("{prefix}_points"), format!("{prefix}_adj"));
    check_points(&pf, pts)?;
    let n = pts.len();
    if adj.len() != n {
        return Err(RecordError::Dimension { field: af, message: format!("{} rows for {n} points", adj.len()) });
    }
    for (i, row) in adj.iter().enumerate() {
        if row.len() != n {
            return Err(RecordError::Dimension { field: af, message: format!("row {i} has {} entries for {n} points", row.len()) });
        }
    }
    for i in 0..n {
        if adj[i][i] != 0 {
            return Err(RecordError::Adjacency { field: af, message: format!("nonzero diagonal at {i}") });
        }
        for j in 0..n {
            if adj[i][j] > 1 || adj[i][j] != adj[j][i] {
                return Err(RecordError::Adjacency { field: af, message: format!("entries ({i}, {j}) and ({j}, {i}) are {} and {}", adj[i][j], adj[j][i]) });
            }
        }
    }
    Ok(())
}

fn check_rooms(field: &str, rooms: &RoomDict, n: usize) -> Result<(), RecordError> {
    for (key, loops) in rooms {
        if !key.parse::<u8>().is_ok_and(Label::is_room_id) {
            return Err(RecordError::RoomId { field: field.into(), id: key.clone() });
        }
        if let Some(&index) = loops.iter().flatten().find(|&&i| i >= n) {
            return Err(RecordError::RoomIndex { field: field.into(), index, len: n });
        }
    }
    Ok(())
}

fn take<T: DeserializeOwned>(obj: &mut Map<String, Value>, field: &str) -> Result<T, RecordError> {
    let v = obj.remove(field).ok_or_else(|| RecordError::MissingField(field.into()))?;
    serde_json::from_value(v).map_err(|e| RecordError::Field { field: field.into(), message: e.to_string() })
}

/// Parses and validates a record.
pub fn parse_record(bytes: &[u8]) -> Result<BuildingRecord, RecordError> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| RecordError::Json(e.to_string()))?;
    let Value::Object(mut obj) = v else {
        return Err(RecordError::Json("top level is not an object".into()));
    };
    if let Some(missing) = FIELDS.iter().find(|f| !obj.contains_key(**f)) {
        return Err(RecordError::MissingField(missing.to_string()));
    }
    let mut units = Vec::new();
    let unit_values: Vec<Value> = take(&mut obj, "unit_dict_list")?;
    for (i, u) in unit_values.into_iter().enumerate() {
        let field = format!("unit_dict_list[{i}]");
        let Value::Object(mut m) = u else {
            return Err(RecordError::Field { field, message: "not an object".into() });
        };
        let mut get = |name: &str| m.remove(name).ok_or_else(|| RecordError::MissingField(format!("{field}.{name}")));
        let mut fields = Map::new();
        for name in [
            "floor_index",
            "floorplan_ID",
            "z_base",
            "z_top",
            "final_building_points",
            "final_building_adj",
            "final_window_points",
            "final_window_adj",
            "final_door_points",
            "final_door_adj",
            "final_room_type_dict",
            "door_segments",
            "window_segments",
            "footprint",
            "plan_grid",
        ] {
            fields.insert(name.to_string(), get(name)?);
        }
        units.push(serde_json::from_value(Value::Object(fields)).map_err(|e| RecordError::Field { field, message: e.to_string() })?);
    }
    let record = BuildingRecord {
        final_building_points: take(&mut obj, "final_building_points")?,
        final_building_adj: take(&mut obj, "final_building_adj")?,
        final_window_points: take(&mut obj, "final_window_points")?,
        final_window_adj: take(&mut obj, "final_window_adj")?,
        final_door_points: take(&mut obj, "final_door_points")?,
        final_door_adj: take(&mut obj, "final_door_adj")?,
        final_roof_points: take(&mut obj, "final_roof_points")?,
        final_roof_adj: take(&mut obj, "final_roof_adj")?,
        final_room_type_dict: take(&mut obj, "final_room_type_dict")?,
        unit_dict_list: units,
        floorplan_id_list: take(&mut obj, "floorplan_ID_list")?,
        sampled_roof_points_list: take(&mut obj, "sampled_roof_points_list")?,
    };
    record.validate()?;
    Ok(record)
}

pub fn load_record(path: &Path) -> Result<BuildingRecord, RecordError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    parse_record(&bytes).map_err(|e| match e {
        RecordError::Json(message) => RecordError::Json(format!("{}: {message}", path.display())),
        other => other,
    })
}

pub fn building_dir(out_root: &Path, exterior_id: usize) -> PathBuf {
    out_root.join(FINAL_BUILDING_DIR).join(format!("building_{exterior_id:03}"))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RecordError> {
    let dir = path.parent().expect("output path has a parent");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Validates and writes a record; returns its path.
pub fn emit_record(record: &BuildingRecord, out_root: &Path, exterior_id: usize) -> Result<PathBuf, RecordError> {
    record.validate()?;
    let bytes = record.to_json_bytes()?;
    let path = building_dir(out_root, exterior_id).join(format!("final_building_{}.json", hash_hex(&bytes)));
    write_atomic(&path, &bytes)?;
    Ok(path)
}

/// RGB color of each label ID in plan visualizations.
pub fn label_color(id: u8) -> [u8; 3] {
    match id {
        1 => [238, 232, 170],
        2 => [255, 165, 0],
        3 => [240, 128, 128],
        4 => [173, 216, 230],
        5 => [218, 165, 32],
        6 => [255, 182, 193],
        7 => [189, 183, 107],
        8 => [250, 128, 114],
        9 => [221, 160, 221],
        10 => [144, 238, 144],
        11 => [244, 164, 96],
        12 => [210, 180, 140],
        13 => [205, 133, 63],
        14 => [255, 255, 255],
        15 => [40, 40, 40],
        16 => [110, 110, 110],
        17 => [200, 0, 0],
        18 => [0, 120, 200],
        19 => [180, 180, 180],
        20 => [0, 200, 200],
        21 => [0, 160, 0],
        _ => [0, 0, 0],
    }
}

pub fn plan_image_paths(out_root: &Path, plan_id: &str) -> (PathBuf, PathBuf) {
    let name = format!("{plan_id}.png");
    (out_root.join(VISUALIZATION_DIR).join(&name), out_root.join(SEGMENTATION_DIR).join(name))
}

/// Writes a plan's colored rendering and its label mask.
pub fn write_plan_images(grid: &LabelGrid, plan_id: &str, out_root: &Path) -> Result<(), RecordError> {
    let (vis, seg) = plan_image_paths(out_root, plan_id);
    for p in [&vis, &seg] {
        let dir = p.parent().expect("image path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let img = image::RgbImage::from_fn(w, h, |x, y| image::Rgb(label_color(grid.get(x as usize, (h - 1 - y) as usize))));
    img.save_with_format(&vis, image::ImageFormat::Png).map_err(|e| RecordError::Image { path: vis.clone(), message: e.to_string() })?;
    write_label_png(grid, &seg).map_err(|e| RecordError::Image { path: seg.clone(), message: e.to_string() })
}

/// Plan IDs of `record` lacking either image under `out_root`.
pub fn missing_plan_images(record: &BuildingRecord, out_root: &Path) -> Vec<String> {
    record
        .floorplan_id_list
        .iter()
        .filter(|id| {
            let (vis, seg) = plan_image_paths(out_root, id);
            !vis.is_file() || !seg.is_file()
        })
        .cloned()
        .collect()
}

/// Every record file under `out_root`'s building directory, sorted by path.
pub fn record_paths(out_root: &Path) -> Result<Vec<PathBuf>, RecordError> {
    let root = out_root.join(FINAL_BUILDING_DIR);
    let mut out = Vec::new();
    let dirs = match fs::read_dir(&root) {
        Ok(d) => d,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(RecordError::Io { path: root, source: e }),
    };
    for d in dirs {
        let d = d.map_err(io_err(&root))?.path();
        if !d.is_dir() || !d.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("building_")) {
            continue;
        }
        for f in fs::read_dir(&d).map_err(io_err(&d))? {
            let f = f.map_err(io_err(&d))?.path();
            if f.extension().is_some_and(|e| e == "json") {
                out.push(f);
            }
        }
    }
    out.sort();
    Ok(out)
}
