//! Shared geometric primitives: points, footprint polygons, rasters and
//! wireframe graphs.
//!
//! Every type here is immutable after construction and all operations are
//! pure, so values can be shared freely across worker threads.

mod labels;
mod point;
mod polygon;
mod raster;
mod triangulate;
mod wireframe;

pub use labels::{Label, ROOM_LABELS};
pub use point::{Point2, Point3};
pub use polygon::{point_in_polygon, polygon_area, segment_distance, FootprintPolygon};
pub use raster::{rasterize_polygon, rasterize_polygon_in_frame, BinaryBitmap, LabelGrid, RasterFrame};
pub use triangulate::{face_area, face_normal, triangle_area, triangulate_face};
pub use wireframe::{NodePool, WireframeBuilder, WireframeGraph};
pub(crate) use polygon::point_in_ring;
pub(crate) use wireframe::close_pair;

use thiserror::Error;

/// Merge tolerance for nodes, in meters.
pub const EPS_MERGE: f64 = 1e-4;
/// Coplanarity tolerance for faces, in meters.
pub const EPS_PLANE: f64 = 1e-6;
/// Coordinates are stored on a 1 µm lattice so that records serialize losslessly.
pub const COORD_QUANTUM: f64 = 1e-6;

/// Default raster resolution (pixels per side) for floor-level bitmaps.
pub const DEFAULT_GRID_SIZE: usize = 256;
/// Default empty margin kept around an auto-fitted footprint, in pixels.
pub const DEFAULT_MARGIN_PX: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("polygon extent {extent_m:.3} m needs a {required_px} px grid at {scale} m/px, grid is {grid_px} px")]
    ExceedsGrid {
        extent_m: f64,
        scale: f64,
        required_px: usize,
        grid_px: usize,
    },
    #[error("invalid raster scale {0}")]
    InvalidScale(f64),
    #[error("face is not planar: vertex {index} is {distance:.3e} m off the plane")]
    NonPlanar { index: usize, distance: f64 },
    #[error("face is degenerate")]
    DegenerateFace,
    #[error("adjacency is {rows}x{cols}, expected {n}x{n}")]
    AdjacencyShape { rows: usize, cols: usize, n: usize },
    #[error("adjacency is not symmetric at ({0}, {1})")]
    AdjacencyAsymmetric(usize, usize),
    #[error("adjacency has a self loop at {0}")]
    AdjacencySelfLoop(usize),
    #[error("adjacency entry ({0}, {1}) is not 0 or 1")]
    AdjacencyValue(usize, usize),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid label value {value} at pixel ({x}, {y})")]
    InvalidLabel { x: usize, y: usize, value: u8 },
    #[error("points {0} and {1} are closer than the merge tolerance")]
    DuplicateNodes(usize, usize),
    #[error("raster size mismatch: {0}")]
    SizeMismatch(String),
}

/// Round a coordinate onto the storage lattice.
#[inline]
pub fn quantize(v: f64) -> f64 {
    let q = (v / COORD_QUANTUM).round() / (1.0 / COORD_QUANTUM);
    if q == 0.0 {
        0.0
    } else {
        q
    }
}
