//! Floor-plan vectorization: label grid to a wall graph with room, door
//! and window semantics.
//!
//! [`structure_mask`] isolates walls and openings, [`vectorize_structure`]
//! turns that mask into a straight-wall graph in pixel coordinates, and
//! [`extract_semantics`] attaches rooms, doors and windows and converts the
//! result to meters.

mod semantics;
mod skeleton;
mod structure;

#[cfg(test)]
mod tests;

use crate::geom::{polygon_area, BinaryBitmap, GeomError, Label, LabelGrid, Point2, EPS_MERGE};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

pub use semantics::extract_semantics;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorizeError {
    #[error("graph covers {covered:.3} of structure pixels (need {required:.3}); {stray_edges} edges leave the structure")]
    Coverage { covered: f64, required: f64, stray_edges: usize },
    #[error("room region with label {label} ({pixels} px) is not enclosed by walls")]
    OpenRoom { label: u8, pixels: usize },
    #[error("no wall found for a {label} opening at ({x:.1}, {y:.1}) px")]
    UnplacedOpening { label: u8, x: f64, y: f64 },
    #[error("invalid vector plan: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizeConfig {
    /// Minimum spacing of the initial random nodes, in pixels.
    pub node_stride: usize,
    /// Initial nodes closer than this (pixels) may be linked.
    pub connect_radius: f64,
    pub max_iterations: usize,
    /// Direction change, in degrees, that makes a node a corner.
    pub anchor_angle_deg: f64,
    /// Deviation tolerance of the centerline simplification, in pixels.
    pub simplify_px: f64,
    /// Anchors closer than this (pixels) are merged.
    pub merge_px: f64,
    /// Minimum share of structure pixels near some edge.
    pub cover_frac: f64,
    /// How far (pixels) an edge may stray from structure.
    pub stray_px: f64,
    pub seed: u64,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        Self {
            node_stride: 4,
            connect_radius: 8.0,
            max_iterations: 5,
            anchor_angle_deg: 20.0,
            simplify_px: 1.5,
            merge_px: 2.0,
            cover_frac: 0.95,
            stray_px: 1.0,
            seed: 0,
        }
    }
}

/// Wall graph in continuous pixel coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructureGraph {
    pub nodes: Vec<Point2>,
    /// Undirected edges as `(low, high)` index pairs.
    pub edges: BTreeSet<(usize, usize)>,
    /// Node count before refinement and after each refinement pass.
    pub history: Vec<usize>,
}

impl StructureGraph {
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        adjacency(self.nodes.len(), &self.edges)
    }
}

fn adjacency(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<u8>> {
    let mut m = vec![vec![0u8; n]; n];
    for &(a, b) in edges {
        m[a][b] = 1;
        m[b][a] = 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorRoom {
    /// Counter-clockwise loop of node indices.
    pub nodes: Vec<usize>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorOpening {
    pub a: usize,
    pub b: usize,
    pub label: Label,
}

/// Vectorized floor plan in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFloorPlan {
    pub nodes: Vec<Point2>,
    pub edges: BTreeSet<(usize, usize)>,
    pub rooms: Vec<VectorRoom>,
    /// Front, interior and balcony doors.
    pub doors: Vec<VectorOpening>,
    pub windows: Vec<VectorOpening>,
}

impl VectorFloorPlan {
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        adjacency(self.nodes.len(), &self.edges)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn room_polygon(&self, room: usize) -> Vec<Point2> {
        self.rooms[room].nodes.iter().map(|&i| self.nodes[i]).collect()
    }

    /// Checks node uniqueness, edge indices, room loops and opening placement.
    pub fn validate(&self) -> Result<(), VectorizeError> {
        let n = self.nodes.len();
        let bad = |m: String| Err(VectorizeError::Invalid(m));
        for &(a, b) in &self.edges {
            if a >= b || b >= n {
                return bad(format!("edge ({a}, {b})"));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.nodes[i].dist(self.nodes[j]) < EPS_MERGE {
                    return Err(GeomError::DuplicateNodes(i, j).into());
                }
            }
        }
        for (r, room) in self.rooms.iter().enumerate() {
            let l = &room.nodes;
            let distinct: BTreeSet<_> = l.iter().collect();
            if l.len() < 3 || distinct.len() != l.len() || l.iter().any(|&i| i >= n) {
                return bad(format!("room {r} loop is not simple"));
            }
            if (0..l.len()).any(|k| !self.has_edge(l[k], l[(k + 1) % l.len()])) {
                return bad(format!("room {r} loop leaves the graph"));
            }
            polygon_area(&self.room_polygon(r))?;
            if !Label::is_room_id(room.label.id()) {
                return bad(format!("room {r} has label {}", room.label.id()));
            }
        }
        for d in &self.doors {
            if !Label::is_door_id(d.label.id()) || !self.has_edge(d.a, d.b) {
                return bad(format!("door ({}, {})", d.a, d.b));
            }
        }
        for w in &self.windows {
            if w.label != Label::Window || !self.has_edge(w.a, w.b) {
                return bad(format!("window ({}, {})", w.a, w.b));
            }
        }
        Ok(())
    }
}

/// Walls, doors, open walls and windows become 1; rooms and outside become 0.
pub fn structure_mask(grid: &LabelGrid) -> BinaryBitmap {
    grid.mask(Label::is_structural_id)
}

/// Converts a structure bitmap into a straight-wall graph in pixel coordinates.
///
/// Random nodes are scattered over the structure and linked along it;
/// corners, junctions and free ends become anchors that absorb the other
/// nodes, and anchors are then moved onto the lines fitted to their walls.
/// An empty bitmap gives an empty graph.
pub fn vectorize_structure(bitmap: &BinaryBitmap, config: &VectorizeConfig) -> Result<StructureGraph, VectorizeError> {
    structure::vectorize(bitmap, config)
}

/// Paints the edges of a graph given in pixel coordinates as walls of the
/// given thickness.
pub fn rasterize_edges(nodes: &[Point2], edges: &BTreeSet<(usize, usize)>, width: usize, height: usize, thickness: f64) -> BinaryBitmap {
    let mut out = BinaryBitmap::new(width, height);
    let r = 0.5 * thickness;
    for &(a, b) in edges {
        let (p, q) = (nodes[a], nodes[b]);
        let x0 = (p.x.min(q.x) - r).floor().max(0.0) as usize;
        let x1 = ((p.x.max(q.x) + r).ceil().max(0.0) as usize).min(width);
        let y0 = (p.y.min(q.y) - r).floor().max(0.0) as usize;
        let y1 = ((p.y.max(q.y) + r).ceil().max(0.0) as usize).min(height);
        for y in y0..y1 {
            for x in x0..x1 {
                if crate::geom::segment_distance(Point2::new(x as f64 + 0.5, y as f64 + 0.5), p, q) <= r {
                    out.set(x, y, true);
                }
            }
        }
    }
    out
}
