use super::{Adjacency, BuildingRecord, Points};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjStream {
    Building,
    Window,
    Door,
    Roof,
}

impl ObjStream {
    pub const ALL: [ObjStream; 4] = [ObjStream::Building, ObjStream::Window, ObjStream::Door, ObjStream::Roof];

    pub fn name(self) -> &'static str {
        match self {
            ObjStream::Building => "building",
            ObjStream::Window => "window",
            ObjStream::Door => "door",
            ObjStream::Roof => "roof",
        }
    }

    fn data(self, r: &BuildingRecord) -> (&Points, &Adjacency) {
        match self {
            ObjStream::Building => (&r.final_building_points, &r.final_building_adj),
            ObjStream::Window => (&r.final_window_points, &r.final_window_adj),
            ObjStream::Door => (&r.final_door_points, &r.final_door_adj),
            ObjStream::Roof => (&r.final_roof_points, &r.final_roof_adj),
        }
    }
}

/// Wireframe edges as OBJ line elements, one named group per non-empty
/// stream.
pub fn export_obj(record: &BuildingRecord, streams: &[ObjStream]) -> String {
    let mut out = String::new();
    let mut base = 0usize;
    for &s in streams {
        let (pts, adj) = s.data(record);
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(out, "g {}", s.name());
        for p in pts {
            let _ = writeln!(out, "v {:.6} {:.6} {:.6}", p[0], p[1], p[2]);
        }
        for (i, row) in adj.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v != 0 {
                    let _ = writeln!(out, "l {} {}", base + i + 1, base + j + 1);
                }
            }
        }
        base += pts.len();
    }
    out
}
