//! Rasterization of a room layout into a label grid.

use super::FloorLayout;
use crate::geom::{point_in_ring, segment_distance, FootprintPolygon, Label, LabelGrid, Point2, RasterFrame};

struct Canvas<'a> {
    frame: &'a RasterFrame,
    labels: Vec<u8>,
}

impl Canvas<'_> {
    /// Pixel index ranges covering the box `[lo, hi]` grown by `pad` meters.
    fn span(&self, lo: Point2, hi: Point2, pad: f64) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let f = self.frame;
        let a = f.to_px(lo - Point2::new(pad, pad));
        let b = f.to_px(hi + Point2::new(pad, pad));
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n);
        (clamp(a.x.floor(), f.width)..clamp(b.x.ceil() + 1.0, f.width), clamp(a.y.floor(), f.height)..clamp(b.y.ceil() + 1.0, f.height))
    }

    fn each(&mut self, lo: Point2, hi: Point2, pad: f64, mut f: impl FnMut(Point2, &mut u8)) {
        let (xs, ys) = self.span(lo, hi, pad);
        for y in ys {
            for x in xs.clone() {
                let c = self.frame.pixel_center(x, y);
                f(c, &mut self.labels[y * self.frame.width + x]);
            }
        }
    }
}

fn seg_box(a: Point2, b: Point2) -> (Point2, Point2) {
    (Point2::new(a.x.min(b.x), a.y.min(b.y)), Point2::new(a.x.max(b.x), a.y.max(b.y)))
}

/// Paints rooms, then walls, then openings.
///
/// Exterior walls are a band `wall_px` pixels wide inside the footprint
/// boundary; interior walls are centered on shared room edges with the same
/// total width. Doors and windows replace wall pixels over their span.
pub(crate) fn paint(frame: &RasterFrame, footprint: &FootprintPolygon, layout: &FloorLayout, wall_px: f64) -> LabelGrid {
    let mut cv = Canvas { frame, labels: vec![Label::External.id(); frame.width * frame.height] };
    let fp = footprint.vertices();
    let (lo, hi) = footprint.bbox();
    let room_boxes: Vec<(Point2, Point2)> = layout
        .rooms
        .iter()
        .map(|r| {
            let p = FootprintPolygon::new(r.polygon.clone()).map(|p| p.bbox());
            p.unwrap_or((lo, hi))
        })
        .collect();
    cv.each(lo, hi, 0.0, |c, v| {
        if !point_in_ring(c, fp) {
            return;
        }
        let inside = layout.rooms.iter().zip(&room_boxes).position(|(r, (rl, rh))| {
            c.x >= rl.x - 1e-9 && c.y >= rl.y - 1e-9 && c.x <= rh.x + 1e-9 && c.y <= rh.y + 1e-9 && point_in_ring(c, &r.polygon)
        });
        let room = inside.unwrap_or_else(|| {
            // Rounding at shared edges: fall back to the nearest room.
            let dist = |poly: &[Point2]| {
                (0..poly.len()).map(|i| segment_distance(c, poly[i], poly[(i + 1) % poly.len()])).fold(f64::INFINITY, f64::min)
            };
            (0..layout.rooms.len())
                .min_by(|&a, &b| dist(&layout.rooms[a].polygon).total_cmp(&dist(&layout.rooms[b].polygon)))
                .expect("layout has rooms")
        });
        *v = layout.rooms[room].label.id();
    });

    let s = frame.scale;
    let ext = wall_px * s;
    let half = 0.5 * wall_px * s;
    let is_room = |v: u8| Label::is_room_id(v);
    for i in 0..fp.len() {
        let (a, b) = (fp[i], fp[(i + 1) % fp.len()]);
        let (blo, bhi) = seg_box(a, b);
        cv.each(blo, bhi, ext + s, |c, v| {
            if is_room(*v) && segment_distance(c, a, b) < ext {
                *v = Label::ExteriorWall.id();
            }
        });
    }
    for room in &layout.rooms {
        let p = &room.polygon;
        for i in 0..p.len() {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            let (blo, bhi) = seg_box(a, b);
            cv.each(blo, bhi, half + s, |c, v| {
                if is_room(*v) && segment_distance(c, a, b) < half {
                    *v = Label::InteriorWall.id();
                }
            });
        }
    }

    let mut opening = |a: Point2, b: Point2, label: Label, host: Label, exterior: bool| {
        let len = a.dist(b);
        let u = (b - a) * (1.0 / len);
        let n = u.perp();
        let (blo, bhi) = seg_box(a, b);
        cv.each(blo, bhi, ext + s, |c, v| {
            if *v != host.id() {
                return;
            }
            let t = (c - a).dot(u);
            let off = (c - a).dot(n);
            let across = if exterior { (-1e-9..ext).contains(&off) } else { off.abs() < half };
            if across && (0.0..=len).contains(&t) {
                *v = label.id();
            }
        });
    };
    for d in &layout.doors {
        let exterior = d.label == Label::FrontDoor;
        let host = if exterior { Label::ExteriorWall } else { Label::InteriorWall };
        opening(d.a, d.b, d.label, host, exterior);
    }
    for w in &layout.windows {
        opening(w.a, w.b, Label::Window, Label::ExteriorWall, true);
    }
    LabelGrid::new(*frame, cv.labels).expect("painted labels are valid")
}
