use super::polygon::point_in_ring;
use super::{FootprintPolygon, GeomError, Label, Point2};
use serde::{Deserialize, Serialize};

/// Placement of a pixel grid in world coordinates.
///
/// Pixel `(i, j)` covers `[origin.x + i*scale, origin.x + (i+1)*scale)` in x
/// and likewise in y; row 0 is the lowest row. Continuous pixel
/// coordinates put the center of pixel `(i, j)` at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterFrame {
    pub origin: Point2,
    pub scale: f64,
    pub width: usize,
    pub height: usize,
}

impl RasterFrame {
    pub fn centered(center: Point2, scale: f64, width: usize, height: usize) -> Self {
        let origin = Point2::new(
            center.x - 0.5 * width as f64 * scale,
            center.y - 0.5 * height as f64 * scale,
        );
        Self { origin, scale, width, height }
    }

    /// Square frame of `grid` pixels whose scale makes the polygon's longer
    /// side span `grid - 2*margin` pixels.
    pub fn fit(poly: &FootprintPolygon, grid: usize, margin: usize) -> Self {
        let (lo, hi) = poly.bbox();
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        let usable = grid.saturating_sub(2 * margin).max(1) as f64;
        let scale = extent / usable;
        Self::centered((lo + hi) * 0.5, scale, grid, grid)
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + (i as f64 + 0.5) * self.scale,
            self.origin.y + (j as f64 + 0.5) * self.scale,
        )
    }

    pub fn to_px(&self, p: Point2) -> Point2 {
        Point2::new((p.x - self.origin.x) / self.scale, (p.y - self.origin.y) / self.scale)
    }

    pub fn to_world(&self, px: Point2) -> Point2 {
        Point2::new(self.origin.x + px.x * self.scale, self.origin.y + px.y * self.scale)
    }

    fn contains_bbox(&self, lo: Point2, hi: Point2) -> bool {
        let w = self.width as f64 * self.scale;
        let h = self.height as f64 * self.scale;
        lo.x >= self.origin.x - 1e-9
            && lo.y >= self.origin.y - 1e-9
            && hi.x <= self.origin.x + w + 1e-9
            && hi.y <= self.origin.y + h + 1e-9
    }
}

/// W×H raster of 0/1 values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryBitmap {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryBitmap {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![0; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, GeomError> {
        if bits.len() != width * height {
            return Err(GeomError::SizeMismatch(format!(
                "{} bits for {width}x{height}",
                bits.len()
            )));
        }
        if let Some(k) = bits.iter().position(|&b| b > 1) {
            return Err(GeomError::InvalidLabel { x: k % width.max(1), y: k / width.max(1), value: bits[k] });
        }
        Ok(Self { width, height, bits })
    }

    /// Builds a bitmap from rows given top row first, as in a text picture.
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut bmp = Self::new(width, height);
        for (r, row) in rows.iter().enumerate() {
            let y = height - 1 - r;
            for (x, c) in row.bytes().enumerate() {
                if c == b'1' || c == b'#' {
                    bmp.set(x, y, true);
                }
            }
        }
        bmp
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    /// Out-of-range coordinates read as 0.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(move |(k, _)| (k % w, k / w))
    }
}

/// Raster of semantic label IDs placed in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGrid {
    frame: RasterFrame,
    labels: Vec<u8>,
}

impl LabelGrid {
    pub fn filled(frame: RasterFrame, value: u8) -> Self {
        Self { frame, labels: vec![value; frame.width * frame.height] }
    }

    pub fn new(frame: RasterFrame, labels: Vec<u8>) -> Result<Self, GeomError> {
        if !(frame.scale > 0.0 && frame.scale.is_finite()) {
            return Err(GeomError::InvalidScale(frame.scale));
        }
        if labels.len() != frame.width * frame.height {
            return Err(GeomError::SizeMismatch(format!(
                "{} labels for {}x{}",
                labels.len(),
                frame.width,
                frame.height
            )));
        }
        if let Some(k) = labels.iter().position(|&v| v != 0 && Label::from_id(v).is_none()) {
            return Err(GeomError::InvalidLabel {
                x: k % frame.width,
                y: k / frame.width,
                value: labels[k],
            });
        }
        Ok(Self { frame, labels })
    }

    pub fn frame(&self) -> &RasterFrame {
        &self.frame
    }

    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    pub fn scale(&self) -> f64 {
        self.frame.scale
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.frame.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(v == 0 || Label::from_id(v).is_some());
        self.labels[y * self.frame.width + x] = v;
    }

    /// Bitmap of pixels satisfying `pred`.
    pub fn mask(&self, pred: impl Fn(u8) -> bool) -> BinaryBitmap {
        BinaryBitmap {
            width: self.width(),
            height: self.height(),
            bits: self.labels.iter().map(|&v| pred(v) as u8).collect(),
        }
    }

    /// Pixels belonging to the building (labelled, not External).
    pub fn building_mask(&self) -> BinaryBitmap {
        self.mask(|v| v != 0 && v != Label::External.id())
    }
}

/// Rasterize a polygon centered in a square `grid_size` grid at `scale` m/px.
/// A pixel is set iff its center lies inside the polygon (boundary inclusive).
pub fn rasterize_polygon(
    poly: &FootprintPolygon,
    scale: f64,
    grid_size: usize,
) -> Result<BinaryBitmap, GeomError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(GeomError::InvalidScale(scale));
    }
    let (lo, hi) = poly.bbox();
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let required_px = (extent / scale - 1e-9).ceil().max(0.0) as usize;
    if required_px > grid_size {
        return Err(GeomError::ExceedsGrid { extent_m: extent, scale, required_px, grid_px: grid_size });
    }
    let frame = RasterFrame::centered((lo + hi) * 0.5, scale, grid_size, grid_size);
    rasterize_polygon_in_frame(poly, &frame)
}

/// Rasterize into an explicit frame; the polygon must lie within the frame.
pub fn rasterize_polygon_in_frame(
    poly: &FootprintPolygon,
    frame: &RasterFrame,
) -> Result<BinaryBitmap, GeomError> {
    let (lo, hi) = poly.bbox();
    if !frame.contains_bbox(lo, hi) {
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        let far = [lo.x - frame.origin.x, lo.y - frame.origin.y, hi.x - frame.origin.x, hi.y - frame.origin.y]
            .iter()
            .map(|d| d.abs())
            .fold(extent, f64::max);
        return Err(GeomError::ExceedsGrid {
            extent_m: extent,
            scale: frame.scale,
            required_px: (far / frame.scale).ceil() as usize,
            grid_px: frame.width.max(frame.height),
        });
    }
    let mut bmp = BinaryBitmap::new(frame.width, frame.height);
    let plo = frame.to_px(lo);
    let phi = frame.to_px(hi);
    let x0 = (plo.x - 1.0).floor().max(0.0) as usize;
    let y0 = (plo.y - 1.0).floor().max(0.0) as usize;
    let x1 = ((phi.x + 1.0).ceil() as usize).min(frame.width);
    let y1 = ((phi.y + 1.0).ceil() as usize).min(frame.height);
    for j in y0..y1 {
        for i in x0..x1 {
            if point_in_ring(frame.pixel_center(i, j), poly.vertices()) {
                bmp.set(i, j, true);
            }
        }
    }
    Ok(bmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_meter_square_on_four_grid() {
        let sq = FootprintPolygon::rectangle(0.0, 0.0, 2.0, 2.0).unwrap();
        let b = rasterize_polygon(&sq, 1.0, 4).unwrap();
        assert_eq!(b.count_ones(), 4);
        for (x, y) in b.ones() {
            assert!((1..=2).contains(&x) && (1..=2).contains(&y));
        }
        assert_eq!(b, rasterize_polygon(&sq, 1.0, 4).unwrap());
    }

    #[test]
    fn oversize_polygon_reports_required_size() {
        let r = FootprintPolygon::rectangle(0.0, 0.0, 10.0, 3.0).unwrap();
        match rasterize_polygon(&r, 1.0, 4) {
            Err(GeomError::ExceedsGrid { required_px, .. }) => assert_eq!(required_px, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polygon_outside_frame_is_rejected() {
        let r = FootprintPolygon::rectangle(100.0, 100.0, 1.0, 1.0).unwrap();
        let frame = RasterFrame::centered(Point2::new(0.0, 0.0), 1.0, 4, 4);
        assert!(rasterize_polygon_in_frame(&r, &frame).is_err());
    }

    #[test]
    fn label_grid_rejects_unknown_ids() {
        let frame = RasterFrame::centered(Point2::new(0.0, 0.0), 1.0, 2, 1);
        assert!(LabelGrid::new(frame, vec![1, 22]).is_err());
        assert!(LabelGrid::new(frame, vec![0, 21]).is_ok());
        let bad = RasterFrame { scale: 0.0, ..frame };
        assert!(LabelGrid::new(bad, vec![0, 0]).is_err());
    }

    #[test]
    fn from_rows_puts_first_row_on_top() {
        let b = BinaryBitmap::from_rows(&["10", "00"]);
        assert!(b.get(0, 1));
        assert!(!b.get(0, 0));
    }
}
