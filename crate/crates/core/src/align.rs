//! Alignment of a floor-plan bitmap onto its floor's footprint bitmap by
//! translation and per-axis scaling.
//!
//! The loss charges 20 per footprint pixel the plan fails to cover and 1 per
//! plan pixel outside the footprint. Nearest-neighbour resampling maps
//! columns and rows independently, so a transformed plan row is a column
//! permutation of one source row; the optimizer exploits this to score a
//! candidate with a few popcounts per row.

use crate::geom::BinaryBitmap;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Weight of an uncovered footprint pixel relative to an overhanging one.
pub const COVERAGE_WEIGHT: u64 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("scale ({s_x}, {s_y}) outside [{min}, {max}]")]
    Scale { s_x: f64, s_y: f64, min: f64, max: f64 },
    #[error("cannot align an empty bitmap")]
    Empty,
    #[error("best loss {loss} exceeds the rejection threshold {threshold}")]
    Rejected { loss: u64, threshold: u64 },
    #[error("invalid search config: {0}")]
    Config(String),
}

/// Translation in pixels and unitless per-axis scale. Scaling is about the
/// centroid of the plan's set pixels and precedes the translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTransform {
    pub t_x: f64,
    pub t_y: f64,
    pub s_x: f64,
    pub s_y: f64,
}

impl AlignmentTransform {
    pub const IDENTITY: Self = Self { t_x: 0.0, t_y: 0.0, s_x: 1.0, s_y: 1.0 };

    pub fn new(t_x: f64, t_y: f64, s_x: f64, s_y: f64, bounds: (f64, f64)) -> Result<Self, AlignError> {
        let ok = |s: f64| s.is_finite() && s > 0.0 && s >= bounds.0 && s <= bounds.1;
        if !ok(s_x) || !ok(s_y) {
            return Err(AlignError::Scale { s_x, s_y, min: bounds.0, max: bounds.1 });
        }
        Ok(Self { t_x, t_y, s_x, s_y })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignSearchConfig {
    /// Translations are searched in `[-max_shift_px, max_shift_px]`.
    pub max_shift_px: i64,
    pub coarse_stride_px: i64,
    pub scale_min: f64,
    pub scale_max: f64,
    /// Coarse scale grid: `coarse_scale_start + k * coarse_scale_step` up to `scale_max`.
    pub coarse_scale_start: f64,
    pub coarse_scale_step: f64,
    /// Half-width of the scale refinement around the coarse optimum.
    pub refine_scale: f64,
    /// Alignments whose loss exceeds this share of `20 × footprint pixels` fail.
    pub reject_fraction: f64,
}

impl Default for AlignSearchConfig {
    fn default() -> Self {
        Self {
            max_shift_px: 16,
            coarse_stride_px: 4,
            scale_min: 0.8,
            scale_max: 1.25,
            coarse_scale_start: 0.85,
            coarse_scale_step: 0.05,
            refine_scale: 0.02,
            reject_fraction: 0.15,
        }
    }
}

impl AlignSearchConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        let bad = |m: &str| Err(AlignError::Config(m.to_string()));
        if self.max_shift_px < 0 || self.coarse_stride_px < 1 {
            return bad("shift window and stride must be non-negative and positive");
        }
        if !(self.scale_min > 0.0 && self.scale_min <= 1.0 && self.scale_max >= 1.0) {
            return bad("scale bounds must bracket 1");
        }
        if !(self.coarse_scale_step > 0.0) || !(self.refine_scale >= 0.0) || !(self.reject_fraction >= 0.0) {
            return bad("scale steps and reject fraction must be non-negative");
        }
        Ok(())
    }

    pub fn reject_threshold(&self, footprint: &BinaryBitmap) -> u64 {
        (self.reject_fraction * footprint.count_ones() as f64 * COVERAGE_WEIGHT as f64).floor() as u64
    }
}

/// Centroid of the set pixels' centers; the bitmap center when empty. This
/// is the pivot of the transform's scaling.
pub fn bitmap_centroid(bmp: &BinaryBitmap) -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in bmp.ones() {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
        n += 1;
    }
    if n == 0 {
        (bmp.width() as f64 / 2.0, bmp.height() as f64 / 2.0)
    } else {
        (sx / n as f64, sy / n as f64)
    }
}

/// Centroid and per-axis standard deviation of the set pixels.
fn moments(bmp: &BinaryBitmap) -> ((f64, f64), (f64, f64)) {
    let c = bitmap_centroid(bmp);
    let (mut vx, mut vy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in bmp.ones() {
        vx += (x as f64 + 0.5 - c.0).powi(2);
        vy += (y as f64 + 0.5 - c.1).powi(2);
        n += 1;
    }
    let n = n.max(1) as f64;
    (c, ((vx / n).sqrt(), (vy / n).sqrt()))
}

/// Source index sampled by output index `i`: inverse of `c + s·(x − c) + t`.
fn source(i: usize, c: f64, t: f64, s: f64, len: usize) -> Option<usize> {
    let x = c + (i as f64 + 0.5 - c - t) / s;
    let k = x.floor();
    (k >= 0.0 && k < len as f64).then_some(k as usize)
}

/// Nearest-neighbour resampling of `bmp` onto a `width × height` grid.
pub fn transform_bitmap(bmp: &BinaryBitmap, t: &AlignmentTransform, width: usize, height: usize) -> BinaryBitmap {
    let (cx, cy) = bitmap_centroid(bmp);
    let cols: Vec<Option<usize>> = (0..width).map(|i| source(i, cx, t.t_x, t.s_x, bmp.width())).collect();
    let mut out = BinaryBitmap::new(width, height);
    for j in 0..height {
        let Some(r) = source(j, cy, t.t_y, t.s_y, bmp.height()) else { continue };
        for (i, c) in cols.iter().enumerate() {
            if let Some(c) = *c {
                if bmp.get(c, r) {
                    out.set(i, j, true);
                }
            }
        }
    }
    out
}

/// `20 × coverage + overhang` with the plan transformed onto the footprint's grid.
pub fn alignment_loss(footprint: &BinaryBitmap, plan: &BinaryBitmap, t: &AlignmentTransform) -> u64 {
    let moved = transform_bitmap(plan, t, footprint.width(), footprint.height());
    footprint.bits().iter().zip(moved.bits()).fold(0, |acc, (&f, &p)| match (f, p) {
        (1, 0) => acc + COVERAGE_WEIGHT,
        (0, 1) => acc + 1,
        _ => acc,
    })
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

/// Column-resampled plan rows with their popcounts.
struct Columns {
    rows: Vec<Vec<u64>>,
    ones: Vec<u64>,
}

/// Incremental loss evaluation over a fixed footprint and plan.
struct Scorer<'a> {
    plan: &'a BinaryBitmap,
    foot: Vec<Vec<u64>>,
    /// Rows holding footprint pixels.
    foot_rows: Vec<usize>,
    foot_ones: u64,
    width: usize,
    height: usize,
    c: (f64, f64),
    /// Keyed by the bit patterns of `(t_x, s_x)`.
    columns: HashMap<(u64, u64), Columns>,
    /// Source row of every output row, keyed by the bit patterns of `(t_y, s_y)`.
    rows: HashMap<(u64, u64), Vec<Option<usize>>>,
}

impl<'a> Scorer<'a> {
    fn new(footprint: &BinaryBitmap, plan: &'a BinaryBitmap) -> Self {
        let (w, h) = (footprint.width(), footprint.height());
        let mut foot = vec![vec![0u64; words(w)]; h];
        for (x, y) in footprint.ones() {
            foot[y][x / 64] |= 1 << (x % 64);
        }
        let foot_rows = (0..h).filter(|&j| foot[j].iter().any(|&v| v != 0)).collect();
        Self {
            plan,
            foot,
            foot_rows,
            foot_ones: footprint.count_ones() as u64,
            width: w,
            height: h,
            c: bitmap_centroid(plan),
            columns: HashMap::new(),
            rows: HashMap::new(),
        }
    }

    fn loss(&mut self, t: &AlignmentTransform) -> u64 {
        let (plan, width, height, c) = (self.plan, self.width, self.height, self.c);
        let cols = self.columns.entry((t.t_x.to_bits(), t.s_x.to_bits())).or_insert_with(|| {
            let map: Vec<(usize, usize)> =
                (0..width).filter_map(|i| source(i, c.0, t.t_x, t.s_x, plan.width()).map(|k| (i, k))).collect();
            let rows: Vec<Vec<u64>> = (0..plan.height())
                .map(|r| {
                    let mut row = vec![0u64; words(width)];
                    for &(i, k) in &map {
                        if plan.get(k, r) {
                            row[i / 64] |= 1 << (i % 64);
                        }
                    }
                    row
                })
                .collect();
            let ones = rows.iter().map(|r| r.iter().map(|v| v.count_ones() as u64).sum()).collect();
            Columns { rows, ones }
        });
        let rows = self
            .rows
            .entry((t.t_y.to_bits(), t.s_y.to_bits()))
            .or_insert_with(|| (0..height).map(|j| source(j, c.1, t.t_y, t.s_y, plan.height())).collect());
        let moved: u64 = rows.iter().flatten().map(|&r| cols.ones[r]).sum();
        let mut both = 0u64;
        for &j in &self.foot_rows {
            if let Some(r) = rows[j] {
                if cols.ones[r] > 0 {
                    both += cols.rows[r].iter().zip(&self.foot[j]).map(|(a, b)| (a & b).count_ones() as u64).sum::<u64>();
                }
            }
        }
        // 20·(F − F∧T) + (T − F∧T)
        COVERAGE_WEIGHT * (self.foot_ones - both) + (moved - both)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    loss: u64,
    t: AlignmentTransform,
}

impl Candidate {
    fn key(&self) -> (u64, f64, f64, f64, f64) {
        (self.loss, self.t.t_x, self.t.t_y, self.t.s_x, self.t.s_y)
    }

    /// Lower loss wins, then the lexicographically smaller parameters.
    fn better(&self, o: &Candidate) -> bool {
        let (a, b) = (self.key(), o.key());
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .then(a.4.total_cmp(&b.4))
            .is_lt()
    }
}

/// Coarse cells refined further.
const REFINE_SEEDS: usize = 4;
const REFINE_SCALE_STEP: f64 = 0.005;
const PLATEAU_STEP: f64 = 0.001;
const POLISH_SCALE: f64 = 0.006;
const POLISH_STEP: f64 = 0.0005;
const DESCENT_STEPS: [f64; 6] = [0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001];

fn round_scale(s: f64) -> f64 {
    (s * 1e6).round() / 1e6
}

/// Moves each scale to the middle of the interval over which the loss stays
/// at its optimum, so ties resolve to the center of the optimal set rather
/// than its edge.
fn center_scales(sc: &mut Scorer, best: Candidate, cfg: &AlignSearchConfig) -> Candidate {
    let mut cur = best;
    for axis in 0..2 {
        let at = |t: AlignmentTransform, s: f64| {
            let s = round_scale(s);
            if axis == 0 { AlignmentTransform { s_x: s, ..t } } else { AlignmentTransform { s_y: s, ..t } }
        };
        let s0 = if axis == 0 { cur.t.s_x } else { cur.t.s_y };
        let mut ends = [s0, s0];
        for (k, dir) in [-1.0, 1.0].into_iter().enumerate() {
            loop {
                let s = ends[k] + dir * PLATEAU_STEP;
                if s < cfg.scale_min - 1e-12 || s > cfg.scale_max + 1e-12 || sc.loss(&at(cur.t, s)) != cur.loss {
                    break;
                }
                ends[k] = s;
            }
        }
        let t = at(cur.t, 0.5 * (ends[0] + ends[1]));
        let loss = sc.loss(&t);
        if loss == cur.loss {
            cur = Candidate { loss, t };
        }
    }
    cur
}

/// Minimizes the alignment loss over integer translations and per-axis
/// scales: a coarse grid, a local refinement of its best cells and a
/// coordinate descent from each refined cell.
///
/// The identity transform is always among the candidates, so the result is
/// never worse than leaving the plan in place.
pub fn optimize_alignment(footprint: &BinaryBitmap, plan: &BinaryBitmap, cfg: &AlignSearchConfig) -> Result<(AlignmentTransform, u64), AlignError> {
    cfg.validate()?;
    if footprint.is_empty() || plan.is_empty() {
        return Err(AlignError::Empty);
    }
    let mut sc = Scorer::new(footprint, plan);
    let in_bounds = |s: f64| s >= cfg.scale_min - 1e-12 && s <= cfg.scale_max + 1e-12;
    let eval = |sc: &mut Scorer, t_x: f64, t_y: f64, s_x: f64, s_y: f64| {
        let t = AlignmentTransform { t_x, t_y, s_x: round_scale(s_x), s_y: round_scale(s_y) };
        Candidate { loss: sc.loss(&t), t }
    };
    let mut best = eval(&mut sc, 0.0, 0.0, 1.0, 1.0);
    let consider = |c: Candidate, best: &mut Candidate| {
        if c.better(best) {
            *best = c;
        }
    };

    let m = cfg.max_shift_px;
    let shifts: Vec<f64> = (-m..=m).filter(|v| v % cfg.coarse_stride_px == 0).map(|v| v as f64).collect();
    let mut scales = Vec::new();
    let mut s = cfg.coarse_scale_start;
    while s <= cfg.scale_max + 1e-9 {
        if in_bounds(s) {
            scales.push(round_scale(s));
        }
        s += cfg.coarse_scale_step;
    }
    let mut coarse = Vec::with_capacity(shifts.len().pow(2) * scales.len().pow(2));
    for &s_x in &scales {
        for &t_x in &shifts {
            for &s_y in &scales {
                for &t_y in &shifts {
                    coarse.push(eval(&mut sc, t_x, t_y, s_x, s_y));
                }
            }
        }
    }
    coarse.sort_by(|a, b| if a.better(b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    for c in &coarse {
        consider(*c, &mut best);
    }

    // Local refinement of the leading coarse cells on a 1 px lattice.
    let reach = cfg.coarse_stride_px / 2;
    let steps = (cfg.refine_scale / REFINE_SCALE_STEP).round() as i64;
    let fine: Vec<f64> = (-steps..=steps).map(|k| k as f64 * REFINE_SCALE_STEP).collect();
    // Matching centroids and per-axis spreads gives one more starting cell.
    let ((fx, fy), (fsx, fsy)) = moments(footprint);
    let ((px, py), (psx, psy)) = moments(plan);
    let clamp_s = |s: f64| if s.is_finite() { s.clamp(cfg.scale_min, cfg.scale_max) } else { 1.0 };
    let clamp_t = |t: f64| t.round().clamp(-m as f64, m as f64);
    let matched = eval(&mut sc, clamp_t(fx - px), clamp_t(fy - py), clamp_s(fsx / psx), clamp_s(fsy / psy));
    let mut starts: Vec<Candidate> = coarse.iter().take(REFINE_SEEDS).copied().collect();
    starts.push(matched);

    let mut seeds: Vec<Candidate> = Vec::new();
    for c in &starts {
        let c0 = c.t;
        let mut local = *c;
        for ds_x in &fine {
            for ds_y in &fine {
                let (s_x, s_y) = (c0.s_x + ds_x, c0.s_y + ds_y);
                if !in_bounds(s_x) || !in_bounds(s_y) {
                    continue;
                }
                for dx in -reach..=reach {
                    for dy in -reach..=reach {
                        let (t_x, t_y) = (c0.t_x + dx as f64, c0.t_y + dy as f64);
                        if t_x.abs() > m as f64 || t_y.abs() > m as f64 {
                            continue;
                        }
                        let c = eval(&mut sc, t_x, t_y, s_x, s_y);
                        consider(c, &mut local);
                    }
                }
            }
        }
        seeds.push(local);
    }

    // Descent from each refined seed over joint moves of all four parameters.
    for seed in seeds {
        let mut cur = seed;
        for step in DESCENT_STEPS {
            loop {
                let t = cur.t;
                let before = cur.loss;
                for dx in [-1.0, 0.0, 1.0] {
                    for dy in [-1.0, 0.0, 1.0] {
                        for sx in [-step, 0.0, step] {
                            for sy in [-step, 0.0, step] {
                                let (t_x, t_y, s_x, s_y) = (t.t_x + dx, t.t_y + dy, t.s_x + sx, t.s_y + sy);
                                if t_x.abs() > m as f64 || t_y.abs() > m as f64 || !in_bounds(s_x) || !in_bounds(s_y) {
                                    continue;
                                }
                                let c = eval(&mut sc, t_x, t_y, s_x, s_y);
                                if c.loss < cur.loss {
                                    cur = c;
                                }
                            }
                        }
                    }
                }
                if cur.loss == before {
                    break;
                }
            }
        }
        consider(cur, &mut best);
    }

    // Exhaustive scan of the winner's neighbourhood.
    let t0 = best.t;
    let k = (POLISH_SCALE / POLISH_STEP).round() as i64;
    for i in -k..=k {
        for j in -k..=k {
            let (s_x, s_y) = (t0.s_x + i as f64 * POLISH_STEP, t0.s_y + j as f64 * POLISH_STEP);
            if !in_bounds(s_x) || !in_bounds(s_y) {
                continue;
            }
            for dx in [-1.0, 0.0, 1.0] {
                for dy in [-1.0, 0.0, 1.0] {
                    let (t_x, t_y) = (t0.t_x + dx, t0.t_y + dy);
                    if t_x.abs() <= m as f64 && t_y.abs() <= m as f64 {
                        consider(eval(&mut sc, t_x, t_y, s_x, s_y), &mut best);
                    }
                }
            }
        }
    }
    let best = center_scales(&mut sc, best, cfg);
    let threshold = cfg.reject_threshold(footprint);
    if best.loss > threshold {
        return Err(AlignError::Rejected { loss: best.loss, threshold });
    }
    Ok((best.t, best.loss))
}
