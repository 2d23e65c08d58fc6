//! Batch generation: exterior hull, per-floor candidate plans, filtering,
//! alignment, stacking and record emission.

use crate::config::PipelineConfig;
use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use synbuild_core::align::{bitmap_centroid, optimize_alignment};
use synbuild_core::assemble::{
    enumerate_stackings, extrude_floor, floor_classes, floors_contiguous, place_plan, stack_floors, Placement,
};
use synbuild_core::exterior::{decompose_floors, generate_exterior, BuildingHull};
use synbuild_core::floorplan::{generate_floorplan, place_front_door};
use synbuild_core::geom::{rasterize_polygon_in_frame, FootprintPolygon, LabelGrid, Point2};
use synbuild_core::quality::{check_building, check_plan, QualityReport};
use synbuild_core::records::{emit_record, write_plan_images, BuildingRecord, FloorMeta, FINAL_BUILDING_DIR};
use synbuild_core::rng::{derive_indexed, derive_seed};
use synbuild_core::roofcloud::sample_roof;
use synbuild_core::vectorize::{extract_semantics, structure_mask, vectorize_structure, VectorFloorPlan};

pub const REPORT_FILE: &str = "run_report.json";

/// Per-exterior outcome.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExteriorReport {
    pub index: usize,
    pub seed: u64,
    pub stories: usize,
    pub floor_classes: Vec<usize>,
    pub candidates_attempted: usize,
    pub candidates_retained: usize,
    pub candidate_rejections: BTreeMap<String, usize>,
    pub stackings: usize,
    pub buildings_emitted: usize,
    pub building_rejections: BTreeMap<String, usize>,
    /// Why the exterior produced no building.
    pub rejection: Option<String>,
    /// Emitted record paths relative to the output root.
    pub records: Vec<String>,
}

impl ExteriorReport {
    pub fn retained(&self) -> bool {
        self.buildings_emitted > 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub global_seed: u64,
    pub exteriors_attempted: usize,
    pub exteriors_retained: usize,
    pub exterior_rejections: BTreeMap<String, usize>,
    pub candidates_attempted: usize,
    pub candidates_retained: usize,
    pub candidate_rejections: BTreeMap<String, usize>,
    pub buildings_attempted: usize,
    pub buildings_emitted: usize,
    pub building_rejections: BTreeMap<String, usize>,
    pub exteriors: Vec<ExteriorReport>,
}

fn add_counts(into: &mut BTreeMap<String, usize>, from: &BTreeMap<String, usize>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_default() += v;
    }
}

impl RunReport {
    pub fn new(global_seed: u64) -> Self {
        Self { global_seed, ..Self::default() }
    }

    pub fn add(&mut self, e: ExteriorReport) {
        self.exteriors_attempted += 1;
        if e.retained() {
            self.exteriors_retained += 1;
        } else if let Some(r) = &e.rejection {
            *self.exterior_rejections.entry(r.clone()).or_default() += 1;
        }
        self.candidates_attempted += e.candidates_attempted;
        self.candidates_retained += e.candidates_retained;
        add_counts(&mut self.candidate_rejections, &e.candidate_rejections);
        self.buildings_attempted += e.stackings;
        self.buildings_emitted += e.buildings_emitted;
        add_counts(&mut self.building_rejections, &e.building_rejections);
        self.exteriors.push(e);
    }

    pub fn exterior_retention(&self) -> f64 {
        ratio(self.exteriors_retained, self.exteriors_attempted)
    }

    pub fn candidate_retention(&self) -> f64 {
        ratio(self.candidates_retained, self.candidates_attempted)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn exterior_seed(global_seed: u64, index: usize) -> u64 {
    derive_indexed(global_seed, "exterior", index as u64)
}

pub fn candidate_seed(exterior_seed: u64, floor: usize, candidate: usize) -> u64 {
    derive_indexed(derive_indexed(exterior_seed, "floor", floor as u64), "candidate", candidate as u64)
}

/// A plan that passed every filter, placed on its class's footprint.
struct RetainedPlan {
    grid: LabelGrid,
    placed: VectorFloorPlan,
    report: QualityReport,
}

/// Runs one candidate through vectorization, the quality filter and
/// alignment. The error names the stage that rejected it.
fn process_candidate(
    footprint: &FootprintPolygon,
    door: &synbuild_core::floorplan::FrontDoorPlacement,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<(String, RetainedPlan), &'static str> {
    let cand = generate_floorplan(footprint, door, seed, &cfg.floorplan).map_err(|_| "floorplan")?;
    let mut vcfg = cfg.vectorize.clone();
    vcfg.seed = seed;
    let graph = vectorize_structure(&structure_mask(&cand.grid), &vcfg).map_err(|_| "vectorize")?;
    let plan = extract_semantics(&cand.grid, &graph).map_err(|_| "semantics")?;
    let frame = *cand.grid.frame();
    let fp_bmp = rasterize_polygon_in_frame(footprint, &frame).map_err(|_| "quality")?;
    let report = check_plan(&plan, &cand.grid, &fp_bmp, &cand.id).map_err(|_| "quality")?;
    if !report.passed() {
        return Err("quality");
    }
    let plan_bmp = cand.grid.building_mask();
    let (transform, loss) = optimize_alignment(&fp_bmp, &plan_bmp, &cfg.align).map_err(|_| "align")?;
    if loss > cfg.align.reject_threshold(&fp_bmp) {
        return Err("align");
    }
    let placement = Placement { frame, pivot: bitmap_centroid(&plan_bmp), transform };
    let snap = cfg.extrude.snap_walls * cfg.floorplan.wall_px * frame.scale;
    let placed = place_plan(&plan, &placement, footprint, snap).map_err(|_| "placement")?;
    let report = check_plan(&placed, &cand.grid, &fp_bmp, &cand.id).map_err(|_| "placement")?;
    if !report.passed() {
        return Err("placement");
    }
    Ok((cand.id, RetainedPlan { grid: cand.grid, placed, report }))
}

fn translated(plan: &VectorFloorPlan, d: Point2) -> VectorFloorPlan {
    VectorFloorPlan { nodes: plan.nodes.iter().map(|&p| p + d).collect(), ..plan.clone() }
}

/// Generates every building of one exterior and writes its records and plan
/// images under `out_root`.
pub fn run_exterior(index: usize, cfg: &PipelineConfig, out_root: &Path) -> anyhow::Result<ExteriorReport> {
    let seed = exterior_seed(cfg.global_seed, index);
    let mut rep = ExteriorReport { index, seed, ..Default::default() };
    let hull = match generate_exterior(seed, &cfg.exterior) {
        Ok(h) => h,
        Err(e) => {
            log::debug!("exterior {index}: {e}");
            rep.rejection = Some("exterior".into());
            return Ok(rep);
        }
    };
    rep.stories = hull.stories();
    let footprints: Vec<FootprintPolygon> = decompose_floors(&hull).into_iter().map(|(fp, _, _)| fp.quantized()).collect();
    let classes = floor_classes(&footprints);
    rep.floor_classes = classes.clone();
    let class_count = classes.iter().max().map_or(0, |c| c + 1);

    // candidates are generated on the lowest floor of each class
    let mut plans: HashMap<String, (usize, RetainedPlan)> = HashMap::new();
    let mut ids_by_class: Vec<Vec<String>> = vec![Vec::new(); class_count];
    for (c, ids) in ids_by_class.iter_mut().enumerate() {
        let f0 = classes.iter().position(|&k| k == c).expect("class has a floor");
        let fp = &footprints[f0];
        let door = match place_front_door(fp, cfg.floorplan.front_door_width_m, derive_indexed(seed, "door", f0 as u64)) {
            Ok(d) => d,
            Err(e) => {
                log::debug!("exterior {index} floor {f0}: {e}");
                rep.candidates_attempted += cfg.candidates_per_floor;
                *rep.candidate_rejections.entry("door".into()).or_default() += cfg.candidates_per_floor;
                continue;
            }
        };
        for k in 0..cfg.candidates_per_floor {
            rep.candidates_attempted += 1;
            match process_candidate(fp, &door, candidate_seed(seed, f0, k), cfg) {
                Ok((id, plan)) => {
                    rep.candidates_retained += 1;
                    ids.push(id.clone());
                    plans.insert(id, (f0, plan));
                }
                Err(stage) => *rep.candidate_rejections.entry(stage.into()).or_default() += 1,
            }
        }
    }
    if ids_by_class.iter().any(Vec::is_empty) {
        rep.rejection = Some("no_plans".into());
        return Ok(rep);
    }

    let orders = match enumerate_stackings(&ids_by_class, &classes, Some(cfg.permutation_cap), derive_seed(seed, "stack")) {
        Ok(o) => o,
        Err(e) => {
            log::debug!("exterior {index}: {e}");
            rep.rejection = Some("stacking".into());
            return Ok(rep);
        }
    };
    rep.stackings = orders.len();
    let roof = match sample_roof(&hull.roof_loops(), cfg.roof_density, derive_seed(seed, "roof"), cfg.roof_noise_sigma) {
        Ok(r) => r,
        Err(e) => {
            log::debug!("exterior {index}: {e}");
            rep.rejection = Some("roof".into());
            return Ok(rep);
        }
    };
    let metas: Vec<FloorMeta> = footprints
        .iter()
        .map(|fp| FloorMeta { footprint: fp.clone(), grid_size: cfg.floorplan.grid_size, margin_px: cfg.floorplan.margin_px })
        .collect();

    let mut used: Vec<&str> = Vec::new();
    for order in &orders {
        match build_one(&hull, &footprints, &order.plan_ids, &plans, &metas, &roof.points, cfg) {
            Ok(record) => {
                let path = emit_record(&record, out_root, index + 1).context("writing record")?;
                let rel = path.strip_prefix(out_root).unwrap_or(&path);
                rep.records.push(rel.to_string_lossy().into_owned());
                rep.buildings_emitted += 1;
                used.extend(order.plan_ids.iter().map(String::as_str));
            }
            Err(stage) => *rep.building_rejections.entry(stage.into()).or_default() += 1,
        }
    }
    used.sort_unstable();
    used.dedup();
    for id in used {
        write_plan_images(&plans[id].1.grid, id, out_root).context("writing plan images")?;
    }
    if rep.buildings_emitted == 0 {
        rep.rejection = Some("no_buildings".into());
    }
    Ok(rep)
}

fn build_one(
    hull: &BuildingHull,
    footprints: &[FootprintPolygon],
    order: &[String],
    plans: &HashMap<String, (usize, RetainedPlan)>,
    metas: &[FloorMeta],
    roof_points: &[synbuild_core::geom::Point3],
    cfg: &PipelineConfig,
) -> Result<BuildingRecord, &'static str> {
    let mut units = Vec::with_capacity(order.len());
    let mut reports = Vec::with_capacity(order.len());
    for (f, id) in order.iter().enumerate() {
        let (f0, p) = &plans[id];
        let offset = footprints[f].bbox().0 - footprints[*f0].bbox().0;
        let plan = translated(&p.placed, offset);
        let unit = extrude_floor(&plan, hull.level(f), hull.level(f + 1), &cfg.extrude, id).map_err(|_| "extrude")?;
        units.push(unit);
        reports.push(p.report.clone());
    }
    let extents: Vec<(f64, f64)> = units.iter().map(|u| (u.z_base, u.z_top)).collect();
    if !floors_contiguous(&extents, hull.wall_top()) {
        return Err("contiguity");
    }
    let b = stack_floors(hull, units).map_err(|_| "stack")?;
    if !check_building(&b, reports).passed() {
        return Err("quality");
    }
    let record = BuildingRecord::from_assembled(&b, metas, roof_points);
    record.validate().map_err(|_| "record")?;
    Ok(record)
}

/// Runs every exterior on a pool of `worker_count` threads and writes the
/// run report. Results are merged in exterior order.
pub fn run_generate(cfg: &PipelineConfig, out_root: &Path) -> anyhow::Result<RunReport> {
    std::fs::create_dir_all(out_root.join(FINAL_BUILDING_DIR)).with_context(|| format!("creating {}", out_root.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.worker_count).build()?;
    let results: Vec<anyhow::Result<ExteriorReport>> =
        pool.install(|| (0..cfg.exterior_count).into_par_iter().map(|i| run_exterior(i, cfg, out_root)).collect());
    let mut report = RunReport::new(cfg.global_seed);
    for r in results {
        let e = r?;
        log::info!("exterior {}: {} candidates kept of {}, {} buildings", e.index, e.candidates_retained, e.candidates_attempted, e.buildings_emitted);
        report.add(e);
    }
    let bytes = serde_json::to_vec_pretty(&report)?;
    std::fs::write(report_path(out_root), bytes).context("writing run report")?;
    Ok(report)
}

pub fn report_path(out_root: &Path) -> PathBuf {
    out_root.join(REPORT_FILE)
}
