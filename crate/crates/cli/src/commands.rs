//! The non-generating subcommands: validation, statistics, OBJ export and
//! review sampling.

use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use synbuild_core::assemble::floors_contiguous;
use synbuild_core::quality::Check;
use synbuild_core::records::{
    check_record, export_obj, load_record, missing_plan_images, plan_image_paths, record_paths, BuildingRecord, ObjStream,
    FINAL_BUILDING_DIR,
};
use synbuild_core::stats::{dataset_summary, DatasetSummary};

/// Validation outcome of one record file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordVerdict {
    pub path: String,
    pub ok: bool,
    /// Per-check status; empty when the file could not be loaded.
    pub checks: BTreeMap<Check, bool>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidateSummary {
    pub records: usize,
    pub failed: usize,
    pub verdicts: Vec<RecordVerdict>,
}

impl ValidateSummary {
    pub fn passed(&self) -> bool {
        self.records > 0 && self.failed == 0
    }
}

fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).to_string_lossy().into_owned()
}

/// Schema, quality, contiguity and image checks on one record file.
pub fn validate_file(root: &Path, path: &Path) -> RecordVerdict {
    let mut v = RecordVerdict { path: rel(root, path), ok: false, checks: BTreeMap::new(), errors: Vec::new() };
    let record = match load_record(path) {
        Ok(r) => r,
        Err(e) => {
            v.errors.push(e.to_string());
            return v;
        }
    };
    let missing = missing_plan_images(&record, root);
    if !missing.is_empty() {
        v.errors.push(format!("missing plan images: {}", missing.join(", ")));
    }
    let extents: Vec<(f64, f64)> = record.unit_dict_list.iter().map(|u| (u.z_base, u.z_top)).collect();
    let top = extents.last().map_or(0.0, |e| e.1);
    if !floors_contiguous(&extents, top) {
        v.errors.push("floors are not contiguous from ground level".into());
    }
    if missing.is_empty() {
        match check_record(&record, root) {
            Ok(q) => {
                v.checks = q.status.clone();
                for c in Check::ALL {
                    if !q.check_passed(c) {
                        v.errors.push(format!("check {c:?} failed"));
                    }
                }
                v.errors.extend(q.diagnostics.iter().map(|d| format!("{:?} [{}]: {}", d.check, d.scope, d.message)));
            }
            Err(e) => v.errors.push(e.to_string()),
        }
    }
    v.ok = v.errors.is_empty();
    v
}

/// Validates every record under `root`, in path order.
pub fn run_validate(root: &Path) -> anyhow::Result<ValidateSummary> {
    let paths = record_paths(root)?;
    let verdicts: Vec<RecordVerdict> = paths.iter().map(|p| validate_file(root, p)).collect();
    let failed = verdicts.iter().filter(|v| !v.ok).count();
    Ok(ValidateSummary { records: verdicts.len(), failed, verdicts })
}

/// Every readable record with its exterior key (the building directory
/// name). Unreadable files are skipped with a warning.
pub fn load_all(root: &Path) -> anyhow::Result<Vec<(String, PathBuf, BuildingRecord)>> {
    let mut out = Vec::new();
    for p in record_paths(root)? {
        match load_record(&p) {
            Ok(r) => {
                let key = p.parent().and_then(|d| d.file_name()).map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                out.push((key, p, r));
            }
            Err(e) => log::warn!("skipping {}: {e}", p.display()),
        }
    }
    Ok(out)
}

pub fn run_stats(root: &Path, bucket_edges: &[u64]) -> anyhow::Result<DatasetSummary> {
    let all = load_all(root)?;
    Ok(dataset_summary(all.iter().map(|(k, _, r)| (k.as_str(), r)), bucket_edges))
}

/// Writes an OBJ next to each record (or under `dest`, mirroring the tree).
pub fn run_export_obj(root: &Path, dest: Option<&Path>, streams: &[ObjStream]) -> anyhow::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (_, p, r) in load_all(root)? {
        let target = match dest {
            Some(d) => d.join(p.strip_prefix(root.join(FINAL_BUILDING_DIR)).unwrap_or(&p)),
            None => p.clone(),
        }
        .with_extension("obj");
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&target, export_obj(&r, streams)).with_context(|| format!("writing {}", target.display()))?;
        written.push(target);
    }
    Ok(written)
}

/// Chosen record paths, relative to the output root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewBundle {
    pub seed: u64,
    pub requested: usize,
    pub records: Vec<String>,
}

/// Copies a seeded uniform sample of `n` records into `dest`: one folder
/// per record with its JSON, an OBJ of all streams, and both images of
/// every floor plan. Samples everything when fewer than `n` exist.
pub fn run_sample_for_review(root: &Path, dest: &Path, n: usize, seed: u64) -> anyhow::Result<ReviewBundle> {
    let paths = record_paths(root)?;
    let chosen: Vec<&PathBuf> = if n >= paths.len() {
        if n > paths.len() {
            log::warn!("only {} records available, sampling all of them", paths.len());
        }
        paths.iter().collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, paths.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| &paths[i]).collect()
    };
    fs::create_dir_all(dest).with_context(|| format!("creating {}", dest.display()))?;
    let mut bundle = ReviewBundle { seed, requested: n, records: Vec::new() };
    for (k, p) in chosen.into_iter().enumerate() {
        let r = load_record(p)?;
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let dir = dest.join(format!("{k:04}_{stem}"));
        fs::create_dir_all(&dir)?;
        fs::copy(p, dir.join(p.file_name().expect("record file name")))?;
        fs::write(dir.join(format!("{stem}.obj")), export_obj(&r, &ObjStream::ALL))?;
        for (f, id) in r.floorplan_id_list.iter().enumerate() {
            let (vis, seg) = plan_image_paths(root, id);
            for (src, tag) in [(vis, "plan"), (seg, "mask")] {
                if src.is_file() {
                    fs::copy(&src, dir.join(format!("floor{f}_{tag}_{id}.png")))?;
                } else {
                    log::warn!("{} is missing", src.display());
                }
            }
        }
        bundle.records.push(rel(root, p));
    }
    fs::write(dest.join("review.json"), serde_json::to_vec_pretty(&bundle)?)?;
    Ok(bundle)
}
