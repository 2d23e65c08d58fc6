use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use synbuild_cli::pipeline::REPORT_FILE;
use synbuild_cli::{run_generate, PipelineConfig, RunReport};

fn synbuild(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synbuild")).args(args).env_remove("SYNBUILD_OUT").output().unwrap()
}

fn small_config(out: &Path) -> PipelineConfig {
    PipelineConfig {
        exterior_count: 2,
        candidates_per_floor: 4,
        permutation_cap: 3,
        worker_count: 2,
        output_root: Some(out.to_path_buf()),
        ..PipelineConfig::default()
    }
}

/// Relative path to contents for every file under `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn generated() -> (tempfile::TempDir, RunReport) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let report = run_generate(&cfg, dir.path()).unwrap();
    (dir, report)
}

#[test]
fn zero_candidates_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = synbuild(&["generate", "--candidates-per-floor", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("candidates_per_floor"));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "exterior_count = 1\nworkerz = 2\n").unwrap();
    let out = synbuild(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_tree_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = synbuild(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records found"));
}

#[test]
fn retention_accounting_balances() {
    let (_dir, r) = generated();
    assert_eq!(r.exteriors_attempted, 2);
    assert!(r.exteriors_retained >= 1);
    assert_eq!(r.exteriors_attempted, r.exteriors_retained + r.exterior_rejections.values().sum::<usize>());
    assert_eq!(r.candidates_attempted, r.candidates_retained + r.candidate_rejections.values().sum::<usize>());
    assert_eq!(r.buildings_attempted, r.buildings_emitted + r.building_rejections.values().sum::<usize>());
    assert!(r.exterior_retention() > 0.0 && r.exterior_retention() <= 1.0);
    assert!(r.candidate_retention() > 0.0 && r.candidate_retention() <= 1.0);
    for e in &r.exteriors {
        assert_eq!(e.candidates_attempted, e.candidates_retained + e.candidate_rejections.values().sum::<usize>());
        assert_eq!(e.records.len(), e.buildings_emitted);
        assert!(e.buildings_emitted <= 3);
    }
}

#[test]
fn generate_validate_and_corrupt() {
    let (dir, r) = generated();
    let root = dir.path().to_str().unwrap();
    let ok = synbuild(&["validate", "--out", root]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().count(), r.buildings_emitted);

    let victim = dir.path().join(&r.exteriors.iter().find(|e| e.retained()).unwrap().records[0]);
    let text = fs::read_to_string(&victim).unwrap();
    fs::write(&victim, text.replacen("\"final_roof_adj\"", "\"final_roof_adjx\"", 1)).unwrap();
    let bad = synbuild(&["validate", "--out", root]);
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    let failing: Vec<&str> = stdout.lines().filter(|l| l.contains("\"ok\":false")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].contains("final_roof_adj"));
}

#[test]
fn missing_plan_image_fails_validation() {
    let (dir, r) = generated();
    let rec = synbuild_core::records::load_record(&dir.path().join(&r.exteriors.iter().find(|e| e.retained()).unwrap().records[0])).unwrap();
    let (_, seg) = synbuild_core::records::plan_image_paths(dir.path(), &rec.floorplan_id_list[0]);
    fs::remove_file(seg).unwrap();
    let out = synbuild(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("missing plan images"));
}

#[test]
fn same_config_gives_identical_trees() {
    let (a, _) = generated();
    let (b, _) = generated();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert!(ta.keys().any(|k| k.extension().is_some_and(|e| e == "png")));
    assert!(ta.contains_key(Path::new(REPORT_FILE)));
    assert_eq!(ta, tb);
}

#[test]
fn env_var_supplies_the_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_synbuild"))
        .args(["generate", "--exteriors", "1", "--candidates-per-floor", "3", "--permutation-cap", "1", "--workers", "1"])
        .env("SYNBUILD_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.code().is_some_and(|c| c <= 1));
    assert!(dir.path().join(REPORT_FILE).is_file());
}

#[test]
fn stats_and_obj_export() {
    let (dir, r) = generated();
    let root = dir.path().to_str().unwrap();
    let csv = dir.path().join("b.csv");
    let out = synbuild(&["stats", "--out", root, "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["buildings"].as_u64().unwrap() as usize, r.buildings_emitted);
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), r.buildings_emitted + 1);

    let dest = dir.path().join("obj");
    let out = synbuild(&["export-obj", "--out", root, "--dest", dest.to_str().unwrap(), "--streams", "building,roof"]);
    assert!(out.status.success());
    let objs: Vec<_> = tree(&dest).into_iter().collect();
    assert_eq!(objs.len(), r.buildings_emitted);
    let text = String::from_utf8(objs[0].1.clone()).unwrap();
    assert!(text.contains("g building") && text.contains("g roof") && !text.contains("g door"));

    let out = synbuild(&["export-obj", "--out", root, "--streams", "chimney"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn review_sampling() {
    let (dir, r) = generated();
    let root = dir.path().to_str().unwrap();
    let sample = |n: &str, seed: &str, name: &str| {
        let dest = dir.path().join(name);
        let out = synbuild(&["sample-for-review", "--out", root, "-n", n, "--sample-seed", seed, "--dest", dest.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&fs::read(dest.join("review.json")).unwrap()).unwrap();
        (v["records"].as_array().unwrap().clone(), dest)
    };
    let (empty, _) = sample("0", "1", "r0");
    assert!(empty.is_empty());
    let n = r.buildings_emitted - 1;
    let (a, dest) = sample(&n.to_string(), "5", "ra");
    let (b, _) = sample(&n.to_string(), "5", "rb");
    assert_eq!(a.len(), n);
    assert_eq!(a, b);
    let mut distinct = a.clone();
    distinct.dedup();
    assert_eq!(distinct.len(), n);
    let files = tree(&dest);
    assert_eq!(files.keys().filter(|k| k.extension().is_some_and(|e| e == "obj")).count(), n);
    assert!(files.keys().any(|k| k.to_string_lossy().contains("_plan_")));
    let (all, _) = sample("1000", "5", "rall");
    assert_eq!(all.len(), r.buildings_emitted);
}
