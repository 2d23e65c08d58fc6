use super::*;
use crate::assemble::{extrude_floor, stack_floors, ExtrudeConfig};
use crate::exterior::{build_hull, Part, RoofSpec};
use crate::geom::{Point2, DEFAULT_GRID_SIZE, DEFAULT_MARGIN_PX};
use crate::vectorize::{VectorOpening, VectorRoom};
use proptest::prelude::*;
use serde_json::Value;

fn box_plan(x0: f64, w: f64, with_window: bool) -> VectorFloorPlan {
    VectorFloorPlan {
        nodes: vec![Point2::new(x0, 0.0), Point2::new(x0 + w, 0.0), Point2::new(x0 + w, w), Point2::new(x0, w)],
        edges: [(0, 1), (1, 2), (2, 3), (0, 3)].into_iter().collect(),
        rooms: vec![VectorRoom { nodes: vec![0, 1, 2, 3], label: Label::LivingRoom }],
        doors: vec![VectorOpening { a: 0, b: 1, label: Label::FrontDoor }],
        windows: if with_window { vec![VectorOpening { a: 1, b: 2, label: Label::Window }] } else { vec![] },
    }
}

fn box_record(x0: f64, w: f64, stories: usize, ids: &[&str], with_window: bool) -> BuildingRecord {
    let hull = build_hull(&[Part::rectangle(x0, 0.0, w, w, stories, RoofSpec::flat())], &[], 3.0).unwrap();
    let plan = box_plan(x0, w, with_window);
    let units = (0..stories)
        .map(|i| extrude_floor(&plan, hull.level(i), hull.level(i + 1), &ExtrudeConfig::default(), ids[i]).unwrap())
        .collect();
    let b = stack_floors(&hull, units).unwrap();
    let floors: Vec<FloorMeta> = hull
        .floor_footprints
        .iter()
        .map(|fp| FloorMeta { footprint: fp.quantized(), grid_size: DEFAULT_GRID_SIZE, margin_px: DEFAULT_MARGIN_PX })
        .collect();
    let cloud = vec![Point3::new(x0 + 0.123_456_789, 1.0, 3.0), Point3::new(x0 + 1.0, 2.5, 3.0)];
    BuildingRecord::from_assembled(&b, &floors, &cloud)
}

fn upper_edges(adj: &Adjacency) -> usize {
    let mut n = 0;
    for i in 0..adj.len() {
        for j in i + 1..adj.len() {
            n += adj[i][j] as usize;
        }
    }
    n
}

#[test]
fn single_box_record() {
    let r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    r.validate().unwrap();
    assert_eq!(r.final_building_points.len(), 8);
    assert_eq!(upper_edges(&r.final_building_adj), 12);
    assert_eq!(r.floorplan_id_list, vec!["fp_a"]);
    assert_eq!(r.final_room_type_dict["1"].len(), 1);
    let obj = export_obj(&r, &[ObjStream::Building]);
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
    assert_eq!(obj.lines().filter(|l| l.starts_with("l ")).count(), 12);
}

#[test]
fn field_names_are_exact() {
    let r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    let v: Value = serde_json::from_slice(&r.to_json_bytes().unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = FIELDS.to_vec();
    want.sort_unstable();
    assert_eq!(keys, want);
}

#[test]
fn emission_is_deterministic_and_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let r = box_record(0.0, 4.0, 2, &["fp_a", "fp_b"], true);
    let p1 = emit_record(&r, dir.path(), 7).unwrap();
    let bytes = fs::read(&p1).unwrap();
    let p2 = emit_record(&r, dir.path(), 7).unwrap();
    assert_eq!(p1, p2);
    assert_eq!(bytes, fs::read(&p2).unwrap());
    assert_eq!(p1.parent().unwrap().file_name().unwrap(), "building_007");
    let name = p1.file_name().unwrap().to_str().unwrap();
    assert_eq!(name, format!("final_building_{}.json", r.content_hash().unwrap()));
    assert_eq!(name.len(), "final_building_.json".len() + 12);
    assert_eq!(load_record(&p1).unwrap(), r);
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.contains("0.123457") && !text.contains("0.1234567"));
}

#[test]
fn two_stackings_share_a_building_directory() {
    let dir = tempfile::tempdir().unwrap();
    let a = box_record(0.0, 4.0, 2, &["fp_a", "fp_b"], true);
    let b = box_record(0.0, 4.0, 2, &["fp_b", "fp_a"], true);
    let pa = emit_record(&a, dir.path(), 1).unwrap();
    let pb = emit_record(&b, dir.path(), 1).unwrap();
    assert_ne!(pa, pb);
    assert_eq!(pa.parent(), pb.parent());
    assert_eq!(record_paths(dir.path()).unwrap().len(), 2);
}

#[test]
fn asymmetric_adjacency_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    r.final_window_adj[0][2] = 1;
    r.final_window_adj[2][0] = 0;
    match emit_record(&r, dir.path(), 1) {
        Err(RecordError::Adjacency { field, .. }) => assert_eq!(field, "final_window_adj"),
        other => panic!("{other:?}"),
    }
    assert!(record_paths(dir.path()).unwrap().is_empty());
}

fn mutate(r: &BuildingRecord, f: impl FnOnce(&mut serde_json::Map<String, Value>)) -> Vec<u8> {
    let mut v: Value = serde_json::from_slice(&r.to_json_bytes().unwrap()).unwrap();
    f(v.as_object_mut().unwrap());
    serde_json::to_vec(&v).unwrap()
}

#[test]
fn load_errors_name_the_field() {
    let r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    let missing = mutate(&r, |m| {
        m.remove("final_roof_adj");
    });
    assert!(matches!(parse_record(&missing), Err(RecordError::MissingField(f)) if f == "final_roof_adj"));

    let short = mutate(&r, |m| {
        for row in m["final_building_adj"].as_array_mut().unwrap() {
            row.as_array_mut().unwrap().pop();
        }
    });
    assert!(matches!(parse_record(&short), Err(RecordError::Dimension { field, .. }) if field == "final_building_adj"));

    let bad_room = mutate(&r, |m| {
        let d = m["final_room_type_dict"].as_object_mut().unwrap();
        let v = d.remove("1").unwrap();
        d.insert("14".into(), v);
    });
    assert!(matches!(parse_record(&bad_room), Err(RecordError::RoomId { id, .. }) if id == "14"));

    let bad_index = mutate(&r, |m| {
        m["final_room_type_dict"]["1"][0][0] = Value::from(99);
    });
    assert!(matches!(parse_record(&bad_index), Err(RecordError::RoomIndex { index: 99, len: 8, .. })));

    let bad_unit = mutate(&r, |m| {
        m["unit_dict_list"][0].as_object_mut().unwrap().remove("z_top");
    });
    assert!(matches!(parse_record(&bad_unit), Err(RecordError::MissingField(f)) if f == "unit_dict_list[0].z_top"));

    let ids = mutate(&r, |m| {
        m["floorplan_ID_list"].as_array_mut().unwrap().push(Value::from("x"));
    });
    assert!(matches!(parse_record(&ids), Err(RecordError::Dimension { field, .. }) if field == "floorplan_ID_list"));
}

#[test]
fn obj_groups() {
    let r = box_record(0.0, 4.0, 1, &["fp_a"], false);
    assert!(r.final_window_points.is_empty());
    let obj = export_obj(&r, &ObjStream::ALL);
    assert!(!obj.contains("g window"));
    assert!(obj.contains("g building") && obj.contains("g door") && obj.contains("g roof"));
    let total = r.final_building_points.len() + r.final_door_points.len() + r.final_roof_points.len();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), total);
    let max_ref = obj
        .lines()
        .filter_map(|l| l.strip_prefix("l "))
        .flat_map(|l| l.split(' ').map(|t| t.parse::<usize>().unwrap()).collect::<Vec<_>>())
        .max()
        .unwrap();
    assert_eq!(max_ref, total);
}

#[test]
fn unit_floor_plan_is_recovered() {
    let r = box_record(2.0, 5.0, 2, &["fp_a", "fp_b"], true);
    for u in &r.unit_dict_list {
        let p = u.floor_plan().unwrap();
        p.validate().unwrap();
        assert_eq!(p.nodes.len(), 4);
        assert_eq!(p.edges.len(), 4);
        assert_eq!(p.rooms.len(), 1);
        assert_eq!(p.doors.len(), 1);
        assert_eq!(p.doors[0].label, Label::FrontDoor);
        assert_eq!(p.windows.len(), 1);
        let a = p.nodes[p.doors[0].a];
        assert!(a.y.abs() < 1e-9);
    }
}

#[test]
fn plan_images_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    assert_eq!(missing_plan_images(&r, dir.path()), vec!["fp_a".to_string()]);
    let u = &r.unit_dict_list[0];
    let grid = LabelGrid::filled(u.plan_frame().unwrap(), 1);
    write_plan_images(&grid, "fp_a", dir.path()).unwrap();
    assert!(missing_plan_images(&r, dir.path()).is_empty());
    let (vis, _) = plan_image_paths(dir.path(), "fp_a");
    assert_eq!(image::open(vis).unwrap().to_rgb8().get_pixel(0, 0).0, label_color(1));
}

#[test]
fn stored_building_quality() {
    let dir = tempfile::tempdir().unwrap();
    let r = box_record(0.0, 4.0, 1, &["fp_a"], true);
    let u = &r.unit_dict_list[0];
    write_plan_images(&LabelGrid::filled(u.plan_frame().unwrap(), 1), "fp_a", dir.path()).unwrap();
    let q = check_record(&r, dir.path()).unwrap();
    // one room is below the room minimum; everything else holds
    assert!(!q.check_passed(Check::MinRoomCount));
    for c in [Check::SemanticCoverage, Check::RoomEnclosure, Check::DoorRoomConsistency, Check::UniqueNodes] {
        assert!(q.check_passed(c), "{c:?}: {:?}", q.diagnostics);
    }
    write_plan_images(&LabelGrid::filled(u.plan_frame().unwrap(), 0), "fp_a", dir.path()).unwrap();
    assert!(!check_record(&r, dir.path()).unwrap().check_passed(Check::SemanticCoverage));
}

proptest! {
    #[test]
    fn roundtrip_identity(x0 in -50.0f64..50.0, w in 3.0f64..15.0, stories in 1usize..4) {
        let ids = ["p0", "p1", "p2"];
        let r = box_record(x0, w, stories, &ids[..stories], true);
        let back = parse_record(&r.to_json_bytes().unwrap()).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.to_json_bytes().unwrap(), r.to_json_bytes().unwrap());
    }
}
