use super::*;
use crate::geom::{face_area, point_in_polygon};
use std::collections::HashMap;

fn flat_box(w: f64, d: f64, stories: usize) -> BuildingHull {
    build_hull(&[Part::rectangle(0.0, 0.0, w, d, stories, RoofSpec::flat())], &[], 3.0).unwrap()
}

fn spec(roof: RoofKind, stories: usize) -> ExteriorSpec {
    ExteriorSpec {
        base_width: 10.0,
        base_depth: 8.0,
        stories,
        floor_height: 3.0,
        roof,
        roof_rise: 2.0,
        roof_axis: 0,
        superstructures: vec![],
        merge_partner: None,
        extensions: vec![],
    }
}

/// Independent count of how many face loops use each undirected edge.
fn edge_use(g: &WireframeGraph) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    for f in g.faces().unwrap() {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    m
}

fn assert_closed(h: &BuildingHull) {
    let uses = edge_use(&h.wireframe);
    assert!(uses.values().all(|&c| c == 2), "{:?}", uses.iter().find(|(_, &c)| c != 2));
    h.wireframe.check_invariants().unwrap();
}

#[test]
fn flat_box_has_eight_corners_and_top_of_eighty() {
    let h = realize_spec(&spec(RoofKind::Flat, 1)).unwrap();
    assert_eq!(h.wireframe.node_count(), 8);
    assert_eq!(h.roof_faces.len(), 1);
    let top = &h.roof_loops()[0];
    assert!(top.iter().all(|p| p.z == 3.0));
    assert!((face_area(top) - 80.0).abs() < 1e-9);
    assert_closed(&h);
}

#[test]
fn pyramid_apex_sits_over_centroid() {
    let h = realize_spec(&spec(RoofKind::Pyramidal, 2)).unwrap();
    let top = h.wireframe.points().iter().copied().fold(Point3::new(0.0, 0.0, f64::MIN), |a, p| if p.z > a.z { p } else { a });
    assert_eq!((top.x, top.y, top.z), (5.0, 4.0, 8.0));
    assert_closed(&h);
}

#[test]
fn ridge_heights_match_rise() {
    for kind in [RoofKind::Gabled, RoofKind::Hipped, RoofKind::Pyramidal, RoofKind::Shed] {
        for axis in 0..4 {
            let mut s = spec(kind, 1);
            s.roof_axis = axis;
            let h = realize_spec(&s).unwrap();
            let zmax = h.wireframe.points().iter().map(|p| p.z).fold(f64::MIN, f64::max);
            assert_eq!(zmax, 5.0, "{kind:?}");
            assert_closed(&h);
        }
    }
}

#[test]
fn generation_is_deterministic() {
    let cfg = ExteriorConfig::default();
    for seed in [0u64, 1, 99] {
        let a = generate_exterior(seed, &cfg).unwrap();
        let b = generate_exterior(seed, &cfg).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn generated_hulls_are_closed_and_planar() {
    let cfg = ExteriorConfig { p_merge: 0.5, p_extension: 0.8, p_superstructure: 0.8, ..Default::default() };
    for seed in 0..150u64 {
        let h = generate_exterior(seed, &cfg).unwrap();
        assert_closed(&h);
        assert_eq!(h.floor_footprints.len(), h.floor_heights.len());
        let main_top = h.parts[0].wall_top(3.0);
        let zmax = h.wireframe.points().iter().map(|p| p.z).fold(f64::MIN, f64::max);
        assert!(zmax >= main_top);
    }
}

#[test]
fn extension_adds_its_area() {
    let base = FootprintPolygon::rectangle(0.0, 0.0, 10.0, 8.0).unwrap();
    assert_eq!(append_extensions(&base, &[], 3).unwrap(), base);
    let ext = ExtensionSpec {
        kind: ExtensionKind::Rectangular,
        edge: 0,
        offset: 3.0,
        width: 2.0,
        depth: 3.0,
        stories: 1,
        roof: RoofSpec::flat(),
    };
    let out = append_extensions(&base, &[ext], 3).unwrap();
    assert!((out.area() - 86.0).abs() < 1e-9);

    let trap = ExtensionSpec { kind: ExtensionKind::Trapezoidal { angle_deg: 45 }, edge: 2, width: 4.0, depth: 1.0, ..ext };
    let out = append_extensions(&base, &[ext, trap], 3).unwrap();
    // Trapezoid with parallel sides 4 and 2, height 1.
    assert!((out.area() - 89.0).abs() < 1e-9);

    let five = [ext; 5];
    assert!(matches!(append_extensions(&base, &five, 3), Err(ExteriorError::TooManyExtensions(5))));
    assert!(matches!(append_extensions(&base, &[ext, ext], 3), Err(ExteriorError::ExtensionEdge(0))));
}

#[test]
fn area_grows_with_each_extension() {
    let base = FootprintPolygon::rectangle(0.0, 0.0, 12.0, 9.0).unwrap();
    let mk = |edge| ExtensionSpec {
        kind: ExtensionKind::Rectangular,
        edge,
        offset: 2.0,
        width: 3.0,
        depth: 2.0,
        stories: 1,
        roof: RoofSpec::flat(),
    };
    let exts: Vec<_> = (0..4).map(mk).collect();
    let mut prev = base.area();
    for k in 1..=4 {
        let a = append_extensions(&base, &exts[..k], 1).unwrap().area();
        assert!(a > prev);
        prev = a;
    }
}

#[test]
fn twin_boxes_merge_into_one_closed_hull() {
    let a = flat_box(10.0, 8.0, 1);
    let m = merge_buildings(&a, &a, Point2::new(10.0, 0.0)).unwrap();
    assert!((m.floor_footprints[0].area() - 160.0).abs() < 1e-9);
    assert_eq!(m.floor_footprints[0].len(), 4);
    assert_closed(&m);
    // No wall remains on the shared plane x = 10 apart from its edges.
    let walls_on_seam = m
        .faces_with_role(FaceRole::Wall)
        .filter(|f| f.iter().all(|&i| (m.wireframe.points()[i].x - 10.0).abs() < 1e-9))
        .count();
    assert_eq!(walls_on_seam, 0);
}

#[test]
fn merge_rejects_contained_and_disjoint() {
    let a = flat_box(10.0, 8.0, 1);
    let b = flat_box(4.0, 4.0, 1);
    assert_eq!(merge_buildings(&a, &b, Point2::new(2.0, 2.0)), Err(ExteriorError::Contained));
    assert_eq!(merge_buildings(&a, &b, Point2::new(20.0, 0.0)), Err(ExteriorError::Disjoint));
    // Partial overlap is cut back to the part outside.
    let m = merge_buildings(&a, &flat_box(10.0, 8.0, 1), Point2::new(6.0, 0.0)).unwrap();
    assert!((m.floor_footprints[0].area() - 128.0).abs() < 1e-9);
    assert_closed(&m);
}

#[test]
fn floors_decompose_into_stacked_sections() {
    let h = flat_box(10.0, 8.0, 3);
    let floors = decompose_floors(&h);
    assert_eq!(floors.len(), 3);
    for (i, (fp, z0, z1)) in floors.iter().enumerate() {
        assert_eq!((*z0, *z1), (3.0 * i as f64, 3.0 * (i + 1) as f64));
        assert!((fp.area() - 80.0).abs() < 1e-9);
    }
    assert_eq!(decompose_floors(&flat_box(10.0, 8.0, 1)).len(), 1);
}

#[test]
fn setback_top_floor_is_contained() {
    let parts = [
        Part::rectangle(0.0, 0.0, 10.0, 8.0, 2, RoofSpec::flat()),
        Part::rectangle(10.0, 0.0, 5.0, 8.0, 1, RoofSpec::flat()),
    ];
    let h = build_hull(&parts, &[], 3.0).unwrap();
    assert_closed(&h);
    let (low, top) = (&h.floor_footprints[0], &h.floor_footprints[1]);
    assert!(top.area() < low.area());
    assert!(top.vertices().iter().all(|&p| point_in_polygon(p, low) || low.boundary_distance(p) < 1e-9));
}

#[test]
fn superstructures_keep_the_hull_closed() {
    let roof = RoofSpec { kind: RoofKind::Gabled, rise: 3.0, axis: 0 };
    let part = Part::rectangle(0.0, 0.0, 12.0, 9.0, 2, roof);
    let supers = [
        Superstructure { kind: SuperstructureKind::Dormer { width: 1.6, front_height: 1.0 }, part: 0, face: 0, s: 3.0, d: 1.0 },
        Superstructure { kind: SuperstructureKind::Chimney { size: 0.6, height: 1.0 }, part: 0, face: 1, s: 5.0, d: 2.0 },
    ];
    let h = build_hull(&[part.clone()], &supers, 3.0).unwrap();
    assert_closed(&h);
    let window = [Superstructure {
        kind: SuperstructureKind::RoofWindow { width: 1.0, length: 1.2 },
        part: 0,
        face: 0,
        s: 4.0,
        d: 1.0,
    }];
    let h = build_hull(&[part.clone()], &window, 3.0).unwrap();
    assert_eq!(h.roof_windows.len(), 1);
    let outside = [Superstructure { s: 11.5, ..supers[1] }];
    assert!(matches!(build_hull(&[part], &outside, 3.0), Err(ExteriorError::Superstructure { .. })));
}

#[test]
fn lower_annex_and_extensions_attach() {
    let mut s = spec(RoofKind::Gabled, 2);
    s.extensions = vec![
        ExtensionSpec {
            kind: ExtensionKind::Trapezoidal { angle_deg: 30 },
            edge: 1,
            offset: 2.0,
            width: 4.0,
            depth: 2.0,
            stories: 1,
            roof: RoofSpec { kind: RoofKind::Shed, rise: 1.0, axis: 0 },
        },
        ExtensionSpec {
            kind: ExtensionKind::Rectangular,
            edge: 0,
            offset: 2.0,
            width: 3.0,
            depth: 2.0,
            stories: 2,
            roof: RoofSpec::flat(),
        },
    ];
    let h = realize_spec(&s).unwrap();
    assert_closed(&h);
    assert!(h.floor_footprints[1].area() > 80.0);
}

