use super::stacking::reuse_count;
use super::*;
use crate::exterior::{build_hull, Part, RoofSpec};
use crate::vectorize::{VectorOpening, VectorRoom};
use proptest::prelude::*;
use std::collections::{BTreeSet, HashSet};

fn square_plan(x0: f64, y0: f64, w: f64) -> VectorFloorPlan {
    let nodes = vec![Point2::new(x0, y0), Point2::new(x0 + w, y0), Point2::new(x0 + w, y0 + w), Point2::new(x0, y0 + w)];
    VectorFloorPlan {
        nodes,
        edges: [(0, 1), (1, 2), (2, 3), (0, 3)].into_iter().collect(),
        rooms: vec![VectorRoom { nodes: vec![0, 1, 2, 3], label: Label::LivingRoom }],
        doors: vec![VectorOpening { a: 0, b: 1, label: Label::FrontDoor }],
        windows: vec![VectorOpening { a: 1, b: 2, label: Label::Window }],
    }
}

fn box_hull(w: f64, stories: usize) -> BuildingHull {
    build_hull(&[Part::rectangle(0.0, 0.0, w, w, stories, RoofSpec::flat())], &[], 3.0).unwrap()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// All r-tuples over n symbols with pairwise distinct entries, by brute force.
fn injective_tuples(n: usize, r: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let total = n.pow(r as u32);
    for mut code in 0..total {
        let mut t = Vec::with_capacity(r);
        for _ in 0..r {
            t.push(code % n);
            code /= n;
        }
        if t.iter().collect::<HashSet<_>>().len() == r {
            out.insert(t);
        }
    }
    out
}

fn order_indices(orders: &[StackingOrder], plans: &[String]) -> Vec<Vec<usize>> {
    orders.iter().map(|o| o.plan_ids.iter().map(|id| plans.iter().position(|p| p == id).unwrap()).collect()).collect()
}

#[test]
fn permutation_count_examples() {
    assert_eq!(permutation_count(12, 4).unwrap(), 11880);
    assert_eq!(permutation_count(9, 0).unwrap(), 1);
    assert_eq!(permutation_count(5, 5).unwrap(), 120);
    assert_eq!(permutation_count(0, 0).unwrap(), 1);
    assert!(matches!(permutation_count(3, 4), Err(AssembleError::Permutation { n: 3, r: 4 })));
}

#[test]
fn stackings_match_brute_force_for_small_cases() {
    for n in 1..=7 {
        for r in 1..=4.min(n) {
            let plans = ids("p", n);
            let orders = enumerate_stackings(&[plans.clone()], &vec![0; r], None, 5).unwrap();
            assert_eq!(orders.len() as u128, permutation_count(n as u64, r as u64).unwrap(), "n={n} r={r}");
            let got: BTreeSet<Vec<usize>> = order_indices(&orders, &plans).into_iter().collect();
            assert_eq!(got, injective_tuples(n, r), "n={n} r={r}");
        }
    }
}

#[test]
fn twelve_plans_on_four_floors() {
    let orders = enumerate_stackings(&[ids("p", 12)], &[0; 4], None, 1).unwrap();
    assert_eq!(orders.len(), 11880);
    assert_eq!(orders.iter().collect::<HashSet<_>>().len(), 11880);
}

#[test]
fn single_plan_single_floor() {
    let orders = enumerate_stackings(&[ids("p", 1)], &[0], None, 1).unwrap();
    assert_eq!(orders, vec![StackingOrder { plan_ids: vec!["p0".into()] }]);
}

#[test]
fn two_plans_three_floors_reuse_exactly_one() {
    let plans = ids("p", 2);
    let orders = enumerate_stackings(&[plans.clone()], &[0; 3], None, 1).unwrap();
    let mut oracle = BTreeSet::new();
    for code in 0..8usize {
        let t: Vec<usize> = (0..3).map(|k| (code >> k) & 1).collect();
        if t.contains(&0) && t.contains(&1) {
            oracle.insert(t);
        }
    }
    let got: BTreeSet<Vec<usize>> = order_indices(&orders, &plans).into_iter().collect();
    assert_eq!(orders.len(), got.len());
    assert_eq!(got, oracle);
    for o in &orders {
        let counts: Vec<usize> = plans.iter().map(|p| o.plan_ids.iter().filter(|q| *q == p).count()).collect();
        assert_eq!(counts.iter().filter(|&&c| c == 2).count(), 1);
        assert!(counts.iter().all(|&c| c <= 2));
    }
}

#[test]
fn reuse_count_matches_enumeration() {
    for n in 1..=4usize {
        for k in n + 1..=2 * n {
            let orders = enumerate_stackings(&[ids("p", n)], &vec![0; k], None, 0).unwrap();
            // every plan used, none thrice, exactly k - n plans doubled
            let mut oracle = 0u128;
            for mut code in 0..n.pow(k as u32) {
                let mut c = vec![0; n];
                for _ in 0..k {
                    c[code % n] += 1;
                    code /= n;
                }
                if c.iter().all(|&x| (1..=2).contains(&x)) {
                    oracle += 1;
                }
            }
            assert_eq!(orders.len() as u128, oracle, "n={n} k={k}");
            assert_eq!(reuse_count(n as u64, k as u64), oracle);
        }
    }
}

#[test]
fn too_few_plans_is_rejected() {
    assert!(matches!(
        enumerate_stackings(&[ids("p", 1)], &[0; 3], None, 0),
        Err(AssembleError::InsufficientPlans { plans: 1, floors: 3, .. })
    ));
    assert!(matches!(enumerate_stackings(&[vec![]], &[0], None, 0), Err(AssembleError::NoPlans { class: 0 })));
    assert!(matches!(enumerate_stackings(&[ids("p", 2)], &[0, 1], None, 0), Err(AssembleError::NoPlans { class: 1 })));
    let dup = vec!["a".to_string(), "a".to_string()];
    assert!(matches!(enumerate_stackings(&[dup], &[0], None, 0), Err(AssembleError::DuplicatePlan(_))));
}

#[test]
fn distinct_top_floor_is_chosen_not_permuted() {
    let lower = ids("a", 4);
    let top = ids("t", 3);
    let orders = enumerate_stackings(&[lower.clone(), top.clone()], &[0, 0, 1], None, 9).unwrap();
    assert_eq!(orders.len(), 12);
    let lows: HashSet<_> = orders.iter().map(|o| o.plan_ids[..2].to_vec()).collect();
    assert_eq!(lows.len(), 12);
    assert!(orders.iter().all(|o| top.contains(&o.plan_ids[2]) && lower.contains(&o.plan_ids[0])));
    let again = enumerate_stackings(&[lower, top], &[0, 0, 1], None, 9).unwrap();
    assert_eq!(orders, again);
}

#[test]
fn cap_samples_distinct_orders() {
    let plans = ids("p", 8);
    let all: HashSet<_> = enumerate_stackings(&[plans.clone()], &[0; 3], None, 3).unwrap().into_iter().collect();
    let capped = enumerate_stackings(&[plans.clone()], &[0; 3], Some(40), 3).unwrap();
    assert_eq!(capped.len(), 40);
    assert_eq!(capped.iter().collect::<HashSet<_>>().len(), 40);
    assert!(capped.iter().all(|o| all.contains(o)));
    assert_eq!(capped, enumerate_stackings(&[plans.clone()], &[0; 3], Some(40), 3).unwrap());
    assert_ne!(capped, enumerate_stackings(&[plans], &[0; 3], Some(40), 4).unwrap());
}

#[test]
fn floor_classes_use_congruence() {
    let a = FootprintPolygon::rectangle(0.0, 0.0, 10.0, 8.0).unwrap();
    let b = FootprintPolygon::rectangle(5.0, -3.0, 10.0, 8.0).unwrap();
    let c = FootprintPolygon::rectangle(0.0, 0.0, 6.0, 8.0).unwrap();
    assert_eq!(floor_classes(&[a.clone(), b, c, a]), vec![0, 0, 1, 0]);
}

#[test]
fn square_room_extrudes_to_eight_nodes() {
    let unit = extrude_floor(&square_plan(0.0, 0.0, 4.0), 0.0, 3.0, &ExtrudeConfig::default(), "fp").unwrap();
    assert_eq!(unit.wireframe.node_count(), 8);
    assert_eq!(unit.wireframe.edge_count(), 12);
    assert!(unit.wireframe.points().iter().all(|p| (0.0..=3.0).contains(&p.z)));
    let rings = &unit.room_map[&Label::LivingRoom.id()];
    assert_eq!(rings.len(), 1);
    assert_eq!(rings[0].len(), 8);
    for o in unit.doors.iter().chain(&unit.windows) {
        assert!(unit.wireframe.has_edge(o.segment.0, o.segment.1));
    }
}

#[test]
fn window_rectangle_spans_band() {
    let mut plan = square_plan(0.0, 0.0, 4.0);
    plan.nodes.extend([Point2::new(4.0, 1.4), Point2::new(4.0, 2.6)]);
    plan.edges = [(0, 1), (1, 4), (4, 5), (2, 5), (2, 3), (0, 3)].into_iter().collect();
    plan.rooms[0].nodes = vec![0, 1, 4, 5, 2, 3];
    plan.windows = vec![VectorOpening { a: 4, b: 5, label: Label::Window }];
    plan.validate().unwrap();
    let cfg = ExtrudeConfig::default();
    let unit = extrude_floor(&plan, 3.0, 6.0, &cfg, "fp").unwrap();
    let c = unit.windows[0].corners;
    assert!((c[0].dist(c[1]) - 1.2).abs() < 1e-9);
    assert!((c[1].dist(c[2]) - (cfg.window_head_m - cfg.window_sill_m)).abs() < 1e-9);
    assert!((c[0].z - 3.9).abs() < 1e-9 && (c[2].z - 5.1).abs() < 1e-9);
    assert!(c.iter().all(|p| (p.x - 4.0).abs() < 1e-12));
    let d = unit.doors[0].corners;
    assert_eq!(d[0].z, 3.0);
    assert!((d[2].z - 3.0 - cfg.front_door_height_m).abs() < 1e-9);
}

#[test]
fn degenerate_extent_is_rejected() {
    let plan = square_plan(0.0, 0.0, 4.0);
    let cfg = ExtrudeConfig::default();
    assert!(matches!(extrude_floor(&plan, 3.0, 3.0, &cfg, "x"), Err(AssembleError::ZRange { .. })));
    assert!(matches!(extrude_floor(&plan, 3.0, 1.0, &cfg, "x"), Err(AssembleError::ZRange { .. })));
    assert!(matches!(extrude_floor(&plan, 0.0, 2.0, &cfg, "x"), Err(AssembleError::Band { .. })));
}

#[test]
fn stacked_identical_units_share_interface_nodes() {
    let hull = box_hull(4.0, 2);
    let cfg = ExtrudeConfig::default();
    let plan = square_plan(0.0, 0.0, 4.0);
    let units = vec![extrude_floor(&plan, 0.0, 3.0, &cfg, "a").unwrap(), extrude_floor(&plan, 3.0, 6.0, &cfg, "b").unwrap()];
    let b = stack_floors(&hull, units).unwrap();
    assert_eq!(b.building.node_count(), 12);
    assert_eq!(b.building.edge_count(), 20);
    b.building.check_invariants().unwrap();
    assert_eq!(b.plan_ids, vec!["a", "b"]);
    assert_eq!(b.room_types[&Label::LivingRoom.id()].len(), 2);
    for ring in b.room_types.values().flatten() {
        assert!(ring.iter().all(|&i| i < b.building.node_count()));
    }
}

#[test]
fn flat_roof_nodes_are_top_wall_nodes() {
    let hull = box_hull(4.0, 1);
    let unit = extrude_floor(&square_plan(0.0, 0.0, 4.0), 0.0, 3.0, &ExtrudeConfig::default(), "a").unwrap();
    let b = stack_floors(&hull, vec![unit]).unwrap();
    assert!(b.roof.node_count() >= 4);
    let pts: HashSet<[u64; 3]> = b.building.points().iter().map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]).collect();
    for p in b.roof.points() {
        assert!(pts.contains(&[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]), "{p:?}");
    }
    assert_eq!(b.doors.node_count(), 4);
    assert_eq!(b.windows.node_count(), 4);
}

#[test]
fn stacking_checks_units_against_hull() {
    let hull = box_hull(4.0, 2);
    let cfg = ExtrudeConfig::default();
    let plan = square_plan(0.0, 0.0, 4.0);
    assert!(matches!(stack_floors(&hull, vec![]), Err(AssembleError::Empty)));
    let one = extrude_floor(&plan, 0.0, 3.0, &cfg, "a").unwrap();
    assert!(matches!(stack_floors(&hull, vec![one.clone()]), Err(AssembleError::UnitCount { units: 1, stories: 2 })));
    let off = extrude_floor(&plan, 3.5, 6.5, &cfg, "b").unwrap();
    assert!(matches!(stack_floors(&hull, vec![one, off]), Err(AssembleError::ZMismatch { floor: 1, .. })));
}

#[test]
fn contiguity() {
    assert!(floors_contiguous(&[(0.0, 3.0), (3.0, 6.0)], 6.0));
    assert!(!floors_contiguous(&[(0.0, 3.0), (3.5, 6.0)], 6.0));
    assert!(!floors_contiguous(&[(0.0, 3.0)], 6.0));
    assert!(!floors_contiguous(&[], 0.0));
}

#[test]
fn placement_identity_and_snapping() {
    let fp = FootprintPolygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap();
    let frame = RasterFrame::fit(&fp, 64, 4);
    let id = Placement { frame, pivot: (32.0, 32.0), transform: crate::align::AlignmentTransform::IDENTITY };
    let p = Point2::new(3.3, 7.1);
    assert!(id.apply(p).dist(p) < 1e-12);

    let shifted = Placement { transform: AlignmentTransform { t_x: 1.0, ..AlignmentTransform::IDENTITY }, ..id };
    assert!((shifted.apply(p).x - (p.x + frame.scale)).abs() < 1e-12);

    let mut plan = square_plan(0.15, 0.15, 9.7);
    plan.nodes.push(Point2::new(5.0, 0.1));
    plan.nodes.push(Point2::new(5.0, 5.0));
    plan.edges = [(0, 4), (1, 4), (1, 2), (2, 3), (0, 3), (4, 5)].into_iter().collect();
    plan.rooms[0].nodes = vec![0, 4, 1, 2, 3];
    plan.doors[0] = VectorOpening { a: 0, b: 4, label: Label::FrontDoor };
    let placed = place_plan(&plan, &id, &fp, 0.3).unwrap();
    for (k, v) in fp.vertices().iter().enumerate() {
        assert_eq!(placed.nodes[k], *v);
    }
    assert!((placed.nodes[4].y).abs() < 1e-12);
    assert_eq!(placed.nodes[5], Point2::new(5.0, 5.0));
}

proptest! {
    #[test]
    fn orders_are_distinct_and_obey_reuse(n in 1usize..6, k in 1usize..6, cap in 1usize..30, seed: u64) {
        prop_assume!(k <= 2 * n);
        let plans = ids("p", n);
        let orders = enumerate_stackings(&[plans.clone()], &vec![0; k], Some(cap), seed).unwrap();
        let theory = if n >= k { permutation_count(n as u64, k as u64).unwrap() } else { reuse_count(n as u64, k as u64) };
        prop_assert_eq!(orders.len() as u128, theory.min(cap as u128));
        prop_assert_eq!(orders.iter().collect::<HashSet<_>>().len(), orders.len());
        for o in &orders {
            prop_assert_eq!(o.plan_ids.len(), k);
            let distinct: HashSet<_> = o.plan_ids.iter().collect();
            prop_assert_eq!(distinct.len(), n.min(k));
            for p in &plans {
                prop_assert!(o.plan_ids.iter().filter(|q| *q == p).count() <= 2);
            }
        }
    }

    #[test]
    fn stacked_building_is_consistent(stories in 1usize..4, w in 3.0f64..12.0, x in -5.0f64..5.0) {
        let hull = build_hull(&[Part::rectangle(x, 0.0, w, w, stories, RoofSpec::flat())], &[], 3.0).unwrap();
        let plan = square_plan(x, 0.0, w);
        let cfg = ExtrudeConfig::default();
        let units: Vec<FloorUnit> = (0..stories)
            .map(|i| extrude_floor(&plan, hull.level(i), hull.level(i + 1), &cfg, &format!("u{i}")).unwrap())
            .collect();
        let extents: Vec<(f64, f64)> = units.iter().map(|u| (u.z_base, u.z_top)).collect();
        prop_assert!(floors_contiguous(&extents, hull.wall_top()));
        let b = stack_floors(&hull, units).unwrap();
        prop_assert_eq!(b.building.node_count(), 4 * (stories + 1));
        let adj = b.building.adjacency_matrix();
        for i in 0..adj.len() {
            prop_assert_eq!(adj[i][i], 0);
            for j in 0..adj.len() {
                prop_assert_eq!(adj[i][j], adj[j][i]);
            }
        }
    }
}
