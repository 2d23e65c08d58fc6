use super::*;
use crate::floorplan::{generate_floorplan, place_front_door, FloorLayout, FloorplanConfig};
use crate::geom::{FootprintPolygon, RasterFrame};

fn cfg() -> VectorizeConfig {
    VectorizeConfig::default()
}

fn frame(w: usize, h: usize) -> RasterFrame {
    RasterFrame { origin: Point2::new(0.0, 0.0), scale: 0.1, width: w, height: h }
}

#[test]
fn mask_marks_structural_labels() {
    let f = frame(4, 1);
    assert!(structure_mask(&LabelGrid::filled(f, 1)).is_empty());
    assert_eq!(structure_mask(&LabelGrid::filled(f, 15)).count_ones(), 4);
    let f = frame(21, 1);
    let labels: Vec<u8> = (1..=21).collect();
    let m = structure_mask(&LabelGrid::new(f, labels.clone()).unwrap());
    for (x, v) in labels.iter().enumerate() {
        assert_eq!(m.get(x, 0), (15..=21).contains(v), "label {v}");
    }
}

#[test]
fn empty_bitmap_gives_empty_graph() {
    let g = vectorize_structure(&BinaryBitmap::new(16, 16), &cfg()).unwrap();
    assert!(g.nodes.is_empty() && g.edges.is_empty());
}

#[test]
fn ring_becomes_a_four_cycle() {
    let mut rows = vec!["....................."; 3];
    rows.push("...###############...");
    for _ in 0..8 {
        rows.push("...#.............#...");
    }
    rows.push("...###############...");
    rows.extend(["....................."; 3]);
    let bmp = BinaryBitmap::from_rows(&rows);
    // Corner pixel centers: x in {3, 17}, y in {3, 12} (rows counted from the bottom).
    let corners = [(3.5, 3.5), (17.5, 3.5), (17.5, 12.5), (3.5, 12.5)].map(|(x, y)| Point2::new(x, y));
    for seed in 0..10 {
        let g = vectorize_structure(&bmp, &VectorizeConfig { seed, ..cfg() }).unwrap();
        assert_eq!(g.nodes.len(), 4, "seed {seed}: {:?}", g.nodes);
        assert_eq!(g.edges.len(), 4);
        for c in corners {
            assert!(g.nodes.iter().any(|n| n.dist(c) <= 2.0), "no node near {c:?}");
        }
        for i in 0..4 {
            let deg = g.edges.iter().filter(|&&(a, b)| a == i || b == i).count();
            assert_eq!(deg, 2);
        }
    }
}

#[test]
fn diagonal_line_is_one_edge() {
    let mut bmp = BinaryBitmap::new(24, 24);
    for i in 2..20 {
        bmp.set(i, i, true);
    }
    let g = vectorize_structure(&bmp, &cfg()).unwrap();
    assert_eq!(g.nodes.len(), 2);
    assert_eq!(g.edges.len(), 1);
    let ends = [Point2::new(2.5, 2.5), Point2::new(19.5, 19.5)];
    for e in ends {
        assert!(g.nodes.iter().any(|n| n.dist(e) <= 1.0), "{:?}", g.nodes);
    }
}

#[test]
fn refinement_never_adds_nodes() {
    let c = candidate(&bay(), 3);
    let g = vectorize_structure(&structure_mask(&c.grid), &cfg()).unwrap();
    assert!(g.history.windows(2).skip(1).all(|w| w[1] <= w[0]), "{:?}", g.history);
}

/// Box of walls three pixels thick around a single room.
fn boxed_room(label: u8) -> LabelGrid {
    let f = frame(30, 24);
    let mut g = LabelGrid::filled(f, Label::External.id());
    for y in 2..22 {
        for x in 2..28 {
            let wall = x < 5 || x >= 25 || y < 5 || y >= 19;
            g.set(x, y, if wall { 15 } else { label });
        }
    }
    g
}

#[test]
fn enclosed_room_keeps_its_label() {
    let grid = boxed_room(3);
    let g = vectorize_structure(&structure_mask(&grid), &cfg()).unwrap();
    let plan = extract_semantics(&grid, &g).unwrap();
    assert_eq!(plan.rooms.len(), 1);
    assert_eq!(plan.rooms[0].label, Label::Kitchen);
    assert_eq!(plan.rooms[0].nodes.len(), 4);
    assert!(plan.doors.is_empty() && plan.windows.is_empty());
    // Wall centerline runs 1.5 px inside the outer edge: 23 x 17 px.
    let area = polygon_area(&plan.room_polygon(0)).unwrap();
    assert!((area - 23.0 * 17.0 * 0.01).abs() < 0.2, "{area}");
}

#[test]
fn window_run_becomes_a_segment() {
    let mut grid = boxed_room(2);
    for x in 10..15 {
        for y in 19..22 {
            grid.set(x, y, Label::Window.id());
        }
    }
    let g = vectorize_structure(&structure_mask(&grid), &cfg()).unwrap();
    let plan = extract_semantics(&grid, &g).unwrap();
    assert_eq!(plan.windows.len(), 1);
    let w = plan.windows[0];
    let len = plan.nodes[w.a].dist(plan.nodes[w.b]);
    assert!((len - 0.5).abs() <= 0.1, "{len}");
    assert_eq!(plan.rooms.len(), 1);
    plan.validate().unwrap();
}

#[test]
fn gap_in_wall_is_an_open_room() {
    let mut grid = boxed_room(4);
    for x in 10..16 {
        for y in 19..22 {
            grid.set(x, y, 14);
        }
    }
    let g = vectorize_structure(&structure_mask(&grid), &cfg()).unwrap();
    assert!(matches!(extract_semantics(&grid, &g), Err(VectorizeError::OpenRoom { label: 4, .. })));
}

fn bay() -> FootprintPolygon {
    FootprintPolygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(4.0, 0.0),
        Point2::new(5.5, -1.5),
        Point2::new(8.5, -1.5),
        Point2::new(10.0, 0.0),
        Point2::new(12.0, 0.0),
        Point2::new(12.0, 9.0),
        Point2::new(0.0, 9.0),
    ])
    .unwrap()
}

fn candidate(fp: &FootprintPolygon, seed: u64) -> crate::floorplan::FloorPlanCandidate {
    let c = FloorplanConfig::default();
    let door = place_front_door(fp, c.front_door_width_m, seed).unwrap();
    generate_floorplan(fp, &door, seed, &c).unwrap()
}

#[test]
fn painted_plans_vectorize_with_all_rooms() {
    for (fp, seeds) in [(FootprintPolygon::rectangle(0.0, 0.0, 11.0, 8.0).unwrap(), 0..8u64), (bay(), 20..28)] {
        for seed in seeds {
            let c = candidate(&fp, seed);
            let g = vectorize_structure(&structure_mask(&c.grid), &cfg()).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            let plan = extract_semantics(&c.grid, &g).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(plan.rooms.len(), c.layout.rooms.len(), "seed {seed}");
            assert_eq!(plan.doors.len(), c.layout.doors.len(), "seed {seed}");
            assert_eq!(plan.windows.len(), c.layout.windows.len(), "seed {seed}");
            let mut want: Vec<u8> = c.layout.rooms.iter().map(|r| r.label.id()).collect();
            let mut got: Vec<u8> = plan.rooms.iter().map(|r| r.label.id()).collect();
            want.sort();
            got.sort();
            assert_eq!(want, got);
        }
    }
}

/// Wall graph of a layout: room corners as nodes, room sides split at every
/// node lying on them.
fn wall_graph(layout: &FloorLayout) -> (Vec<Point2>, BTreeSet<(usize, usize)>) {
    let mut nodes: Vec<Point2> = Vec::new();
    for r in &layout.rooms {
        for &p in &r.polygon {
            if !nodes.iter().any(|q| q.dist(p) < 1e-6) {
                nodes.push(p);
            }
        }
    }
    let mut edges = BTreeSet::new();
    for r in &layout.rooms {
        let p = &r.polygon;
        for k in 0..p.len() {
            let (a, b) = (p[k], p[(k + 1) % p.len()]);
            let u = (b - a).normalized();
            let mut on: Vec<(f64, usize)> =
                (0..nodes.len()).filter(|&i| crate::geom::segment_distance(nodes[i], a, b) < 1e-6).map(|i| ((nodes[i] - a).dot(u), i)).collect();
            on.sort_by(|x, y| x.0.total_cmp(&y.0));
            for w in on.windows(2) {
                edges.insert((w[0].1.min(w[1].1), w[0].1.max(w[1].1)));
            }
        }
    }
    (nodes, edges)
}

#[test]
fn rasterized_wall_graphs_roundtrip() {
    let mut ok = 0;
    let total = 12;
    for seed in 0..total {
        let fp = if seed % 2 == 0 { FootprintPolygon::rectangle(0.0, 0.0, 12.0, 9.0).unwrap() } else { bay() };
        let c = candidate(&fp, seed);
        let f = c.grid.frame();
        let (world, edges) = wall_graph(&c.layout);
        let nodes: Vec<Point2> = world.iter().map(|&p| f.to_px(p)).collect();
        let bmp = rasterize_edges(&nodes, &edges, f.width, f.height, 3.0);
        let g = vectorize_structure(&bmp, &cfg()).unwrap();
        if same_graph(&nodes, &edges, &g.nodes, &g.edges, 2.0) {
            ok += 1;
        } else {
            eprintln!("seed {seed}: want {} nodes {} edges, got {} nodes {} edges", nodes.len(), edges.len(), g.nodes.len(), g.edges.len());
        }
    }
    assert!(ok * 100 >= total * 95, "{ok}/{total}");
}

fn same_graph(an: &[Point2], ae: &BTreeSet<(usize, usize)>, bn: &[Point2], be: &BTreeSet<(usize, usize)>, tol: f64) -> bool {
    if an.len() != bn.len() {
        return false;
    }
    let map: Vec<usize> =
        bn.iter().map(|p| (0..an.len()).min_by(|&i, &j| an[i].dist(*p).total_cmp(&an[j].dist(*p))).unwrap()).collect();
    if map.iter().collect::<BTreeSet<_>>().len() != an.len() || bn.iter().zip(&map).any(|(p, &i)| p.dist(an[i]) > tol) {
        return false;
    }
    let mapped: BTreeSet<(usize, usize)> = be.iter().map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b]))).collect();
    &mapped == ae
}
