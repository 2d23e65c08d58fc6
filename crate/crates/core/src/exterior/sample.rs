use super::hull::{build_hull, superstructure_fits};
use super::roof::roof_geometry;
use super::{
    BuildingHull, ExteriorConfig, ExteriorError, ExteriorSpec, ExtensionKind, ExtensionSpec, MergePartner, Part,
    RoofKind, RoofSpec, Superstructure, SuperstructureKind,
};
use crate::geom::{FootprintPolygon, Point2};
use crate::rng::{derive_indexed, derive_seed, stream, StreamRng};
use rand::seq::SliceRandom;
use rand::Rng;

const MAX_ATTEMPTS: usize = 16;
/// Clearance kept between an attached block and the corners of the edge it sits on.
const EDGE_MARGIN: f64 = 1.5;
/// Vertical gap between a lower block's roof and the main wall top.
const ROOF_GAP: f64 = 0.2;

/// Turns a recipe into parts and builds the hull.
pub fn realize_spec(spec: &ExteriorSpec) -> Result<BuildingHull, ExteriorError> {
    if spec.extensions.len() > 4 {
        return Err(ExteriorError::TooManyExtensions(spec.extensions.len()));
    }
    if spec.stories == 0 {
        return Err(ExteriorError::InvalidPart("main block has no stories".into()));
    }
    let roof = RoofSpec { kind: spec.roof, rise: spec.roof_rise, axis: spec.roof_axis };
    let main = Part::rectangle(0.0, 0.0, spec.base_width, spec.base_depth, spec.stories, roof);
    let mut parts = vec![main.clone()];
    if let Some(m) = &spec.merge_partner {
        parts.push(m.part.clone());
    }
    let mut used = [false; 4];
    for ext in &spec.extensions {
        if ext.edge >= 4 || used[ext.edge] {
            return Err(ExteriorError::ExtensionEdge(ext.edge));
        }
        used[ext.edge] = true;
        let (a, b) = (main.corners[ext.edge], main.corners[(ext.edge + 1) % 4]);
        if ext.offset < 0.0 || ext.offset + ext.width > a.dist(b) + 1e-9 {
            return Err(ExteriorError::ExtensionPlacement { edge: ext.edge, attempts: 1 });
        }
        parts.push(Part { corners: ext.polygon(a, b), stories: ext.stories, roof: ext.roof });
    }
    build_hull(&parts, &spec.superstructures, spec.floor_height)
}

/// Samples and builds a random exterior.
///
/// Each attempt draws a fresh recipe; if no attempt yields a valid hull the
/// plain main block of the last recipe is used.
pub fn generate_exterior(seed: u64, config: &ExteriorConfig) -> Result<BuildingHull, ExteriorError> {
    config.validate()?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let spec = sample_spec(derive_indexed(seed, "exterior_attempt", attempt as u64), config);
        match realize_spec(&spec) {
            Ok(hull) => return Ok(hull),
            Err(e) => log::debug!("exterior attempt {attempt} for seed {seed} rejected: {e}"),
        }
        last = Some(spec);
    }
    let mut spec = last.expect("at least one attempt");
    spec.superstructures.clear();
    spec.merge_partner = None;
    spec.extensions.clear();
    realize_spec(&spec)
}

fn uniform(rng: &mut StreamRng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn pick_roof(rng: &mut StreamRng, kinds: &[RoofKind], rise: (f64, f64)) -> RoofSpec {
    let kind = *kinds.choose(rng).expect("non-empty roof kinds");
    let rise = uniform(rng, rise);
    let axis = rng.gen_range(0..4);
    match kind {
        RoofKind::Flat => RoofSpec::flat(),
        _ => RoofSpec { kind, rise, axis },
    }
}

/// Draws a recipe; every group of choices has its own stream.
pub(super) fn sample_spec(seed: u64, config: &ExteriorConfig) -> ExteriorSpec {
    let mut rng = stream(seed, "stories");
    let stories = rng.gen_range(config.stories_range.0..=config.stories_range.1);
    let mut rng = stream(seed, "footprint");
    let base_width = uniform(&mut rng, config.base_width_range_m);
    let base_depth = uniform(&mut rng, config.base_depth_range_m);
    let mut rng = stream(seed, "roof");
    let roof = pick_roof(&mut rng, &config.roof_kinds_enabled, config.roof_rise_range_m);
    let fh = config.floor_height_m;
    let main = Part::rectangle(0.0, 0.0, base_width, base_depth, stories, roof);

    let merge = sample_merge(derive_seed(seed, "merge"), config, &main);
    let mut free: Vec<usize> = (0..4).filter(|&k| merge.as_ref().is_none_or(|(e, _)| *e != k)).collect();
    let extensions = sample_extensions(derive_seed(seed, "extensions"), config, &main, &mut free);
    let superstructures = sample_superstructures(derive_seed(seed, "superstructures"), config, &main, fh);
    ExteriorSpec {
        base_width,
        base_depth,
        stories,
        floor_height: fh,
        roof: roof.kind,
        roof_rise: roof.rise,
        roof_axis: roof.axis,
        superstructures,
        merge_partner: merge.map(|(_, part)| Box::new(MergePartner { part })),
        extensions,
    }
}

/// Either a twin of the main block placed across a full edge, or a lower annex.
fn sample_merge(seed: u64, config: &ExteriorConfig, main: &Part) -> Option<(usize, Part)> {
    let mut rng = stream(seed, "choice");
    if !rng.gen_bool(config.p_merge) {
        return None;
    }
    let c = &main.corners;
    let fh = config.floor_height_m;
    let h = main.wall_top(fh);
    if rng.gen_bool(0.5) {
        let mut edges: Vec<usize> = (0..4).collect();
        if main.roof.kind == RoofKind::Shed {
            // Twins of a shed block join along the sloped side walls only.
            edges.retain(|&k| k % 2 != main.roof.axis % 2);
        }
        let edge = *edges.choose(&mut rng)?;
        let shift = c[edge] - c[(edge + 3) % 4];
        return Some((edge, main.translated(shift)));
    }
    if main.stories < 2 {
        return None;
    }
    let edge = rng.gen_range(0..4);
    let len = c[edge].dist(c[(edge + 1) % 4]);
    if len < 2.0 * EDGE_MARGIN + 3.0 {
        return None;
    }
    let width = rng.gen_range(3.0..=len - 2.0 * EDGE_MARGIN);
    let offset = rng.gen_range(EDGE_MARGIN..=len - EDGE_MARGIN - width);
    let depth = rng.gen_range(3.0..=6.0);
    let stories = rng.gen_range(1..main.stories);
    let room = h - ROOF_GAP - stories as f64 * fh;
    let mut roof = pick_roof(&mut rng, &config.roof_kinds_enabled, config.roof_rise_range_m);
    roof.rise = roof.rise.min(room);
    if roof.rise < 0.5 {
        roof = RoofSpec::flat();
    }
    let spec = ExtensionSpec { kind: ExtensionKind::Rectangular, edge, offset, width, depth, stories, roof };
    let corners = spec.polygon(c[edge], c[(edge + 1) % 4]);
    Some((edge, Part { corners, stories, roof }))
}

fn sample_extensions(seed: u64, config: &ExteriorConfig, main: &Part, free: &mut Vec<usize>) -> Vec<ExtensionSpec> {
    let mut rng = stream(seed, "choice");
    if config.max_extensions == 0 || free.is_empty() || !rng.gen_bool(config.p_extension) {
        return Vec::new();
    }
    let count = rng.gen_range(1..=config.max_extensions.min(free.len()));
    free.shuffle(&mut rng);
    let c = &main.corners;
    let fh = config.floor_height_m;
    let main_top = main.wall_top(fh);
    let mut out = Vec::new();
    for &edge in free.iter().take(count) {
        let len = c[edge].dist(c[(edge + 1) % 4]);
        if len < 2.0 * EDGE_MARGIN + 2.0 {
            continue;
        }
        let width = rng.gen_range(2.0..=(len - 2.0 * EDGE_MARGIN).min(6.0));
        let offset = rng.gen_range(EDGE_MARGIN..=len - EDGE_MARGIN - width);
        let mut depth: f64 = rng.gen_range(1.5..=4.0);
        let kind = if rng.gen_bool(0.5) {
            ExtensionKind::Rectangular
        } else {
            let angle_deg = *[30u32, 45].choose(&mut rng).unwrap();
            // Keep the outer wall at least 1.5 m wide.
            let max_depth = (width - 1.5) / (2.0 * (angle_deg as f64).to_radians().tan());
            if max_depth < 1.5 {
                ExtensionKind::Rectangular
            } else {
                depth = depth.min(max_depth);
                ExtensionKind::Trapezoidal { angle_deg }
            }
        };
        let stories = rng.gen_range(1..=main.stories);
        let ext_top = stories as f64 * fh;
        let shed_rise = uniform(&mut rng, config.roof_rise_range_m).min(main_top - ROOF_GAP - ext_top);
        let want_shed = rng.gen_bool(0.5) && config.roof_kinds_enabled.contains(&RoofKind::Shed);
        let roof = if want_shed && shed_rise >= 0.5 {
            RoofSpec { kind: RoofKind::Shed, rise: shed_rise, axis: 0 }
        } else {
            RoofSpec::flat()
        };
        out.push(ExtensionSpec { kind, edge, offset, width, depth, stories, roof });
    }
    out
}

fn sample_superstructures(seed: u64, config: &ExteriorConfig, main: &Part, fh: f64) -> Vec<Superstructure> {
    let mut rng = stream(seed, "choice");
    if !rng.gen_bool(config.p_superstructure) {
        return Vec::new();
    }
    let Ok(geom) = roof_geometry(main, main.wall_top(fh)) else {
        return Vec::new();
    };
    let mut faces: Vec<usize> = (0..geom.faces.len()).collect();
    faces.shuffle(&mut rng);
    let count = rng.gen_range(1..=faces.len().min(2));
    let mut out = Vec::new();
    for &fi in faces.iter().take(count) {
        let face = &geom.faces[fi];
        let sloped = face.frame.slope >= 0.05;
        let kind = match rng.gen_range(0..3) {
            0 if sloped => SuperstructureKind::Dormer {
                width: rng.gen_range(1.2..=2.0),
                front_height: rng.gen_range(0.8..=1.3),
            },
            1 | 0 => SuperstructureKind::Chimney { size: rng.gen_range(0.5..=0.8), height: rng.gen_range(0.8..=1.5) },
            _ => SuperstructureKind::RoofWindow { width: rng.gen_range(0.8..=1.2), length: rng.gen_range(1.0..=1.4) },
        };
        let (lo, hi) = face.points.iter().fold(
            (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| {
                let (s, d) = face.frame.sd(p.xy());
                (Point2::new(lo.x.min(s), lo.y.min(d)), Point2::new(hi.x.max(s), hi.y.max(d)))
            },
        );
        for _ in 0..8 {
            let sup = Superstructure { kind, part: 0, face: fi, s: rng.gen_range(lo.x..=hi.x), d: rng.gen_range(lo.y..=hi.y) };
            if superstructure_fits(&sup, face) {
                out.push(sup);
                break;
            }
        }
    }
    out
}

/// Attaches extensions flush to distinct edges of a counter-clockwise footprint.
///
/// Edge indices refer to the input polygon. An extension that leaves the
/// polygon non-simple is moved to a new random offset along its edge; after
/// 16 failed placements the whole call is rejected.
pub fn append_extensions(
    footprint: &FootprintPolygon,
    extensions: &[ExtensionSpec],
    seed: u64,
) -> Result<FootprintPolygon, ExteriorError> {
    if extensions.len() > 4 {
        return Err(ExteriorError::TooManyExtensions(extensions.len()));
    }
    let n = footprint.len();
    let mut seen = vec![false; n];
    for e in extensions {
        if e.edge >= n || seen[e.edge] {
            return Err(ExteriorError::ExtensionEdge(e.edge));
        }
        seen[e.edge] = true;
    }
    // Inserted chains per original edge, placed one extension at a time.
    let mut chains: Vec<Vec<Point2>> = vec![Vec::new(); n];
    let mut current = footprint.clone();
    for (i, ext) in extensions.iter().enumerate() {
        let (a, b) = footprint.edge(ext.edge);
        let len = a.dist(b);
        if ext.width <= 0.0 || ext.depth <= 0.0 || ext.width > len {
            return Err(ExteriorError::ExtensionPlacement { edge: ext.edge, attempts: 0 });
        }
        let mut rng = stream(derive_indexed(seed, "extension_offset", i as u64), "offset");
        let mut placed = None;
        for attempt in 0..MAX_ATTEMPTS {
            let offset = if attempt == 0 { ext.offset } else { rng.gen_range(0.0..=len - ext.width) };
            let spec = ExtensionSpec { offset, ..*ext };
            if offset < 0.0 || offset + spec.width > len + 1e-9 {
                continue;
            }
            let q = spec.polygon(a, b);
            let mut trial = chains.clone();
            trial[ext.edge] = vec![q[1], q[2], q[3], q[0]];
            let ring: Vec<Point2> = (0..n)
                .flat_map(|k| std::iter::once(footprint.vertices()[k]).chain(trial[k].iter().copied()))
                .collect();
            let Ok(poly) = FootprintPolygon::new(ring) else {
                continue;
            };
            let added = crate::geom::polygon_area(&q).map(f64::abs).unwrap_or(0.0);
            if (poly.area() - current.area() - added).abs() > 1e-6 * (1.0 + poly.area()) || added <= 0.0 {
                continue;
            }
            placed = Some((trial, poly));
            break;
        }
        let (trial, poly) =
            placed.ok_or(ExteriorError::ExtensionPlacement { edge: ext.edge, attempts: MAX_ATTEMPTS })?;
        chains = trial;
        current = poly;
    }
    Ok(current)
}
