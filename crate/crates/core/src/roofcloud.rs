//! Roof point clouds sampled uniformly over the roof surface.

use crate::geom::{face_area, face_normal, triangle_area, triangulate_face, GeomError, Point3};
use crate::rng::derive_indexed;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Default areal density in points per square meter.
pub const DEFAULT_DENSITY: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoofCloudError {
    #[error("density must be positive and finite, got {0}")]
    Density(f64),
    #[error("noise sigma must be non-negative and finite, got {0}")]
    Sigma(f64),
    #[error("roof face {face}: {source}")]
    Face { face: usize, source: GeomError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofPointCloud {
    pub points: Vec<Point3>,
    pub density: f64,
    pub seed: u64,
    /// Points drawn from each face, in face order.
    pub face_counts: Vec<usize>,
}

/// Splits `total` into integer parts proportional to `weights` by the
/// largest-remainder method; ties go to the lower index.
pub fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| (quotas[j] - quotas[j].floor()).total_cmp(&(quotas[i] - quotas[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Samples `round(total area × density)` points over planar roof loops,
/// apportioned to faces by area and uniform within each face. With
/// `noise_sigma > 0` each point is displaced along its face normal by a
/// normal deviate of that standard deviation.
pub fn sample_roof(faces: &[Vec<Point3>], density: f64, seed: u64, noise_sigma: f64) -> Result<RoofPointCloud, RoofCloudError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(RoofCloudError::Density(density));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(RoofCloudError::Sigma(noise_sigma));
    }
    let mut tris = Vec::with_capacity(faces.len());
    let mut normals = Vec::with_capacity(faces.len());
    for (face, loop_) in faces.iter().enumerate() {
        tris.push(triangulate_face(loop_).map_err(|source| RoofCloudError::Face { face, source })?);
        normals.push(face_normal(loop_).unwrap_or_default());
    }
    let areas: Vec<f64> = faces.iter().map(|f| face_area(f)).collect();
    let total = (areas.iter().sum::<f64>() * density).round() as usize;
    let counts = apportion(&areas, total);

    let mut points = Vec::with_capacity(total);
    for (f, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed(seed, "roof-face", f as u64));
        let weights: Vec<f64> = tris[f].iter().map(triangle_area).collect();
        let pick = WeightedIndex::new(&weights).expect("face with positive area has a positive triangle");
        let noise = (noise_sigma > 0.0).then(|| Normal::new(0.0, noise_sigma).expect("valid sigma"));
        for _ in 0..count {
            let [a, b, c] = tris[f][pick.sample(&mut rng)];
            let s = rng.gen::<f64>().sqrt();
            let r = rng.gen::<f64>();
            let mut p = a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r);
            if let Some(n) = &noise {
                p = p + normals[f] * n.sample(&mut rng);
            }
            points.push(p);
        }
    }
    Ok(RoofPointCloud { points, density, seed, face_counts: counts })
}

/// Whitespace-delimited XYZ lines.
pub fn write_xyz<W: Write>(points: &[Point3], mut w: W) -> io::Result<()> {
    for p in points {
        writeln!(w, "{:.6} {:.6} {:.6}", p.x, p.y, p.z)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn rect(x0: f64, y0: f64, w: f64, d: f64, z: f64) -> Vec<Point3> {
        vec![Point3::new(x0, y0, z), Point3::new(x0 + w, y0, z), Point3::new(x0 + w, y0 + d, z), Point3::new(x0, y0 + d, z)]
    }

    fn plane_distance(p: Point3, face: &[Point3]) -> f64 {
        let n = face_normal(face).unwrap();
        (p - face[0]).dot(n).abs()
    }

    #[test]
    fn flat_ten_square_meters() {
        let faces = vec![rect(1.0, 2.0, 2.0, 5.0, 6.0)];
        let c = sample_roof(&faces, 50.0, 3, 0.0).unwrap();
        assert_eq!(c.points.len(), 500);
        for p in &c.points {
            assert!((p.z - 6.0).abs() < 1e-9);
            assert!(p.x >= 1.0 - 1e-12 && p.x <= 3.0 + 1e-12 && p.y >= 2.0 - 1e-12 && p.y <= 7.0 + 1e-12);
        }
    }

    #[test]
    fn no_faces_no_points() {
        let c = sample_roof(&[], 50.0, 3, 0.0).unwrap();
        assert!(c.points.is_empty());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let faces = vec![rect(0.0, 0.0, 1.0, 1.0, 0.0)];
        assert!(matches!(sample_roof(&faces, -1.0, 0, 0.0), Err(RoofCloudError::Density(_))));
        assert!(matches!(sample_roof(&faces, f64::NAN, 0, 0.0), Err(RoofCloudError::Density(_))));
        assert!(matches!(sample_roof(&faces, 1.0, 0, -0.1), Err(RoofCloudError::Sigma(_))));
    }

    #[test]
    fn gable_planes_get_equal_shares_on_their_planes() {
        // two 2 m x 4 m slopes rising 1.2 m over a 1.6 m run: slope length 2
        let left = vec![Point3::new(0.0, 0.0, 3.0), Point3::new(0.0, 4.0, 3.0), Point3::new(1.6, 4.0, 4.2), Point3::new(1.6, 0.0, 4.2)];
        let right = vec![Point3::new(3.2, 4.0, 3.0), Point3::new(3.2, 0.0, 3.0), Point3::new(1.6, 0.0, 4.2), Point3::new(1.6, 4.0, 4.2)];
        assert!((face_area(&left) - 8.0).abs() < 1e-12);
        let c = sample_roof(&[left.clone(), right.clone()], 50.0, 1, 0.0).unwrap();
        assert_eq!(c.face_counts, vec![400, 400]);
        for p in &c.points[..400] {
            assert!(plane_distance(*p, &left) < 1e-9);
            assert!(p.x <= 1.6 + 1e-9);
        }
        for p in &c.points[400..] {
            assert!(plane_distance(*p, &right) < 1e-9);
            assert!(p.x >= 1.6 - 1e-9);
        }
    }

    #[test]
    fn uniform_over_a_rectangle() {
        let faces = vec![rect(0.0, 0.0, 4.0, 2.5, 0.0)];
        let c = sample_roof(&faces, 1000.0, 17, 0.0).unwrap();
        assert_eq!(c.points.len(), 10_000);
        let mut bins = [0f64; 16];
        for p in &c.points {
            let i = ((p.x / 1.0).floor() as usize).min(3);
            let j = ((p.y / 0.625).floor() as usize).min(3);
            bins[4 * j + i] += 1.0;
        }
        let expected = 10_000.0 / 16.0;
        let stat: f64 = bins.iter().map(|o| (o - expected).powi(2) / expected).sum();
        let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.999);
        assert!(stat < critical, "chi2 {stat} >= {critical}");
    }

    #[test]
    fn noise_moves_points_along_the_normal() {
        let faces = vec![rect(0.0, 0.0, 4.0, 4.0, 5.0)];
        let c = sample_roof(&faces, 100.0, 2, 0.05).unwrap();
        let dz: Vec<f64> = c.points.iter().map(|p| p.z - 5.0).collect();
        let mean = dz.iter().sum::<f64>() / dz.len() as f64;
        let sd = (dz.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / dz.len() as f64).sqrt();
        assert!(mean.abs() < 0.01 && (sd - 0.05).abs() < 0.01, "mean {mean} sd {sd}");
        assert!(c.points.iter().all(|p| (0.0..=4.0).contains(&p.x)));
    }

    #[test]
    fn apportionment_examples() {
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 10), vec![4, 3, 3]);
        assert_eq!(apportion(&[3.0, 1.0], 5), vec![4, 1]);
        assert_eq!(apportion(&[0.0, 0.0], 5), vec![0, 0]);
        assert_eq!(apportion(&[], 5), Vec::<usize>::new());
    }

    #[test]
    fn xyz_lines() {
        let mut out = Vec::new();
        write_xyz(&[Point3::new(1.0, 2.5, -3.0)], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1.000000 2.500000 -3.000000\n");
    }

    proptest! {
        #[test]
        fn counts_are_conserved(sizes in prop::collection::vec((0.5f64..6.0, 0.5f64..6.0), 1..5), density in 1.0f64..60.0, seed: u64) {
            let faces: Vec<Vec<Point3>> = sizes.iter().enumerate().map(|(k, &(w, d))| rect(10.0 * k as f64, 0.0, w, d, 3.0)).collect();
            let area: f64 = sizes.iter().map(|(w, d)| w * d).sum();
            let c = sample_roof(&faces, density, seed, 0.0).unwrap();
            prop_assert_eq!(c.points.len(), (area * density).round() as usize);
            for (k, &(w, d)) in sizes.iter().enumerate() {
                let quota = w * d * density;
                prop_assert!((c.face_counts[k] as f64 - quota).abs() < 1.0 + 1e-9);
            }
            prop_assert!(c.points.iter().all(|p| (p.z - 3.0).abs() < 1e-9));
            prop_assert_eq!(c.clone(), sample_roof(&faces, density, seed, 0.0).unwrap());
        }

        #[test]
        fn tilted_faces_keep_points_on_plane(rise in 0.0f64..5.0, w in 1.0f64..8.0, seed: u64) {
            let face = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(w, 0.0, 0.0), Point3::new(w, 3.0, rise), Point3::new(0.0, 3.0, rise)];
            let c = sample_roof(&[face.clone()], 20.0, seed, 0.0).unwrap();
            prop_assert!(c.points.iter().all(|p| plane_distance(*p, &face) < 1e-9));
        }
    }
}
