//! Synthesis of semantically enriched LoD 4 residential building wireframes.
//!
//! The pipeline runs in four stages: a procedural exterior hull is generated
//! and cut into per-floor footprints ([`exterior`]); each footprint receives
//! candidate floor-plan label grids ([`floorplan`]); the grids are vectorized
//! into wall graphs with room, door and window semantics ([`vectorize`]);
//! finally the plans are aligned to their footprints ([`align`]), extruded and
//! stacked into complete buildings ([`assemble`]). [`quality`] holds the
//! automated checks, [`roofcloud`] samples roof point clouds, [`records`]
//! serializes buildings and [`stats`] summarizes a generated dataset.

pub mod align;
pub mod assemble;
pub mod exterior;
pub mod floorplan;
pub mod geom;
pub mod quality;
pub mod records;
pub mod rng;
pub mod roofcloud;
pub mod stats;
pub mod vectorize;
