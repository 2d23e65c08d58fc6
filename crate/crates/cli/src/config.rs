use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use synbuild_core::align::AlignSearchConfig;
use synbuild_core::assemble::ExtrudeConfig;
use synbuild_core::exterior::ExteriorConfig;
use synbuild_core::floorplan::FloorplanConfig;
use synbuild_core::roofcloud::DEFAULT_DENSITY;
use synbuild_core::vectorize::VectorizeConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub global_seed: u64,
    pub exterior_count: usize,
    /// Candidates generated for each distinct floor footprint.
    pub candidates_per_floor: usize,
    /// Most stacking orders materialized per exterior.
    pub permutation_cap: usize,
    pub worker_count: usize,
    pub output_root: Option<PathBuf>,
    pub roof_density: f64,
    pub roof_noise_sigma: f64,
    pub exterior: ExteriorConfig,
    pub floorplan: FloorplanConfig,
    pub vectorize: VectorizeConfig,
    pub align: AlignSearchConfig,
    pub extrude: ExtrudeConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            global_seed: 0,
            exterior_count: 25,
            candidates_per_floor: 15,
            permutation_cap: 10,
            worker_count: 4,
            output_root: None,
            roof_density: DEFAULT_DENSITY,
            roof_noise_sigma: 0.0,
            exterior: ExteriorConfig::default(),
            floorplan: FloorplanConfig::default(),
            vectorize: VectorizeConfig::default(),
            align: AlignSearchConfig::default(),
            extrude: ExtrudeConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.worker_count == 0 {
            return bad("worker_count must be at least 1".into());
        }
        if self.exterior_count == 0 {
            return bad("exterior_count must be at least 1".into());
        }
        if self.candidates_per_floor == 0 {
            return bad("candidates_per_floor must be at least 1".into());
        }
        if self.permutation_cap == 0 {
            return bad("permutation_cap must be at least 1".into());
        }
        if !(self.roof_density > 0.0 && self.roof_density.is_finite()) {
            return bad(format!("roof_density must be positive, got {}", self.roof_density));
        }
        if !(self.roof_noise_sigma >= 0.0 && self.roof_noise_sigma.is_finite()) {
            return bad(format!("roof_noise_sigma must be non-negative, got {}", self.roof_noise_sigma));
        }
        let v = &self.vectorize;
        if v.node_stride == 0 || !(v.merge_px > 0.0) || !(0.0..=1.0).contains(&v.cover_frac) {
            return bad("vectorize: node_stride and merge_px must be positive and cover_frac in [0, 1]".into());
        }
        let e = &self.extrude;
        if !(e.snap_walls >= 0.0) || !(e.window_sill_m >= 0.0 && e.window_sill_m < e.window_head_m) {
            return bad("extrude: need snap_walls >= 0 and 0 <= window_sill_m < window_head_m".into());
        }
        if e.window_head_m.max(e.interior_door_height_m).max(e.front_door_height_m) >= self.exterior.floor_height_m {
            return bad("extrude: openings must fit below the floor height".into());
        }
        self.exterior.validate().map_err(|e| ConfigError::Invalid(format!("exterior: {e}")))?;
        self.floorplan.validate().map_err(|e| ConfigError::Invalid(format!("floorplan: {e}")))?;
        self.align.validate().map_err(|e| ConfigError::Invalid(format!("align: {e}")))?;
        Ok(())
    }
}
