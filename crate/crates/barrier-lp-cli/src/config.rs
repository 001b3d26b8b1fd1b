//! Run configuration: defaults, optional JSON base file, flag overrides,
//! and the content hash embedded in every output.

use std::path::Path;

use anyhow::Context;
use barrier_lp::dyadic::{DyadicSystem, FamilyId, SystemKind};
use barrier_lp::grid::{SpatialGrid, SpectralGrid, SpectralGridBuilder};
use barrier_lp::BarrierPotential;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// `None` selects the free particle
    pub epsilon: Option<f64>,
    pub grid_extent: f64,
    pub grid_points: usize,
    pub xi_max: f64,
    pub family: Family,
    pub smoothness_order: u32,
    pub seed: u64,
    /// quadrature/grid density doublings
    pub refine: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: Some(1.0),
            grid_extent: 12.0,
            grid_points: 577,
            xi_max: 16.0,
            family: Family::SymmetricBump,
            smoothness_order: 2,
            seed: 7,
            refine: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SymmetricBump,
    SkewedSplit,
}

impl From<Family> for FamilyId {
    fn from(f: Family) -> FamilyId {
        match f {
            Family::SymmetricBump => FamilyId::SymmetricBump,
            Family::SkewedSplit => FamilyId::SkewedSplit,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn potential(&self) -> anyhow::Result<BarrierPotential> {
        Ok(match self.epsilon {
            Some(eps) => BarrierPotential::new(eps)?,
            None => BarrierPotential::free(),
        })
    }

    /// Spatial grid at the configured refinement level.
    pub fn grid(&self) -> anyhow::Result<SpatialGrid> {
        let grid = SpatialGrid::symmetric(self.grid_extent, self.grid_points)?;
        Ok(grid.refine(1usize << self.refine))
    }

    pub fn spectral_builder<'a>(
        &self,
        pot: &'a BarrierPotential,
        grid: &'a SpatialGrid,
    ) -> SpectralGridBuilder<'a> {
        SpectralGrid::builder(pot, grid).refine(self.refine)
    }

    pub fn system(&self, kind: SystemKind) -> anyhow::Result<DyadicSystem> {
        Ok(DyadicSystem::build(
            kind,
            self.family.into(),
            self.smoothness_order,
        )?)
    }

    /// SHA-256 over the canonical JSON of the configuration (plus the
    /// experiment parameters appended by the command).
    pub fn hash_with(&self, experiment: &serde_json::Value) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("config serializes").as_bytes());
        hasher.update(serde_json::to_string(experiment).expect("experiment serializes").as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_file_fills_defaults() {
        let parsed: RunConfig = serde_json::from_str(r#"{"epsilon": 2.5, "seed": 3}"#).unwrap();
        assert_eq!(parsed.epsilon, Some(2.5));
        assert_eq!(parsed.seed, 3);
        assert_eq!(parsed.grid_points, RunConfig::default().grid_points);
    }

    #[test]
    fn hash_changes_with_any_field() {
        let base = RunConfig::default();
        let exp = serde_json::json!({"j": 8});
        let mut other = base.clone();
        other.seed = 8;
        assert_ne!(base.hash_with(&exp), other.hash_with(&exp));
        assert_ne!(base.hash_with(&exp), base.hash_with(&serde_json::json!({"j": 9})));
        assert_eq!(base.hash_with(&exp), base.hash_with(&serde_json::json!({"j": 8})));
    }
}
