//! Direct, evolve and inverse steps chained with one set of numerical settings.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evolution::{evolve_scattering_data, SourceSpec};
use crate::glm::{reconstruct, reconstruct_field, GlmConfig, Reconstruction};
use crate::potential::{PotentialField, UniformGrid};
use crate::zakharov_shabat::{direct_scattering, ScatteringData, ZGrid, ZsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub zs: ZsConfig,
    /// Continuous-spectrum cut `Z`, in units of `rho`.
    pub z_max: f64,
    /// Nodes of the inversion-symmetric z grid (multiple of 4).
    pub z_nodes: usize,
    pub glm: GlmConfig,
    /// Reconstruction window `[-W, W]`.
    pub recon_half_width: f64,
    pub recon_intervals: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            zs: ZsConfig::default(),
            z_max: 40.0,
            z_nodes: 4000,
            glm: GlmConfig::default(),
            recon_half_width: 12.0,
            recon_intervals: 240,
        }
    }
}

impl PipelineConfig {
    pub fn z_grid(&self, rho: f64) -> Result<ZGrid> {
        ZGrid::inversion_symmetric(rho, self.z_max * rho, self.z_nodes)
    }

    pub fn recon_grid(&self) -> Result<UniformGrid> {
        UniformGrid::symmetric(self.recon_half_width, self.recon_intervals)
    }

    pub fn direct(&self, field: &PotentialField) -> Result<ScatteringData> {
        let grid = self.z_grid(field.boundary().rho())?;
        direct_scattering(field, &grid, &self.zs)
    }

    pub fn evolve(&self, sd: &ScatteringData, t: f64, spec: &SourceSpec) -> Result<ScatteringData> {
        evolve_scattering_data(sd, t, spec)
    }

    pub fn inverse(&self, sd: &ScatteringData) -> Result<Reconstruction> {
        reconstruct(sd, &self.recon_grid()?, &self.glm)
    }

    pub fn inverse_field(&self, sd: &ScatteringData) -> Result<PotentialField> {
        reconstruct_field(sd, &self.recon_grid()?, &self.glm)
    }
}
