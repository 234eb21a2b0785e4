//! Direct scattering for the Zakharov-Shabat system on a plane-wave background.

mod eigen;
mod jost;
mod scattering;
mod trace;

use serde::{Deserialize, Serialize};

pub use eigen::{
    a_derivative, a_derivative_z, discrete_data, eigenmode, find_eigenvalues, norming_constants, second_solution,
    wronskian_phi_h, Eigenmode,
};
pub use jost::{det, jost_bundle, jost_left, jost_left_with, jost_right, jost_right_with, JostBundle, JostColumn, JostKind, Vec2, OVERFLOW_GUARD};
pub use scattering::{
    a_at_matching_points, a_with_derivative, log_samples, scattering_coefficients, scattering_on_grid, wronskian_scale,
    ContinuousSample, DiscreteSample, ScatteringData, ZGrid,
};
pub use trace::{theta_limit, trace_formula, trace_formula_check, TraceCheck, REFLECTION_WARN};

use crate::error::Result;
use crate::potential::PotentialField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZsConfig {
    /// Wronskians are evaluated at the grid node nearest to this x.
    pub match_x: f64,
    /// Gap samples used to bracket eigenvalues.
    pub scan_points: usize,
    /// Step multiple used during the bracket scan (1 or 2).
    pub scan_stride: usize,
    /// Newton step tolerance relative to rho.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Required `|a|` at an accepted root.
    pub root_abs_tol: f64,
}

impl Default for ZsConfig {
    fn default() -> Self {
        Self { match_x: 0.0, scan_points: 2001, scan_stride: 2, newton_tol: 1e-12, max_iter: 50, root_abs_tol: 1e-10 }
    }
}

/// Continuous samples on `grid` plus the discrete spectrum.
pub fn direct_scattering(field: &PotentialField, grid: &ZGrid, cfg: &ZsConfig) -> Result<ScatteringData> {
    let continuous = scattering_on_grid(field, grid, cfg)?;
    let discrete = discrete_data(field, cfg)?;
    Ok(ScatteringData { boundary: *field.boundary(), time: field.time(), continuous, discrete })
}
