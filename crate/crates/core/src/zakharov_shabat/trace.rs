use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scattering::ScatteringData;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|r|` above which `log(1 - |r|^2)` is considered unreliable.
pub const REFLECTION_WARN: f64 = 1.0 - 1e-6;

/// Product-integral representation of `a` at `Im z > 0`.
pub fn trace_formula(sd: &ScatteringData, z: Complex64) -> Complex64 {
    let blaschke: Complex64 = sd.discrete.iter().map(|d| (z - d.z) / (z - d.z.conj())).product();
    let integral: Complex64 = sd
        .continuous
        .iter()
        .map(|s| s.weight * log_transmission(s.r().norm()) / (s.z - z))
        .sum();
    blaschke * (-integral / (2.0 * PI * I)).exp()
}

fn log_transmission(r: f64) -> f64 {
    (1.0 - r * r).ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceCheck {
    /// `(z, a direct, a from the trace formula)`.
    pub samples: Vec<(Complex64, Complex64, Complex64)>,
    pub max_error: f64,
    /// `exp(-i theta)` from the boundary phases.
    pub theta_expected: Complex64,
    /// The `z -> 0` limit of the representation.
    pub theta_reconstructed: Complex64,
    pub theta_residual: f64,
    /// Set when some `|r|` is too close to 1 for the logarithm.
    pub quadrature_warning: bool,
}

/// Compares the representation against directly computed values of `a`.
pub fn trace_formula_check(sd: &ScatteringData, direct: &[(Complex64, Complex64)]) -> TraceCheck {
    let samples: Vec<_> = direct.iter().map(|&(z, a)| (z, a, trace_formula(sd, z))).collect();
    let max_error = samples.iter().map(|s| (s.1 - s.2).norm()).fold(0.0, f64::max);
    let theta_expected = Complex64::from_polar(1.0, -sd.boundary.theta());
    let theta_reconstructed = theta_limit(sd);
    TraceCheck {
        samples,
        max_error,
        theta_expected,
        theta_reconstructed,
        theta_residual: (theta_expected - theta_reconstructed).norm(),
        quadrature_warning: sd.continuous.iter().any(|s| s.r().norm() >= REFLECTION_WARN),
    }
}

/// `prod z_n / conj(z_n) * exp[-(1/2 pi i) int log(1-|r|^2) / zeta dzeta]`.
pub fn theta_limit(sd: &ScatteringData) -> Complex64 {
    let blaschke: Complex64 = sd.discrete.iter().map(|d| d.z / d.z.conj()).product();
    let integral: f64 = sd
        .continuous
        .iter()
        .map(|s| s.weight * log_transmission(s.r().norm()) / s.z)
        .sum();
    blaschke * (-Complex64::from(integral) / (2.0 * PI * I)).exp()
}
