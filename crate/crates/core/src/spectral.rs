//! Boundary data, the two-sheeted spectral variable and the uniformization map.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance from a branch point below which `p` is considered degenerate.
pub const BRANCH_EPS: f64 = 1e-8;

/// Plane-wave limits `rho * exp(i alpha_pm)` of the potential at `x -> +-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    rho: f64,
    alpha_minus: f64,
    alpha_plus: f64,
}

impl BoundaryData {
    /// Phases are reduced to `[0, 2pi)`.
    pub fn new(rho: f64, alpha_minus: f64, alpha_plus: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid("rho", "rho must be positive"));
        }
        if !alpha_minus.is_finite() {
            return Err(Error::invalid("alpha_minus", "phase must be finite"));
        }
        if !alpha_plus.is_finite() {
            return Err(Error::invalid("alpha_plus", "phase must be finite"));
        }
        Ok(Self {
            rho,
            alpha_minus: wrap_phase(alpha_minus),
            alpha_plus: wrap_phase(alpha_plus),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha_minus(&self) -> f64 {
        self.alpha_minus
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }

    pub fn theta(&self) -> f64 {
        self.alpha_plus - self.alpha_minus
    }

    /// `rho exp(i alpha_- - 2 i rho^2 t)`.
    pub fn left_limit(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.rho, self.alpha_minus - 2.0 * self.rho * self.rho * t)
    }

    /// `rho exp(i alpha_+ - 2 i rho^2 t)`.
    pub fn right_limit(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.rho, self.alpha_plus - 2.0 * self.rho * self.rho * t)
    }

    pub fn branch_eps(&self) -> f64 {
        BRANCH_EPS * self.rho
    }
}

pub fn wrap_phase(alpha: f64) -> f64 {
    let w = alpha.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU { 0.0 } else { w }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    /// `Im p > 0`, the upper half z-plane.
    Plus,
    /// `Im p < 0`, the lower half z-plane.
    Minus,
    /// Real `xi` with `|xi| >= rho`, real `p`.
    ContinuousSpectrum,
}

impl Sheet {
    fn name(self) -> &'static str {
        match self {
            Sheet::Plus => "plus",
            Sheet::Minus => "minus",
            Sheet::ContinuousSpectrum => "continuous spectrum",
        }
    }
}

/// A point of the Riemann surface in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub xi: Complex64,
    pub p: Complex64,
    pub z: Complex64,
    pub sheet: Sheet,
}

impl SpectralPoint {
    pub fn from_xi(xi: Complex64, sheet: Sheet, boundary: &BoundaryData) -> Result<Self> {
        let p = p_of_xi(xi, sheet, boundary)?;
        Ok(Self { xi, p, z: xi + p, sheet })
    }

    /// Real z inside the circle `|z| = rho` lands on the edge of the cut where
    /// `sign p = -sign xi`; it is still tagged as continuous spectrum.
    pub fn from_z(z: Complex64, boundary: &BoundaryData) -> Result<Self> {
        let (xi, p) = from_uniformization(z, boundary)?;
        let tol = 1e-14 * z.norm().max(boundary.rho());
        let sheet = if z.im > tol {
            Sheet::Plus
        } else if z.im < -tol {
            Sheet::Minus
        } else {
            Sheet::ContinuousSpectrum
        };
        if p.norm() < boundary.branch_eps() {
            return Err(Error::BranchPoint { xi, eps: boundary.branch_eps() });
        }
        Ok(Self { xi, p, z, sheet })
    }

    /// Gap point `xi in (-rho, rho)` on the upper sheet.
    pub fn gap(xi: f64, boundary: &BoundaryData) -> Result<Self> {
        Self::from_xi(Complex64::new(xi, 0.0), Sheet::Plus, boundary)
    }

    /// Real `xi`, `p` on the continuous spectrum.
    pub fn real_xi(&self) -> f64 {
        self.xi.re
    }
}

/// `p = sqrt(xi^2 - rho^2)` on the requested sheet.
pub fn p_of_xi(xi: Complex64, sheet: Sheet, boundary: &BoundaryData) -> Result<Complex64> {
    let rho = boundary.rho();
    let eps = boundary.branch_eps();
    if (xi - rho).norm() < eps || (xi + rho).norm() < eps {
        return Err(Error::BranchPoint { xi, eps });
    }
    let mismatch = || Error::SheetMismatch { xi, sheet: sheet.name() };
    let real_tol = 1e-14 * xi.norm().max(rho);
    match sheet {
        Sheet::ContinuousSpectrum => {
            if xi.im.abs() > real_tol || xi.re.abs() < rho {
                return Err(mismatch());
            }
            let x = xi.re;
            let q = ((x - rho) * (x + rho)).sqrt();
            Ok(Complex64::new(q.copysign(x), 0.0))
        }
        Sheet::Plus | Sheet::Minus => {
            let s = ((xi - rho) * (xi + rho)).sqrt();
            if s.im.abs() <= real_tol * 1e2 && xi.im.abs() <= real_tol && xi.re.abs() > rho {
                // on the cut itself the sheets touch; only the continuous tag is valid
                return Err(mismatch());
            }
            let want_positive = sheet == Sheet::Plus;
            Ok(if (s.im > 0.0) == want_positive { s } else { -s })
        }
    }
}

pub fn to_uniformization(xi: Complex64, p: Complex64, boundary: &BoundaryData) -> Result<Complex64> {
    let rho = boundary.rho();
    let residual = (p * p - (xi * xi - rho * rho)).norm();
    let scale = xi.norm_sqr().max(rho * rho);
    if residual > 1e-10 * scale {
        return Err(Error::InconsistentPair { xi, p, residual });
    }
    Ok(xi + p)
}

pub fn from_uniformization(z: Complex64, boundary: &BoundaryData) -> Result<(Complex64, Complex64)> {
    if z.norm() < boundary.branch_eps() {
        return Err(Error::Origin { z });
    }
    let q = boundary.rho() * boundary.rho() / z;
    Ok(((z + q) * 0.5, (z - q) * 0.5))
}

/// `d xi / d z = (1 - rho^2 / z^2) / 2`.
pub fn dxi_dz(z: Complex64, rho: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - rho * rho / (z * z)) * 0.5
}
