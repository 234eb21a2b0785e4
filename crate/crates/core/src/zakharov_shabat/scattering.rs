use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jost::{det, integrate, JostKind, Local, Request};
use super::ZsConfig;
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::spectral::{BoundaryData, SpectralPoint};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `rho^2 / (2 p (xi - p))`, the inverse of the Jost determinant.
pub fn wronskian_scale(point: &SpectralPoint, rho: f64) -> Complex64 {
    rho * rho / (2.0 * point.p * (point.xi - point.p))
}

/// `d/dxi` of [`wronskian_scale`].
fn wronskian_scale_xi(point: &SpectralPoint, rho: f64) -> Complex64 {
    let p = point.p;
    let p_xi = point.xi / p;
    let g = p * (point.xi - p);
    let g_xi = p_xi * (point.xi - p) + p * (1.0 - p_xi);
    -rho * rho / (2.0 * g * g) * g_xi
}

fn end_state(field: &PotentialField, point: &SpectralPoint, kind: JostKind, stop: usize, derivative: bool, stride: usize) -> Result<([Complex64; 2], [Complex64; 2])> {
    let t = integrate(field, &Local::new(point), Request { kind, stop, derivative, record: false, stride })?;
    Ok((t.end, t.end_d))
}

/// `(a, b)` at one point; `b` is `None` off the continuous spectrum.
pub fn scattering_coefficients(field: &PotentialField, point: &SpectralPoint, cfg: &ZsConfig) -> Result<(Complex64, Option<Complex64>)> {
    let grid = field.grid();
    let j = grid.nearest(cfg.match_x);
    let k = wronskian_scale(point, field.boundary().rho());
    let (phi, _) = end_state(field, point, JostKind::Phi, j, false, 1)?;
    let (psi, _) = end_state(field, point, JostKind::Psi, j, false, 1)?;
    let a = k * det(phi, psi);
    let b = if point.p.im.abs() <= 1e-14 * point.p.norm() {
        let (psi_bar, _) = end_state(field, point, JostKind::PsiBar, j, false, 1)?;
        let x = grid.x(j);
        Some(k * det(psi_bar, phi) * (-2.0 * I * point.p * x).exp())
    } else {
        None
    };
    Ok((a, b))
}

/// `a` and `da/dxi` from the xi-augmented system, matched at `cfg.match_x`.
pub fn a_with_derivative(field: &PotentialField, point: &SpectralPoint, cfg: &ZsConfig, stride: usize) -> Result<(Complex64, Complex64)> {
    let j = field.grid().nearest(cfg.match_x);
    let rho = field.boundary().rho();
    let (phi, dphi) = end_state(field, point, JostKind::Phi, j, true, stride)?;
    let (psi, dpsi) = end_state(field, point, JostKind::Psi, j, true, stride)?;
    let d = det(phi, psi);
    let k = wronskian_scale(point, rho);
    let a = k * d;
    let a_xi = wronskian_scale_xi(point, rho) * d + k * (det(dphi, psi) + det(phi, dpsi));
    Ok((a, a_xi))
}

/// `a` alone, optionally with the cheaper double step.
pub(crate) fn a_only(field: &PotentialField, point: &SpectralPoint, cfg: &ZsConfig, stride: usize) -> Result<Complex64> {
    let j = field.grid().nearest(cfg.match_x);
    let (phi, _) = end_state(field, point, JostKind::Phi, j, false, stride)?;
    let (psi, _) = end_state(field, point, JostKind::Psi, j, false, stride)?;
    Ok(wronskian_scale(point, field.boundary().rho()) * det(phi, psi))
}

/// `a` evaluated with several matching points from one pair of sweeps.
pub fn a_at_matching_points(field: &PotentialField, point: &SpectralPoint, xs: &[f64]) -> Result<Vec<Complex64>> {
    let n = field.grid().n;
    let loc = Local::new(point);
    let phi = integrate(field, &loc, Request { kind: JostKind::Phi, stop: n - 1, derivative: false, record: true, stride: 1 })?
        .column
        .expect("recorded");
    let psi = integrate(field, &loc, Request { kind: JostKind::Psi, stop: 0, derivative: false, record: true, stride: 1 })?
        .column
        .expect("recorded");
    let k = wronskian_scale(point, field.boundary().rho());
    Ok(xs
        .iter()
        .map(|&x| {
            let j = field.grid().nearest(x);
            k * det(phi.conditioned(j), psi.conditioned(j))
        })
        .collect())
}

/// Real z nodes with quadrature weights for integrals over the whole real axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub z: Vec<f64>,
    pub weight: Vec<f64>,
}

impl ZGrid {
    /// Midpoint rule in `p` on `[-P, P]`, `P = (Z - rho^2/Z)/2`; each `p` node
    /// yields the two real roots `z = p +- sqrt(p^2 + rho^2)`. The node set is
    /// closed under `z -> rho^2/z`, covers `|z| in [rho^2/Z, Z]` and never
    /// touches the branch points `z = +-rho`.
    pub fn inversion_symmetric(rho: f64, z_max: f64, nodes: usize) -> Result<Self> {
        if !(z_max > rho) {
            return Err(Error::invalid("z_max", "must exceed rho"));
        }
        if nodes < 4 || !nodes.is_multiple_of(4) {
            return Err(Error::invalid("z_nodes", "must be a positive multiple of 4"));
        }
        let m = nodes / 2;
        let p_max = 0.5 * (z_max - rho * rho / z_max);
        let dp = 2.0 * p_max / m as f64;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(nodes);
        for k in 0..m {
            let p = -p_max + (k as f64 + 0.5) * dp;
            let r = (p * p + rho * rho).sqrt();
            for z in [p + r, p - r] {
                pairs.push((z, dp * z.abs() / r));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { z: pairs.iter().map(|q| q.0).collect(), weight: pairs.iter().map(|q| q.1).collect() })
    }

    /// Arbitrary nodes without quadrature weights.
    pub fn from_points(z: Vec<f64>) -> Self {
        let weight = vec![0.0; z.len()];
        Self { z, weight }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// 200 log-spaced samples in `[rho^2/Z, Z]`, symmetric under `z -> rho^2/z`.
pub fn log_samples(rho: f64, z_max: f64, count: usize) -> Vec<f64> {
    let l = (z_max / rho).ln();
    (0..count)
        .map(|k| rho * (-l + 2.0 * l * k as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSample {
    pub z: f64,
    pub weight: f64,
    pub a: Complex64,
    pub b: Complex64,
}

impl ContinuousSample {
    pub fn r(&self) -> Complex64 {
        self.b / self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSample {
    pub xi: f64,
    pub z: Complex64,
    pub norming: Complex64,
    /// `da/dxi` at the eigenvalue.
    pub a_dot_xi: Complex64,
    /// `da/dz` at the eigenvalue.
    pub a_dot_z: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub boundary: BoundaryData,
    pub time: f64,
    pub continuous: Vec<ContinuousSample>,
    pub discrete: Vec<DiscreteSample>,
}

impl ScatteringData {
    pub fn reflectionless(boundary: BoundaryData, time: f64, discrete: Vec<DiscreteSample>) -> Self {
        Self { boundary, time, continuous: Vec::new(), discrete }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.discrete.iter().map(|d| d.xi).collect()
    }
}

/// Evaluates `(a, b)` at every real node of `grid`.
pub fn scattering_on_grid(field: &PotentialField, grid: &ZGrid, cfg: &ZsConfig) -> Result<Vec<ContinuousSample>> {
    let b = *field.boundary();
    let margin = 1e-6 * b.rho();
    grid.z
        .par_iter()
        .zip(grid.weight.par_iter())
        .map(|(&z, &w)| {
            let wrap = |e: Error| Error::AtSpectralNode { z, source: Box::new(e) };
            if z.abs() < margin || (z.abs() - b.rho()).abs() < margin {
                return Err(wrap(Error::invalid("z_grid", "node too close to the origin or a branch point")));
            }
            let point = SpectralPoint::from_z(Complex64::new(z, 0.0), &b).map_err(wrap)?;
            let (a, bb) = scattering_coefficients(field, &point, cfg).map_err(wrap)?;
            Ok(ContinuousSample { z, weight: w, a, b: bb.unwrap_or_default() })
        })
        .collect()
}
