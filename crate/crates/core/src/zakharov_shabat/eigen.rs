//! Discrete spectrum: zeros of `a` in the gap, `da/dxi`, norming constants,
//! eigenfunctions and the second-kind solution.

use num_complex::Complex64;
use rayon::prelude::*;

use super::jost::{det, integrate, JostColumn, JostKind, Local, Request, Vec2};
use super::scattering::{a_only, a_with_derivative, wronskian_scale, DiscreteSample};
use super::ZsConfig;
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::spectral::{dxi_dz, SpectralPoint};

/// Real eigenvalues in `(-rho, rho)`, ascending.
pub fn find_eigenvalues(field: &PotentialField, cfg: &ZsConfig) -> Result<Vec<f64>> {
    let b = field.boundary();
    let rho = b.rho();
    let eps = b.branch_eps();
    let n = cfg.scan_points.max(3);
    // stay clear of the branch points despite rounding in the sample positions
    let lo = -rho + 2.0 * eps;
    let span = 2.0 * (rho - 2.0 * eps);
    let xs: Vec<f64> = (0..n).map(|k| lo + span * k as f64 / (n - 1) as f64).collect();
    // a exp(i theta/2) is real on the gap
    let rot = Complex64::from_polar(1.0, 0.5 * b.theta());
    let g = |xi: f64, stride: usize| -> Result<f64> {
        let pt = SpectralPoint::gap(xi, b)?;
        Ok((a_only(field, &pt, cfg, stride)? * rot).re)
    };
    let vals: Vec<f64> = xs.par_iter().map(|&x| g(x, cfg.scan_stride)).collect::<Result<_>>()?;

    let brackets: Vec<(f64, f64)> = (0..n - 1)
        .filter(|&k| vals[k] == 0.0 || vals[k].signum() != vals[k + 1].signum())
        .filter(|&k| !(k > 0 && vals[k] == 0.0 && vals[k - 1] == 0.0))
        .map(|k| (xs[k.saturating_sub(1)], xs[(k + 2).min(n - 1)]))
        .collect();

    let mut roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(l, h)| refine(field, cfg, l, h))
        .collect::<Result<_>>()?;
    roots.sort_by(f64::total_cmp);
    for w in roots.windows(2) {
        if (w[1] - w[0]).abs() < 1e-7 * rho {
            return Err(Error::DoubleRootSuspected { first: w[0], second: w[1] });
        }
    }
    Ok(roots)
}

/// Newton on `a / a_xi` inside `[lo, hi]`, bisection on `Re(a e^{i theta/2})` as fallback.
fn refine(field: &PotentialField, cfg: &ZsConfig, lo: f64, hi: f64) -> Result<f64> {
    let b = field.boundary();
    let rot = Complex64::from_polar(1.0, 0.5 * b.theta());
    let eval = |xi: f64| -> Result<(Complex64, Complex64)> {
        let pt = SpectralPoint::gap(xi, b)?;
        a_with_derivative(field, &pt, cfg, 1)
    };

    let (mut l, mut h) = (lo, hi);
    let mut gl = (eval(l)?.0 * rot).re;
    let gh = (eval(h)?.0 * rot).re;
    let bracketed = gl.signum() != gh.signum() || gl == 0.0 || gh == 0.0;
    let mut x = 0.5 * (l + h);
    for _ in 0..cfg.max_iter {
        let (a, a_xi) = eval(x)?;
        let gx = (a * rot).re;
        if bracketed {
            if gx.signum() == gl.signum() {
                l = x;
                gl = gx;
            } else {
                h = x;
            }
        }
        if a_xi.norm() == 0.0 {
            x = 0.5 * (l + h);
            continue;
        }
        let step = (a / a_xi).re;
        let next = x - step;
        if step.abs() <= cfg.newton_tol * b.rho() {
            let (a2, _) = eval(next)?;
            if a2.norm() <= cfg.root_abs_tol {
                return Ok(next);
            }
            x = next;
            continue;
        }
        x = if next > l && next < h { next } else { 0.5 * (l + h) };
    }
    Err(Error::NoConvergence { lo, hi, iterations: cfg.max_iter })
}

/// `da/dxi` at an eigenvalue.
pub fn a_derivative(field: &PotentialField, xi_n: f64, cfg: &ZsConfig) -> Result<Complex64> {
    let pt = SpectralPoint::gap(xi_n, field.boundary())?;
    Ok(a_with_derivative(field, &pt, cfg, 1)?.1)
}

/// `da/dz = (da/dxi) (dxi/dz)`.
pub fn a_derivative_z(a_dot_xi: Complex64, z: Complex64, rho: f64) -> Complex64 {
    a_dot_xi * dxi_dz(z, rho)
}

/// Jost data at one eigenvalue, with the derivative columns.
#[derive(Debug, Clone)]
pub struct Eigenmode {
    pub point: SpectralPoint,
    pub phi: JostColumn,
    pub psi: JostColumn,
    /// Index where both sweeps are trusted; `phi = c psi` is read off here.
    pub pivot: usize,
    pub norming: Complex64,
    pub a_dot_xi: Complex64,
}

impl Eigenmode {
    /// Bounded eigenfunction: `phi` left of the pivot, `c psi` right of it.
    pub fn eigenfunction(&self, field: &PotentialField) -> Vec<Vec2> {
        let g = field.grid();
        let p = self.point.p;
        (0..g.n)
            .map(|i| {
                let x = g.x(i);
                if i <= self.pivot {
                    self.phi.raw(p, x, i)
                } else {
                    let v = self.psi.raw(p, x, i);
                    [v[0] * self.norming, v[1] * self.norming]
                }
            })
            .collect()
    }

    /// `psi_n` on the grid: `psi` right of the pivot, `phi / c` left of it.
    pub fn right_eigenfunction(&self, field: &PotentialField) -> Vec<Vec2> {
        let inv = 1.0 / self.norming;
        self.eigenfunction(field).into_iter().map(|v| [v[0] * inv, v[1] * inv]).collect()
    }

    /// `h_n = d/dxi (phi - c psi) / a_xi`.
    pub fn second_solution(&self, field: &PotentialField) -> Result<Vec<Vec2>> {
        if self.a_dot_xi.norm() < 1e-12 {
            return Err(Error::DerivativeDegenerate { xi: self.point.xi.re, modulus: self.a_dot_xi.norm() });
        }
        let g = field.grid();
        let p = self.point.p;
        let p_xi = self.point.xi / p;
        Ok((0..g.n)
            .map(|i| {
                let x = g.x(i);
                let dphi = self.phi.raw_derivative(p, p_xi, x, i).expect("derivative recorded");
                let dpsi = self.psi.raw_derivative(p, p_xi, x, i).expect("derivative recorded");
                [
                    (dphi[0] - self.norming * dpsi[0]) / self.a_dot_xi,
                    (dphi[1] - self.norming * dpsi[1]) / self.a_dot_xi,
                ]
            })
            .collect())
    }

    pub fn sample(&self, rho: f64) -> DiscreteSample {
        DiscreteSample {
            xi: self.point.xi.re,
            z: self.point.z,
            norming: self.norming,
            a_dot_xi: self.a_dot_xi,
            a_dot_z: a_derivative_z(self.a_dot_xi, self.point.z, rho),
        }
    }
}

/// Integrates `phi` and `psi` across the grid at `xi_n` and extracts `c_n`.
pub fn eigenmode(field: &PotentialField, xi_n: f64, cfg: &ZsConfig) -> Result<Eigenmode> {
    let point = SpectralPoint::gap(xi_n, field.boundary())?;
    let n = field.grid().n;
    let loc = Local::new(&point);
    let phi = integrate(field, &loc, Request { kind: JostKind::Phi, stop: n - 1, derivative: true, record: true, stride: 1 })?
        .column
        .expect("recorded");
    let psi = integrate(field, &loc, Request { kind: JostKind::Psi, stop: 0, derivative: true, record: true, stride: 1 })?
        .column
        .expect("recorded");
    let (pivot, norming) = norming_from_columns(field, &point, &phi, &psi)?;
    let a_dot_xi = a_derivative(field, xi_n, cfg)?;
    Ok(Eigenmode { point, phi, psi, pivot, norming, a_dot_xi })
}

/// Each sweep is accurate where its own solution dominates, and the
/// parasitic growth of either one is suppressed in `|phi| |psi|`, so the
/// maximum of the product sits where `|psi|` peaks among trusted nodes.
fn norming_from_columns(field: &PotentialField, point: &SpectralPoint, phi: &JostColumn, psi: &JostColumn) -> Result<(usize, Complex64)> {
    let g = field.grid();
    let p = point.p;
    let (mut best, mut pivot) = (-1.0, 0);
    for i in 0..g.n {
        let x = g.x(i);
        let f = phi.raw(p, x, i);
        let s = psi.raw(p, x, i);
        let w = (f[0].norm() + f[1].norm()) * (s[0].norm() + s[1].norm());
        if w > best {
            best = w;
            pivot = i;
        }
    }
    let x = g.x(pivot);
    let f = phi.raw(p, x, pivot);
    let s = psi.raw(p, x, pivot);
    // larger |psi| component, ties go to the second
    let k = if s[0].norm() > s[1].norm() { 0 } else { 1 };
    let c = f[k] / s[k];
    let o = 1 - k;
    let mismatch = (f[o] - c * s[o]).norm() / (f[0].norm() + f[1].norm());
    if !(mismatch <= 1e-6) {
        return Err(Error::ProportionalityViolation { xi: point.xi.re, mismatch });
    }
    Ok((pivot, c))
}

/// `c_n` for each eigenvalue.
pub fn norming_constants(field: &PotentialField, eigenvalues: &[f64], cfg: &ZsConfig) -> Result<Vec<Complex64>> {
    eigenvalues
        .par_iter()
        .map(|&xi| eigenmode(field, xi, cfg).map(|m| m.norming))
        .collect()
}

/// `h_n` on the grid for a given `c_n`.
pub fn second_solution(field: &PotentialField, xi_n: f64, c_n: Complex64, cfg: &ZsConfig) -> Result<Vec<Vec2>> {
    let mut mode = eigenmode(field, xi_n, cfg)?;
    mode.norming = c_n;
    mode.second_solution(field)
}

/// Full discrete spectrum.
pub fn discrete_data(field: &PotentialField, cfg: &ZsConfig) -> Result<Vec<DiscreteSample>> {
    let roots = find_eigenvalues(field, cfg)?;
    let rho = field.boundary().rho();
    roots
        .par_iter()
        .map(|&xi| eigenmode(field, xi, cfg).map(|m| m.sample(rho)))
        .collect()
}

/// `det(phi_n, h_n)` at every node, expected `-c_n / k_n`.
pub fn wronskian_phi_h(mode: &Eigenmode, field: &PotentialField) -> Result<(Vec<Complex64>, Complex64)> {
    let phi = mode.eigenfunction(field);
    let h = mode.second_solution(field)?;
    let k = wronskian_scale(&mode.point, field.boundary().rho());
    Ok((phi.iter().zip(&h).map(|(a, b)| det(*a, *b)).collect(), -mode.norming / k))
}
