//! Inverse problem: GLM kernels, per-point Nystrom solves and recovery of `u`.

mod gmres;
mod kernel;
mod nystrom;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gmres::{gmres, GmresOutcome};
pub use kernel::{marchenko_kernels, ADotVariable, F1Phase, KernelTable, MarchenkoKernel};

use crate::error::{Error, Result};
use crate::potential::{PotentialField, UniformGrid};
use crate::spectral::BoundaryData;
use crate::zakharov_shabat::{ScatteringData, Vec2};
use nystrom::{solve, Blocks};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlmConfig {
    /// Nystrom step in `y`; also the kernel table spacing.
    pub step: f64,
    /// Relative kernel level below which the tail is dropped.
    pub cutoff: f64,
    /// Longest tail tried. `None` means `25 / nu_min`, or 60 without eigenvalues.
    pub tail_cap: Option<f64>,
    pub f1_phase: F1Phase,
    pub a_dot: ADotVariable,
    /// Combine the solves at `step` and `2 step` to cancel the `O(h^2)` error term.
    pub extrapolate: bool,
    /// Systems of at most this size (`2M`) are solved densely.
    pub dense_limit: usize,
    pub gmres_restart: usize,
    pub gmres_cycles: usize,
    pub gmres_tol: f64,
    pub residual_tol: f64,
    pub max_condition: f64,
    /// Edge tolerance, relative to `rho`, for reconstructed fields.
    pub boundary_tol: f64,
}

impl Default for GlmConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            cutoff: 1e-10,
            tail_cap: None,
            f1_phase: F1Phase::default(),
            a_dot: ADotVariable::default(),
            extrapolate: false,
            dense_limit: 256,
            gmres_restart: 40,
            gmres_cycles: 40,
            gmres_tol: 1e-13,
            residual_tol: 1e-10,
            max_condition: 1e12,
            boundary_tol: 1e-4,
        }
    }
}

impl GlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step", "must be positive"));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::invalid("cutoff", "must be positive"));
        }
        if matches!(self.tail_cap, Some(y) if !(y > 0.0)) {
            return Err(Error::invalid("tail_cap", "must be positive"));
        }
        if self.gmres_restart == 0 || self.gmres_cycles == 0 {
            return Err(Error::invalid("gmres_restart", "restart and cycles must be nonzero"));
        }
        Ok(())
    }

    fn tail_cap_for(&self, kernel: &MarchenkoKernel) -> f64 {
        self.tail_cap.unwrap_or_else(|| kernel.nu_min().map_or(60.0, |nu| 25.0 / nu))
    }
}

/// Both kernel rows on `y_i = x + i h`, `i < M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchenkoSolution {
    pub x: f64,
    pub h: f64,
    pub k11: Vec<Complex64>,
    pub k12: Vec<Complex64>,
    pub k21: Vec<Complex64>,
    pub k22: Vec<Complex64>,
    /// Max defect of the discrete equation, relative to `max(1, |F|)`.
    pub residual: f64,
    pub condition: f64,
    pub boundary: BoundaryData,
    pub time: f64,
}

impl MarchenkoSolution {
    pub fn len(&self) -> usize {
        self.k21.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k21.is_empty()
    }

    pub fn y(&self, i: usize) -> f64 {
        self.x + i as f64 * self.h
    }

    pub fn tail(&self) -> f64 {
        (self.len().saturating_sub(1)) as f64 * self.h
    }

    pub fn matrix(&self, i: usize) -> [[Complex64; 2]; 2] {
        [[self.k11[i], self.k12[i]], [self.k21[i], self.k22[i]]]
    }

    /// Largest entry of `K(x, x + Y)`.
    pub fn last_norm(&self) -> f64 {
        let m = self.len() - 1;
        [self.k11[m], self.k12[m], self.k21[m], self.k22[m]].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn solve_on_table(kernel: &MarchenkoKernel, table: &KernelTable, x: f64, cap: f64, cfg: &GlmConfig) -> Result<MarchenkoSolution> {
    let k0 = table.index_of(2.0 * x).ok_or_else(|| Error::invalid("x", "2x is not on the kernel table"))?;
    let head = table.f1[k0].norm().max(table.f2[k0].norm());
    let threshold = cfg.cutoff * head.max(1.0);
    let cap_steps = (cap / table.h + 1e-9).floor() as usize;
    let too_short = || {
        let last = (k0 + cap_steps).min(table.len() - 1);
        Error::TailTooShort { x, tail: table.f1[last].norm().max(table.f2[last].norm()) }
    };
    let steps = table.tail_steps(k0, threshold).filter(|&s| s <= cap_steps).ok_or_else(too_short)?;
    let m = (steps + 1).max(2);
    if k0 + 2 * m - 1 > table.len() {
        return Err(too_short());
    }
    let blocks = Blocks::new(table, k0, m);
    let s = solve(&blocks, x, cfg)?;
    let [r1, r2] = s.rows;
    Ok(MarchenkoSolution {
        x,
        h: table.h,
        k11: r1[..m].to_vec(),
        k12: r1[m..].to_vec(),
        k21: r2[..m].to_vec(),
        k22: r2[m..].to_vec(),
        residual: s.residual,
        condition: s.condition,
        boundary: *kernel.boundary(),
        time: kernel.time(),
    })
}

/// GLM solve at a single point.
pub fn solve_marchenko_at_x(kernel: &MarchenkoKernel, x: f64, cfg: &GlmConfig) -> Result<MarchenkoSolution> {
    cfg.validate()?;
    let cap = cfg.tail_cap_for(kernel);
    let h = cfg.step;
    let n = (2.0 * cap / h).ceil() as usize + 2;
    let table = kernel.table(2.0 * x, h, n);
    solve_on_table(kernel, &table, x, cap, cfg)
}

/// `u(x) = rho e^{i alpha_+ - 2i rho^2 t} - 2 K21(x, x)`.
pub fn recover_potential(solution: &MarchenkoSolution) -> Complex64 {
    solution.boundary.right_limit(solution.time) - 2.0 * solution.k21[0]
}

/// Pointwise output of a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub u: Vec<Complex64>,
    pub residual: Vec<f64>,
    pub condition: Vec<f64>,
    pub tail: Vec<f64>,
}

/// Solves at every grid node; `2 dx` must be a multiple of `cfg.step`
/// (of `2 cfg.step` when extrapolating).
pub fn reconstruct(sd: &ScatteringData, grid: &UniformGrid, cfg: &GlmConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    if !cfg.extrapolate {
        return reconstruct_plain(sd, grid, cfg);
    }
    let fine = reconstruct_plain(sd, grid, cfg)?;
    let coarse = reconstruct_plain(sd, grid, &GlmConfig { step: 2.0 * cfg.step, ..*cfg })?;
    Ok(Reconstruction {
        u: fine.u.iter().zip(&coarse.u).map(|(f, c)| (4.0 * f - c) / 3.0).collect(),
        residual: fine.residual.iter().zip(&coarse.residual).map(|(a, b)| a.max(*b)).collect(),
        condition: fine.condition.iter().zip(&coarse.condition).map(|(a, b)| a.max(*b)).collect(),
        tail: fine.tail,
    })
}

fn reconstruct_plain(sd: &ScatteringData, grid: &UniformGrid, cfg: &GlmConfig) -> Result<Reconstruction> {
    let h = cfg.step;
    let ratio = 2.0 * grid.dx / h;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
        return Err(Error::invalid("step", "2 dx must be a positive multiple of the GLM step"));
    }
    let kernel = marchenko_kernels(sd, cfg.f1_phase, cfg.a_dot)?;
    let cap = cfg.tail_cap_for(&kernel);
    let s0 = 2.0 * grid.x0;
    let n = ((2.0 * grid.end() + 2.0 * cap - s0) / h).ceil() as usize + 2;
    let table = kernel.table(s0, h, n);
    let per_x: Vec<(Complex64, f64, f64, f64)> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            solve_on_table(&kernel, &table, x, cap, cfg)
                .map(|s| (recover_potential(&s), s.residual, s.condition, s.tail()))
                .map_err(|e| Error::AtPosition { x, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    Ok(Reconstruction {
        u: per_x.iter().map(|v| v.0).collect(),
        residual: per_x.iter().map(|v| v.1).collect(),
        condition: per_x.iter().map(|v| v.2).collect(),
        tail: per_x.iter().map(|v| v.3).collect(),
    })
}

/// Reconstructed potential as a field; edges are checked against `cfg.boundary_tol`.
pub fn reconstruct_field(sd: &ScatteringData, grid: &UniformGrid, cfg: &GlmConfig) -> Result<PotentialField> {
    let rec = reconstruct(sd, grid, cfg)?;
    let b = sd.boundary;
    PotentialField::from_samples_with_tol(*grid, rec.u, b, sd.time, cfg.boundary_tol * b.rho())
}

/// `psi(x, z)` from the triangular representation.
pub fn jost_via_representation(sol: &MarchenkoSolution, z: Complex64) -> Vec2 {
    let b = sol.boundary;
    let rho = b.rho();
    let v0 = -Complex64::i() * b.right_limit(sol.time).conj() / z;
    let p = 0.5 * (z - rho * rho / z);
    let e = |y: f64| (Complex64::i() * p * y).exp();
    let mut out = [v0 * e(sol.x), e(sol.x)];
    let m = sol.len();
    for j in 0..m {
        let w = if j == 0 || j == m - 1 { 0.5 * sol.h } else { sol.h };
        let k = sol.matrix(j);
        let ey = e(sol.y(j)) * w;
        out[0] += (k[0][0] * v0 + k[0][1]) * ey;
        out[1] += (k[1][0] * v0 + k[1][1]) * ey;
    }
    out
}
