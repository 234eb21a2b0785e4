//! Trapezoid Nystrom discretization of the matrix GLM equation at one `x`.
//!
//! With `y_i = x + i h` and `F(i + j) = F(2x + (i + j) h)`, a row `(a, b)` of
//! the kernel matrix satisfies
//!
//! ```text
//! a_i + sum_j w_j [a_j F1(i+j) + b_j F2(i+j)]  = -f_a(i)
//! b_i + sum_j w_j [a_j F2*(i+j) + b_j F1(i+j)] = -f_b(i)
//! ```
//!
//! The second row uses `(f_a, f_b) = (F2, F1)` and the first `(F1, F2*)`, so
//! both share one operator.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::gmres::gmres;
use super::kernel::KernelTable;
use super::GlmConfig;
use crate::error::{Error, Result};

type C = Complex64;

/// Hankel blocks of the operator sampled from a kernel table.
pub(crate) struct Blocks<'a> {
    pub f1: &'a [C],
    pub f2: &'a [C],
    pub f2c: Vec<C>,
    pub w: Vec<f64>,
    pub m: usize,
}

impl<'a> Blocks<'a> {
    pub fn new(table: &'a KernelTable, k0: usize, m: usize) -> Self {
        let len = 2 * m - 1;
        let f1 = &table.f1[k0..k0 + len];
        let f2 = &table.f2[k0..k0 + len];
        let f2c = f2.iter().map(|v| v.conj()).collect();
        let h = table.h;
        let mut w = vec![h; m];
        if m > 1 {
            w[0] = 0.5 * h;
            w[m - 1] = 0.5 * h;
        } else {
            w[0] = 0.0;
        }
        Self { f1, f2, f2c, w, m }
    }

    /// Dense `2m x 2m` operator matrix.
    pub fn dense(&self) -> DMatrix<C> {
        let m = self.m;
        DMatrix::from_fn(2 * m, 2 * m, |r, c| {
            let (i, bi) = (r % m, r / m);
            let (j, bj) = (c % m, c / m);
            let t = match (bi, bj) {
                (0, 0) | (1, 1) => self.f1[i + j],
                (0, 1) => self.f2[i + j],
                _ => self.f2c[i + j],
            };
            let d = if r == c { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
            d + t * self.w[j]
        })
    }

    /// Right-hand side `-(f_a, f_b)` from the first `m` table entries.
    pub fn rhs(fa: &[C], fb: &[C], m: usize) -> Vec<C> {
        fa[..m].iter().chain(&fb[..m]).map(|v| -v).collect()
    }
}

/// FFT application of the Hankel operator.
pub(crate) struct HankelOp<'a> {
    blocks: &'a Blocks<'a>,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    t1: Vec<C>,
    t2: Vec<C>,
    t2c: Vec<C>,
}

impl<'a> HankelOp<'a> {
    pub fn new(blocks: &'a Blocks<'a>) -> Self {
        let m = blocks.m;
        let n = (3 * m).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let spectrum = |t: &[C]| {
            let mut buf = vec![C::new(0.0, 0.0); n];
            buf[..t.len()].copy_from_slice(t);
            fwd.process(&mut buf);
            buf
        };
        let t1 = spectrum(blocks.f1);
        let t2 = spectrum(blocks.f2);
        let t2c = spectrum(&blocks.f2c);
        Self { blocks, n, fwd, inv, t1, t2, t2c }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        let m = self.blocks.m;
        let n = self.n;
        let load = |part: &[C]| {
            // reversed so the Hankel sum becomes a convolution
            let mut buf = vec![C::new(0.0, 0.0); n];
            for j in 0..m {
                buf[m - 1 - j] = part[j] * self.blocks.w[j];
            }
            self.fwd.process(&mut buf);
            buf
        };
        let ua = load(&v[..m]);
        let ub = load(&v[m..]);
        let mut ra: Vec<C> = (0..n).map(|k| self.t1[k] * ua[k] + self.t2[k] * ub[k]).collect();
        let mut rb: Vec<C> = (0..n).map(|k| self.t2c[k] * ua[k] + self.t1[k] * ub[k]).collect();
        self.inv.process(&mut ra);
        self.inv.process(&mut rb);
        let scale = 1.0 / n as f64;
        let mut out = Vec::with_capacity(2 * m);
        out.extend((0..m).map(|i| v[i] + ra[i + m - 1] * scale));
        out.extend((0..m).map(|i| v[m + i] + rb[i + m - 1] * scale));
        out
    }
}

pub(crate) struct Solved {
    pub rows: [Vec<C>; 2],
    pub residual: f64,
    pub condition: f64,
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn defect(op: &HankelOp, x: &[C], b: &[C]) -> f64 {
    let ax = op.apply(x);
    let d = ax.iter().zip(b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    d / max_norm(b).max(1.0)
}

/// Solves for both kernel rows at one `x`. `rows[0] = (K11, K12)`, `rows[1] = (K21, K22)`.
pub(crate) fn solve(blocks: &Blocks, x: f64, cfg: &GlmConfig) -> Result<Solved> {
    let m = blocks.m;
    let rhs1 = Blocks::rhs(blocks.f1, &blocks.f2c, m);
    let rhs2 = Blocks::rhs(blocks.f2, blocks.f1, m);
    let op = HankelOp::new(blocks);
    let (rows, condition) = if 2 * m <= cfg.dense_limit {
        let a = blocks.dense();
        let lu = a.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::SingularSystem { x, condition: f64::INFINITY })?;
        let condition = one_norm(&a) * one_norm(&inv);
        if !(condition <= cfg.max_condition) {
            return Err(Error::SingularSystem { x, condition });
        }
        let lu = a.lu();
        let s1 = lu.solve(&nalgebra::DVector::from_vec(rhs1.clone())).expect("nonsingular");
        let s2 = lu.solve(&nalgebra::DVector::from_vec(rhs2.clone())).expect("nonsingular");
        ([s1.as_slice().to_vec(), s2.as_slice().to_vec()], condition)
    } else {
        let g1 = gmres(|v| op.apply(v), &rhs1, cfg.gmres_restart, cfg.gmres_cycles, cfg.gmres_tol);
        let g2 = gmres(|v| op.apply(v), &rhs2, cfg.gmres_restart, cfg.gmres_cycles, cfg.gmres_tol);
        let condition = g1.condition.max(g2.condition);
        if !(condition <= cfg.max_condition) {
            return Err(Error::SingularSystem { x, condition });
        }
        ([g1.x, g2.x], condition)
    };
    let residual = defect(&op, &rows[0], &rhs1).max(defect(&op, &rows[1], &rhs2));
    if !(residual <= cfg.residual_tol) {
        return Err(Error::SolverStalled { x, residual });
    }
    Ok(Solved { rows, residual, condition })
}

fn one_norm(a: &DMatrix<C>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}
