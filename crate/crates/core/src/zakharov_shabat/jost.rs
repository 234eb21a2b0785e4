//! Jost solutions of `f' = M f`, `M = [[-i xi, conj(u)], [u, i xi]]`.
//!
//! Each column is integrated in conditioned form `m = f exp(-s i p x)`, where
//! `s = -1` for the columns behaving like `exp(-i p x)` at their anchor and
//! `s = +1` for those behaving like `exp(i p x)`. The conditioned column obeys
//! `m' = (M - s i p) m` and stays O(1) in the region where it is dominant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::spectral::SpectralPoint;

pub type Vec2 = [Complex64; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Conditioned norm above which a column is declared divergent.
pub const OVERFLOW_GUARD: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostKind {
    /// Left, `(1, i lambda e^{i w-}) e^{-ipx}`.
    Phi,
    /// Left, `(-i lambda e^{-i w-}, 1) e^{ipx}`.
    PhiBar,
    /// Right, `(-i lambda e^{-i w+}, 1) e^{ipx}`.
    Psi,
    /// Right, `(1, i lambda e^{i w+}) e^{-ipx}`.
    PsiBar,
}

impl JostKind {
    /// Exponent sign `s` in `f = m exp(s i p x)`.
    pub fn sign(self) -> f64 {
        match self {
            JostKind::Phi | JostKind::PsiBar => -1.0,
            JostKind::PhiBar | JostKind::Psi => 1.0,
        }
    }

    pub fn from_left(self) -> bool {
        matches!(self, JostKind::Phi | JostKind::PhiBar)
    }
}

/// Spectral quantities shared by every column at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local {
    pub xi: Complex64,
    pub p: Complex64,
    /// `dp/dxi = xi / p`.
    pub p_xi: Complex64,
}

impl Local {
    pub fn new(point: &SpectralPoint) -> Self {
        Self { xi: point.xi, p: point.p, p_xi: point.xi / point.p }
    }
}

/// Asymptotic column and its xi-derivative.
pub(crate) fn asymptotic(kind: JostKind, loc: &Local, field: &PotentialField) -> (Vec2, Vec2) {
    let b = field.boundary();
    let rho = b.rho();
    let t = field.time();
    let lam = (loc.xi - loc.p) / rho;
    let lam_xi = (Complex64::new(1.0, 0.0) - loc.p_xi) / rho;
    let w = match kind {
        JostKind::Phi | JostKind::PhiBar => b.alpha_minus(),
        JostKind::Psi | JostKind::PsiBar => b.alpha_plus(),
    } - 2.0 * rho * rho * t;
    let e = Complex64::from_polar(1.0, w);
    match kind {
        JostKind::Phi | JostKind::PsiBar => ([1.0.into(), I * lam * e], [ZERO, I * lam_xi * e]),
        JostKind::PhiBar | JostKind::Psi => {
            ([-I * lam * e.conj(), 1.0.into()], [-I * lam_xi * e.conj(), ZERO])
        }
    }
}

/// Conditioned trajectory of one column, stored in grid order.
#[derive(Debug, Clone)]
pub struct JostColumn {
    pub kind: JostKind,
    /// `s` in `f = m exp(s i p x)`.
    pub sign: f64,
    /// First grid index covered.
    pub first: usize,
    pub m: Vec<Vec2>,
    /// Conditioned xi-derivative, when requested.
    pub dm: Option<Vec<Vec2>>,
}

impl JostColumn {
    pub fn covers(&self, i: usize) -> bool {
        i >= self.first && i < self.first + self.m.len()
    }

    pub fn conditioned(&self, i: usize) -> Vec2 {
        self.m[i - self.first]
    }

    /// The removed factor `exp(s i p x)`.
    pub fn factor(&self, p: Complex64, x: f64) -> Complex64 {
        (I * p * (self.sign * x)).exp()
    }

    pub fn raw(&self, p: Complex64, x: f64, i: usize) -> Vec2 {
        let m = self.conditioned(i);
        let e = self.factor(p, x);
        [m[0] * e, m[1] * e]
    }

    /// `f_xi = (m_xi + s i p_xi x m) exp(s i p x)`.
    pub fn raw_derivative(&self, p: Complex64, p_xi: Complex64, x: f64, i: usize) -> Option<Vec2> {
        let dm = self.dm.as_ref()?[i - self.first];
        let m = self.conditioned(i);
        let e = self.factor(p, x);
        let g = I * p_xi * (self.sign * x);
        Some([(dm[0] + g * m[0]) * e, (dm[1] + g * m[1]) * e])
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Request {
    pub kind: JostKind,
    /// Grid index where integration ends (inclusive).
    pub stop: usize,
    pub derivative: bool,
    /// Keep every node instead of only the end state.
    pub record: bool,
    /// 1 for the field resolution, 2 for a double step through node midpoints.
    pub stride: usize,
}

/// End state of an integration plus the optional trajectory.
pub(crate) struct Track {
    pub end: Vec2,
    pub end_d: Vec2,
    pub column: Option<JostColumn>,
}

pub(crate) fn integrate(field: &PotentialField, loc: &Local, req: Request) -> Result<Track> {
    let grid = field.grid();
    let n = grid.n;
    let (v, dv) = asymptotic(req.kind, loc, field);
    let s = req.kind.sign();
    let sip = I * loc.p * s;
    let a11 = -I * loc.xi - sip;
    let a22 = I * loc.xi - sip;
    let e1 = -I - I * loc.p_xi * s;
    let e2 = I - I * loc.p_xi * s;
    let u = field.values();
    let um = field.midpoint_values();

    let left = req.kind.from_left();
    let start = if left { 0 } else { n - 1 };
    let steps_total = start.abs_diff(req.stop);

    let mut y = [v[0], v[1], dv[0], dv[1]];
    let mut rec = if req.record { Vec::with_capacity(steps_total + 1) } else { Vec::new() };
    let mut rec_d = if req.record && req.derivative { Vec::with_capacity(steps_total + 1) } else { Vec::new() };
    let push = |y: &[Complex64; 4], rec: &mut Vec<Vec2>, rec_d: &mut Vec<Vec2>| {
        if req.record {
            rec.push([y[0], y[1]]);
            if req.derivative {
                rec_d.push([y[2], y[3]]);
            }
        }
    };
    push(&y, &mut rec, &mut rec_d);

    let rhs = |uu: Complex64, y: &[Complex64; 4]| -> [Complex64; 4] {
        let uc = uu.conj();
        let m0 = a11 * y[0] + uc * y[1];
        let m1 = uu * y[0] + a22 * y[1];
        if req.derivative {
            [m0, m1, a11 * y[2] + uc * y[3] + e1 * y[0], uu * y[2] + a22 * y[3] + e2 * y[1]]
        } else {
            [m0, m1, ZERO, ZERO]
        }
    };
    let rk4 = |y: &mut [Complex64; 4], h: f64, u0: Complex64, um: Complex64, u1: Complex64| {
        let k1 = rhs(u0, y);
        let t2 = add(y, &k1, 0.5 * h);
        let k2 = rhs(um, &t2);
        let t3 = add(y, &k2, 0.5 * h);
        let k3 = rhs(um, &t3);
        let t4 = add(y, &k3, h);
        let k4 = rhs(u1, &t4);
        for j in 0..4 {
            y[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
        }
    };

    let dx = grid.dx;
    let mut i = start;
    let guard = |y: &[Complex64; 4], i: usize| -> Result<()> {
        let norm = y[0].norm() + y[1].norm();
        if !(norm < OVERFLOW_GUARD) {
            return Err(Error::IntegrationDiverged { x: grid.x(i), norm });
        }
        Ok(())
    };
    while i != req.stop {
        let remaining = i.abs_diff(req.stop);
        let double = req.stride == 2 && remaining >= 2 && !req.record;
        if left {
            if double {
                rk4(&mut y, 2.0 * dx, u[i], u[i + 1], u[i + 2]);
                i += 2;
            } else {
                rk4(&mut y, dx, u[i], um[i], u[i + 1]);
                i += 1;
            }
        } else if double {
            rk4(&mut y, -2.0 * dx, u[i], u[i - 1], u[i - 2]);
            i -= 2;
        } else {
            rk4(&mut y, -dx, u[i], um[i - 1], u[i - 1]);
            i -= 1;
        }
        guard(&y, i)?;
        push(&y, &mut rec, &mut rec_d);
    }

    let column = if req.record {
        let (first, m, dm) = if left {
            (0, rec, req.derivative.then_some(rec_d))
        } else {
            rec.reverse();
            rec_d.reverse();
            (req.stop, rec, req.derivative.then_some(rec_d))
        };
        Some(JostColumn { kind: req.kind, sign: s, first, m, dm })
    } else {
        None
    };
    Ok(Track { end: [y[0], y[1]], end_d: [y[2], y[3]], column })
}

#[inline]
fn add(y: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h, y[3] + k[3] * h]
}

pub fn det(a: Vec2, b: Vec2) -> Complex64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Full-grid Jost columns at one spectral point.
#[derive(Debug, Clone)]
pub struct JostBundle {
    pub point: SpectralPoint,
    pub time: f64,
    pub phi: Option<JostColumn>,
    pub phi_bar: Option<JostColumn>,
    pub psi: Option<JostColumn>,
    pub psi_bar: Option<JostColumn>,
}

impl JostBundle {
    pub fn column(&self, kind: JostKind) -> Option<&JostColumn> {
        match kind {
            JostKind::Phi => self.phi.as_ref(),
            JostKind::PhiBar => self.phi_bar.as_ref(),
            JostKind::Psi => self.psi.as_ref(),
            JostKind::PsiBar => self.psi_bar.as_ref(),
        }
    }

    /// Raw value of a column at grid index `i`.
    pub fn raw(&self, kind: JostKind, x: f64, i: usize) -> Option<Vec2> {
        let c = self.column(kind)?;
        c.covers(i).then(|| c.raw(self.point.p, x, i))
    }
}

fn is_continuous(point: &SpectralPoint) -> bool {
    point.p.im.abs() <= 1e-14 * point.p.norm().max(1.0)
}

fn full_column(field: &PotentialField, point: &SpectralPoint, kind: JostKind, derivative: bool) -> Result<JostColumn> {
    let stop = if kind.from_left() { field.grid().n - 1 } else { 0 };
    let track = integrate(
        field,
        &Local::new(point),
        Request { kind, stop, derivative, record: true, stride: 1 },
    )?;
    Ok(track.column.expect("recorded"))
}

/// `phi` everywhere, plus `phi_bar` when the point is on the continuous spectrum.
pub fn jost_left(field: &PotentialField, point: &SpectralPoint) -> Result<JostBundle> {
    jost_left_with(field, point, false)
}

pub fn jost_left_with(field: &PotentialField, point: &SpectralPoint, derivative: bool) -> Result<JostBundle> {
    let phi = full_column(field, point, JostKind::Phi, derivative)?;
    let phi_bar = if is_continuous(point) {
        Some(full_column(field, point, JostKind::PhiBar, derivative)?)
    } else {
        None
    };
    Ok(JostBundle { point: *point, time: field.time(), phi: Some(phi), phi_bar, psi: None, psi_bar: None })
}

/// `psi` everywhere, plus `psi_bar` on the continuous spectrum.
pub fn jost_right(field: &PotentialField, point: &SpectralPoint) -> Result<JostBundle> {
    jost_right_with(field, point, false)
}

pub fn jost_right_with(field: &PotentialField, point: &SpectralPoint, derivative: bool) -> Result<JostBundle> {
    let psi = full_column(field, point, JostKind::Psi, derivative)?;
    let psi_bar = if is_continuous(point) {
        Some(full_column(field, point, JostKind::PsiBar, derivative)?)
    } else {
        None
    };
    Ok(JostBundle { point: *point, time: field.time(), phi: None, phi_bar: None, psi: Some(psi), psi_bar })
}

/// All four columns (two in the gap) on the whole grid.
pub fn jost_bundle(field: &PotentialField, point: &SpectralPoint, derivative: bool) -> Result<JostBundle> {
    let l = jost_left_with(field, point, derivative)?;
    let r = jost_right_with(field, point, derivative)?;
    Ok(JostBundle { phi: l.phi, phi_bar: l.phi_bar, psi: r.psi, psi_bar: r.psi_bar, ..l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::UniformGrid;
    use crate::spectral::{BoundaryData, Sheet};

    fn plane_wave(alpha: f64, t: f64) -> PotentialField {
        let b = BoundaryData::new(1.3, alpha, alpha).unwrap();
        let grid = UniformGrid::symmetric(10.0, 400).unwrap();
        PotentialField::from_fn(grid, b, t, |_| b.left_limit(t)).unwrap()
    }

    #[test]
    fn plane_wave_columns_are_exact() {
        let field = plane_wave(0.7, 0.3);
        let b = *field.boundary();
        let pt = SpectralPoint::from_xi(Complex64::new(2.1, 0.0), Sheet::ContinuousSpectrum, &b).unwrap();
        let bundle = jost_bundle(&field, &pt, false).unwrap();
        let loc = Local::new(&pt);
        for kind in [JostKind::Phi, JostKind::PhiBar, JostKind::Psi, JostKind::PsiBar] {
            let (v, _) = asymptotic(kind, &loc, &field);
            let col = bundle.column(kind).unwrap();
            for i in (0..field.grid().n).step_by(37) {
                let m = col.conditioned(i);
                assert!((m[0] - v[0]).norm() < 1e-12 && (m[1] - v[1]).norm() < 1e-12, "{kind:?} i={i}");
            }
        }
    }

    #[test]
    fn determinant_of_left_pair() {
        let field = plane_wave(0.0, 0.0);
        let b = *field.boundary();
        let pt = SpectralPoint::from_xi(Complex64::new(1.25 * 1.3, 0.0), Sheet::ContinuousSpectrum, &b).unwrap();
        let bundle = jost_left(&field, &pt).unwrap();
        let expected = 2.0 * pt.p * (pt.xi - pt.p) / (1.3 * 1.3);
        let g = field.grid();
        for i in [0, 100, 250, 400] {
            let x = g.x(i);
            let d = det(bundle.raw(JostKind::Phi, x, i).unwrap(), bundle.raw(JostKind::PhiBar, x, i).unwrap());
            assert!((d - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let b = BoundaryData::new(1.0, 0.2, 0.9).unwrap();
        let grid = UniformGrid::symmetric(12.0, 2400).unwrap();
        let field = PotentialField::from_fn(grid, b, 0.0, |x| {
            let w = 0.5 * (1.0 + (2.0 * x).tanh());
            b.left_limit(0.0) * (1.0 - w) + b.right_limit(0.0) * w
        })
        .unwrap();
        let xi = 0.4;
        let h = 1e-5;
        let at = |xi: f64| {
            let pt = SpectralPoint::gap(xi, &b).unwrap();
            jost_left_with(&field, &pt, true).unwrap()
        };
        let mid = at(xi);
        let (lo, hi) = (at(xi - h), at(xi + h));
        let p = mid.point.p;
        let p_xi = mid.point.xi / p;
        for i in [600, 1200, 1800] {
            let x = grid.x(i);
            let d = mid.phi.as_ref().unwrap().raw_derivative(p, p_xi, x, i).unwrap();
            let fl = lo.raw(JostKind::Phi, x, i).unwrap();
            let fh = hi.raw(JostKind::Phi, x, i).unwrap();
            for k in 0..2 {
                let fd = (fh[k] - fl[k]) / (2.0 * h);
                assert!((fd - d[k]).norm() < 1e-6 * (1.0 + d[k].norm()), "i={i} k={k} {fd} {}", d[k]);
            }
        }
    }
}
