//! Source pairs `(F_n, G_n)` for both source classes and the resulting NLS forcing.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{CaseATerm, CaseBTerm};
use crate::glm::ADotVariable;
use crate::potential::PotentialField;
use crate::zakharov_shabat::{wronskian_scale, Eigenmode, Vec2};

type C = Complex64;

/// One source pair on the field grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair {
    pub xi: f64,
    pub f: Vec<Vec2>,
    pub g: Vec<Vec2>,
    /// `alpha_n(t)` and `beta_n(t)` used to build the pair.
    pub alpha: C,
    pub beta: C,
}

fn swap_conj(v: &[Vec2]) -> Vec<Vec2> {
    v.iter().map(|a| [a[1].conj(), a[0].conj()]).collect()
}

impl SourcePair {
    /// `F_{N+n} = (f2*, f1*)`, `G_{N+n} = (g2*, g1*)`.
    pub fn conjugate(&self) -> SourcePair {
        SourcePair { xi: self.xi, f: swap_conj(&self.f), g: swap_conj(&self.g), alpha: self.alpha.conj(), beta: self.beta.conj() }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `f1 g1 - f2 g2` at every node.
    pub fn bilinear(&self) -> Vec<C> {
        self.f.iter().zip(&self.g).map(|(f, g)| f[0] * g[0] - f[1] * g[1]).collect()
    }
}

/// Pairs `1..N` followed by their conjugate extensions.
pub fn extended(pairs: &[SourcePair]) -> Vec<SourcePair> {
    pairs.iter().cloned().chain(pairs.iter().map(SourcePair::conjugate)).collect()
}

/// Trapezoid value of `int a^T b dx`.
pub fn overlap(a: &[Vec2], b: &[Vec2], dx: f64) -> C {
    let n = a.len().min(b.len());
    let term = |i: usize| a[i][0] * b[i][0] + a[i][1] * b[i][1];
    let inner: C = (1..n.saturating_sub(1)).map(term).sum();
    let ends = if n >= 2 { 0.5 * (term(0) + term(n - 1)) } else { C::new(0.0, 0.0) };
    (inner + ends) * dx
}

fn sigma1(v: &[Vec2]) -> Vec<Vec2> {
    v.iter().map(|a| [a[1], a[0]]).collect()
}

/// Case A: `F_n = alpha_n psi_n`, `G_n = beta_n sigma1 phi_n` with
/// `int G_n^T F_n = A_n(t)`.
pub fn build_sources_case_a(field: &PotentialField, modes: &[Eigenmode], terms: &[CaseATerm], t: f64) -> Result<Vec<SourcePair>> {
    if modes.len() != terms.len() {
        return Err(Error::ArityMismatch { expected: modes.len(), found: terms.len() });
    }
    let dx = field.grid().dx;
    modes
        .par_iter()
        .zip(terms)
        .enumerate()
        .map(|(n, (mode, term))| {
            let alpha = term.gauge.eval(t)?;
            let a_n = term.normalization.eval(t)?;
            let phi = mode.eigenfunction(field);
            let psi = mode.right_eigenfunction(field);
            let s1phi = sigma1(&phi);
            let ov = overlap(&s1phi, &psi, dx);
            if !(ov.norm() >= 1e-12) {
                return Err(Error::DegenerateOverlap { n, overlap: ov.norm() });
            }
            if alpha.norm() == 0.0 {
                return Err(Error::invalid("gauge", "alpha_n must be nonzero"));
            }
            let beta = a_n / (alpha * ov);
            let f = psi.iter().map(|v| [v[0] * alpha, v[1] * alpha]).collect();
            let g = s1phi.iter().map(|v| [v[0] * beta, v[1] * beta]).collect();
            Ok(SourcePair { xi: mode.point.xi.re, f, g, alpha, beta })
        })
        .collect()
}

/// Bilinear drift allowed when building case-B pairs, relative to `|B_n|`.
pub const CONSTRAINT_TOL: f64 = 1e-5;

/// Case B: `F_n = alpha_n psi_n` with `alpha_n = -rho^2 B_n / (2 p_n (xi_n - p_n))`,
/// `G_n = beta_n / a-dot sigma1 phi_n + sigma1 h_n`.
pub fn build_sources_case_b(
    field: &PotentialField,
    modes: &[Eigenmode],
    terms: &[CaseBTerm],
    t: f64,
    a_dot: ADotVariable,
) -> Result<Vec<SourcePair>> {
    if modes.len() != terms.len() {
        return Err(Error::ArityMismatch { expected: modes.len(), found: terms.len() });
    }
    let rho = field.boundary().rho();
    modes
        .par_iter()
        .zip(terms)
        .enumerate()
        .map(|(n, (mode, term))| {
            let b_n = term.constraint.eval(t)?.re;
            let beta = term.beta.eval(t)?;
            let alpha = -wronskian_scale(&mode.point, rho) * b_n;
            let sample = mode.sample(rho);
            let ad = match a_dot {
                ADotVariable::Z => sample.a_dot_z,
                ADotVariable::Xi => sample.a_dot_xi,
            };
            let psi = mode.right_eigenfunction(field);
            let phi = mode.eigenfunction(field);
            let h = mode.second_solution(field)?;
            let scale = beta / ad;
            let f: Vec<Vec2> = psi.iter().map(|v| [v[0] * alpha, v[1] * alpha]).collect();
            let g: Vec<Vec2> = phi.iter().zip(&h).map(|(p, h)| [p[1] * scale + h[1], p[0] * scale + h[0]]).collect();
            let pair = SourcePair { xi: mode.point.xi.re, f, g, alpha, beta };
            let drift = constraint_drift(&pair, b_n);
            if !(drift <= CONSTRAINT_TOL) {
                return Err(Error::ConstraintViolation { n, drift });
            }
            Ok(pair)
        })
        .collect()
}

/// `max |f1 g1 - f2 g2 - B| / |B|`, absolute when `B = 0`.
pub fn constraint_drift(pair: &SourcePair, b_n: f64) -> f64 {
    let scale = if b_n == 0.0 { 1.0 } else { b_n.abs() };
    pair.bilinear().iter().map(|v| (v - b_n).norm()).fold(0.0, f64::max) / scale
}

/// `-2i sum_n (f1n* g2n* + f2n g1n)` over pairs `1..N`.
pub fn source_rhs(pairs: &[SourcePair], n: usize) -> Result<Vec<C>> {
    let mut out = vec![C::new(0.0, 0.0); n];
    for p in pairs {
        if p.f.len() != n || p.g.len() != n {
            return Err(Error::GridMismatch { expected: n, found: p.f.len().max(p.g.len()) });
        }
        for (o, (f, g)) in out.iter_mut().zip(p.f.iter().zip(&p.g)) {
            *o += f[0].conj() * g[1].conj() + f[1] * g[0];
        }
    }
    let m2i = C::new(0.0, -2.0);
    Ok(out.into_iter().map(|v| v * m2i).collect())
}

/// `int G_n^T phi_m dx` for every ordered pair `(n, m)`.
pub fn orthogonality_matrix(pairs: &[SourcePair], modes: &[Eigenmode], field: &PotentialField) -> Vec<Vec<C>> {
    let dx = field.grid().dx;
    let phis: Vec<Vec<Vec2>> = modes.iter().map(|m| m.eigenfunction(field)).collect();
    pairs.iter().map(|p| phis.iter().map(|phi| overlap(&p.g, phi, dx)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SourcePair {
        SourcePair {
            xi: 0.3,
            f: vec![[C::new(1.0, 2.0), C::new(-0.5, 0.25)]; 3],
            g: vec![[C::new(0.1, 0.0), C::new(0.0, 3.0)]; 3],
            alpha: C::new(1.0, 1.0),
            beta: C::new(0.0, 2.0),
        }
    }

    #[test]
    fn conjugate_extension_is_an_involution() {
        let p = pair();
        let q = p.conjugate();
        assert_eq!(q.f[0], [C::new(-0.5, -0.25), C::new(1.0, -2.0)]);
        assert_eq!(q.conjugate(), p);
    }

    #[test]
    fn rhs_formula() {
        let p = pair();
        let rhs = source_rhs(std::slice::from_ref(&p), 3).unwrap();
        let want = C::new(0.0, -2.0) * (p.f[0][0].conj() * p.g[0][1].conj() + p.f[0][1] * p.g[0][0]);
        assert!((rhs[1] - want).norm() < 1e-15);
        assert!(source_rhs(&[], 4).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(matches!(source_rhs(&[p], 5), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn overlap_is_trapezoid() {
        let a = vec![[C::new(1.0, 0.0), C::new(0.0, 0.0)]; 5];
        let b = vec![[C::new(2.0, 0.0), C::new(7.0, 0.0)]; 5];
        assert!((overlap(&a, &b, 0.5) - C::new(4.0, 0.0)).norm() < 1e-15);
    }
}
