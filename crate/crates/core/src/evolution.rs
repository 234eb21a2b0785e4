//! Time evolution of scattering data under sources of type A and B.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zakharov_shabat::ScatteringData;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Minimum number of trapezoid panels on `[t0, t]`.
pub const MIN_PANELS: usize = 200;

/// A scalar function of time: constant, tabulated (linear interpolation) or a callable.
#[derive(Clone)]
pub enum TimeFunction {
    Const(Complex64),
    Table(Vec<(f64, Complex64)>),
    Func(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFunction::Const(c) => write!(f, "Const({c})"),
            TimeFunction::Table(t) => write!(f, "Table({} samples)", t.len()),
            TimeFunction::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl TimeFunction {
    pub fn constant(re: f64, im: f64) -> Self {
        TimeFunction::Const(Complex64::new(re, im))
    }

    pub fn func(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        TimeFunction::Func(Arc::new(f))
    }

    /// Sorted table; at least one sample, strictly increasing times.
    pub fn table(mut samples: Vec<(f64, Complex64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("table", "needs at least one sample"));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("table", "sample times must be distinct"));
        }
        Ok(TimeFunction::Table(samples))
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            TimeFunction::Const(c) => Ok(*c),
            TimeFunction::Func(f) => Ok(f(t)),
            TimeFunction::Table(s) => {
                let (start, end) = (s[0].0, s[s.len() - 1].0);
                let slack = 1e-12 * (1.0 + start.abs().max(end.abs()));
                if t < start - slack || t > end + slack {
                    return Err(Error::TimeOutOfRange { t, start, end });
                }
                if s.len() == 1 {
                    return Ok(s[0].1);
                }
                let k = s.partition_point(|q| q.0 <= t).clamp(1, s.len() - 1);
                let (t0, v0) = s[k - 1];
                let (t1, v1) = s[k];
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Ok(v0 * (1.0 - w) + v1 * w)
            }
        }
    }

    fn samples_in(&self, t0: f64, t1: f64) -> Option<usize> {
        match self {
            TimeFunction::Table(s) => Some(s.iter().filter(|q| q.0 >= t0 && q.0 <= t1).count()),
            _ => None,
        }
    }

    /// Checks that the function is real on its samples (or at `probe` times).
    pub fn ensure_real(&self, name: &'static str, probe: &[f64]) -> Result<()> {
        let tol = 1e-12;
        let check = |t: f64, v: Complex64| {
            if v.im.abs() > tol * (1.0 + v.re.abs()) {
                Err(Error::NotReal { name, t, imag: v.im })
            } else {
                Ok(())
            }
        };
        match self {
            TimeFunction::Const(c) => check(0.0, *c),
            TimeFunction::Table(s) => s.iter().try_for_each(|&(t, v)| check(t, v)),
            TimeFunction::Func(f) => probe.iter().try_for_each(|&t| check(t, f(t))),
        }
    }
}

/// Composite trapezoid of `integrand(tau)` on `[t0, t1]`.
pub fn integrate_time(
    t0: f64,
    t1: f64,
    funcs: &[&TimeFunction],
    integrand: impl Fn(&[Complex64]) -> Complex64,
) -> Result<Complex64> {
    if t1 == t0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut panels = MIN_PANELS;
    for f in funcs {
        if let Some(k) = f.samples_in(t0.min(t1), t0.max(t1)) {
            if k < 2 {
                return Err(Error::QuadratureUnderResolved { samples: k, t: t1 });
            }
            panels = panels.max(4 * k);
        }
    }
    let h = (t1 - t0) / panels as f64;
    let mut vals = vec![Complex64::new(0.0, 0.0); funcs.len()];
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=panels {
        let t = t0 + k as f64 * h;
        for (v, f) in vals.iter_mut().zip(funcs) {
            *v = f.eval(t)?;
        }
        let w = if k == 0 || k == panels { 0.5 } else { 1.0 };
        sum += integrand(&vals) * w;
    }
    Ok(sum * h)
}

#[derive(Debug, Clone)]
pub struct CaseATerm {
    /// `A_n(t) = int G_n^T F_n dx`.
    pub normalization: TimeFunction,
    /// Gauge `alpha_n(t)` in `F_n = alpha_n psi_n`.
    pub gauge: TimeFunction,
}

impl CaseATerm {
    pub fn new(normalization: TimeFunction) -> Self {
        Self { normalization, gauge: TimeFunction::constant(1.0, 0.0) }
    }
}

#[derive(Debug, Clone)]
pub struct CaseBTerm {
    /// Real `B_n(t) = f1 g1 - f2 g2`.
    pub constraint: TimeFunction,
    pub beta: TimeFunction,
}

#[derive(Debug, Clone)]
pub enum SourceSpec {
    A(Vec<CaseATerm>),
    B(Vec<CaseBTerm>),
}

impl SourceSpec {
    pub fn len(&self) -> usize {
        match self {
            SourceSpec::A(v) => v.len(),
            SourceSpec::B(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Case-B constraints must be real.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        let probe: Vec<f64> = (0..=MIN_PANELS).map(|k| horizon * k as f64 / MIN_PANELS as f64).collect();
        match self {
            SourceSpec::A(terms) => {
                for term in terms {
                    for &t in &probe {
                        if term.gauge.eval(t).map(|v| v.norm() == 0.0).unwrap_or(false) {
                            return Err(Error::invalid("gauge", format!("alpha_n vanishes at t = {t}")));
                        }
                    }
                }
                Ok(())
            }
            SourceSpec::B(terms) => terms.iter().try_for_each(|t| t.constraint.ensure_real("B_n", &probe)),
        }
    }

    /// Real exponent `g_n(t)` removed from `c_n` by the source.
    pub fn source_exponent(&self, n: usize, t0: f64, t1: f64) -> Result<f64> {
        match self {
            SourceSpec::A(terms) => Ok(integrate_time(t0, t1, &[&terms[n].normalization], |v| v[0] + v[0].conj())?.re),
            SourceSpec::B(terms) => {
                let term = &terms[n];
                let s = integrate_time(t0, t1, &[&term.beta, &term.constraint], |v| (v[0] - v[0].conj()) * v[1].re)?;
                Ok((-I * s).re)
            }
        }
    }
}

/// `b0 exp(-2 i rho^2 t - 4 i xi p t)`.
pub fn evolve_b(b0: Complex64, xi: f64, p: f64, t: f64, rho: f64) -> Complex64 {
    b0 * Complex64::from_polar(1.0, -2.0 * rho * rho * t - 4.0 * xi * p * t)
}

fn discrete_phase(xi: f64, p: Complex64, t: f64, rho: f64) -> Complex64 {
    -2.0 * I * rho * rho * t - 4.0 * I * xi * p * t
}

/// `c0 exp(-2 i rho^2 t - 4 i xi p t - int_0^t (A + A*))`.
pub fn evolve_c_case_a(c0: Complex64, xi: f64, p: Complex64, t: f64, rho: f64, a_k: &TimeFunction) -> Result<Complex64> {
    let g = integrate_time(0.0, t, &[a_k], |v| v[0] + v[0].conj())?;
    Ok(c0 * (discrete_phase(xi, p, t, rho) - g).exp())
}

/// `c0 exp(-2 i rho^2 t - 4 i xi p t + i int_0^t (beta - beta*) B)`.
pub fn evolve_c_case_b(
    c0: Complex64,
    xi: f64,
    p: Complex64,
    t: f64,
    rho: f64,
    beta_k: &TimeFunction,
    b_k: &TimeFunction,
) -> Result<Complex64> {
    b_k.ensure_real("B_n", &[0.0, t])?;
    let s = integrate_time(0.0, t, &[beta_k, b_k], |v| (v[0] - v[0].conj()) * v[1].re)?;
    Ok(c0 * (discrete_phase(xi, p, t, rho) + I * s).exp())
}

/// Scattering data at time `t` from data at `sd0.time`.
pub fn evolve_scattering_data(sd0: &ScatteringData, t: f64, spec: &SourceSpec) -> Result<ScatteringData> {
    if spec.len() != sd0.discrete.len() {
        return Err(Error::ArityMismatch { expected: sd0.discrete.len(), found: spec.len() });
    }
    let rho = sd0.boundary.rho();
    let dt = t - sd0.time;
    let mut sd = sd0.clone();
    sd.time = t;
    for s in &mut sd.continuous {
        let p = 0.5 * (s.z - rho * rho / s.z);
        let xi = 0.5 * (s.z + rho * rho / s.z);
        s.b = evolve_b(s.b, xi, p, dt, rho);
    }
    for (n, d) in sd.discrete.iter_mut().enumerate() {
        let p = d.z - d.xi;
        let g = spec.source_exponent(n, sd0.time, t)?;
        d.norming *= (discrete_phase(d.xi, p, dt, rho) - g).exp();
    }
    Ok(sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn b_evolution_examples() {
        let b0 = Complex64::new(0.1, 0.0);
        assert_eq!(evolve_b(b0, 1.25, 0.75, 0.0, 1.0), b0);
        let got = evolve_b(b0, 1.25, 0.75, 1.0, 1.0);
        assert!(close(got, Complex64::from_polar(0.1, -5.75), 1e-15));
        assert!((got.norm() - 0.1).abs() < 1e-16);
    }

    #[test]
    fn c_evolution_case_a() {
        let c0 = Complex64::new(0.6, 0.8);
        let p = Complex64::new(0.0, 0.6);
        let zero = TimeFunction::constant(0.0, 0.0);
        let got = evolve_c_case_a(c0, 0.8, p, 1.0, 1.0, &zero).unwrap();
        let want = c0 * Complex64::from_polar(1.92f64.exp(), -2.0);
        assert!(close(got, want, 1e-14));
        let a = TimeFunction::constant(0.3, 0.0);
        let got = evolve_c_case_a(c0, 0.8, p, 1.0, 1.0, &a).unwrap();
        assert!(close(got, want * (-0.6f64).exp(), 1e-14));
        assert_eq!(evolve_c_case_a(c0, 0.8, p, 0.0, 1.0, &a).unwrap(), c0);
    }

    #[test]
    fn c_evolution_case_b() {
        let c0 = Complex64::new(0.6, 0.8);
        let p = Complex64::new(0.0, 0.6);
        let one = TimeFunction::constant(1.0, 0.0);
        let base = evolve_c_case_a(c0, 0.8, p, 1.0, 1.0, &TimeFunction::constant(0.0, 0.0)).unwrap();
        let real_beta = evolve_c_case_b(c0, 0.8, p, 1.0, 1.0, &TimeFunction::constant(0.7, 0.0), &one).unwrap();
        assert!(close(real_beta, base, 1e-14));
        let got = evolve_c_case_b(c0, 0.8, p, 1.0, 1.0, &TimeFunction::constant(0.0, 1.0), &one).unwrap();
        assert!(close(got, base * (-2.0f64).exp(), 1e-14));
        let complex_b = TimeFunction::constant(1.0, 0.5);
        assert!(matches!(
            evolve_c_case_b(c0, 0.8, p, 1.0, 1.0, &one, &complex_b),
            Err(Error::NotReal { .. })
        ));
    }

    #[test]
    fn tabulated_functions() {
        let tab = TimeFunction::table(vec![(0.0, 0.0.into()), (1.0, 2.0.into())]).unwrap();
        assert!(close(tab.eval(0.25).unwrap(), 0.5.into(), 1e-15));
        assert!(matches!(tab.eval(1.5), Err(Error::TimeOutOfRange { .. })));
        // linear function, trapezoid is exact: int_0^1 2t dt = 1
        let s = integrate_time(0.0, 1.0, &[&tab], |v| v[0]).unwrap();
        assert!(close(s, 1.0.into(), 1e-14));
        let short = TimeFunction::table(vec![(0.0, 1.0.into()), (2.0, 1.0.into())]).unwrap();
        assert!(matches!(
            integrate_time(0.0, 1.0, &[&short], |v| v[0]),
            Err(Error::QuadratureUnderResolved { samples: 1, .. })
        ));
    }
}
