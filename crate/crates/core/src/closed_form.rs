//! Exact one-soliton data: a dark soliton on the plane-wave background with a
//! source of type A or B.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{integrate_time, TimeFunction};
use crate::spectral::{wrap_phase, BoundaryData};
use crate::zakharov_shabat::{DiscreteSample, ScatteringData};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams {
    pub rho: f64,
    pub nu: f64,
    pub c: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

impl ExampleParams {
    /// The right phase follows from the left one: a reflectionless dark
    /// soliton with eigenvalue `z1 = zeta + i nu` needs
    /// `exp(i (alpha_+ - alpha_-)) = (conj(z1) / rho)^2`.
    pub fn new(rho: f64, nu: f64, c: f64, alpha_minus: f64) -> Result<Self> {
        let mut p = Self::with_phases(rho, nu, c, alpha_minus, 0.0)?;
        p.alpha_plus = Self::consistent_alpha_plus(rho, nu, alpha_minus);
        Ok(p)
    }

    /// Both phases as given; only the pair from [`Self::consistent_alpha_plus`]
    /// yields the soliton, any other choice is a different potential.
    pub fn with_phases(rho: f64, nu: f64, c: f64, alpha_minus: f64, alpha_plus: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid("rho", "rho must be positive"));
        }
        if !(nu > 0.0 && nu < rho) {
            return Err(Error::invalid("nu", "need 0 < nu < rho"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", "c must be positive"));
        }
        BoundaryData::new(rho, alpha_minus, alpha_plus)?;
        Ok(Self { rho, nu, c, alpha_minus: wrap_phase(alpha_minus), alpha_plus: wrap_phase(alpha_plus) })
    }

    pub fn consistent_alpha_plus(rho: f64, nu: f64, alpha_minus: f64) -> f64 {
        let zeta = (rho * rho - nu * nu).sqrt();
        let w = Complex64::new(zeta, -nu) / rho;
        wrap_phase(alpha_minus + (w * w).arg())
    }

    pub fn zeta(&self) -> f64 {
        ((self.rho - self.nu) * (self.rho + self.nu)).sqrt()
    }

    pub fn z1(&self) -> Complex64 {
        Complex64::new(self.zeta(), self.nu)
    }

    pub fn boundary(&self) -> BoundaryData {
        BoundaryData::new(self.rho, self.alpha_minus, self.alpha_plus).expect("validated")
    }

    /// `ln C(t)` with `C = c exp(4 zeta nu t - g)`.
    fn log_c(&self, t: f64, g: f64) -> f64 {
        self.c.ln() + 4.0 * self.zeta() * self.nu * t - g
    }

    /// Centre of the dip, where `exp(nu x) = C exp(-nu x)`.
    pub fn center(&self, t: f64, g: f64) -> f64 {
        self.log_c(t, g) / (2.0 * self.nu)
    }
}

/// Source data for the closed forms.
#[derive(Debug, Clone)]
pub enum ExampleCase {
    A { a1: TimeFunction, gauge: TimeFunction },
    B { beta1: TimeFunction, b1: TimeFunction },
}

impl ExampleCase {
    pub fn a(a1: TimeFunction) -> Self {
        ExampleCase::A { a1, gauge: TimeFunction::constant(1.0, 0.0) }
    }

    /// `g(t)`: `int (A + A*)` in case A, `-i int (beta - beta*) B` in case B.
    pub fn g(&self, t: f64) -> Result<f64> {
        match self {
            ExampleCase::A { a1, .. } => Ok(integrate_time(0.0, t, &[a1], |v| v[0] + v[0].conj())?.re),
            ExampleCase::B { beta1, b1 } => {
                let s = integrate_time(0.0, t, &[beta1, b1], |v| (v[0] - v[0].conj()) * v[1].re)?;
                Ok((-I * s).re)
            }
        }
    }
}

/// Weights `(e^{nu x}, C e^{-nu x}) / D` and `ln D`, `D = e^{nu x} + C e^{-nu x}`,
/// computed without overflow.
fn split(params: &ExampleParams, x: f64, t: f64, g: f64) -> (f64, f64, f64) {
    let a = params.nu * x;
    let b = params.log_c(t, g) - params.nu * x;
    let m = a.max(b);
    let log_d = m + ((a - m).exp() + (b - m).exp()).ln();
    ((a - log_d).exp(), (b - log_d).exp(), log_d)
}

pub fn example_u(params: &ExampleParams, x: f64, t: f64, g: f64) -> Complex64 {
    let (wp, wm, _) = split(params, x, t, g);
    let phase = Complex64::from_polar(params.rho, -2.0 * params.rho * params.rho * t);
    phase * (Complex64::from_polar(wp, params.alpha_plus) + Complex64::from_polar(wm, params.alpha_minus))
}

pub fn example_initial(params: &ExampleParams, x: f64) -> Complex64 {
    example_u(params, x, 0.0, 0.0)
}

/// `a(z) = (z - z1) / (z - conj(z1))`.
pub fn example_a(params: &ExampleParams, z: Complex64) -> Complex64 {
    let z1 = params.z1();
    (z - z1) / (z - z1.conj())
}

/// `c1(t) = i (zeta - i nu) c exp(i alpha_- - 2 i rho^2 t + 4 zeta nu t - g) / rho`.
pub fn example_norming(params: &ExampleParams, t: f64, g: f64) -> Complex64 {
    let zeta = params.zeta();
    let rho = params.rho;
    I * Complex64::new(zeta, -params.nu) * params.c / rho
        * (I * params.alpha_minus - 2.0 * I * rho * rho * t + 4.0 * zeta * params.nu * t - g).exp()
}

pub fn example_scattering(params: &ExampleParams, t: f64, case: &ExampleCase) -> Result<ScatteringData> {
    let g = case.g(t)?;
    let z1 = params.z1();
    let nu = params.nu;
    let d = DiscreteSample {
        xi: params.zeta(),
        z: z1,
        norming: example_norming(params, t, g),
        a_dot_xi: -z1 / (2.0 * nu * nu),
        a_dot_z: 1.0 / (2.0 * I * nu),
    };
    Ok(ScatteringData::reflectionless(params.boundary(), t, vec![d]))
}

/// Which reading of the case-B `G1` third term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThirdTerm {
    /// Lower component `exp(i theta)`.
    PlusSign,
    /// Lower component `-exp(i theta)`.
    SignFlipped,
}

/// `(u, F1, G1)` at `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSample {
    pub u: Complex64,
    pub f: [Complex64; 2],
    pub g: [Complex64; 2],
}

pub fn example_field(
    params: &ExampleParams,
    case: &ExampleCase,
    x: f64,
    t: f64,
    third: ThirdTerm,
) -> Result<ExampleSample> {
    let g = case.g(t)?;
    example_field_with_g(params, case, x, t, g, third)
}

/// As [`example_field`] with `g(t)` supplied.
pub fn example_field_with_g(
    params: &ExampleParams,
    case: &ExampleCase,
    x: f64,
    t: f64,
    g: f64,
    third: ThirdTerm,
) -> Result<ExampleSample> {
    let rho = params.rho;
    let nu = params.nu;
    let zeta = params.zeta();
    let w = Complex64::new(zeta, -nu);
    let u = example_u(params, x, t, g);
    let (_, wm, log_d) = split(params, x, t, g);
    let inv_d = (-log_d).exp();
    let rt = 2.0 * rho * rho * t;
    let psi_dir = [-I * w / rho * Complex64::from_polar(1.0, -params.alpha_plus + rt), Complex64::new(1.0, 0.0)];
    let phi_dir = [I * w / rho * Complex64::from_polar(1.0, params.alpha_minus - rt), Complex64::new(1.0, 0.0)];
    let scale = |s: Complex64, v: [Complex64; 2]| [v[0] * s, v[1] * s];
    match case {
        ExampleCase::A { a1, gauge } => {
            let alpha = gauge.eval(t)?;
            let a = a1.eval(t)?;
            let f = scale(alpha * inv_d, psi_dir);
            // C / D = wm e^{nu x}
            let g_vec = scale(nu * a / alpha * wm * (nu * x).exp(), phi_dir);
            Ok(ExampleSample { u, f, g: g_vec })
        }
        ExampleCase::B { beta1, b1 } => {
            let b = b1.eval(t)?.re;
            let beta = beta1.eval(t)?;
            let alpha = -rho * rho * b / (2.0 * I * nu * w);
            let f = scale(alpha * inv_d, psi_dir);
            let c_over_d = wm * (nu * x).exp();
            let pre = -2.0 * nu / Complex64::new(zeta, nu);
            let s = nu * beta - 2.0 * x * zeta;
            let t1 = [pre * (s + I) * phi_dir[0] * c_over_d, pre * (s - I) * phi_dir[1] * c_over_d];
            let up = [I * w / rho * Complex64::from_polar(1.0, params.alpha_plus - rt), Complex64::new(1.0, 0.0)];
            // e^{2 nu x} / D
            let t2 = scale(((2.0 * nu * x) - log_d).exp().into(), up);
            let sign = match third {
                ThirdTerm::PlusSign => 1.0,
                ThirdTerm::SignFlipped => -1.0,
            };
            let low = [
                -I * w / rho * Complex64::from_polar(1.0, params.alpha_minus - rt),
                Complex64::from_polar(sign, params.alpha_plus - params.alpha_minus),
            ];
            // C^2 e^{-2 nu x} / D
            let t3 = scale((2.0 * params.log_c(t, g) - 2.0 * nu * x - log_d).exp().into(), low);
            Ok(ExampleSample { u, f, g: [t1[0] + t2[0] + t3[0], t1[1] + t2[1] + t3[1]] })
        }
    }
}

/// Plane wave `rho exp(i alpha - 2 i rho^2 t)`.
pub fn plane_wave(rho: f64, alpha: f64, t: f64) -> Complex64 {
    Complex64::from_polar(rho, alpha - 2.0 * rho * rho * t)
}
