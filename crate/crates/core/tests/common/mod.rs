//! Test-side oracles for the one-soliton example. Written out from the
//! formulas directly so that they do not share code with the library.
#![allow(dead_code)]

use nls_ist_core::potential::{PotentialField, UniformGrid};
use nls_ist_core::spectral::BoundaryData;
use num_complex::Complex64 as C;

pub const RHO: f64 = 1.0;
pub const NU: f64 = 0.6;
pub const ZETA: f64 = 0.8;
pub const CC: f64 = 1.0;

/// `alpha_+` for `alpha_- = 0`: `arg((zeta - i nu)^2 / rho^2)` in `[0, 2 pi)`.
pub fn alpha_plus() -> f64 {
    let w = C::new(ZETA, -NU) / RHO;
    (w * w).arg().rem_euclid(std::f64::consts::TAU)
}

pub fn boundary() -> BoundaryData {
    BoundaryData::new(RHO, 0.0, alpha_plus()).unwrap()
}

/// Dark soliton with exponent shift `g`.
pub fn dark(x: f64, t: f64, g: f64) -> C {
    let cap = CC.ln() + 4.0 * ZETA * NU * t - g;
    // divide through by the larger exponential
    let (a, b) = (NU * x, cap - NU * x);
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    let num = C::from_polar(ea, alpha_plus()) + eb;
    C::from_polar(RHO, -2.0 * RHO * RHO * t) * num / (ea + eb)
}

pub fn z1() -> C {
    C::new(ZETA, NU)
}

pub fn a_exact(z: C) -> C {
    (z - z1()) / (z - z1().conj())
}

/// `c1(0) = i (zeta - i nu) c / rho`.
pub fn c1_initial() -> C {
    C::new(0.6, 0.8)
}

pub fn field(half_width: f64, intervals: usize, t: f64, g: f64) -> PotentialField {
    let grid = UniformGrid::symmetric(half_width, intervals).unwrap();
    PotentialField::from_fn(grid, boundary(), t, |x| dark(x, t, g)).unwrap()
}

pub fn max_err(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
