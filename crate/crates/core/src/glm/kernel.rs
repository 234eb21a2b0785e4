use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::BoundaryData;
use crate::zakharov_shabat::{ScatteringData, REFLECTION_WARN};

/// Phase factor multiplying the two parts of `F1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum F1Phase {
    /// `rho e^{i alpha_+ - 2i rho^2 t}` on the integral, its conjugate on the residues.
    Mixed,
    /// `rho e^{-i alpha_+ + 2i rho^2 t}` on both parts.
    #[default]
    Residue,
    /// `rho e^{i alpha_+ - 2i rho^2 t}` on both parts.
    Integral,
}

/// Variable used for `a-dot` in the residue terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ADotVariable {
    #[default]
    Z,
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Residue {
    p: Complex64,
    f1: Complex64,
    f2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode {
    p: f64,
    f1: Complex64,
    f2: Complex64,
}

/// `F1`, `F2` as finite exponential sums in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchenkoKernel {
    boundary: BoundaryData,
    time: f64,
    continuous: Vec<Mode>,
    discrete: Vec<Residue>,
}

/// Builds the kernels from data already evolved to `sd.time`.
pub fn marchenko_kernels(sd: &ScatteringData, phase: F1Phase, a_dot: ADotVariable) -> Result<MarchenkoKernel> {
    let b = sd.boundary;
    let rho = b.rho();
    let t = sd.time;
    let outer = b.right_limit(t);
    let (integral, residue) = match phase {
        F1Phase::Mixed => (outer, outer.conj()),
        F1Phase::Residue => (outer.conj(), outer.conj()),
        F1Phase::Integral => (outer, outer),
    };
    let continuous = sd
        .continuous
        .iter()
        .map(|c| {
            let r = c.r();
            if !(r.norm() < REFLECTION_WARN) {
                return Err(Error::KernelDivergence { z: c.z, modulus: r.norm() });
            }
            let p = 0.5 * (c.z - rho * rho / c.z);
            let wr = r * c.weight / (4.0 * PI);
            Ok(Mode { p, f1: integral * wr / (Complex64::i() * c.z), f2: wr })
        })
        .filter(|m| m.as_ref().map_or(true, |m| m.f1.norm() + m.f2.norm() != 0.0))
        .collect::<Result<Vec<_>>>()?;
    let discrete = sd
        .discrete
        .iter()
        .map(|d| {
            let ad = match a_dot {
                ADotVariable::Z => d.a_dot_z,
                ADotVariable::Xi => d.a_dot_xi,
            };
            Residue {
                p: 0.5 * (d.z - rho * rho / d.z),
                f1: -0.5 * d.norming * residue / (ad * d.z),
                f2: -0.5 * Complex64::i() * d.norming / ad,
            }
        })
        .collect();
    Ok(MarchenkoKernel { boundary: b, time: t, continuous, discrete })
}

impl MarchenkoKernel {
    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn is_zero(&self) -> bool {
        self.continuous.is_empty() && self.discrete.is_empty()
    }

    /// Smallest decay rate among the residues.
    pub fn nu_min(&self) -> Option<f64> {
        self.discrete.iter().map(|r| r.p.im).min_by(f64::total_cmp)
    }

    /// `(F1(s), F2(s))` by direct summation.
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut f2 = f1;
        for m in &self.continuous {
            let e = Complex64::from_polar(1.0, m.p * s);
            f1 += m.f1 * e;
            f2 += m.f2 * e;
        }
        for r in &self.discrete {
            let e = (Complex64::i() * r.p * s).exp();
            f1 += r.f1 * e;
            f2 += r.f2 * e;
        }
        (f1, f2)
    }

    /// Only the residue part, e.g. for checking reflectionless data.
    pub fn eval_discrete(&self, s: f64) -> (Complex64, Complex64) {
        self.discrete.iter().fold((0.0.into(), 0.0.into()), |(a, b), r| {
            let e = (Complex64::i() * r.p * s).exp();
            (a + r.f1 * e, b + r.f2 * e)
        })
    }

    /// Tabulates both kernels at `s0 + k h`, `k < n`.
    pub fn table(&self, s0: f64, h: f64, n: usize) -> KernelTable {
        const CHUNK: usize = 512;
        let chunks: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let len = CHUNK.min(n - start);
                let sc = s0 + start as f64 * h;
                let mut f1 = vec![Complex64::new(0.0, 0.0); len];
                let mut f2 = f1.clone();
                for m in &self.continuous {
                    let step = Complex64::from_polar(1.0, m.p * h);
                    let mut e = Complex64::from_polar(1.0, m.p * sc);
                    for k in 0..len {
                        f1[k] += m.f1 * e;
                        f2[k] += m.f2 * e;
                        e *= step;
                    }
                }
                for (k, (a, b)) in f1.iter_mut().zip(f2.iter_mut()).enumerate() {
                    let (d1, d2) = self.eval_discrete(sc + k as f64 * h);
                    *a += d1;
                    *b += d2;
                }
                (f1, f2)
            })
            .collect();
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        for (a, b) in chunks {
            f1.extend(a);
            f2.extend(b);
        }
        KernelTable::new(s0, h, f1, f2)
    }
}

/// Kernel samples on a uniform `s` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub s0: f64,
    pub h: f64,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    /// `max(|F1|, |F2|)` over `[s_k, end]`.
    suffix_max: Vec<f64>,
}

impl KernelTable {
    pub fn new(s0: f64, h: f64, f1: Vec<Complex64>, f2: Vec<Complex64>) -> Self {
        let mut suffix_max = vec![0.0; f1.len()];
        let mut run = 0.0f64;
        for k in (0..f1.len()).rev() {
            run = run.max(f1[k].norm()).max(f2[k].norm());
            suffix_max[k] = run;
        }
        Self { s0, h, f1, f2, suffix_max }
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn s(&self, k: usize) -> f64 {
        self.s0 + k as f64 * self.h
    }

    /// Index of `s`, which must sit on the grid.
    pub fn index_of(&self, s: f64) -> Option<usize> {
        let k = (s - self.s0) / self.h;
        let r = k.round();
        if r < 0.0 || (k - r).abs() > 1e-6 || r as usize >= self.len() {
            return None;
        }
        Some(r as usize)
    }

    pub fn sup_from(&self, k: usize) -> f64 {
        self.suffix_max.get(k).copied().unwrap_or(0.0)
    }

    /// Steps `m` past `k0` after which the kernel stays below `threshold`.
    pub fn tail_steps(&self, k0: usize, threshold: f64) -> Option<usize> {
        (k0..self.len()).find(|&k| self.suffix_max[k] <= threshold).map(|k| k - k0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zakharov_shabat::{ContinuousSample, DiscreteSample};

    fn sd(cont: Vec<ContinuousSample>, disc: Vec<DiscreteSample>) -> ScatteringData {
        ScatteringData { boundary: BoundaryData::new(1.0, 0.0, 0.4).unwrap(), time: 0.0, continuous: cont, discrete: disc }
    }

    #[test]
    fn empty_data_gives_zero_kernel() {
        let k = marchenko_kernels(&sd(vec![], vec![]), F1Phase::Residue, ADotVariable::Z).unwrap();
        assert!(k.is_zero());
        assert_eq!(k.eval(1.3), (0.0.into(), 0.0.into()));
    }

    #[test]
    fn table_matches_direct_sum() {
        let cont: Vec<ContinuousSample> = (0..40)
            .map(|k| {
                let z = 0.3 + 0.1 * k as f64;
                ContinuousSample { z, weight: 0.1, a: 1.0.into(), b: Complex64::new(0.2 / (1.0 + z), 0.1) }
            })
            .collect();
        let disc = vec![DiscreteSample {
            xi: 0.8,
            z: Complex64::new(0.8, 0.6),
            norming: Complex64::new(0.6, 0.8),
            a_dot_xi: 1.0.into(),
            a_dot_z: Complex64::new(0.0, -0.8333),
        }];
        let k = marchenko_kernels(&sd(cont, disc), F1Phase::Residue, ADotVariable::Z).unwrap();
        let tab = k.table(-3.0, 0.01, 1500);
        for idx in [0, 511, 512, 1023, 1499] {
            let (a, b) = k.eval(tab.s(idx));
            assert!((a - tab.f1[idx]).norm() < 1e-11);
            assert!((b - tab.f2[idx]).norm() < 1e-11);
        }
        assert_eq!(tab.index_of(-3.0 + 0.37), Some(37));
        assert_eq!(tab.index_of(-3.0 + 0.375), None);
    }

    #[test]
    fn strong_reflection_is_rejected() {
        let cont = vec![ContinuousSample { z: 2.0, weight: 0.1, a: 1.0.into(), b: 1.0.into() }];
        let err = marchenko_kernels(&sd(cont, vec![]), F1Phase::Residue, ADotVariable::Z).unwrap_err();
        assert!(matches!(err, Error::KernelDivergence { .. }));
    }
}
